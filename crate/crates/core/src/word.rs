//! Binary words and the shortlex helpers every order is built from.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use smallvec::SmallVec;

use crate::error::Error;

/// Bit storage; words up to this many bits live inline.
type Bits = SmallVec<[u8; 32]>;

/// A finite word over {0, 1}. Ordered shortlex: shorter first, then lexicographic.
#[derive(Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Word(Bits);

impl Word {
    pub fn empty() -> Self {
        Word(Bits::new())
    }

    /// Builds a word from raw bits; any nonzero byte counts as 1.
    pub fn from_bits<I: IntoIterator<Item = u8>>(bits: I) -> Self {
        Word(bits.into_iter().map(|b| u8::from(b != 0)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        Word::empty().padded(0, n)
    }

    pub fn ones(n: usize) -> Self {
        Word::empty().padded(1, n)
    }

    pub fn repeat(bit: u8, n: usize) -> Self {
        if bit == 0 {
            Self::zeros(n)
        } else {
            Self::ones(n)
        }
    }

    /// Fixed-width big-endian encoding of `value`. Errors if it does not fit.
    pub fn from_u64(value: u64, width: usize) -> Result<Self, Error> {
        if width < 64 && value >> width != 0 {
            return Err(Error::Overflow { value, width });
        }
        Ok(Word(
            (0..width)
                .map(|i| {
                    let shift = width - 1 - i;
                    if shift >= 64 {
                        0
                    } else {
                        ((value >> shift) & 1) as u8
                    }
                })
                .collect(),
        ))
    }

    /// Big-endian binary value. Words longer than 64 bits must have leading zeros.
    pub fn value(&self) -> u64 {
        self.0
            .iter()
            .fold(0u64, |acc, &b| (acc << 1) | u64::from(b))
    }

    /// Shortest binary representation of `value` ("0" for zero).
    pub fn binary(value: u64) -> Self {
        if value == 0 {
            return Word(Bits::from_elem(0, 1));
        }
        let width = 64 - value.leading_zeros() as usize;
        Word::from_u64(value, width).expect("width fits")
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn bit(&self, i: usize) -> u8 {
        self.0[i]
    }

    pub fn push(&mut self, bit: u8) {
        self.0.push(u8::from(bit != 0));
    }

    pub fn extend_from(&mut self, other: &Word) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Bits::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// This word followed by `extra` copies of `bit`.
    pub fn padded(&self, bit: u8, extra: usize) -> Word {
        // Slice copies; SmallVec::resize goes element by element.
        const FILL: [[u8; 64]; 2] = [[0; 64], [1; 64]];
        let src = &FILL[usize::from(bit != 0)];
        let mut v = Bits::with_capacity(self.len() + extra);
        v.extend_from_slice(&self.0);
        let mut left = extra;
        while left > 0 {
            let k = left.min(64);
            v.extend_from_slice(&src[..k]);
            left -= k;
        }
        Word(v)
    }

    /// Concatenates any number of words.
    pub fn join(parts: &[&Word]) -> Word {
        let mut v = Bits::with_capacity(parts.iter().map(|p| p.len()).sum());
        for p in parts {
            v.extend_from_slice(&p.0);
        }
        Word(v)
    }

    pub fn slice(&self, start: usize, end: usize) -> Word {
        Word(Bits::from_slice(&self.0[start..end]))
    }

    pub fn prefix(&self, n: usize) -> Word {
        self.slice(0, n)
    }

    pub fn suffix_from(&self, start: usize) -> Word {
        self.slice(start, self.len())
    }

    pub fn starts_with(&self, other: &Word) -> bool {
        self.0.starts_with(&other.0)
    }

    pub fn is_all(&self, bit: u8) -> bool {
        self.0.iter().all(|&b| b == bit)
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }

    /// Next word of the same length in lexicographic order; `None` after 1^n.
    pub fn lex_next(&self) -> Option<Word> {
        let mut v = self.0.clone();
        for i in (0..v.len()).rev() {
            if v[i] == 0 {
                v[i] = 1;
                return Some(Word(v));
            }
            v[i] = 0;
        }
        None
    }

    /// Previous word of the same length; `None` before 0^n.
    pub fn lex_prev(&self) -> Option<Word> {
        let mut v = self.0.clone();
        for i in (0..v.len()).rev() {
            if v[i] == 1 {
                v[i] = 0;
                return Some(Word(v));
            }
            v[i] = 1;
        }
        None
    }

    /// Shortlex successor: lex-next, or 0^{n+1} after 1^n.
    pub fn shortlex_next(&self) -> Word {
        self.lex_next()
            .unwrap_or_else(|| Word::zeros(self.len() + 1))
    }

    /// Shortlex predecessor; `None` for the empty word.
    pub fn shortlex_prev(&self) -> Option<Word> {
        if self.is_empty() {
            return None;
        }
        Some(
            self.lex_prev()
                .unwrap_or_else(|| Word::ones(self.len() - 1)),
        )
    }

    /// All words of length exactly `n`, in lexicographic order.
    pub fn all_of_len(n: usize) -> impl Iterator<Item = Word> {
        let first = Some(Word::zeros(n));
        std::iter::successors(first, |w| w.lex_next())
    }

    /// All words of length at most `n`, in shortlex order.
    pub fn all_up_to(n: usize) -> impl Iterator<Item = Word> {
        (0..=n).flat_map(Word::all_of_len)
    }

    /// All words with the given prefix and `extra` further bits, in lex order.
    pub fn all_with_prefix(prefix: &Word, extra: usize) -> impl Iterator<Item = Word> + '_ {
        Word::all_of_len(extra).map(move |s| prefix.concat(&s))
    }
}

/// Shortlex comparison.
pub fn shortlex_cmp(a: &[u8], b: &[u8]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        shortlex_cmp(&self.0, &other.0)
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("ε");
        }
        for &b in &self.0 {
            f.write_str(if b == 0 { "0" } else { "1" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "ε" || s == "eps" {
            return Ok(Word::empty());
        }
        s.chars()
            .enumerate()
            .map(|(i, c)| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Parse {
                    pos: i,
                    msg: format!("unexpected character {c:?} in binary word"),
                }),
            })
            .collect::<Result<Bits, _>>()
            .map(Word)
    }
}

impl From<Word> for String {
    fn from(w: Word) -> String {
        w.bits()
            .iter()
            .map(|&b| if b == 0 { '0' } else { '1' })
            .collect()
    }
}

impl TryFrom<String> for Word {
    type Error = Error;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// Shorthand for literal words in code and tests. Panics on bad input.
pub fn w(s: &str) -> Word {
    s.parse().expect("literal binary word")
}
