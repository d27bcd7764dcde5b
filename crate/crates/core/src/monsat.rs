//! Monotone formulas: parsing, evaluation, next-assignment search and the
//! order whose intervals count satisfying assignments.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use rand::Rng;

use crate::block::{block_order, block_universe, BlockRef, GroupScheme, Grouped};
use crate::constructed::OrderTriple;
use crate::error::{Error, Result};
use crate::order::{interval_size_by_walk, IntervalSpec};
use crate::poly::Poly;
use crate::word::Word;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    /// 1-based variable index.
    Var(usize),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    /// Highest variable index.
    pub fn arity(&self) -> usize {
        match self {
            Formula::Var(i) => *i,
            Formula::And(a, b) | Formula::Or(a, b) => a.arity().max(b.arity()),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::Var(_) => 0,
            Formula::And(a, b) | Formula::Or(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Value on raw bits; bit i assigns variable i + 1.
    pub fn eval_bits(&self, a: &[u8]) -> bool {
        match self {
            Formula::Var(i) => a[i - 1] == 1,
            Formula::And(x, y) => x.eval_bits(a) && y.eval_bits(a),
            Formula::Or(x, y) => x.eval_bits(a) || y.eval_bits(a),
        }
    }

    /// Canonical text without spaces, as embedded in order words.
    pub fn canonical(&self) -> String {
        self.to_string()
    }

    /// The canonical text, 8 bits per byte.
    pub fn encode(&self) -> Word {
        encode_text(&self.canonical())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Var(i) => write!(f, "x{i}"),
            Formula::And(a, b) => write!(f, "({a}&{b})"),
            Formula::Or(a, b) => write!(f, "({a}|{b})"),
        }
    }
}

pub fn encode_text(s: &str) -> Word {
    Word::from_bits(
        s.bytes()
            .flat_map(|b| (0..8).rev().map(move |i| (b >> i) & 1)),
    )
}

pub fn decode_text(w: &Word) -> Option<String> {
    if !w.len().is_multiple_of(8) {
        return None;
    }
    let bytes: Vec<u8> = w
        .bits()
        .chunks(8)
        .map(|c| c.iter().fold(0u8, |acc, &b| (acc << 1) | b))
        .collect();
    String::from_utf8(bytes).ok()
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn formula(&mut self) -> Result<Formula> {
        match self.peek() {
            Some(b'x') => self.var(),
            Some(b'(') => {
                self.pos += 1;
                let a = self.formula()?;
                let op = match self.peek() {
                    Some(c @ (b'&' | b'|')) => c,
                    Some(b'!' | b'~' | b'-') => {
                        return self.err("negation is not allowed in monotone formulas")
                    }
                    Some(c) => {
                        return self.err(format!("expected '&' or '|', found {:?}", c as char))
                    }
                    None => return self.err("expected '&' or '|', found end of input"),
                };
                self.pos += 1;
                let b = self.formula()?;
                if self.peek() != Some(b')') {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(if op == b'&' {
                    Formula::and(a, b)
                } else {
                    Formula::or(a, b)
                })
            }
            Some(b'!' | b'~' | b'-') => self.err("negation is not allowed in monotone formulas"),
            Some(b'0' | b'1') => self.err("constants are not allowed in monotone formulas"),
            Some(c) => self.err(format!("unexpected {:?}", c as char)),
            None => self.err("unexpected end of input"),
        }
    }

    fn var(&mut self) -> Result<Formula> {
        self.pos += 1;
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let digits = &self.s[start..self.pos];
        if digits.is_empty() || digits[0] == b'0' {
            self.pos = start;
            return self.err("variable index must be a positive number without leading zeros");
        }
        let idx = std::str::from_utf8(digits)
            .ok()
            .and_then(|d| d.parse::<usize>().ok())
            .filter(|&i| i <= 64)
            .ok_or_else(|| Error::Parse {
                pos: start,
                msg: "variable index too large".into(),
            })?;
        Ok(Formula::Var(idx))
    }
}

/// Parses `var | "(" f "&" f ")" | "(" f "|" f ")"`, whitespace ignored.
pub fn parse_formula(text: &str) -> Result<Formula> {
    let mut p = Parser {
        s: text.as_bytes(),
        pos: 0,
    };
    let f = p.formula()?;
    if p.peek().is_some() {
        return p.err("trailing input");
    }
    Ok(f)
}

/// Evaluates F on an assignment of exactly arity(F) bits, counting the query if asked.
pub fn eval(f: &Formula, a: &Word, counter: Option<&mut u64>) -> Result<bool> {
    if a.len() != f.arity() {
        return Err(Error::Invalid(format!(
            "assignment has {} bits but the formula has {} variables",
            a.len(),
            f.arity()
        )));
    }
    if let Some(c) = counter {
        *c += 1;
    }
    Ok(f.eval_bits(a.bits()))
}

/// Least b >= a (lex, same length) with f(b) = r, assuming f monotone; `None` if there is none.
///
/// The climb uses fixed-length increment and gives up when it overflows.
pub fn next_assignment(f: &mut dyn FnMut(&[u8]) -> bool, a: &Word, r: bool) -> Option<Word> {
    let n = a.len();
    let rb = u8::from(r);
    let filled = |b: &[u8]| {
        let mut v = b.to_vec();
        v.resize(n, rb);
        v
    };
    let mut b: Vec<u8> = a.bits().to_vec();
    let all_ones = b.iter().all(|&x| x == 1);
    if (all_ones && f(&b) != r) || f(&vec![rb; n]) != r {
        return None;
    }
    while !b.is_empty() && f(&filled(&b)) != r {
        // fixed-length increment
        let mut i = b.len();
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            if b[i] == 0 {
                b[i] = 1;
                break;
            }
            b[i] = 0;
        }
        let last_one = b.iter().rposition(|&x| x == 1)?;
        b.truncate(last_one + 1);
    }
    while b.len() < n {
        let mut probe = b.clone();
        probe.push(0);
        if f(&filled(&probe)) == r {
            b.push(0);
        } else {
            b.push(1);
        }
    }
    Some(Word::from_bits(b))
}

/// next_assignment on a formula, returning the number of evaluations made.
pub fn next_assignment_counted(f: &Formula, a: &Word, r: bool) -> (Option<Word>, u64) {
    let mut queries = 0u64;
    let res = next_assignment(
        &mut |bits: &[u8]| {
            queries += 1;
            f.eval_bits(bits)
        },
        a,
        r,
    );
    (res, queries)
}

/// The truth-table answer to the same question.
pub fn next_assignment_oracle(f: &Formula, a: &Word, r: bool) -> Option<Word> {
    std::iter::successors(Some(a.clone()), |w| w.lex_next()).find(|b| f.eval_bits(b.bits()) == r)
}

pub fn count_satisfying(f: &Formula) -> u64 {
    Word::all_of_len(f.arity())
        .filter(|a| f.eval_bits(a.bits()))
        .count() as u64
}

/// Truth-table count; zero for text that is not a monotone formula.
pub fn count_monsat_bruteforce(text: &str) -> u64 {
    parse_formula(text)
        .map(|f| count_satisfying(&f))
        .unwrap_or(0)
}

// ---------------------------------------------------------------------------

/// Splits `1^k 0 F rest` with |F| = k, F the canonical encoding of a formula.
fn split_prefix(w: &Word) -> Option<(usize, Formula)> {
    let bits = w.bits();
    let k = bits.iter().position(|&b| b == 0)?;
    if k == 0 || k % 8 != 0 || bits.len() < 2 * k + 1 {
        return None;
    }
    let fbits = w.slice(k + 1, 2 * k + 1);
    let text = decode_text(&fbits)?;
    let f = parse_formula(&text).ok()?;
    (f.canonical() == text).then_some((2 * k + 1, f))
}

struct MonsatScheme {
    cache: Mutex<HashMap<Word, Option<(usize, Arc<Formula>)>>>,
}

impl MonsatScheme {
    fn prefix(&self, w: &Word) -> Option<(usize, Arc<Formula>)> {
        let k = w.bits().iter().position(|&b| b == 0)?;
        if w.len() < 2 * k + 1 {
            return None;
        }
        let key = w.prefix(2 * k + 1);
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return hit.clone();
        }
        let v = split_prefix(&key).map(|(l, f)| (l, Arc::new(f)));
        self.cache.lock().unwrap().insert(key, v.clone());
        v
    }

    fn formula(&self, blk: &BlockRef) -> Arc<Formula> {
        self.prefix(&blk.key)
            .expect("block key is a formula prefix")
            .1
    }
}

fn tag_of(blk: &BlockRef, w: &Word) -> (u8, u8, u8) {
    let s = blk.suffix(w);
    (s[0], s[1], s[2])
}

impl GroupScheme for MonsatScheme {
    fn block_of(&self, w: &Word) -> Option<BlockRef> {
        let (plen, f) = self.prefix(w)?;
        let n = f.arity();
        if w.len() != plen + 3 + n {
            return None;
        }
        let tag = &w.bits()[plen..plen + 3];
        if tag[0] == 1 && (tag[1] == 1 || tag[2] == 1) {
            return None;
        }
        let key = w.prefix(plen);
        let hi = Word::join(&[&key, &crate::word::w("100"), &Word::ones(n)]);
        Some(BlockRef::up_to(key, 3 + n, hi))
    }

    fn group(&self, blk: &BlockRef, w: &Word) -> usize {
        let sat = || self.formula(blk).eval_bits(&blk.suffix(w)[3..]);
        match tag_of(blk, w) {
            (0, 0, 0) => 0,
            (0, 0, 1) => {
                if sat() {
                    1
                } else {
                    4
                }
            }
            (0, 1, 0) => 2,
            (0, 1, 1) => {
                if sat() {
                    4
                } else {
                    3
                }
            }
            _ => 5,
        }
    }

    fn group_count(&self) -> usize {
        6
    }

    fn fast_succ(&self, blk: &BlockRef, u: &Word) -> Option<Option<Word>> {
        let f = self.formula(blk);
        let n = f.arity();
        let y = u.suffix_from(blk.key.len() + 3);
        let mk = |tag: &str, y: &Word| Word::join(&[&blk.key, &crate::word::w(tag), y]);
        let next = |from: Option<Word>, r: bool| -> Option<Word> {
            let start = from?;
            next_assignment(&mut |b: &[u8]| f.eval_bits(b), &start, r)
        };
        let zero = Word::zeros(n);
        let leftovers_from = |tag: &str, from: Option<Word>| -> Option<Word> {
            if tag == "001" {
                if let Some(a) = next(from, false) {
                    return Some(mk("001", &a));
                }
                return next(Some(zero.clone()), true).map(|a| mk("011", &a));
            }
            next(from, true).map(|a| mk("011", &a))
        };
        let g = self.group(blk, u);
        Some(Some(match g {
            0 => match y.lex_next() {
                Some(ny) => mk("000", &ny),
                None => mk(
                    "001",
                    &next(Some(zero.clone()), true).expect("1^n satisfies"),
                ),
            },
            1 => match next(y.lex_next(), true) {
                Some(a) => mk("001", &a),
                None => mk("010", &zero),
            },
            2 => match y.lex_next() {
                Some(ny) => mk("010", &ny),
                None => match next(Some(zero.clone()), false) {
                    Some(a) => mk("011", &a),
                    None => leftovers_from("001", Some(zero.clone()))
                        .unwrap_or_else(|| mk("100", &zero)),
                },
            },
            3 => match next(y.lex_next(), false) {
                Some(a) => mk("011", &a),
                None => {
                    leftovers_from("001", Some(zero.clone())).unwrap_or_else(|| mk("100", &zero))
                }
            },
            4 => {
                let tag = if tag_of(blk, u).1 == 0 { "001" } else { "011" };
                leftovers_from(tag, y.lex_next()).unwrap_or_else(|| mk("100", &zero))
            }
            _ => match y.lex_next() {
                Some(ny) => mk("100", &ny),
                None => return Some(None),
            },
        }))
    }
}

/// The formula encoded by x, if x encodes one.
pub fn decode_formula(x: &Word) -> Option<Formula> {
    parse_formula(&decode_text(x)?).ok()
}

/// Total order with adjacency in which the interval at the encoding of F holds its
/// satisfying assignments. Inputs that do not encode a formula get an empty interval.
pub fn build_monsat_order() -> OrderTriple {
    let scheme = Arc::new(Grouped(MonsatScheme {
        cache: Mutex::new(HashMap::new()),
    }));
    let order = block_order("monsat-order", scheme.clone(), true, true);
    let bound = |x: &Word, tag: &str, bit: u8| -> Word {
        match decode_formula(x) {
            Some(f) => {
                let e = f.encode();
                Word::join(&[
                    &Word::ones(e.len()),
                    &Word::zeros(1),
                    &e,
                    &crate::word::w(tag),
                    &Word::repeat(bit, f.arity()),
                ])
            }
            None => x.clone(),
        }
    };
    let b: crate::order::WordFn = Arc::new(move |x: &Word| bound(x, "000", 1));
    let t: crate::order::WordFn = Arc::new(move |x: &Word| bound(x, "010", 0));
    let bu = b.clone();
    let su = scheme.clone();
    OrderTriple {
        name: "monsat".into(),
        spec: IntervalSpec::new(order, b, t),
        target: "#satisfying assignments".into(),
        boundary_bound: Poly::new(vec![4, 2]),
        precheck: None,
        universe: Some(Arc::new(move |x: &Word| {
            let bx = bu(x);
            match crate::block::GroupScheme::block_of(&su.0, &bx) {
                Some(blk) => block_universe(&*su, &blk),
                None => vec![bx],
            }
        })),
    }
}

/// #MONSAT by walking the interval of [`build_monsat_order`].
pub fn count_monsat_interval(triple: &OrderTriple, f: &Formula) -> Result<u64> {
    interval_size_by_walk(&triple.spec, &f.encode(), None, 1 << 24)
}

// ---------------------------------------------------------------------------
// Formula corpora.

/// Every formula over variables x1..x_vars of depth at most `depth`.
pub fn all_formulas(vars: usize, depth: usize) -> Vec<Formula> {
    let mut layer: Vec<Formula> = (1..=vars).map(Formula::Var).collect();
    for _ in 0..depth {
        let mut next = layer.clone();
        for a in &layer {
            for b in &layer {
                next.push(Formula::and(a.clone(), b.clone()));
                next.push(Formula::or(a.clone(), b.clone()));
            }
        }
        layer = next;
    }
    layer
}

/// One formula per non-constant monotone function of x1..xn, written as the
/// disjunction of its minimal true points. Arity can come out below n when the
/// function ignores the last variables.
pub fn all_monotone_functions(n: usize) -> Vec<Formula> {
    let size = 1usize << n;
    let mut out = Vec::new();
    // A monotone function is an up-set of {0,1}^n; enumerate all truth tables and keep the monotone ones.
    assert!(n <= 4, "2^(2^n) truth tables");
    for table in 1u32..(1u32 << size) - 1 {
        let val = |a: usize| table >> a & 1 == 1;
        let monotone = (0..size).all(|a| (0..n).all(|i| !val(a) || val(a | (1 << i))));
        if !monotone {
            continue;
        }
        // minimal true points
        let minimal: Vec<usize> = (0..size)
            .filter(|&a| val(a) && (0..n).all(|i| a >> i & 1 == 0 || !val(a & !(1 << i))))
            .collect();
        let term = |a: usize| {
            // bit i of the table index assigns variable n - i (first variable is the high bit)
            let vars: Vec<usize> = (0..n).filter(|i| a >> i & 1 == 1).map(|i| n - i).collect();
            let mut it = vars.into_iter().rev();
            let first = Formula::Var(it.next().expect("nonzero minimal point"));
            it.fold(first, |acc, v| Formula::and(acc, Formula::Var(v)))
        };
        let mut terms = minimal.into_iter().map(term);
        let first = terms.next().expect("non-constant");
        out.push(terms.fold(first, Formula::or));
    }
    out
}

/// A random formula over x1..x_vars with `leaves` leaves; arity is exactly `vars`
/// because the last leaf is forced to x_vars.
pub fn random_formula<R: Rng>(rng: &mut R, vars: usize, leaves: usize) -> Formula {
    fn build<R: Rng>(rng: &mut R, vars: usize, leaves: usize, force_last: bool) -> Formula {
        if leaves == 1 {
            return Formula::Var(if force_last {
                vars
            } else {
                rng.gen_range(1..=vars)
            });
        }
        let left = rng.gen_range(1..leaves);
        let a = build(rng, vars, left, false);
        let b = build(rng, vars, leaves - left, force_last);
        if rng.gen_bool(0.5) {
            Formula::and(a, b)
        } else {
            Formula::or(a, b)
        }
    }
    build(rng, vars, leaves.max(1), true)
}
