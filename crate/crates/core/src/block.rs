//! Orders that agree with shortlex except inside disjoint "blocks".
//!
//! A block is a run of equal-length words `lo..=hi` that is contiguous in
//! shortlex. Inside a block a scheme supplies its own order; across blocks, and
//! for words outside every block, positions are compared in shortlex where every
//! block word sits at the position of its block's `lo`.

use std::sync::Arc;

use crate::order::POrder;
use crate::poly::Poly;
use crate::word::Word;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockRef {
    /// The word the block belongs to (usually the input x).
    pub key: Word,
    /// Bits after the key.
    pub width: usize,
    /// Last word, when the block stops short of `key·1^width`.
    top: Option<Word>,
}

impl BlockRef {
    /// The block `key·0^width ..= key·1^width`.
    pub fn suffixes(key: Word, width: usize) -> Self {
        BlockRef {
            key,
            width,
            top: None,
        }
    }

    /// The block `key·0^width ..= top`; `top` must extend `key` by `width` bits.
    pub fn up_to(key: Word, width: usize, top: Word) -> Self {
        debug_assert!(top.len() == key.len() + width && top.starts_with(&key));
        BlockRef {
            key,
            width,
            top: Some(top),
        }
    }

    pub fn lo(&self) -> Word {
        self.key.padded(0, self.width)
    }

    pub fn hi(&self) -> Word {
        self.top
            .clone()
            .unwrap_or_else(|| self.key.padded(1, self.width))
    }

    pub fn contains(&self, w: &Word) -> bool {
        w.len() == self.key.len() + self.width
            && w.starts_with(&self.key)
            && self.top.as_ref().is_none_or(|t| w.bits() <= t.bits())
    }

    pub fn is_lo(&self, w: &Word) -> bool {
        self.contains(w) && self.suffix(w).iter().all(|&b| b == 0)
    }

    pub fn is_hi(&self, w: &Word) -> bool {
        match &self.top {
            Some(t) => w == t,
            None => self.contains(w) && self.suffix(w).iter().all(|&b| b == 1),
        }
    }

    /// Block words in lexicographic order.
    pub fn words(&self) -> impl Iterator<Item = Word> + '_ {
        std::iter::successors(Some(self.lo()), move |w| {
            if self.is_hi(w) {
                None
            } else {
                w.lex_next()
            }
        })
    }

    /// Everything after the key.
    pub fn suffix<'a>(&self, w: &'a Word) -> &'a [u8] {
        &w.bits()[self.key.len()..]
    }
}

/// The unique k <= n with k + width(k) = n, if any. `width` must make
/// k + width(k) strictly increasing.
pub fn find_prefix_len(n: usize, width: impl Fn(usize) -> usize) -> Option<usize> {
    for k in 0..=n {
        let total = k + width(k);
        if total == n {
            return Some(k);
        }
        if total > n {
            return None;
        }
    }
    None
}

/// Locates the block `x·Σ^{width(|x|)}` containing `w`, if any.
pub fn suffix_block(w: &Word, width: impl Fn(usize) -> usize) -> Option<BlockRef> {
    let k = find_prefix_len(w.len(), &width)?;
    Some(BlockRef::suffixes(w.prefix(k), width(k)))
}

pub trait BlockScheme: Send + Sync + 'static {
    fn block_of(&self, w: &Word) -> Option<BlockRef>;
    fn local_leq(&self, blk: &BlockRef, u: &Word, v: &Word) -> bool;
    /// Successor inside the block; `None` at the block maximum. Only consulted for total schemes.
    fn local_succ(&self, blk: &BlockRef, u: &Word) -> Option<Word>;
    fn local_precedes(&self, blk: &BlockRef, u: &Word, v: &Word) -> bool {
        self.local_succ(blk, u).as_ref() == Some(v)
    }
    fn block_min(&self, blk: &BlockRef) -> Word;
    fn block_max(&self, blk: &BlockRef) -> Word;
}

/// A block split into numbered groups, each ordered lexicographically, groups in index order.
pub trait GroupScheme: Send + Sync + 'static {
    fn block_of(&self, w: &Word) -> Option<BlockRef>;
    fn group(&self, blk: &BlockRef, w: &Word) -> usize;
    fn group_count(&self) -> usize;
    /// A direct successor if the scheme knows one; `None` falls back to scanning.
    fn fast_succ(&self, _blk: &BlockRef, _u: &Word) -> Option<Option<Word>> {
        None
    }
}

/// Adapts a [`GroupScheme`] into a [`BlockScheme`].
pub struct Grouped<G>(pub G);

impl<G: GroupScheme> Grouped<G> {
    fn first_in_group(&self, blk: &BlockRef, g: usize, from: Option<Word>) -> Option<Word> {
        let mut cur = match from {
            Some(w) => next_in_block(blk, &w),
            None => Some(blk.lo()),
        };
        while let Some(w) = cur {
            if self.0.group(blk, &w) == g {
                return Some(w);
            }
            cur = next_in_block(blk, &w);
        }
        None
    }

    fn last_in_group(&self, blk: &BlockRef, g: usize) -> Option<Word> {
        let mut cur = Some(blk.hi());
        while let Some(w) = cur {
            if self.0.group(blk, &w) == g {
                return Some(w);
            }
            cur = if blk.is_lo(&w) { None } else { w.lex_prev() };
        }
        None
    }
}

fn next_in_block(blk: &BlockRef, w: &Word) -> Option<Word> {
    if blk.is_hi(w) {
        None
    } else {
        w.lex_next()
    }
}

impl<G: GroupScheme> BlockScheme for Grouped<G> {
    fn block_of(&self, w: &Word) -> Option<BlockRef> {
        self.0.block_of(w)
    }

    fn local_leq(&self, blk: &BlockRef, u: &Word, v: &Word) -> bool {
        let (gu, gv) = (self.0.group(blk, u), self.0.group(blk, v));
        gu < gv || (gu == gv && u.bits() <= v.bits())
    }

    fn local_succ(&self, blk: &BlockRef, u: &Word) -> Option<Word> {
        if let Some(s) = self.0.fast_succ(blk, u) {
            return s;
        }
        let g = self.0.group(blk, u);
        if let Some(w) = self.first_in_group(blk, g, Some(u.clone())) {
            return Some(w);
        }
        (g + 1..self.0.group_count()).find_map(|h| self.first_in_group(blk, h, None))
    }

    fn block_min(&self, blk: &BlockRef) -> Word {
        (0..self.0.group_count())
            .find_map(|g| self.first_in_group(blk, g, None))
            .expect("blocks are nonempty")
    }

    fn block_max(&self, blk: &BlockRef) -> Word {
        (0..self.0.group_count())
            .rev()
            .find_map(|g| self.last_in_group(blk, g))
            .expect("blocks are nonempty")
    }
}

/// First element at or after the shortlex position `w`, which must not be strictly inside a block.
fn enter<S: BlockScheme + ?Sized>(s: &S, w: &Word) -> Word {
    match s.block_of(w) {
        Some(b) => s.block_min(&b),
        None => w.clone(),
    }
}

pub fn block_leq<S: BlockScheme + ?Sized>(s: &S, u: &Word, v: &Word) -> bool {
    if u == v {
        return true;
    }
    let (bu, bv) = (s.block_of(u), s.block_of(v));
    if let (Some(a), Some(b)) = (&bu, &bv) {
        if a == b {
            return s.local_leq(a, u, v);
        }
    }
    let pu = bu.as_ref().map_or_else(|| u.clone(), BlockRef::lo);
    let pv = bv.as_ref().map_or_else(|| v.clone(), BlockRef::lo);
    pu < pv
}

pub fn block_successor<S: BlockScheme + ?Sized>(s: &S, u: &Word) -> Word {
    match s.block_of(u) {
        Some(b) => match s.local_succ(&b, u) {
            Some(v) => v,
            None => enter(s, &b.hi().shortlex_next()),
        },
        None => enter(s, &u.shortlex_next()),
    }
}

pub fn block_precedes<S: BlockScheme + ?Sized>(s: &S, u: &Word, v: &Word) -> bool {
    let bu = s.block_of(u);
    let bv = s.block_of(v);
    if let (Some(a), Some(b)) = (&bu, &bv) {
        if a == b {
            return s.local_precedes(a, u, v);
        }
    }
    let exit_hi = match &bu {
        Some(b) if &s.block_max(b) == u => b.hi(),
        Some(_) => return false,
        None => u.clone(),
    };
    let entry_lo = match &bv {
        Some(b) if &s.block_min(b) == v => b.lo(),
        Some(_) => return false,
        None => v.clone(),
    };
    exit_hi.shortlex_next() == entry_lo
}

/// The element immediately before the block in the global order, the block, and
/// the element immediately after it. This set is convex in the order.
pub fn block_universe<S: BlockScheme + ?Sized>(s: &S, blk: &BlockRef) -> Vec<Word> {
    let mut out = Vec::new();
    if let Some(prev) = blk.lo().shortlex_prev() {
        out.push(match s.block_of(&prev) {
            Some(b) => s.block_max(&b),
            None => prev,
        });
    }
    out.extend(blk.words());
    out.push(enter(s, &blk.hi().shortlex_next()));
    out
}

/// Builds the order. Total schemes get a successor; `with_precedes` controls
/// whether the adjacency capability is exposed.
pub fn block_order<S: BlockScheme>(
    name: &str,
    scheme: Arc<S>,
    is_total: bool,
    with_precedes: bool,
) -> POrder {
    let s1 = scheme.clone();
    let s2 = scheme.clone();
    let s3 = scheme.clone();
    POrder {
        name: name.to_string(),
        leq: Some(Arc::new(move |u: &Word, v: &Word| block_leq(&*s1, u, v))),
        precedes: if with_precedes {
            Some(Arc::new(move |u: &Word, v: &Word| {
                block_precedes(&*s2, u, v)
            }))
        } else {
            None
        },
        successor: if is_total {
            Some(Arc::new(move |u: &Word| Some(block_successor(&*s3, u))))
        } else {
            None
        },
        length_bound: Poly::identity(),
        is_total,
        min_element: Some(enter(&*scheme, &Word::empty())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::{verify_adjacency, verify_order_axioms};
    use crate::word::w;

    /// Reverses each block x·Σ^2 for |x| = 1.
    struct Reverse;

    impl GroupScheme for Reverse {
        fn block_of(&self, w: &Word) -> Option<BlockRef> {
            (w.len() == 3).then(|| BlockRef::suffixes(w.prefix(1), 2))
        }
        fn group(&self, blk: &BlockRef, w: &Word) -> usize {
            3 - Word::from_bits(blk.suffix(w).iter().copied()).value() as usize
        }
        fn group_count(&self) -> usize {
            4
        }
    }

    #[test]
    fn prefix_lengths() {
        assert_eq!(find_prefix_len(7, |k| k + 1), Some(3));
        assert_eq!(find_prefix_len(6, |k| k + 1), None);
        assert_eq!(find_prefix_len(2, |_| 2), Some(0));
    }

    #[test]
    fn reversed_blocks_form_a_total_order() {
        let o = block_order("rev", Arc::new(Grouped(Reverse)), true, true);
        let u: Vec<Word> = Word::all_up_to(4).collect();
        assert!(verify_order_axioms(&o, &u).is_empty());
        assert!(verify_adjacency(&o, &u).is_empty());
        assert!(o.leq(&w("011"), &w("000")).unwrap());
        assert!(o.precedes(&w("11"), &w("011")).unwrap());
        assert!(o.precedes(&w("000"), &w("111")).unwrap());
        assert_eq!(o.successor(&w("000")).unwrap(), Some(w("111")));
    }

    #[test]
    fn universe_is_convex() {
        let s = Grouped(Reverse);
        let blk = s.block_of(&w("101")).unwrap();
        let u = block_universe(&s, &blk);
        assert_eq!(u.first(), Some(&w("000")));
        assert_eq!(u.last(), Some(&w("0000")));
        assert_eq!(u.len(), 6);
    }
}
