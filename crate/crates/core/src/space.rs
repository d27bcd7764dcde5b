//! The configuration-tree traversal order for space-bounded machines.
//!
//! Guessed IDs `x w y` append t guess bits to an eID `x w`. Chaining the forest of
//! μ-trees by their roots yields one tree T; a depth-first tour of T over padded
//! tokens `x w y z a` is the step function D, and the order is "the tour, then
//! every token D leaves undefined, lexicographically", inside each block x·Σ^L.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::block::{block_order, find_prefix_len, BlockRef, BlockScheme};
use crate::constructed::OrderTriple;
use crate::error::{Error, Result};
use crate::order::{walk_count, IntervalSpec, POrder, WordFn};
use crate::poly::Poly;
use crate::tm::{bits_value, Layout, RestrictedTM};
use crate::word::Word;

/// Lengths for one input length n.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Shape {
    pub n: usize,
    pub lay: Layout,
    pub m: usize,
    pub s: usize,
    pub t: usize,
}

impl Shape {
    pub fn eid_len(&self) -> usize {
        self.n + 2 * self.s
    }
    pub fn guessed_len(&self) -> usize {
        self.eid_len() + self.t
    }
    pub fn token_len(&self) -> usize {
        self.guessed_len() + self.t + 1
    }
    /// Bits after x in a token.
    pub fn block_width(&self) -> usize {
        2 * (self.s + self.t) + 1
    }
}

fn all(bits: &[u8], b: u8) -> bool {
    bits.iter().all(|&x| x == b)
}

/// Fixed-length increment; false on overflow (bits left as zeros).
fn inc(bits: &mut [u8]) -> bool {
    for b in bits.iter_mut().rev() {
        if *b == 0 {
            *b = 1;
            return true;
        }
        *b = 0;
    }
    false
}

/// Fixed-length decrement; false on underflow.
fn dec(bits: &mut [u8]) -> bool {
    for b in bits.iter_mut().rev() {
        if *b == 1 {
            *b = 0;
            return true;
        }
        *b = 1;
    }
    false
}

const SHAPE_TABLE: usize = 64;

pub struct Traversal {
    pub tm: Arc<RestrictedTM>,
    shapes: Vec<Shape>,
}

impl Traversal {
    pub fn new(tm: RestrictedTM) -> Self {
        Self::from_arc(Arc::new(tm))
    }

    pub fn from_arc(tm: Arc<RestrictedTM>) -> Self {
        let shapes = (0..SHAPE_TABLE)
            .map(|n| Self::compute_shape(&tm, n))
            .collect();
        Traversal { tm, shapes }
    }

    fn compute_shape(tm: &RestrictedTM, n: usize) -> Shape {
        let lay = tm.layout(n);
        Shape {
            n,
            lay,
            m: tm.m,
            s: lay.params.s,
            t: lay.params.t,
        }
    }

    pub fn shape(&self, n: usize) -> Shape {
        match self.shapes.get(n) {
            Some(sh) => *sh,
            None => Self::compute_shape(&self.tm, n),
        }
    }

    fn shape_by(&self, len: usize, width: impl Fn(&Shape) -> usize) -> Option<Shape> {
        let n = find_prefix_len(len, |n| width(&self.shape(n)))?;
        Some(self.shape(n))
    }

    pub fn shape_for_guessed(&self, len: usize) -> Option<Shape> {
        self.shape_by(len, |sh| 2 * sh.s + sh.t)
    }

    pub fn shape_for_token(&self, len: usize) -> Option<Shape> {
        self.shape_by(len, Shape::block_width)
    }

    // ---- roots and their chain ------------------------------------------

    /// Root guessed IDs: μ undefined on the eID part, i.e. the state is final.
    pub fn is_root(&self, sh: &Shape, g: &[u8]) -> bool {
        all(&g[sh.lay.q()], 1)
    }

    /// The part of a root after `x 1^m`: v (clock and head), d (tape), y (guess).
    fn root_tail(sh: &Shape) -> std::ops::Range<usize> {
        sh.n + sh.m..sh.guessed_len()
    }

    fn matched(sh: &Shape, g: &[u8]) -> bool {
        let d = &g[sh.eid_len() - sh.t..sh.eid_len()];
        let y = &g[sh.eid_len()..];
        d == y
    }

    /// Next root: matched roots (tape = guess) in lex order, then the rest in lex order.
    pub fn rx_successor(&self, sh: &Shape, g: &[u8]) -> Option<Vec<u8>> {
        debug_assert!(self.is_root(sh, g));
        let mut out = g.to_vec();
        let tail = Self::root_tail(sh);
        if Self::matched(sh, g) {
            // Step the (v, y) pair and copy y into d.
            let (el, t) = (sh.eid_len(), sh.t);
            let mut vy: Vec<u8> = out[tail.start..el - t].to_vec();
            vy.extend_from_slice(&out[el..]);
            if inc(&mut vy) {
                let vlen = el - t - tail.start;
                out[tail.start..el - t].copy_from_slice(&vy[..vlen]);
                out[el - t..el].copy_from_slice(&vy[vlen..]);
                out[el..].copy_from_slice(&vy[vlen..]);
            } else {
                out[tail.clone()].fill(0);
                *out.last_mut().expect("t > 0") = 1;
            }
            return Some(out);
        }
        loop {
            if !inc(&mut out[tail.clone()]) {
                return None;
            }
            if !Self::matched(sh, &out) {
                return Some(out);
            }
        }
    }

    pub fn rx_predecessor(&self, sh: &Shape, g: &[u8]) -> Option<Vec<u8>> {
        let mut out = g.to_vec();
        let tail = Self::root_tail(sh);
        let (el, t) = (sh.eid_len(), sh.t);
        if Self::matched(sh, g) {
            let mut vy: Vec<u8> = out[tail.start..el - t].to_vec();
            vy.extend_from_slice(&out[el..]);
            if !dec(&mut vy) {
                return None;
            }
            let vlen = el - t - tail.start;
            out[tail.start..el - t].copy_from_slice(&vy[..vlen]);
            out[el - t..el].copy_from_slice(&vy[vlen..]);
            out[el..].copy_from_slice(&vy[vlen..]);
            return Some(out);
        }
        loop {
            if !dec(&mut out[tail.clone()]) {
                out[tail].fill(1);
                return Some(out);
            }
            if !Self::matched(sh, &out) {
                return Some(out);
            }
        }
    }

    /// `x 1^{2s+t-1} 0`, where μ₁ stops.
    pub fn last_root(&self, sh: &Shape, x: &[u8]) -> Vec<u8> {
        let mut g = x.to_vec();
        g.resize(sh.guessed_len(), 1);
        *g.last_mut().expect("nonempty") = 0;
        g
    }

    /// `x 1^{2s+t}`, root of the counted subtree.
    pub fn counted_root(&self, sh: &Shape, x: &[u8]) -> Vec<u8> {
        let mut g = x.to_vec();
        g.resize(sh.guessed_len(), 1);
        g
    }

    // ---- the tree -------------------------------------------------------

    pub fn mu1(&self, sh: &Shape, g: &[u8]) -> Option<Vec<u8>> {
        if self.is_root(sh, g) {
            return self.rx_successor(sh, g);
        }
        let el = sh.eid_len();
        let mut out = self.tm.mu_bits(&sh.lay, &g[..el])?;
        out.extend_from_slice(&g[el..]);
        Some(out)
    }

    /// Every h with μ₁(h) = g, in lexicographic order.
    pub fn mu1_preimages(&self, sh: &Shape, g: &[u8]) -> Vec<Vec<u8>> {
        let el = sh.eid_len();
        let mut out: Vec<Vec<u8>> = self
            .tm
            .mu_preimages_bits(&sh.lay, &g[..el])
            .into_iter()
            .map(|mut p| {
                p.extend_from_slice(&g[el..]);
                p
            })
            .collect();
        if self.is_root(sh, g) {
            if let Some(p) = self.rx_predecessor(sh, g) {
                out.push(p);
            }
        }
        out.sort();
        out
    }

    pub fn dwn(&self, sh: &Shape, g: &[u8]) -> Option<Vec<u8>> {
        self.mu1_preimages(sh, g).pop()
    }

    pub fn acr(&self, sh: &Shape, g: &[u8]) -> Option<Vec<u8>> {
        let parent = self.mu1(sh, g)?;
        self.mu1_preimages(sh, &parent)
            .into_iter().rfind(|h| h.as_slice() < g)
    }

    // ---- the tour -------------------------------------------------------

    fn is_initial(&self, sh: &Shape, g: &[u8]) -> bool {
        self.tm.is_initial(&sh.lay, &g[..sh.eid_len()])
    }

    fn guess_value(&self, sh: &Shape, tok: &[u8]) -> u64 {
        self.tm.tape_value(&tok[sh.eid_len()..sh.guessed_len()])
    }

    /// One step of the tour on a token `x w y z a`.
    pub fn d_step(&self, sh: &Shape, tok: &[u8]) -> Option<Vec<u8>> {
        let gl = sh.guessed_len();
        let (g, z, a) = (&tok[..gl], &tok[gl..gl + sh.t], tok[gl + sh.t]);
        let z_zero = all(z, 0);
        let with = |head: Vec<u8>, z: &[u8], a: u8| {
            let mut v = head;
            v.extend_from_slice(z);
            v.push(a);
            v
        };
        if a == 0 {
            if !z_zero && !self.is_initial(sh, g) {
                return None;
            }
            if let Some(d) = self.dwn(sh, g) {
                return z_zero.then(|| with(d, z, 0));
            }
            if !self.is_initial(sh, g) {
                return Some(with(g.to_vec(), z, 1));
            }
            let (nz, ny) = (bits_value(z), self.guess_value(sh, tok));
            if nz < ny {
                let mut z2 = z.to_vec();
                inc(&mut z2);
                return Some(with(g.to_vec(), &z2, 0));
            }
            if nz == ny {
                return Some(with(g.to_vec(), &vec![0; sh.t], 1));
            }
            return None;
        }
        if !z_zero {
            return None;
        }
        if let Some(c) = self.acr(sh, g) {
            return Some(with(c, z, 0));
        }
        self.mu1(sh, g).map(|h| with(h, z, 1))
    }

    /// The closed-form domain of [`Self::d_step`].
    pub fn d_defined(&self, sh: &Shape, tok: &[u8]) -> bool {
        let (el, gl, t) = (sh.eid_len(), sh.guessed_len(), sh.t);
        let wy = &tok[sh.n..gl];
        let z = &tok[gl..gl + t];
        let a = tok[gl + t];
        let last = wy[..wy.len() - 1].iter().all(|&b| b == 1) && wy[wy.len() - 1] == 0;
        if last && all(z, 0) && a == 0 {
            return true; // the tour's first token
        }
        if !last && all(z, 0) {
            return true;
        }
        a == 0 && self.is_initial(sh, &tok[..el]) && bits_value(z) <= self.guess_value(sh, tok)
    }

    /// Least token lex-above `tok` (same x) on which the tour is undefined.
    pub fn next_undefined(&self, sh: &Shape, tok: &[u8]) -> Option<Vec<u8>> {
        let mut v = tok.to_vec();
        loop {
            if !inc(&mut v[sh.n..]) {
                return None;
            }
            if !self.d_defined(sh, &v) {
                return Some(v);
            }
        }
    }

    /// First token of the tour: `x 1^{2s+t-1} 0^{t+2}`.
    pub fn tour_start(&self, sh: &Shape, x: &[u8]) -> Vec<u8> {
        let mut v = self.last_root(sh, x);
        v.resize(sh.token_len(), 0);
        v
    }

    /// Last token of the tour: `x 1^{2s+t-1} 0^{t+1} 1`.
    pub fn tour_end(&self, sh: &Shape, x: &[u8]) -> Vec<u8> {
        let mut v = self.tour_start(sh, x);
        *v.last_mut().expect("nonempty") = 1;
        v
    }

    /// Down token of the counted root.
    pub fn b(&self, x: &Word) -> Word {
        let sh = self.shape(x.len());
        let mut v = self.counted_root(&sh, x.bits());
        v.resize(sh.token_len(), 0);
        Word::from_bits(v)
    }

    /// Up token of the counted root.
    pub fn t(&self, x: &Word) -> Word {
        let mut v = self.b(x).bits().to_vec();
        *v.last_mut().expect("nonempty") = 1;
        Word::from_bits(v)
    }

    /// Down token of the initial configuration guessing output 1.
    pub fn b_prime(&self, x: &Word) -> Result<Word> {
        let sh = self.shape(x.len());
        let mut v = self.tm.initial_eid(x)?.bits().to_vec();
        let one = self.tm.input_code(1);
        for i in (0..sh.m).rev() {
            v.push(((one >> i) & 1) as u8);
        }
        v.resize(sh.token_len(), 0);
        Ok(Word::from_bits(v))
    }

    /// 2^{2s+1} + f(x) - 2, with f from the machine run.
    pub fn predicted_size(&self, x: &Word) -> Result<u64> {
        let s = self.shape(x.len()).s;
        let (f, _) = self.tm.run_tm(x)?;
        Ok((1u64 << (2 * s + 1)) + f - 2)
    }
}

// ---------------------------------------------------------------------------

/// Position of each tour token, built by one walk per block.
type TourIndex = HashMap<Vec<u8>, u64>;

struct SpaceScheme {
    tr: Traversal,
    index: Mutex<HashMap<Word, Arc<TourIndex>>>,
}

impl SpaceScheme {
    fn shape_of(&self, blk: &BlockRef) -> Shape {
        self.tr.shape(blk.key.len())
    }

    fn tour_index(&self, blk: &BlockRef) -> Arc<TourIndex> {
        if let Some(i) = self.index.lock().unwrap().get(&blk.key) {
            return i.clone();
        }
        let sh = self.shape_of(blk);
        let mut idx = HashMap::new();
        let mut cur = Some(self.tr.tour_start(&sh, blk.key.bits()));
        let mut pos = 0u64;
        while let Some(v) = cur {
            cur = self.tr.d_step(&sh, &v);
            idx.insert(v, pos);
            pos += 1;
        }
        let idx = Arc::new(idx);
        self.index
            .lock()
            .unwrap()
            .insert(blk.key.clone(), idx.clone());
        idx
    }

    fn leftover_after(&self, sh: &Shape, blk: &BlockRef, from: &[u8]) -> Option<Word> {
        let end = self.tr.tour_end(sh, blk.key.bits());
        let mut cur = self.tr.next_undefined(sh, from)?;
        if cur == end {
            cur = self.tr.next_undefined(sh, &cur)?;
        }
        Some(Word::from_bits(cur))
    }
}

impl BlockScheme for SpaceScheme {
    fn block_of(&self, w: &Word) -> Option<BlockRef> {
        let sh = self.tr.shape_for_token(w.len())?;
        Some(BlockRef::suffixes(w.prefix(sh.n), sh.block_width()))
    }

    fn local_leq(&self, blk: &BlockRef, u: &Word, v: &Word) -> bool {
        let idx = self.tour_index(blk);
        match (idx.get(u.bits()), idx.get(v.bits())) {
            (Some(a), Some(b)) => a <= b,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => u.bits() <= v.bits(),
        }
    }

    fn local_succ(&self, blk: &BlockRef, u: &Word) -> Option<Word> {
        let sh = self.shape_of(blk);
        if self.tr.d_defined(&sh, u.bits()) {
            return self.tr.d_step(&sh, u.bits()).map(Word::from_bits);
        }
        if u.bits() == self.tr.tour_end(&sh, blk.key.bits()).as_slice() {
            let lo = blk.lo();
            if !self.tr.d_defined(&sh, lo.bits()) {
                return Some(lo);
            }
            return self.leftover_after(&sh, blk, lo.bits());
        }
        self.leftover_after(&sh, blk, u.bits())
    }

    fn block_min(&self, blk: &BlockRef) -> Word {
        Word::from_bits(self.tr.tour_start(&self.shape_of(blk), blk.key.bits()))
    }

    fn block_max(&self, blk: &BlockRef) -> Word {
        blk.hi()
    }
}

/// The order, its boundary functions and the machine behind them.
pub struct SpaceOrderBundle {
    pub order: POrder,
    pub traversal: Arc<Traversal>,
    scheme: Arc<SpaceScheme>,
}

impl SpaceOrderBundle {
    pub fn b(&self, x: &Word) -> Word {
        self.traversal.b(x)
    }

    pub fn t(&self, x: &Word) -> Word {
        self.traversal.t(x)
    }

    pub fn b_prime(&self, x: &Word) -> Result<Word> {
        self.traversal.b_prime(x)
    }

    pub fn block(&self, x: &Word) -> BlockRef {
        let sh = self.traversal.shape(x.len());
        BlockRef::suffixes(x.clone(), sh.block_width())
    }

    /// Tour position of a token, or `None` for leftovers.
    pub fn tour_position(&self, w: &Word) -> Option<u64> {
        let blk = self.scheme.block_of(w)?;
        self.scheme.tour_index(&blk).get(w.bits()).copied()
    }

    pub fn triple(&self) -> OrderTriple {
        let (t1, t2) = (self.traversal.clone(), self.traversal.clone());
        let b: WordFn = Arc::new(move |x: &Word| t1.b(x));
        let t: WordFn = Arc::new(move |x: &Word| t2.t(x));
        OrderTriple {
            name: "space-traversal".into(),
            spec: IntervalSpec::new(self.order.clone(), b, t),
            target: "2^(2s+1) + f(x) - 2".into(),
            boundary_bound: Poly::identity(),
            precheck: None,
            universe: None,
        }
    }
}

pub fn build_space_order(tm: RestrictedTM) -> SpaceOrderBundle {
    let scheme = Arc::new(SpaceScheme {
        tr: Traversal::new(tm),
        index: Mutex::new(HashMap::new()),
    });
    let order = block_order("space-traversal", scheme.clone(), true, true);
    let traversal = Arc::new(Traversal::from_arc(scheme.tr.tm.clone()));
    SpaceOrderBundle {
        order,
        traversal,
        scheme,
    }
}

/// Counts the tokens strictly between b(x) and t(x) by following the tour.
pub fn fpspace_interval_size(bundle: &SpaceOrderBundle, x: &Word, budget: u64) -> Result<u64> {
    let tr = &bundle.traversal;
    let sh = tr.shape(x.len());
    let step = |w: &Word| tr.d_step(&sh, w.bits()).map(Word::from_bits);
    walk_count(&step, &bundle.b(x), &bundle.t(x), budget)
}

/// Whether something lies strictly between b'(x) and t(x); holds exactly when f(x) = 1.
pub fn singleton_flag(bundle: &SpaceOrderBundle, x: &Word, budget: u64) -> Result<bool> {
    let tr = &bundle.traversal;
    let sh = tr.shape(x.len());
    let (from, to) = (bundle.b_prime(x)?, bundle.t(x));
    let mut cur = from.bits().to_vec();
    for k in 0..budget {
        if cur == to.bits() {
            return Ok(k > 1);
        }
        match tr.d_step(&sh, &cur) {
            Some(v) => cur = v,
            None => return Ok(false),
        }
    }
    Err(Error::BudgetExhausted { from, to, budget })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tm::toy_ones_count;
    use crate::word::w;

    fn toy() -> Traversal {
        Traversal::new(toy_ones_count())
    }

    #[test]
    fn shapes() {
        let tr = toy();
        let sh = tr.shape(1);
        assert_eq!((sh.s, sh.t), (7, 4));
        assert_eq!(sh.token_len(), 24);
        assert_eq!(tr.shape_for_token(24), Some(sh));
        assert_eq!(tr.shape_for_guessed(19), Some(sh));
    }

    #[test]
    fn root_chain_ends() {
        let tr = toy();
        let sh = tr.shape(0);
        let top = tr.counted_root(&sh, &[]);
        let next = tr.rx_successor(&sh, &top).unwrap();
        // first mismatched root: 1^m 0.. 0^t 0^{t-1}1
        let mut want = vec![1, 1];
        want.resize(sh.guessed_len(), 0);
        *want.last_mut().unwrap() = 1;
        assert_eq!(next, want);
        assert_eq!(tr.rx_predecessor(&sh, &next).unwrap(), top);
        assert!(tr.rx_successor(&sh, &tr.last_root(&sh, &[])).is_none());
        let mut min = vec![1, 1];
        min.resize(sh.guessed_len(), 0);
        assert!(tr.rx_predecessor(&sh, &min).is_none());
    }

    #[test]
    fn roots_chain_through_every_root() {
        let tr = toy();
        let sh = tr.shape(0);
        let mut cur = vec![1, 1];
        cur.resize(sh.guessed_len(), 0);
        let mut count = 1u64;
        while let Some(n) = tr.rx_successor(&sh, &cur) {
            assert_eq!(tr.rx_predecessor(&sh, &n).as_ref(), Some(&cur));
            cur = n;
            count += 1;
        }
        assert_eq!(cur, tr.last_root(&sh, &[]));
        assert_eq!(count, 1 << (2 * sh.s - sh.m + sh.t));
    }

    #[test]
    fn boundaries() {
        let tr = toy();
        let x = w("1");
        let (b, t) = (tr.b(&x), tr.t(&x));
        assert_eq!(b.len(), 24);
        assert_eq!(b.prefix(19), Word::join(&[&x, &Word::ones(18)]));
        assert!(t.bit(23) == 1 && b.bit(23) == 0);
        let bp = tr.b_prime(&x).unwrap();
        assert_eq!(bp.slice(15, 19), w("1100"));
    }

    #[test]
    fn tour_counts_on_toy() {
        let bundle = build_space_order(toy_ones_count());
        for x in [Word::empty(), w("1"), w("11")] {
            let got = fpspace_interval_size(&bundle, &x, 1 << 20).unwrap();
            assert_eq!(got, bundle.traversal.predicted_size(&x).unwrap(), "{x}");
            assert_eq!(
                singleton_flag(&bundle, &x, 1 << 20).unwrap(),
                x.count_ones() == 1
            );
        }
    }
}
