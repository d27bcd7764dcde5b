//! Orders whose interval sizes equal a given counting function.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::block::{block_order, block_universe, BlockRef, BlockScheme, GroupScheme, Grouped};
use crate::error::{Error, Result};
use crate::order::{
    interval_size_bruteforce, interval_size_by_walk, interval_size_in_universe, IntervalSpec,
    POrder, WordFn,
};
use crate::poly::Poly;
use crate::word::Word;

pub type Decider = Arc<dyn Fn(&Word, &Word) -> bool + Send + Sync>;
pub type Precheck = Arc<dyn Fn(&Word) -> Result<()> + Send + Sync>;
pub type UniverseFn = Arc<dyn Fn(&Word) -> Vec<Word> + Send + Sync>;

/// f(x) = number of z with |z| = p(|x|) and decider(x, z).
#[derive(Clone)]
pub struct WitnessPredicate {
    pub name: String,
    pub decider: Decider,
    pub p: Poly,
    /// Set by [`normalize_witness`]: 0^p and 1^p are never witnesses.
    pub normalized: bool,
}

impl fmt::Debug for WitnessPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WitnessPredicate({}, p = {})", self.name, self.p)
    }
}

impl WitnessPredicate {
    pub fn new(
        name: &str,
        p: Poly,
        decider: impl Fn(&Word, &Word) -> bool + Send + Sync + 'static,
    ) -> Self {
        WitnessPredicate {
            name: name.into(),
            decider: Arc::new(decider),
            p,
            normalized: false,
        }
    }

    pub fn width(&self, x: &Word) -> usize {
        self.p.eval(x.len())
    }

    pub fn accepts(&self, x: &Word, z: &Word) -> bool {
        (self.decider)(x, z)
    }

    /// Witness count by enumeration.
    pub fn count(&self, x: &Word) -> u64 {
        Word::all_of_len(self.width(x))
            .filter(|z| self.accepts(x, z))
            .count() as u64
    }

    pub fn check_normalized(&self, x: &Word) -> Result<()> {
        let n = self.width(x);
        if self.accepts(x, &Word::zeros(n)) || self.accepts(x, &Word::ones(n)) {
            return Err(Error::NotNormalized(x.clone()));
        }
        Ok(())
    }
}

/// Appends "01" to every witness, so all-zero and all-one strings never witness.
pub fn normalize_witness(w: &WitnessPredicate) -> WitnessPredicate {
    let inner = w.clone();
    WitnessPredicate {
        name: format!("{}+01", w.name),
        p: w.p.add(&Poly::constant(2)),
        normalized: true,
        decider: Arc::new(move |x: &Word, z: &Word| {
            let n = z.len();
            n >= 2 && z.bit(n - 2) == 0 && z.bit(n - 1) == 1 && inner.accepts(x, &z.prefix(n - 2))
        }),
    }
}

/// A polynomial-time function with f(x) < 2^{p(|x|)} - 1.
#[derive(Clone)]
pub struct FpFunction {
    pub name: String,
    pub eval: Arc<dyn Fn(&Word) -> u64 + Send + Sync>,
    pub p: Poly,
}

impl FpFunction {
    pub fn new(name: &str, p: Poly, eval: impl Fn(&Word) -> u64 + Send + Sync + 'static) -> Self {
        FpFunction {
            name: name.into(),
            eval: Arc::new(eval),
            p,
        }
    }

    pub fn checked_eval(&self, x: &Word) -> Result<u64> {
        let v = (self.eval)(x);
        let width = self.p.eval(x.len());
        let bound = if width >= 64 {
            u64::MAX
        } else {
            (1u64 << width) - 1
        };
        if v >= bound {
            return Err(Error::ValueBound {
                x: x.clone(),
                value: v,
                bound,
            });
        }
        Ok(v)
    }
}

#[derive(Clone)]
pub struct SupportDecider {
    pub name: String,
    pub in_support: Arc<dyn Fn(&Word) -> bool + Send + Sync>,
}

impl SupportDecider {
    pub fn new(name: &str, f: impl Fn(&Word) -> bool + Send + Sync + 'static) -> Self {
        SupportDecider {
            name: name.into(),
            in_support: Arc::new(f),
        }
    }

    /// Exact support read off a witness predicate by enumeration.
    pub fn from_witness(w: &WitnessPredicate) -> Self {
        let w = w.clone();
        SupportDecider::new(&format!("supp({})", w.name), move |x| w.count(x) > 0)
    }
}

/// A machine that outputs on exactly one path of length p(|x|).
#[derive(Clone)]
pub struct UpsvMachine {
    pub name: String,
    pub p: Poly,
    pub path_output: Arc<dyn Fn(&Word, &Word) -> Option<u64> + Send + Sync>,
}

impl UpsvMachine {
    pub fn new(
        name: &str,
        p: Poly,
        out: impl Fn(&Word, &Word) -> Option<u64> + Send + Sync + 'static,
    ) -> Self {
        UpsvMachine {
            name: name.into(),
            p,
            path_output: Arc::new(out),
        }
    }

    /// All (path, output) pairs on x.
    pub fn outputs(&self, x: &Word) -> Vec<(Word, u64)> {
        Word::all_of_len(self.p.eval(x.len()))
            .filter_map(|z| (self.path_output)(x, &z).map(|o| (z, o)))
            .collect()
    }

    /// The unique outputting path and its output.
    pub fn unique_output(&self, x: &Word) -> Result<(Word, u64)> {
        let mut outs = self.outputs(x);
        if outs.len() != 1 {
            return Err(Error::InvalidMachine(format!(
                "{} outputs on {} paths for input {x}",
                self.name,
                outs.len()
            )));
        }
        Ok(outs.pop().unwrap())
    }
}

/// An order, boundary functions and the bookkeeping the evaluators need.
#[derive(Clone)]
pub struct OrderTriple {
    pub name: String,
    pub spec: IntervalSpec,
    pub target: String,
    /// Upper bound on |b(x)| and |t(x)| as a function of |x|.
    pub boundary_bound: Poly,
    /// Preconditions checked per input before evaluating.
    pub precheck: Option<Precheck>,
    /// A finite order-convex set containing b(x), t(x) and everything between.
    pub universe: Option<UniverseFn>,
}

impl fmt::Debug for OrderTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OrderTriple")
            .field("name", &self.name)
            .field("order", &self.spec.order)
            .field("target", &self.target)
            .finish()
    }
}

impl OrderTriple {
    pub fn order(&self) -> &POrder {
        &self.spec.order
    }

    pub fn b(&self, x: &Word) -> Word {
        (self.spec.b)(x)
    }

    pub fn t(&self, x: &Word) -> Word {
        (self.spec.t)(x)
    }

    pub fn check(&self, x: &Word) -> Result<()> {
        match &self.precheck {
            Some(c) => c(x),
            None => Ok(()),
        }
    }

    pub fn universe(&self, x: &Word) -> Option<Vec<Word>> {
        self.universe.as_ref().map(|u| u(x))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Successor walk from b(x) to t(x).
    Walk,
    /// Every word up to the order's length bound.
    Bruteforce,
    /// Only the triple's own block universe.
    Block,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "walk" => Ok(Mode::Walk),
            "bruteforce" => Ok(Mode::Bruteforce),
            "block" => Ok(Mode::Block),
            _ => Err(Error::Unknown {
                kind: "mode",
                name: s.into(),
            }),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Walk => "walk",
            Mode::Bruteforce => "bruteforce",
            Mode::Block => "block",
        })
    }
}

pub const DEFAULT_BUDGET: u64 = 1 << 26;

pub fn eval_triple(triple: &OrderTriple, x: &Word, mode: Mode) -> Result<u64> {
    eval_triple_with_budget(triple, x, mode, DEFAULT_BUDGET)
}

pub fn eval_triple_with_budget(
    triple: &OrderTriple,
    x: &Word,
    mode: Mode,
    budget: u64,
) -> Result<u64> {
    triple.check(x)?;
    match mode {
        Mode::Walk => interval_size_by_walk(&triple.spec, x, None, budget),
        Mode::Bruteforce => interval_size_bruteforce(&triple.spec, x),
        Mode::Block => {
            let u = triple
                .universe(x)
                .ok_or(Error::MissingCapability("universe"))?;
            interval_size_in_universe(&triple.spec, x, u)
        }
    }
}

/// The fixed-width p(|x|)-bit encoding of i.
pub fn bin(x: &Word, i: u64, p: &Poly) -> Result<Word> {
    Word::from_u64(i, p.eval(x.len()))
}

fn word_fn(f: impl Fn(&Word) -> Word + Send + Sync + 'static) -> WordFn {
    Arc::new(f)
}

fn universe_of<S: BlockScheme>(scheme: Arc<S>, b: WordFn) -> UniverseFn {
    Arc::new(move |x: &Word| {
        let bx = b(x);
        match scheme.block_of(&bx) {
            Some(blk) => block_universe(&*scheme, &blk),
            None => vec![bx],
        }
    })
}

/// Inputs on which preconditions are spot-checked when a construction is built.
fn sample_inputs() -> impl Iterator<Item = Word> {
    Word::all_up_to(2)
}

fn suffix_value(blk: &BlockRef, w: &Word, from: usize, to: usize) -> u64 {
    let s = blk.suffix(w);
    s[from..to]
        .iter()
        .fold(0u64, |acc, &b| (acc << 1) | u64::from(b))
}

// ---------------------------------------------------------------------------
// Witness order: 1^p first, then witnesses, then non-witnesses.

struct SharpP {
    w: WitnessPredicate,
}

impl GroupScheme for SharpP {
    fn block_of(&self, w: &Word) -> Option<BlockRef> {
        crate::block::suffix_block(w, |k| self.w.p.eval(k))
    }
    fn group(&self, blk: &BlockRef, w: &Word) -> usize {
        let z = w.suffix_from(blk.key.len());
        if z.is_all(1) {
            0
        } else if self.w.accepts(&blk.key, &z) {
            1
        } else {
            2
        }
    }
    fn group_count(&self) -> usize {
        3
    }
}

/// Total order whose interval (x1^p, x0^p) holds exactly the witnesses for x.
/// Decidable, but no adjacency capability is exposed.
pub fn build_sharp_p_order(w: &WitnessPredicate) -> Result<OrderTriple> {
    if !w.normalized {
        for x in sample_inputs() {
            w.check_normalized(&x)?;
        }
    }
    let scheme = Arc::new(Grouped(SharpP { w: w.clone() }));
    let order = block_order(
        &format!("witness-order[{}]", w.name),
        scheme.clone(),
        true,
        false,
    );
    let (p1, p2) = (w.p.clone(), w.p.clone());
    let b = word_fn(move |x| x.concat(&Word::ones(p1.eval(x.len()))));
    let t = word_fn(move |x| x.concat(&Word::zeros(p2.eval(x.len()))));
    let wc = w.clone();
    Ok(OrderTriple {
        name: "sharp-p".into(),
        universe: Some(universe_of(scheme, b.clone())),
        spec: IntervalSpec::new(order, b, t),
        target: format!("#witnesses of {}", w.name),
        boundary_bound: Poly::identity().add(&w.p),
        precheck: Some(Arc::new(move |x| wc.check_normalized(x))),
    })
}

// ---------------------------------------------------------------------------
// FP order: bin(0..=f), then 1^p, then the remaining values.

struct FpScheme {
    f: FpFunction,
}

impl FpScheme {
    fn width(&self, k: usize) -> usize {
        self.f.p.eval(k)
    }
}

impl GroupScheme for FpScheme {
    fn block_of(&self, w: &Word) -> Option<BlockRef> {
        crate::block::suffix_block(w, |k| self.width(k))
    }
    fn group(&self, blk: &BlockRef, w: &Word) -> usize {
        let z = w.suffix_from(blk.key.len());
        if z.is_all(1) {
            1
        } else if z.value() <= (self.f.eval)(&blk.key) {
            0
        } else {
            2
        }
    }
    fn group_count(&self) -> usize {
        3
    }
    fn fast_succ(&self, blk: &BlockRef, u: &Word) -> Option<Option<Word>> {
        let width = self.width(blk.key.len());
        if width >= 64 {
            return None;
        }
        let f = (self.f.eval)(&blk.key);
        let top = (1u64 << width) - 1;
        let i = u.suffix_from(blk.key.len()).value();
        let at = |v: u64| Some(blk.key.concat(&Word::from_u64(v, width).ok()?));
        Some(if i == top {
            (f + 1 < top).then(|| at(f + 1)).flatten()
        } else if i == f {
            at(top)
        } else if i + 1 < top {
            at(i + 1)
        } else {
            None
        })
    }
}

/// Total order with adjacency whose interval (x0^p, x1^p) has exactly f(x) elements.
pub fn build_fp_order(f: &FpFunction) -> Result<OrderTriple> {
    for x in sample_inputs() {
        f.checked_eval(&x)?;
    }
    let scheme = Arc::new(Grouped(FpScheme { f: f.clone() }));
    let order = block_order(&format!("fp-order[{}]", f.name), scheme.clone(), true, true);
    let (p1, p2) = (f.p.clone(), f.p.clone());
    let b = word_fn(move |x| x.concat(&Word::zeros(p1.eval(x.len()))));
    let t = word_fn(move |x| x.concat(&Word::ones(p2.eval(x.len()))));
    let fc = f.clone();
    Ok(OrderTriple {
        name: "fp".into(),
        universe: Some(universe_of(scheme, b.clone())),
        spec: IntervalSpec::new(order, b, t),
        target: f.name.clone(),
        boundary_bound: Poly::identity().add(&f.p),
        precheck: Some(Arc::new(move |x| fc.checked_eval(x).map(|_| ()))),
    })
}

// ---------------------------------------------------------------------------
// Support-aware partial order.

struct SupportScheme {
    w: WitnessPredicate,
    s: SupportDecider,
}

const BOTTOM: u8 = 0;
const LOWER: u8 = 1;
const MIDDLE: u8 = 2;
const UPPER: u8 = 3;
const TOP: u8 = 4;

impl SupportScheme {
    fn rank(&self, blk: &BlockRef, w: &Word) -> u8 {
        let s = blk.suffix(w);
        let n = s.len() - 2;
        let z = &s[..n];
        let tag = (s[n], s[n + 1]);
        let zero = z.iter().all(|&b| b == 0);
        match (zero, tag) {
            (true, (0, 0)) => BOTTOM,
            (true, (0, 1)) => MIDDLE,
            (true, (1, 1)) => TOP,
            (_, (1, 0)) => {
                if self
                    .w
                    .accepts(&blk.key, &Word::from_bits(z.iter().copied()))
                {
                    UPPER
                } else {
                    LOWER
                }
            }
            _ => LOWER,
        }
    }

    fn lower_empty(&self, x: &Word) -> bool {
        self.w.width(x) == 0 && self.w.accepts(x, &Word::empty())
    }
}

impl BlockScheme for SupportScheme {
    fn block_of(&self, w: &Word) -> Option<BlockRef> {
        crate::block::suffix_block(w, |k| self.w.p.eval(k) + 2)
    }
    fn local_leq(&self, blk: &BlockRef, u: &Word, v: &Word) -> bool {
        u == v || self.rank(blk, u) < self.rank(blk, v)
    }
    fn local_succ(&self, _blk: &BlockRef, _u: &Word) -> Option<Word> {
        None
    }
    fn local_precedes(&self, blk: &BlockRef, u: &Word, v: &Word) -> bool {
        match (self.rank(blk, u), self.rank(blk, v)) {
            (BOTTOM, LOWER) | (LOWER, MIDDLE) | (MIDDLE, UPPER) | (UPPER, TOP) => true,
            (BOTTOM, MIDDLE) => self.lower_empty(&blk.key),
            // Upper is empty exactly off the support; this is the only place the decider is used.
            (MIDDLE, TOP) => !(self.s.in_support)(&blk.key),
            _ => false,
        }
    }
    fn block_min(&self, blk: &BlockRef) -> Word {
        let n = self.w.width(&blk.key);
        blk.key.concat(&Word::zeros(n + 2))
    }
    fn block_max(&self, blk: &BlockRef) -> Word {
        let n = self.w.width(&blk.key);
        Word::join(&[&blk.key, &Word::zeros(n), &Word::ones(2)])
    }
}

/// Partial order with adjacency whose interval (x0^p01, x0^p11) holds the witnesses
/// for x as an antichain. Adjacency of the two boundaries consults the support decider.
pub fn build_support_aware_order(w: &WitnessPredicate, s: &SupportDecider) -> Result<OrderTriple> {
    let scheme = Arc::new(SupportScheme {
        w: w.clone(),
        s: s.clone(),
    });
    let order = block_order(
        &format!("support-order[{}]", w.name),
        scheme.clone(),
        false,
        true,
    );
    let (p1, p2) = (w.p.clone(), w.p.clone());
    let b =
        word_fn(move |x| Word::join(&[x, &Word::zeros(p1.eval(x.len())), &crate::word::w("01")]));
    let t =
        word_fn(move |x| Word::join(&[x, &Word::zeros(p2.eval(x.len())), &crate::word::w("11")]));
    Ok(OrderTriple {
        name: "support".into(),
        universe: Some(universe_of(scheme, b.clone())),
        spec: IntervalSpec::new(order, b, t),
        target: format!("#witnesses of {}", w.name),
        boundary_bound: Poly::identity().add(&w.p).add(&Poly::constant(2)),
        precheck: None,
    })
}

// ---------------------------------------------------------------------------
// Offset order: interval size f(x) + 2^p.

struct OffsetScheme {
    w: WitnessPredicate,
}

impl OffsetScheme {
    fn acc(&self, blk: &BlockRef, w: &Word) -> bool {
        let s = blk.suffix(w);
        self.w
            .accepts(&blk.key, &Word::from_bits(s[..s.len() - 2].iter().copied()))
    }
}

impl GroupScheme for OffsetScheme {
    fn block_of(&self, w: &Word) -> Option<BlockRef> {
        crate::block::suffix_block(w, |k| self.w.p.eval(k) + 2)
    }
    fn group(&self, blk: &BlockRef, w: &Word) -> usize {
        let s = blk.suffix(w);
        let n = s.len();
        match (s[n - 2], s[n - 1]) {
            (0, 0) => 0,
            (0, 1) => 1,
            (1, 0) => 2,
            _ => {
                if self.acc(blk, w) {
                    1
                } else {
                    2
                }
            }
        }
    }
    fn group_count(&self) -> usize {
        3
    }
    fn fast_succ(&self, blk: &BlockRef, u: &Word) -> Option<Option<Word>> {
        let n = self.w.width(&blk.key);
        let s = blk.suffix(u);
        let z = Word::from_bits(s[..n].iter().copied());
        let tag = (s[n], s[n + 1]);
        let mk = |z: &Word, t: &str| Word::join(&[&blk.key, z, &crate::word::w(t)]);
        let acc = |z: &Word| self.w.accepts(&blk.key, z);
        let next_z = z.lex_next();
        Some(match (tag, self.group(blk, u)) {
            ((0, 0), _) => Some(match next_z {
                Some(nz) => mk(&nz, "00"),
                None => mk(&Word::zeros(n), "01"),
            }),
            ((0, 1), _) if acc(&z) => Some(mk(&z, "11")),
            ((0, 1), _) | ((1, 1), 1) => match next_z {
                Some(nz) => Some(mk(&nz, "01")),
                None => Some(mk(&Word::zeros(n), "10")),
            },
            ((1, 0), _) if !acc(&z) => Some(mk(&z, "11")),
            _ => next_z.map(|nz| mk(&nz, "10")),
        })
    }
}

/// Total order with adjacency whose interval (x1^p00, x0^p10) has f(x) + 2^{p(|x|)} elements.
pub fn build_offset_order(w: &WitnessPredicate) -> Result<OrderTriple> {
    let scheme = Arc::new(Grouped(OffsetScheme { w: w.clone() }));
    let order = block_order(
        &format!("offset-order[{}]", w.name),
        scheme.clone(),
        true,
        true,
    );
    let (p1, p2) = (w.p.clone(), w.p.clone());
    let b =
        word_fn(move |x| Word::join(&[x, &Word::ones(p1.eval(x.len())), &crate::word::w("00")]));
    let t =
        word_fn(move |x| Word::join(&[x, &Word::zeros(p2.eval(x.len())), &crate::word::w("10")]));
    Ok(OrderTriple {
        name: "offset".into(),
        universe: Some(universe_of(scheme, b.clone())),
        spec: IntervalSpec::new(order, b, t),
        target: format!("#witnesses of {} + 2^p", w.name),
        boundary_bound: Poly::identity().add(&w.p).add(&Poly::constant(2)),
        precheck: None,
    })
}

// ---------------------------------------------------------------------------
// Single-output machine order.

struct UpsvScheme {
    m: UpsvMachine,
    cache: Mutex<HashMap<Word, Option<(u64, u64)>>>,
    last: Mutex<Option<(Word, Option<(u64, u64)>)>>,
}

impl UpsvScheme {
    /// (value of the outputting path, its output), memoized per input.
    fn anchor(&self, x: &Word) -> Option<(u64, u64)> {
        if let Some((k, a)) = &*self.last.lock().unwrap() {
            if k == x {
                return *a;
            }
        }
        let cached = self.cache.lock().unwrap().get(x).copied();
        let a = cached.unwrap_or_else(|| {
            let a = self.m.unique_output(x).ok().map(|(z, o)| (z.value(), o));
            self.cache.lock().unwrap().insert(x.clone(), a);
            a
        });
        *self.last.lock().unwrap() = Some((x.clone(), a));
        a
    }

    fn width(&self, k: usize) -> usize {
        self.m.p.eval(k)
    }

    fn in_b(&self, x: &Word, y: u64) -> bool {
        let p = self.width(x.len());
        match self.anchor(x) {
            Some((z, o)) => y >> p == z && (y & ((1u64 << p) - 1)) < o,
            None => false,
        }
    }

    fn next_outside_b(&self, x: &Word, from: u64) -> Option<u64> {
        let p = self.width(x.len());
        let mut c = from;
        if let Some((z, o)) = self.anchor(x) {
            let start = z << p;
            if c >= start && c < start + o {
                c = start + o;
            }
        }
        (c < 1u64 << (2 * p)).then_some(c)
    }
}

impl GroupScheme for UpsvScheme {
    fn block_of(&self, w: &Word) -> Option<BlockRef> {
        crate::block::suffix_block(w, |k| 2 * self.width(k) + 2)
    }
    fn group(&self, blk: &BlockRef, w: &Word) -> usize {
        let p = self.width(blk.key.len());
        let s = blk.suffix(w);
        match (s[2 * p], s[2 * p + 1]) {
            (0, 0) => 0,
            (0, 1) => 2,
            (1, 0) => 4,
            _ => {
                if self.in_b(&blk.key, suffix_value(blk, w, 0, 2 * p)) {
                    1
                } else {
                    3
                }
            }
        }
    }
    fn group_count(&self) -> usize {
        5
    }
    fn fast_succ(&self, blk: &BlockRef, u: &Word) -> Option<Option<Word>> {
        let x = &blk.key;
        let p = self.width(x.len());
        if 2 * p >= 63 {
            return None;
        }
        let y = suffix_value(blk, u, 0, 2 * p);
        let last = (1u64 << (2 * p)) - 1;
        let mk = |y: u64, tag: &str| {
            Word::join(&[
                x,
                &Word::from_u64(y, 2 * p).expect("fits"),
                &crate::word::w(tag),
            ])
        };
        let first_outside = || match self.next_outside_b(x, 0) {
            Some(c) => mk(c, "11"),
            None => mk(0, "10"),
        };
        Some(match self.group(blk, u) {
            0 if y < last => Some(mk(y + 1, "00")),
            0 => Some(match self.anchor(x) {
                Some((z, o)) if o > 0 => mk(z << p, "11"),
                _ => mk(0, "01"),
            }),
            1 if y < last && self.in_b(x, y + 1) => Some(mk(y + 1, "11")),
            1 => Some(mk(0, "01")),
            2 if y < last => Some(mk(y + 1, "01")),
            2 => Some(first_outside()),
            3 => Some(
                match (y < last).then(|| self.next_outside_b(x, y + 1)).flatten() {
                    Some(c) => mk(c, "11"),
                    None => mk(0, "10"),
                },
            ),
            _ => (y < last).then(|| mk(y + 1, "10")),
        })
    }
}

/// Total order with adjacency whose interval (x1^{2p}00, x0^{2p}01) has exactly the
/// machine's output many elements. The machine must output a positive value.
pub fn build_upsv_order(m: &UpsvMachine) -> Result<OrderTriple> {
    let check = {
        let m = m.clone();
        move |x: &Word| -> Result<()> {
            let (_, o) = m.unique_output(x)?;
            let p = m.p.eval(x.len());
            if o == 0 {
                return Err(Error::ZeroOutput(x.clone()));
            }
            if p < 63 && o > 1u64 << p {
                return Err(Error::ValueBound {
                    x: x.clone(),
                    value: o,
                    bound: 1u64 << p,
                });
            }
            Ok(())
        }
    };
    for x in sample_inputs() {
        check(&x)?;
    }
    let scheme = Arc::new(Grouped(UpsvScheme {
        m: m.clone(),
        cache: Mutex::new(HashMap::new()),
        last: Mutex::new(None),
    }));
    let order = block_order(
        &format!("upsv-order[{}]", m.name),
        scheme.clone(),
        true,
        true,
    );
    let (p1, p2) = (m.p.clone(), m.p.clone());
    let b = word_fn(move |x| {
        Word::join(&[x, &Word::ones(2 * p1.eval(x.len())), &crate::word::w("00")])
    });
    let t = word_fn(move |x| {
        Word::join(&[x, &Word::zeros(2 * p2.eval(x.len())), &crate::word::w("01")])
    });
    let two_p = Poly::new(m.p.coeffs().iter().map(|c| 2 * c).collect()).with_floor(2 * m.p.floor());
    Ok(OrderTriple {
        name: "upsv".into(),
        universe: Some(universe_of(scheme, b.clone())),
        spec: IntervalSpec::new(order, b, t),
        target: format!("output of {}", m.name),
        boundary_bound: Poly::identity().add(&two_p).add(&Poly::constant(2)),
        precheck: Some(Arc::new(check)),
    })
}

// ---------------------------------------------------------------------------
// Increment: interval size grows by one.

struct IncrementScheme {
    base: OrderTriple,
    p: Poly,
    last_bounds: Mutex<Option<(Word, (Word, Word))>>,
    /// Ranks of the words of one block, indexed by suffix value; 255 = not yet known.
    ranks: Mutex<Option<(Word, Vec<u8>)>>,
}

const DENSE_RANK_WIDTH: usize = 24;

impl IncrementScheme {
    fn width(&self, k: usize) -> usize {
        self.p.eval(k) + 2
    }

    /// (b(x), t(x)) of the base with t replaced by b when b is not below t.
    fn bounds(&self, x: &Word) -> (Word, Word) {
        if let Some((k, bt)) = &*self.last_bounds.lock().unwrap() {
            if k == x {
                return bt.clone();
            }
        }
        let (b, t) = (self.base.b(x), self.base.t(x));
        let bt = if self.base.order().leq(&b, &t).unwrap_or(false) {
            (b, t)
        } else {
            (b.clone(), b)
        };
        *self.last_bounds.lock().unwrap() = Some((x.clone(), bt.clone()));
        bt
    }

    fn encode(&self, x: &Word, z: &Word) -> Option<Word> {
        let p = self.p.eval(x.len());
        if z.len() > p {
            return None;
        }
        Some(Word::join(&[
            x,
            &Word::zeros(p - z.len()),
            &Word::ones(1),
            z,
            &Word::zeros(1),
        ]))
    }

    /// z with w = x0^{p-|z|}1z0 and b <= z <= t in the base, if w has that form.
    fn decode(&self, blk: &BlockRef, w: &Word) -> Option<Word> {
        let s = blk.suffix(w);
        let n = s.len();
        if s[n - 1] != 0 {
            return None;
        }
        let j = s[..n - 1].iter().position(|&b| b == 1)?;
        let z = Word::from_bits(s[j + 1..n - 1].iter().copied());
        let (b, t) = self.bounds(&blk.key);
        let leq = |u: &Word, v: &Word| self.base.order().leq(u, v).unwrap_or(false);
        (leq(&b, &z) && leq(&z, &t)).then_some(z)
    }

    fn rank(&self, blk: &BlockRef, w: &Word) -> (u8, Option<Word>) {
        if blk.suffix(w).iter().all(|&b| b == 0) {
            return (0, None);
        }
        let width = w.len() - blk.key.len();
        if width > DENSE_RANK_WIDTH {
            return self.decode(blk, w).map_or((2, None), |z| (1, Some(z)));
        }
        let i = suffix_value(blk, w, 0, width) as usize;
        let known = match &*self.ranks.lock().unwrap() {
            Some((k, v)) if k == &blk.key => v[i],
            _ => 255,
        };
        let r = match known {
            1 => return (1, Some(Self::payload(blk, w))),
            2 => return (2, None),
            _ => self.decode(blk, w).map_or((2, None), |z| (1, Some(z))),
        };
        let mut memo = self.ranks.lock().unwrap();
        if memo.as_ref().is_none_or(|(k, _)| k != &blk.key) {
            *memo = Some((blk.key.clone(), vec![255; 1 << width]));
        }
        memo.as_mut().unwrap().1[i] = r.0;
        r
    }

    /// The z of a word already known to have the form x0^{p-|z|}1z0.
    fn payload(blk: &BlockRef, w: &Word) -> Word {
        let s = blk.suffix(w);
        let j = s.iter().position(|&b| b == 1).expect("encoded word");
        Word::from_bits(s[j + 1..s.len() - 1].iter().copied())
    }

    fn next_rest(&self, blk: &BlockRef, from: Option<&Word>) -> Option<Word> {
        let mut cur = match from {
            Some(w) => {
                if blk.is_hi(w) {
                    return None;
                }
                w.lex_next()?
            }
            None => blk.lo().lex_next()?,
        };
        loop {
            if self.rank(blk, &cur).0 == 2 {
                return Some(cur);
            }
            if blk.is_hi(&cur) {
                return None;
            }
            cur = cur.lex_next()?;
        }
    }
}

impl BlockScheme for IncrementScheme {
    fn block_of(&self, w: &Word) -> Option<BlockRef> {
        crate::block::suffix_block(w, |k| self.width(k))
    }
    fn local_leq(&self, blk: &BlockRef, u: &Word, v: &Word) -> bool {
        let (ru, zu) = self.rank(blk, u);
        let (rv, zv) = self.rank(blk, v);
        match ru.cmp(&rv) {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Greater => false,
            std::cmp::Ordering::Equal => match (zu, zv) {
                (Some(a), Some(b)) => self.base.order().leq(&a, &b).unwrap_or(false),
                _ => u.bits() <= v.bits(),
            },
        }
    }
    fn local_succ(&self, blk: &BlockRef, u: &Word) -> Option<Word> {
        let x = &blk.key;
        match self.rank(blk, u) {
            (0, _) => self.encode(x, &self.bounds(x).0),
            (1, Some(z)) => {
                if z == self.bounds(x).1 {
                    self.next_rest(blk, None)
                } else {
                    let next = self.base.order().successor(&z).ok().flatten()?;
                    self.encode(x, &next)
                }
            }
            _ => self.next_rest(blk, Some(u)),
        }
    }
    fn block_min(&self, blk: &BlockRef) -> Word {
        blk.lo()
    }
    fn block_max(&self, blk: &BlockRef) -> Word {
        // x1^{p+2} ends in 1, so it is never an encoded base word.
        blk.hi()
    }
}

/// From a total order with adjacency and a successor, builds one whose interval at x
/// is one larger. The block polynomial is q_b(q_t(n)) + 1, bumped by n when that
/// composite is not strictly increasing.
pub fn increment_order(base: &OrderTriple) -> Result<OrderTriple> {
    let border = base.order();
    if !border.is_total {
        return Err(Error::NotTotal);
    }
    for cap in [
        ("leq", border.leq.is_some()),
        ("precedes", border.precedes.is_some()),
        ("successor", border.successor.is_some()),
    ] {
        if !cap.1 {
            return Err(Error::MissingCapability(cap.0));
        }
    }
    let mut p = border
        .length_bound
        .compose(&base.boundary_bound)
        .add(&Poly::constant(1));
    if !p.is_strictly_increasing() {
        p = p.add(&Poly::identity());
    }
    let scheme = Arc::new(IncrementScheme {
        base: base.clone(),
        p: p.clone(),
        last_bounds: Mutex::new(None),
        ranks: Mutex::new(None),
    });
    let order = block_order(
        &format!("increment[{}]", border.name),
        scheme.clone(),
        true,
        true,
    );
    let pb = p.clone();
    let b = word_fn(move |x| x.concat(&Word::zeros(pb.eval(x.len()) + 2)));
    let s2 = scheme.clone();
    let pt = p.clone();
    let t = word_fn(move |x| {
        let (bb, tt) = s2.bounds(x);
        if bb == tt {
            // The encoded b is the only element of the middle group; stop right after it.
            Word::join(&[x, &Word::zeros(pt.eval(x.len()) + 1), &Word::ones(1)])
        } else {
            s2.encode(x, &tt).unwrap_or_else(|| x.clone())
        }
    });
    let s3 = scheme.clone();
    let base_check = base.precheck.clone();
    Ok(OrderTriple {
        name: format!("increment({})", base.name),
        universe: Some(universe_of(scheme, b.clone())),
        spec: IntervalSpec::new(order, b, t),
        target: format!("{} + 1", base.target),
        boundary_bound: Poly::identity().add(&p).add(&Poly::constant(2)),
        precheck: Some(Arc::new(move |x| {
            if let Some(c) = &base_check {
                c(x)?;
            }
            let (_, tt) = s3.bounds(x);
            let width = s3.p.eval(x.len());
            if tt.len() >= width {
                return Err(Error::WidthOverflow { z: tt, width });
            }
            Ok(())
        })),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::{interval_size_bruteforce, verify_adjacency, verify_order_axioms};
    use crate::word::w;

    fn two_of_three() -> WitnessPredicate {
        // x = "1", p = 2 (constant), witnesses {01, 10}
        WitnessPredicate::new("ends-differ", Poly::constant(2), |_, z: &Word| {
            z.bit(0) != z.bit(1)
        })
    }

    #[test]
    fn normalization_preserves_counts() {
        let w0 = two_of_three();
        let n = normalize_witness(&w0);
        for x in Word::all_up_to(2) {
            assert_eq!(n.count(&x), w0.count(&x));
            assert!(n.check_normalized(&x).is_ok());
        }
    }

    #[test]
    fn sharp_p_small_instance() {
        let wp = two_of_three();
        let t = build_sharp_p_order(&wp).unwrap();
        let x = w("1");
        assert_eq!(t.b(&x), w("111"));
        assert_eq!(t.t(&x), w("100"));
        assert_eq!(interval_size_bruteforce(&t.spec, &x).unwrap(), 2);
        assert_eq!(eval_triple(&t, &x, Mode::Walk).unwrap(), 2);
    }

    #[test]
    fn bin_encodes_fixed_width() {
        assert_eq!(bin(&w("1"), 5, &Poly::shift(2)).unwrap(), w("101"));
        assert_eq!(bin(&w("1"), 0, &Poly::shift(2)).unwrap(), w("000"));
        assert!(bin(&w("1"), 8, &Poly::shift(2)).is_err());
    }

    #[test]
    fn fp_small_instance() {
        let f = FpFunction::new("three", Poly::shift(2).with_floor(3), |_| 3);
        let t = build_fp_order(&f).unwrap();
        let x = w("0");
        for mode in [Mode::Walk, Mode::Bruteforce, Mode::Block] {
            assert_eq!(eval_triple(&t, &x, mode).unwrap(), 3);
        }
        let u = t.universe(&x).unwrap();
        assert!(verify_order_axioms(t.order(), &u).is_empty());
        assert!(verify_adjacency(t.order(), &u).is_empty());
    }

    #[test]
    fn fp_bound_is_enforced() {
        let f = FpFunction::new("big", Poly::shift(1), |_| 1);
        assert!(matches!(build_fp_order(&f), Err(Error::ValueBound { .. })));
    }

    #[test]
    fn increment_of_zero_is_one() {
        let f = FpFunction::new("zero", Poly::shift(1), |_| 0);
        let inc = increment_order(&build_fp_order(&f).unwrap()).unwrap();
        for x in Word::all_up_to(1) {
            assert_eq!(eval_triple(&inc, &x, Mode::Walk).unwrap(), 1);
            assert_eq!(eval_triple(&inc, &x, Mode::Block).unwrap(), 1);
        }
    }

    #[test]
    fn support_order_reports_empty_interval_as_adjacent() {
        let wp = normalize_witness(&WitnessPredicate::new("none", Poly::identity(), |_, _| {
            false
        }));
        let t = build_support_aware_order(&wp, &SupportDecider::from_witness(&wp)).unwrap();
        let x = w("1");
        assert!(t.order().precedes(&t.b(&x), &t.t(&x)).unwrap());
        assert_eq!(eval_triple(&t, &x, Mode::Block).unwrap(), 0);
        assert_eq!(eval_triple(&t, &x, Mode::Walk), Err(Error::NotTotal));
    }
}
