//! Balanced nondeterministic machines, clusters of accepting paths under a
//! total order, and the machine transformations built on top of them.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::sync::Arc;

use crate::block::{block_order, block_universe, find_prefix_len, BlockRef, BlockScheme};
use crate::constructed::{OrderTriple, UniverseFn};
use crate::error::{Error, Result};
use crate::order::{shortlex_order, POrder, WordFn, ENUMERATION_CAP};
use crate::poly::Poly;
use crate::word::Word;

pub type PathPred = Arc<dyn Fn(&Word, &[u8]) -> bool + Send + Sync>;
pub type PathOutput = Arc<dyn Fn(&Word, &[u8]) -> Option<u64> + Send + Sync>;
pub type Embed = Arc<dyn Fn(&Word, &Word) -> Word + Send + Sync>;

/// Default cap on prefixes visited while enumerating paths.
pub const DEFAULT_NODE_CAP: u64 = 1 << 28;

/// A machine whose computation tree on x is complete binary of depth `path_len(x)`.
#[derive(Clone)]
pub struct BalancedNTM {
    pub name: String,
    pub path_len: Arc<dyn Fn(&Word) -> usize + Send + Sync>,
    /// Acceptance of a full-length path.
    pub accept: PathPred,
    /// Output on an accepting path.
    pub output: Option<PathOutput>,
    /// `false` for a prefix no accepting path extends; must never cut an accepting path.
    pub viable: Option<PathPred>,
}

impl std::fmt::Debug for BalancedNTM {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BalancedNTM")
            .field("name", &self.name)
            .finish()
    }
}

impl BalancedNTM {
    pub fn new(
        name: &str,
        path_len: impl Fn(&Word) -> usize + Send + Sync + 'static,
        accept: impl Fn(&Word, &[u8]) -> bool + Send + Sync + 'static,
    ) -> Self {
        BalancedNTM {
            name: name.into(),
            path_len: Arc::new(path_len),
            accept: Arc::new(accept),
            output: None,
            viable: None,
        }
    }

    pub fn len(&self, x: &Word) -> usize {
        (self.path_len)(x)
    }

    /// Whether `path` is an accepting path of the machine on x.
    pub fn accepts(&self, x: &Word, path: &Word) -> bool {
        path.len() == self.len(x) && (self.accept)(x, path.bits())
    }

    /// Accepting paths in lexicographic order with their outputs.
    pub fn accepting_paths(&self, x: &Word, node_cap: u64) -> Result<Vec<(Word, Option<u64>)>> {
        let n = self.len(x);
        if self.viable.is_none() && n > ENUMERATION_CAP {
            return Err(Error::EnumerationTooLarge {
                len: n,
                cap: ENUMERATION_CAP,
            });
        }
        let mut out = Vec::new();
        let mut prefix: Vec<u8> = Vec::with_capacity(n);
        let mut visited = 0u64;
        // Depth-first over prefixes in lexicographic order.
        loop {
            visited += 1;
            if visited > node_cap {
                return Err(Error::Invalid(format!(
                    "path enumeration for {} exceeded {node_cap} nodes",
                    self.name
                )));
            }
            let keep = match &self.viable {
                Some(v) => v(x, &prefix),
                None => true,
            };
            if keep && prefix.len() == n {
                if (self.accept)(x, &prefix) {
                    let o = self.output.as_ref().and_then(|o| o(x, &prefix));
                    out.push((Word::from_bits(prefix.iter().copied()), o));
                }
            } else if keep {
                prefix.push(0);
                continue;
            }
            // Backtrack to the next sibling.
            loop {
                match prefix.pop() {
                    None => return Ok(out),
                    Some(0) => {
                        prefix.push(1);
                        break;
                    }
                    Some(_) => {}
                }
            }
        }
    }

    pub fn acc_set(&self, x: &Word) -> Result<Vec<Word>> {
        Ok(self
            .accepting_paths(x, DEFAULT_NODE_CAP)?
            .into_iter()
            .map(|(w, _)| w)
            .collect())
    }

    pub fn count(&self, x: &Word) -> Result<u64> {
        Ok(self.accepting_paths(x, DEFAULT_NODE_CAP)?.len() as u64)
    }
}

/// A machine together with the order its accepting paths should cluster under.
#[derive(Clone)]
pub struct ClusterWitness {
    pub machine: BalancedNTM,
    pub order: POrder,
    /// Where a path of the machine on x sits in the order; identity when absent.
    pub embed: Option<Embed>,
    /// An order-convex set holding every embedded path on x.
    pub universe: Option<UniverseFn>,
}

impl ClusterWitness {
    pub fn key(&self, x: &Word, path: &Word) -> Word {
        match &self.embed {
            Some(e) => e(x, path),
            None => path.clone(),
        }
    }

    /// Strict adjacency between two paths (of any length) on x.
    pub fn precedes(&self, x: &Word, a: &Word, b: &Word) -> bool {
        self.order
            .precedes(&self.key(x, a), &self.key(x, b))
            .unwrap_or(false)
    }

    fn cmp(&self, x: &Word, a: &Word, b: &Word) -> Ordering {
        let (ka, kb) = (self.key(x, a), self.key(x, b));
        if ka == kb {
            Ordering::Equal
        } else if self.order.leq(&ka, &kb).unwrap_or(false) {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }
}

/// All paths on x sorted by the order, cut into maximal runs of equal acceptance.
pub fn cluster_partition(w: &ClusterWitness, x: &Word) -> Result<Vec<(bool, Vec<Word>)>> {
    let n = w.machine.len(x);
    if n > ENUMERATION_CAP {
        return Err(Error::EnumerationTooLarge {
            len: n,
            cap: ENUMERATION_CAP,
        });
    }
    let mut paths: Vec<Word> = Word::all_of_len(n).collect();
    paths.sort_by(|a, b| w.cmp(x, a, b));
    let mut runs: Vec<(bool, Vec<Word>)> = Vec::new();
    for p in paths {
        let acc = w.machine.accepts(x, &p);
        match runs.last_mut() {
            Some((a, run)) if *a == acc => run.push(p),
            _ => runs.push((acc, vec![p])),
        }
    }
    Ok(runs)
}

/// Whether the accepting paths form at most one run. An empty set counts as a cluster.
pub fn is_cluster(w: &ClusterWitness, x: &Word) -> Result<bool> {
    let acc = w.machine.acc_set(x)?;
    if acc.len() <= 1 {
        return Ok(true);
    }
    let Some(succ) = &w.order.successor else {
        return Ok(cluster_partition(w, x)?.iter().filter(|(a, _)| *a).count() <= 1);
    };
    let keys: HashSet<Word> = acc.iter().map(|p| w.key(x, p)).collect();
    let min = acc.iter().min_by(|a, b| w.cmp(x, a, b)).expect("nonempty");
    let mut cur = w.key(x, min);
    for _ in 1..acc.len() {
        match succ(&cur) {
            Some(next) if keys.contains(&next) => cur = next,
            _ => return Ok(false),
        }
    }
    Ok(true)
}

/// Number of accepting paths, provided they form a cluster.
pub fn cl_count(w: &ClusterWitness, x: &Word) -> Result<u64> {
    if !is_cluster(w, x)? {
        return Err(Error::NotCluster(x.clone()));
    }
    w.machine.count(x)
}

// ---------------------------------------------------------------------------
// Interval orders as cluster witnesses.

/// The order on blocks u·Σ^{P+2}, P = p(|u|): first the words u 0^{P-|y|} 1 y 0 for
/// y ≤ u in the base order (ordered as the base orders y), then the rest lexicographically.
struct IntervalBlocks {
    base: POrder,
}

impl IntervalBlocks {
    fn width(&self, k: usize) -> usize {
        self.base.bound(k) + 2
    }

    /// The y encoded by a block word, if it lies in the leading part of the block.
    fn decode(&self, blk: &BlockRef, w: &Word) -> Option<Word> {
        let s = blk.suffix(w);
        if *s.last()? != 0 {
            return None;
        }
        let one = s.iter().position(|&b| b == 1)?;
        let y = Word::from_bits(s[one + 1..s.len() - 1].iter().copied());
        self.base.leq(&y, &blk.key).ok()?.then_some(y)
    }

    fn encode(&self, blk: &BlockRef, y: &Word) -> Word {
        let p = self.width(blk.key.len()) - 2;
        Word::join(&[
            &blk.key,
            &Word::zeros(p - y.len()),
            &Word::ones(1),
            y,
            &Word::zeros(1),
        ])
    }
}

impl BlockScheme for IntervalBlocks {
    fn block_of(&self, w: &Word) -> Option<BlockRef> {
        let k = find_prefix_len(w.len(), |k| self.width(k))?;
        Some(BlockRef::suffixes(w.prefix(k), self.width(k)))
    }

    fn local_leq(&self, blk: &BlockRef, u: &Word, v: &Word) -> bool {
        match (self.decode(blk, u), self.decode(blk, v)) {
            (Some(a), Some(b)) => self.base.leq(&a, &b).unwrap_or(false),
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => u.bits() <= v.bits(),
        }
    }

    fn local_succ(&self, blk: &BlockRef, u: &Word) -> Option<Word> {
        if let Some(y) = self.decode(blk, u) {
            if y == blk.key {
                return Some(blk.lo());
            }
            let next = self.base.successor(&y).ok()??;
            return Some(self.encode(blk, &next));
        }
        let mut cur = u.clone();
        loop {
            if blk.is_hi(&cur) {
                return None;
            }
            cur = cur.lex_next()?;
            if self.decode(blk, &cur).is_none() {
                return Some(cur);
            }
        }
    }

    fn block_min(&self, blk: &BlockRef) -> Word {
        let min = self.base.min_element.clone().expect("checked when built");
        self.encode(blk, &min)
    }

    fn block_max(&self, blk: &BlockRef) -> Word {
        blk.hi()
    }
}

/// A machine on x guessing w with t(x)·w encoding some y strictly between b(x) and
/// t(x); its accepting paths cluster under the derived block order.
pub fn ift_to_cluster(triple: &OrderTriple) -> Result<ClusterWitness> {
    let base = triple.order().clone();
    if !base.is_total {
        return Err(Error::NotTotal);
    }
    for (cap, present) in [
        ("leq", base.leq.is_some()),
        ("successor", base.successor.is_some()),
        ("min_element", base.min_element.is_some()),
    ] {
        if !present {
            return Err(Error::MissingCapability(cap));
        }
    }
    if !base.length_bound.is_monotone() {
        return Err(Error::Invalid("length bound must be monotone".into()));
    }
    let scheme = Arc::new(IntervalBlocks { base: base.clone() });
    let order = block_order(
        &format!("cluster[{}]", triple.name),
        scheme.clone(),
        true,
        true,
    );
    let (bf, tf) = (triple.spec.b.clone(), triple.spec.t.clone());
    let width = {
        let (tf, base) = (tf.clone(), base.clone());
        move |x: &Word| base.bound(tf(x).len()) + 2
    };
    let accept = {
        let (tf, scheme) = (tf.clone(), scheme.clone());
        move |x: &Word, path: &[u8]| {
            let t = tf(x);
            let w = t.concat(&Word::from_bits(path.iter().copied()));
            let blk = BlockRef::suffixes(t.clone(), path.len());
            match scheme.decode(&blk, &w) {
                Some(y) => {
                    let b = bf(x);
                    scheme.base.lt(&b, &y).unwrap_or(false)
                        && scheme.base.lt(&y, &t).unwrap_or(false)
                }
                None => false,
            }
        }
    };
    let machine = BalancedNTM::new(&format!("interval[{}]", triple.name), width.clone(), accept);
    let embed: WordFn = tf.clone();
    let universe = move |x: &Word| block_universe(&*scheme, &BlockRef::suffixes(tf(x), width(x)));
    Ok(ClusterWitness {
        machine,
        order,
        embed: Some(Arc::new(move |x: &Word, p: &Word| embed(x).concat(p))),
        universe: Some(Arc::new(universe)),
    })
}

// ---------------------------------------------------------------------------
// Paths made of several guessed strings.

#[derive(Clone, Debug)]
enum Field {
    Fixed(usize),
    /// A string of one of the listed lengths: 2 tag bits choosing the length,
    /// then the string padded with zeros to the longest length.
    Var(Vec<usize>),
}

impl Field {
    fn width(&self) -> usize {
        match self {
            Field::Fixed(n) => *n,
            Field::Var(l) => 2 + l.iter().copied().max().unwrap_or(0),
        }
    }

    fn var(lengths: impl IntoIterator<Item = Option<usize>>) -> Field {
        Field::Var(lengths.into_iter().flatten().collect())
    }
}

#[derive(Clone, Debug)]
struct Fields(Vec<Field>);

impl Fields {
    fn total(&self) -> usize {
        self.0.iter().map(Field::width).sum()
    }

    fn ends(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().scan(0, |at, f| {
            *at += f.width();
            Some(*at)
        })
    }

    /// The fields completed by `prefix`, or `None` if the prefix already breaks the encoding.
    fn decode(&self, prefix: &[u8]) -> Option<Vec<Word>> {
        let mut out = Vec::new();
        let mut at = 0;
        for f in &self.0 {
            let end = at + f.width();
            let part = &prefix[at.min(prefix.len())..end.min(prefix.len())];
            match f {
                Field::Fixed(_) => {
                    if end <= prefix.len() {
                        out.push(Word::from_bits(part.iter().copied()));
                    }
                }
                Field::Var(lens) => {
                    if part.len() >= 2 {
                        let tag = (part[0] * 2 + part[1]) as usize;
                        let len = *lens.get(tag)?;
                        if part[2 + len.min(part.len() - 2)..].contains(&1) {
                            return None;
                        }
                        if end <= prefix.len() {
                            out.push(Word::from_bits(part[2..2 + len].iter().copied()));
                        }
                    }
                }
            }
            if end > prefix.len() {
                break;
            }
            at = end;
        }
        Some(out)
    }
}

/// Builds a machine from a field layout and a check over the fields decoded so far.
/// The check is applied to every prefix, so it must only reject on the fields it is given.
fn staged_machine(
    name: String,
    layout: impl Fn(&Word) -> Fields + Send + Sync + 'static,
    check: impl Fn(&Word, &[Word]) -> bool + Send + Sync + 'static,
    output: impl Fn(&Word, &[Word]) -> Option<u64> + Send + Sync + 'static,
) -> BalancedNTM {
    let layout = Arc::new(layout);
    let check = Arc::new(check);
    let (l1, l2, l3, c1, c2) = (
        layout.clone(),
        layout.clone(),
        layout.clone(),
        check.clone(),
        check,
    );
    BalancedNTM {
        name,
        path_len: Arc::new(move |x: &Word| l1(x).total()),
        accept: Arc::new(move |x: &Word, p: &[u8]| {
            let f = l2(x);
            match f.decode(p) {
                Some(d) => d.len() == f.0.len() && c1(x, &d),
                None => false,
            }
        }),
        output: Some(Arc::new(move |x: &Word, p: &[u8]| {
            output(x, &l3(x).decode(p)?)
        })),
        viable: Some(Arc::new(move |x: &Word, p: &[u8]| {
            let f = layout(x);
            let completes_field = p.is_empty() || f.ends().any(|e| e == p.len());
            match f.decode(p) {
                // Same fields as the parent prefix, which was already viable.
                Some(_) if !completes_field => true,
                Some(d) => c2(x, &d),
                None => false,
            }
        })),
    }
}

/// The nonemptiness detector: guesses z and z' with z ≺ z', z accepting and z' not.
/// At most one path accepts, and one does exactly when some path of the machine accepts.
pub fn nonemptiness_detector(w: &ClusterWitness) -> BalancedNTM {
    let (wa, wb) = (w.clone(), w.clone());
    staged_machine(
        format!("nonempty[{}]", w.machine.name),
        move |x| {
            let p = wa.machine.len(x);
            Fields(vec![Field::Fixed(p), Field::var([Some(p), Some(p + 1)])])
        },
        move |x, f| {
            let m = &wb.machine;
            if let Some(z) = f.first() {
                if !m.accepts(x, z) {
                    return false;
                }
            }
            if let [z, z2] = f {
                return wb.precedes(x, z, z2) && !m.accepts(x, z2);
            }
            true
        },
        |_, _| Some(1),
    )
}

/// The uniqueness detector: guesses w ≺ y ≺ z with only y accepting (w may be
/// absent when y = ε). Accepts exactly when one path of the machine accepts.
pub fn uniqueness_detector(w: &ClusterWitness) -> BalancedNTM {
    let (wa, wb) = (w.clone(), w.clone());
    staged_machine(
        format!("unique[{}]", w.machine.name),
        move |x| {
            let p = wa.machine.len(x);
            Fields(vec![
                Field::Fixed(p),
                Field::var([p.checked_sub(1), Some(p)]),
                Field::var([p.checked_sub(1), Some(p), Some(p + 1)]),
            ])
        },
        move |x, f| {
            let m = &wb.machine;
            if let Some(y) = f.first() {
                if !m.accepts(x, y) {
                    return false;
                }
            }
            if let [y, pre, ..] = f {
                let empty_case = y.is_empty() && pre.is_empty();
                if !empty_case && !(wb.precedes(x, pre, y) && !m.accepts(x, pre)) {
                    return false;
                }
            }
            if let [y, _, z] = f {
                return wb.precedes(x, y, z) && !m.accepts(x, z);
            }
            true
        },
        |_, _| Some(1),
    )
}

fn bits_for(n: u64) -> usize {
    (64 - n.leading_zeros()) as usize
}

/// A machine with one accepting path whenever the witness's count is positive,
/// outputting that count, and none otherwise. `q` bounds the count.
///
/// Paths hold y, y', z, z' (the ends of the cluster and their outside
/// neighbours), then r and v_1..v_{q-2} spelling out the chain from y to z.
pub fn cluster_to_almost_unique(w: &ClusterWitness, q: Poly) -> BalancedNTM {
    let (wa, wb) = (w.clone(), w.clone());
    let q2 = q.clone();
    let slots = move |x: &Word| q2.eval(x.len()).saturating_sub(2);
    let slots2 = slots.clone();
    let slots3 = slots.clone();
    let layout = move |x: &Word| {
        let p = wa.machine.len(x);
        let k = slots(x);
        let mut f = vec![
            Field::Fixed(p),
            Field::var([p.checked_sub(1), Some(p)]),
            Field::Fixed(p),
            Field::var([Some(p), Some(p + 1)]),
            Field::Fixed(bits_for(k as u64)),
        ];
        f.extend(std::iter::repeat_n(Field::Fixed(p), k));
        Fields(f)
    };
    // Which decoded fields are y, y', z, z', r, v_1...
    const Y: usize = 0;
    const Y1: usize = 1;
    const Z: usize = 2;
    const Z1: usize = 3;
    const R: usize = 4;
    let check = move |x: &Word, f: &[Word]| -> bool {
        let m = &wb.machine;
        let p = m.len(x);
        if p == 0 {
            // Only the empty path exists: accept on the all-zero path when it accepts.
            return m.accepts(x, &Word::empty()) && f.iter().all(|w| w.is_all(0));
        }
        if f.len() > Y && !m.accepts(x, &f[Y]) {
            return false;
        }
        if f.len() > Y1 && !(wb.precedes(x, &f[Y1], &f[Y]) && !m.accepts(x, &f[Y1])) {
            return false;
        }
        if f.len() > Z && !m.accepts(x, &f[Z]) {
            return false;
        }
        if f.len() > Z1 && !(wb.precedes(x, &f[Z], &f[Z1]) && !m.accepts(x, &f[Z1])) {
            return false;
        }
        if f.len() <= R {
            return true;
        }
        let r = f[R].value() as usize;
        let single = f[Y] == f[Z];
        if (single && r != 0) || r > slots2(x) {
            return false;
        }
        let vs = &f[R + 1..];
        for (i, v) in vs.iter().enumerate() {
            if i >= r || single {
                if !v.is_all(0) {
                    return false;
                }
                continue;
            }
            let prev = if i == 0 { &f[Y] } else { &vs[i - 1] };
            if !wb.precedes(x, prev, v) {
                return false;
            }
        }
        if f.len() == R + 1 + slots2(x) && !single {
            let last = if r == 0 { &f[Y] } else { &vs[r - 1] };
            return wb.precedes(x, last, &f[Z]);
        }
        true
    };
    let output = move |x: &Word, f: &[Word]| -> Option<u64> {
        let _ = slots3(x);
        if f.len() <= R || f[Y] == f[Z] {
            return Some(1);
        }
        Some(f[R].value() + 2)
    };
    staged_machine(
        format!("almost-unique[{}]", w.machine.name),
        layout,
        check,
        output,
    )
}

/// Violations of "one accepting path with output f(x) when f(x) > 0, no output otherwise".
pub fn almost_unique_check(
    m: &BalancedNTM,
    f: &dyn Fn(&Word) -> u64,
    inputs: &[Word],
) -> Vec<String> {
    let mut report = Vec::new();
    for x in inputs {
        let want = f(x);
        let paths = match m.accepting_paths(x, DEFAULT_NODE_CAP) {
            Ok(p) => p,
            Err(e) => {
                report.push(format!("{x}: {e}"));
                continue;
            }
        };
        let mut outs: Vec<Option<u64>> = paths.iter().map(|(_, o)| *o).collect();
        outs.sort();
        outs.dedup();
        if want > 0 {
            if paths.len() != 1 {
                report.push(format!(
                    "{x}: f = {want} but {} accepting paths",
                    paths.len()
                ));
            }
            if outs != [Some(want)] {
                report.push(format!("{x}: f = {want} but outputs {outs:?}"));
            }
        } else if !paths.is_empty() {
            report.push(format!("{x}: f = 0 but {} accepting paths", paths.len()));
        }
    }
    report
}

// ---------------------------------------------------------------------------
// Catalog.

pub const CLUSTER_MACHINES: &[&str] = &["parity", "ones-window", "singleton", "empty", "two-ends"];

/// Machines with paths of length |x| + 2 under shortlex, and a bound on their
/// count when they are clusters with polynomially bounded counts.
pub fn cluster_machine(id: &str) -> Result<(ClusterWitness, Option<Poly>)> {
    let len = |x: &Word| x.len() + 2;
    let ones = |p: &[u8]| p.iter().filter(|&&b| b == 1).count();
    let (m, bound) = match id {
        "parity" => (
            BalancedNTM::new("parity", len, move |x, p| {
                (x.count_ones() + ones(p)) % 2 == 1
            }),
            None,
        ),
        // Paths whose value is at most the number of ones in x.
        "ones-window" => (
            BalancedNTM::new("ones-window", len, |x, p| {
                crate::tm::bits_value(p) <= x.count_ones() as u64
            }),
            Some(Poly::shift(1)),
        ),
        "singleton" => (
            BalancedNTM::new("singleton", len, |_, p| p.iter().all(|&b| b == 1)),
            Some(Poly::constant(1)),
        ),
        "empty" => (
            BalancedNTM::new("empty", len, |_, _| false),
            Some(Poly::constant(0)),
        ),
        "two-ends" => (
            BalancedNTM::new("two-ends", len, |_, p| {
                p.iter().all(|&b| b == 0) || p.iter().all(|&b| b == 1)
            }),
            None,
        ),
        _ => {
            return Err(Error::Unknown {
                kind: "cluster machine",
                name: id.into(),
            })
        }
    };
    Ok((
        ClusterWitness {
            machine: m,
            order: shortlex_order(),
            embed: None,
            universe: None,
        },
        bound,
    ))
}
