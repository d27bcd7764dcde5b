//! The p-order capability record and the generic interval counters.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::word::Word;

pub type Relation = Arc<dyn Fn(&Word, &Word) -> bool + Send + Sync>;
pub type StepFn = Arc<dyn Fn(&Word) -> Option<Word> + Send + Sync>;
pub type WordFn = Arc<dyn Fn(&Word) -> Word + Send + Sync>;

/// Longest word length any exhaustive enumeration will attempt.
pub const ENUMERATION_CAP: usize = 22;

/// A partial order on binary words, described by whichever capabilities it has.
///
/// `leq` decides the order, `precedes` decides immediate adjacency and `successor`
/// returns the immediate successor of a word in a total order.
#[derive(Clone)]
pub struct POrder {
    pub name: String,
    pub leq: Option<Relation>,
    pub precedes: Option<Relation>,
    pub successor: Option<StepFn>,
    pub length_bound: Poly,
    pub is_total: bool,
    pub min_element: Option<Word>,
}

impl fmt::Debug for POrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("POrder")
            .field("name", &self.name)
            .field("leq", &self.leq.is_some())
            .field("precedes", &self.precedes.is_some())
            .field("successor", &self.successor.is_some())
            .field("length_bound", &self.length_bound)
            .field("is_total", &self.is_total)
            .field("min_element", &self.min_element)
            .finish()
    }
}

impl POrder {
    pub fn leq(&self, x: &Word, y: &Word) -> Result<bool> {
        let leq = self.leq.as_ref().ok_or(Error::MissingCapability("leq"))?;
        Ok(leq(x, y))
    }

    pub fn lt(&self, x: &Word, y: &Word) -> Result<bool> {
        Ok(x != y && self.leq(x, y)?)
    }

    pub fn precedes(&self, x: &Word, y: &Word) -> Result<bool> {
        let p = self
            .precedes
            .as_ref()
            .ok_or(Error::MissingCapability("precedes"))?;
        Ok(p(x, y))
    }

    pub fn successor(&self, x: &Word) -> Result<Option<Word>> {
        let s = self
            .successor
            .as_ref()
            .ok_or(Error::MissingCapability("successor"))?;
        Ok(s(x))
    }

    pub fn bound(&self, n: usize) -> usize {
        self.length_bound.eval(n)
    }
}

/// Shortlex as a p-order: shorter words first, equal lengths lexicographic.
pub fn shortlex_order() -> POrder {
    POrder {
        name: "shortlex".into(),
        leq: Some(Arc::new(|x: &Word, y: &Word| x <= y)),
        precedes: Some(Arc::new(|x: &Word, y: &Word| &x.shortlex_next() == y)),
        successor: Some(Arc::new(|x: &Word| Some(x.shortlex_next()))),
        length_bound: Poly::identity(),
        is_total: true,
        min_element: Some(Word::empty()),
    }
}

/// An order plus boundary functions; the interval at x is the open interval (b(x), t(x)).
#[derive(Clone)]
pub struct IntervalSpec {
    pub order: POrder,
    pub b: WordFn,
    pub t: WordFn,
}

impl IntervalSpec {
    pub fn new(order: POrder, b: WordFn, t: WordFn) -> Self {
        IntervalSpec { order, b, t }
    }

    /// An interval with constant boundaries, handy for tests.
    pub fn fixed(order: POrder, b: Word, t: Word) -> Self {
        IntervalSpec {
            order,
            b: Arc::new(move |_| b.clone()),
            t: Arc::new(move |_| t.clone()),
        }
    }

    pub fn bounds(&self, x: &Word) -> (Word, Word) {
        ((self.b)(x), (self.t)(x))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Violation {
    Reflexivity(Word),
    Antisymmetry(Word, Word),
    Transitivity(Word, Word, Word),
    LengthBound(Word, Word),
    Totality(Word, Word),
    Adjacency { x: Word, y: Word, claimed: bool },
    MissingCapability(&'static str),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Reflexivity(x) => write!(f, "reflexivity fails at {x}"),
            Violation::Antisymmetry(x, y) => write!(f, "antisymmetry fails: {x} <= {y} <= {x}"),
            Violation::Transitivity(x, y, z) => {
                write!(
                    f,
                    "transitivity fails: {x} <= {y} <= {z} but not {x} <= {z}"
                )
            }
            Violation::LengthBound(x, y) => write!(f, "length bound fails: {x} <= {y}"),
            Violation::Totality(x, y) => write!(f, "{x} and {y} are incomparable"),
            Violation::Adjacency { x, y, claimed } => {
                write!(
                    f,
                    "adjacency of ({x}, {y}) reported {claimed}, expected {}",
                    !claimed
                )
            }
            Violation::MissingCapability(c) => write!(f, "order lacks `{c}`"),
        }
    }
}

/// Reports at most this many violations of each kind.
const REPORT_CAP: usize = 16;

/// Square boolean matrix stored as bit rows.
struct BitMatrix {
    n: usize,
    words: usize,
    rows: Vec<u64>,
}

impl BitMatrix {
    fn new(n: usize) -> Self {
        let words = n.div_ceil(64);
        BitMatrix {
            n,
            words,
            rows: vec![0; n * words],
        }
    }

    fn set(&mut self, i: usize, j: usize) {
        self.rows[i * self.words + j / 64] |= 1 << (j % 64);
    }

    fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.rows[i * self.words..(i + 1) * self.words]
    }

    fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::new(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                if self.get(i, j) {
                    t.set(j, i);
                }
            }
        }
        t
    }
}

fn dedup(universe: &[Word]) -> Vec<Word> {
    let mut seen = HashSet::new();
    universe
        .iter()
        .filter(|w| seen.insert((*w).clone()))
        .cloned()
        .collect()
}

fn leq_matrix(order: &POrder, universe: &[Word]) -> Result<BitMatrix> {
    let leq = order.leq.as_ref().ok_or(Error::MissingCapability("leq"))?;
    let mut m = BitMatrix::new(universe.len());
    for (i, x) in universe.iter().enumerate() {
        for (j, y) in universe.iter().enumerate() {
            if leq(x, y) {
                m.set(i, j);
            }
        }
    }
    Ok(m)
}

/// Checks reflexivity, antisymmetry, transitivity, the length bound and (if claimed)
/// totality of `order.leq` on a finite universe. An empty report means all hold.
pub fn verify_order_axioms(order: &POrder, universe: &[Word]) -> Vec<Violation> {
    let u = dedup(universe);
    let m = match leq_matrix(order, &u) {
        Ok(m) => m,
        Err(_) => return vec![Violation::MissingCapability("leq")],
    };
    let n = u.len();
    let mut out = Vec::new();
    let mut counts = [0usize; 5];
    let mut push = |kind: usize, v: Violation, out: &mut Vec<Violation>| {
        counts[kind] += 1;
        if counts[kind] <= REPORT_CAP {
            out.push(v);
        }
    };
    for i in 0..n {
        if !m.get(i, i) {
            push(0, Violation::Reflexivity(u[i].clone()), &mut out);
        }
        for j in 0..n {
            if i == j || !m.get(i, j) {
                continue;
            }
            if i < j && m.get(j, i) {
                push(
                    1,
                    Violation::Antisymmetry(u[i].clone(), u[j].clone()),
                    &mut out,
                );
            }
            if u[i].len() > order.bound(u[j].len()) {
                push(
                    3,
                    Violation::LengthBound(u[i].clone(), u[j].clone()),
                    &mut out,
                );
            }
            // row(j) must be contained in row(i)
            let (ri, rj) = (m.row(i), m.row(j));
            for (k_word, (&a, &b)) in ri.iter().zip(rj).enumerate() {
                let missing = b & !a;
                if missing != 0 {
                    let k = k_word * 64 + missing.trailing_zeros() as usize;
                    push(
                        2,
                        Violation::Transitivity(u[i].clone(), u[j].clone(), u[k].clone()),
                        &mut out,
                    );
                    break;
                }
            }
        }
        if order.is_total {
            for j in (i + 1)..n {
                if !m.get(i, j) && !m.get(j, i) {
                    push(4, Violation::Totality(u[i].clone(), u[j].clone()), &mut out);
                }
            }
        }
    }
    out
}

/// Adjacency decided from `leq` alone: x strictly below y with nothing of length
/// at most q(|y|) strictly between. Exponential in q(|y|); an oracle only.
pub fn adjacency_from_leq(order: &POrder, x: &Word, y: &Word) -> Result<bool> {
    if !order.lt(x, y)? {
        return Ok(false);
    }
    let bound = order.bound(y.len());
    check_cap(bound)?;
    for z in Word::all_up_to(bound) {
        if order.lt(x, &z)? && order.lt(&z, y)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn check_cap(len: usize) -> Result<()> {
    if len > ENUMERATION_CAP {
        return Err(Error::EnumerationTooLarge {
            len,
            cap: ENUMERATION_CAP,
        });
    }
    Ok(())
}

/// The covering pairs of `leq` restricted to `universe`, as index pairs into the
/// deduplicated universe (returned alongside).
pub fn covering_pairs(
    order: &POrder,
    universe: &[Word],
) -> Result<(Vec<Word>, Vec<(usize, usize)>)> {
    let u = dedup(universe);
    let m = leq_matrix(order, &u)?;
    let n = u.len();
    let mut lt = BitMatrix::new(n);
    for i in 0..n {
        for j in 0..n {
            if i != j && m.get(i, j) {
                lt.set(i, j);
            }
        }
    }
    let above = lt.transpose();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if !lt.get(i, j) {
                continue;
            }
            let between = lt
                .row(i)
                .iter()
                .zip(above.row(j))
                .any(|(&a, &b)| a & b != 0);
            if !between {
                pairs.push((i, j));
            }
        }
    }
    Ok((u, pairs))
}

/// Compares `precedes` against the covering relation of `leq` on every pair of the
/// universe. The universe should be downward closed enough that covering inside it
/// is covering in the whole order, e.g. all words up to some length.
pub fn verify_adjacency(order: &POrder, universe: &[Word]) -> Vec<Violation> {
    let Some(prec) = order.precedes.as_ref() else {
        return vec![Violation::MissingCapability("precedes")];
    };
    let (u, pairs) = match covering_pairs(order, universe) {
        Ok(r) => r,
        Err(_) => return vec![Violation::MissingCapability("leq")],
    };
    let cover: HashSet<(usize, usize)> = pairs.into_iter().collect();
    let mut out = Vec::new();
    for (i, x) in u.iter().enumerate() {
        for (j, y) in u.iter().enumerate() {
            let claimed = prec(x, y);
            if claimed != cover.contains(&(i, j)) {
                out.push(Violation::Adjacency {
                    x: x.clone(),
                    y: y.clone(),
                    claimed,
                });
                if out.len() >= REPORT_CAP {
                    return out;
                }
            }
        }
    }
    out
}

/// Exact size of {z : |z| <= q(|t(x)|), b(x) < z < t(x)} by enumeration.
pub fn interval_size_bruteforce(spec: &IntervalSpec, x: &Word) -> Result<u64> {
    let t = (spec.t)(x);
    let bound = spec.order.bound(t.len());
    check_cap(bound)?;
    interval_size_in_universe(spec, x, Word::all_up_to(bound))
}

/// Counts interval members among the given candidates only.
pub fn interval_size_in_universe<I>(spec: &IntervalSpec, x: &Word, universe: I) -> Result<u64>
where
    I: IntoIterator<Item = Word>,
{
    let (b, t) = spec.bounds(x);
    let leq = spec
        .order
        .leq
        .as_ref()
        .ok_or(Error::MissingCapability("leq"))?;
    if b == t || !leq(&b, &t) {
        return Ok(0);
    }
    let mut count = 0;
    for z in universe {
        if z != b && z != t && leq(&b, &z) && leq(&z, &t) {
            count += 1;
        }
    }
    Ok(count)
}

/// Counts the interval by stepping successor-by-successor from b(x) to t(x).
///
/// Uses `successor` if given, else the order's own successor, else a successor
/// recovered from `precedes` by search over words of length at most q(|t(x)|).
pub fn interval_size_by_walk(
    spec: &IntervalSpec,
    x: &Word,
    successor: Option<&dyn Fn(&Word) -> Option<Word>>,
    budget: u64,
) -> Result<u64> {
    let order = &spec.order;
    if !order.is_total {
        return Err(Error::NotTotal);
    }
    let (b, t) = spec.bounds(x);
    if b == t {
        return Ok(0);
    }
    if let Some(leq) = &order.leq {
        if !leq(&b, &t) {
            return Ok(0);
        }
    }
    let derived;
    let step: &dyn Fn(&Word) -> Option<Word> = match (successor, &order.successor) {
        (Some(s), _) => s,
        (None, Some(s)) => s.as_ref(),
        (None, None) => {
            let prec = order
                .precedes
                .clone()
                .ok_or(Error::MissingCapability("precedes"))?;
            let bound = order.bound(t.len());
            check_cap(bound)?;
            derived = move |w: &Word| Word::all_up_to(bound).find(|z| prec(w, z));
            &derived
        }
    };
    walk_count(step, &b, &t, budget)
}

/// Number of words strictly between `from` and `to` along `step`.
pub fn walk_count(
    step: &dyn Fn(&Word) -> Option<Word>,
    from: &Word,
    to: &Word,
    budget: u64,
) -> Result<u64> {
    if from == to {
        return Ok(0);
    }
    let mut cur = from.clone();
    let mut steps = 0u64;
    loop {
        if steps >= budget {
            return Err(Error::BudgetExhausted {
                from: from.clone(),
                to: to.clone(),
                budget,
            });
        }
        let next = step(&cur).ok_or_else(|| Error::WalkEnded {
            from: from.clone(),
            to: to.clone(),
        })?;
        steps += 1;
        if &next == to {
            return Ok(steps - 1);
        }
        cur = next;
    }
}

/// True iff the interval at x is nonempty: b(x) < t(x) and b(x) does not immediately precede t(x).
pub fn interval_nonempty(spec: &IntervalSpec, x: &Word) -> Result<bool> {
    let (b, t) = spec.bounds(x);
    Ok(spec.order.lt(&b, &t)? && !spec.order.precedes(&b, &t)?)
}

/// True iff exactly one word lies strictly between b(x) and t(x) in a total order,
/// decided by two adjacency checks.
pub fn interval_singleton(spec: &IntervalSpec, x: &Word) -> Result<bool> {
    let order = &spec.order;
    if !order.is_total {
        return Err(Error::NotTotal);
    }
    let (b, t) = spec.bounds(x);
    let prec = order
        .precedes
        .as_ref()
        .ok_or(Error::MissingCapability("precedes"))?;
    if let Some(succ) = &order.successor {
        return Ok(match succ(&b) {
            Some(z) => z != t && prec(&z, &t),
            None => false,
        });
    }
    let bound = order.bound(t.len());
    check_cap(bound)?;
    Ok(Word::all_up_to(bound).any(|z| prec(&b, &z) && prec(&z, &t)))
}

/// Decides x <= y from adjacency alone: x = y, or a chain x < z1 < ... < y of
/// immediate steps through words of length at most q(|y|).
pub fn reachable_leq(order: &POrder, x: &Word, y: &Word) -> Result<bool> {
    if x == y {
        return Ok(true);
    }
    let prec = order
        .precedes
        .as_ref()
        .ok_or(Error::MissingCapability("precedes"))?;
    let bound = order.bound(y.len());
    check_cap(bound)?;
    let universe: Vec<Word> = Word::all_up_to(bound).collect();
    let mut seen: HashSet<Word> = HashSet::new();
    let mut queue = VecDeque::from([x.clone()]);
    seen.insert(x.clone());
    while let Some(u) = queue.pop_front() {
        for v in &universe {
            if !seen.contains(v) && prec(&u, v) {
                if v == y {
                    return Ok(true);
                }
                seen.insert(v.clone());
                queue.push_back(v.clone());
            }
        }
    }
    Ok(false)
}

/// Reachability through adjacency steps for every pair of a finite universe.
/// `result[&(x, y)]` is true iff y is reachable from x inside the universe.
pub fn reachability_closure(
    order: &POrder,
    universe: &[Word],
) -> Result<HashMap<(Word, Word), bool>> {
    let prec = order
        .precedes
        .as_ref()
        .ok_or(Error::MissingCapability("precedes"))?;
    let u = dedup(universe);
    let n = u.len();
    let mut succs: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if i != j && prec(&u[i], &u[j]) {
                succs[i].push(j);
            }
        }
    }
    let mut out = HashMap::with_capacity(n * n);
    for i in 0..n {
        let mut seen = vec![false; n];
        seen[i] = true;
        let mut stack = vec![i];
        while let Some(a) = stack.pop() {
            for &b in &succs[a] {
                if !seen[b] {
                    seen[b] = true;
                    stack.push(b);
                }
            }
        }
        for j in 0..n {
            out.insert((u[i].clone(), u[j].clone()), seen[j]);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::w;

    #[test]
    fn shortlex_basics() {
        let o = shortlex_order();
        assert!(o.leq(&w("1"), &w("00")).unwrap());
        assert!(o.precedes(&w("1"), &w("00")).unwrap());
        assert!(!o.precedes(&w("0"), &w("00")).unwrap());
    }

    #[test]
    fn adjacency_oracle_on_shortlex() {
        let o = shortlex_order();
        assert!(!adjacency_from_leq(&o, &w("0"), &w("0")).unwrap());
        assert!(adjacency_from_leq(&o, &w("1"), &w("00")).unwrap());
        assert!(adjacency_from_leq(&o, &w("0"), &w("1")).unwrap());
        assert!(!adjacency_from_leq(&o, &w("0"), &w("00")).unwrap());
    }

    #[test]
    fn axioms_hold_for_shortlex() {
        let u: Vec<Word> = Word::all_up_to(3).collect();
        assert!(verify_order_axioms(&shortlex_order(), &u).is_empty());
        assert!(verify_adjacency(&shortlex_order(), &u).is_empty());
    }

    #[test]
    fn antisymmetry_violation_is_reported() {
        let a = w("0");
        let b = w("1");
        let (a2, b2) = (a.clone(), b.clone());
        let bad = POrder {
            name: "bad".into(),
            leq: Some(Arc::new(move |x: &Word, y: &Word| {
                x == y || ((x == &a2 || x == &b2) && (y == &a2 || y == &b2))
            })),
            precedes: None,
            successor: None,
            length_bound: Poly::identity(),
            is_total: false,
            min_element: None,
        };
        let report = verify_order_axioms(&bad, &[a.clone(), b.clone()]);
        assert_eq!(report, vec![Violation::Antisymmetry(a, b)]);
    }

    #[test]
    fn intervals_on_shortlex() {
        let o = shortlex_order();
        let s = IntervalSpec::fixed(o.clone(), w("0"), w("1"));
        assert_eq!(interval_size_bruteforce(&s, &Word::empty()).unwrap(), 0);
        assert!(!interval_nonempty(&s, &Word::empty()).unwrap());
        assert!(!interval_singleton(&s, &Word::empty()).unwrap());

        let s = IntervalSpec::fixed(o.clone(), Word::empty(), w("10"));
        assert_eq!(interval_size_bruteforce(&s, &Word::empty()).unwrap(), 4);
        let succ = |z: &Word| Some(z.shortlex_next());
        assert_eq!(
            interval_size_by_walk(&s, &Word::empty(), Some(&succ), 100).unwrap(),
            4
        );
        assert!(interval_nonempty(&s, &Word::empty()).unwrap());
        assert!(!interval_singleton(&s, &Word::empty()).unwrap());

        let s = IntervalSpec::fixed(o.clone(), w("0"), w("00"));
        assert!(interval_singleton(&s, &Word::empty()).unwrap());

        let s = IntervalSpec::fixed(o, w("01"), w("01"));
        assert_eq!(
            interval_size_by_walk(&s, &Word::empty(), None, 10).unwrap(),
            0
        );
    }

    #[test]
    fn walk_from_precedes_only() {
        let mut o = shortlex_order();
        o.successor = None;
        let s = IntervalSpec::fixed(o, Word::empty(), w("10"));
        assert_eq!(
            interval_size_by_walk(&s, &Word::empty(), None, 100).unwrap(),
            4
        );
    }

    #[test]
    fn walk_budget_and_totality_errors() {
        let o = shortlex_order();
        let s = IntervalSpec::fixed(o.clone(), Word::empty(), w("1111"));
        assert!(matches!(
            interval_size_by_walk(&s, &Word::empty(), None, 3),
            Err(Error::BudgetExhausted { .. })
        ));
        let mut partial = o;
        partial.is_total = false;
        let s = IntervalSpec::fixed(partial, Word::empty(), w("1"));
        assert_eq!(
            interval_size_by_walk(&s, &Word::empty(), None, 3),
            Err(Error::NotTotal)
        );
    }

    #[test]
    fn reachability_matches_leq_on_shortlex() {
        let o = shortlex_order();
        assert!(reachable_leq(&o, &w("0"), &w("11")).unwrap());
        assert!(!reachable_leq(&o, &w("11"), &w("0")).unwrap());
        let u: Vec<Word> = Word::all_up_to(3).collect();
        let r = reachability_closure(&o, &u).unwrap();
        for x in &u {
            for y in &u {
                assert_eq!(r[&(x.clone(), y.clone())], x <= y);
            }
        }
    }
}
