//! Invariant suites behind `intervals check`.

use intervals::catalog::{expected_value, instances, triple, CONSTRUCTIONS, FP_NAMES};
use intervals::cluster::{
    cl_count, cluster_machine, ift_to_cluster, is_cluster, nonemptiness_detector,
    uniqueness_detector, CLUSTER_MACHINES,
};
use intervals::constructed::{eval_triple_with_budget, Mode, OrderTriple};
use intervals::divisors::{
    count_divisors, divcount_via_divisibility, divcount_via_support_order, divisibility_order,
    encode_natural, is_prime,
};
use intervals::monsat::{
    all_formulas, all_monotone_functions, build_monsat_order, count_monsat_interval,
    count_satisfying, next_assignment_counted, next_assignment_oracle, random_formula, Formula,
};
use intervals::order::{
    adjacency_from_leq, reachable_leq, verify_adjacency, verify_order_axioms, Violation,
};
use intervals::space::{build_space_order, fpspace_interval_size, singleton_flag};
use intervals::tm::toy_ones_count;
use intervals::{POrder, Word};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

#[derive(Clone, Copy, Debug)]
pub struct Caps {
    /// Longest input word x.
    pub max_len: usize,
    /// Universes larger than this are skipped.
    pub cap_universe: usize,
    pub budget: u64,
    /// Divisor checks run over 1..=max_m.
    pub max_m: u64,
    /// Random formulas in the formula suite.
    pub random_formulas: usize,
}

/// A deliberately broken order for exercising the checker.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Inject {
    Reflexivity,
    Antisymmetry,
    Transitivity,
    Totality,
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub checks: u64,
    pub skipped: u64,
    pub failures: Vec<String>,
}

impl Outcome {
    fn expect(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok && self.failures.len() < 20 {
            self.failures.push(msg());
        }
    }

    fn violations(&mut self, what: &str, v: Vec<Violation>) {
        self.checks += 1;
        for x in v.into_iter().take(3) {
            if self.failures.len() < 20 {
                self.failures.push(format!("{what}: {x}"));
            }
        }
    }
}

pub const SUITES: &[&str] = &[
    "orders",
    "adjacency",
    "intervals",
    "space",
    "formulas",
    "divisors",
    "clusters",
    "reachability",
];

pub fn run(suite: &str, caps: &Caps, inject: Option<Inject>) -> Outcome {
    let mut out = Outcome::default();
    match suite {
        "orders" => orders(caps, inject, &mut out),
        "adjacency" => adjacency(caps, &mut out),
        "intervals" => intervals(caps, &mut out),
        "space" => space(caps, &mut out),
        "formulas" => formulas(caps, &mut out),
        "divisors" => divisors(caps, &mut out),
        "clusters" => clusters(caps, &mut out),
        "reachability" => reachability(caps, &mut out),
        _ => unreachable!("suite names are validated by the parser"),
    }
    out
}

fn catalog() -> Vec<(String, OrderTriple)> {
    CONSTRUCTIONS
        .iter()
        .flat_map(|&c| instances(c).iter().map(move |&id| (c, id)))
        .map(|(c, id)| {
            (
                format!("{c}/{id}"),
                triple(c, id).expect("catalog instances build"),
            )
        })
        .collect()
}

fn inputs(caps: &Caps) -> impl Iterator<Item = Word> {
    Word::all_up_to(caps.max_len)
}

fn broken(order: &POrder, kind: Inject, u: &[Word]) -> POrder {
    let leq = order.leq.clone().expect("catalog orders have leq");
    let (lo, hi) = (u[0].clone(), u[u.len() - 1].clone());
    let f: Arc<dyn Fn(&Word, &Word) -> bool + Send + Sync> = match kind {
        Inject::Reflexivity => Arc::new(move |a, b| a != b && leq(a, b)),
        Inject::Antisymmetry => Arc::new(|_, _| true),
        Inject::Totality => Arc::new(|a, b| a == b),
        // Swap the ends of the chain: the top now sits below the bottom, but not above anything else.
        Inject::Transitivity => Arc::new(move |a, b| {
            if (a, b) == (&hi, &lo) {
                true
            } else if (a, b) == (&lo, &hi) {
                false
            } else {
                leq(a, b)
            }
        }),
    };
    POrder {
        name: format!("{} with broken {kind:?}", order.name).to_lowercase(),
        leq: Some(f),
        ..order.clone()
    }
}

fn orders(caps: &Caps, inject: Option<Inject>, out: &mut Outcome) {
    for (name, t) in catalog() {
        for x in inputs(caps) {
            let u = t.universe(&x).expect("catalog triples have universes");
            if u.len() > caps.cap_universe {
                out.skipped += 1;
                continue;
            }
            out.violations(
                &format!("{name} at {x}"),
                verify_order_axioms(t.order(), &u),
            );
        }
    }
    if let Some(kind) = inject {
        let t = triple("fp", "ones").expect("catalog");
        let x = Word::empty();
        let mut u = t.universe(&x).expect("universe");
        u.sort_by(|a, b| match (a == b, t.order().leq(a, b).unwrap()) {
            (true, _) => std::cmp::Ordering::Equal,
            (false, true) => std::cmp::Ordering::Less,
            (false, false) => std::cmp::Ordering::Greater,
        });
        let bad = broken(t.order(), kind, &u);
        out.violations(&bad.name.clone(), verify_order_axioms(&bad, &u));
    }
    let m = build_monsat_order();
    for f in all_formulas(3, 1).iter().chain(&all_monotone_functions(3)) {
        let x = f.encode();
        out.violations(
            &format!("formula order at {f}"),
            verify_order_axioms(m.order(), &m.universe(&x).unwrap()),
        );
    }
    let d: Vec<Word> = (1..=64).map(encode_natural).collect();
    out.violations(
        "divisibility order",
        verify_order_axioms(&divisibility_order(), &d),
    );
}

fn adjacency(caps: &Caps, out: &mut Outcome) {
    for (name, t) in catalog() {
        if t.order().precedes.is_none() {
            continue;
        }
        for x in inputs(caps) {
            let u = t.universe(&x).unwrap();
            if u.len() > caps.cap_universe {
                out.skipped += 1;
                continue;
            }
            out.violations(&format!("{name} at {x}"), verify_adjacency(t.order(), &u));
            if x.is_empty() && u.len() <= 20 {
                for a in &u {
                    for b in &u {
                        let want = adjacency_from_leq(t.order(), a, b);
                        let got = t.order().precedes(a, b);
                        out.expect(want.is_ok() && want == got, || {
                            format!("{name}: precedes({a}, {b}) = {got:?}, leq says {want:?}")
                        });
                    }
                }
            }
        }
    }
}

fn intervals(caps: &Caps, out: &mut Outcome) {
    for &c in CONSTRUCTIONS {
        for &id in instances(c) {
            let t = triple(c, id).unwrap();
            for x in inputs(caps) {
                let want = expected_value(c, id, &x).unwrap();
                let mut modes = vec![Mode::Block, Mode::Bruteforce];
                if t.order().is_total {
                    modes.push(Mode::Walk);
                }
                for mode in modes {
                    match eval_triple_with_budget(&t, &x, mode, caps.budget) {
                        Ok(got) => out.expect(got == want, || {
                            format!("{c}/{id} {mode} at {x}: {got}, expected {want}")
                        }),
                        Err(intervals::Error::EnumerationTooLarge { .. }) => out.skipped += 1,
                        Err(e) => out.expect(false, || format!("{c}/{id} {mode} at {x}: {e}")),
                    }
                }
            }
        }
    }
}

fn space(caps: &Caps, out: &mut Outcome) {
    let bundle = build_space_order(toy_ones_count());
    for x in Word::all_up_to(caps.max_len.min(2)) {
        let f = bundle.traversal.tm.run_tm(&x).map(|(f, _)| f);
        let s = bundle.traversal.shape(x.len()).s;
        match (fpspace_interval_size(&bundle, &x, caps.budget), f) {
            (Ok(size), Ok(f)) => {
                let want = (1u64 << (2 * s + 1)) + f - 2;
                out.expect(size == want, || {
                    format!("toy machine at {x}: walked {size}, expected {want}")
                });
                let single = singleton_flag(&bundle, &x, caps.budget);
                out.expect(single == Ok(f == 1), || {
                    format!("toy machine at {x}: singleton flag {single:?} with f = {f}")
                });
            }
            (a, b) => out.expect(false, || format!("toy machine at {x}: {a:?} {b:?}")),
        }
    }
}

fn formula_corpus(caps: &Caps) -> Vec<Formula> {
    let mut fs = all_formulas(4, 2);
    fs.extend((1..=4).flat_map(all_monotone_functions));
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..caps.random_formulas {
        let vars = 1 + i % 12;
        let leaves = vars + rng.gen_range(0..=vars);
        fs.push(random_formula(&mut rng, vars, leaves));
    }
    fs
}

fn formulas(caps: &Caps, out: &mut Outcome) {
    let order = build_monsat_order();
    for f in formula_corpus(caps) {
        let n = f.arity();
        for r in [false, true] {
            for a in Word::all_of_len(n) {
                let (got, q) = next_assignment_counted(&f, &a, r);
                let want = next_assignment_oracle(&f, &a, r);
                out.expect(got == want && q <= 2 * n as u64 + 2, || {
                    format!("{f} from {a}, r={r}: {got:?} after {q} queries, expected {want:?}")
                });
            }
        }
        let got = count_monsat_interval(&order, &f);
        let want = count_satisfying(&f);
        out.expect(got == Ok(want), || {
            format!("{f}: interval count {got:?}, truth table {want}")
        });
    }
}

fn divisors(caps: &Caps, out: &mut Outcome) {
    for m in 1..=caps.max_m {
        let want = count_divisors(m);
        let got = divcount_via_divisibility(m);
        out.expect(got == Ok(want), || {
            format!("m={m}: divisibility interval {got:?}, trial division {want}")
        });
        out.expect(is_prime(m) == (want == 0 && m >= 2), || {
            format!("m={m}: primality disagrees with the divisor count")
        });
        if m <= 512 {
            let s = divcount_via_support_order(m);
            out.expect(s == Ok(want), || {
                format!("m={m}: support order {s:?}, trial division {want}")
            });
        }
    }
}

fn clusters(caps: &Caps, out: &mut Outcome) {
    for (name, t) in catalog() {
        if !t.order().is_total {
            continue;
        }
        let w = match ift_to_cluster(&t) {
            Ok(w) => w,
            Err(e) => {
                out.expect(false, || format!("{name}: {e}"));
                continue;
            }
        };
        for x in inputs(caps) {
            let want = eval_triple_with_budget(&t, &x, Mode::Walk, caps.budget);
            let got = cl_count(&w, &x);
            out.expect(got.is_ok() && got == want, || {
                format!("{name} at {x}: cluster count {got:?}, interval {want:?}")
            });
        }
    }
    for &id in CLUSTER_MACHINES {
        let (w, _) = cluster_machine(id).unwrap();
        let (ne, un) = (nonemptiness_detector(&w), uniqueness_detector(&w));
        for x in Word::all_up_to(caps.max_len + 3) {
            if !is_cluster(&w, &x).unwrap_or(false) {
                continue;
            }
            let acc = w.machine.count(&x).unwrap();
            out.expect(ne.count(&x) == Ok(u64::from(acc > 0)), || {
                format!("{id} at {x}: nonemptiness detector wrong")
            });
            out.expect(un.count(&x) == Ok(u64::from(acc == 1)), || {
                format!("{id} at {x}: uniqueness detector wrong")
            });
        }
    }
}

fn reachability(caps: &Caps, out: &mut Outcome) {
    for &id in FP_NAMES {
        let t = triple("fp", id).unwrap();
        for x in Word::all_up_to(caps.max_len.min(1)) {
            let u = t.universe(&x).unwrap();
            for a in &u {
                for b in &u {
                    let r = reachable_leq(t.order(), a, b);
                    let l = t.order().leq(a, b);
                    out.expect(r.is_ok() && r == l, || {
                        format!("fp/{id}: reachable_leq({a}, {b}) = {r:?}, leq {l:?}")
                    });
                }
            }
        }
    }
    let d = divisibility_order();
    let u: Vec<Word> = (1..=24).map(encode_natural).collect();
    for a in &u {
        for b in &u {
            let (r, l) = (reachable_leq(&d, a, b), d.leq(a, b));
            out.expect(r.is_ok() && r == l, || {
                format!("divisibility: reachable_leq({a}, {b}) = {r:?}, leq {l:?}")
            });
        }
    }
}
