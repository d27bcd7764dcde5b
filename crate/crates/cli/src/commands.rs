use std::fmt;

use intervals::catalog::{expected_value, triple, CONSTRUCTIONS};
use intervals::cluster::{
    cl_count, cluster_machine, cluster_partition, ift_to_cluster, is_cluster,
    nonemptiness_detector, uniqueness_detector, ClusterWitness,
};
use intervals::constructed::{eval_triple_with_budget, Mode};
use intervals::divisors::{
    count_divisors, divcount_via_divisibility, divcount_via_support_order, is_prime,
};
use intervals::monsat::{
    build_monsat_order, count_monsat_bruteforce, count_monsat_interval, count_satisfying,
    next_assignment_counted, parse_formula,
};
use intervals::order::interval_size_in_universe;
use intervals::space::{build_space_order, fpspace_interval_size, singleton_flag};
use intervals::tm::{toy_ones_count, RestrictedTM};
use intervals::{Error, Word};

use crate::report::RunReport;

#[derive(Debug)]
pub enum CliError {
    /// Bad input: unknown ids, unparsable words, formulas or machines.
    Usage(String),
    /// The computation itself failed.
    Failed(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(s) | CliError::Failed(s) => f.write_str(s),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Unknown { .. } | Error::Parse { .. } | Error::InvalidMachine(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Failed(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn parse_word(s: &str) -> CliResult<Word> {
    if s.is_empty() {
        return Ok(Word::empty());
    }
    s.parse()
        .map_err(|e: Error| CliError::Usage(format!("bad word `{s}`: {e}")))
}

/// `construction/id`, accepting `fp-order/...` style names too.
pub fn split_instance(s: &str) -> CliResult<(&'static str, &str)> {
    let (c, id) = s.split_once('/').ok_or_else(|| {
        CliError::Usage(format!(
            "instance `{s}` should look like construction/id, e.g. fp/ones"
        ))
    })?;
    let c = c.strip_suffix("-order").unwrap_or(c);
    let c = if c == "support-aware" { "support" } else { c };
    let c = CONSTRUCTIONS.iter().find(|&&k| k == c).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown construction `{c}`; known: {}",
            CONSTRUCTIONS.join(", ")
        ))
    })?;
    Ok((c, id))
}

pub fn interval(
    instance: &str,
    x: &str,
    mode: Mode,
    budget: u64,
    cap: usize,
) -> CliResult<RunReport> {
    let (c, id) = split_instance(instance)?;
    let x = parse_word(x)?;
    let t = triple(c, id)?;
    let size = match mode {
        Mode::Bruteforce => {
            t.check(&x)?;
            let bound = t.order().bound(t.t(&x).len());
            if bound > cap {
                return Err(Error::EnumerationTooLarge { len: bound, cap }.into());
            }
            interval_size_in_universe(&t.spec, &x, Word::all_up_to(bound))?
        }
        _ => eval_triple_with_budget(&t, &x, mode, budget)?,
    };
    let want = expected_value(c, id, &x)?;
    let mut r = RunReport::new("interval", format!("{c}/{id}"));
    r.value("x", x.to_string())
        .value("mode", mode.to_string())
        .value("b", t.b(&x).to_string());
    r.value("t", t.t(&x).to_string())
        .value("size", size)
        .oracle("size", want)
        .check("size", size == want);
    Ok(r)
}

pub fn monsat(text: &str, mode: Mode) -> CliResult<RunReport> {
    let f = parse_formula(text)?;
    let n = f.arity();
    let count = match mode {
        Mode::Walk => count_monsat_interval(&build_monsat_order(), &f)?,
        Mode::Bruteforce => count_monsat_bruteforce(text),
        Mode::Block => {
            return Err(CliError::Usage(
                "monsat supports --mode walk or bruteforce".into(),
            ))
        }
    };
    let brute = count_monsat_bruteforce(text);
    // Query statistics: list the satisfying assignments one next_assignment call at a time.
    let (mut calls, mut total, mut worst) = (0u64, 0u64, 0u64);
    let mut at = Some(Word::zeros(n));
    while let Some(a) = at {
        let (next, q) = next_assignment_counted(&f, &a, true);
        calls += 1;
        total += q;
        worst = worst.max(q);
        at = next.and_then(|b| b.lex_next());
    }
    let mut r = RunReport::new("monsat", f.canonical());
    r.value("variables", n as u64)
        .value("mode", mode.to_string())
        .value("count", count);
    r.value("next_assignment calls", calls)
        .value("queries total", total)
        .value("queries max", worst);
    r.value("query bound", 2 * n as u64 + 2);
    r.oracle("count", brute)
        .oracle("truth table", count_satisfying(&f));
    r.check("count", count == brute)
        .check("query bound", worst <= 2 * n as u64 + 2);
    Ok(r)
}

pub fn div(m: u64) -> CliResult<RunReport> {
    if m == 0 {
        return Err(CliError::Usage("m must be positive".into()));
    }
    let via_order = divcount_via_divisibility(m)?;
    let via_support = divcount_via_support_order(m)?;
    let trial = count_divisors(m);
    let mut r = RunReport::new("div", m.to_string());
    r.value("routes", format!("{via_order}/{via_support}/{trial}"));
    r.value("divisibility interval", via_order)
        .value("support order", via_support)
        .value("prime", is_prime(m));
    r.oracle("trial division", trial);
    r.check("divisibility interval", via_order == trial)
        .check("support order", via_support == trial);
    r.check("primality", is_prime(m) == (trial == 0 && m >= 2));
    Ok(r)
}

pub fn load_machine(spec: &str) -> CliResult<(String, RestrictedTM)> {
    if spec == "toy" {
        return Ok(("toy ones-counter".into(), toy_ones_count()));
    }
    let text = std::fs::read_to_string(spec)
        .map_err(|e| CliError::Usage(format!("cannot read {spec}: {e}")))?;
    Ok((spec.to_string(), RestrictedTM::from_spec(&text)?))
}

pub fn tm_walk(machine: &str, x: &str, budget: u64) -> CliResult<RunReport> {
    let (name, tm) = load_machine(machine)?;
    let x = parse_word(x)?;
    let bundle = build_space_order(tm);
    let sh = bundle.traversal.shape(x.len());
    let walked = fpspace_interval_size(&bundle, &x, budget)?;
    let (f, machine_steps) = bundle.traversal.tm.run_tm(&x)?;
    let predicted = bundle.traversal.predicted_size(&x)?;
    let single = singleton_flag(&bundle, &x, budget)?;
    let mut r = RunReport::new("tm-walk", name);
    r.value("x", x.to_string())
        .value("s", sh.s as u64)
        .value("t", sh.t as u64)
        .value("r", sh.lay.params.r as u64);
    r.value("f(x)", f)
        .value("machine steps", machine_steps)
        .value("walk steps", walked + 1);
    r.value("walked", walked).value("singleton", single);
    r.oracle("predicted", predicted);
    r.check("walked", walked == predicted)
        .check("singleton", single == (f == 1));
    Ok(r)
}

pub enum OrderChoice {
    Shortlex,
    Ift,
}

pub fn cluster(machine: &str, x: &str, order: OrderChoice) -> CliResult<RunReport> {
    let x = parse_word(x)?;
    let (w, interval): (ClusterWitness, Option<u64>) = match order {
        OrderChoice::Shortlex => (cluster_machine(machine)?.0, None),
        OrderChoice::Ift => {
            let (c, id) = split_instance(machine)?;
            let t = triple(c, id)?;
            let w = ift_to_cluster(&t)?;
            (w, Some(expected_value(c, id, &x)?))
        }
    };
    let acc = w.machine.count(&x)?;
    let clustered = is_cluster(&w, &x)?;
    let classes: Vec<String> = cluster_partition(&w, &x)?
        .into_iter()
        .filter(|(accepting, _)| *accepting)
        .map(|(_, members)| match members.as_slice() {
            [one] => one.to_string(),
            [first, .., last] => format!("{first}..{last} ({})", members.len()),
            [] => String::new(),
        })
        .collect();
    let ne = nonemptiness_detector(&w).count(&x)?;
    let un = uniqueness_detector(&w).count(&x)?;
    let mut r = RunReport::new("cluster", w.machine.name.clone());
    r.value("x", x.to_string())
        .value("path length", w.machine.len(&x) as u64)
        .value("accepting paths", acc);
    r.value("accepting runs", classes)
        .value("cluster", clustered);
    if clustered {
        let cl = cl_count(&w, &x)?;
        r.value("cl count", cl).check("cl count", cl == acc);
        if let Some(want) = interval {
            r.oracle("interval size", want)
                .check("interval size", cl == want);
        }
    } else {
        r.note("accepting paths do not form a cluster; detector outcomes carry no guarantee");
    }
    r.value("nonemptiness detector", ne)
        .value("uniqueness detector", un);
    if clustered {
        r.check("nonemptiness detector", ne == u64::from(acc > 0))
            .check("uniqueness detector", un == u64::from(acc == 1));
    }
    Ok(r)
}
