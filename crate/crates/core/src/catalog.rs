//! Named instances: witness predicates, FP functions, single-output machines and
//! the order triples built from them.
//!
//! Instance ids are either a catalog name (`parity`, `ones`, ...) or the
//! parametric form `f=K` / `f=K,p=C` for constant functions, where `p=C` fixes a
//! constant witness width.

use crate::constructed::{
    build_fp_order, build_offset_order, build_sharp_p_order, build_support_aware_order,
    build_upsv_order, increment_order, normalize_witness, FpFunction, OrderTriple, SupportDecider,
    UpsvMachine, WitnessPredicate,
};
use crate::divisors::{count_divisors, is_prime};
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::word::Word;

pub const WITNESS_NAMES: &[&str] = &[
    "parity",
    "majority",
    "monsat-witness",
    "divisor-witness",
    "constant-2",
];
pub const FP_NAMES: &[&str] = &["constant-2", "ones", "value", "parity"];
pub const UPSV_NAMES: &[&str] = &["constant-2", "ones-plus-one", "value-plus-one"];
pub const CONSTRUCTIONS: &[&str] = &["sharp-p", "fp", "support", "offset", "upsv", "increment"];

fn bits_for(k: u64) -> u64 {
    64 - k.leading_zeros() as u64
}

/// Parses `f=K` or `f=K,p=C`.
fn parse_constant(id: &str) -> Option<(u64, Option<u64>)> {
    let rest = id.strip_prefix("f=")?;
    let mut parts = rest.split(',');
    let k = parts.next()?.trim().parse().ok()?;
    let p = match parts.next() {
        Some(s) => Some(s.trim().strip_prefix("p=")?.parse().ok()?),
        None => None,
    };
    parts.next().is_none().then_some((k, p))
}

fn constant_k(id: &str) -> Option<(u64, Option<u64>)> {
    if let Some(k) = id.strip_prefix("constant-") {
        return Some((k.parse().ok()?, None));
    }
    parse_constant(id)
}

fn unknown(kind: &'static str, name: &str) -> Error {
    Error::Unknown {
        kind,
        name: name.to_string(),
    }
}

/// Nontrivial divisor candidates for x read as a number, in |x| bits.
pub fn divisor_witness() -> WitnessPredicate {
    WitnessPredicate::new("divisor-witness", Poly::identity(), |x, z| {
        let (m, d) = (x.value(), z.value());
        d > 1 && d < m && m % d == 0
    })
}

pub fn witness(id: &str) -> Result<WitnessPredicate> {
    let w = match id {
        "parity" => WitnessPredicate::new("parity", Poly::shift(1), |x, z| {
            (x.count_ones() + z.count_ones()) % 2 == 0
        }),
        "majority" => WitnessPredicate::new("majority", Poly::shift(1), |x, z| {
            2 * (x.count_ones() + z.count_ones()) > x.len() + z.len()
        }),
        // Assignments z (one bit per position of x) satisfying the conjunction of the variables set in x.
        "monsat-witness" => WitnessPredicate::new("monsat-witness", Poly::identity(), |x, z| {
            x.bits().iter().zip(z.bits()).all(|(&a, &b)| a <= b)
        }),
        "divisor-witness" => divisor_witness(),
        _ => {
            let (k, p) = constant_k(id).ok_or_else(|| unknown("witness", id))?;
            let p = match p {
                Some(c) => Poly::constant(c),
                None => Poly::shift(bits_for(k).max(1)),
            };
            WitnessPredicate::new(&format!("constant-{k}"), p, move |_, z| z.value() < k)
        }
    };
    Ok(w)
}

/// Support decider for a catalog witness, decided directly rather than by counting.
pub fn support(id: &str) -> Result<SupportDecider> {
    Ok(match id {
        "parity" | "majority" | "monsat-witness" => SupportDecider::new("always", |_| true),
        "divisor-witness" => SupportDecider::new("composite", |x| {
            let m = x.value();
            m >= 2 && !is_prime(m) && count_divisors(m) > 0
        }),
        _ => {
            let (k, _) = constant_k(id).ok_or_else(|| unknown("witness", id))?;
            SupportDecider::new("constant", move |_| k > 0)
        }
    })
}

pub fn fp_function(id: &str) -> Result<FpFunction> {
    Ok(match id {
        "ones" => FpFunction::new("ones", Poly::shift(1), |x| x.count_ones() as u64),
        "value" => FpFunction::new("value", Poly::shift(1), |x| x.value()),
        "parity" => FpFunction::new("parity", Poly::shift(1), |x| (x.count_ones() % 2) as u64),
        _ => {
            let (k, p) = constant_k(id).ok_or_else(|| unknown("fp function", id))?;
            let p = match p {
                Some(c) => Poly::constant(c),
                None => Poly::shift(bits_for(k + 1)),
            };
            FpFunction::new(&format!("constant-{k}"), p, move |_| k)
        }
    })
}

pub fn upsv_machine(id: &str) -> Result<UpsvMachine> {
    Ok(match id {
        // The outputting path is x followed by 0.
        "ones-plus-one" => UpsvMachine::new("ones-plus-one", Poly::shift(1), |x, z| {
            (z.prefix(x.len()) == *x && z.bit(x.len()) == 0).then(|| x.count_ones() as u64 + 1)
        }),
        // The outputting path is 1 followed by x.
        "value-plus-one" => UpsvMachine::new("value-plus-one", Poly::shift(1), |x, z| {
            (z.bit(0) == 1 && z.suffix_from(1) == *x).then(|| x.value() + 1)
        }),
        // Two outputting paths; violates the single-output contract.
        "two-paths" => UpsvMachine::new("two-paths", Poly::shift(1), |_, z| {
            z.is_all(z.bit(0)).then_some(1)
        }),
        _ => {
            let (k, p) = constant_k(id).ok_or_else(|| unknown("machine", id))?;
            let p = match p {
                Some(c) => Poly::constant(c),
                None => Poly::shift(bits_for(k.saturating_sub(1)).max(1)),
            };
            UpsvMachine::new(&format!("constant-{k}"), p, move |_, z| {
                z.is_all(0).then_some(k)
            })
        }
    })
}

/// Builds `construction` over catalog instance `id`.
pub fn triple(construction: &str, id: &str) -> Result<OrderTriple> {
    match construction {
        "sharp-p" => build_sharp_p_order(&normalize_witness(&witness(id)?)),
        "fp" => build_fp_order(&fp_function(id)?),
        "support" => build_support_aware_order(&witness(id)?, &support(id)?),
        "offset" => build_offset_order(&witness(id)?),
        "upsv" => build_upsv_order(&upsv_machine(id)?),
        "increment" => increment_order(&build_fp_order(&fp_function(id)?)?),
        _ => Err(unknown("construction", construction)),
    }
}

/// The function a catalog triple is expected to realise, computed independently of any order.
pub fn expected_value(construction: &str, id: &str, x: &Word) -> Result<u64> {
    Ok(match construction {
        "sharp-p" | "support" => witness(id)?.count(x),
        "offset" => {
            let w = witness(id)?;
            w.count(x) + (1u64 << w.width(x))
        }
        "fp" => (fp_function(id)?.eval)(x),
        "upsv" => upsv_machine(id)?.unique_output(x)?.1,
        "increment" => (fp_function(id)?.eval)(x) + 1,
        _ => return Err(unknown("construction", construction)),
    })
}

/// Default instance ids per construction.
pub fn instances(construction: &str) -> &'static [&'static str] {
    match construction {
        "sharp-p" | "support" | "offset" => WITNESS_NAMES,
        "fp" | "increment" => FP_NAMES,
        "upsv" => UPSV_NAMES,
        _ => &[],
    }
}
