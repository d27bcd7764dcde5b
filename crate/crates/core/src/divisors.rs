//! Nontrivial divisor counting and the divisibility order.

use std::sync::Arc;

use crate::catalog::divisor_witness;
use crate::constructed::{
    build_support_aware_order, eval_triple, normalize_witness, Mode, SupportDecider,
};
use crate::error::Result;
use crate::order::{interval_size_in_universe, IntervalSpec, POrder};
use crate::poly::Poly;
use crate::word::Word;

/// Number of n with n | m, n != 1, n != m; zero for m = 0.
pub fn count_divisors(m: u64) -> u64 {
    if m == 0 {
        return 0;
    }
    let mut count = 0;
    let mut d = 1;
    while d * d <= m {
        if m.is_multiple_of(d) {
            count += if d * d == m { 1 } else { 2 };
        }
        d += 1;
    }
    // drop 1 and m itself (the same divisor when m = 1)
    count - if m == 1 { 1 } else { 2 }
}

/// Trial division.
pub fn is_prime(m: u64) -> bool {
    if m < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= m {
        if m.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// The value of a canonical encoding of a positive natural, if `w` is one.
pub fn decode_natural(w: &Word) -> Option<u64> {
    (!w.is_empty() && w.bit(0) == 1 && w.len() <= 63).then(|| w.value())
}

pub fn encode_natural(m: u64) -> Word {
    Word::binary(m)
}

/// n <= m iff n divides m, on canonical encodings of positive naturals. Other words
/// are comparable only with themselves.
pub fn divisibility_order() -> POrder {
    POrder {
        name: "divisibility".into(),
        leq: Some(Arc::new(|u: &Word, v: &Word| {
            u == v
                || match (decode_natural(u), decode_natural(v)) {
                    (Some(n), Some(m)) => m % n == 0,
                    _ => false,
                }
        })),
        precedes: Some(Arc::new(|u: &Word, v: &Word| {
            match (decode_natural(u), decode_natural(v)) {
                (Some(n), Some(m)) => m % n == 0 && is_prime(m / n),
                _ => false,
            }
        })),
        successor: None,
        length_bound: Poly::identity(),
        is_total: false,
        min_element: Some(encode_natural(1)),
    }
}

/// The interval (1, m) in the divisibility order.
pub fn divisibility_interval(m: u64) -> IntervalSpec {
    IntervalSpec::fixed(
        divisibility_order(),
        encode_natural(1),
        encode_natural(m.max(1)),
    )
}

/// Size of (1, m) counted over the encodings of 1..=m, which contain every word
/// comparable with both ends.
pub fn divcount_via_divisibility(m: u64) -> Result<u64> {
    if m == 0 {
        return Ok(0);
    }
    let spec = divisibility_interval(m);
    interval_size_in_universe(&spec, &Word::empty(), (1..=m).map(encode_natural))
}

/// #DIV through the support-aware construction: witnesses are divisors, the
/// support is the set of composites.
pub fn divcount_via_support_order(m: u64) -> Result<u64> {
    let w = normalize_witness(&divisor_witness());
    let s = SupportDecider::new("composite", |x: &Word| {
        let m = x.value();
        m >= 4 && !is_prime(m)
    });
    let triple = build_support_aware_order(&w, &s)?;
    eval_triple(&triple, &encode_natural(m), Mode::Block)
}
