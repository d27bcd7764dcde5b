//! Polynomials with nonnegative coefficients, used as length and space bounds.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `max(floor, c0 + c1 n + c2 n^2 + ...)`.
///
/// The floor lets a bound like `max(2, n)` be expressed; plain polynomials use floor 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Poly {
    coeffs: Vec<u64>,
    floor: u64,
}

impl Poly {
    pub fn new(coeffs: Vec<u64>) -> Self {
        let mut p = Poly { coeffs, floor: 0 };
        p.trim();
        p
    }

    pub fn constant(c: u64) -> Self {
        Poly::new(vec![c])
    }

    /// n + c
    pub fn shift(c: u64) -> Self {
        Poly::new(vec![c, 1])
    }

    pub fn identity() -> Self {
        Poly::shift(0)
    }

    pub fn with_floor(mut self, floor: u64) -> Self {
        self.floor = floor;
        self
    }

    fn trim(&mut self) {
        while self.coeffs.len() > 1 && *self.coeffs.last().unwrap() == 0 {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.coeffs.push(0);
        }
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn floor(&self) -> u64 {
        self.floor
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, n: usize) -> usize {
        let n = n as u64;
        let v = self
            .coeffs
            .iter()
            .rev()
            .fold(0u64, |acc, &c| acc.saturating_mul(n).saturating_add(c));
        v.max(self.floor) as usize
    }

    /// True when p(n+1) > p(n) for all n.
    pub fn is_strictly_increasing(&self) -> bool {
        self.floor <= self.coeffs[0] && self.coeffs[1..].iter().any(|&c| c > 0)
    }

    /// True when p(n+1) >= p(n) for all n (always, for nonnegative coefficients).
    pub fn is_monotone(&self) -> bool {
        true
    }

    /// Composition self(other(n)).
    pub fn compose(&self, other: &Poly) -> Poly {
        let mut result = vec![0u64];
        for &c in self.coeffs.iter().rev() {
            result = mul(&result, &other.coeffs);
            result[0] = result[0].saturating_add(c);
        }
        let mut p = Poly::new(result);
        // self is monotone, so the inner floor passes through as self(floor).
        p.floor = self.eval(other.floor as usize) as u64;
        p
    }

    /// An upper bound on self(n) + other(n); exact when neither has a floor.
    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| {
                self.coeffs.get(i).copied().unwrap_or(0) + other.coeffs.get(i).copied().unwrap_or(0)
            })
            .collect();
        let mut p = Poly::new(coeffs);
        // max(a, P) + max(b, Q) <= a + b + P + Q, so fold floors into the constant.
        p.coeffs[0] = p.coeffs[0]
            .saturating_add(self.floor)
            .saturating_add(other.floor);
        p
    }

    /// Parses a comma-separated coefficient list, lowest degree first: "2,1" is n + 2.
    pub fn parse_coeffs(s: &str) -> Result<Poly> {
        let coeffs = s
            .split(',')
            .enumerate()
            .map(|(i, c)| {
                c.trim().parse::<u64>().map_err(|_| Error::Parse {
                    pos: i,
                    msg: format!("bad coefficient {c:?}"),
                })
            })
            .collect::<Result<Vec<u64>>>()?;
        Ok(Poly::new(coeffs))
    }
}

fn mul(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = out[i + j].saturating_add(x.saturating_mul(y));
        }
    }
    out
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let t = match (i, c) {
                (0, c) => c.to_string(),
                (1, 1) => "n".to_string(),
                (1, c) => format!("{c}n"),
                (i, 1) => format!("n^{i}"),
                (i, c) => format!("{c}n^{i}"),
            };
            terms.push(t);
        }
        let body = if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join(" + ")
        };
        if self.floor > 0 {
            write!(f, "max({}, {body})", self.floor)
        } else {
            f.write_str(&body)
        }
    }
}
