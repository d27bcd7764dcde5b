//! Restricted single-tape machines, their binary codecs and the step function
//! over enhanced instantaneous descriptions (eIDs).
//!
//! An eID for input x is `x q c w X_0 .. X_{2^r - 1}`: state (m bits), clock
//! (s bits), head position (r bits) and 2^r tape cells of m bits each.

use std::collections::HashMap;

use crate::block::find_prefix_len;
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::word::Word;

/// Head moves are -1 (left) or +1 (right).
pub type Move = i8;

#[derive(Clone, Debug)]
pub struct RestrictedTM {
    pub m: usize,
    /// State names indexed by their code.
    pub states: Vec<String>,
    /// Symbol names indexed by their code.
    pub symbols: Vec<String>,
    /// Indexed by `q * 2^m + r`.
    delta: Vec<Option<(u32, u32, Move)>>,
    pub space: Poly,
}

pub fn bits_value(bits: &[u8]) -> u64 {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as u64)
}

fn write_value(bits: &mut [u8], mut v: u64) {
    for b in bits.iter_mut().rev() {
        *b = (v & 1) as u8;
        v >>= 1;
    }
}

fn code_bits(code: u32, m: usize) -> Vec<u8> {
    let mut v = vec![0; m];
    write_value(&mut v, code as u64);
    v
}

/// Reads a word over Γ as a number: binary if it lies in Σ*B*, otherwise 0.
pub fn nu(z: &[&str]) -> u64 {
    let mut val = 0u64;
    let mut seen_blank = false;
    for s in z {
        match *s {
            "0" | "1" if !seen_blank => val = 2 * val + u64::from(*s == "1"),
            "B" => seen_blank = true,
            _ => return 0,
        }
    }
    val
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EncodingParams {
    pub m: usize,
    pub r: usize,
    pub t: usize,
    pub s: usize,
}

impl EncodingParams {
    pub fn new(m: usize, p: &Poly, n: usize) -> Self {
        let pn = p.eval(n).max(1);
        let r = (usize::BITS - (pn - 1).leading_zeros()) as usize;
        let r = if pn == 1 { 0 } else { r };
        let t = m << r;
        EncodingParams {
            m,
            r,
            t,
            s: m + r + t,
        }
    }

    pub fn cells(&self) -> usize {
        1 << self.r
    }
}

/// Section offsets of an eID for an input of length n.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub n: usize,
    pub params: EncodingParams,
}

impl Layout {
    pub fn q(&self) -> std::ops::Range<usize> {
        self.n..self.n + self.params.m
    }
    pub fn c(&self) -> std::ops::Range<usize> {
        let a = self.n + self.params.m;
        a..a + self.params.s
    }
    pub fn w(&self) -> std::ops::Range<usize> {
        let a = self.n + self.params.m + self.params.s;
        a..a + self.params.r
    }
    pub fn tape(&self) -> std::ops::Range<usize> {
        let a = self.n + self.params.m + self.params.s + self.params.r;
        a..a + self.params.t
    }
    pub fn cell(&self, i: usize) -> std::ops::Range<usize> {
        let a = self.tape().start + i * self.params.m;
        a..a + self.params.m
    }
    /// |x| + 2s(|x|).
    pub fn len(&self) -> usize {
        self.n + 2 * self.params.s
    }
}

impl RestrictedTM {
    pub fn params(&self, n: usize) -> EncodingParams {
        EncodingParams::new(self.m, &self.space, n)
    }

    pub fn layout(&self, n: usize) -> Layout {
        Layout {
            n,
            params: self.params(n),
        }
    }

    /// The layout of an eID of total length `len`, if that length is one.
    pub fn layout_for_len(&self, len: usize) -> Option<Layout> {
        let n = find_prefix_len(len, |n| 2 * self.params(n).s)?;
        Some(self.layout(n))
    }

    pub fn final_code(&self) -> u32 {
        (1u32 << self.m) - 1
    }

    pub fn state_code(&self, name: &str) -> Option<u32> {
        self.states.iter().position(|s| s == name).map(|i| i as u32)
    }

    pub fn symbol_code(&self, name: &str) -> Option<u32> {
        self.symbols
            .iter()
            .position(|s| s == name)
            .map(|i| i as u32)
    }

    /// θ(0) = 1^{m-1}0 and θ(1) = 1^m.
    pub fn input_code(&self, bit: u8) -> u32 {
        self.final_code() - u32::from(bit == 0)
    }

    pub fn delta_code(&self, q: u32, r: u32) -> Option<(u32, u32, Move)> {
        self.delta[((q as usize) << self.m) | r as usize]
    }

    /// δ on m-bit codes; undefined exactly at the final state.
    pub fn delta_prime(&self, q: &Word, r: &Word) -> Option<(Word, Word, Move)> {
        assert_eq!((q.len(), r.len()), (self.m, self.m));
        let (q2, r2, d) = self.delta_code(q.value() as u32, r.value() as u32)?;
        Some((
            Word::from_bits(code_bits(q2, self.m)),
            Word::from_bits(code_bits(r2, self.m)),
            d,
        ))
    }

    /// Blockwise θ.
    pub fn theta_hat(&self, symbols: &[&str]) -> Result<Word> {
        let mut out = Vec::with_capacity(symbols.len() * self.m);
        for s in symbols {
            let c = self
                .symbol_code(s)
                .ok_or_else(|| Error::Invalid(format!("unknown symbol {s}")))?;
            out.extend(code_bits(c, self.m));
        }
        Ok(Word::from_bits(out))
    }

    /// Inverse of [`Self::theta_hat`]; `bits` must be a multiple of m long.
    pub fn theta_hat_inv<'a>(&'a self, bits: &[u8]) -> Vec<&'a str> {
        bits.chunks(self.m)
            .map(|c| self.symbols[bits_value(c) as usize].as_str())
            .collect()
    }

    /// ν(θ̂⁻¹(bits)) without materialising the symbols.
    pub fn tape_value(&self, bits: &[u8]) -> u64 {
        let (zero, one) = (self.input_code(0) as u64, self.input_code(1) as u64);
        let mut val = 0u64;
        let mut seen_blank = false;
        for c in bits.chunks(self.m) {
            let v = bits_value(c);
            if v == 0 {
                seen_blank = true;
            } else if seen_blank || (v != zero && v != one) {
                return 0;
            } else {
                val = 2 * val + u64::from(v == one);
            }
        }
        val
    }

    /// `x 0^m 0^s 0^r θ̂(x) 0^{t - m|x|}`.
    pub fn initial_eid(&self, x: &Word) -> Result<Word> {
        let lay = self.layout(x.len());
        if self.m * x.len() > lay.params.t {
            return Err(Error::WidthOverflow {
                z: x.clone(),
                width: lay.params.t / self.m,
            });
        }
        let mut bits = vec![0u8; lay.len()];
        bits[..x.len()].copy_from_slice(x.bits());
        for (i, &b) in x.bits().iter().enumerate() {
            write_value(&mut bits[lay.cell(i)], self.input_code(b) as u64);
        }
        Ok(Word::from_bits(bits))
    }

    /// Whether the eID bits `v` (of layout `lay`) are the initial configuration.
    pub fn is_initial(&self, lay: &Layout, v: &[u8]) -> bool {
        let x = &v[..lay.n];
        if v[lay.n..lay.tape().start].iter().any(|&b| b != 0) {
            return false;
        }
        (0..lay.params.cells()).all(|i| {
            let want = if i < lay.n {
                self.input_code(x[i]) as u64
            } else {
                0
            };
            bits_value(&v[lay.cell(i)]) == want
        })
    }

    /// Whether `v` (an eID of layout `lay`) is the initial configuration of its own input.
    pub fn is_initial_eid(&self, v: &Word) -> bool {
        match self.layout_for_len(v.len()) {
            Some(lay) => self.is_initial(&lay, v.bits()),
            None => false,
        }
    }

    /// Whether a true δ step applies (the clock has room and the head stays on the tape).
    fn step_target(&self, lay: &Layout, v: &[u8]) -> Option<(u32, u32, i64)> {
        let q = bits_value(&v[lay.q()]) as u32;
        let head = bits_value(&v[lay.w()]) as i64;
        let sym = bits_value(&v[lay.cell(head as usize)]) as u32;
        let (q2, y, d) = self.delta_code(q, sym)?;
        if v[lay.c()].iter().all(|&b| b == 1) {
            return None;
        }
        let nh = head + d as i64;
        (0..lay.params.cells() as i64)
            .contains(&nh)
            .then_some((q2, y, nh))
    }

    pub fn mu_bits(&self, lay: &Layout, v: &[u8]) -> Option<Vec<u8>> {
        let q = &v[lay.q()];
        if q.iter().all(|&b| b == 1) {
            return None;
        }
        let mut out = v.to_vec();
        match self.step_target(lay, v) {
            Some((q2, y, nh)) => {
                let head = bits_value(&v[lay.w()]) as usize;
                write_value(&mut out[lay.q()], q2 as u64);
                let c = bits_value(&v[lay.c()]);
                write_value(&mut out[lay.c()], c + 1);
                write_value(&mut out[lay.w()], nh as u64);
                write_value(&mut out[lay.cell(head)], y as u64);
            }
            None => out[lay.q()].fill(1),
        }
        Some(out)
    }

    /// One move on an eID; undefined off eID and at the final state.
    pub fn mu(&self, v: &Word) -> Option<Word> {
        let lay = self.layout_for_len(v.len())?;
        self.mu_bits(&lay, v.bits()).map(Word::from_bits)
    }

    /// Every y with μ(y) = z, in lexicographic order.
    pub fn mu_preimages_bits(&self, lay: &Layout, z: &[u8]) -> Vec<Vec<u8>> {
        let mut out = Vec::new();
        let q = bits_value(&z[lay.q()]) as u32;
        let c = bits_value(&z[lay.c()]);
        let head = bits_value(&z[lay.w()]) as i64;
        let states = 1u32 << self.m;
        // True steps into z.
        if c > 0 {
            for q0 in 0..states - 1 {
                for r0 in 0..states {
                    let Some((q2, y, d)) = self.delta_code(q0, r0) else {
                        continue;
                    };
                    let h0 = head - d as i64;
                    if q2 != q || !(0..lay.params.cells() as i64).contains(&h0) {
                        continue;
                    }
                    if bits_value(&z[lay.cell(h0 as usize)]) != y as u64 {
                        continue;
                    }
                    let mut p = z.to_vec();
                    write_value(&mut p[lay.q()], q0 as u64);
                    write_value(&mut p[lay.c()], c - 1);
                    write_value(&mut p[lay.w()], h0 as u64);
                    write_value(&mut p[lay.cell(h0 as usize)], r0 as u64);
                    out.push(p);
                }
            }
        }
        // Forced halts: same configuration with any non-final state that cannot step.
        if q == self.final_code() {
            for q0 in 0..states - 1 {
                let mut p = z.to_vec();
                write_value(&mut p[lay.q()], q0 as u64);
                if self.step_target(lay, &p).is_none() {
                    out.push(p);
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    pub fn mu_preimages(&self, z: &Word) -> Vec<Word> {
        match self.layout_for_len(z.len()) {
            Some(lay) => self
                .mu_preimages_bits(&lay, z.bits())
                .into_iter()
                .map(Word::from_bits)
                .collect(),
            None => Vec::new(),
        }
    }

    /// Iterates μ from the initial eID: (ν of the final tape, steps taken).
    pub fn run_tm(&self, x: &Word) -> Result<(u64, u64)> {
        let lay = self.layout(x.len());
        let mut v = self.initial_eid(x)?.bits().to_vec();
        let mut steps = 0u64;
        loop {
            if v[lay.q()].iter().all(|&b| b == 1) {
                break;
            }
            let true_step = self.step_target(&lay, &v).is_some();
            if !true_step {
                let clock_out = v[lay.c()].iter().all(|&b| b == 1);
                return Err(Error::ModelViolation {
                    x: x.clone(),
                    msg: if clock_out {
                        format!("clock exhausted after {steps} steps")
                    } else {
                        format!(
                            "head left the {}-cell tape after {steps} steps",
                            lay.params.cells()
                        )
                    },
                });
            }
            v = self.mu_bits(&lay, &v).expect("non-final state");
            steps += 1;
        }
        Ok((self.tape_value(&v[lay.tape()]), steps))
    }

    /// Direct simulation on symbol codes, independent of the eID encoding.
    pub fn simulate(&self, x: &Word, max_steps: u64) -> Result<(u64, u64)> {
        let cells = self.params(x.len()).cells();
        if x.len() > cells {
            return Err(Error::WidthOverflow {
                z: x.clone(),
                width: cells,
            });
        }
        let mut tape: Vec<u32> = x.bits().iter().map(|&b| self.input_code(b)).collect();
        tape.resize(cells, 0);
        let (mut q, mut head, mut steps) = (0u32, 0usize, 0u64);
        while q != self.final_code() {
            if steps >= max_steps {
                return Err(Error::ModelViolation {
                    x: x.clone(),
                    msg: "step limit reached".into(),
                });
            }
            let (q2, y, d) = self
                .delta_code(q, tape[head])
                .expect("total off the final state");
            tape[head] = y;
            let nh = head as i64 + d as i64;
            if nh < 0 || nh >= cells as i64 {
                return Err(Error::ModelViolation {
                    x: x.clone(),
                    msg: "head left the tape".into(),
                });
            }
            head = nh as usize;
            q = q2;
            steps += 1;
        }
        let syms: Vec<&str> = tape
            .iter()
            .map(|&c| self.symbols[c as usize].as_str())
            .collect();
        Ok((nu(&syms), steps))
    }

    /// Parses the line-oriented machine format and checks the model's requirements.
    pub fn from_spec(text: &str) -> Result<Self> {
        let mut kv: HashMap<&str, &str> = HashMap::new();
        let mut rules = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some((l, r)) = line.split_once("->") {
                rules.push((lineno + 1, l.trim(), r.trim()));
            } else if let Some((k, v)) = line.split_once('=') {
                kv.insert(k.trim(), v.trim());
            } else {
                return Err(invalid(format!(
                    "line {}: expected `key = value` or a transition",
                    lineno + 1
                )));
            }
        }
        let get = |k: &str| {
            kv.get(k)
                .copied()
                .ok_or_else(|| invalid(format!("missing key `{k}`")))
        };
        let list = |v: &str| {
            v.split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect::<Vec<_>>()
        };

        let m: usize = get("m")?
            .parse()
            .map_err(|_| invalid("m must be a number"))?;
        if !(2..=16).contains(&m) {
            return Err(invalid("m must be between 2 and 16"));
        }
        let size = 1usize << m;
        let states = list(get("states")?);
        let symbols = list(get("symbols")?);
        let start = get("start")?.to_string();
        let fin = get("final")?.to_string();
        if states.len() != size || symbols.len() != size {
            return Err(invalid(format!(
                "need exactly {size} states and {size} symbols"
            )));
        }
        if start == fin {
            return Err(invalid("start and final state coincide"));
        }
        for s in [&start, &fin] {
            if !states.contains(s) {
                return Err(invalid(format!("unknown state {s}")));
            }
        }
        for s in ["B", "0", "1"] {
            if !symbols.iter().any(|x| x == s) {
                return Err(invalid(format!("symbol set lacks {s}")));
            }
        }
        let mut sorted = states.clone();
        sorted.sort();
        sorted.dedup();
        let mut sorted_syms = symbols.clone();
        sorted_syms.sort();
        sorted_syms.dedup();
        if sorted.len() != size || sorted_syms.len() != size {
            return Err(invalid("duplicate state or symbol names"));
        }

        // Codes: fixed images first, the rest in declaration order.
        let mut state_by_code = vec![String::new(); size];
        state_by_code[0] = start.clone();
        state_by_code[size - 1] = fin.clone();
        let mut free = 1..size - 1;
        for s in states.iter().filter(|s| **s != start && **s != fin) {
            state_by_code[free.next().expect("counted")] = s.clone();
        }
        let mut symbol_by_code = vec![String::new(); size];
        symbol_by_code[0] = "B".into();
        symbol_by_code[size - 2] = "0".into();
        symbol_by_code[size - 1] = "1".into();
        let mut free = 1..size - 2;
        for s in symbols
            .iter()
            .filter(|s| !["B", "0", "1"].contains(&s.as_str()))
        {
            symbol_by_code[free.next().expect("counted")] = s.clone();
        }

        let coeffs = Poly::parse_coeffs(get("space_poly")?)?;
        let floor = match kv.get("space_floor") {
            Some(f) => f
                .parse()
                .map_err(|_| invalid("space_floor must be a number"))?,
            None => 0,
        };
        if !coeffs.is_strictly_increasing() {
            return Err(invalid("space_poly must be strictly increasing"));
        }
        let space = coeffs.with_floor(floor);
        if space.eval(0) == 0 {
            return Err(invalid("space bound must be positive"));
        }

        let mut tm = RestrictedTM {
            m,
            states: state_by_code,
            symbols: symbol_by_code,
            delta: vec![None; size * size],
            space,
        };
        for (lineno, l, r) in rules {
            let err = |msg: &str| invalid(format!("line {lineno}: {msg}"));
            let lhs: Vec<&str> = l.split(',').map(str::trim).collect();
            let rhs: Vec<&str> = r.split(',').map(str::trim).collect();
            if lhs.len() != 2 || rhs.len() != 3 {
                return Err(err("expected `q,sym -> q',sym',L|R`"));
            }
            let q = tm.state_code(lhs[0]).ok_or_else(|| err("unknown state"))?;
            let a = tm
                .symbol_code(lhs[1])
                .ok_or_else(|| err("unknown symbol"))?;
            let q2 = tm.state_code(rhs[0]).ok_or_else(|| err("unknown state"))?;
            let b = tm
                .symbol_code(rhs[1])
                .ok_or_else(|| err("unknown symbol"))?;
            let d = match rhs[2] {
                "L" => -1,
                "R" => 1,
                _ => return Err(err("direction must be L or R")),
            };
            if q == tm.final_code() {
                return Err(err("the final state has no moves"));
            }
            if q2 == 0 {
                return Err(err("nothing may move into the start state"));
            }
            let slot = &mut tm.delta[((q as usize) << m) | a as usize];
            if slot.is_some() {
                return Err(err("duplicate transition"));
            }
            *slot = Some((q2, b, d));
        }
        for q in 0..size as u32 - 1 {
            for a in 0..size as u32 {
                if tm.delta_code(q, a).is_none() {
                    return Err(invalid(format!(
                        "no move for ({}, {})",
                        tm.states[q as usize], tm.symbols[a as usize]
                    )));
                }
            }
        }
        Ok(tm)
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidMachine(msg.into())
}

pub const ONES_COUNT_SPEC: &str = include_str!("../machines/ones_count.tm");

/// m = 2 machine writing the number of ones in x; valid for |x| <= 2.
pub fn toy_ones_count() -> RestrictedTM {
    RestrictedTM::from_spec(ONES_COUNT_SPEC).expect("bundled machine is valid")
}
