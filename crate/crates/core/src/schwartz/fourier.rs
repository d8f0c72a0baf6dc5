use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{indices, side_len, SchwartzBruhat};
use crate::cyclotomic::Accumulator;
use crate::padic::Prime;
use crate::{ExactComplex, Result};

impl SchwartzBruhat {
    /// `Fφ(y) = ∫ φ(x) ψ(x·y) dx`.
    ///
    /// On the coset `a + p^k Z_p^n` the inner integral is
    /// `ψ(a·y)·p^{-nk}·1[v(y_i) >= 1-k]`, so with `L = m + k` the transform is
    /// the discrete Fourier transform on `(Z/p^L)^n` with kernel
    /// `ζ_{p^L}^{a·b}`, scaled by `p^{-nk}`, computed one axis at a time by
    /// radix-`p` splitting. The output has support level
    /// `k - 1` and constancy level `m + 1`, with the same index range.
    pub fn fourier(&self) -> Result<SchwartzBruhat> {
        let (p, n) = (self.p, self.n);
        let span = self.m + self.k;
        let side = side_len(p, n, span)?;
        let level = self
            .table
            .values()
            .map(ExactComplex::level)
            .max()
            .unwrap_or(0)
            .max(span as u32);
        Accumulator::new(p, level)?;
        let total = side.pow(n as u32) as usize;
        let mut data: Vec<ExactComplex> = vec![ExactComplex::zero(p); total];
        for (idx, v) in &self.table {
            data[flatten(idx, side)] = v.clone();
        }
        let rotation = p.get().pow(level - span as u32);
        for axis in 0..n {
            let stride = side.pow((n - 1 - axis) as u32) as usize;
            let bases: Vec<usize> = (0..total)
                .filter(|i| (i / stride) % side as usize == 0)
                .collect();
            let lines: Vec<Vec<ExactComplex>> = bases
                .par_iter()
                .map(|&base| {
                    let input: Vec<&ExactComplex> =
                        (0..side as usize).map(|t| &data[base + t * stride]).collect();
                    dft(&input, p, level, rotation)
                })
                .collect();
            for (base, line) in bases.into_iter().zip(lines) {
                for (t, v) in line.into_iter().enumerate() {
                    data[base + t * stride] = v;
                }
            }
        }
        let factor = p.rpow(-(n as i64) * self.k);
        let mut table = BTreeMap::new();
        for (idx, v) in indices(n, side).zip(data) {
            if !v.is_zero() {
                table.insert(idx, v.scale(&factor));
            }
        }
        Ok(SchwartzBruhat {
            p,
            n,
            m: self.k - 1,
            k: self.m + 1,
            table,
        })
    }
}

/// `X(b) = Σ_a x(a) ω^{ab}` over `Z/N`, `N = p^s`, with `ω = ζ_{p^level}^rot`
/// a primitive `N`-th root of unity.
///
/// Splitting `a = a0 + p·a1` gives `X(b) = Σ_{a0} ω^{a0·b} Y_{a0}(b mod N/p)`,
/// where `Y_{a0}` is the transform of `a1 ↦ x(a0 + p·a1)` with root `ω^p`.
fn dft(x: &[&ExactComplex], p: Prime, level: u32, rot: u64) -> Vec<ExactComplex> {
    let n = x.len();
    let pp = p.get() as usize;
    if n == 1 {
        return vec![x[0].clone()];
    }
    let modulus = p.get().pow(level);
    if x.iter().all(|v| v.is_zero()) {
        return vec![ExactComplex::zero(p); n];
    }
    let sub_len = n / pp;
    let subs: Vec<Vec<ExactComplex>> = (0..pp)
        .map(|a0| {
            let part: Vec<&ExactComplex> = (0..sub_len).map(|a1| x[a0 + pp * a1]).collect();
            dft(&part, p, level, rot * p.get() % modulus)
        })
        .collect();
    (0..n)
        .map(|b| {
            let mut acc = Accumulator::new(p, level).expect("level checked");
            for (a0, sub) in subs.iter().enumerate() {
                let v = &sub[b % sub_len];
                if !v.is_zero() {
                    acc.add_rotated(v, (a0 as u64 * b as u64) % modulus * rot % modulus);
                }
            }
            acc.finish()
        })
        .collect()
}

fn flatten(idx: &[u64], side: u64) -> usize {
    idx.iter().fold(0u64, |acc, &a| acc * side + a) as usize
}
