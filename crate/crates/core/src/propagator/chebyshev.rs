use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use super::Evolver;
use crate::lattice::HamiltonianMatrix;
use crate::specfun::{orders_upto, MAX_ARGUMENT};
use crate::{Error, Result, C64};

/// Coefficients below this magnitude end the expansion. The neglected tail
/// is bounded by `2 sum_{k>K} |J_k(a dt)|`, far below 1e-12.
const COEFF_CUTOFF: f64 = 1e-17;

/// Chebyshev expansion of `e^{-iH dt}` for a fixed step `dt`.
///
/// With `H = a H' + b` and the spectrum of `H'` inside `[-1, 1]`:
/// `e^{-iH dt} = e^{-ib dt} [J_0(a dt) + 2 sum_k (-i)^k J_k(a dt) T_k(H')]`.
pub struct ChebyshevPropagator {
    h: HamiltonianMatrix,
    half_width: f64,
    center: f64,
    coeffs: Vec<C64>,
    global_phase: C64,
    work: [Vec<C64>; 4],
}

impl ChebyshevPropagator {
    pub fn new(h: &HamiltonianMatrix, dt: f64, max_order: usize) -> Result<Self> {
        let (lo, hi) = h.gershgorin_bounds();
        let half_width = 0.5 * (hi - lo) * (1.0 + 1e-12) + 1e-12;
        let center = 0.5 * (hi + lo);
        let x = half_width * dt;
        if x > MAX_ARGUMENT {
            return Err(Error::StepSize { needed: x.ceil() as usize, cap: max_order, dt });
        }
        let guess = (x + 40.0 + 16.0 * x.cbrt()).ceil() as usize;
        let bessel = orders_upto(x, guess);
        let order = bessel.iter().rposition(|v| v.abs() > COEFF_CUTOFF).unwrap_or(0) + 1;
        if order > max_order {
            return Err(Error::StepSize { needed: order, cap: max_order, dt });
        }
        let mut coeffs = Vec::with_capacity(order + 1);
        let mut minus_i_pow = C64::new(1.0, 0.0);
        for (k, jk) in bessel.iter().take(order + 1).enumerate() {
            let scale = if k == 0 { 1.0 } else { 2.0 };
            coeffs.push(minus_i_pow * (scale * jk));
            minus_i_pow *= C64::new(0.0, -1.0);
        }
        let d = h.dim();
        let zero = C64::new(0.0, 0.0);
        Ok(ChebyshevPropagator {
            h: h.clone(),
            half_width,
            center,
            coeffs,
            global_phase: C64::from_polar(1.0, -center * dt),
            work: [vec![zero; d], vec![zero; d], vec![zero; d], vec![zero; d]],
        })
    }

    /// Number of Chebyshev terms per step.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `out = (H v - b v) / a`.
    fn apply_scaled(h: &HamiltonianMatrix, a: f64, b: f64, v: &[C64], out: &mut [C64]) {
        h.apply(v, out);
        let inv = 1.0 / a;
        for (o, x) in out.iter_mut().zip(v) {
            *o = (*o - x * b) * inv;
        }
    }
}

impl Evolver for ChebyshevPropagator {
    fn advance(&mut self, psi: &mut [C64]) -> Result<()> {
        let [prev, cur, next, acc] = &mut self.work;
        let (a, b) = (self.half_width, self.center);

        prev.copy_from_slice(psi);
        for (o, p) in acc.iter_mut().zip(prev.iter()) {
            *o = p * self.coeffs[0];
        }
        if self.coeffs.len() > 1 {
            Self::apply_scaled(&self.h, a, b, prev, cur);
            for (o, c) in acc.iter_mut().zip(cur.iter()) {
                *o += c * self.coeffs[1];
            }
        }
        for ck in &self.coeffs[2..] {
            Self::apply_scaled(&self.h, a, b, cur, next);
            for ((n, p), o) in next.iter_mut().zip(prev.iter()).zip(acc.iter_mut()) {
                *n = *n * 2.0 - p;
                *o += *n * ck;
            }
            core::mem::swap(prev, cur);
            core::mem::swap(cur, next);
        }
        for (p, o) in psi.iter_mut().zip(acc.iter()) {
            *p = o * self.global_phase;
        }
        Ok(())
    }
}
