//! Integer-order Bessel functions of the first kind, `J_n(x)`.
//!
//! Small arguments (`|x| <= 1`) use the power series directly. Larger
//! arguments use Miller's downward recurrence started well above both the
//! highest requested order and the turning point `n = x`, normalized with
//! `J_0^2 + 2 sum_k J_k^2 = 1` (the sign is fixed by `J_0 + 2 sum_k J_2k = 1`).
//!
//! Negative orders and negative arguments are reduced internally with
//! `J_{-n}(x) = (-1)^n J_n(x)` and `J_n(-x) = (-1)^n J_n(x)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::{Error, Result};

/// Largest supported `|x|`.
pub const MAX_ARGUMENT: f64 = 1.0e5;

/// Supported orders satisfy `|n| <= |x| + ORDER_MARGIN`.
pub const ORDER_MARGIN: f64 = 200.0;

const SERIES_LIMIT: f64 = 1.0;
const RESCALE_AT: f64 = 1.0e150;
const RESCALE_BY: f64 = 1.0e-150;

fn check_range(max_abs_order: u64, x: f64) -> Result<()> {
    if !x.is_finite() || x.abs() > MAX_ARGUMENT {
        return Err(Error::Range {
            what: "Bessel argument",
            detail: format!("|x| = {x} (supported |x| <= {MAX_ARGUMENT})"),
        });
    }
    if max_abs_order as f64 > x.abs() + ORDER_MARGIN {
        return Err(Error::Range {
            what: "Bessel order",
            detail: format!("|n| = {max_abs_order} with |x| = {x} (supported |n| <= |x| + {ORDER_MARGIN})"),
        });
    }
    Ok(())
}

/// `J_n(x)` for integer `n`.
pub fn bessel_j(order: i32, x: f64) -> Result<f64> {
    let n = order.unsigned_abs();
    check_range(u64::from(n), x)?;
    let value = orders_upto(x.abs(), n as usize)[n as usize];
    Ok(if parity_flip(order, x) { -value } else { value })
}

/// Evaluates `J_{m - center}(xi)` for every `m` in `m_lo..=m_hi`.
///
/// All orders come from one recurrence sweep, so this is the cheap way to get
/// a Wannier-Stark mode profile.
pub fn bessel_row(center: i64, xi: f64, m_lo: i64, m_hi: i64) -> Result<Vec<f64>> {
    if m_lo > m_hi {
        return Err(Error::Config(format!("empty row: m_lo = {m_lo} > m_hi = {m_hi}")));
    }
    let max_abs = (m_lo - center).unsigned_abs().max((m_hi - center).unsigned_abs());
    check_range(max_abs, xi)?;
    let table = orders_upto(xi.abs(), max_abs as usize);
    Ok((m_lo..=m_hi)
        .map(|m| {
            let order = m - center;
            let v = table[order.unsigned_abs() as usize];
            let odd = order.unsigned_abs() % 2 == 1;
            if odd && ((order < 0) != (xi < 0.0)) {
                -v
            } else {
                v
            }
        })
        .collect())
}

/// Large-argument sinusoid approximating `J_n(xi)`:
/// `sqrt(2/(pi xi)) * sin(-n pi/2 + xi + pi/4)`.
///
/// `n` is the order, i.e. the offset `m - n_c` of a site from the centre of a
/// Wannier-Stark mode. Accurate when `xi` is large and `|n| << sqrt(xi)`.
pub fn bessel_asymptotic_sin(n: i32, xi: f64) -> Result<f64> {
    if !(xi > 0.0) {
        return Err(Error::Domain(format!("asymptotic form needs xi > 0, got {xi}")));
    }
    let pi = core::f64::consts::PI;
    let phase = -f64::from(n) * pi / 2.0 + xi + pi / 4.0;
    Ok((2.0 / (pi * xi)).sqrt() * phase.sin())
}

fn parity_flip(order: i32, x: f64) -> bool {
    order.unsigned_abs() % 2 == 1 && ((order < 0) != (x < 0.0))
}

/// `[J_0(x), ..., J_{n_max}(x)]` for `x >= 0`. No range checks.
pub(crate) fn orders_upto(x: f64, n_max: usize) -> Vec<f64> {
    debug_assert!(x >= 0.0);
    if x == 0.0 {
        let mut out = vec![0.0; n_max + 1];
        out[0] = 1.0;
        return out;
    }
    if x <= SERIES_LIMIT {
        series_orders(x, n_max)
    } else {
        miller_orders(x, n_max)
    }
}

fn series_orders(x: f64, n_max: usize) -> Vec<f64> {
    let half = 0.5 * x;
    let q = half * half;
    let mut out = vec![0.0; n_max + 1];
    // leading term (x/2)^n / n!
    let mut lead = 1.0;
    for (n, slot) in out.iter_mut().enumerate() {
        if n > 0 {
            lead *= half / n as f64;
        }
        if lead == 0.0 {
            break;
        }
        let mut term = lead;
        let mut sum = lead;
        let mut k = 0.0;
        loop {
            k += 1.0;
            term *= -q / (k * (n as f64 + k));
            sum += term;
            if term.abs() <= f64::EPSILON * 1e-3 * sum.abs() {
                break;
            }
        }
        *slot = sum;
    }
    out
}

fn miller_start(x: f64, n_max: usize) -> usize {
    let top = x.max(n_max as f64);
    let m = (top + 30.0 + 16.0 * x.cbrt()).ceil() as usize;
    m + (m & 1)
}

fn miller_orders(x: f64, n_max: usize) -> Vec<f64> {
    let start = miller_start(x, n_max);
    let mut out = vec![0.0; n_max + 1];
    let two_over_x = 2.0 / x;

    let mut above = 0.0;
    let mut cur = 1.0e-30;
    let mut linear = 0.0;
    let mut squares = 0.0;
    for k in (1..=start).rev() {
        if k <= n_max {
            out[k] = cur;
        }
        squares += 2.0 * cur * cur;
        if k % 2 == 0 {
            linear += 2.0 * cur;
        }
        let below = k as f64 * two_over_x * cur - above;
        above = cur;
        cur = below;
        if cur.abs() > RESCALE_AT {
            cur *= RESCALE_BY;
            above *= RESCALE_BY;
            linear *= RESCALE_BY;
            squares *= RESCALE_BY * RESCALE_BY;
            let hi = n_max.min(start);
            for v in &mut out[k.min(hi + 1)..=hi] {
                *v *= RESCALE_BY;
            }
        }
    }
    out[0] = cur;
    linear += cur;
    squares += cur * cur;

    let norm = squares.sqrt().copysign(linear);
    let inv = 1.0 / norm;
    for v in &mut out {
        *v *= inv;
    }
    out
}
