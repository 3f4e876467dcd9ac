use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use super::momentum::Dft;
use super::{SingleExcitationState, TimeSeries};
use crate::{Error, Result, C64};

/// Exponential decay fit `|alpha_e|^2 ~ A e^{-gamma t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub gamma: f64,
    pub r_squared: f64,
    pub samples: usize,
}

/// Least-squares slope of `ln p(t)` over `window`, reported as a positive rate.
pub fn fit_decay_rate(series: &TimeSeries<f64>, window: (f64, f64)) -> Result<DecayFit> {
    let (t0, t1) = window;
    if !(t1 > t0) {
        return Err(Error::Fit(format!("empty window [{t0}, {t1}]")));
    }
    let mut pts = Vec::new();
    for (t, &p) in series.iter() {
        if t >= t0 && t <= t1 {
            if !(p > 1e-12) {
                return Err(Error::Fit(format!("population {p:e} at t = {t} too small for a log fit")));
            }
            pts.push((t, p.ln()));
        }
    }
    if pts.len() < 5 {
        return Err(Error::Fit(format!("{} samples in window, need at least 5", pts.len())));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(DecayFit { gamma: -slope, r_squared, samples: pts.len() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Revival {
    pub time: f64,
    pub population: f64,
    pub prominence: f64,
}

/// Local maxima after `after` whose topographic prominence is at least
/// `threshold` times the running maximum of the series up to the peak.
///
/// The running maximum includes `t = 0`, so for a qubit starting excited the
/// threshold acts as an absolute population.
pub fn detect_revivals(series: &TimeSeries<f64>, after: f64, threshold: f64) -> Vec<Revival> {
    let y = series.samples();
    let first = (0..y.len()).find(|&i| series.time(i) > after).unwrap_or(y.len());
    let mut running = vec![0.0f64; y.len()];
    let mut m = f64::NEG_INFINITY;
    for (r, &v) in running.iter_mut().zip(y) {
        m = m.max(v);
        *r = m;
    }

    let mut out = Vec::new();
    let mut i = first.max(1);
    while i + 1 < y.len() {
        if !(y[i] > y[i - 1]) {
            i += 1;
            continue;
        }
        // plateau: advance to its end
        let mut j = i;
        while j + 1 < y.len() && y[j + 1] == y[i] {
            j += 1;
        }
        if j + 1 >= y.len() || y[j + 1] > y[i] {
            i = j + 1;
            continue;
        }
        let peak = y[i];
        let left_base = y[first..i].iter().rev().take_while(|&&v| v <= peak).fold(peak, |a, &v| a.min(v));
        let right_base = y[j + 1..].iter().take_while(|&&v| v <= peak).fold(peak, |a, &v| a.min(v));
        let prominence = peak - left_base.max(right_base);
        if prominence >= threshold * running[i] {
            out.push(Revival { time: series.time(i), population: peak, prominence });
        }
        i = j + 1;
    }
    out
}

/// Dominant oscillation of a population series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RabiFit {
    /// Angular frequency.
    pub frequency: f64,
    pub contrast: f64,
}

/// Spectral peak ratio over the median periodogram power below which no
/// oscillation is reported.
const NOISE_FLOOR_RATIO: f64 = 20.0;

/// Periodogram peak with parabolic refinement, then polished by minimizing
/// the residual of a least-squares sinusoid.
pub fn fit_rabi(series: &TimeSeries<f64>) -> Result<RabiFit> {
    let y = series.samples();
    let n = y.len();
    if n < 8 {
        return Err(Error::Fit(format!("{n} samples, need at least 8")));
    }
    let dt = series.step();
    let mean = y.iter().sum::<f64>() / n as f64;
    let padded = (8 * n).next_power_of_two();
    let mut buf = vec![C64::new(0.0, 0.0); padded];
    for (b, v) in buf.iter_mut().zip(y) {
        *b = C64::new(v - mean, 0.0);
    }
    Dft::new(padded).process(&mut buf);
    let half = padded / 2;
    let power: Vec<f64> = buf[..=half].iter().map(|c| c.norm_sqr()).collect();

    let (m, pmax) = power.iter().enumerate().skip(1).fold((0, 0.0), |b, (i, &p)| if p > b.1 { (i, p) } else { b });
    let mut sorted = power[1..].to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    let median = sorted[sorted.len() / 2];
    if m == 0 || !(pmax > NOISE_FLOOR_RATIO * median) || !(pmax > 0.0) {
        return Err(Error::Fit("no spectral peak above the noise floor".into()));
    }

    let bin = 2.0 * PI / (padded as f64 * dt);
    let mut offset = 0.0;
    if m > 0 && m < half {
        let (a, b, c) = (power[m - 1], power[m], power[m + 1]);
        let denom = a - 2.0 * b + c;
        if denom < 0.0 {
            offset = (0.5 * (a - c) / denom).clamp(-0.5, 0.5);
        }
    }
    let coarse = (m as f64 + offset) * bin;

    let times: Vec<f64> = series.times().collect();
    let residual = |w: f64| sinusoid_residual(&times, y, w);
    let frequency = golden_min(residual, (coarse - bin).max(0.5 * bin), coarse + bin, 1e-12 * coarse.max(1e-300));

    let period_end = series.start() + 2.0 * PI / frequency;
    let first_period = times.iter().zip(y).take_while(|(t, _)| **t <= period_end).map(|(_, v)| *v);
    let (lo, hi) = first_period.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    Ok(RabiFit { frequency, contrast: hi - lo })
}

/// Residual sum of squares of the best `a + b cos wt + c sin wt`.
fn sinusoid_residual(t: &[f64], y: &[f64], w: f64) -> f64 {
    let mut m = [[0.0f64; 3]; 3];
    let mut r = [0.0f64; 3];
    for (&ti, &yi) in t.iter().zip(y) {
        let basis = [1.0, (w * ti).cos(), (w * ti).sin()];
        for a in 0..3 {
            r[a] += basis[a] * yi;
            for b in 0..3 {
                m[a][b] += basis[a] * basis[b];
            }
        }
    }
    let coef = match solve3(m, r) {
        Some(c) => c,
        None => return f64::INFINITY,
    };
    t.iter()
        .zip(y)
        .map(|(&ti, &yi)| {
            let f = coef[0] + coef[1] * (w * ti).cos() + coef[2] * (w * ti).sin();
            (yi - f).powi(2)
        })
        .sum()
}

fn solve3(mut m: [[f64; 3]; 3], mut r: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap())?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        r.swap(col, piv);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            let pivot_row = m[col];
            for (dst, src) in m[row].iter_mut().zip(pivot_row).skip(col) {
                *dst -= f * src;
            }
            r[row] -= f * r[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| m[row][k] * x[k]).sum();
        x[row] = (r[row] - s) / m[row][row];
    }
    Some(x)
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// `sum_n n |beta_n|^2 / sum_n |beta_n|^2` with centred site labels.
pub fn photon_centroid(state: &SingleExcitationState) -> Result<f64> {
    let beta = state.beta();
    let c = (beta.len().saturating_sub(1) / 2) as f64;
    let total: f64 = beta.iter().map(|b| b.norm_sqr()).sum();
    if !(total > 1e-12) {
        return Err(Error::Domain(format!("field population {total:e}: centroid undefined")));
    }
    let moment: f64 = beta.iter().enumerate().map(|(p, b)| (p as f64 - c) * b.norm_sqr()).sum();
    Ok(moment / total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sampled(dt: f64, n: usize, f: impl Fn(f64) -> f64) -> TimeSeries<f64> {
        TimeSeries::from_samples(0.0, dt, (0..n).map(|i| f(i as f64 * dt)).collect())
    }

    #[test]
    fn decay_fit_recovers_exponential() {
        let s = sampled(0.5, 200, |t| (-0.04 * t).exp());
        let fit = fit_decay_rate(&s, (5.0, 60.0)).unwrap();
        assert!((fit.gamma - 0.04).abs() < 1e-6);
        assert!(fit.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn decay_fit_rejects_short_window() {
        let s = sampled(1.0, 100, |t| (-0.04 * t).exp());
        assert!(matches!(fit_decay_rate(&s, (5.0, 8.0)), Err(Error::Fit(_))));
        let z = sampled(1.0, 100, |_| 0.0);
        assert!(matches!(fit_decay_rate(&z, (5.0, 60.0)), Err(Error::Fit(_))));
    }

    #[test]
    fn no_revivals_in_pure_decay() {
        let s = sampled(0.5, 400, |t| (-0.04 * t).exp());
        assert!(detect_revivals(&s, 5.0 / 0.04, 0.02).is_empty());
    }

    #[test]
    fn revivals_found_with_prominence() {
        let bump = |t: f64, c: f64, h: f64| h * (-((t - c) / 5.0).powi(2)).exp();
        let s =
            sampled(0.5, 400, |t| (-0.2 * t).exp() + bump(t, 100.0, 0.3) + bump(t, 150.0, 0.1) + bump(t, 180.0, 0.005));
        let r = detect_revivals(&s, 25.0, 0.02);
        assert_eq!(r.len(), 2);
        assert!((r[0].time - 100.0).abs() < 0.51);
        assert!((r[1].time - 150.0).abs() < 0.51);
        assert!((r[0].prominence - 0.3).abs() < 1e-3);
    }

    #[test]
    fn rabi_fit_exact_on_cosine_squared() {
        let omega = 0.0317;
        let s = sampled(2.0, 3000, |t| (0.5 * omega * t).cos().powi(2));
        let fit = fit_rabi(&s).unwrap();
        assert!((fit.frequency - omega).abs() < 1e-9 * omega, "{}", fit.frequency);
        assert!((fit.contrast - 1.0).abs() < 1e-3);
    }

    #[test]
    fn rabi_fit_rejects_flat_input() {
        let s = sampled(1.0, 100, |_| 0.5);
        assert!(matches!(fit_rabi(&s), Err(Error::Fit(_))));
    }

    #[test]
    fn centroid_examples() {
        let mut beta = vec![C64::new(0.0, 0.0); 11];
        beta[2] = C64::new(0.5f64.sqrt(), 0.0);
        beta[8] = C64::new(0.0, 0.5f64.sqrt());
        let s = SingleExcitationState::from_parts(C64::new(0.0, 0.0), &beta);
        assert!(photon_centroid(&s).unwrap().abs() < 1e-15);
        beta[2] = C64::new(0.0, 0.0);
        let s = SingleExcitationState::from_parts(C64::new(0.0, 0.0), &beta);
        assert!((photon_centroid(&s).unwrap() - 3.0).abs() < 1e-15);
        assert!(photon_centroid(&SingleExcitationState::excited(11)).is_err());
    }
}
