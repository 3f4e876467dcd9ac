//! Memory kernel of the emitted field and the delay-differential equation it
//! reduces to for a weak force with the qubit at the band centre.
//!
//! The qubit amplitude (in the frame rotating at `omega0`) obeys
//! `d alpha/dt = -g^2 int_0^t K(tau) alpha(t - tau) dtau` with
//! `K(tau) = sum_n J_n(xi)^2 e^{-i(F n - omega0) tau}
//!         = e^{i omega0 tau} J_0(2 xi sin(pi tau / T_B))`.
//! Replacing the Bessel weights by their large-`xi` sinusoid turns `K` into a
//! Dirac comb with teeth every `T_B/2`, and the integral equation into
//! `d alpha/dt = -Gamma/2 alpha - Gamma sum_{l>=1} alpha(t - l T_B)
//!               - Gamma sin(2 xi) sum_{l>=0} alpha(t - (l + 1/2) T_B)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::lattice::{DerivedScales, LatticeSpec, QubitSpec};
use crate::propagator::{output_steps, TimeSeries};
use crate::specfun::{bessel_j, bessel_row};
use crate::{Error, Result, C64};

/// Tolerance of the series/closed-form self-check in [`kernel_exact`].
pub const KERNEL_SELF_CHECK: f64 = 1e-10;
/// Minimum series truncation beyond `xi`.
pub const MIN_ORDER_MARGIN: f64 = 40.0;
/// Default series truncation beyond `ceil(xi)`, plus [`TURNING_WIDTHS`]
/// times `xi^{1/3}` to clear the Bessel turning region at large `xi`.
pub const DEFAULT_ORDER_MARGIN: usize = 50;
pub const TURNING_WIDTHS: f64 = 8.0;

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub xi: f64,
    pub t_bloch: f64,
    pub omega0: f64,
    /// Series runs over `|n| <= order`.
    pub order: usize,
    weights: Vec<f64>,
}

impl KernelSpec {
    pub fn new(xi: f64, t_bloch: f64, omega0: f64) -> Result<Self> {
        let order = if xi.is_finite() && xi > 0.0 {
            xi.ceil() as usize + DEFAULT_ORDER_MARGIN + (TURNING_WIDTHS * xi.cbrt()).ceil() as usize
        } else {
            0
        };
        Self::with_order(xi, t_bloch, omega0, order)
    }

    pub fn from_parameters(lat: &LatticeSpec, qb: &QubitSpec) -> Result<Self> {
        if lat.force <= 0.0 {
            return Err(Error::ZeroForce("memory kernel period"));
        }
        let d = DerivedScales::new(lat, qb);
        Self::new(d.xi, d.t_bloch, qb.omega0)
    }

    pub fn with_order(xi: f64, t_bloch: f64, omega0: f64, order: usize) -> Result<Self> {
        if !(xi > 0.0) || !xi.is_finite() || !(t_bloch > 0.0) || !t_bloch.is_finite() {
            return Err(Error::Config(format!("kernel needs finite xi > 0 and T_B > 0, got {xi}, {t_bloch}")));
        }
        if (order as f64) < xi + MIN_ORDER_MARGIN {
            return Err(Error::Config(format!(
                "series order {order} below xi + {MIN_ORDER_MARGIN} = {}",
                xi + MIN_ORDER_MARGIN
            )));
        }
        let m = order as i64;
        let weights = bessel_row(0, xi, 0, m)?.into_iter().map(|j| j * j).collect();
        Ok(KernelSpec { xi, t_bloch, omega0, order, weights })
    }

    pub fn force(&self) -> f64 {
        2.0 * PI / self.t_bloch
    }
}

/// Both evaluations of the exact kernel at one delay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub series: C64,
    pub closed: C64,
}

/// Evaluates the kernel as a truncated mode sum and in closed form and
/// fails if they disagree by more than [`KERNEL_SELF_CHECK`].
pub fn kernel_exact(spec: &KernelSpec, tau: f64) -> Result<KernelValue> {
    if !(tau >= 0.0) {
        return Err(Error::Domain(format!("kernel delay must be non-negative, got {tau}")));
    }
    let f = spec.force();
    let w = &spec.weights;
    // J_{-n}^2 = J_n^2: pair +n and -n into a cosine
    let mut sum = w[0];
    for (n, wn) in w.iter().enumerate().skip(1) {
        sum += 2.0 * wn * (f * n as f64 * tau).cos();
    }
    let rot = C64::from_polar(1.0, spec.omega0 * tau);
    let series = rot * sum;
    let arg = 2.0 * spec.xi * (PI * tau / spec.t_bloch).sin();
    let closed = rot * bessel_j(0, arg.abs())?;
    let diff = (series - closed).norm();
    if !(diff <= KERNEL_SELF_CHECK) {
        return Err(Error::Invariant(format!("kernel series and closed form differ by {diff:.3e} at tau = {tau}")));
    }
    Ok(KernelValue { series, closed })
}

/// Truncated series with the Bessel weights replaced by their large-`xi`
/// sinusoid: `(2/(pi xi)) sum_{|n|<=M} sin^2(n pi/2 + xi + pi/4) e^{-i F n tau}`.
///
/// A distribution in the limit `M -> infinity`; only meaningful when
/// integrated against a smooth window.
pub fn kernel_sinusoidal(spec: &KernelSpec, tau: f64) -> C64 {
    let f = spec.force();
    let pref = 2.0 / (PI * spec.xi);
    let m = spec.order as i64;
    (-m..=m)
        .map(|n| {
            let s = (n as f64 * PI / 2.0 + spec.xi + PI / 4.0).sin();
            C64::from_polar(pref * s * s, -f * n as f64 * tau)
        })
        .sum()
}

/// Coefficients of the band-centre delay equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayComb {
    pub gamma: f64,
    pub w_int: f64,
    pub w_half: f64,
    pub t_bloch: f64,
    pub instantaneous: f64,
}

pub fn build_comb(lat: &LatticeSpec, qb: &QubitSpec) -> Result<DelayComb> {
    if lat.force <= 0.0 {
        return Err(Error::ZeroForce("delay comb"));
    }
    if qb.omega0 != 0.0 {
        return Err(Error::UnsupportedRegime(format!("delay comb derived for omega0 = 0 only, got {}", qb.omega0)));
    }
    let d = DerivedScales::new(lat, qb);
    Ok(DelayComb {
        gamma: d.gamma,
        w_int: d.gamma,
        w_half: d.gamma * (2.0 * d.xi).sin(),
        t_bloch: d.t_bloch,
        instantaneous: d.gamma / 2.0,
    })
}

/// Coupling-mode function `g_n = g f(n) sin(n pi/2 + phi)` on a ladder of
/// spacing `Delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralizedDDESpec {
    pub spacing: f64,
    /// Envelope `f` evaluated at `omega0 / Delta`.
    pub envelope: f64,
    pub phase: f64,
    pub omega0: f64,
}

impl GeneralizedDDESpec {
    /// Parameters under which the generalized equation is the band-centre one.
    pub fn band_centre(lat: &LatticeSpec) -> Result<Self> {
        if lat.force <= 0.0 {
            return Err(Error::ZeroForce("generalized delay equation"));
        }
        let xi = 2.0 * lat.hopping / lat.force;
        Ok(GeneralizedDDESpec {
            spacing: lat.force,
            envelope: (2.0 / (PI * xi)).sqrt(),
            phase: xi + PI / 4.0,
            omega0: 0.0,
        })
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.spacing
    }

    /// Effective rate `g^2 T f^2 / 2`.
    pub fn rate(&self, g: f64) -> f64 {
        g * g * self.period() * self.envelope * self.envelope / 2.0
    }

    /// Ratio of half-integer to integer tooth weights, `-cos 2 phi`.
    pub fn odd_factor(&self) -> f64 {
        -(2.0 * self.phase).cos()
    }

    fn validate(&self) -> Result<()> {
        let finite = self.spacing.is_finite() && self.envelope.is_finite() && self.phase.is_finite();
        if !(self.spacing > 0.0) || !finite || !self.omega0.is_finite() {
            return Err(Error::Config(format!("invalid generalized delay parameters {self:?}")));
        }
        Ok(())
    }
}

/// Piecewise closed-form solution. On interval `l`, `t = (l + s) h` with
/// `h = T/2`, `s in [0, 1]`:
/// `alpha(t) = e^{-rate h s / 2} P_l(s)`, `P_l` a polynomial of degree `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct DDESolution {
    pub rate: f64,
    pub half_period: f64,
    /// Monomial coefficients of `P_l`, lowest order first.
    pub intervals: Vec<Vec<C64>>,
    pub samples: TimeSeries<C64>,
}

/// Largest `|alpha|` tolerated before a solution is declared divergent.
pub const AMPLITUDE_AUDIT: f64 = 1.0 + 1e-6;

impl DDESolution {
    fn locate(&self, t: f64) -> (usize, f64) {
        let x = (t / self.half_period).max(0.0);
        let l = (x.floor() as usize).min(self.intervals.len() - 1);
        (l, x - l as f64)
    }

    fn eval_in(&self, l: usize, s: f64) -> C64 {
        let p = horner(&self.intervals[l], s);
        p * (-0.5 * self.rate * self.half_period * s).exp()
    }

    fn derivative_in(&self, l: usize, s: f64) -> C64 {
        let c = &self.intervals[l];
        let dp: Vec<C64> = c.iter().enumerate().skip(1).map(|(k, v)| v * k as f64).collect();
        let p = horner(c, s);
        let dp = if dp.is_empty() { C64::new(0.0, 0.0) } else { horner(&dp, s) };
        let lam = 0.5 * self.rate * self.half_period;
        (dp - p * lam) * (-lam * s).exp() / self.half_period
    }

    /// `alpha_e(t)` for `0 <= t <= t_max`.
    pub fn eval(&self, t: f64) -> C64 {
        let (l, s) = self.locate(t);
        self.eval_in(l, s)
    }

    /// Jump `alpha'(l h^+) - alpha'(l h^-)` at the boundary `t = l h`, `l >= 1`.
    pub fn derivative_jump(&self, l: usize) -> Option<C64> {
        if l == 0 || l >= self.intervals.len() {
            return None;
        }
        Some(self.derivative_in(l, 0.0) - self.derivative_in(l - 1, 1.0))
    }

    /// Mismatch `alpha(l h^+) - alpha(l h^-)`.
    pub fn continuity_gap(&self, l: usize) -> Option<C64> {
        if l == 0 || l >= self.intervals.len() {
            return None;
        }
        Some(self.eval_in(l, 0.0) - self.eval_in(l - 1, 1.0))
    }
}

fn horner(c: &[C64], s: f64) -> C64 {
    c.iter().rev().fold(C64::new(0.0, 0.0), |acc, v| acc * s + v)
}

/// Band-centre delay equation from `alpha(0) = 1`, zero history.
pub fn solve_dde(comb: &DelayComb, t_max: f64, dt_out: f64) -> Result<DDESolution> {
    let odd = if comb.w_int != 0.0 { comb.w_half / comb.w_int } else { 0.0 };
    solve_comb(comb.w_int, odd, 0.0, comb.t_bloch, t_max, dt_out)
}

/// Generalized delay equation: integer teeth of weight `rate e^{i omega0 l T}`
/// and half-integer teeth of weight
/// `rate (-cos 2 phi) e^{i omega0 (l + 1/2) T}`, `rate = g^2 T f^2 / 2`.
pub fn solve_generalized_dde(spec: &GeneralizedDDESpec, g: f64, t_max: f64, dt_out: f64) -> Result<DDESolution> {
    spec.validate()?;
    solve_comb(spec.rate(g), spec.odd_factor(), spec.omega0, spec.period(), t_max, dt_out)
}

/// Method of steps on the comb equation
/// `alpha' = -rate/2 alpha - sum_{j>=1} w_j alpha(t - j h)` with
/// `w_j = rate e^{i omega0 j h}` (even `j`) or `rate odd e^{i omega0 j h}` (odd `j`).
///
/// Substituting `alpha_l(s) = e^{-rate h s/2} P_l(s)` gives
/// `P_l' = -h sum_{j=1..l} w_j P_{l-j}`, so each `P_l` is an integral of
/// earlier polynomials, with `P_l(0)` fixed by continuity.
fn solve_comb(rate: f64, odd: f64, omega0: f64, period: f64, t_max: f64, dt_out: f64) -> Result<DDESolution> {
    if !(t_max > 0.0) || !(dt_out > 0.0) || !t_max.is_finite() {
        return Err(Error::Config(format!("t_max and dt_out must be positive, got {t_max} and {dt_out}")));
    }
    if !(rate >= 0.0) || !rate.is_finite() || !odd.is_finite() {
        return Err(Error::Config(format!("invalid delay-equation rate {rate} or weight {odd}")));
    }
    let h = 0.5 * period;
    let n_intervals = (t_max / h).floor() as usize + 1;
    let weights: Vec<C64> = (0..n_intervals)
        .map(|j| {
            let w = if j % 2 == 0 { rate } else { rate * odd };
            C64::from_polar(w, omega0 * j as f64 * h)
        })
        .collect();
    let decay = (-0.5 * rate * h).exp();

    let mut intervals: Vec<Vec<C64>> = Vec::with_capacity(n_intervals);
    intervals.push(vec![C64::new(1.0, 0.0)]);
    for l in 1..n_intervals {
        let mut c = vec![C64::new(0.0, 0.0); l + 1];
        c[0] = decay * horner(&intervals[l - 1], 1.0);
        for j in 1..=l {
            let scale = -h * weights[j];
            for (k, pk) in intervals[l - j].iter().enumerate() {
                c[k + 1] += scale * pk / (k + 1) as f64;
            }
        }
        intervals.push(c);
    }

    let mut sol = DDESolution { rate, half_period: h, intervals, samples: TimeSeries::new(0.0, dt_out) };
    for i in 0..=output_steps(t_max, dt_out) {
        let t = i as f64 * dt_out;
        let a = sol.eval(t);
        if !(a.norm() <= AMPLITUDE_AUDIT) {
            return Err(Error::Invariant(format!(
                "delay-equation amplitude |alpha| = {:.6} at t = {t} (rate {rate}, odd weight {odd}, omega0 {omega0})",
                a.norm()
            )));
        }
        sol.samples.push(a);
    }
    Ok(sol)
}
