use alloc::vec::Vec;
use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use super::{SingleExcitationState, TimeSeries};
use crate::C64;

/// `k_j = -pi + 2 pi j / N`, `j = 0..N`.
pub fn momentum_grid(sites: usize) -> Vec<f64> {
    (0..sites).map(|j| -PI + 2.0 * PI * j as f64 / sites as f64).collect()
}

/// Plain `O(N^2)` forward DFT, `X_j = sum_p x_p e^{-2 pi i j p / N}`.
pub fn dft_direct(x: &[C64]) -> Vec<C64> {
    let n = x.len();
    (0..n)
        .map(|j| {
            x.iter()
                .enumerate()
                .map(|(p, v)| {
                    let phase = -2.0 * PI * ((j * p) % n) as f64 / n as f64;
                    v * C64::from_polar(1.0, phase)
                })
                .sum()
        })
        .collect()
}

/// In-place forward DFT of arbitrary length.
pub(crate) struct Dft {
    #[cfg(feature = "std")]
    plan: std::sync::Arc<dyn rustfft::Fft<f64>>,
    len: usize,
}

impl Dft {
    pub(crate) fn new(len: usize) -> Self {
        Dft {
            #[cfg(feature = "std")]
            plan: rustfft::FftPlanner::new().plan_fft_forward(len),
            len,
        }
    }

    pub(crate) fn process(&self, buf: &mut [C64]) {
        debug_assert_eq!(buf.len(), self.len);
        #[cfg(feature = "std")]
        self.plan.process(buf);
        #[cfg(not(feature = "std"))]
        {
            let out = dft_direct(buf);
            buf.copy_from_slice(&out);
        }
    }
}

/// Reusable site-to-momentum transform for a fixed lattice size:
/// `gamma_j = N^{-1/2} sum_n e^{-i k_j n} beta_n` with centred labels `n`.
pub struct MomentumTransform {
    dft: Dft,
    grid: Vec<f64>,
    /// `(-1)^{p-c}`
    sign: Vec<f64>,
    /// `N^{-1/2} e^{2 pi i j c / N}`
    twiddle: Vec<C64>,
}

impl MomentumTransform {
    pub fn new(sites: usize) -> Self {
        let c = (sites.saturating_sub(1) / 2) as i64;
        let norm = 1.0 / (sites as f64).sqrt();
        let sign = (0..sites as i64).map(|p| if (p - c).rem_euclid(2) == 0 { 1.0 } else { -1.0 }).collect();
        let twiddle = (0..sites)
            .map(|j| {
                let jc = (j as i64 * c).rem_euclid(sites as i64);
                C64::from_polar(norm, 2.0 * PI * jc as f64 / sites as f64)
            })
            .collect();
        MomentumTransform { dft: Dft::new(sites), grid: momentum_grid(sites), sign, twiddle }
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn transform(&self, beta: &[C64]) -> Vec<C64> {
        let mut buf: Vec<C64> = beta.iter().zip(&self.sign).map(|(b, s)| b * *s).collect();
        self.dft.process(&mut buf);
        buf.iter_mut().zip(&self.twiddle).for_each(|(g, w)| *g *= w);
        buf
    }

    pub fn frame(&self, state: &SingleExcitationState, time: f64) -> MomentumFrame {
        MomentumFrame { time, k: self.grid.clone(), gamma: self.transform(state.beta()) }
    }
}

/// Field amplitudes on the momentum grid at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumFrame {
    pub time: f64,
    pub k: Vec<f64>,
    pub gamma: Vec<C64>,
}

impl MomentumFrame {
    pub fn density(&self) -> Vec<f64> {
        self.gamma.iter().map(|g| g.norm_sqr()).collect()
    }

    pub fn population(&self) -> f64 {
        self.gamma.iter().map(|g| g.norm_sqr()).sum()
    }

    /// Grid index of the largest `|gamma_k|^2`.
    pub fn peak_index(&self) -> usize {
        argmax(self.gamma.iter().map(|g| g.norm_sqr()))
    }
}

/// One-shot transform of a state's field part.
pub fn to_momentum(state: &SingleExcitationState, time: f64) -> MomentumFrame {
    MomentumTransform::new(state.sites()).frame(state, time)
}

/// Rows `(k, -2J cos k, |gamma_k|^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyMomentumFrame {
    pub time: f64,
    pub rows: Vec<(f64, f64, f64)>,
}

impl EnergyMomentumFrame {
    pub fn peak(&self) -> (f64, f64, f64) {
        self.rows[argmax(self.rows.iter().map(|r| r.2))]
    }
}

pub fn energy_momentum_frame(frame: &MomentumFrame, hopping: f64) -> EnergyMomentumFrame {
    let rows = frame.k.iter().zip(&frame.gamma).map(|(&k, g)| (k, -2.0 * hopping * k.cos(), g.norm_sqr())).collect();
    EnergyMomentumFrame { time: frame.time, rows }
}

pub fn energy_momentum_map(series: &TimeSeries<MomentumFrame>, hopping: f64) -> TimeSeries<EnergyMomentumFrame> {
    series.map(|f| energy_momentum_frame(f, hopping))
}

fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::dispersion;
    use proptest::prelude::*;

    fn state_from_beta(beta: Vec<C64>) -> SingleExcitationState {
        SingleExcitationState::from_parts(C64::new(0.0, 0.0), &beta)
    }

    /// Transform straight from the definition with centred labels.
    fn reference(beta: &[C64]) -> Vec<C64> {
        let n = beta.len();
        let c = ((n - 1) / 2) as f64;
        momentum_grid(n)
            .iter()
            .map(|&k| {
                beta.iter().enumerate().map(|(p, b)| b * C64::from_polar(1.0, -k * (p as f64 - c))).sum::<C64>()
                    / (n as f64).sqrt()
            })
            .collect()
    }

    #[test]
    fn grid_spacing_and_range() {
        let g = momentum_grid(7);
        assert_eq!(g.len(), 7);
        assert!((g[0] + PI).abs() < 1e-15);
        for w in g.windows(2) {
            assert!((w[1] - w[0] - 2.0 * PI / 7.0).abs() < 1e-14);
        }
        assert!(*g.last().unwrap() < PI);
    }

    #[test]
    fn matches_definition() {
        for n in [1usize, 2, 5, 9, 31, 64, 101] {
            let beta: Vec<C64> =
                (0..n).map(|p| C64::new((p as f64 * 0.37).sin(), (p as f64 * 1.3).cos() * 0.5)).collect();
            let got = MomentumTransform::new(n).transform(&beta);
            let want = reference(&beta);
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).norm() < 1e-12, "n = {n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn fft_agrees_with_direct_dft() {
        let x: Vec<C64> = (0..45).map(|p| C64::new(p as f64 * 0.1, -(p as f64).sqrt())).collect();
        let mut fast = x.clone();
        Dft::new(45).process(&mut fast);
        for (a, b) in fast.iter().zip(dft_direct(&x)) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn point_source_is_flat() {
        let n = 41;
        let mut beta = vec![C64::new(0.0, 0.0); n];
        beta[n / 2] = C64::new(1.0, 0.0);
        let frame = to_momentum(&state_from_beta(beta), 0.0);
        for d in frame.density() {
            assert!((d - 1.0 / n as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn plane_wave_concentrates() {
        let n = 41;
        let grid = momentum_grid(n);
        let j0 = 30;
        let k0 = grid[j0];
        let c = (n - 1) as f64 / 2.0;
        let beta: Vec<C64> = (0..n).map(|p| C64::from_polar(1.0 / (n as f64).sqrt(), k0 * (p as f64 - c))).collect();
        let frame = to_momentum(&state_from_beta(beta), 0.0);
        let d = frame.density();
        assert!((d[j0] - 1.0).abs() < 1e-12);
        assert_eq!(frame.peak_index(), j0);
    }

    #[test]
    fn energy_column_is_dispersion() {
        let n = 17;
        let beta: Vec<C64> = (0..n).map(|p| C64::new(1.0 / (n as f64).sqrt(), p as f64 * 0.0)).collect();
        let em = energy_momentum_frame(&to_momentum(&state_from_beta(beta), 2.5), 1.0);
        assert_eq!(em.time, 2.5);
        for &(k, w, _) in &em.rows {
            let k_in = if k <= -PI { PI } else { k };
            assert_eq!(w, dispersion(1.0, k_in));
        }
    }

    proptest! {
        #[test]
        fn transform_is_unitary(
            re in proptest::collection::vec(-1.0f64..1.0, 1..80),
            seed in 0.0f64..6.0,
        ) {
            let beta: Vec<C64> = re.iter().enumerate().map(|(i, r)| C64::new(*r, (seed * i as f64).sin())).collect();
            let before: f64 = beta.iter().map(|b| b.norm_sqr()).sum();
            let frame = to_momentum(&state_from_beta(beta), 0.0);
            prop_assert!((frame.population() - before).abs() <= 1e-10 * before.max(1.0));
        }
    }
}
