//! Time evolution in the single-excitation sector and observables built on it.
//!
//! Two backends produce `|Psi(t)> = e^{-iHt}|Psi(0)>` on a uniform output grid:
//! * [`Method::Eigen`] diagonalizes the dense Hamiltonian once and applies the
//!   phases exactly at every output time. Cost `O(N^3)`; meant for `N` up to a
//!   few hundred and as an oracle.
//! * [`Method::Chebyshev`] expands `e^{-iH dt}` in Chebyshev polynomials of the
//!   rescaled Hamiltonian. Each term costs one sparse matrix-vector product.

mod analysis;
mod chebyshev;
mod eigen;
mod momentum;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::lattice::{build_hamiltonian, HamiltonianMatrix, LatticeSpec, QubitSpec};
use crate::{Error, Result, C64};

pub use analysis::{detect_revivals, fit_decay_rate, fit_rabi, photon_centroid, DecayFit, RabiFit, Revival};
pub use chebyshev::ChebyshevPropagator;
pub use eigen::EigenPropagator;
pub use momentum::{
    dft_direct, energy_momentum_frame, energy_momentum_map, momentum_grid, to_momentum, EnergyMomentumFrame,
    MomentumFrame, MomentumTransform,
};

/// `alpha_e |e> + sum_n beta_n |n>`, stored as one vector `[alpha_e, beta...]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleExcitationState {
    amplitudes: Vec<C64>,
}

impl SingleExcitationState {
    /// `|e>` with the field in vacuum.
    pub fn excited(sites: usize) -> Self {
        let mut amplitudes = vec![C64::new(0.0, 0.0); sites + 1];
        amplitudes[0] = C64::new(1.0, 0.0);
        SingleExcitationState { amplitudes }
    }

    pub fn from_parts(alpha_e: C64, beta: &[C64]) -> Self {
        let mut amplitudes = Vec::with_capacity(beta.len() + 1);
        amplitudes.push(alpha_e);
        amplitudes.extend_from_slice(beta);
        SingleExcitationState { amplitudes }
    }

    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Self {
        assert!(!amplitudes.is_empty());
        SingleExcitationState { amplitudes }
    }

    pub fn alpha_e(&self) -> C64 {
        self.amplitudes[0]
    }

    pub fn beta(&self) -> &[C64] {
        &self.amplitudes[1..]
    }

    pub fn sites(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn qubit_population(&self) -> f64 {
        self.amplitudes[0].norm_sqr()
    }

    pub fn field_population(&self) -> f64 {
        self.beta().iter().map(|b| b.norm_sqr()).sum()
    }

    /// `|alpha_e|^2 + sum |beta_n|^2`.
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `|beta_n|^2` per site.
    pub fn site_density(&self) -> Vec<f64> {
        self.beta().iter().map(|b| b.norm_sqr()).collect()
    }
}

/// Uniformly sampled series: sample `i` sits at `start + i * step`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T> {
    start: f64,
    step: f64,
    samples: Vec<T>,
}

impl<T> TimeSeries<T> {
    pub fn new(start: f64, step: f64) -> Self {
        assert!(step > 0.0, "time step must be positive");
        TimeSeries { start, step, samples: Vec::new() }
    }

    pub fn from_samples(start: f64, step: f64, samples: Vec<T>) -> Self {
        assert!(step > 0.0, "time step must be positive");
        TimeSeries { start, step, samples }
    }

    pub fn push(&mut self, sample: T) {
        self.samples.push(sample);
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples.len()).map(|i| self.time(i))
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &T)> {
        self.samples.iter().enumerate().map(|(i, s)| (self.time(i), s))
    }

    /// Index of the sample closest to `t`, clamped to the series.
    pub fn nearest_index(&self, t: f64) -> usize {
        let i = ((t - self.start) / self.step).round();
        if i <= 0.0 || self.samples.is_empty() {
            0
        } else {
            (i as usize).min(self.samples.len() - 1)
        }
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> TimeSeries<U> {
        TimeSeries { start: self.start, step: self.step, samples: self.samples.iter().map(f).collect() }
    }
}

/// Number of output intervals of width `dt` fitting in `[0, t_max]`.
pub fn output_steps(t_max: f64, dt: f64) -> usize {
    (t_max / dt + 1e-9).floor() as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Eigen,
    Chebyshev,
}

/// Aborts a run when amplitude reaches the outer sites of the truncated array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeGuard {
    /// Sites checked at each end.
    pub width: usize,
    /// Largest tolerated `|beta_n|` there.
    pub max_amplitude: f64,
}

impl Default for EdgeGuard {
    fn default() -> Self {
        EdgeGuard { width: 20, max_amplitude: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationOptions {
    pub t_max: f64,
    pub dt_out: f64,
    pub method: Method,
    pub edge_guard: Option<EdgeGuard>,
    /// Tolerated `| ||Psi(t)||^2 - ||Psi(0)||^2 |`.
    pub norm_tolerance: f64,
    /// Cap on the Chebyshev expansion order per output step.
    pub max_order: usize,
}

impl PropagationOptions {
    pub fn new(t_max: f64, dt_out: f64, method: Method) -> Self {
        PropagationOptions {
            t_max,
            dt_out,
            method,
            edge_guard: Some(EdgeGuard::default()),
            norm_tolerance: 1e-10,
            max_order: 4096,
        }
    }
}

/// Advances a state by a fixed output step.
pub trait Evolver {
    fn advance(&mut self, psi: &mut [C64]) -> Result<()>;
}

/// Propagates `|e>` under `H(lat, qb)` and keeps every output frame.
pub fn propagate(
    lat: &LatticeSpec,
    qb: &QubitSpec,
    opts: &PropagationOptions,
) -> Result<TimeSeries<SingleExcitationState>> {
    let h = build_hamiltonian(lat, qb)?;
    check_options(opts)?;
    let mut series = TimeSeries::new(0.0, opts.dt_out);
    propagate_observed(&h, SingleExcitationState::excited(lat.sites), opts, |_, s| {
        series.push(s.clone());
        Ok(())
    })?;
    Ok(series)
}

/// Propagates `initial` and hands every output frame to `observer` instead of
/// storing it. Frames are at `t = 0, dt_out, ..., <= t_max`.
///
/// Each frame is checked for norm drift and, if enabled, against the edge
/// guard before the observer sees it.
pub fn propagate_observed<F>(
    h: &HamiltonianMatrix,
    initial: SingleExcitationState,
    opts: &PropagationOptions,
    mut observer: F,
) -> Result<()>
where
    F: FnMut(f64, &SingleExcitationState) -> Result<()>,
{
    h.check_hermitian()?;
    check_options(opts)?;
    if initial.amplitudes().len() != h.dim() {
        return Err(Error::Config(format!(
            "initial state has dimension {}, Hamiltonian {}",
            initial.amplitudes().len(),
            h.dim()
        )));
    }
    let norm0 = initial.norm_sqr();
    if (norm0 - 1.0).abs() > opts.norm_tolerance {
        return Err(Error::Config(format!("initial state not normalized: |Psi|^2 = {norm0}")));
    }

    let steps = output_steps(opts.t_max, opts.dt_out);
    let mut evolver: alloc::boxed::Box<dyn Evolver> = match opts.method {
        Method::Eigen => alloc::boxed::Box::new(EigenPropagator::new(h).stepper(initial.amplitudes(), opts.dt_out)),
        Method::Chebyshev => alloc::boxed::Box::new(ChebyshevPropagator::new(h, opts.dt_out, opts.max_order)?),
    };

    let mut state = initial;
    check_frame(&state, 0.0, norm0, opts)?;
    observer(0.0, &state)?;
    for j in 1..=steps {
        evolver.advance(state.amplitudes_mut())?;
        let t = j as f64 * opts.dt_out;
        check_frame(&state, t, norm0, opts)?;
        observer(t, &state)?;
    }
    Ok(())
}

fn check_options(opts: &PropagationOptions) -> Result<()> {
    if !(opts.t_max > 0.0) || !(opts.dt_out > 0.0) || !opts.t_max.is_finite() {
        return Err(Error::Config(format!(
            "t_max and dt_out must be positive, got {} and {}",
            opts.t_max, opts.dt_out
        )));
    }
    Ok(())
}

fn check_frame(state: &SingleExcitationState, t: f64, norm0: f64, opts: &PropagationOptions) -> Result<()> {
    let drift = (state.norm_sqr() - norm0).abs();
    if !(drift <= opts.norm_tolerance) {
        return Err(Error::Invariant(format!("norm drift {drift:.3e} at t = {t}")));
    }
    if let Some(guard) = opts.edge_guard {
        let beta = state.beta();
        let w = guard.width.min(beta.len() / 2);
        let edge = beta[..w].iter().chain(&beta[beta.len() - w..]).map(|b| b.norm()).fold(0.0, f64::max);
        if edge > guard.max_amplitude {
            return Err(Error::Sizing { time: t, amplitude: edge, limit: guard.max_amplitude });
        }
    }
    Ok(())
}
