//! Executes resolved run points and writes their output files.

use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use stark_qed_core::kernel_dde::{build_comb, kernel_exact, solve_dde, KernelSpec};
use stark_qed_core::lattice::resonant_momentum;
use stark_qed_core::propagator::{
    detect_revivals, energy_momentum_frame, output_steps, propagate_observed, MomentumTransform,
};
use stark_qed_core::semiclassics::{return_tree, ReturnTree, DEFAULT_DEPTH};
use stark_qed_core::{
    build_hamiltonian, Error as CoreError, PropagationOptions, Regime, SingleExcitationState, TimeSeries, C64,
};

use crate::error::{RunError, RunResult};
use crate::output::{self, frame_stride, Cell, RunManifest, Table, DENSITY_FLOOR};
use crate::presets::{Kind, RunPoint};

/// Runs every point, concurrently when there are several. Results keep the
/// order of `points`.
pub fn run_all(points: &[RunPoint]) -> Vec<RunResult<RunManifest>> {
    if points.len() == 1 {
        return vec![run_point(&points[0])];
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = points.iter().map(|p| scope.spawn(move || run_point(p))).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(RunError::Validation("worker thread panicked".into()))))
            .collect()
    })
}

pub fn run_point(point: &RunPoint) -> RunResult<RunManifest> {
    let started = Instant::now();
    let dir = point.dir();
    fs::create_dir_all(&dir).map_err(|e| RunError::io(&dir, e))?;
    let mut files = Vec::new();
    match point.kind {
        Kind::Propagate => {
            write_propagation(point, &dir, &mut files)?;
            write_semiclassics_if_defined(point, &dir, &mut files)?;
            if comb_applies(point) {
                write_kernel(point, &dir, &mut files)?;
                write_dde(point, &dir, &mut files)?;
            }
        }
        Kind::Kernel => write_kernel(point, &dir, &mut files)?,
        Kind::Dde => write_dde(point, &dir, &mut files)?,
        Kind::Returns => write_returns(point, &dir, &mut files)?,
    }
    let manifest = RunManifest::new(point, files, started.elapsed().as_secs_f64());
    manifest.write(&dir)?;
    Ok(manifest)
}

fn comb_applies(point: &RunPoint) -> bool {
    point.lattice.force > 0.0 && point.qubit.omega0 == 0.0
}

fn record(files: &mut Vec<String>, path: std::path::PathBuf) {
    files.push(path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default());
}

/// Propagates `|e>` and streams every frame to `observer`.
pub fn simulate<F>(point: &RunPoint, mut observer: F) -> RunResult<()>
where
    F: FnMut(f64, &SingleExcitationState) -> RunResult<()>,
{
    let h = build_hamiltonian(&point.lattice, &point.qubit)?;
    let opts = PropagationOptions::new(point.t_max, point.dt_out, point.method);
    let mut deferred: Option<RunError> = None;
    let result = propagate_observed(&h, SingleExcitationState::excited(point.lattice.sites), &opts, |t, s| {
        observer(t, s).map_err(|e| {
            let msg = e.to_string();
            deferred = Some(e);
            CoreError::Config(msg)
        })
    });
    match (result, deferred) {
        (_, Some(e)) => Err(e),
        (r, None) => r.map_err(RunError::from),
    }
}

/// `alpha_e(t)` on the output grid.
pub fn simulate_alpha(point: &RunPoint) -> RunResult<TimeSeries<C64>> {
    let mut series = TimeSeries::new(0.0, point.dt_out);
    simulate(point, |_, s| {
        series.push(s.alpha_e());
        Ok(())
    })?;
    Ok(series)
}

fn write_propagation(point: &RunPoint, dir: &Path, files: &mut Vec<String>) -> RunResult<()> {
    let mut qp = Table::create(dir, output::QUBIT_POPULATION, &["time", "population", "alpha_re", "alpha_im"])?;
    let mut site = Table::create(dir, output::SITE_DENSITY, &["time", "site", "density"])?;
    let mut mom = Table::create(dir, output::MOMENTUM_DENSITY, &["time", "k", "density"])?;
    let mut em = Table::create(dir, output::ENERGY_MOMENTUM, &["time", "k", "omega", "density"])?;
    let transform = MomentumTransform::new(point.lattice.sites);
    let stride = frame_stride(output_steps(point.t_max, point.dt_out) + 1);
    let hopping = point.lattice.hopping;
    let mut index = 0usize;

    simulate(point, |t, s| {
        let a = s.alpha_e();
        qp.row([t, a.norm_sqr(), a.re, a.im])?;
        if index.is_multiple_of(stride) {
            for (p, d) in s.site_density().into_iter().enumerate() {
                if d >= DENSITY_FLOOR {
                    site.row([Cell::F(t), Cell::I(point.lattice.site_label(p)), Cell::F(d)])?;
                }
            }
            let frame = transform.frame(s, t);
            for (&k, d) in frame.k.iter().zip(frame.density()) {
                if d >= DENSITY_FLOOR {
                    mom.row([t, k, d])?;
                }
            }
            for (k, w, d) in energy_momentum_frame(&frame, hopping).rows {
                if d >= DENSITY_FLOOR {
                    em.row([t, k, w, d])?;
                }
            }
        }
        index += 1;
        Ok(())
    })?;
    for table in [qp, site, mom, em] {
        record(files, table.finish()?);
    }
    Ok(())
}

fn tree_for(point: &RunPoint) -> RunResult<ReturnTree> {
    let t_bloch = point.scales().t_bloch;
    Ok(return_tree(point.lattice.hopping, t_bloch, point.qubit.omega0, DEFAULT_DEPTH, point.t_max)?)
}

fn write_semiclassics_if_defined(point: &RunPoint, dir: &Path, files: &mut Vec<String>) -> RunResult<()> {
    let defined = point.lattice.force > 0.0
        && resonant_momentum(point.lattice.hopping, point.qubit.omega0)
            .map(|k| k > 0.0 && k < std::f64::consts::PI)
            .unwrap_or(false);
    if defined {
        write_returns(point, dir, files)?;
    }
    Ok(())
}

fn write_returns(point: &RunPoint, dir: &Path, files: &mut Vec<String>) -> RunResult<()> {
    if point.lattice.force <= 0.0 {
        return Err(CoreError::ZeroForce("return tree").into());
    }
    let tree = tree_for(point)?;
    let t_bloch = point.scales().t_bloch;
    let mut table = Table::create(dir, output::RETURNS, &["time", "time_over_t_bloch", "multiplicity"])?;
    for m in &tree.merged {
        table.row([Cell::F(m.time), Cell::F(m.time / t_bloch), Cell::I(m.multiplicity as i64)])?;
    }
    record(files, table.finish()?);
    Ok(())
}

fn write_kernel(point: &RunPoint, dir: &Path, files: &mut Vec<String>) -> RunResult<()> {
    let spec = KernelSpec::from_parameters(&point.lattice, &point.qubit)?;
    let mut table = Table::create(dir, output::KERNEL, &["tau", "series_re", "series_im", "closed_re", "closed_im"])?;
    for i in 0..=output_steps(point.t_max, point.dt_out) {
        let tau = i as f64 * point.dt_out;
        let k = kernel_exact(&spec, tau)?;
        table.row([tau, k.series.re, k.series.im, k.closed.re, k.closed.im])?;
    }
    record(files, table.finish()?);
    Ok(())
}

fn write_dde(point: &RunPoint, dir: &Path, files: &mut Vec<String>) -> RunResult<()> {
    let comb = build_comb(&point.lattice, &point.qubit)?;
    let sol = solve_dde(&comb, point.t_max, point.dt_out)?;
    let mut table = Table::create(dir, output::DDE, &["time", "alpha_re", "alpha_im", "abs_alpha"])?;
    for (t, a) in sol.samples.iter() {
        table.row([t, a.re, a.im, a.norm()])?;
    }
    record(files, table.finish()?);
    Ok(())
}

/// Tolerance on the RMS of `|alpha_e|` between simulation and delay equation.
pub const RMS_TOLERANCE: f64 = 0.02;
/// Tolerance on revival times, as a fraction of `T_B`.
pub const REVIVAL_TOLERANCE: f64 = 0.03;
/// Prominence threshold for revival detection.
pub const REVIVAL_THRESHOLD: f64 = 0.02;
/// Predicted returns compared against the simulation.
pub const COMPARED_RETURNS: usize = 4;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RevivalCheck {
    pub predicted: f64,
    pub detected: Option<f64>,
    pub offset_over_t_bloch: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CrossvalReport {
    pub regime: String,
    pub rms_abs_alpha: f64,
    pub rms_tolerance: f64,
    pub rms_pass: bool,
    pub revival_tolerance_over_t_bloch: f64,
    pub revivals: Vec<RevivalCheck>,
    pub pass: bool,
}

/// Data behind a cross-validation report.
pub struct Crossval {
    pub simulated: TimeSeries<C64>,
    pub dde: TimeSeries<C64>,
    pub report: CrossvalReport,
}

/// Simulation against the delay equation and the return tree. Only for
/// `omega0 = 0` with a force weak enough that the comb picture can hold.
pub fn crossvalidate(point: &RunPoint) -> RunResult<Crossval> {
    if point.kind != Kind::Propagate {
        return Err(RunError::Validation(format!(
            "crossval needs a propagation experiment, got `{}`",
            point.experiment
        )));
    }
    if point.qubit.omega0 != 0.0 {
        return Err(RunError::Validation(format!(
            "crossval refused: the delay equation holds for omega0 = 0 only, got {}",
            point.qubit.omega0
        )));
    }
    let regime = point.regime().ok_or_else(|| {
        RunError::Validation("crossval needs F > 0: the delay equation has no Bloch period without force".into())
    })?;
    if regime == Regime::StrongForce {
        return Err(RunError::Validation(format!(
            "crossval refused: Gamma T_B = {:.3e} is in the strong-force regime, where the delay-equation reduction does not hold",
            point.scales().ratio
        )));
    }
    if regime == Regime::Crossover {
        log::warn!(
            "Gamma T_B = {:.3} is in the crossover regime; delay-equation agreement not expected",
            point.scales().ratio
        );
    }
    let comb = build_comb(&point.lattice, &point.qubit)?;
    let dde = solve_dde(&comb, point.t_max, point.dt_out)?.samples;
    let simulated = simulate_alpha(point)?;

    let n = simulated.len().min(dde.len());
    let mse = (0..n).map(|i| (simulated.samples()[i].norm() - dde.samples()[i].norm()).powi(2)).sum::<f64>() / n as f64;
    let rms = mse.sqrt();

    let scales = point.scales();
    let population = simulated.map(|a| a.norm_sqr());
    let detected = detect_revivals(&population, 5.0 / scales.gamma, REVIVAL_THRESHOLD);
    let tree = tree_for(point)?;
    let horizon = point.t_max - scales.t_bloch / 20.0;
    let revivals: Vec<RevivalCheck> = tree
        .merged
        .iter()
        .filter(|m| m.time <= horizon)
        .take(COMPARED_RETURNS)
        .map(|m| {
            let nearest =
                detected.iter().map(|r| r.time).min_by(|a, b| (a - m.time).abs().total_cmp(&(b - m.time).abs()));
            let offset = nearest.map(|t| (t - m.time) / scales.t_bloch);
            RevivalCheck {
                predicted: m.time,
                detected: nearest,
                offset_over_t_bloch: offset,
                pass: offset.is_some_and(|o| o.abs() <= REVIVAL_TOLERANCE),
            }
        })
        .collect();
    let rms_pass = rms <= RMS_TOLERANCE;
    let pass = rms_pass && revivals.iter().all(|r| r.pass);
    Ok(Crossval {
        simulated,
        dde,
        report: CrossvalReport {
            regime: regime.label().to_string(),
            rms_abs_alpha: rms,
            rms_tolerance: RMS_TOLERANCE,
            rms_pass,
            revival_tolerance_over_t_bloch: REVIVAL_TOLERANCE,
            revivals,
            pass,
        },
    })
}

/// Runs [`crossvalidate`] and writes the comparison table, report and manifest.
pub fn crossval_point(point: &RunPoint) -> RunResult<CrossvalReport> {
    let started = Instant::now();
    let dir = point.dir();
    fs::create_dir_all(&dir).map_err(|e| RunError::io(&dir, e))?;
    let cv = crossvalidate(point)?;
    let mut files = Vec::new();

    let mut table = Table::create(&dir, output::CROSSVAL, &["time", "abs_alpha_sim", "abs_alpha_dde", "difference"])?;
    for ((t, s), d) in cv.simulated.iter().zip(cv.dde.samples()) {
        table.row([t, s.norm(), d.norm(), s.norm() - d.norm()])?;
    }
    record(&mut files, table.finish()?);
    let mut qp = Table::create(&dir, output::QUBIT_POPULATION, &["time", "population", "alpha_re", "alpha_im"])?;
    for (t, a) in cv.simulated.iter() {
        qp.row([t, a.norm_sqr(), a.re, a.im])?;
    }
    record(&mut files, qp.finish()?);
    write_dde(point, &dir, &mut files)?;
    write_returns(point, &dir, &mut files)?;

    let path = dir.join(output::CROSSVAL_REPORT);
    let text = serde_json::to_string_pretty(&cv.report).map_err(|e| RunError::io(&path, e.into()))?;
    fs::write(&path, text + "\n").map_err(|e| RunError::io(&path, e))?;
    record(&mut files, path);

    RunManifest::new(point, files, started.elapsed().as_secs_f64()).write(&dir)?;
    Ok(cv.report)
}
