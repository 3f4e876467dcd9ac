//! Named experiments and resolution of a config into concrete run points.

use std::f64::consts::PI;
use std::path::PathBuf;

use stark_qed_core::lattice::{classify_regime, rabi_frequency};
use stark_qed_core::{DerivedScales, LatticeSpec, Method, QubitSpec, Regime};

use crate::config::ExperimentConfig;
use crate::error::{RunError, RunResult};

/// What a run point computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// Full time evolution plus all applicable derived files.
    Propagate,
    /// Memory kernel table only.
    Kernel,
    /// Delay-equation solution only.
    Dde,
    /// Semiclassical return tree only.
    Returns,
}

/// Physical point of a preset: `(F, g, omega0)`.
type Point = (f64, f64, f64);

pub struct Preset {
    pub name: &'static str,
    pub kind: Kind,
    pub summary: &'static str,
    points: fn() -> Vec<Point>,
}

/// `F = 4J/(q pi)`: the half-integer comb weight `sin(2 xi)` vanishes.
pub const SUPPRESSION_Q: f64 = 1273.0;

pub fn suppression_force() -> f64 {
    4.0 / (SUPPRESSION_Q * PI)
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "markov",
        kind: Kind::Propagate,
        summary: "no force: exponential decay at g^2/J and fronts at +-2J (F=0, g=0.2)",
        points: || vec![(0.0, 0.2, 0.0)],
    },
    Preset {
        name: "rabi",
        kind: Kind::Propagate,
        summary: "strong force: chiral vacuum Rabi oscillations (F=0.5, g=0.01, omega0 in {0, +-3F})",
        points: || vec![(0.5, 0.01, 0.0), (0.5, 0.01, -1.5), (0.5, 0.01, 1.5)],
    },
    Preset {
        name: "weakforce",
        kind: Kind::Propagate,
        summary: "weak force: decay with revivals (F=1e-3, g=0.2, omega0 in {0, -1})",
        points: || vec![(1e-3, 0.2, 0.0), (1e-3, 0.2, -1.0)],
    },
    Preset {
        name: "edgechiral",
        kind: Kind::Propagate,
        summary: "qubit near the upper band edge: one-sided emission (F=1e-3, g=0.01, omega0=1.966)",
        points: || vec![(1e-3, 0.01, 1.966)],
    },
    Preset {
        name: "suppression",
        kind: Kind::Propagate,
        summary: "odd revivals cancelled at F=4/(1273 pi), with a +5% F control",
        points: || vec![(suppression_force(), 0.2, 0.0), (1.05 * suppression_force(), 0.2, 0.0)],
    },
    Preset {
        name: "single",
        kind: Kind::Propagate,
        summary: "one propagation point; F, g and omega0 must be given",
        points: Vec::new,
    },
    Preset {
        name: "kernel",
        kind: Kind::Kernel,
        summary: "exact memory kernel, series and closed form (F=1e-3, omega0=0)",
        points: || vec![(1e-3, 0.2, 0.0)],
    },
    Preset {
        name: "dde",
        kind: Kind::Dde,
        summary: "band-centre delay equation (F=1e-3, g=0.2)",
        points: || vec![(1e-3, 0.2, 0.0)],
    },
    Preset {
        name: "returns",
        kind: Kind::Returns,
        summary: "semiclassical return times (F=1e-3, omega0=-1)",
        points: || vec![(1e-3, 0.2, -1.0)],
    },
];

pub fn find(name: &str) -> RunResult<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name).ok_or_else(|| {
        let names: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
        RunError::Validation(format!("unknown experiment `{name}` (known: {})", names.join(", ")))
    })
}

/// Fully resolved parameters of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunPoint {
    pub experiment: String,
    pub kind: Kind,
    /// Sub-directory for multi-point presets, empty otherwise.
    pub label: String,
    pub lattice: LatticeSpec,
    pub qubit: QubitSpec,
    pub auto_size: bool,
    pub t_max: f64,
    pub dt_out: f64,
    pub method: Method,
    pub out_dir: PathBuf,
}

impl RunPoint {
    pub fn scales(&self) -> DerivedScales {
        DerivedScales::new(&self.lattice, &self.qubit)
    }

    pub fn regime(&self) -> Option<Regime> {
        classify_regime(&self.lattice, &self.qubit).ok().map(|r| r.regime)
    }

    pub fn dir(&self) -> PathBuf {
        if self.label.is_empty() {
            self.out_dir.clone()
        } else {
            self.out_dir.join(&self.label)
        }
    }
}

/// Samples per Rabi period in the strong-force regime.
pub const SAMPLES_PER_RABI: f64 = 200.0;
/// Samples per Bloch period otherwise.
pub const SAMPLES_PER_BLOCH: f64 = 400.0;
/// Output step and horizon without force.
pub const NO_FORCE_DT: f64 = 0.5;
pub const NO_FORCE_T_MAX: f64 = 60.0;

/// Expands a config into its run points, applying preset defaults and
/// validating every point before anything is computed.
pub fn resolve(cfg: &ExperimentConfig, out_override: Option<&PathBuf>) -> RunResult<Vec<RunPoint>> {
    let preset = find(&cfg.experiment)?;
    let mut points = (preset.points)();
    if points.is_empty() {
        let missing: Vec<&str> = [("F", cfg.force), ("g", cfg.coupling), ("omega0", cfg.omega0)]
            .iter()
            .filter(|(_, v)| v.is_none())
            .map(|(k, _)| *k)
            .collect();
        if !missing.is_empty() {
            return Err(RunError::Validation(format!("experiment `{}` needs {}", preset.name, missing.join(", "))));
        }
        points.push((0.0, 0.0, 0.0));
    }
    for p in &mut points {
        p.0 = cfg.force.unwrap_or(p.0);
        p.1 = cfg.coupling.unwrap_or(p.1);
        p.2 = cfg.omega0.unwrap_or(p.2);
    }
    points.dedup_by(|a, b| a == b);
    let multi = points.len() > 1;
    let out_dir = out_override.cloned().or_else(|| cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));

    points
        .into_iter()
        .map(|(force, coupling, omega0)| {
            let label = if multi { format!("F{force:.6e}_omega0{omega0:+.4}") } else { String::new() };
            resolve_point(cfg, preset, force, coupling, omega0, label, out_dir.clone())
        })
        .collect()
}

fn resolve_point(
    cfg: &ExperimentConfig,
    preset: &Preset,
    force: f64,
    coupling: f64,
    omega0: f64,
    label: String,
    out_dir: PathBuf,
) -> RunResult<RunPoint> {
    if force < 0.0 {
        return Err(RunError::Validation(format!("F must be non-negative, got {force}")));
    }
    if coupling < 0.0 {
        return Err(RunError::Validation(format!("g must be non-negative, got {coupling}")));
    }
    let hopping = 1.0;
    let n0 = cfg.n0.unwrap_or(0);
    let qubit = QubitSpec { omega0, coupling };
    // provisional lattice for time scales; size fixed below
    let probe = LatticeSpec { hopping, force, sites: 3, qubit_site: 0 };

    let (t_default, dt_default) = default_times(&probe, &qubit)?;
    let t_max = cfg.t_max.unwrap_or(t_default);
    let dt_out = cfg.dt_out.unwrap_or(dt_default);
    if !(t_max > 0.0) || !(dt_out > 0.0) || dt_out > t_max {
        return Err(RunError::Validation(format!("need 0 < dt_out <= t_max, got dt_out = {dt_out}, t_max = {t_max}")));
    }

    let auto_size = cfg.auto_size.unwrap_or(cfg.sites.is_none());
    let sites = if auto_size {
        (LatticeSpec::auto_sites(hopping, force, t_max) + 2 * n0.unsigned_abs() as usize) | 1
    } else {
        cfg.sites.ok_or_else(|| RunError::Validation("N is required when auto_size = false".into()))?
    };
    let lattice = LatticeSpec::new(hopping, force, sites, n0)?;

    Ok(RunPoint {
        experiment: preset.name.to_string(),
        kind: preset.kind,
        label,
        lattice,
        qubit,
        auto_size,
        t_max,
        dt_out,
        method: cfg.method.unwrap_or(Method::Chebyshev),
        out_dir,
    })
}

fn default_times(lat: &LatticeSpec, qb: &QubitSpec) -> RunResult<(f64, f64)> {
    if lat.force == 0.0 {
        return Ok((NO_FORCE_T_MAX, NO_FORCE_DT));
    }
    let t_bloch = 2.0 * PI / lat.force;
    let report = classify_regime(lat, qb)?;
    if report.regime == Regime::StrongForce {
        let n_c = (qb.omega0 / lat.force).round() as i64;
        let omega = rabi_frequency(lat, qb, n_c)?;
        if omega > 0.0 {
            let period = 2.0 * PI / omega;
            return Ok((3.0 * period, period / SAMPLES_PER_RABI));
        }
    }
    Ok((2.0 * t_bloch, t_bloch / SAMPLES_PER_BLOCH))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_defaults() {
        let pts = resolve(&ExperimentConfig::preset("weakforce"), None).unwrap();
        assert_eq!(pts.len(), 2);
        let tb = 2.0 * PI / 1e-3;
        assert!((pts[0].t_max - 2.0 * tb).abs() < 1e-9);
        assert!((pts[0].dt_out - tb / 400.0).abs() < 1e-12);
        assert_eq!(pts[0].lattice.sites, 8201);
        assert_eq!(pts[1].qubit.omega0, -1.0);
        assert_ne!(pts[0].dir(), pts[1].dir());

        let m = resolve(&ExperimentConfig::preset("markov"), None).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].lattice.sites, 441);
        assert_eq!(m[0].dir(), PathBuf::from("out"));

        let r = resolve(&ExperimentConfig::preset("rabi"), None).unwrap();
        let omega = 2.0 * 0.01 * stark_qed_core::specfun::bessel_j(0, 4.0).unwrap().abs();
        assert!((r[0].t_max - 3.0 * 2.0 * PI / omega).abs() < 1e-9 * r[0].t_max);
    }

    #[test]
    fn overrides_collapse_points() {
        let mut cfg = ExperimentConfig::preset("rabi");
        cfg.omega0 = Some(1.5);
        cfg.sites = Some(301);
        let pts = resolve(&cfg, Some(&PathBuf::from("elsewhere"))).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].lattice.sites, 301);
        assert!(!pts[0].auto_size);
        assert_eq!(pts[0].dir(), PathBuf::from("elsewhere"));
    }

    #[test]
    fn validation_fails_fast() {
        assert!(matches!(resolve(&ExperimentConfig::preset("nope"), None), Err(RunError::Validation(_))));
        assert!(matches!(resolve(&ExperimentConfig::preset("single"), None), Err(RunError::Validation(_))));
        let mut cfg = ExperimentConfig::preset("markov");
        cfg.sites = Some(40);
        assert!(resolve(&cfg, None).is_err());
        let mut cfg = ExperimentConfig::preset("markov");
        cfg.n0 = Some(10_000);
        cfg.auto_size = Some(false);
        cfg.sites = Some(101);
        assert!(resolve(&cfg, None).is_err());
        let mut cfg = ExperimentConfig::preset("markov");
        cfg.dt_out = Some(100.0);
        assert!(resolve(&cfg, None).is_err());
    }
}
