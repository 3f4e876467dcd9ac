//! CSV tables and the run manifest.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{RunError, RunResult};
use crate::presets::RunPoint;

pub const QUBIT_POPULATION: &str = "qubit_population.csv";
pub const SITE_DENSITY: &str = "site_density.csv";
pub const MOMENTUM_DENSITY: &str = "momentum_density.csv";
pub const ENERGY_MOMENTUM: &str = "energy_momentum.csv";
pub const RETURNS: &str = "returns.csv";
pub const KERNEL: &str = "kernel.csv";
pub const DDE: &str = "dde.csv";
pub const CROSSVAL: &str = "crossval.csv";
pub const CROSSVAL_REPORT: &str = "crossval.json";
pub const MANIFEST: &str = "manifest.json";

/// Frame tables keep at most this many time slices.
pub const MAX_FRAMES: usize = 100;
/// Densities below this are left out of frame tables.
pub const DENSITY_FLOOR: f64 = 1e-12;

/// CSV table with a single header row.
pub struct Table {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
}

impl Table {
    pub fn create(dir: &Path, name: &str, header: &[&str]) -> RunResult<Self> {
        let path = dir.join(name);
        let file = File::create(&path).map_err(|e| RunError::io(&path, e))?;
        let mut writer = csv::Writer::from_writer(BufWriter::new(file));
        writer.write_record(header).map_err(|e| csv_err(&path, e))?;
        Ok(Table { path, writer })
    }

    pub fn row<I, T>(&mut self, fields: I) -> RunResult<()>
    where
        I: IntoIterator<Item = T>,
        T: Field,
    {
        let record: Vec<String> = fields.into_iter().map(|f| f.render()).collect();
        self.writer.write_record(&record).map_err(|e| csv_err(&self.path, e))
    }

    pub fn finish(mut self) -> RunResult<PathBuf> {
        self.writer.flush().map_err(|e| RunError::io(&self.path, e))?;
        Ok(self.path)
    }
}

fn csv_err(path: &Path, e: csv::Error) -> RunError {
    RunError::io(path, std::io::Error::other(e.to_string()))
}

/// Cell formatting: shortest round-trip representation for floats.
pub trait Field {
    fn render(&self) -> String;
}

impl Field for f64 {
    fn render(&self) -> String {
        format!("{self:e}")
    }
}

impl Field for i64 {
    fn render(&self) -> String {
        self.to_string()
    }
}

impl Field for usize {
    fn render(&self) -> String {
        self.to_string()
    }
}

/// Mixed integer/float rows.
#[derive(Clone, Copy)]
pub enum Cell {
    I(i64),
    F(f64),
}

impl Field for Cell {
    fn render(&self) -> String {
        match self {
            Cell::I(i) => i.render(),
            Cell::F(x) => x.render(),
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ResolvedConfig {
    pub experiment: String,
    pub point: String,
    #[serde(rename = "F")]
    pub force: f64,
    pub g: f64,
    pub omega0: f64,
    pub n0: i64,
    #[serde(rename = "N")]
    pub sites: usize,
    pub auto_size: bool,
    pub t_max: f64,
    pub dt_out: f64,
    pub method: String,
    pub out_dir: String,
}

/// Derived scales; `None` where undefined (no force).
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ManifestScales {
    pub xi: Option<f64>,
    pub t_bloch: Option<f64>,
    pub gamma: f64,
    pub gbar: Option<f64>,
    pub gamma_t_bloch: Option<f64>,
    pub regime: String,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RunManifest {
    pub config: ResolvedConfig,
    pub scales: ManifestScales,
    pub version: String,
    pub files: Vec<String>,
    /// Informational only; the data files do not depend on it.
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn new(point: &RunPoint, files: Vec<String>, wall_clock_seconds: f64) -> Self {
        let s = point.scales();
        let finite = |x: f64| if x.is_finite() { Some(x) } else { None };
        let forced = point.lattice.force > 0.0;
        RunManifest {
            config: ResolvedConfig {
                experiment: point.experiment.clone(),
                point: point.label.clone(),
                force: point.lattice.force,
                g: point.qubit.coupling,
                omega0: point.qubit.omega0,
                n0: point.lattice.qubit_site,
                sites: point.lattice.sites,
                auto_size: point.auto_size,
                t_max: point.t_max,
                dt_out: point.dt_out,
                method: match point.method {
                    stark_qed_core::Method::Eigen => "eigen".into(),
                    stark_qed_core::Method::Chebyshev => "chebyshev".into(),
                },
                out_dir: point.dir().display().to_string(),
            },
            scales: ManifestScales {
                xi: finite(s.xi),
                t_bloch: finite(s.t_bloch),
                gamma: s.gamma,
                gbar: if forced { Some(s.gbar) } else { None },
                gamma_t_bloch: if forced { finite(s.ratio) } else { None },
                regime: point.regime().map(|r| r.label().to_string()).unwrap_or_else(|| "no-force".into()),
            },
            version: env!("CARGO_PKG_VERSION").to_string(),
            files,
            wall_clock_seconds,
        }
    }

    pub fn write(&self, dir: &Path) -> RunResult<PathBuf> {
        let path = dir.join(MANIFEST);
        let text = serde_json::to_string_pretty(self).map_err(|e| RunError::io(&path, e.into()))?;
        let mut f = File::create(&path).map_err(|e| RunError::io(&path, e))?;
        f.write_all(text.as_bytes()).and_then(|_| f.write_all(b"\n")).map_err(|e| RunError::io(&path, e))?;
        Ok(path)
    }
}

/// Frame stride so that at most [`MAX_FRAMES`] of `samples` are written.
pub fn frame_stride(samples: usize) -> usize {
    samples.div_ceil(MAX_FRAMES).max(1)
}
