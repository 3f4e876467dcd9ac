use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stark_qed::{resolve, run_all, seedcheck, ExperimentConfig, RunError, PRESETS};

#[derive(Parser)]
#[command(name = "stark-qed", version, about = "Qubit emission into a coupled-cavity array under a synthetic force")]
struct Cli {
    /// Output directory, overriding `out_dir` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Run the invariant self-test suite and exit.
    #[arg(long)]
    seedcheck: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file (or a preset name).
    Run { config: String },
    /// Compare simulation, delay equation and return times.
    Crossval { config: String },
    /// List the built-in experiments.
    Presets,
}

fn load(arg: &str) -> Result<ExperimentConfig, RunError> {
    let path = PathBuf::from(arg);
    if path.exists() {
        ExperimentConfig::load(&path)
    } else if PRESETS.iter().any(|p| p.name == arg) {
        Ok(ExperimentConfig::preset(arg))
    } else {
        Err(RunError::io(&path, std::io::Error::new(std::io::ErrorKind::NotFound, "no such config file or preset")))
    }
}

fn fail(e: &RunError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();

    if cli.seedcheck {
        let checks = seedcheck::run();
        for c in &checks {
            println!("{} {:<28} {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        return if checks.iter().all(|c| c.pass) { ExitCode::SUCCESS } else { ExitCode::from(2) };
    }

    match cli.command {
        None => {
            eprintln!("nothing to do; see --help");
            ExitCode::from(1)
        }
        Some(Command::Presets) => {
            for p in PRESETS {
                println!("{:<12} {}", p.name, p.summary);
            }
            ExitCode::SUCCESS
        }
        Some(Command::Run { config }) => {
            let points = match load(&config).and_then(|c| resolve(&c, cli.out.as_ref())) {
                Ok(p) => p,
                Err(e) => return fail(&e),
            };
            let mut worst: Option<RunError> = None;
            for (point, result) in points.iter().zip(run_all(&points)) {
                match result {
                    Ok(m) => {
                        println!("{}: wrote {} files to {}", point.experiment, m.files.len(), point.dir().display())
                    }
                    Err(e) => {
                        eprintln!("{} {}: {e}", point.experiment, point.label);
                        if worst.as_ref().is_none_or(|w| e.exit_code() > w.exit_code()) {
                            worst = Some(e);
                        }
                    }
                }
            }
            match worst {
                Some(e) => ExitCode::from(e.exit_code() as u8),
                None => ExitCode::SUCCESS,
            }
        }
        Some(Command::Crossval { config }) => {
            let points = match load(&config).and_then(|c| resolve(&c, cli.out.as_ref())) {
                Ok(p) => p,
                Err(e) => return fail(&e),
            };
            let mut status = ExitCode::SUCCESS;
            for point in &points {
                match stark_qed::crossval_point(point) {
                    Ok(r) => {
                        println!(
                            "{} {}: rms |alpha| difference {:.4} ({})",
                            point.experiment,
                            point.label,
                            r.rms_abs_alpha,
                            if r.rms_pass { "pass" } else { "FAIL" }
                        );
                        for c in &r.revivals {
                            println!(
                                "  return at {:.1}: detected {} ({})",
                                c.predicted,
                                c.detected.map(|t| format!("{t:.1}")).unwrap_or_else(|| "none".into()),
                                if c.pass { "pass" } else { "FAIL" }
                            );
                        }
                    }
                    Err(e) => {
                        eprint!("{} {}: ", point.experiment, point.label);
                        status = fail(&e);
                    }
                }
            }
            status
        }
    }
}
