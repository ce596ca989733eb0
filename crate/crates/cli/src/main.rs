//! `osmx`: command-line driver for the optimized Schwarz Helmholtz solver.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use osmx_core::impedance::ImpedanceKind;
use osmx_core::mesh::{detect_cross_points, write_msh, write_owner_file};
use osmx_core::study::{self, RunConfig, SweepAxis};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "osmx", version, about = "Optimized Schwarz domain decomposition for 2D Helmholtz problems")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set kappa=5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the disk mesh (or load the configured mesh file) and write it as MSH 2.2.
    Mesh {
        #[arg(long)]
        out: PathBuf,
    },
    /// Partition the mesh and write one 1-based owner per line.
    Partition {
        #[arg(long)]
        out: PathBuf,
    },
    /// Direct solve of the undecomposed problem plus the unpreconditioned GMRES baseline.
    Direct {
        /// Reference solution file (binary).
        #[arg(long)]
        out: PathBuf,
    },
    /// Decomposed solve; exits with status 2 when the iteration cap is hit.
    Solve {
        /// Reference solution written by `direct`; computed on the fly when absent.
        #[arg(long)]
        reference: Option<PathBuf>,
        /// History CSV; stdout when absent.
        #[arg(long)]
        history: Option<PathBuf>,
    },
    /// Iteration counts over one parameter axis.
    Sweep {
        /// n_lambda, kappa, j, j_weak or mu_r.
        #[arg(long)]
        axis: SweepAxis,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "M,K,W,Lambda")]
        impedances: Vec<ImpedanceKind>,
        /// Add undecomposed GMRES rows (impedance `none`).
        #[arg(long)]
        baseline: bool,
        /// Summary CSV; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dense inf-sup constant, impedance bounds and Richardson rate bound per impedance.
    Diagnostics {
        #[arg(long, value_delimiter = ',', default_value = "M,K,W,Lambda")]
        impedances: Vec<ImpedanceKind>,
        /// Diagnostics CSV; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(common: &Common) -> Result<RunConfig> {
    let mut config = match &common.config {
        Some(path) => RunConfig::from_file(path).with_context(|| format!("reading {}", path.display()))?,
        None => RunConfig::default(),
    };
    for o in &common.overrides {
        config.apply_override(o)?;
    }
    config.validate()?;
    Ok(config)
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<ExitCode> {
    let config = load_config(&cli.common)?;
    match cli.command {
        Command::Mesh { out } => {
            let mesh = study::build_mesh(&config)?;
            std::fs::write(&out, write_msh(&mesh))?;
            eprintln!(
                "{} nodes, {} triangles, max edge {:.4} -> {}",
                mesh.num_nodes(),
                mesh.num_triangles(),
                mesh.max_edge_length(),
                out.display()
            );
        }
        Command::Partition { out } => {
            let mesh = study::build_mesh(&config)?;
            let partition = study::build_partition(&config, &mesh)?;
            write_owner_file(&out, &partition)?;
            let cross = detect_cross_points(&mesh, &partition);
            eprintln!(
                "subdomain sizes {:?}; {} interior and {} boundary cross-points -> {}",
                partition.subdomain_sizes(),
                cross.interior_cross_points.len(),
                cross.boundary_cross_points.len(),
                out.display()
            );
        }
        Command::Direct { out } => {
            let report = study::run_direct(&config)?;
            study::write_reference(&out, &report.solution)?;
            println!("residual,gmres_iterations,gmres_converged");
            println!("{:e},{},{}", report.residual, report.gmres_iterations, report.gmres_converged);
            if !report.gmres_converged {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Solve { reference, history } => {
            let reference = match &reference {
                Some(p) => Some(study::read_reference(p).with_context(|| format!("reading {}", p.display()))?),
                None => None,
            };
            let report = study::run_solve(&config, reference)?;
            study::write_history_csv(sink(history.as_deref())?, &report.history)?;
            eprintln!(
                "{} after {} iterations, relative error {:e}",
                if report.converged { "converged" } else { "iteration cap hit" },
                report.iterations,
                report.final_error
            );
            if !report.converged {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Sweep { axis, values, impedances, baseline, out } => {
            if values.is_empty() {
                bail!("--values needs at least one entry");
            }
            let rows = study::run_sweep(&config, axis, &values, &impedances, baseline)?;
            study::write_summary_csv(sink(out.as_deref())?, &rows)?;
            if rows.iter().any(|r| !r.converged) {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Diagnostics { impedances, out } => {
            let rows = study::run_diagnostics(&config, &impedances)?;
            study::write_diagnostics_csv(sink(out.as_deref())?, &rows)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
