use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use poro::runner::{execute, load_config};

#[derive(Parser)]
#[command(name = "poro", version, about = "Biot poroelasticity: convergence studies and the edema scenario")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Convergence study of a manufactured problem under mesh halving.
    Convergence {
        #[arg(long)]
        problem: Option<String>,
        #[arg(long)]
        theta: Option<String>,
        /// Coarsest mesh size, e.g. `1/2`.
        #[arg(long)]
        h_max: Option<String>,
        #[arg(long)]
        levels: Option<String>,
        /// `h^2`, `T/<n>` or a number.
        #[arg(long)]
        dt: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Normal-brain equilibrium followed by the injury run.
    Edema {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Injury runs over E, nu or K.
    Sweep {
        /// `E`, `nu` or `K`.
        #[arg(long)]
        param: Option<String>,
        /// Multipliers for E and K, absolute values for nu.
        #[arg(long)]
        multipliers: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<String>,
    },
    /// One solve of a manufactured problem with field output.
    Run {
        #[arg(long)]
        problem: Option<String>,
        #[arg(long)]
        h: Option<String>,
        #[arg(long)]
        dt: Option<String>,
        #[arg(long)]
        theta: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<String>,
    },
}

fn push(o: &mut Vec<(&'static str, String)>, key: &'static str, v: Option<String>) {
    if let Some(v) = v {
        o.push((key, v));
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let mut o: Vec<(&'static str, String)> = Vec::new();
    let config = match cli.command {
        Cmd::Convergence {
            problem,
            theta,
            h_max,
            levels,
            dt,
            config,
            out,
        } => {
            o.push(("command", "convergence".into()));
            push(&mut o, "problem", problem);
            push(&mut o, "theta", theta);
            push(&mut o, "h_max", h_max);
            push(&mut o, "levels", levels);
            push(&mut o, "dt", dt);
            push(&mut o, "out", out);
            config
        }
        Cmd::Edema { config, out } => {
            o.push(("command", "edema".into()));
            push(&mut o, "out", out);
            config
        }
        Cmd::Sweep {
            param,
            multipliers,
            config,
            out,
        } => {
            o.push(("command", "sweep".into()));
            push(&mut o, "sweep.param", param);
            push(&mut o, "sweep.values", multipliers);
            push(&mut o, "out", out);
            config
        }
        Cmd::Run {
            problem,
            h,
            dt,
            theta,
            config,
            out,
        } => {
            o.push(("command", "run".into()));
            o.push(("export_vtk", "true".into()));
            push(&mut o, "problem", problem);
            push(&mut o, "h", h);
            push(&mut o, "dt", dt);
            push(&mut o, "theta", theta);
            push(&mut o, "out", out);
            config
        }
    };
    let result = load_config(config.as_deref(), &o).and_then(|cfg| execute(&cfg));
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
