use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gabor_cli::{run, threads_from_env, Command, Invocation, MethodChoice, Overrides, EXIT_INPUT};

#[derive(Parser)]
#[command(name = "gabor-bf", version, about = "Projection functionals and boundary forms of Gabor localization operators")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(clap::Args, Clone)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// PF method: double_sum, eigen or both.
    #[arg(long)]
    method: Option<MethodChoice>,
    /// Primary tolerance of the command.
    #[arg(long)]
    tol: Option<f64>,
    /// Largest kernel radius.
    #[arg(long)]
    radius: Option<f64>,
    /// Comma-separated dilation factors.
    #[arg(long = "Rs", value_delimiter = ',')]
    rs: Option<Vec<i64>>,
}

#[derive(Subcommand)]
enum Sub {
    /// Tightness, norm law, frame identity and condition Phi of the window.
    FrameVerify(Common),
    /// Projection functional of the dilated domains.
    Pf(Common),
    /// Boundary form with per-segment contributions.
    Bf(Common),
    /// PF/R against BF/A over the configured dilations, with a plot.
    Converge(Common),
    /// Boundary form and PF under symplectic changes of the lattice.
    Invariance(Common),
    /// Lattice slopes of the line y = (m/n) x.
    Slopes { m: i64, n: i64 },
}

fn invocation(sub: Sub) -> Invocation {
    let (command, common) = match sub {
        Sub::FrameVerify(c) => (Command::FrameVerify, Some(c)),
        Sub::Pf(c) => (Command::Pf, Some(c)),
        Sub::Bf(c) => (Command::Bf, Some(c)),
        Sub::Converge(c) => (Command::Converge, Some(c)),
        Sub::Invariance(c) => (Command::Invariance, Some(c)),
        Sub::Slopes { m, n } => (Command::Slopes { m, n }, None),
    };
    match common {
        Some(c) => Invocation {
            command,
            config: Some(c.config),
            overrides: Overrides { out: c.out, method: c.method, tol: c.tol, radius: c.radius, rs: c.rs },
        },
        None => Invocation { command, config: None, overrides: Overrides::default() },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT as u8 } else { 0 });
        }
    };
    let inv = invocation(cli.command);
    let result = threads_from_env().and_then(|threads| run(&inv, threads));
    match result {
        Ok(outcome) => {
            for line in &outcome.messages {
                println!("{line}");
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            if !outcome.passed {
                eprintln!("tolerance check failed");
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
