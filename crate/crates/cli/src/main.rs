use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gaussnm_cli::check::oracle_equivalence;
use gaussnm_cli::{execute, preset, CliError, CliResult, Overrides, StateKind, PRESETS};
use gaussnm_core::channels::CPTP_TOL;
use gaussnm_core::{entanglement_ppt, ghz_w_state, steerability, two_mode_squeezed};
use gaussnm_core::{Bipartition, Direction, GaussianChannel};

/// Steering and entanglement backflows as witnesses of non-Markovian Gaussian dynamics.
#[derive(Parser)]
#[command(name = "gaussnm", version)]
struct Cli {
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true, value_name = "K")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunFlags {
    /// Output directory; overrides `output.dir`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Number of uniform grid samples; overrides `grid.samples`.
    #[arg(long, value_name = "N")]
    grid: Option<usize>,

    /// Override a `tolerances.*` entry, e.g. `--tol-override backflow=1e-8`.
    #[arg(long = "tol-override", value_name = "KEY=VAL", value_parser = parse_key_val)]
    tol_override: Vec<(String, String)>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML config file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Run one of the shipped figure presets.
    Reproduce {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(PRESETS.map(|p| p.0)))]
        figure: String,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Evaluate both witnesses once after a local lossy channel on Alice's first mode.
    Witness {
        #[arg(long, value_enum, default_value = "two-mode")]
        state: StateArg,
        #[arg(long, default_value_t = 2.0)]
        r: f64,
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        #[arg(long, default_value_t = 0.0)]
        eta: f64,
    },
    /// Compare closed-form symplectic eigenvalues with the numeric pipeline.
    Check,
}

#[derive(Clone, Copy, ValueEnum)]
enum StateArg {
    TwoMode,
    ThreeMode,
}

fn parse_key_val(s: &str) -> Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected KEY=VAL, got `{s}`"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

impl From<RunFlags> for Overrides {
    fn from(f: RunFlags) -> Self {
        Overrides {
            out: f.out,
            samples: f.grid,
            tolerances: f.tol_override,
        }
    }
}

fn run_text(text: &str, flags: RunFlags) -> CliResult<()> {
    let (bundle, files) = execute(text, &flags.into())?;
    for line in bundle.summary() {
        println!("{line}");
    }
    println!("wrote {} trace(s) to {}", files.len(), bundle.config.output_dir.display());
    Ok(())
}

fn witness(state: StateArg, r: f64, tau: f64, eta: f64) -> CliResult<()> {
    let numerical = |source| CliError::Numerical {
        context: format!("witness r={r} tau={tau} eta={eta}"),
        source,
    };
    let mut problems = Vec::new();
    if !(r >= 0.0 && r.is_finite()) {
        problems.push(format!("r must be finite and non-negative, got {r}"));
    }
    if !(tau.is_finite() && eta.is_finite() && eta >= 0.0) {
        problems.push(format!("tau must be finite and eta non-negative, got tau={tau} eta={eta}"));
    }
    if !problems.is_empty() {
        return Err(CliError::Validation(problems));
    }
    let (sigma, part, kind) = match state {
        StateArg::TwoMode => (two_mode_squeezed(r), Bipartition::new(1, 1), StateKind::TwoMode),
        StateArg::ThreeMode => (ghz_w_state(r), Bipartition::new(2, 1), StateKind::ThreeMode),
    };
    let (sigma, part) = (sigma.map_err(numerical)?, part.map_err(numerical)?);
    let ch = GaussianChannel::isotropic(tau, eta).map_err(numerical)?;
    if !ch.is_cptp(CPTP_TOL) {
        return Err(CliError::Validation(vec![format!(
            "channel (tau={tau}, eta={eta}) is not CPTP: need eta >= |1 - tau^2|"
        )]));
    }
    let out = ch.embed_local(sigma.modes(), 0).and_then(|c| c.apply(&sigma)).map_err(numerical)?;
    let g = steerability(&out, part, Direction::AToB).map_err(numerical)?;
    let e = entanglement_ppt(&out, part).map_err(numerical)?;
    println!("state          {kind} r={r}");
    println!("channel        tau={tau} eta={eta} gib={} eb={}", ch.is_gib(CPTP_TOL), ch.is_eb().map_err(numerical)?);
    println!("steering_AB    {g}");
    println!("entanglement   {e}");
    Ok(())
}

fn check() -> CliResult<()> {
    let report = oracle_equivalence().map_err(|source| CliError::Numerical {
        context: "oracle sweep".into(),
        source,
    })?;
    let (kind, r, tau, eta) = report.worst;
    println!(
        "{} points, max |closed form - pipeline| = {:.3e} at {kind} r={r} tau={tau} eta={eta}",
        report.points, report.max_deviation
    );
    if report.passed() {
        println!("PASS");
        Ok(())
    } else {
        println!("FAIL");
        Err(CliError::Numerical {
            context: "oracle sweep".into(),
            source: gaussnm_core::Error::Consistency {
                t: 0.0,
                deviation: report.max_deviation,
                tolerance: gaussnm_cli::check::ORACLE_TOL,
            },
        })
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(k) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: cannot configure {k} threads: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Run { config, flags } => std::fs::read_to_string(&config)
            .map_err(|source| CliError::Io { path: config, source })
            .and_then(|text| run_text(&text, flags)),
        Command::Reproduce { figure, flags } => {
            run_text(preset(&figure).expect("clap restricts the figure names"), flags)
        }
        Command::Witness { state, r, tau, eta } => witness(state, r, tau, eta),
        Command::Check => check(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
