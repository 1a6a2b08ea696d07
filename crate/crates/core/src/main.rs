use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use singlet_frame::harness::commands::parse_tally;
use singlet_frame::harness::{
    bayes_from_input, mi_curve_csv, mi_surface_csv, posterior_family_csv, run_experiment, sidecar_path,
    to_json, write_atomic, BayesInput, ExperimentConfig, FamilyPreset, HarnessError, HarnessResult, Mode,
    OUT_DIR_ENV,
};

/// Reference-frame transfer with shared singlet pairs.
#[derive(Parser, Debug)]
#[command(name = "singlet-frame", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct OutArg {
    /// Output file; defaults to a fixed name in $SINGLET_FRAME_OUT_DIR or the
    /// working directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mutual information against relative angle, as CSV.
    MiCurve {
        #[arg(long, default_value_t = 1001)]
        resolution: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Mutual information over Bob's sphere for a fixed Alice setting, as CSV.
    MiSurface {
        #[arg(long, default_value_t = 1.5)]
        theta_x: f64,
        #[arg(long, default_value_t = 2.1)]
        phi_x: f64,
        /// Polar-angle grid size; the azimuth gets twice as many points.
        #[arg(long, default_value_t = 91)]
        resolution: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Posterior densities in the relative angle for a family of tallies, as CSV.
    PosteriorFamily {
        /// Comma-separated `P:M` tallies, e.g. `5:6,10:12`. Overrides --preset.
        #[arg(long, value_delimiter = ',')]
        tallies: Vec<String>,
        #[arg(long, value_enum, default_value_t = FamilyPreset::Ratio)]
        preset: FamilyPreset,
        #[arg(long, default_value_t = 2001)]
        resolution: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Run a transfer experiment from a config file and write a JSON report.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config's mode.
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Posterior summary for a tally or a recorded outcome sequence, as JSON.
    Bayes {
        /// Inline tally `P:M`.
        #[arg(long, conflicts_with = "record", required_unless_present = "record")]
        tally: Option<String>,
        /// Outcome record: CSV with header `index,a,b`, or JSON.
        #[arg(long)]
        record: Option<PathBuf>,
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        #[command(flatten)]
        out: OutArg,
    },
}

fn output_path(out: &OutArg, default_name: &str) -> PathBuf {
    out.out.clone().unwrap_or_else(|| match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) => Path::new(&dir).join(default_name),
        None => PathBuf::from(default_name),
    })
}

fn emit(path: &Path, contents: &str, command: &str, started: Instant) -> HarnessResult<()> {
    write_atomic(path, contents.as_bytes())?;
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let log = format!(
        "command={command}\noutput={}\nfinished_unix={stamp}\nwall_seconds={:.6}\n",
        path.display(),
        started.elapsed().as_secs_f64()
    );
    write_atomic(&sidecar_path(path), log.as_bytes())
}

fn execute(cli: Cli) -> HarnessResult<PathBuf> {
    let started = Instant::now();
    match cli.command {
        Command::MiCurve { resolution, out } => {
            let path = output_path(&out, "mi_curve.csv");
            emit(&path, &mi_curve_csv(resolution)?, "mi-curve", started)?;
            Ok(path)
        }
        Command::MiSurface {
            theta_x,
            phi_x,
            resolution,
            out,
        } => {
            let path = output_path(&out, "mi_surface.csv");
            emit(&path, &mi_surface_csv(theta_x, phi_x, resolution)?, "mi-surface", started)?;
            Ok(path)
        }
        Command::PosteriorFamily {
            tallies,
            preset,
            resolution,
            out,
        } => {
            let tallies = if tallies.is_empty() {
                preset.tallies()
            } else {
                tallies.iter().map(|t| parse_tally(t)).collect::<HarnessResult<_>>()?
            };
            let path = output_path(&out, "posterior_family.csv");
            emit(&path, &posterior_family_csv(&tallies, resolution)?, "posterior-family", started)?;
            Ok(path)
        }
        Command::Run {
            config,
            seed,
            mode,
            out,
        } => {
            let text = std::fs::read_to_string(&config).map_err(|source| HarnessError::Io {
                path: config.clone(),
                source,
            })?;
            let mut cfg = ExperimentConfig::from_toml(&text, &config.display().to_string())?;
            if let Some(seed) = seed {
                cfg.seed = Some(seed);
            }
            if let Some(mode) = mode {
                cfg.mode = mode;
            }
            let report = run_experiment(&cfg)?;
            let path = out
                .out
                .clone()
                .or_else(|| cfg.output.report.clone())
                .unwrap_or_else(|| output_path(&out, "run_report.json"));
            emit(&path, &to_json(&report), "run", started)?;
            Ok(path)
        }
        Command::Bayes {
            tally,
            record,
            level,
            out,
        } => {
            let input = match (tally, record) {
                (Some(t), _) => BayesInput::Tally(parse_tally(&t)?),
                (None, Some(p)) => BayesInput::RecordFile(p),
                (None, None) => return Err(HarnessError::validation("tally", "give --tally or --record")),
            };
            let summary = bayes_from_input(&input, level)?;
            let path = output_path(&out, "posterior_summary.json");
            emit(&path, &to_json(&summary), "bayes", started)?;
            Ok(path)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(path) => {
            println!("{}", path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
