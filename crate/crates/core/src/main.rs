use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sedkit::app::{self, DispatchInput, ExperimentConfig, Output};
use sedkit::error::{Error, Result};

#[derive(Parser)]
#[command(
    name = "sedkit",
    version,
    about = "Stochastic economic dispatch with polynomial chaos"
)]
struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Overrides the configured output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the annotated configuration schema and exit.
    #[arg(long)]
    print_schema: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// KL bases and diagnostics from wind data.
    Kl,
    /// Write synthetic 10-minute wind files.
    SynthWind,
    /// Sample renewable power scenarios.
    Scenarios {
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Binary output instead of CSV.
        #[arg(long)]
        binary: bool,
    },
    /// Solve one dispatch.
    Dispatch {
        /// Comma-separated germ; defaults to the mean forecast.
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            conflicts_with = "scenarios"
        )]
        germ: Option<Vec<f64>>,
        /// Binary scenario file.
        #[arg(long, requires = "index")]
        scenarios: Option<PathBuf>,
        /// Scenario index within the file.
        #[arg(long)]
        index: Option<usize>,
        /// Also write the assembled LP.
        #[arg(long)]
        dump_lp: bool,
    },
    /// PCE versus Monte Carlo convergence study.
    Study {
        /// Check the report invariants before writing.
        #[arg(long)]
        verify: bool,
    },
}

fn run(cli: Cli) -> Result<()> {
    if cli.print_schema {
        print!("{}", app::SCHEMA);
        return Ok(());
    }
    let Some(command) = cli.command else {
        return Err(Error::config("no command given (see --help)"));
    };
    let path = cli.config.ok_or_else(|| Error::config("--config is required"))?;
    let mut cfg = ExperimentConfig::load(&path)?;
    let text = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out_dir = cli.out.unwrap_or_else(|| cfg.resolve(&cfg.out));
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Error::config("--jobs must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Error::config(format!("thread pool: {e}")))?;
    }
    let mut out = Output::create(&out_dir)?;
    let name = match command {
        Command::Kl => {
            app::kl(&cfg, &mut out)?;
            "kl"
        }
        Command::SynthWind => {
            app::synth_wind(&cfg, &mut out)?;
            "synth-wind"
        }
        Command::Scenarios { count, binary } => {
            app::scenarios(&cfg, &mut out, count, binary)?;
            "scenarios"
        }
        Command::Dispatch {
            germ,
            scenarios,
            index,
            dump_lp,
        } => {
            let input = match scenarios {
                Some(path) => DispatchInput::Scenario {
                    path,
                    index: index.unwrap_or(0),
                },
                None => DispatchInput::Germ(germ),
            };
            let sol = app::dispatch(&cfg, &mut out, input, dump_lp)?;
            println!("{} objective {:.6}", sol.status, sol.objective);
            "dispatch"
        }
        Command::Study { verify } => {
            app::study(&cfg, &mut out, verify)?;
            "study"
        }
    };
    for f in out.finish(name, &app::digest(&text), cfg.seed)? {
        log::info!("wrote {}", out_dir.join(f).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
