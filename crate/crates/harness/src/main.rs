use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use robust_send_harness::bounds::{check_cost_bounds, fit_headline, DEFAULT_HEADLINE, FIT_MARGIN};
use robust_send_harness::config::ExperimentConfig;
use robust_send_harness::replay::replay_transcript;
use robust_send_harness::sweep::{read_csv, run_sweep, run_trial, summarize, TrialSpec};
use robust_send_harness::validate::{validate_alternation_bound, MIN_BITS};

#[derive(Parser)]
#[command(
    name = "robust-send",
    version,
    about = "Simulate and measure the robust-send protocol"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single trial and print its report.
    Run {
        #[command(flatten)]
        grid: GridArgs,
        /// Write the channel transcript here.
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Run a grid of trials and write one CSV row per trial.
    Sweep {
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Fit the headline constants on a grid.
    Fit {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = FIT_MARGIN)]
        margin: f64,
    },
    /// Monte Carlo check of the alternation bound for random strings.
    Validate {
        #[arg(long, value_delimiter = ',', default_values_t = vec![71usize, 100, 150])]
        bits: Vec<usize>,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Regenerate the transcript of one row of a sweep CSV.
    Replay {
        /// Sweep CSV to read.
        #[arg(long)]
        csv: PathBuf,
        /// Zero-based row index.
        #[arg(long)]
        row: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct GridArgs {
    /// Flat `key = value` file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "L", value_delimiter = ',')]
    lengths: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    delta: Option<Vec<f64>>,
    /// `name` or `name:param`, comma separated.
    #[arg(long)]
    adversary: Option<String>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_rounds: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use the two-phase run for a receiver that does not know L.
    #[arg(long)]
    unknown_length: bool,
}

impl GridArgs {
    fn resolve(&self) -> Result<ExperimentConfig, String> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            cfg.apply_file(&text).map_err(|e| e.to_string())?;
        }
        if let Some(l) = &self.lengths {
            cfg.lengths = l.clone();
        }
        if let Some(d) = &self.delta {
            cfg.deltas = d.clone();
        }
        if let Some(a) = &self.adversary {
            cfg.set("adversary", a).map_err(|e| e.to_string())?;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if self.max_rounds.is_some() {
            cfg.max_rounds = self.max_rounds;
        }
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        cfg.unknown_length |= self.unknown_length;
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

fn run_one(grid: &GridArgs, transcript: Option<&PathBuf>) -> Result<(), String> {
    let cfg = grid.resolve()?;
    let spec = TrialSpec {
        message_len: cfg.lengths[0],
        delta: cfg.deltas[0],
        adversary: cfg.adversaries[0],
        seed: cfg.seed,
        unknown_length: cfg.unknown_length,
        max_rounds: cfg.max_rounds,
    };
    let report = run_trial(&spec, transcript.is_some()).map_err(|e| e.to_string())?;
    print!("adversary={}\n{}", spec.adversary, report.to_key_values());
    if let (Some(path), Some(steps)) = (transcript, &report.transcript) {
        let text = robust_send::channel::export_transcript(steps);
        fs::write(path, text).map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn sweep(grid: &GridArgs) -> Result<bool, String> {
    let cfg = grid.resolve()?;
    let result = run_sweep(&cfg, &DEFAULT_HEADLINE).map_err(|e| e.to_string())?;
    println!("L,delta,adversary,trials,failures,aborted,failureRate,threshold,meanSent,meanT");
    let mut ok = true;
    for c in summarize(&result.rows) {
        ok &= c.within_delta();
        println!(
            "{},{},{},{},{},{},{:.4},{:.4},{:.1},{:.1}",
            c.message_len,
            c.delta,
            c.adversary,
            c.trials,
            c.failures,
            c.aborted,
            c.failure_rate(),
            c.failure_threshold(),
            c.mean_sent,
            c.mean_flips
        );
    }
    let bounds = check_cost_bounds(&result.rows, &DEFAULT_HEADLINE);
    for v in &bounds.violations {
        eprintln!(
            "bound violation ({:?}): seed {} L={} delta={} adversary={} sent {} > {:.0}",
            v.kind,
            v.row.seed,
            v.row.message_len,
            v.row.delta,
            v.row.adversary,
            v.row.total_sent,
            v.limit
        );
    }
    eprintln!(
        "{} rows, {} bound violations",
        bounds.checked,
        bounds.violations.len()
    );
    Ok(ok && bounds.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run { grid, transcript } => run_one(grid, transcript.as_ref()).map(|_| true),
        Command::Sweep { grid } => sweep(grid),
        Command::Fit { grid, margin } => (|| {
            let cfg = grid.resolve()?;
            let result = run_sweep(&cfg, &DEFAULT_HEADLINE).map_err(|e| e.to_string())?;
            let c = fit_headline(&result.rows, *margin);
            println!("c1={}\nc2={}\nc3={}", c.c1, c.c2, c.c3);
            Ok(true)
        })(),
        Command::Validate {
            bits,
            samples,
            seed,
        } => {
            if let Some(b) = bits.iter().find(|&&b| b < MIN_BITS) {
                eprintln!("warning: the bound is only claimed for b >= {MIN_BITS} (got {b})");
            }
            let results = validate_alternation_bound(bits, *samples, *seed);
            println!("b,samples,silent,fraction,bound,pass");
            for r in &results {
                println!(
                    "{},{},{},{:.6},{:.6},{}",
                    r.bits,
                    r.samples,
                    r.silent,
                    r.fraction(),
                    r.bound,
                    r.passed()
                );
            }
            Ok(results.iter().all(|r| r.passed()))
        }
        Command::Replay { csv, row, out } => (|| {
            let file = fs::File::open(csv).map_err(|e| format!("{}: {e}", csv.display()))?;
            let rows = read_csv(file).map_err(|e| e.to_string())?;
            let r = rows
                .get(*row)
                .ok_or_else(|| format!("row {row} out of range ({} rows)", rows.len()))?;
            let text = replay_transcript(r).map_err(|e| e.to_string())?;
            match out {
                Some(path) => fs::write(path, text).map_err(|e| e.to_string())?,
                None => print!("{text}"),
            }
            Ok(true)
        })(),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
