use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use eerf::experiment::{dump_scores, replot, run_and_emit, run_theory_suite, write_theory_report, ExperimentConfig, TheoryConfig};

/// Random-feature selection experiments and theory checks.
#[derive(Parser)]
#[command(name = "eerf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write results.csv, timings.csv, summary.csv and the SVG.
    Run(Common),
    /// Run the theory validation suite.
    Theory(Common),
    /// Dump the score table of one candidate pool.
    Score(Common),
    /// Redraw the SVG from an existing results.csv.
    Plot(Common),
}

enum Failure {
    Usage(String),
    Check(String),
}

fn experiment_config(c: &Common) -> Result<ExperimentConfig, Failure> {
    let path = c.config.as_ref().ok_or_else(|| Failure::Usage("--config is required".into()))?;
    let mut cfg = ExperimentConfig::load(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    if let Some(seed) = c.seed {
        cfg.master_seed = seed;
    }
    if let Some(out) = &c.out {
        cfg.out = out.clone();
    }
    Ok(cfg)
}

fn execute(cmd: Command) -> Result<(), Failure> {
    let common = match &cmd {
        Command::Run(c) | Command::Theory(c) | Command::Score(c) | Command::Plot(c) => c,
    };
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let runtime = |e: eerf::Error| Failure::Usage(e.to_string());
    match &cmd {
        Command::Run(c) => {
            let cfg = experiment_config(c)?;
            let res = run_and_emit(&cfg).map_err(runtime)?;
            for s in res.summary() {
                println!(
                    "{:<5} M={:<5} error={:.3}% (se {:.3}, {} seeds)",
                    s.method.as_str(),
                    s.m,
                    s.mean_error,
                    s.std_error,
                    s.n_seeds
                );
            }
            if res.failed() > 0 {
                return Err(Failure::Check(format!("{} of {} cells failed", res.failed(), res.rows.len())));
            }
        }
        Command::Theory(c) => {
            let mut cfg = match &c.config {
                Some(p) => TheoryConfig::load(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?,
                None => TheoryConfig::default(),
            };
            if let Some(seed) = c.seed {
                cfg.orthogonality.seed = seed;
                cfg.concentration.seed = seed;
                cfg.linear.seed = seed;
                cfg.selection.seed = seed;
            }
            let report = run_theory_suite(&cfg).map_err(runtime)?;
            let out = c.out.clone().unwrap_or_else(|| PathBuf::from("results/theory"));
            write_theory_report(&report, &out).map_err(runtime)?;
            for chk in &report.checks {
                println!(
                    "{:<14} {} metric={} threshold={}",
                    chk.name,
                    if chk.passed { "pass" } else { "FAIL" },
                    chk.metric,
                    chk.threshold
                );
            }
            if !report.passed {
                return Err(Failure::Check("theory checks failed".into()));
            }
        }
        Command::Score(c) => {
            let cfg = experiment_config(c)?;
            for p in dump_scores(&cfg, &cfg.out).map_err(runtime)? {
                println!("{}", p.display());
            }
        }
        Command::Plot(c) => {
            let dir = c.out.clone().ok_or_else(|| Failure::Usage("--out (the results directory) is required".into()))?;
            match replot(&dir).map_err(runtime)? {
                Some(p) => println!("{}", p.display()),
                None => println!("no successful rows to plot"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("check failure: {msg}");
            ExitCode::from(2)
        }
    }
}
