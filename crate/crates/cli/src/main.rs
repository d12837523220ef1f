use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use starlab::volume::Estimate;
use starlab_cli::oneshot;
use starlab_cli::run::{run, RunOptions};

#[derive(Parser, Debug)]
#[command(name = "starlab", version, about = "Star-body volume experiments")]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// Run config (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the config's master seed.
    #[arg(long = "master_seed", alias = "master-seed")]
    master_seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Config override `key.path=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the experiments of a config.
    Run(RunArgs),
    /// Print a constant: omega n | b n s | c n p | d p | a N n p.
    Constant {
        name: String,
        #[arg(allow_hyphen_values = true)]
        args: Vec<String>,
    },
    /// Estimate the volume of a body with a named estimator.
    Volume {
        method: String,
        body: String,
        #[arg(long, default_value_t = 256)]
        resolution: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long = "master_seed", alias = "master-seed", default_value_t = 0)]
        master_seed: u64,
    },
    /// Print rho(K, u) for a body and a comma-separated direction.
    Radial {
        body: String,
        #[arg(allow_hyphen_values = true)]
        direction: String,
    },
}

fn run_config(a: RunArgs) -> anyhow::Result<i32> {
    let config = a
        .config
        .ok_or_else(|| anyhow::anyhow!("--config is required"))?;
    let opts = RunOptions {
        config,
        master_seed: a.master_seed,
        workers: a.workers,
        out: a.out,
        overrides: a.overrides,
    };
    let outcome = run(&opts)?;
    eprintln!(
        "{} experiments, {} violations, outputs in {}",
        outcome.results.len(),
        outcome.violations(),
        outcome.out_dir.display()
    );
    Ok(outcome.exit_code())
}

fn dispatch(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        None => run_config(cli.run),
        Some(Command::Run(a)) => run_config(a),
        Some(Command::Constant { name, args }) => {
            let v = oneshot::constant(&name, &args)?;
            println!("{v:.15e}");
            eprintln!("constant {name} {}", args.join(" "));
            Ok(0)
        }
        Some(Command::Volume {
            method,
            body,
            resolution,
            samples,
            master_seed,
        }) => {
            let mut plan = oneshot::default_plan(master_seed);
            plan.resolution = resolution;
            plan.samples = samples;
            let t = Instant::now();
            let e = oneshot::volume(&method, &body, &plan)?;
            println!("{}", Estimate::CSV_HEADER);
            println!("{}", e.csv_row(Some(t.elapsed().as_secs_f64())));
            eprintln!(
                "body {body}; ci95 [{:.6}, {:.6}]; dropped nodes {}",
                e.ci95.0, e.ci95.1, e.dropped
            );
            Ok(0)
        }
        Some(Command::Radial { body, direction }) => {
            let v = oneshot::radial(&body, &direction)?;
            println!("{v:.15e}");
            eprintln!("rho({body}, [{direction}])");
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
