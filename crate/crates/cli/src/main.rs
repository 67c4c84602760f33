use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};
use ftlab::hamming::{code, Word7};
use ftlab::harness::{
    concat_table, format_concat_table, run_experiment, run_verify, with_workers, write_plot,
    ConcatTarget, ExperimentConfig, Mutations,
};
use ftlab::steane::decode_word;
use ftlab::Error;

/// Steane-code fault-tolerance laboratory.
#[derive(Debug, Parser)]
#[command(name = "ftlab", version)]
struct Cli {
    /// Override the seed of the experiment config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for Monte Carlo runs (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Directory for result files, overriding the config.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the deterministic self-check suites.
    Verify {
        /// Only this suite (hamming, pauli, codewords, transversal,
        /// correction, preparation, concat).
        #[arg(long)]
        suite: Option<String>,
        /// Test fixture: implement S̄ with the wrong sign.
        #[arg(long, hide = true)]
        flip_s_bar: bool,
    },
    /// Run the experiment described by a TOML config.
    Run { config: PathBuf },
    /// Turn a result CSV into gnuplot data and script.
    Plotdata { csv: PathBuf },
    /// Print the concatenated error rate level by level.
    #[command(group(ArgGroup::new("target").required(true).args(["k", "epsilon"])))]
    Concat {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        pt: f64,
        /// Number of levels.
        #[arg(long)]
        k: Option<u32>,
        /// Target logical rate.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Correct and decode a measured 7-bit word.
    Decode {
        /// Bits 1 to 7, e.g. 1010100.
        #[arg(long)]
        word: String,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Schema { .. }
        | Error::Configuration(_)
        | Error::Parse(_)
        | Error::Dimension(_)
        | Error::Precondition(_)
        | Error::NoConvergence { .. } => 2,
        _ => 1,
    }
}

fn verify(suite: Option<&str>, flip_s_bar: bool) -> Result<ExitCode, Error> {
    let report = run_verify(suite, Mutations { flip_s_bar })?;
    for s in &report.suites {
        println!("{s}");
    }
    let failed = report.failures();
    println!("{} suites, {failed} failures", report.suites.len());
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn run(cli: &Cli, path: &PathBuf) -> Result<ExitCode, Error> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out = with_workers(cli.workers, || run_experiment(&cfg, cli.out_dir.as_deref()))??;
    for f in &out.manifest.files {
        println!("{}", f.display());
    }
    println!("{}", out.manifest_path.display());
    Ok(ExitCode::SUCCESS)
}

fn decode(word: &str) -> Result<ExitCode, Error> {
    let raw: Word7 = word.parse()?;
    let r = decode_word(raw);
    let fixed = code().correct(raw).0;
    println!("word      {raw}");
    println!("syndrome  {}", r.syndrome());
    match r.corrected {
        Some(pos) => println!("flip      bit {pos}"),
        None => println!("flip      none"),
    }
    println!("corrected {fixed}");
    println!("logical   {}", r.bit as u8);
    Ok(ExitCode::SUCCESS)
}

fn dispatch(cli: &Cli) -> Result<ExitCode, Error> {
    match &cli.command {
        Command::Verify { suite, flip_s_bar } => verify(suite.as_deref(), *flip_s_bar),
        Command::Run { config } => run(cli, config),
        Command::Plotdata { csv } => {
            for f in write_plot(csv, cli.out_dir.as_deref())? {
                println!("{}", f.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Concat { p, pt, k, epsilon } => {
            let target = match (k, epsilon) {
                (Some(k), _) => ConcatTarget::Levels(*k),
                (None, Some(e)) => ConcatTarget::Epsilon(*e),
                (None, None) => unreachable!("clap requires one"),
            };
            print!("{}", format_concat_table(&concat_table(*p, *pt, target)?));
            Ok(ExitCode::SUCCESS)
        }
        Command::Decode { word } => decode(word),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
