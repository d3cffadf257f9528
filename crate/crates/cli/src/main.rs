use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use xylab::estimators::SamplerKind;
use xylab_cli::{execute, Command, ExperimentConfig, Observable, WindowKind, EXIT_OK, EXIT_USAGE};

#[derive(Parser)]
#[command(name = "xylab", version, about = "XY-model current representation lab")]
struct Cli {
    /// JSON config document; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (the XYLAB_OUT_DIR environment variable wins).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Repeat for more log output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Default)]
struct Common {
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long)]
    sweeps: Option<u64>,
    #[arg(long)]
    burnin: Option<u64>,
    #[arg(long)]
    thin: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    chains: Option<u64>,
    #[arg(long)]
    max_attempts: Option<u64>,
    #[arg(long)]
    bulk_margin: Option<usize>,
    #[arg(long, value_parser = parse_sampler)]
    sampler: Option<SamplerKind>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the verification suite up to the given tier.
    Verify {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        tier: Option<u8>,
        /// Integrate heights with the mirrored face convention.
        #[arg(long)]
        inject_fault: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Estimate a correlation series and fit its decay rate.
    Estimate {
        #[arg(long, value_enum)]
        observable: Option<Observable>,
        #[arg(long, value_enum)]
        window: Option<WindowKind>,
        #[command(flatten)]
        common: Common,
    },
    /// Fit both masses on one box and report their ratio.
    DemoMainTheorem {
        #[arg(long, value_enum)]
        window: Option<WindowKind>,
        /// Use exact exponential series with masses 0.2 and 0.4.
        #[arg(long)]
        synthetic: bool,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_sampler(s: &str) -> Result<SamplerKind, String> {
    match s {
        "rejection" => Ok(SamplerKind::Rejection),
        "mcmc" => Ok(SamplerKind::Mcmc),
        "worm" => Ok(SamplerKind::Worm),
        _ => Err(format!("unknown sampler {s:?} (rejection, mcmc or worm)")),
    }
}

fn apply(cfg: &mut ExperimentConfig, c: Common) {
    macro_rules! set {
        ($($f:ident),*) => { $(if let Some(v) = c.$f { cfg.$f = v; })* };
    }
    macro_rules! set_opt {
        ($($f:ident),*) => { $(if c.$f.is_some() { cfg.$f = c.$f; })* };
    }
    set!(beta, n, seed, chains, max_attempts);
    set_opt!(k_max, sweeps, burnin, thin, bulk_margin, sampler);
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                EXIT_USAGE as u8
            } else {
                EXIT_OK as u8
            });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let mut cfg = match &cli.config {
        Some(p) => match ExperimentConfig::load(p) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("xylab: {e}");
                return ExitCode::from(e.exit_code() as u8);
            }
        },
        None => ExperimentConfig::default(),
    };
    if let Some(o) = cli.out {
        cfg.out_dir = o;
    }
    let command = match cli.command {
        Cmd::Verify {
            tier,
            inject_fault,
            seed,
        } => {
            if let Some(t) = tier {
                cfg.tier = t;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.inject_fault |= inject_fault;
            Command::Verify
        }
        Cmd::Estimate {
            observable,
            window,
            common,
        } => {
            if observable.is_some() {
                cfg.observable = observable;
            }
            if let Some(w) = window {
                cfg.window = w;
            }
            apply(&mut cfg, common);
            Command::Estimate
        }
        Cmd::DemoMainTheorem {
            window,
            synthetic,
            common,
        } => {
            if let Some(w) = window {
                cfg.window = w;
            }
            cfg.synthetic |= synthetic;
            if cli.config.is_none() && common.n.is_none() {
                cfg.n = 24;
            }
            apply(&mut cfg, common);
            Command::Demo
        }
    };
    ExitCode::from(execute(command, &cfg) as u8)
}
