use clap::{Args, Parser, Subcommand};
use nls_lowreg::bourgain::check_l4_estimate;
use nls_lowreg::harness::{self, choose_k, DataChoice, RunConfig};
use nls_lowreg::oracle::check_identities;
use nls_lowreg::spectral::TorusGrid;
use nls_lowreg::{Error, Result};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Relative outputs are placed under this directory when it is set.
const OUT_ENV: &str = "NLS_LOWREG_OUT";

#[derive(Parser)]
#[command(
    name = "nls-lowreg",
    version,
    about = "Low-regularity integrators for the cubic periodic NLS"
)]
#[command(arg_required_else_help = true)]
struct Cli {
    /// Seed for random data and ensembles.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convergence study of the configured scheme.
    Run(ConfigArgs),
    /// Convergence sweep over all configured schemes, with plot artifacts.
    Convergence(ConfigArgs),
    /// Kernel identities against the brute-force mode sums.
    OracleCheck {
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Comma-separated step sizes.
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 0.1, 0.0078125])]
        taus: Vec<f64>,
    },
    /// Empirical l4 estimate on random ensembles.
    BourgainCheck {
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// Step sizes `2^-e`, comma-separated.
        #[arg(long, value_delimiter = ',', default_values_t = [4, 6, 8])]
        tau_exponents: Vec<i32>,
        /// Regularity of the random frames.
        #[arg(long, default_value_t = 0.0)]
        s: f64,
        /// Use the cutoff rule for data of this regularity instead of `tau^(-1/2)`.
        #[arg(long)]
        s0: Option<f64>,
        #[arg(long, default_value_t = harness::DEFAULT_EPSILON)]
        epsilon: f64,
    },
    /// Writes an initial datum as a field file.
    GenData {
        /// paper8 | randomized-sobolev | plane-wave | smooth-profile
        #[arg(long, default_value = "paper8")]
        kind: String,
        #[arg(long, default_value_t = 1024)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        #[arg(long, default_value_t = 1)]
        k: i64,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// Key-value configuration file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn output_dir(cli_out: &Option<PathBuf>, fallback: &Path) -> PathBuf {
    if let Some(out) = cli_out {
        return out.clone();
    }
    match std::env::var_os(OUT_ENV) {
        Some(root) if fallback.is_relative() => PathBuf::from(root).join(fallback),
        _ => fallback.to_path_buf(),
    }
}

fn load_config(args: &ConfigArgs, seed: Option<u64>) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = seed {
        cfg = cfg.with_seed(seed);
    }
    Ok(cfg)
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn convergence(cli: &Cli, args: &ConfigArgs, sweep: bool) -> Result<bool> {
    let cfg = load_config(args, cli.seed)?;
    let schemes = if sweep {
        cfg.schemes.clone()
    } else {
        vec![cfg.scheme]
    };
    let (reference, reports) = harness::run_sweep(&cfg, &schemes)?;
    let dir = output_dir(&cli.out, &cfg.output_dir);
    let paths = harness::write_sweep(&dir, &reference, &reports, cfg.save_fields)?;
    let summary: Vec<_> = reports
        .iter()
        .zip(&paths)
        .map(|((r, _), p)| {
            json!({
                "scheme": r.scheme,
                "fitted_order": r.fitted_order,
                "exact": r.exact,
                "report": p,
            })
        })
        .collect();
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(true)
}

fn execute(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Run(args) => convergence(cli, args, false),
        Command::Convergence(args) => convergence(cli, args, true),
        Command::OracleCheck { n, trials, taus } => {
            let rep = check_identities(*n, *trials, taus, cli.seed.unwrap_or(0))?;
            let ok = rep.max() <= 1e-10;
            let value = json!({ "report": rep, "tolerance": 1e-10, "pass": ok });
            println!("{}", serde_json::to_string_pretty(&value)?);
            if let Some(out) = &cli.out {
                write_json(&out.join("oracle.json"), &value)?;
            }
            Ok(ok)
        }
        Command::BourgainCheck {
            samples,
            tau_exponents,
            s,
            s0,
            epsilon,
        } => {
            let taus: Vec<f64> = tau_exponents.iter().map(|&e| 2f64.powi(-e)).collect();
            if let Some(s0) = s0 {
                choose_k(*s0, taus[0], *epsilon)?;
            }
            let rule = |tau: f64| match s0 {
                Some(s0) => choose_k(*s0, tau, *epsilon).unwrap_or(f64::NAN),
                None => tau.powf(-0.5),
            };
            let rep = check_l4_estimate(*samples, &taus, &rule, *s, cli.seed.unwrap_or(0))?;
            let value = serde_json::to_value(&rep)?;
            println!("{}", serde_json::to_string_pretty(&value)?);
            if let Some(out) = &cli.out {
                write_json(&out.join("bourgain.json"), &value)?;
            }
            Ok(rep.stable)
        }
        Command::GenData { kind, n, s, k } => {
            let seed = cli.seed.unwrap_or(0);
            let choice = match kind.as_str() {
                "paper8" => DataChoice::Paper8 { seed },
                "randomized-sobolev" => DataChoice::RandomizedSobolev { s: *s, seed },
                "plane-wave" => DataChoice::PlaneWave { k: *k },
                "smooth-profile" => DataChoice::SmoothProfile,
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "unknown data kind {other:?}"
                    )))
                }
            };
            let field = choice.on(TorusGrid::new(*n)?).build()?;
            let text = field.to_json()?;
            match &cli.out {
                Some(out) => {
                    std::fs::create_dir_all(out)?;
                    std::fs::write(out.join("data.json"), text)?;
                }
                None => println!("{text}"),
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = harness::thread_pool(cli.threads).and_then(|pool| pool.install(|| execute(&cli)));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", json!({ "error": e.kind(), "message": e.to_string() }));
            ExitCode::from(1)
        }
    }
}
