use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use frns_cli::commands;
use frns_cli::config::RunConfig;
use frns_cli::kernels::SuiteOptions;
use frns_cli::CliError;

#[derive(Parser)]
#[command(name = "frns", version, about = "Numerical lab for the fractional relativistic Schrödinger operator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file (defaults apply to every key it omits).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides solver.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated eps values: one for solve, the sweep list for sweep.
    #[arg(long)]
    eps: Option<String>,
    /// Worker threads for sweeps (0 = one per core).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Check every modelling assumption of a configuration.
    Validate(Common),
    /// Special-function, extension and resolvent checks.
    Kernels {
        #[command(flatten)]
        common: Common,
        /// Negative control: perturb sigma_s by 1%.
        #[arg(long, hide = true)]
        corrupt_sigma: bool,
    },
    /// Ground state of the penalized problem.
    Solve(Common),
    /// Concentration sweep over decreasing eps.
    Sweep(Common),
    /// Rayleigh-quotient estimate of the sharp trace Sobolev constant.
    Sstar {
        #[command(flatten)]
        common: Common,
        /// Dimension N (defaults to frac.N).
        #[arg(long)]
        dim: Option<usize>,
        /// Order s (defaults to frac.s).
        #[arg(long)]
        order: Option<f64>,
    },
}

fn load(common: &Common, eps_key: &str) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.set("solver.seed", &seed.to_string())?;
    }
    if let Some(eps) = &common.eps {
        if eps_key == "model.eps" && eps.contains(',') {
            return Err(CliError::Parse {
                line: 0,
                field: "--eps".into(),
                message: "solve takes a single eps".into(),
            });
        }
        cfg.set(eps_key, eps)?;
    }
    if let Some(jobs) = common.jobs {
        cfg.set("run.jobs", &jobs.to_string())?;
    }
    Ok(cfg)
}

fn report(checks: impl IntoIterator<Item = (String, bool, String)>) {
    for (name, pass, detail) in checks {
        println!("[{}] {name}  {detail}", if pass { "pass" } else { "FAIL" });
    }
}

fn outputs(paths: &[PathBuf], out: &Path) {
    println!("wrote {} files to {}", paths.len(), out.display());
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Validate(c) => {
            let cfg = load(&c, "model.eps")?;
            for line in commands::validate(&cfg)? {
                println!("ok  {line}");
            }
            Ok(true)
        }
        Command::Kernels { common, corrupt_sigma } => {
            let cfg = load(&common, "model.eps")?;
            let o = commands::kernels(&cfg, &common.out, SuiteOptions { corrupt_sigma })?;
            report(o.checks.iter().map(|c| {
                (
                    c.name.clone(),
                    c.pass,
                    format!("computed {:e}, expected {:e}, tol {:e}", c.computed, c.expected, c.tolerance),
                )
            }));
            outputs(&o.outputs, &common.out);
            Ok(o.passed())
        }
        Command::Solve(c) => {
            let cfg = load(&c, "model.eps")?;
            let o = commands::solve(&cfg, &c.out)?;
            let r = &o.result;
            println!(
                "{:?} after {} iterations: energy {:.10} (c_star {:.10}), nehari {:e}, grad {:e}",
                r.status, r.iterations, r.energy, o.c_star, r.nehari_residual, r.grad_residual
            );
            if !o.region_ok {
                println!("note: max outside Lambda exceeds a; the penalized solution need not solve the original equation");
            }
            outputs(&o.outputs, &c.out);
            Ok(o.passed())
        }
        Command::Sweep(c) => {
            let cfg = load(&c, "sweep.eps")?;
            let o = commands::sweep(&cfg, &c.out)?;
            for f in &o.failures {
                eprintln!("solve failed: {f}");
            }
            report(o.checks.clone());
            outputs(&o.outputs, &c.out);
            Ok(o.passed())
        }
        Command::Sstar { common, dim, order } => {
            let cfg = load(&common, "model.eps")?;
            let frac = cfg.frac_unchecked();
            let o = commands::sstar(&cfg, dim.unwrap_or(frac.0), order.unwrap_or(frac.1), &common.out)?;
            let e = &o.estimate;
            println!("min quotient {:.8}, formula {:.8}, relative error {:+.4}", e.value, e.formula, e.relative_error);
            for w in &e.warnings {
                println!("warning: {w}");
            }
            outputs(&o.outputs, &common.out);
            Ok(o.passed())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
