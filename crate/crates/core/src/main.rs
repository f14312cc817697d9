use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cauchy_gevrey::harness::{
    emit, render_trajectory, run_convergence, run_criterion, run_solve, run_verify, write_text,
    ExperimentConfig, OutputFormat,
};
use cauchy_gevrey::kernel::BetaRule;
use cauchy_gevrey::Result;

/// Regularized Cauchy problem for semilinear elliptic equations, with
/// numerical checks of the Gevrey criterion bounds.
#[derive(Debug, Parser)]
#[command(name = "cauchy-gevrey", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dump the exact mild solution and its x-derivative.
    Solve(Common),
    /// One regularized run at a single noise level.
    Regularize(Common),
    /// Criterion A and A^gamma for each case.
    Criterion(Common),
    /// Bound suite; exits nonzero if any inequality fails.
    Verify(Common),
    /// Sweep over the noise ladder.
    Convergence(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// JSON experiment configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
    /// Kernel order; for `verify` it replaces the list of orders.
    #[arg(long)]
    k: Option<u32>,
    /// Fixed regularization parameter (same as `--beta-rule explicit:<beta>`).
    #[arg(long, conflicts_with = "beta_rule")]
    beta: Option<f64>,
    /// prop | pow:<theta> | explicit:<beta>
    #[arg(long)]
    beta_rule: Option<BetaRule>,
    /// Single noise level replacing the ladder.
    #[arg(long)]
    eps: Option<f64>,
    /// Number of x-cells (multiple of 4).
    #[arg(long)]
    nx: Option<usize>,
    /// Record wall time in the `ms` column.
    #[arg(long)]
    timing: bool,
    /// Multiply the reference u_x by 10 before verification.
    #[arg(long)]
    debug_corrupt_ux: bool,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
        if let Some(f) = &self.format {
            cfg.format = f.parse()?;
        }
        if let Some(k) = self.k {
            cfg.k = k;
            cfg.ks = vec![k];
        }
        if let Some(beta) = self.beta {
            cfg.beta_rule = BetaRule::Explicit { beta };
        }
        if let Some(rule) = self.beta_rule {
            cfg.beta_rule = rule;
        }
        if let Some(eps) = self.eps {
            cfg.epsilons = vec![eps];
        }
        if let Some(nx) = self.nx {
            cfg.nx = nx;
        }
        if self.timing {
            cfg.timing = true;
        }
        if self.debug_corrupt_ux {
            cfg.debug_ux_scale = Some(10.0);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Solve(c) => {
            let cfg = c.config()?;
            let mut text = String::new();
            for dump in run_solve(&cfg)? {
                let part = render_trajectory(&dump.case, &dump.u, &dump.ux, cfg.format)?;
                // one header for the whole CSV
                if cfg.format == OutputFormat::Csv && !text.is_empty() {
                    text.extend(part.split_inclusive('\n').skip(1));
                } else {
                    text.push_str(&part);
                }
            }
            write_text(&text, cfg.out.as_deref())?;
            Ok(true)
        }
        Command::Regularize(c) => {
            let mut cfg = c.config()?;
            if c.eps.is_none() {
                // a single run: keep only the largest level of the ladder
                cfg.epsilons.truncate(1);
            }
            sweep(&cfg)
        }
        Command::Convergence(c) => sweep(&c.config()?),
        Command::Criterion(c) => {
            let cfg = c.config()?;
            emit(&run_criterion(&cfg)?, cfg.format, cfg.out.as_deref())?;
            Ok(true)
        }
        Command::Verify(c) => {
            let cfg = c.config()?;
            let outcome = run_verify(&cfg)?;
            emit(&outcome.rows, cfg.format, cfg.out.as_deref())?;
            for f in &outcome.failures {
                eprintln!("error: case {}: {}", f.case, f.message);
            }
            let failed: Vec<_> = outcome
                .rows
                .iter()
                .filter(|r| r.case.ends_with(":FAIL"))
                .collect();
            for r in &failed {
                eprintln!(
                    "violated: {} (k = {}): {:e} > {:e}",
                    r.case, r.k, r.a, r.rhs
                );
            }
            let pass = outcome.all_pass();
            eprintln!(
                "verify: {} checks, {} failed",
                outcome.rows.len(),
                failed.len()
            );
            Ok(pass)
        }
    }
}

fn sweep(cfg: &ExperimentConfig) -> Result<bool> {
    let outcome = run_convergence(cfg)?;
    emit(&outcome.rows, cfg.format, cfg.out.as_deref())?;
    for f in &outcome.failures {
        eprintln!(
            "failed: case {} at epsilon {:e}: {}",
            f.case, f.epsilon, f.message
        );
    }
    for s in &outcome.slopes {
        let at = s.x.map_or_else(|| "sup".to_string(), |x| format!("x={x}"));
        match s.slope {
            Some(v) => eprintln!("slope {} {at}: {v:.4} ({} points)", s.case, s.points),
            None => eprintln!("slope {} {at}: n/a", s.case),
        }
    }
    Ok(outcome.failures.is_empty())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
