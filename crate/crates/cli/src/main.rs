use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use tensparse_core::experiment::{fit_high_accuracy, sweep_tensor, write_csv};
use tensparse_core::io::{load_any, load_dense, load_sparse, save_dense, save_sparse, AnyTensor};
use tensparse_core::{
    densify, gen_tucker, hosvd_direct, hosvd_exact, hosvd_product, sparsify, sparsify_baseline_zero_small,
    tensor_spectral_norm, Error, ErrorKind, NormSettings, SweepPlan, TuckerSpec,
};

#[derive(Parser)]
#[command(name = "tensparse", version, about = "Randomized tensor sparsification and sketched HOSVD")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Exact,
    Direct,
    Product,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a planted Tucker tensor from a JSON spec.
    Gen {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sparsify a dense tensor.
    Sketch {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        budget: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Drop small-regime entries instead of sampling them.
        #[arg(long)]
        baseline_zero_small: bool,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Convert a sparse tensor to dense storage.
    Densify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate the spectral norm of a dense or sparse tensor.
    Norm {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[arg(long, default_value_t = 200)]
        iters: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Estimate a mode-wise singular subspace.
    Hosvd {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        mode: usize,
        #[arg(long)]
        rank: usize,
        #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
        method: MethodArg,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a budget sweep and write one CSV row per (budget, trial).
    Bench {
        #[arg(long)]
        plan: PathBuf,
        /// Defaults to the plan's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> tensparse_core::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn print_json(value: &impl serde::Serialize) -> tensparse_core::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(cli: Cli) -> tensparse_core::Result<()> {
    match cli.command {
        Command::Gen { spec, out } => {
            let spec: TuckerSpec = serde_json::from_str(&std::fs::read_to_string(&spec)?)?;
            let (a, planted) = gen_tucker(&spec)?;
            save_dense(&out, &a)?;
            let mut factor_paths = Vec::new();
            for (j, basis) in planted.iter().enumerate() {
                let path = with_suffix(&out, &format!(".factor{}.dten", j + 1));
                save_dense(&path, &basis.columns().to_tensor())?;
                factor_paths.push(path);
            }
            write_json(
                &with_suffix(&out, ".json"),
                &json!({ "spec": spec, "tensor": out, "planted": factor_paths }),
            )
        }
        Command::Sketch { input, budget, seed, out, baseline_zero_small, report } => {
            let a = load_dense(&input)?;
            let (sketch, rep) = if baseline_zero_small {
                sparsify_baseline_zero_small(&a, budget, seed)?
            } else {
                sparsify(&a, budget, seed)?
            };
            save_sparse(&out, &sketch)?;
            match report {
                Some(path) => write_json(&path, &rep),
                None => Ok(()),
            }
        }
        Command::Densify { input, out } => save_dense(&out, &densify(&load_sparse(&input)?)),
        Command::Norm { input, restarts, iters, tol, seed } => {
            let settings = NormSettings { restarts, max_iters: iters, tol, seed };
            let est = match load_any(&input)? {
                AnyTensor::Dense(t) => tensor_spectral_norm(&t, &settings)?,
                AnyTensor::Sparse(t) => tensor_spectral_norm(&t, &settings)?,
            };
            print_json(&est)
        }
        Command::Hosvd { input, mode, rank, method, budget, seed, out } => {
            let a = load_dense(&input)?;
            let need_budget = || budget.ok_or_else(|| Error::Contract("--budget is required for sketched methods".into()));
            let res = match method {
                MethodArg::Exact => hosvd_exact(&a, mode, rank)?,
                MethodArg::Direct => hosvd_direct(&a, need_budget()?, mode, rank, seed)?,
                MethodArg::Product => hosvd_product(&a, need_budget()?, mode, rank, seed)?,
            };
            save_dense(&out, &res.basis.columns().to_tensor())?;
            print_json(&json!({
                "mode": res.mode,
                "rank": res.rank,
                "method": res.method,
                "diagnostics": res.diagnostics,
            }))
        }
        Command::Bench { plan: plan_path, out } => {
            let plan = SweepPlan::load(&plan_path)?;
            let out = out
                .or_else(|| plan.output.clone())
                .ok_or_else(|| Error::Plan("no output path given and the plan has none".into()))?;
            let a = plan.load_input()?;
            let outcome = sweep_tensor(&a, &plan)?;
            let mut w = BufWriter::new(File::create(&out)?);
            write_csv(&mut w, &plan.hosvd, &outcome.records)?;
            w.flush()?;
            let fit = fit_high_accuracy(&outcome).ok();
            print_json(&json!({
                "rows": outcome.records.len(),
                "input_norm": outcome.input_norm.value,
                "stable_rank": outcome.stable_rank,
                "high_accuracy_threshold": outcome.high_accuracy_threshold,
                "slope": fit.as_ref().map(|f| f.slope),
                "r_squared": fit.as_ref().map(|f| f.r_squared),
            }))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Usage => 2,
                ErrorKind::Data => 3,
                ErrorKind::Numerical => 4,
            })
        }
    }
}
