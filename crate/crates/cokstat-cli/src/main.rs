use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use cokstat::arith::to_f64;
use cokstat::harness::{
    compare, run_experiment, verify_suite, ExperimentConfig, SampleTable, TvOptions, VerifyOptions,
};
use cokstat::limit::{
    invert_cdf_report, invert_weight_report, moment_c, pmf_d1, DefinitionProvider, LimitLaw,
};
use cokstat::partition::{partitions_of, signatures_in_box, Partition, Signature};
use cokstat::pgroup::{chain_count, max_chain_count, AbelianPGroup};

#[derive(Parser)]
#[command(
    name = "cokstat",
    version,
    about = "Cokernels of random matrix products and their limit laws"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Chain counts n_k(G_λ) and n_max(G_λ) as TSV.
    Chains(ChainsArgs),
    /// Limit-law quantities as TSV.
    Limit(LimitArgs),
    /// Monte Carlo cokernel ranks to CSV.
    Simulate(SimulateArgs),
    /// JSON comparison of a sample table with the limit law.
    Compare(CompareArgs),
    /// Runs the self-check suites; JSON report, nonzero exit on failure.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct ChainsArgs {
    #[arg(long)]
    p: u64,
    /// Group type, e.g. "2,1"
    #[arg(long)]
    lambda: Partition,
    #[arg(long, conflicts_with = "kmax")]
    k: Option<u64>,
    #[arg(long)]
    kmax: Option<u64>,
    /// Also print n_max
    #[arg(long)]
    max: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Quantity {
    Pmf,
    Cdf,
    Moments,
    Invert,
}

#[derive(Args)]
struct LimitArgs {
    what: Quantity,
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 1.0)]
    chi: f64,
    /// Single signature, e.g. "1,-2"
    #[arg(long, allow_hyphen_values = true)]
    nu: Option<Signature>,
    /// Inclusive range A..B: the box [A,B]^d of signatures, or |λ| for moments
    #[arg(long, allow_hyphen_values = true)]
    range: Option<String>,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    p: u64,
    #[arg(long, default_value_t = 1)]
    d: u32,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    samples: u64,
    #[arg(long, default_value = "uniform")]
    dist: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    table: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    chi: f64,
    #[arg(long, allow_hyphen_values = true)]
    center: Option<i64>,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Half-width of the signature window for d ≥ 2
    #[arg(long, default_value_t = 3)]
    window: i64,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value = "all")]
    suite: String,
    /// Corrupt one series coefficient by this amount
    #[arg(long)]
    perturb: Option<f64>,
}

fn parse_range(s: &str) -> Result<(i64, i64)> {
    let (a, b) = s
        .split_once("..")
        .with_context(|| format!("range {s:?} is not of the form A..B"))?;
    let (a, b): (i64, i64) = (a.trim().parse()?, b.trim().parse()?);
    if a > b {
        bail!("empty range {s}");
    }
    Ok((a, b))
}

fn chains(a: ChainsArgs, out: &mut impl Write) -> Result<()> {
    let g = AbelianPGroup::new(a.p, a.lambda.clone())?;
    writeln!(out, "lambda\tp\tk\tn_k")?;
    let ks = match (a.k, a.kmax) {
        (Some(k), _) => Some(k..=k),
        (None, Some(m)) => Some(0..=m),
        (None, None) if a.max => None,
        (None, None) => Some(0..=4),
    };
    for k in ks.into_iter().flatten() {
        writeln!(out, "{}\t{}\t{k}\t{}", a.lambda, a.p, chain_count(&g, k))?;
    }
    if a.max {
        writeln!(out, "{}\t{}\tmax\t{}", a.lambda, a.p, max_chain_count(&g))?;
    }
    Ok(())
}

fn limit(a: LimitArgs, out: &mut impl Write) -> Result<()> {
    let law = LimitLaw::new(a.d, a.p, a.chi)?;
    if let Quantity::Moments = a.what {
        let (lo, hi) = a
            .range
            .as_deref()
            .map(parse_range)
            .transpose()?
            .unwrap_or((0, 3));
        writeln!(out, "lambda\tC_lambda")?;
        for n in lo.max(0)..=hi {
            for lam in partitions_of(n as u32, a.d) {
                let c = moment_c(&law, &lam, 128)?;
                writeln!(out, "{lam}\t{:e}", to_f64(&c))?;
            }
        }
        return Ok(());
    }
    let nus: Vec<Signature> = match (&a.nu, &a.range) {
        (Some(nu), _) => vec![nu.clone()],
        (None, Some(r)) => {
            let (lo, hi) = parse_range(r)?;
            signatures_in_box(a.d, lo, hi)
        }
        (None, None) => bail!("give --nu or --range"),
    };
    if let Some(nu) = nus.iter().find(|nu| nu.d() != a.d) {
        bail!("signature {nu} does not have {} parts", a.d);
    }
    match a.what {
        Quantity::Pmf if a.d == 1 => {
            writeln!(out, "x\tpmf\ttail_bound")?;
            for nu in &nus {
                let x = nu.parts()[0];
                let e = pmf_d1(x, a.p, a.chi, a.tol)?;
                writeln!(out, "{x}\t{:e}\t{:e}", e.to_f64(), e.tail_bound)?;
            }
        }
        Quantity::Pmf | Quantity::Cdf => {
            let prov = DefinitionProvider::new(law)?;
            let name = if let Quantity::Cdf = a.what {
                "cdf"
            } else {
                "pmf"
            };
            writeln!(out, "nu\t{name}\ttail_bound")?;
            for nu in &nus {
                let r = match a.what {
                    Quantity::Cdf => invert_cdf_report(nu, &prov, a.tol)?,
                    _ => invert_weight_report(nu, &prov, a.tol)?,
                };
                writeln!(
                    out,
                    "{nu}\t{:e}\t{:e}",
                    r.estimate.to_f64(),
                    r.estimate.tail_bound
                )?;
            }
        }
        Quantity::Invert => {
            let prov = DefinitionProvider::new(law)?;
            writeln!(out, "nu\tpmf\ttail_bound\tdepth\tbetas\tterms\tmax_bits")?;
            for nu in &nus {
                let r = invert_weight_report(nu, &prov, a.tol)?;
                writeln!(
                    out,
                    "{nu}\t{:e}\t{:e}\t{}\t{}\t{}\t{}",
                    r.estimate.to_f64(),
                    r.estimate.tail_bound,
                    r.depth,
                    r.betas,
                    r.lambda_terms,
                    r.max_precision
                )?;
            }
        }
        Quantity::Moments => unreachable!(),
    }
    Ok(())
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let cfg = ExperimentConfig {
        p: a.p,
        d: a.d,
        n: a.n,
        k: a.k,
        samples: a.samples,
        dist: a.dist,
        master_seed: a.seed,
        threads: a.threads,
        output: Some(a.out.clone()),
    };
    let t = run_experiment(&cfg)?;
    eprintln!("wrote {} rows to {}", t.rows.len(), a.out.display());
    Ok(())
}

fn run() -> Result<ExitCode> {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    match cli.cmd {
        Cmd::Chains(a) => chains(a, &mut out)?,
        Cmd::Limit(a) => limit(a, &mut out)?,
        Cmd::Simulate(a) => simulate(a)?,
        Cmd::Compare(a) => {
            let table = SampleTable::read_csv(&a.table)?;
            let opts = TvOptions {
                tol: a.tol,
                window: a.window,
            };
            let r = compare(&table, a.chi, a.center, &opts)?;
            serde_json::to_writer_pretty(&mut out, &r)?;
            writeln!(out)?;
        }
        Cmd::Verify(a) => {
            let r = verify_suite(&a.suite, &VerifyOptions { perturb: a.perturb });
            serde_json::to_writer_pretty(&mut out, &r)?;
            writeln!(out)?;
            out.flush()?;
            if !r.passed {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
