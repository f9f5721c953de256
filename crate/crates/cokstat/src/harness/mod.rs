//! Seeded Monte Carlo runs, empirical statistics and comparison against the
//! limit laws.

pub mod verify;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{exact_to_f64, to_f64};
use crate::lab::{
    hom_stat, make_distribution, sample_cokernel_ranks, substream, sur_stat_from_ranks, DistKind,
    LabError, RankVector,
};
use crate::limit::{invert_weight, moment_c, pmf_d1, DefinitionProvider, LimitError, LimitLaw};
use crate::partition::{signatures_in_box, Partition, Signature};
use crate::pgroup::is_prime;

pub use verify::{verify_suite, Check, SuiteReport, VerifyOptions, VerifyReport};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Lab(#[from] LabError),
    #[error(transparent)]
    Limit(#[from] LimitError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub p: u64,
    pub d: u32,
    pub n: usize,
    pub k: usize,
    pub samples: u64,
    /// `uniform`, `interval:b` or `support:v=w,...`
    pub dist: String,
    pub master_seed: u64,
    /// Worker threads; `None` uses the global pool.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<DistKind, HarnessError> {
        if !is_prime(self.p) {
            return Err(LabError::NotPrime(self.p).into());
        }
        if self.d == 0 || self.d > 20 {
            return Err(HarnessError::Config(format!(
                "d = {} outside 1..=20",
                self.d
            )));
        }
        if self.p.checked_pow(self.d).is_none_or(|m| m >= 1 << 63) {
            return Err(LabError::ModulusTooLarge {
                p: self.p,
                l: self.d,
            }
            .into());
        }
        if self.samples == 0 || self.n == 0 || self.k == 0 {
            return Err(HarnessError::Config(
                "n, k and samples must be positive".into(),
            ));
        }
        if self.threads == Some(0) {
            return Err(HarnessError::Config("threads must be positive".into()));
        }
        Ok(self.dist.parse()?)
    }
}

/// Rows are indexed by sample id.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleTable {
    pub config: ExperimentConfig,
    pub rows: Vec<RankVector>,
}

const CHUNK: u64 = 512;

/// Draws `samples` cokernel rank vectors, sample i from substream i, and
/// appends them to the CSV at `output` (if any) in sample order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<SampleTable, HarnessError> {
    let kind = cfg.validate()?;
    let dist = make_distribution(kind, cfg.p)?;
    let mut writer = match &cfg.output {
        Some(path) => {
            write_metadata(path, cfg)?;
            let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
            w.write_record(csv_header(cfg.d))?;
            Some(w)
        }
        None => None,
    };
    let mut run = |rows: &mut Vec<RankVector>| -> Result<(), HarnessError> {
        let mut start = 0;
        while start < cfg.samples {
            let end = (start + CHUNK).min(cfg.samples);
            let chunk: Result<Vec<RankVector>, LabError> = (start..end)
                .into_par_iter()
                .map(|i| {
                    let mut rng = substream(cfg.master_seed, i);
                    sample_cokernel_ranks(&dist, cfg.n, cfg.k, cfg.p, cfg.d, &mut rng)
                })
                .collect();
            let chunk = chunk?;
            if let Some(w) = writer.as_mut() {
                for (j, r) in chunk.iter().enumerate() {
                    w.write_record(csv_row(start + j as u64, r))?;
                }
                w.flush()?;
            }
            rows.extend(chunk);
            start = end;
        }
        Ok(())
    };
    let mut rows = Vec::with_capacity(cfg.samples as usize);
    match cfg.threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| HarnessError::Config(e.to_string()))?;
            pool.install(|| run(&mut rows))?;
        }
        None => run(&mut rows)?,
    }
    Ok(SampleTable {
        config: cfg.clone(),
        rows,
    })
}

fn csv_header(d: u32) -> Vec<String> {
    std::iter::once("sample_id".to_string())
        .chain((1..=d).map(|i| format!("r_{i}")))
        .collect()
}

fn csv_row(id: u64, r: &RankVector) -> Vec<String> {
    std::iter::once(id.to_string())
        .chain(r.0.iter().map(|x| x.to_string()))
        .collect()
}

/// Path of the JSON file holding the configuration next to a CSV table.
pub fn metadata_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn write_metadata(csv: &Path, cfg: &ExperimentConfig) -> Result<(), HarnessError> {
    let mut f = BufWriter::new(File::create(metadata_path(csv))?);
    serde_json::to_writer_pretty(&mut f, cfg)?;
    f.write_all(b"\n")?;
    Ok(())
}

impl SampleTable {
    pub fn write_csv(&self, path: &Path) -> Result<(), HarnessError> {
        write_metadata(path, &self.config)?;
        let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
        w.write_record(csv_header(self.config.d))?;
        for (i, r) in self.rows.iter().enumerate() {
            w.write_record(csv_row(i as u64, r))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a table written by [`run_experiment`] together with its metadata.
    pub fn read_csv(path: &Path) -> Result<Self, HarnessError> {
        let config: ExperimentConfig = serde_json::from_reader(File::open(metadata_path(path))?)?;
        let mut rdr = csv::Reader::from_path(path)?;
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if header != csv_header(config.d) {
            return Err(HarnessError::Config(format!(
                "unexpected header {header:?}"
            )));
        }
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let bad = || HarnessError::Config(format!("bad row {i}"));
            if rec.get(0).and_then(|s| s.parse::<usize>().ok()) != Some(i) {
                return Err(bad());
            }
            let r: Option<Vec<u32>> = rec.iter().skip(1).map(|s| s.parse().ok()).collect();
            let r = r.ok_or_else(bad)?;
            if r.windows(2).any(|w| w[0] < w[1]) || r.iter().any(|&x| x as usize > config.n) {
                return Err(bad());
            }
            rows.push(RankVector(r));
        }
        Ok(SampleTable { config, rows })
    }
}

/// Mean with its standard error.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub lambda: String,
    pub estimate: f64,
    pub std_error: f64,
}

fn mean_se(lambda: &Partition, values: impl Iterator<Item = f64>) -> MomentEstimate {
    // Welford
    let (mut n, mut mean, mut m2) = (0u64, 0.0, 0.0);
    for x in values {
        n += 1;
        let delta = x - mean;
        mean += delta / n as f64;
        m2 += delta * (x - mean);
    }
    let se = if n > 1 {
        (m2 / (n - 1) as f64 / n as f64).sqrt()
    } else {
        0.0
    };
    MomentEstimate {
        lambda: lambda.to_string(),
        estimate: mean,
        std_error: se,
    }
}

/// #Hom(G, G_{λ'}) / k^{|λ|} averaged over the rows.
pub fn empirical_normalized_moments(
    table: &SampleTable,
    lambdas: &[Partition],
) -> Vec<MomentEstimate> {
    let cfg = &table.config;
    lambdas
        .iter()
        .map(|lam| {
            assert!(lam.len() <= cfg.d as usize, "λ deeper than the table");
            let norm = (cfg.k as f64).powi(lam.size() as i32);
            mean_se(
                lam,
                table
                    .rows
                    .iter()
                    .map(|r| exact_to_f64(&hom_stat(r, lam, cfg.p)) / norm),
            )
        })
        .collect()
}

/// Mean of #Sur(G, G_{λ'}) over the rows.
pub fn empirical_sur_moment(table: &SampleTable, lambda: &Partition) -> MomentEstimate {
    let p = table.config.p;
    mean_se(
        lambda,
        table
            .rows
            .iter()
            .map(|r| exact_to_f64(&sur_stat_from_ranks(r, lambda, p))),
    )
}

/// Frequencies of r - center·(1,…,1).
pub fn empirical_pmf(table: &SampleTable, center: i64) -> BTreeMap<Signature, f64> {
    let mut counts: BTreeMap<Signature, u64> = BTreeMap::new();
    for r in &table.rows {
        let sig =
            Signature::from_parts(&r.0.iter().map(|&x| x as i64 - center).collect::<Vec<_>>());
        *counts.entry(sig).or_default() += 1;
    }
    let n = table.rows.len() as f64;
    counts.into_iter().map(|(s, c)| (s, c as f64 / n)).collect()
}

/// Nearest integer to log_p k, halves rounded up.
pub fn centering(p: u64, k: u64) -> i64 {
    assert!(p >= 2 && k >= 1);
    let (p, k) = (p as u128, k as u128);
    let mut c = 0u32;
    while p.pow(c + 1) <= k {
        c += 1;
    }
    // log_p k ≥ c + 1/2  ⇔  k² ≥ p^{2c+1}
    if k * k >= p.pow(2 * c + 1) {
        c as i64 + 1
    } else {
        c as i64
    }
}

/// Nearest integer with halves rounded up.
pub fn round_half_up(x: f64) -> i64 {
    (x + 0.5).floor() as i64
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PmfRow {
    pub signature: String,
    pub empirical: f64,
    pub theory: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TvReport {
    pub tv: f64,
    /// Accuracy of the theory values plus theory mass not accounted for.
    pub theory_tail_bound: f64,
    pub rows: Vec<PmfRow>,
}

/// Options for [`tv_distance`].
#[derive(Clone, Debug)]
pub struct TvOptions {
    pub tol: f64,
    /// Box [-w, w]^d used for d ≥ 2.
    pub window: i64,
}

impl Default for TvOptions {
    fn default() -> Self {
        TvOptions {
            tol: 1e-6,
            window: 3,
        }
    }
}

/// Half the L¹ distance between `emp` and the law's mass function.
///
/// For d = 1 the theory mass function is evaluated until it has captured all
/// but `tol` of the mass. For d ≥ 2 it comes from moment inversion on the
/// window; mass outside the window is compared in aggregate, which can only
/// overstate the distance.
pub fn tv_distance(
    emp: &BTreeMap<Signature, f64>,
    law: &LimitLaw,
    opts: &TvOptions,
) -> Result<TvReport, HarnessError> {
    let mut rows = Vec::new();
    let mut diff = 0.0;
    let mut theory_mass = 0.0;
    let mut emp_inside = 0.0;
    let mut err = 0.0;
    if law.d == 1 {
        let keys: Vec<i64> = emp.keys().map(|s| s.parts()[0]).collect();
        let (lo0, hi0) = match (keys.first(), keys.last()) {
            (Some(a), Some(b)) => (*a, *b),
            _ => (0, 0),
        };
        let per = opts.tol / 64.0;
        let mut cache: BTreeMap<i64, f64> = BTreeMap::new();
        let eval =
            |x: i64, cache: &mut BTreeMap<i64, f64>, err: &mut f64| -> Result<(), HarnessError> {
                if let std::collections::btree_map::Entry::Vacant(slot) = cache.entry(x) {
                    let e = pmf_d1(x, law.q, law.chi, per)?;
                    *err += e.tail_bound;
                    slot.insert(to_f64(&e.value));
                }
                Ok(())
            };
        let (mut lo, mut hi) = (lo0, hi0);
        for x in lo..=hi {
            eval(x, &mut cache, &mut err)?;
        }
        // widen until the captured theory mass is within tol/2 of 1
        while 1.0 - cache.values().sum::<f64>() > opts.tol / 2.0 && hi - lo < 400 {
            lo -= 1;
            hi += 1;
            eval(lo, &mut cache, &mut err)?;
            eval(hi, &mut cache, &mut err)?;
        }
        for (&x, &th) in &cache {
            let e = emp
                .get(&Signature::from_parts(&[x]))
                .copied()
                .unwrap_or(0.0);
            diff += (e - th).abs();
            theory_mass += th;
            emp_inside += e;
            rows.push(PmfRow {
                signature: x.to_string(),
                empirical: e,
                theory: th,
            });
        }
    } else {
        let prov = DefinitionProvider::new(*law)?;
        let per = opts.tol;
        for nu in signatures_in_box(law.d, -opts.window, opts.window) {
            let e = invert_weight(&nu, &prov, per)?;
            err += e.tail_bound;
            let th = to_f64(&e.value);
            let em = emp.get(&nu).copied().unwrap_or(0.0);
            diff += (em - th).abs();
            theory_mass += th;
            emp_inside += em;
            rows.push(PmfRow {
                signature: nu.to_string(),
                empirical: em,
                theory: th,
            });
        }
    }
    // mass outside the evaluated set, compared in aggregate
    let outside_bound = (1.0 - theory_mass).max(0.0) + (1.0 - emp_inside).max(0.0);
    let tv = (0.5 * (diff + outside_bound)).min(1.0);
    Ok(TvReport {
        tv,
        theory_tail_bound: err,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentRow {
    pub lambda: String,
    pub empirical: f64,
    pub std_error: f64,
    pub theory: f64,
}

/// Key order in the JSON output follows the field order here.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub config: ExperimentConfig,
    pub law: LimitLaw,
    pub center: i64,
    pub moments: Vec<MomentRow>,
    pub pmf: Vec<PmfRow>,
    pub tv: f64,
    pub theory_tail_bound: f64,
}

/// Empirical Hom-moments and centered mass function of `table` against
/// L_{d,p^{-1},χ}. The default center is the nearest integer to log_p k.
pub fn compare(
    table: &SampleTable,
    chi: f64,
    center: Option<i64>,
    opts: &TvOptions,
) -> Result<ComparisonReport, HarnessError> {
    let cfg = &table.config;
    let law = LimitLaw::new(cfg.d as usize, cfg.p as f64, chi)?;
    let center = center.unwrap_or_else(|| centering(cfg.p, cfg.k as u64));
    let lambdas: Vec<Partition> = (1..=3u32)
        .flat_map(|n| crate::partition::partitions_of(n, cfg.d as usize))
        .collect();
    let scale = (cfg.k as f64) / (cfg.p as f64).powi(center as i32);
    let moments = empirical_normalized_moments(table, &lambdas)
        .into_iter()
        .zip(&lambdas)
        .map(|(m, lam)| -> Result<MomentRow, HarnessError> {
            // renormalize from k^{|λ|} to p^{center·|λ|}
            let f = scale.powi(lam.size() as i32);
            Ok(MomentRow {
                lambda: m.lambda,
                empirical: m.estimate * f,
                std_error: m.std_error * f,
                theory: to_f64(&moment_c(&law, lam, 64)?),
            })
        })
        .collect::<Result<_, _>>()?;
    let emp = empirical_pmf(table, center);
    let tv = tv_distance(&emp, &law, opts)?;
    Ok(ComparisonReport {
        config: cfg.clone(),
        law,
        center,
        moments,
        pmf: tv.rows,
        tv: tv.tv,
        theory_tail_bound: tv.theory_tail_bound,
    })
}
