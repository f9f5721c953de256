//! Random matrices over Z/p^L, their products and per-sample cokernel
//! statistics.

pub mod gf2;
pub mod snf;

use std::fmt;
use std::str::FromStr;

use dashu::integer::IBig;
use dashu::rational::RBig;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{exact_pow, ExactInt};
use crate::partition::Partition;
use crate::pgroup::{is_prime, sur_count};

pub use gf2::BitMatrix;
pub use snf::smith_valuations;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LabError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("p^L = {p}^{l} does not fit in 63 bits")]
    ModulusTooLarge { p: u64, l: u32 },
    #[error("entry law is constant modulo {0}")]
    DegenerateDistribution(u64),
    #[error("bad distribution spec: {0}")]
    BadSpec(String),
    #[error("weights sum to {0}, not 1")]
    WeightsNotNormalized(String),
}

/// Z/p^L with p^L < 2^63.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResidueRing {
    pub p: u64,
    pub l: u32,
    pub modulus: u64,
}

impl ResidueRing {
    pub fn new(p: u64, l: u32) -> Result<Self, LabError> {
        if !is_prime(p) {
            return Err(LabError::NotPrime(p));
        }
        let modulus = p
            .checked_pow(l)
            .filter(|&m| m < 1 << 63)
            .ok_or(LabError::ModulusTooLarge { p, l })?;
        if l == 0 {
            return Err(LabError::BadSpec("L must be positive".into()));
        }
        Ok(ResidueRing { p, l, modulus })
    }

    pub fn reduce(&self, x: i64) -> u64 {
        x.rem_euclid(self.modulus as i64) as u64
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        ((a as u128 + b as u128) % self.modulus as u128) as u64
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        self.add(a, self.modulus - b % self.modulus)
    }

    /// p-adic valuation, with v(0) = L.
    pub fn valuation(&self, mut a: u64) -> u32 {
        if a == 0 {
            return self.l;
        }
        let mut v = 0;
        while a.is_multiple_of(self.p) {
            a /= self.p;
            v += 1;
        }
        v
    }

    /// Inverse of a unit.
    pub fn inv(&self, a: u64) -> u64 {
        let m = self.modulus as i128;
        let (mut r0, mut r1) = (m, a as i128 % m);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1, "not a unit");
        t0.rem_euclid(m) as u64
    }
}

/// Law of a single matrix entry.
#[derive(Clone, Debug, PartialEq)]
pub enum DistKind {
    /// Uniform on Z/p^L.
    UniformResidues,
    /// Finitely supported integer law with rational weights.
    FiniteSupport {
        values: Vec<i64>,
        weights: Vec<RBig>,
    },
    /// Uniform on the integers in [-b, b].
    Interval(i64),
}

impl fmt::Display for DistKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistKind::UniformResidues => write!(f, "uniform"),
            DistKind::Interval(b) => write!(f, "interval:{b}"),
            DistKind::FiniteSupport { values, weights } => {
                write!(f, "support:")?;
                for (i, (v, w)) in values.iter().zip(weights).enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}={w}")?;
                }
                Ok(())
            }
        }
    }
}

fn parse_weight(s: &str) -> Result<RBig, LabError> {
    let bad = || LabError::BadSpec(format!("weight {s:?}"));
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: IBig = n.trim().parse().map_err(|_| bad())?;
        let d: IBig = d.trim().parse().map_err(|_| bad())?;
        if d == IBig::ZERO {
            return Err(bad());
        }
        return Ok(RBig::from_parts(n, d.try_into().map_err(|_| bad())?));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: IBig = format!("{int}{frac}").parse().map_err(|_| bad())?;
    let den = dashu::integer::UBig::from(10u8).pow(frac.len());
    Ok(RBig::from_parts(digits, den))
}

impl FromStr for DistKind {
    type Err = LabError;

    /// `uniform`, `interval:b` or `support:v1=w1,v2=w2,...`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "uniform" {
            return Ok(DistKind::UniformResidues);
        }
        if let Some(b) = s.strip_prefix("interval:") {
            let b: i64 = b
                .trim()
                .parse()
                .map_err(|_| LabError::BadSpec(s.to_string()))?;
            if b < 0 {
                return Err(LabError::BadSpec(s.to_string()));
            }
            return Ok(DistKind::Interval(b));
        }
        if let Some(rest) = s.strip_prefix("support:") {
            let mut values = Vec::new();
            let mut weights = Vec::new();
            for item in rest.split(',') {
                let (v, w) = item
                    .split_once('=')
                    .ok_or_else(|| LabError::BadSpec(item.to_string()))?;
                values.push(
                    v.trim()
                        .parse()
                        .map_err(|_| LabError::BadSpec(item.to_string()))?,
                );
                weights.push(parse_weight(w)?);
            }
            return Ok(DistKind::FiniteSupport { values, weights });
        }
        Err(LabError::BadSpec(s.to_string()))
    }
}

/// A validated entry law together with its balance constant alpha.
#[derive(Clone, Debug)]
pub struct EntryDistribution {
    pub kind: DistKind,
    pub alpha: f64,
    index: Option<WeightedIndex<f64>>,
}

/// Validates the law and computes alpha = min(1/2, 1 - max_r P(ξ ≡ r mod p)).
pub fn make_distribution(kind: DistKind, p: u64) -> Result<EntryDistribution, LabError> {
    if !is_prime(p) {
        return Err(LabError::NotPrime(p));
    }
    let mut residue = vec![RBig::ZERO; p as usize];
    let mut index = None;
    match &kind {
        DistKind::UniformResidues => {
            for r in residue.iter_mut() {
                *r = RBig::from_parts(IBig::ONE, p.into());
            }
        }
        DistKind::Interval(b) => {
            let total = (2 * b + 1) as u64;
            for x in -b..=*b {
                residue[x.rem_euclid(p as i64) as usize] +=
                    RBig::from_parts(IBig::ONE, total.into());
            }
        }
        DistKind::FiniteSupport { values, weights } => {
            if values.is_empty() || values.len() != weights.len() {
                return Err(LabError::BadSpec("empty support".into()));
            }
            let sum = weights.iter().fold(RBig::ZERO, |a, w| a + w);
            if sum != RBig::ONE || weights.iter().any(|w| w < &RBig::ZERO) {
                return Err(LabError::WeightsNotNormalized(sum.to_string()));
            }
            for (v, w) in values.iter().zip(weights) {
                residue[v.rem_euclid(p as i64) as usize] += w.clone();
            }
            let wf: Vec<f64> = weights.iter().map(|w| w.to_f64().value()).collect();
            index = Some(WeightedIndex::new(wf).map_err(|e| LabError::BadSpec(e.to_string()))?);
        }
    }
    let max = residue.iter().max().unwrap().clone();
    if max == RBig::ONE {
        return Err(LabError::DegenerateDistribution(p));
    }
    let alpha = (1.0 - max.to_f64().value()).min(0.5);
    Ok(EntryDistribution { kind, alpha, index })
}

impl EntryDistribution {
    /// Skips validation; for tests that need degenerate laws.
    pub fn unchecked(kind: DistKind) -> Self {
        let index = match &kind {
            DistKind::FiniteSupport { weights, .. } => {
                Some(WeightedIndex::new(weights.iter().map(|w| w.to_f64().value())).unwrap())
            }
            _ => None,
        };
        EntryDistribution {
            kind,
            alpha: 0.0,
            index,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, ring: &ResidueRing, rng: &mut R) -> u64 {
        match &self.kind {
            DistKind::UniformResidues => rng.random_range(0..ring.modulus),
            DistKind::Interval(b) => ring.reduce(rng.random_range(-b..=*b)),
            DistKind::FiniteSupport { values, .. } => {
                let i = self.index.as_ref().unwrap().sample(rng);
                ring.reduce(values[i])
            }
        }
    }
}

/// Square matrix over Z/p^L, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixModPL {
    pub n: usize,
    pub ring: ResidueRing,
    pub entries: Vec<u64>,
}

impl MatrixModPL {
    pub fn from_rows(ring: ResidueRing, rows: &[Vec<i64>]) -> Self {
        let n = rows.len();
        let entries = rows
            .iter()
            .flat_map(|r| {
                assert_eq!(r.len(), n, "matrix must be square");
                r.iter().map(|&x| ring.reduce(x))
            })
            .collect();
        MatrixModPL { n, ring, entries }
    }

    pub fn identity(n: usize, ring: ResidueRing) -> Self {
        let mut entries = vec![0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1 % ring.modulus;
        }
        MatrixModPL { n, ring, entries }
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.n + j]
    }

    pub fn mul(&self, other: &MatrixModPL) -> MatrixModPL {
        assert_eq!(self.n, other.n);
        assert_eq!(self.ring, other.ring);
        let n = self.n;
        let m = self.ring.modulus;
        let mut out = vec![0u64; n * n];
        if m.is_power_of_two() {
            // wrapping arithmetic is exact modulo 2^64, hence modulo m
            let mask = m - 1;
            for i in 0..n {
                let acc = &mut out[i * n..(i + 1) * n];
                for k in 0..n {
                    let a = self.entries[i * n + k];
                    if a == 0 {
                        continue;
                    }
                    let row = &other.entries[k * n..(k + 1) * n];
                    for (c, &b) in acc.iter_mut().zip(row) {
                        *c = c.wrapping_add(a.wrapping_mul(b));
                    }
                }
                for c in acc.iter_mut() {
                    *c &= mask;
                }
            }
        } else {
            let mut acc = vec![0u128; n];
            for i in 0..n {
                acc.iter_mut().for_each(|c| *c = 0);
                for k in 0..n {
                    let a = self.entries[i * n + k] as u128;
                    if a == 0 {
                        continue;
                    }
                    let row = &other.entries[k * n..(k + 1) * n];
                    for (c, &b) in acc.iter_mut().zip(row) {
                        *c = (*c + a * b as u128) % m as u128;
                    }
                }
                for (o, c) in out[i * n..(i + 1) * n].iter_mut().zip(&acc) {
                    *o = *c as u64;
                }
            }
        }
        MatrixModPL {
            n,
            ring: self.ring,
            entries: out,
        }
    }
}

pub fn sample_matrix<R: Rng + ?Sized>(
    dist: &EntryDistribution,
    n: usize,
    ring: ResidueRing,
    rng: &mut R,
) -> MatrixModPL {
    let entries = (0..n * n).map(|_| dist.sample(&ring, rng)).collect();
    MatrixModPL { n, ring, entries }
}

/// Independent generator for sample `index` of a run seeded with `master_seed`.
pub fn substream(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// (r_1, …, r_d) with r_i = rank(p^{i-1} G).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RankVector(pub Vec<u32>);

impl RankVector {
    pub fn d(&self) -> usize {
        self.0.len()
    }

    /// Type of the cokernel reduced mod p^d, i.e. the conjugate of r.
    pub fn cokernel_type(&self) -> Partition {
        Partition::new(self.0.clone())
            .expect("rank vectors are weakly decreasing")
            .conjugate()
    }
}

/// r_i = #{j : v_j ≥ i}, i = 1..d.
pub fn rank_vector(vals: &[u32], d: u32) -> RankVector {
    RankVector(
        (1..=d)
            .map(|i| vals.iter().filter(|&&v| v >= i).count() as u32)
            .collect(),
    )
}

/// Draws A_1, …, A_k over Z/p^d, forms A_1·A_2⋯A_k left to right and returns
/// the rank vector of its cokernel.
pub fn sample_cokernel_ranks<R: Rng + ?Sized>(
    dist: &EntryDistribution,
    n: usize,
    k: usize,
    p: u64,
    d: u32,
    rng: &mut R,
) -> Result<RankVector, LabError> {
    assert!(k >= 1 && d >= 1 && n >= 1);
    if p == 2 && d == 1 {
        let mut prod = BitMatrix::sample(dist, n, rng);
        for _ in 1..k {
            prod = prod.mul(&BitMatrix::sample(dist, n, rng));
        }
        return Ok(RankVector(vec![(n - prod.rank()) as u32]));
    }
    let ring = ResidueRing::new(p, d)?;
    let mut prod = sample_matrix(dist, n, ring, rng);
    for _ in 1..k {
        prod = prod.mul(&sample_matrix(dist, n, ring, rng));
    }
    Ok(rank_vector(&smith_valuations(&prod), d))
}

/// #Hom(G, G_{λ'}) = p^{Σ λ_i r_i} for a cokernel G with rank vector r.
pub fn hom_stat(r: &RankVector, lambda: &Partition, p: u64) -> ExactInt {
    assert!(lambda.len() <= r.d(), "λ has more parts than the depth");
    let e: u64 = lambda
        .parts()
        .iter()
        .zip(&r.0)
        .map(|(&a, &b)| a as u64 * b as u64)
        .sum();
    exact_pow(p, e)
}

/// #Sur(G, G_{λ'}) where G is the cokernel mod p^d with Smith valuations `vals`.
pub fn sur_stat(vals: &[u32], d: u32, lambda: &Partition, p: u64) -> ExactInt {
    assert!(lambda.len() <= d as usize, "G_λ' has exponent above p^d");
    let mut mu: Vec<u32> = vals.iter().map(|&v| v.min(d)).collect();
    mu.sort_unstable_by(|a, b| b.cmp(a));
    sur_count(&Partition::new(mu).unwrap(), &lambda.conjugate(), p)
}

/// [`sur_stat`] from the rank vector alone (the cokernel type mod p^d is r').
pub fn sur_stat_from_ranks(r: &RankVector, lambda: &Partition, p: u64) -> ExactInt {
    assert!(lambda.len() <= r.d(), "G_λ' has exponent above p^d");
    sur_count(&r.cokernel_type(), &lambda.conjugate(), p)
}
