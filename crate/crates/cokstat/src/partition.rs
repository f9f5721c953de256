//! Partitions, integer signatures and extended signatures (entries in
//! Z ∪ {-inf}), with conjugation, dominance and the enumerators used by the
//! truncated inversion sums.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PartitionError {
    #[error("parts must be weakly decreasing: {0}")]
    NotDecreasing(String),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("cannot parse {0:?}")]
    Parse(String),
    #[error("-inf entries must form a suffix")]
    InfNotSuffix,
}

/// Weakly decreasing tuple of nonnegative integers, stored without trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Partition(Vec<u32>);

impl Partition {
    pub fn new(mut parts: Vec<u32>) -> Result<Self, PartitionError> {
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(PartitionError::NotDecreasing(format!("{parts:?}")));
        }
        while parts.last() == Some(&0) {
            parts.pop();
        }
        Ok(Partition(parts))
    }

    /// # Panics
    /// If `parts` is not weakly decreasing.
    pub fn from_parts(parts: &[u32]) -> Self {
        Self::new(parts.to_vec()).expect("parts must be weakly decreasing")
    }

    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    /// Single row (m).
    pub fn row(m: u32) -> Self {
        Self::new(vec![m]).unwrap()
    }

    /// Column (1^m).
    pub fn column(m: usize) -> Self {
        Partition(vec![1; m])
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    /// Number of nonzero parts.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// |λ|
    pub fn size(&self) -> u64 {
        self.0.iter().map(|&x| x as u64).sum()
    }

    /// λ_i with 0-based index, zero past the end.
    pub fn get(&self, i: usize) -> u32 {
        self.0.get(i).copied().unwrap_or(0)
    }

    pub fn first(&self) -> u32 {
        self.get(0)
    }

    pub fn padded(&self, d: usize) -> Vec<u32> {
        let mut v = self.0.clone();
        v.resize(d.max(v.len()), 0);
        v
    }

    pub fn conjugate(&self) -> Partition {
        let m = self.first() as usize;
        let mut out = Vec::with_capacity(m);
        for i in 1..=m as u32 {
            out.push(self.0.iter().filter(|&&x| x >= i).count() as u32);
        }
        Partition(out)
    }

    /// Componentwise containment μ ⊆ λ (called as `λ.contains(μ)`).
    pub fn contains(&self, mu: &Partition) -> bool {
        mu.len() <= self.len() && mu.0.iter().zip(&self.0).all(|(a, b)| a <= b)
    }

    /// Σ_i λ_i μ_i
    pub fn dot(&self, other: &Partition) -> u64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| a as u64 * b as u64)
            .sum()
    }

    /// Partitions obtained by removing one corner box.
    pub fn remove_one_box(&self) -> Vec<Partition> {
        let mut out = Vec::new();
        for i in 0..self.len() {
            if self.get(i) > self.get(i + 1) {
                let mut v = self.0.clone();
                v[i] -= 1;
                out.push(Partition::new(v).unwrap());
            }
        }
        out
    }

    pub fn to_signature(&self, d: usize) -> Signature {
        Signature(self.padded(d).into_iter().map(i64::from).collect())
    }
}

impl fmt::Display for Partition {
    /// The empty partition prints as `0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        write_joined(f, self.0.iter())
    }
}

impl FromStr for Partition {
    type Err = PartitionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = strip_parens(s);
        if s.is_empty() {
            return Ok(Partition::empty());
        }
        let parts = s
            .split(',')
            .map(|t| t.trim().parse::<u32>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| PartitionError::Parse(s.to_string()))?;
        Partition::new(parts)
    }
}

/// Weakly decreasing integer tuple of fixed length d.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature(Vec<i64>);

impl Signature {
    pub fn new(parts: Vec<i64>) -> Result<Self, PartitionError> {
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(PartitionError::NotDecreasing(format!("{parts:?}")));
        }
        Ok(Signature(parts))
    }

    pub fn from_parts(parts: &[i64]) -> Self {
        Self::new(parts.to_vec()).expect("parts must be weakly decreasing")
    }

    pub fn parts(&self) -> &[i64] {
        &self.0
    }

    pub fn d(&self) -> usize {
        self.0.len()
    }

    pub fn size(&self) -> i64 {
        self.0.iter().sum()
    }

    /// Adds `c` to every entry.
    pub fn shifted(&self, c: i64) -> Signature {
        Signature(self.0.iter().map(|x| x + c).collect())
    }

    pub fn to_extended(&self) -> ExtendedSignature {
        ExtendedSignature(self.0.iter().map(|&x| ExtInt::Fin(x)).collect())
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_joined(f, self.0.iter())
    }
}

impl FromStr for Signature {
    type Err = PartitionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = strip_parens(s);
        let parts = s
            .split(',')
            .map(|t| t.trim().parse::<i64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| PartitionError::Parse(s.to_string()))?;
        Signature::new(parts)
    }
}

/// An element of Z ∪ {-inf}. The derived order puts `NegInf` below every integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtInt {
    NegInf,
    Fin(i64),
}

impl std::ops::Add for ExtInt {
    type Output = ExtInt;

    fn add(self, other: ExtInt) -> ExtInt {
        match (self, other) {
            (ExtInt::Fin(a), ExtInt::Fin(b)) => ExtInt::Fin(a + b),
            _ => ExtInt::NegInf,
        }
    }
}

impl ExtInt {
    pub fn finite(self) -> Option<i64> {
        match self {
            ExtInt::Fin(a) => Some(a),
            ExtInt::NegInf => None,
        }
    }
}

impl fmt::Display for ExtInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtInt::NegInf => write!(f, "-inf"),
            ExtInt::Fin(a) => write!(f, "{a}"),
        }
    }
}

impl FromStr for ExtInt {
    type Err = PartitionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "-inf" | "-∞" => Ok(ExtInt::NegInf),
            t => t
                .parse::<i64>()
                .map(ExtInt::Fin)
                .map_err(|_| PartitionError::Parse(t.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExtendedSignature(Vec<ExtInt>);

impl ExtendedSignature {
    pub fn new(parts: Vec<ExtInt>) -> Result<Self, PartitionError> {
        if parts.windows(2).any(|w| w[0] < w[1]) {
            // increasing step after -inf means -inf was not a suffix
            if parts
                .windows(2)
                .any(|w| w[0] == ExtInt::NegInf && w[1] != ExtInt::NegInf)
            {
                return Err(PartitionError::InfNotSuffix);
            }
            return Err(PartitionError::NotDecreasing(format!("{parts:?}")));
        }
        Ok(ExtendedSignature(parts))
    }

    pub fn parts(&self) -> &[ExtInt] {
        &self.0
    }

    pub fn d(&self) -> usize {
        self.0.len()
    }

    /// Prefix sums with -inf absorbing.
    pub fn prefix_sums(&self) -> Vec<ExtInt> {
        let mut acc = ExtInt::Fin(0);
        self.0
            .iter()
            .map(|&x| {
                acc = acc + x;
                acc
            })
            .collect()
    }

    pub fn to_signature(&self) -> Option<Signature> {
        self.0
            .iter()
            .map(|x| x.finite())
            .collect::<Option<Vec<_>>>()
            .map(Signature)
    }
}

impl From<&Signature> for ExtendedSignature {
    fn from(s: &Signature) -> Self {
        s.to_extended()
    }
}

impl fmt::Display for ExtendedSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_joined(f, self.0.iter())
    }
}

impl FromStr for ExtendedSignature {
    type Err = PartitionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts = strip_parens(s)
            .split(',')
            .map(ExtInt::from_str)
            .collect::<Result<Vec<_>, _>>()?;
        ExtendedSignature::new(parts)
    }
}

fn strip_parens(s: &str) -> &str {
    s.trim()
        .trim_start_matches('(')
        .trim_end_matches(')')
        .trim()
}

fn write_joined<T: fmt::Display>(
    f: &mut fmt::Formatter<'_>,
    it: impl Iterator<Item = T>,
) -> fmt::Result {
    for (i, x) in it.enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

/// Dominance order: every prefix sum of μ is at most that of ν.
pub fn dominance_leq(
    mu: &ExtendedSignature,
    nu: &ExtendedSignature,
) -> Result<bool, PartitionError> {
    if mu.d() != nu.d() {
        return Err(PartitionError::LengthMismatch(mu.d(), nu.d()));
    }
    Ok(mu
        .prefix_sums()
        .iter()
        .zip(nu.prefix_sums())
        .all(|(a, b)| a.cmp(&b) != Ordering::Greater))
}

/// Dominance on finite signatures of equal length.
pub fn dominates(nu: &Signature, beta: &Signature) -> bool {
    let mut a = 0;
    let mut b = 0;
    nu.0.iter().zip(&beta.0).all(|(x, y)| {
        a += x;
        b += y;
        b <= a
    })
}

/// Every μ ⊆ λ componentwise, lexicographically descending.
pub fn iterate_subpartitions(lambda: &Partition) -> impl Iterator<Item = Partition> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(lambda.len());
    fn rec(lambda: &[u32], i: usize, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if i == lambda.len() {
            out.push(Partition::new(cur.clone()).unwrap());
            return;
        }
        let hi = if i == 0 {
            lambda[0]
        } else {
            lambda[i].min(cur[i - 1])
        };
        for v in (0..=hi).rev() {
            cur.push(v);
            rec(lambda, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(lambda.parts(), 0, &mut cur, &mut out);
    out.into_iter()
}

/// All partitions of size exactly `n` with at most `max_len` parts,
/// lexicographically descending.
pub fn partitions_of(n: u32, max_len: usize) -> Vec<Partition> {
    fn rec(rem: u32, cap: u32, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if rem == 0 {
            out.push(Partition::new(cur.clone()).unwrap());
            return;
        }
        if left == 0 {
            return;
        }
        for v in (1..=cap.min(rem)).rev() {
            cur.push(v);
            rec(rem - v, v, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, max_len, &mut Vec::new(), &mut out);
    out
}

/// All β ∈ Sig_d with β ≤ ν in dominance, |ν| - |β| ≤ depth and
/// ν_d - β_d ≤ depth, lexicographically descending.
pub fn iterate_dominated_box(nu: &Signature, depth: u64) -> impl Iterator<Item = Signature> {
    let d = nu.d();
    let depth = depth as i64;
    let mut out = Vec::new();
    if d > 0 {
        let lo = nu.0[d - 1] - depth;
        let nu_pref: Vec<i64> =
            nu.0.iter()
                .scan(0, |s, &x| {
                    *s += x;
                    Some(*s)
                })
                .collect();
        let mut cur = Vec::with_capacity(d);
        #[allow(clippy::too_many_arguments)]
        fn rec(
            i: usize,
            d: usize,
            sum: i64,
            lo: i64,
            depth: i64,
            nu_pref: &[i64],
            cur: &mut Vec<i64>,
            out: &mut Vec<Signature>,
        ) {
            if i == d {
                if nu_pref[d - 1] - sum <= depth {
                    out.push(Signature(cur.clone()));
                }
                return;
            }
            let mut hi = nu_pref[i] - sum;
            if i > 0 {
                hi = hi.min(cur[i - 1]);
            }
            let mut v = hi;
            while v >= lo {
                // remaining coordinates are at most v each
                let best = sum + v * (d - i) as i64;
                if nu_pref[d - 1] - best > depth {
                    break;
                }
                cur.push(v);
                rec(i + 1, d, sum + v, lo, depth, nu_pref, cur, out);
                cur.pop();
                v -= 1;
            }
        }
        rec(0, d, 0, lo, depth, &nu_pref, &mut cur, &mut out);
    }
    out.into_iter()
}

/// All signatures of length d with entries in [lo, hi].
pub fn signatures_in_box(d: usize, lo: i64, hi: i64) -> Vec<Signature> {
    fn rec(d: usize, lo: i64, cap: i64, cur: &mut Vec<i64>, out: &mut Vec<Signature>) {
        if cur.len() == d {
            out.push(Signature(cur.clone()));
            return;
        }
        for v in (lo..=cap).rev() {
            cur.push(v);
            rec(d, lo, v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, lo, hi, &mut Vec::new(), &mut out);
    out
}

/// Extended signatures of length d with finite entries in [lo, hi] followed
/// by any number of -inf entries.
pub fn extended_signatures_in_box(d: usize, lo: i64, hi: i64) -> Vec<ExtendedSignature> {
    let mut out = Vec::new();
    for fin in 0..=d {
        for s in signatures_in_box(fin, lo, hi) {
            let mut parts = s.to_extended().0;
            parts.resize(d, ExtInt::NegInf);
            out.push(ExtendedSignature(parts));
        }
    }
    out
}
