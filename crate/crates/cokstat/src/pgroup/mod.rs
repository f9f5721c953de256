//! Exact counts for finite abelian p-groups G_λ = ⊕ Z/p^{λ_i}: subgroups of a
//! given type, homomorphisms, surjections, and chains of subgroups.

pub mod oracle;

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;
use std::sync::{Mutex, OnceLock};

use dashu::integer::IBig;

use crate::arith::{
    binomial, exact_pow, gaussian_binomial_exact, one, real, real_int, ExactInt, Real,
};
use crate::partition::{iterate_subpartitions, Partition};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PGroupError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("group order {order} exceeds cap {cap}")]
    CapExceeded { order: u128, cap: u128 },
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut i = 2;
    while i * i <= p {
        if p.is_multiple_of(i) {
            return false;
        }
        i += 1;
    }
    true
}

/// G_λ for a prime p.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AbelianPGroup {
    pub p: u64,
    pub ty: Partition,
}

impl AbelianPGroup {
    pub fn new(p: u64, ty: Partition) -> Result<Self, PGroupError> {
        if !is_prime(p) {
            return Err(PGroupError::NotPrime(p));
        }
        Ok(AbelianPGroup { p, ty })
    }

    pub fn order(&self) -> ExactInt {
        exact_pow(self.p, self.ty.size())
    }

    /// |G| as a machine integer, if it fits.
    pub fn order_u128(&self) -> Option<u128> {
        (self.p as u128).checked_pow(u32::try_from(self.ty.size()).ok()?)
    }
}

/// A process-wide memo table.
struct Memo<K, V>(OnceLock<Mutex<HashMap<K, V>>>);

impl<K: Eq + Hash, V: Clone> Memo<K, V> {
    const fn new() -> Self {
        Memo(OnceLock::new())
    }

    fn get(&self, k: &K) -> Option<V> {
        self.0
            .get_or_init(Default::default)
            .lock()
            .unwrap()
            .get(k)
            .cloned()
    }

    fn put(&self, k: K, v: V) {
        self.0
            .get_or_init(Default::default)
            .lock()
            .unwrap()
            .insert(k, v);
    }
}

static SUBGROUPS: Memo<(u64, Partition, Partition), ExactInt> = Memo::new();
static SURJECTIONS: Memo<(u64, Partition, Partition), ExactInt> = Memo::new();
static MAX_CHAINS: Memo<(u64, Partition), ExactInt> = Memo::new();

/// Number of subgroups of G_λ isomorphic to G_μ, by the Birkhoff–Butler
/// product formula over the conjugate partitions.
pub fn subgroup_count(mu: &Partition, lambda: &Partition, p: u64) -> ExactInt {
    if !lambda.contains(mu) {
        return IBig::ZERO;
    }
    let key = (p, mu.clone(), lambda.clone());
    if let Some(v) = SUBGROUPS.get(&key) {
        return v;
    }
    let lc = lambda.conjugate();
    let mc = mu.conjugate();
    let mut acc = IBig::ONE;
    for i in 0..lc.len() {
        let l = lc.get(i) as i64;
        let m = mc.get(i) as i64;
        let m_next = mc.get(i + 1) as i64;
        acc *= exact_pow(p, (m_next * (l - m)) as u64);
        acc *= gaussian_binomial_exact(l - m_next, m - m_next, p);
    }
    SUBGROUPS.put(key, acc.clone());
    acc
}

/// #Hom(G_μ, G_λ) = p^{Σ_{i,j} min(μ_i, λ_j)}.
pub fn hom_count(mu: &Partition, lambda: &Partition, p: u64) -> ExactInt {
    let e: u64 = mu
        .parts()
        .iter()
        .flat_map(|&a| lambda.parts().iter().map(move |&b| a.min(b) as u64))
        .sum();
    exact_pow(p, e)
}

/// #Sur(G_μ, G_λ), from #Hom(G_μ, G_λ) = Σ_{ν ⊆ λ} #{H ≤ G_λ : H ≅ G_ν}·#Sur(G_μ, G_ν).
pub fn sur_count(mu: &Partition, lambda: &Partition, p: u64) -> ExactInt {
    let key = (p, mu.clone(), lambda.clone());
    if let Some(v) = SURJECTIONS.get(&key) {
        return v;
    }
    let mut acc = hom_count(mu, lambda, p);
    for nu in iterate_subpartitions(lambda) {
        if &nu == lambda {
            continue;
        }
        acc -= subgroup_count(&nu, lambda, p) * sur_count(mu, &nu, p);
    }
    SURJECTIONS.put(key, acc.clone());
    acc
}

/// Values n_k(G) for k = 0..=kmax.
#[derive(Clone, Debug)]
pub struct ChainTable {
    pub group: AbelianPGroup,
    pub values: BTreeMap<u64, ExactInt>,
}

impl ChainTable {
    /// Iterates n_k(G_μ) = Σ_{ν ⊆ μ} #{H ≤ G_μ : H ≅ G_ν}·n_{k-1}(G_ν) over the
    /// whole sub-partition lattice of λ at once.
    pub fn compute(group: &AbelianPGroup, kmax: u64) -> Self {
        let p = group.p;
        let lattice: Vec<Partition> = iterate_subpartitions(&group.ty).collect();
        // lattice[0] is λ itself, the last entry is ()
        let rows: Vec<Vec<(usize, ExactInt)>> = lattice
            .iter()
            .map(|mu| {
                lattice
                    .iter()
                    .enumerate()
                    .filter(|(_, nu)| mu.contains(nu))
                    .map(|(j, nu)| (j, subgroup_count(nu, mu, p)))
                    .collect()
            })
            .collect();
        let mut cur: Vec<ExactInt> = lattice
            .iter()
            .map(|mu| if mu.is_empty() { IBig::ONE } else { IBig::ZERO })
            .collect();
        let mut values = BTreeMap::new();
        values.insert(0, cur[0].clone());
        for k in 1..=kmax {
            cur = rows
                .iter()
                .map(|row| row.iter().map(|(j, c)| c * &cur[*j]).sum())
                .collect();
            values.insert(k, cur[0].clone());
        }
        ChainTable {
            group: group.clone(),
            values,
        }
    }
}

/// n_k(G): number of chains 0 = H_0 ≤ H_1 ≤ … ≤ H_k = G.
pub fn chain_count(group: &AbelianPGroup, k: u64) -> ExactInt {
    ChainTable::compute(group, k).values[&k].clone()
}

/// Number of composition series of G_λ.
pub fn max_chain_count(group: &AbelianPGroup) -> ExactInt {
    max_chain_count_of(&group.ty, group.p)
}

pub fn max_chain_count_of(lambda: &Partition, p: u64) -> ExactInt {
    if lambda.is_empty() {
        return IBig::ONE;
    }
    let key = (p, lambda.clone());
    if let Some(v) = MAX_CHAINS.get(&key) {
        return v;
    }
    let v: ExactInt = lambda
        .remove_one_box()
        .iter()
        .map(|mu| subgroup_count(mu, lambda, p) * max_chain_count_of(mu, p))
        .sum();
    MAX_CHAINS.put(key, v.clone());
    v
}

/// n_k(G) / binom(k, |λ|).
pub fn nk_ratio(group: &AbelianPGroup, k: u64) -> f64 {
    let n = chain_count(group, k);
    let b = binomial(k, group.ty.size());
    let prec = 128;
    let r: Real = real_int(n, prec) / real_int(b, prec);
    crate::arith::to_f64(&r)
}

/// ∏_{k≥1} (1 - p^{-k})^{-1} at the given precision.
pub fn euler_factor(p: u64, prec: usize) -> Real {
    let t = one(prec) / real_int(p, prec);
    let e = crate::arith::euler_product(&t, 2f64.powi(-(prec as i32) + 8)).unwrap();
    one(prec) / e.value
}

/// Two-sided bound on the number of subgroups of type μ in G_λ:
/// `lower = p^{Σ μ'_i(λ'_i - μ'_i)}`, `upper = lower·P^{λ_1}` with P the Euler factor.
pub fn subgroup_count_bounds(mu: &Partition, lambda: &Partition, p: u64) -> (ExactInt, Real) {
    let lc = lambda.conjugate();
    let mc = mu.conjugate();
    let e: i64 = (0..lc.len())
        .map(|i| mc.get(i) as i64 * (lc.get(i) as i64 - mc.get(i) as i64))
        .sum();
    let lower = exact_pow(p, e.max(0) as u64);
    let prec = 256;
    let upper = real_int(lower.clone(), prec) * euler_factor(p, prec).powi(lambda.first().into());
    (lower, upper)
}

/// Two-sided bound on the number of composition series of G_λ when λ_1 ≤ d:
/// `lower = p^{Σ binom(λ'_i, 2)}`, `upper = d^{|λ|} P^{d|λ|} lower`.
pub fn max_chain_bounds(lambda: &Partition, p: u64, d: u64) -> (ExactInt, Real) {
    let e: u64 = lambda
        .conjugate()
        .parts()
        .iter()
        .map(|&x| crate::arith::binom2(x as i64) as u64)
        .sum();
    let lower = exact_pow(p, e);
    let prec = 256;
    let size = lambda.size();
    let upper = real_int(lower.clone(), prec)
        * real(d as f64, prec).powi(size.into())
        * euler_factor(p, prec).powi((d * size).into());
    (lower, upper)
}
