//! Recovering weights and dominance-order CDF values of a measure on Sig_d
//! from its moments C_λ = E[q^{λ·X}].
//!
//! M({ν}) = Σ_{β ≤ ν} coeff(ν, β) Σ_λ a_β(λ) C_λ, where coeff is a product
//! over i of (-1)^{s_i} q^{-binom(s_i,2)} / ((q^{-1};q^{-1})_{s_i} (q^{-1};q^{-1})_{β_{i-1}-β_i-s_i})
//! with s_i = Σ_{j≤i} (ν_j - β_j) and the first gap infinite. The CDF
//! coefficients use binom(s_i+1, 2) and differ in the i ≥ 2 factors; see
//! [`factors`].

use std::collections::HashMap;
use std::sync::Mutex;

use crate::arith::{
    binom2, is_zero, log2_abs, one, qpoch, qpow, real, real_int, ArithError, Estimate, PochBase,
    PochLen, QPochSpec, Real, MIN_PRECISION,
};
use crate::partition::{iterate_dominated_box, ExtInt, ExtendedSignature, Signature};

use super::hseries::{h_hat, A1Log, HFactors};
use super::{euler_f64, LimitError, LimitLaw};

/// Moments C_λ of a measure on (extended) signatures, with an upper
/// envelope good enough to bound truncated tails.
pub trait MomentProvider: Sync {
    fn d(&self) -> usize;
    fn q(&self) -> f64;
    /// C_λ for λ padded to length d, to at least `prec` bits.
    fn moment(&self, lambda: &[u32], prec: usize) -> Real;
    /// An upper bound for log2 C_λ. Along λ_1 the ratio of consecutive
    /// envelope values must be eventually nonincreasing.
    fn log2_envelope(&self, lambda: &[u32]) -> f64;
    /// Upper bound on |E[Ĥ_β(X)]|; 1 for probability measures.
    fn mass_bound(&self) -> f64 {
        1.0
    }
}

/// Moments of L_{d,p^{-1},χ} from the chain-count formula.
pub struct DefinitionProvider {
    law: LimitLaw,
    p: u64,
    log2_rate: f64,
    cache: Mutex<NmaxCache>,
}

struct NmaxCache {
    prec: usize,
    /// C_λ keyed by λ
    moments: HashMap<Vec<u32>, Real>,
}

impl DefinitionProvider {
    pub fn new(law: LimitLaw) -> Result<Self, LimitError> {
        let p = law.prime()?;
        let big_p = 1.0 / euler_f64(law.q);
        let d = law.d as f64;
        let log2_rate = ((law.q - 1.0) * law.chi * d * big_p.powf(d)).log2();
        Ok(DefinitionProvider {
            law,
            p,
            log2_rate,
            cache: Mutex::new(NmaxCache {
                prec: 0,
                moments: HashMap::new(),
            }),
        })
    }

    pub fn law(&self) -> &LimitLaw {
        &self.law
    }

    /// C_λ by removing one box at a time:
    /// C_λ = (q-1)χ/|λ| · Σ_ρ #{index-p subgroups of G_{λ'} of type ρ'} C_ρ.
    fn compute(&self, cache: &mut NmaxCache, lambda: &[u32]) -> Real {
        let prec = cache.prec;
        let key = trim(lambda);
        if let Some(v) = cache.moments.get(&key) {
            return v.clone();
        }
        let pr = real_int(self.p, prec);
        let rate = real((self.law.q - 1.0) * self.law.chi, prec);
        let mut stack = vec![key.clone()];
        while let Some(top) = stack.last().cloned() {
            if cache.moments.contains_key(&top) {
                stack.pop();
                continue;
            }
            if top.is_empty() {
                cache.moments.insert(top, one(prec));
                stack.pop();
                continue;
            }
            let children: Vec<(Vec<u32>, usize)> = (0..top.len())
                .filter(|&r| r + 1 == top.len() || top[r] > top[r + 1])
                .map(|r| {
                    let mut c = top.clone();
                    c[r] -= 1;
                    (trim(&c), r)
                })
                .collect();
            let missing: Vec<Vec<u32>> = children
                .iter()
                .filter(|(c, _)| !cache.moments.contains_key(c))
                .map(|(c, _)| c.clone())
                .collect();
            if !missing.is_empty() {
                stack.extend(missing);
                continue;
            }
            let mut acc = real_int(0, prec);
            for (c, r) in &children {
                acc += one_box_count(&top, *r, &pr) * &cache.moments[c];
            }
            let size: u64 = top.iter().map(|&x| x as u64).sum();
            acc = acc * &rate / real_int(size, prec);
            cache.moments.insert(top, acc);
            stack.pop();
        }
        cache.moments[&key].clone()
    }
}

fn trim(lambda: &[u32]) -> Vec<u32> {
    let n = lambda.iter().rposition(|&x| x > 0).map_or(0, |i| i + 1);
    lambda[..n].to_vec()
}

/// Number of index-p subgroups of G_{λ'} of type ρ', where ρ is λ with one
/// box removed from row r: p^{λ_{r+1}} [λ_r - λ_{r+1}, 1]_p.
fn one_box_count(lambda: &[u32], r: usize, p: &Real) -> Real {
    let prec = p.precision();
    let next = lambda.get(r + 1).copied().unwrap_or(0) as i64;
    let lr = lambda[r] as i64;
    let pm1 = p - one(prec);
    let q_int = |n: i64| (qpow(p, n) - one(prec)) / &pm1;
    qpow(p, next) * q_int(lr - next)
}

impl MomentProvider for DefinitionProvider {
    fn d(&self) -> usize {
        self.law.d
    }

    fn q(&self) -> f64 {
        self.law.q
    }

    fn moment(&self, lambda: &[u32], prec: usize) -> Real {
        let prec = prec.max(MIN_PRECISION);
        let mut cache = self.cache.lock().unwrap_or_else(|e| e.into_inner());
        // keep a cache built at a higher precision unless it is far too high
        if cache.prec < prec || cache.prec > 2 * prec + 64 {
            cache.prec = prec;
            cache.moments.clear();
        }
        self.compute(&mut cache, lambda)
    }

    fn log2_envelope(&self, lambda: &[u32]) -> f64 {
        let n: u64 = lambda.iter().map(|&x| x as u64).sum();
        let lq = self.law.q.log2();
        let quad: i64 = lambda.iter().map(|&x| binom2(x as i64)).sum();
        n as f64 * self.log2_rate - log2_factorial(n) + quad as f64 * lq
    }
}

fn log2_factorial(n: u64) -> f64 {
    if n < 64 {
        (2..=n).map(|i| (i as f64).log2()).sum()
    } else {
        // Stirling without the correction term is a lower bound
        let x = n as f64;
        (x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln()) / std::f64::consts::LN_2
    }
}

/// Moments of the point mass at μ: C_λ = q^{λ·μ}, with q^{-inf} = 0.
pub struct DiracProvider {
    pub q: f64,
    pub mu: ExtendedSignature,
}

impl DiracProvider {
    pub fn new(q: f64, mu: ExtendedSignature) -> Self {
        DiracProvider { q, mu }
    }

    fn exponent(&self, lambda: &[u32]) -> Option<i64> {
        let mut w = 0;
        for (l, m) in lambda.iter().zip(self.mu.parts()) {
            if *l > 0 {
                w += *l as i64 * m.finite()?;
            }
        }
        Some(w)
    }
}

impl MomentProvider for DiracProvider {
    fn d(&self) -> usize {
        self.mu.d()
    }

    fn q(&self) -> f64 {
        self.q
    }

    fn moment(&self, lambda: &[u32], prec: usize) -> Real {
        match self.exponent(lambda) {
            Some(w) => qpow(&real(self.q, prec.max(MIN_PRECISION)), w),
            None => real_int(0, prec.max(MIN_PRECISION)),
        }
    }

    fn log2_envelope(&self, lambda: &[u32]) -> f64 {
        match self.exponent(lambda) {
            Some(w) => w as f64 * self.q.log2(),
            None => f64::NEG_INFINITY,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Weight,
    Cdf,
}

impl Kind {
    fn decay(self, s: i64) -> i64 {
        match self {
            Kind::Weight => binom2(s),
            Kind::Cdf => binom2(s + 1),
        }
    }
}

/// Diagnostics of one inversion.
#[derive(Clone, Debug)]
pub struct InversionReport {
    pub estimate: Estimate,
    pub depth: u64,
    pub betas: usize,
    pub lambda_terms: usize,
    pub max_precision: usize,
}

const MAX_DEPTH: u64 = 200;
const MAX_LAMBDA1: usize = 2_000_000;

pub fn invert_weight(
    nu: &Signature,
    provider: &dyn MomentProvider,
    tol: f64,
) -> Result<Estimate, LimitError> {
    Ok(invert(nu, provider, tol, Kind::Weight)?.estimate)
}

pub fn invert_cdf(
    nu: &Signature,
    provider: &dyn MomentProvider,
    tol: f64,
) -> Result<Estimate, LimitError> {
    Ok(invert(nu, provider, tol, Kind::Cdf)?.estimate)
}

pub fn invert_weight_report(
    nu: &Signature,
    provider: &dyn MomentProvider,
    tol: f64,
) -> Result<InversionReport, LimitError> {
    invert(nu, provider, tol, Kind::Weight)
}

pub fn invert_cdf_report(
    nu: &Signature,
    provider: &dyn MomentProvider,
    tol: f64,
) -> Result<InversionReport, LimitError> {
    invert(nu, provider, tol, Kind::Cdf)
}

/// Exponent of the Gaussian decay of |coeff(ν, β)| over the shell
/// |ν| - |β| = t. Weight coefficients decay like q^{-binom(t,2)}. For the CDF
/// a factor equals 1 whenever β_{i-1} = β_i ≤ ν-level, so only the rate
/// q^{-binom(⌊t/d⌋+1, 2)} survives; `cdf_shell_bound_holds` checks it.
fn shell_decay(kind: Kind, t: i64, d: usize) -> i64 {
    match kind {
        Kind::Weight => binom2(t),
        Kind::Cdf => binom2(t / d as i64 + 1),
    }
}

/// Smallest depth D whose omitted β (those with |ν| - |β| > D) contribute
/// less than `budget`, together with that bound.
fn choose_depth(nu: &Signature, q: f64, mass: f64, budget: f64, kind: Kind) -> (u64, f64) {
    let d = nu.d();
    let spread = (nu.parts()[0] - nu.parts()[d - 1]) as f64;
    let lq = q.log2();
    let mut lpre = mass.log2() - 2.0 * d as f64 * euler_f64(q).log2();
    if kind == Kind::Cdf {
        lpre -= (d as f64 - 1.0) * (1.0 - 1.0 / q).log2();
    }
    let term = |t: i64| {
        (lpre + (d as f64 - 1.0) * (spread + t as f64 + 1.0).log2()
            - shell_decay(kind, t, d) as f64 * lq)
            .exp2()
    };
    let tail = |depth: i64| {
        let mut s = 0.0;
        let mut t = depth + 1;
        loop {
            let x = term(t);
            s += x;
            if (x < s * 1e-18 && t > depth + 2 * d as i64) || x == 0.0 {
                break;
            }
            t += 1;
        }
        s
    };
    let mut depth = 0;
    while depth < MAX_DEPTH as i64 {
        let b = tail(depth);
        if b < budget {
            return (depth as u64, b);
        }
        depth += 1;
    }
    (MAX_DEPTH, tail(MAX_DEPTH as i64))
}

/// One coordinate's factor of coeff(ν, β).
enum Factor {
    Zero,
    Unit,
    /// (-1)^s q^{-decay} / ((t;t)_s (t;t)_second) / (1 - t^extra)
    Term {
        s: i64,
        decay: i64,
        second: Option<i64>,
        extra: Option<i64>,
    },
}

/// For the weights the i ≥ 2 factors have second = L - s with L = β_{i-1} - β_i.
/// For the CDF they come from summing the weight factors over the last
/// coordinate up to ν; the partial q-binomial sum
/// Σ_{k≤s} (-1)^k t^{binom(k,2)} [L,k]_t = (-1)^s t^{binom(s+1,2)} [L-1,s]_t
/// gives second = L - 1 - s and an extra 1/(1 - t^L), and the full sum
/// (s ≥ L) leaves 1(L = 0).
fn factors(nu: &Signature, beta: &Signature, kind: Kind) -> Vec<Factor> {
    let (n, b) = (nu.parts(), beta.parts());
    let mut s = 0i64;
    let mut out = Vec::with_capacity(n.len());
    for i in 0..n.len() {
        s += n[i] - b[i];
        let decay = kind.decay(s);
        if i == 0 {
            out.push(Factor::Term {
                s,
                decay,
                second: None,
                extra: None,
            });
            continue;
        }
        let l = b[i - 1] - b[i];
        out.push(match kind {
            Kind::Weight if l - s < 0 => Factor::Zero,
            Kind::Weight => Factor::Term {
                s,
                decay,
                second: Some(l - s),
                extra: None,
            },
            Kind::Cdf if s >= l => {
                if l == 0 {
                    Factor::Unit
                } else {
                    Factor::Zero
                }
            }
            Kind::Cdf => Factor::Term {
                s,
                decay,
                second: Some(l - 1 - s),
                extra: Some(l),
            },
        });
    }
    out
}

/// log2 |coeff(ν, β)| in double precision; None when it vanishes.
fn coefficient_log2(nu: &Signature, beta: &Signature, q: f64, kind: Kind) -> Option<f64> {
    let lq = q.log2();
    let lfac = |m: i64| -> f64 { (1..=m).map(|j| (1.0 - q.powi(-(j as i32))).log2()).sum() };
    let mut out = 0.0;
    for f in factors(nu, beta, kind) {
        match f {
            Factor::Zero => return None,
            Factor::Unit => {}
            Factor::Term {
                s,
                decay,
                second,
                extra,
            } => {
                out -= decay as f64 * lq + lfac(s);
                out -= match second {
                    None => euler_f64(q).log2(),
                    Some(m) => lfac(m),
                };
                if let Some(l) = extra {
                    out -= (1.0 - q.powi(-(l as i32))).log2();
                }
            }
        }
    }
    Some(out)
}

fn coefficient(
    nu: &Signature,
    beta: &Signature,
    t: &Real,
    kind: Kind,
    tol: f64,
) -> Result<Real, ArithError> {
    let prec = t.precision();
    let poch = |len: PochLen| qpoch(&QPochSpec::new(PochBase::QPower(1), t.clone(), len), tol);
    let mut out = one(prec);
    for f in factors(nu, beta, kind) {
        match f {
            Factor::Zero => return Ok(real_int(0, prec)),
            Factor::Unit => {}
            Factor::Term {
                s,
                decay,
                second,
                extra,
            } => {
                let mut den = poch(PochLen::Finite(s as u64))?.value;
                den *= match second {
                    None => poch(PochLen::Infinite)?.value,
                    Some(m) => poch(PochLen::Finite(m as u64))?.value,
                };
                if let Some(l) = extra {
                    den *= one(prec) - qpow(t, l);
                }
                let mut v = qpow(t, decay) / den;
                if s % 2 != 0 {
                    v = -v;
                }
                out *= v;
            }
        }
    }
    Ok(out)
}

/// Truncation and precision plan for one inner sum S_β = Σ_λ a_β(λ) C_λ.
struct InnerPlan {
    beta: Signature,
    /// per finite combo: (λ_2..λ_d, log2|weight|, last e_1)
    cuts: Vec<(Vec<u32>, usize)>,
    prec: usize,
    trunc_bound: f64,
    round_bound: f64,
    terms: usize,
    coeff_log2: f64,
}

fn plan_inner(
    beta: &Signature,
    provider: &dyn MomentProvider,
    budget: f64,
    coeff_log2: f64,
) -> Result<InnerPlan, LimitError> {
    let q = provider.q();
    let coarse = HFactors::new(beta, q, 96);
    let combos = coarse.combos();
    let nc = combos.len().max(1) as f64;
    let lb = (budget / (2.0 * nc)).log2();
    let mut cuts = Vec::new();
    let mut max_log = f64::NEG_INFINITY;
    let mut trunc = 0.0;
    let mut terms = 0usize;
    for c in &combos {
        let lw = log2_abs(&c.weight);
        let l2 = c.tail.first().copied().unwrap_or(0);
        let mut lambda = vec![l2];
        lambda.extend_from_slice(&c.tail);
        let mut prev = f64::INFINITY;
        let mut cut = None;
        for (e1, la) in A1Log::new(beta.parts()[0], q).enumerate() {
            if e1 > MAX_LAMBDA1 {
                return Err(ArithError::NonConvergence {
                    tol: budget,
                    terms: e1,
                }
                .into());
            }
            lambda[0] = l2 + e1 as u32;
            let lt = la + lw + provider.log2_envelope(&lambda);
            if lt == f64::NEG_INFINITY {
                // zero moments from here on only when λ_1 > 0 kills them
                if e1 > 0 {
                    cut = Some((e1, 0.0));
                    break;
                }
                prev = lt;
                continue;
            }
            // once the ratio falls below 1/2 it keeps falling, so the
            // remainder after this term is at most the term itself
            if lt - prev < -1.0 && lt < lb {
                cut = Some((e1, lt.exp2()));
                break;
            }
            max_log = max_log.max(lt);
            prev = lt;
        }
        let (e1, bound) = cut.expect("loop exits through a cut");
        trunc += bound;
        terms += e1 + 1;
        cuts.push((c.tail.clone(), e1));
    }
    // room for the largest term, the accuracy asked for and accumulated rounding
    let lt = (terms.max(1) as f64).log2();
    let need = max_log.max(0.0) - (budget / 2.0).log2() + 2.0 * lt + 24.0;
    let prec = (need.ceil() as usize).max(MIN_PRECISION);
    let round = (max_log.max(0.0) - prec as f64 + 2.0 * lt + 8.0).exp2();
    Ok(InnerPlan {
        beta: beta.clone(),
        cuts,
        prec,
        trunc_bound: trunc,
        round_bound: round,
        terms,
        coeff_log2,
    })
}

fn eval_inner(plan: &InnerPlan, provider: &dyn MomentProvider) -> Real {
    let factors = HFactors::new(&plan.beta, provider.q(), plan.prec);
    let max_e1 = plan.cuts.iter().map(|c| c.1).max().unwrap_or(0);
    let a1 = factors.a1(max_e1);
    let mut total = real_int(0, plan.prec);
    let combos = factors.combos();
    debug_assert_eq!(combos.len(), plan.cuts.len());
    for (c, (tail, cut)) in combos.iter().zip(&plan.cuts) {
        debug_assert_eq!(&c.tail, tail);
        let l2 = tail.first().copied().unwrap_or(0);
        let mut lambda = vec![l2];
        lambda.extend_from_slice(tail);
        let mut inner = real_int(0, plan.prec);
        for (e1, a) in a1.iter().enumerate().take(cut + 1) {
            lambda[0] = l2 + e1 as u32;
            let m = provider.moment(&lambda, plan.prec);
            if !is_zero(&m) {
                inner += a * m;
            }
        }
        total += inner * &c.weight;
    }
    total
}

fn invert(
    nu: &Signature,
    provider: &dyn MomentProvider,
    tol: f64,
    kind: Kind,
) -> Result<InversionReport, LimitError> {
    let d = provider.d();
    if nu.d() != d {
        return Err(LimitError::Dimension {
            expected: d,
            got: nu.d(),
        });
    }
    let q = provider.q();
    LimitLaw::new(d, q, 1.0)?;
    let (depth, beta_tail) = choose_depth(nu, q, provider.mass_bound(), tol / 2.0, kind);
    let betas: Vec<(Signature, f64)> = iterate_dominated_box(nu, depth)
        .filter_map(|b| coefficient_log2(nu, &b, q, kind).map(|c| (b, c)))
        .collect();
    let nb = betas.len().max(1) as f64;
    let mut plans = Vec::with_capacity(betas.len());
    for (b, lc) in &betas {
        let budget = tol / (2.0 * nb) / lc.exp2();
        plans.push(plan_inner(b, provider, budget, *lc)?);
    }
    // highest precision first so the moment cache is built once and reused
    plans.sort_by_key(|p| std::cmp::Reverse(p.prec));
    let max_precision = plans.first().map_or(MIN_PRECISION, |p| p.prec);
    let out_prec = crate::arith::bits_for_tol(tol) + 64;
    let t = one(out_prec) / real(q, out_prec);
    let mut value = real_int(0, out_prec);
    let mut inner_err = 0.0;
    let mut terms = 0;
    for plan in &plans {
        let s = eval_inner(plan, provider);
        let c = coefficient(nu, &plan.beta, &t, kind, tol * 1e-6)?;
        value += c * s.with_precision(out_prec).value();
        inner_err += plan.coeff_log2.exp2() * (plan.trunc_bound + plan.round_bound);
        terms += plan.terms;
    }
    let bound = beta_tail + inner_err + 2f64.powi(-(out_prec as i32) + 8) * nb;
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(bound <= tol) {
        return Err(LimitError::TruncationInsufficient { bound, tol });
    }
    Ok(InversionReport {
        estimate: Estimate {
            value,
            tail_bound: bound,
        },
        depth,
        betas: plans.len(),
        lambda_terms: terms,
        max_precision,
    })
}

/// Σ_β coeff(ν, β) Ĥ_β(μ) with Ĥ from its closed product: the inversion
/// applied to a point mass without going through any series.
pub fn inversion_identity(
    nu: &Signature,
    mu: &ExtendedSignature,
    q: f64,
    tol: f64,
    cdf: bool,
) -> Result<Estimate, LimitError> {
    inversion_identity_with(nu, q, tol, cdf, |b, htol| h_hat(b, mu, q, htol))
}

/// Same sum with Ĥ_β(μ) supplied by `h`, which receives β and the absolute
/// accuracy it must meet.
pub fn inversion_identity_with<F>(
    nu: &Signature,
    q: f64,
    tol: f64,
    cdf: bool,
    mut h: F,
) -> Result<Estimate, LimitError>
where
    F: FnMut(&Signature, f64) -> Result<Estimate, LimitError>,
{
    let kind = if cdf { Kind::Cdf } else { Kind::Weight };
    let (depth, beta_tail) = choose_depth(nu, q, 1.0, tol / 2.0, kind);
    let prec = crate::arith::bits_for_tol(tol) + 64;
    let t = one(prec) / real(q, prec);
    let mut value = real_int(0, prec);
    let mut err = beta_tail;
    for b in iterate_dominated_box(nu, depth) {
        let Some(lc) = coefficient_log2(nu, &b, q, kind) else {
            continue;
        };
        let hb = h(&b, tol * 1e-3 / lc.exp2().max(1.0))?;
        let c = coefficient(nu, &b, &t, kind, tol * 1e-6)?;
        err += lc.exp2() * hb.tail_bound;
        value += c * hb.value;
    }
    Ok(Estimate {
        value,
        tail_bound: err,
    })
}

/// Expected target of [`inversion_identity`].
pub fn identity_target(nu: &Signature, mu: &ExtendedSignature, cdf: bool) -> f64 {
    let hit = if cdf {
        crate::partition::dominance_leq(mu, &ExtendedSignature::from(nu)).unwrap_or(false)
    } else {
        mu.parts()
            .iter()
            .zip(nu.parts())
            .all(|(m, n)| *m == ExtInt::Fin(*n))
    };
    if hit {
        1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::to_f64;
    use crate::limit::{moment_c, pmf_d1};
    use crate::partition::signatures_in_box;

    #[test]
    fn definition_provider_matches_exact_moments() {
        for (d, p, chi) in [(1, 2.0, 1.0), (2, 2.0, 0.5), (3, 3.0, 1.0)] {
            let law = LimitLaw::new(d, p, chi).unwrap();
            let prov = DefinitionProvider::new(law).unwrap();
            for n in 0..7 {
                for lam in crate::partition::partitions_of(n, d) {
                    let exact = to_f64(&moment_c(&law, &lam, 128).unwrap());
                    let got = to_f64(&prov.moment(&lam.padded(d), 128));
                    assert!((got / exact - 1.0).abs() < 1e-13, "{lam} {got} {exact}");
                    assert!(
                        prov.log2_envelope(&lam.padded(d)) >= exact.log2() - 1e-9,
                        "{lam}"
                    );
                }
            }
        }
    }

    #[test]
    fn cdf_shell_bound_holds() {
        for d in 1..=3usize {
            for nu in signatures_in_box(d, -2, 2) {
                let mut lpre = -2.0 * d as f64 * euler_f64(2.0).log2();
                lpre -= (d as f64 - 1.0) * 0.5f64.log2();
                for b in iterate_dominated_box(&nu, 24) {
                    let t = nu.size() - b.size();
                    for kind in [Kind::Weight, Kind::Cdf] {
                        if let Some(l) = coefficient_log2(&nu, &b, 2.0, kind) {
                            let bound = lpre - shell_decay(kind, t, d) as f64;
                            assert!(l <= bound + 1e-9, "{nu} {b} {kind:?} {l} {bound}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn dirac_weights() {
        for mu in signatures_in_box(1, -3, 3) {
            let prov = DiracProvider::new(2.0, mu.to_extended());
            for x in -3..=3 {
                let nu = Signature::from_parts(&[x]);
                let w = invert_weight(&nu, &prov, 1e-8).unwrap().to_f64();
                let want = if mu.parts()[0] == x { 1.0 } else { 0.0 };
                assert!((w - want).abs() < 1e-8, "{mu} {x} {w}");
            }
        }
        let prov = DiracProvider::new(2.0, "(1,0)".parse().unwrap());
        let w = invert_weight(&Signature::from_parts(&[1, 0]), &prov, 1e-7)
            .unwrap()
            .to_f64();
        assert!((w - 1.0).abs() < 1e-7, "{w}");
        let w = invert_weight(&Signature::from_parts(&[0, 0]), &prov, 1e-7)
            .unwrap()
            .to_f64();
        assert!(w.abs() < 1e-7, "{w}");
    }

    #[test]
    fn identity_with_closed_form() {
        for nu in signatures_in_box(2, -2, 2) {
            let mut mus = crate::partition::extended_signatures_in_box(2, -2, 2);
            mus.push("(-5,-5)".parse().unwrap());
            mus.push("(-1,-7)".parse().unwrap());
            for mu in mus {
                for cdf in [false, true] {
                    let e = inversion_identity(&nu, &mu, 2.0, 1e-9, cdf).unwrap();
                    let want = identity_target(&nu, &mu, cdf);
                    assert!(
                        (e.to_f64() - want).abs() < 1e-8,
                        "{nu} {mu} {cdf} {}",
                        e.to_f64()
                    );
                }
            }
        }
    }

    #[test]
    fn pipeline_matches_pmf() {
        let law = LimitLaw::new(1, 2.0, 1.0).unwrap();
        let prov = DefinitionProvider::new(law).unwrap();
        for x in [-2, 0, 1, 3] {
            let nu = Signature::from_parts(&[x]);
            let a = invert_weight(&nu, &prov, 1e-7).unwrap().to_f64();
            let b = pmf_d1(x, 2.0, 1.0, 1e-12).unwrap().to_f64();
            assert!((a - b).abs() < 1e-7, "{x}: {a} {b}");
        }
    }
}
