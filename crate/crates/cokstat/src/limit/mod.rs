//! The limit laws L_{d,q^{-1},χ}: moments, the explicit d = 1 mass
//! function, the H-functions and moment inversion.

pub mod hseries;
pub mod invert;

use dashu::integer::IBig;

use crate::arith::{
    binom2, bits_for_tol, is_zero, one, qpoch, qpow, real, real_int, to_f64, ArithError, Estimate,
    PochBase, PochLen, QPochSpec, Real,
};
use crate::partition::{ExtInt, Partition};
use crate::pgroup::{is_prime, max_chain_count_of};

pub use hseries::{h_hat, h_series, HFactors, HSeries};
pub use invert::{
    identity_target, inversion_identity, inversion_identity_with, invert_cdf, invert_cdf_report,
    invert_weight, invert_weight_report, DefinitionProvider, DiracProvider, InversionReport,
    MomentProvider,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LimitError {
    #[error("invalid law parameters: {0}")]
    BadLaw(String),
    #[error("moments need q to be a prime integer, got {0}")]
    NonPrimeQ(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("truncation bound {bound:e} exceeds tolerance {tol:e}")]
    TruncationInsufficient { bound: f64, tol: f64 },
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// L_{d,q^{-1},χ}.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LimitLaw {
    pub d: usize,
    pub q: f64,
    pub chi: f64,
}

impl LimitLaw {
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail
    pub fn new(d: usize, q: f64, chi: f64) -> Result<Self, LimitError> {
        if d == 0 || !(q > 1.0) || !(chi > 0.0) || !q.is_finite() || !chi.is_finite() {
            return Err(LimitError::BadLaw(format!("d={d} q={q} chi={chi}")));
        }
        Ok(LimitLaw { d, q, chi })
    }

    /// q as a prime integer, if it is one.
    pub fn prime(&self) -> Result<u64, LimitError> {
        let p = self.q as u64;
        if p as f64 == self.q && is_prime(p) {
            Ok(p)
        } else {
            Err(LimitError::NonPrimeQ(self.q))
        }
    }
}

/// Same law with χ replaced by χ q^{-steps}. Since C_λ scales by
/// q^{-steps|λ|}, its samples are the original ones minus steps·(1,…,1).
pub fn shift_law(law: &LimitLaw, steps: i64) -> LimitLaw {
    LimitLaw {
        chi: law.chi * law.q.powi(-(steps as i32)),
        ..*law
    }
}

/// C_λ = E[q^{λ·L}] = ((q-1)χ)^{|λ|} / |λ|! · n_max(G_{λ'}), using the exact
/// chain count.
pub fn moment_c(law: &LimitLaw, lambda: &Partition, prec: usize) -> Result<Real, LimitError> {
    if lambda.len() > law.d {
        return Err(LimitError::Dimension {
            expected: law.d,
            got: lambda.len(),
        });
    }
    let p = law.prime()?;
    let n = lambda.size();
    let nmax = max_chain_count_of(&lambda.conjugate(), p);
    let base = real((law.q - 1.0) * law.chi, prec);
    let mut fact = IBig::ONE;
    for i in 1..=n {
        fact *= IBig::from(i);
    }
    Ok(base.powi(IBig::from(n)) * real_int(nmax, prec) / real_int(fact, prec))
}

/// (q^{-1}; q^{-1})_inf in double precision.
pub(crate) fn euler_f64(q: f64) -> f64 {
    let t = 1.0 / q;
    let mut acc = 1.0;
    let mut tp = t;
    while tp > 1e-18 {
        acc *= 1.0 - tp;
        tp *= t;
    }
    acc
}

const MAX_PMF_TERMS: i64 = 10_000;

/// Pr(L_{1,p^{-1},χ} = x) from the alternating series
/// (p^{-1};p^{-1})_inf^{-1} Σ_m e^{-χ p^{m-x}} (-1)^m p^{-binom(m,2)} / (p^{-1};p^{-1})_m.
///
/// `tol` is an absolute accuracy target; the series stops once the remaining
/// terms are provably below tol/2.
pub fn pmf_d1(x: i64, p: f64, chi: f64, tol: f64) -> Result<Estimate, LimitError> {
    LimitLaw::new(1, p, chi)?;
    let e_inf = euler_f64(p);
    // cancellation headroom: |terms| are at most 1/(..)_inf
    let prec = bits_for_tol(tol) + (-2.0 * e_inf.log2()).ceil() as usize + 16;
    let pr = real(p, prec);
    let t = one(prec) / &pr;
    let chi_r = real(chi, prec);
    let lp = p.log2();
    let mut sum = real_int(0, prec);
    let mut qfac = one(prec); // (t;t)_m
    let mut m = 0i64;
    loop {
        // bound on Σ_{j≥m} |T_j| relative to the final normalization
        let log2_env = -chi * p.powf((m - x) as f64) / std::f64::consts::LN_2
            - binom2(m) as f64 * lp
            - e_inf.log2();
        let geo = if m >= 1 {
            1.0 / (1.0 - p.powi(-(m as i32)))
        } else {
            f64::INFINITY
        };
        let tail = log2_env.exp2() * geo / e_inf;
        if m >= 1 && tail < tol / 2.0 {
            let norm = crate::arith::euler_product(&t, tol * e_inf / 4.0)?;
            let value = sum / &norm.value;
            let rounding = (m as f64) * 2f64.powi(-(prec as i32) + 4) / (e_inf * e_inf);
            let bound = tail + rounding + norm.tail_bound / (e_inf * e_inf);
            return Ok(Estimate {
                value,
                tail_bound: bound,
            });
        }
        if m > MAX_PMF_TERMS {
            return Err(ArithError::NonConvergence {
                tol,
                terms: m as usize,
            }
            .into());
        }
        if m >= 1 {
            qfac *= one(prec) - qpow(&t, m);
        }
        // e^{-arg} below 2^{-prec}: the term is negligible (and exp would overflow)
        if chi * p.powf((m - x) as f64) / std::f64::consts::LN_2 < (prec + 64) as f64 {
            let arg = &chi_r * qpow(&pr, m - x);
            let e = (-arg).exp();
            let mut term = e * qpow(&t, binom2(m)) / &qfac;
            if m % 2 == 1 {
                term = -term;
            }
            sum += term;
        }
        m += 1;
    }
}

/// Residuals of the two q-binomial identities
/// Σ_b (-1)^{n-b} q^{-binom(n-b,2)} (q^{-(n-b+1)})_inf (q^{-(b-m+1)})_inf / (q^{-1};q^{-1})_inf^2 = 1(n = m)
/// and the same with binom(n-b+1, 2) summing to 1(m ≤ n).
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct IdentityResiduals {
    pub weight: f64,
    pub cdf: f64,
}

pub fn check_qbinomial_identities(
    n: i64,
    m: ExtInt,
    q: f64,
    tol: f64,
) -> Result<IdentityResiduals, LimitError> {
    LimitLaw::new(1, q, 1.0)?;
    let prec = bits_for_tol(tol) + 32;
    let t = one(prec) / real(q, prec);
    let inner_tol = tol / 1e3;
    let poch = |e: Option<i64>| -> Result<Estimate, LimitError> {
        let base = match e {
            Some(e) => PochBase::QPower(e),
            None => PochBase::Zero,
        };
        Ok(qpoch(
            &QPochSpec::new(base, t.clone(), PochLen::Infinite),
            inner_tol,
        )?)
    };
    let e_inf = poch(Some(1))?.value;
    let norm = &e_inf * &e_inf;
    let mut w = real_int(0, prec);
    let mut c = real_int(0, prec);
    let lo = match m {
        ExtInt::Fin(m) => Some(m),
        ExtInt::NegInf => None,
    };
    let ef = to_f64(&e_inf);
    let mut b = n;
    while lo.is_none_or(|lo| b >= lo) {
        let s = n - b;
        if lo.is_none() {
            // remaining terms are below q^{-binom(s,2)}/(..)^2 with geometric decay
            let bound = q.powf(-(binom2(s) as f64)) / (ef * ef) / (1.0 - 1.0 / q);
            if s > 1 && bound < tol / 1e3 {
                break;
            }
        }
        let a = poch(Some(s + 1))?.value;
        let h = poch(lo.map(|lo| b - lo + 1))?.value;
        let core = a * h / &norm;
        if !is_zero(&core) {
            let sign = if s % 2 == 0 { 1 } else { -1 };
            w += &core * qpow(&t, binom2(s)) * real_int(sign, prec);
            c += &core * qpow(&t, binom2(s + 1)) * real_int(sign, prec);
        }
        b -= 1;
    }
    let ind_w = if lo == Some(n) { 1.0 } else { 0.0 };
    let ind_c = if lo.is_none_or(|lo| lo <= n) {
        1.0
    } else {
        0.0
    };
    Ok(IdentityResiduals {
        weight: (to_f64(&w) - ind_w).abs(),
        cdf: (to_f64(&c) - ind_c).abs(),
    })
}
