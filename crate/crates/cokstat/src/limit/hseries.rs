//! The functions Ĥ_β and their power series H_β.
//!
//! H_β(z) = ∏_{j>β_1} (1 - z_1 q^{-j}) ∏_{i≥2} ∏_{j=B_i+1}^{B_{i-1}+β_{i-1}} (1 - z_i q^{-j})
//! with B_i = β_1 + … + β_i. The coefficient a_β(λ) multiplies
//! z_1^{λ_1-λ_2} ⋯ z_d^{λ_d}, and Ĥ_β(μ) = H_β(q^{M_1}, …, q^{M_d}) with M the
//! prefix sums of μ.

use crate::arith::{
    binom2, is_zero, log2_abs, one, qpoch, qpow, real, real_int, to_f64, Estimate, PochBase,
    PochLen, QPochSpec, Real,
};
use crate::partition::{ExtInt, ExtendedSignature, Signature};

use super::{euler_f64, LimitError};

/// Ĥ_β(μ) via its q-Pochhammer product.
///
/// Nonzero and in (0,1] whenever μ ≤ β. For d ≤ 2 it vanishes off that set; for
/// d ≥ 3 it need not, e.g. β = (4,2,2), μ = (3,3,3) gives about 0.2166 at q = 2.
pub fn h_hat(
    beta: &Signature,
    mu: &ExtendedSignature,
    q: f64,
    tol: f64,
) -> Result<Estimate, LimitError> {
    if beta.d() != mu.d() {
        return Err(LimitError::Dimension {
            expected: beta.d(),
            got: mu.d(),
        });
    }
    super::LimitLaw::new(beta.d(), q, 1.0)?;
    let prec = crate::arith::bits_for_tol(tol) + 32;
    let t = one(prec) / real(q, prec);
    let b = beta.parts();
    let bsum = prefix(b);
    let msum = mu.prefix_sums();
    let base = |i: usize| match msum[i] {
        ExtInt::NegInf => PochBase::Zero,
        ExtInt::Fin(m) => PochBase::QPower(bsum[i] - m + 1),
    };
    let mut finite = one(prec);
    for i in 1..b.len() {
        let len = (b[i - 1] - b[i]) as u64;
        let f = qpoch(
            &QPochSpec::new(base(i), t.clone(), PochLen::Finite(len)),
            tol,
        )?;
        finite *= f.value;
    }
    let scale = to_f64(&finite).abs().max(1.0);
    let first = qpoch(
        &QPochSpec::new(base(0), t.clone(), PochLen::Infinite),
        tol / scale,
    )?;
    Ok(Estimate {
        tail_bound: first.tail_bound * to_f64(&finite).abs(),
        value: first.value * finite,
    })
}

fn prefix(b: &[i64]) -> Vec<i64> {
    b.iter()
        .scan(0i64, |s, &x| {
            *s += x;
            Some(*s)
        })
        .collect()
}

/// The factors of H_β: the coefficients of the infinite z_1 factor are
/// produced on demand, the finite factors are expanded once.
#[derive(Clone, Debug)]
pub struct HFactors {
    pub beta: Signature,
    pub q: f64,
    qinv: Real,
    /// `finite[i-1][k]` is the z_{i+1}^k coefficient of the (i+1)-th factor.
    finite: Vec<Vec<Real>>,
}

/// One choice of (e_2, …, e_d) with nonzero finite-factor weight.
#[derive(Clone, Debug)]
pub struct Combo {
    /// (λ_2, …, λ_d) determined by the exponents.
    pub tail: Vec<u32>,
    pub weight: Real,
}

impl HFactors {
    pub fn new(beta: &Signature, q: f64, prec: usize) -> Self {
        let qinv = one(prec) / real(q, prec);
        let b = beta.parts();
        let bsum = prefix(b);
        let mut finite = Vec::new();
        for i in 1..b.len() {
            let start = bsum[i] + 1;
            let n = (b[i - 1] - b[i]) as usize;
            let mut poly = vec![one(prec)];
            for j in start..start + n as i64 {
                let c = qpow(&qinv, j);
                let mut next = poly.clone();
                next.push(real_int(0, prec));
                for k in 0..poly.len() {
                    next[k + 1] -= &poly[k] * &c;
                }
                poly = next;
            }
            finite.push(poly);
        }
        HFactors {
            beta: beta.clone(),
            q,
            qinv,
            finite,
        }
    }

    pub fn d(&self) -> usize {
        self.beta.d()
    }

    pub fn precision(&self) -> usize {
        self.qinv.precision()
    }

    /// Coefficients A_1(m) = (-1)^m q^{-β_1 m - binom(m+1,2)} / (q^{-1};q^{-1})_m, m ≤ max.
    pub fn a1(&self, max: usize) -> Vec<Real> {
        let prec = self.precision();
        let b1 = self.beta.parts()[0];
        let one_r = one(prec);
        let mut out = Vec::with_capacity(max + 1);
        out.push(one_r.clone());
        for m in 1..=max as i64 {
            let num = qpow(&self.qinv, b1 + m);
            let den = &one_r - qpow(&self.qinv, m);
            let prev = &out[(m - 1) as usize];
            out.push(-(prev * num) / den);
        }
        out
    }

    /// Nonzero products of finite-factor coefficients, one per (e_2, …, e_d).
    pub fn combos(&self) -> Vec<Combo> {
        let d = self.d();
        let prec = self.precision();
        let mut out = vec![(vec![0u32; d.saturating_sub(1)], one(prec))];
        // e_i ranges over the z_i coefficients; tail entries are suffix sums
        for (idx, poly) in self.finite.iter().enumerate() {
            let mut next = Vec::new();
            for (es, w) in &out {
                for (k, c) in poly.iter().enumerate() {
                    if is_zero(c) {
                        continue;
                    }
                    let mut es = es.clone();
                    es[idx] = k as u32;
                    next.push((es, w * c));
                }
            }
            out = next;
        }
        out.into_iter()
            .map(|(es, weight)| {
                let mut tail = es.clone();
                for i in (0..tail.len().saturating_sub(1)).rev() {
                    tail[i] += tail[i + 1];
                }
                Combo { tail, weight }
            })
            .collect()
    }

    /// The constant E with |a_β(λ)| ≤ E q^{-β_1(λ_1-λ_2) - binom(λ_1-λ_2+1, 2)}.
    pub fn coefficient_bound_constant(&self) -> f64 {
        let w = self
            .combos()
            .iter()
            .map(|c| log2_abs(&c.weight))
            .fold(f64::NEG_INFINITY, f64::max);
        w.exp2() / euler_f64(self.q)
    }
}

/// log2 |A_1(m)| for m = 0, 1, … computed in double precision.
pub(crate) struct A1Log {
    lq: f64,
    b1: i64,
    qinv: f64,
    m: i64,
    lfac: f64,
}

impl A1Log {
    pub(crate) fn new(b1: i64, q: f64) -> Self {
        A1Log {
            lq: q.log2(),
            b1,
            qinv: 1.0 / q,
            m: 0,
            lfac: 0.0,
        }
    }
}

impl Iterator for A1Log {
    type Item = f64;
    fn next(&mut self) -> Option<f64> {
        let m = self.m;
        if m > 0 {
            self.lfac += (1.0 - self.qinv.powi(m as i32)).log2();
        }
        self.m += 1;
        Some((-(self.b1 * m) - binom2(m + 1)) as f64 * self.lq - self.lfac)
    }
}

/// H_β truncated to λ_1 ≤ `lambda1_max`.
#[derive(Clone, Debug)]
pub struct HSeries {
    pub factors: HFactors,
    pub lambda1_max: u32,
    /// (λ padded to length d, a_β(λ))
    pub coefficients: Vec<(Vec<u32>, Real)>,
}

pub fn h_series(beta: &Signature, q: f64, lambda1_max: u32, prec: usize) -> HSeries {
    let factors = HFactors::new(beta, q, prec);
    let a1 = factors.a1(lambda1_max as usize);
    let mut coefficients = Vec::new();
    for c in factors.combos() {
        let l2 = c.tail.first().copied().unwrap_or(0);
        if l2 > lambda1_max {
            continue;
        }
        for e1 in 0..=(lambda1_max - l2) {
            let mut lambda = vec![e1 + l2];
            lambda.extend_from_slice(&c.tail);
            coefficients.push((lambda, &a1[e1 as usize] * &c.weight));
        }
    }
    coefficients.sort_by(|a, b| a.0.cmp(&b.0));
    HSeries {
        factors,
        lambda1_max,
        coefficients,
    }
}

impl HSeries {
    pub fn coefficient(&self, lambda: &[u32]) -> Option<&Real> {
        self.coefficients
            .binary_search_by(|c| c.0.as_slice().cmp(lambda))
            .ok()
            .map(|i| &self.coefficients[i].1)
    }

    /// Adds `delta` to one coefficient; used to check that the verification
    /// suites notice a corrupted series.
    pub fn perturb(&mut self, lambda: &[u32], delta: f64) {
        let prec = self.factors.precision();
        if let Ok(i) = self
            .coefficients
            .binary_search_by(|c| c.0.as_slice().cmp(lambda))
        {
            self.coefficients[i].1 += real(delta, prec);
        }
    }

    /// Σ_λ a_β(λ) q^{λ·μ} over the stored λ, plus a bound on the omitted
    /// λ_1 > lambda1_max part.
    pub fn evaluate(&self, mu: &ExtendedSignature) -> Result<Estimate, LimitError> {
        let d = self.factors.d();
        if mu.d() != d {
            return Err(LimitError::Dimension {
                expected: d,
                got: mu.d(),
            });
        }
        let prec = self.factors.precision();
        let qr = real(self.factors.q, prec);
        let mut sum = real_int(0, prec);
        for (lambda, a) in &self.coefficients {
            if let Some(w) = pair(lambda, mu) {
                sum += a * qpow(&qr, w);
            }
        }
        Ok(Estimate {
            value: sum,
            tail_bound: self.tail_bound(mu),
        })
    }

    fn tail_bound(&self, mu: &ExtendedSignature) -> f64 {
        let msum = mu.prefix_sums();
        let m1 = match msum[0] {
            ExtInt::NegInf => return 0.0,
            ExtInt::Fin(m) => m,
        };
        let lq = self.factors.q.log2();
        // Σ over finite combos of |w| q^{Σ_{i≥2} M_i e_i}, with M_i e_i = λ·μ - M_1 e_1
        let mut rest = Vec::new();
        for c in self.factors.combos() {
            let mut lambda = vec![c.tail.first().copied().unwrap_or(0)];
            lambda.extend_from_slice(&c.tail);
            if let Some(w) = pair(&lambda, mu) {
                rest.push((lambda[0], log2_abs(&c.weight) + w as f64 * lq));
            }
        }
        let mut total = 0.0;
        for (l2, lw) in rest {
            let start = self.lambda1_max.saturating_sub(l2) as i64 + 1;
            let mut prev = f64::INFINITY;
            for (e1, la) in A1Log::new(self.factors.beta.parts()[0], self.factors.q)
                .enumerate()
                .skip(start as usize)
            {
                let lt = la + (m1 * e1 as i64) as f64 * lq + lw;
                total += lt.exp2();
                // the term ratio only decreases from here on, so once it is
                // below 1/2 the remainder is at most the current term
                if lt - prev < -1.0 && (lt < -1100.0 || lt.exp2() < total * 1e-20) {
                    total += lt.exp2();
                    break;
                }
                prev = lt;
            }
        }
        total
    }
}

/// λ·μ when finite; None when it is -inf.
fn pair(lambda: &[u32], mu: &ExtendedSignature) -> Option<i64> {
    let mut w = 0i64;
    for (l, m) in lambda.iter().zip(mu.parts()) {
        if *l == 0 {
            continue;
        }
        match m {
            ExtInt::NegInf => return None,
            ExtInt::Fin(m) => w += *l as i64 * m,
        }
    }
    Some(w)
}
