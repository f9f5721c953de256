//! Exact integers, working-precision reals and the q-special functions
//! (q-Pochhammer symbols, Gaussian binomials) used everywhere else.

use dashu::base::{BitTest, UnsignedAbs};
use dashu::float::round::mode::HalfEven;
use dashu::float::FBig;
use dashu::integer::IBig;

/// Arbitrary-precision signed integer used for all group-theoretic counts.
pub type ExactInt = IBig;

/// Binary floating point number with a per-value significand precision.
pub type Real = FBig<HalfEven, 2>;

pub const DEFAULT_TOL: f64 = 1e-14;

/// Smallest significand length ever used for a [`Real`].
pub const MIN_PRECISION: usize = 64;

/// Bits needed to resolve absolute errors of size `tol` on O(1) quantities,
/// plus 64 guard bits.
pub fn bits_for_tol(tol: f64) -> usize {
    let need = if tol > 0.0 && tol.is_finite() {
        (-tol.log2()).ceil().max(0.0) as usize
    } else {
        0
    };
    (need + 64).max(MIN_PRECISION)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ArithError {
    #[error("q^-1 must lie strictly inside (0,1), got {0}")]
    Domain(f64),
    #[error("series did not reach tolerance {tol:e} within {terms} terms")]
    NonConvergence { tol: f64, terms: usize },
}

/// Rounds an `f64` into a [`Real`] of the given precision.
///
/// # Panics
/// On NaN.
pub fn real(x: f64, prec: usize) -> Real {
    let v = Real::try_from(x).expect("NaN has no Real representation");
    v.with_precision(prec).value()
}

pub fn real_int(n: impl Into<IBig>, prec: usize) -> Real {
    Real::from(n.into()).with_precision(prec).value()
}

pub fn zero(prec: usize) -> Real {
    real_int(0, prec)
}

pub fn one(prec: usize) -> Real {
    real_int(1, prec)
}

pub fn to_f64(x: &Real) -> f64 {
    x.to_f64().value()
}

pub fn is_zero(x: &Real) -> bool {
    x.repr().is_zero()
}

/// log2 |x|, exact to within one unit of the leading bit position;
/// `-inf` for zero. Safe for exponents outside the `f64` range.
pub fn log2_abs(x: &Real) -> f64 {
    if is_zero(x) {
        return f64::NEG_INFINITY;
    }
    let sig = x.repr().significand();
    let bits = sig.unsigned_abs().bit_len();
    // keep 53 leading bits of the significand for the fractional part
    let shift = bits.saturating_sub(53);
    let top: u64 = (sig.unsigned_abs() >> shift).try_into().unwrap_or(u64::MAX);
    (top as f64).log2() + shift as f64 + x.repr().exponent() as f64
}

/// q^e for integer e.
pub fn qpow(q: &Real, e: i64) -> Real {
    q.powi(IBig::from(e))
}

pub fn exact_pow(p: u64, e: u64) -> ExactInt {
    IBig::from(p).pow(e as usize)
}

/// Base `a` of a q-Pochhammer symbol.
#[derive(Clone, Debug)]
pub enum PochBase {
    Value(Real),
    /// a = qinv^e, supplied symbolically so vanishing factors are detected exactly.
    QPower(i64),
    /// a = 0 (also the image of qinv^{+inf}).
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PochLen {
    Finite(u64),
    Infinite,
}

#[derive(Clone, Debug)]
pub struct QPochSpec {
    pub a: PochBase,
    pub qinv: Real,
    pub k: PochLen,
}

impl QPochSpec {
    pub fn new(a: PochBase, qinv: Real, k: PochLen) -> Self {
        QPochSpec { a, qinv, k }
    }
}

/// A value together with a bound on the error committed by truncating an
/// infinite series or product.
#[derive(Clone, Debug)]
pub struct Estimate {
    pub value: Real,
    pub tail_bound: f64,
}

impl Estimate {
    pub fn exact(value: Real) -> Self {
        Estimate {
            value,
            tail_bound: 0.0,
        }
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.value)
    }
}

const MAX_POCH_FACTORS: u64 = 10_000_000;

/// (a; qinv)_k = prod_{i<k} (1 - a qinv^i).
///
/// For an infinite product the loop stops at the first `i` with
/// `|a| qinv^i < tol (1 - qinv)`; the reported bound is
/// `|partial| (exp(s) - 1)` with `s` the geometric tail sum.
pub fn qpoch(spec: &QPochSpec, tol: f64) -> Result<Estimate, ArithError> {
    let qf = to_f64(&spec.qinv);
    if !(qf > 0.0 && qf < 1.0) {
        return Err(ArithError::Domain(qf));
    }
    let prec = spec.qinv.precision().max(MIN_PRECISION);
    let x0 = match &spec.a {
        PochBase::Zero => return Ok(Estimate::exact(one(prec))),
        PochBase::QPower(e) => {
            let e = *e;
            // factor i vanishes when e + i = 0
            if e <= 0 {
                let hit = (-e) as u64;
                let vanishes = match spec.k {
                    PochLen::Finite(k) => hit < k,
                    PochLen::Infinite => true,
                };
                if vanishes {
                    return Ok(Estimate::exact(zero(prec)));
                }
            }
            qpow(&spec.qinv, e)
        }
        PochBase::Value(a) => a.clone(),
    };
    let one_r = one(prec);
    let mut prod = one_r.clone();
    let mut x = x0;
    match spec.k {
        PochLen::Finite(k) => {
            for _ in 0..k {
                let f = &one_r - &x;
                if is_zero(&f) {
                    return Ok(Estimate::exact(zero(prec)));
                }
                prod *= f;
                x *= &spec.qinv;
            }
            Ok(Estimate::exact(prod))
        }
        PochLen::Infinite => {
            let stop = (tol * (1.0 - qf)).log2();
            let mut i = 0u64;
            loop {
                let lx = log2_abs(&x);
                if lx < stop {
                    let s = lx.exp2() / (1.0 - qf);
                    let tail = to_f64(&prod).abs() * s.exp_m1();
                    return Ok(Estimate {
                        value: prod,
                        tail_bound: tail,
                    });
                }
                if i >= MAX_POCH_FACTORS {
                    return Err(ArithError::NonConvergence {
                        tol,
                        terms: i as usize,
                    });
                }
                let f = &one_r - &x;
                if is_zero(&f) {
                    return Ok(Estimate::exact(zero(prec)));
                }
                prod *= f;
                x *= &spec.qinv;
                i += 1;
            }
        }
    }
}

/// (t; t)_m for m = 0..=max, as a table.
pub fn qfactorials(t: &Real, max: usize) -> Vec<Real> {
    let prec = t.precision().max(MIN_PRECISION);
    let one_r = one(prec);
    let mut out = Vec::with_capacity(max + 1);
    out.push(one_r.clone());
    let mut tp = t.clone();
    for m in 1..=max {
        let next = &out[m - 1] * (&one_r - &tp);
        out.push(next);
        tp *= t;
    }
    out
}

/// (t; t)_inf with its truncation bound.
pub fn euler_product(t: &Real, tol: f64) -> Result<Estimate, ArithError> {
    qpoch(
        &QPochSpec::new(PochBase::QPower(1), t.clone(), PochLen::Infinite),
        tol,
    )
}

/// [n, k]_p in floating point.
pub fn gaussian_binomial(n: i64, k: i64, p: f64) -> f64 {
    if n < 0 || k < 0 || k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 1..=k {
        acc *= (p.powi((n - i + 1) as i32) - 1.0) / (p.powi(i as i32) - 1.0);
    }
    acc
}

/// [n, k]_p for integer p, exactly.
pub fn gaussian_binomial_exact(n: i64, k: i64, p: u64) -> ExactInt {
    if n < 0 || k < 0 || k > n {
        return IBig::ZERO;
    }
    let k = k.min(n - k);
    let pb = IBig::from(p);
    let mut num = IBig::ONE;
    let mut den = IBig::ONE;
    for i in 1..=k {
        num *= pb.pow((n - i + 1) as usize) - IBig::ONE;
        den *= pb.pow(i as usize) - IBig::ONE;
    }
    num / den
}

/// [n, k]_t evaluated at a real base, via the product formula.
pub fn gaussian_binomial_real(n: i64, k: i64, t: &Real) -> Real {
    let prec = t.precision().max(MIN_PRECISION);
    if n < 0 || k < 0 || k > n {
        return zero(prec);
    }
    let k = k.min(n - k);
    let one_r = one(prec);
    let mut acc = one_r.clone();
    for i in 1..=k {
        acc *= &one_r - qpow(t, n - i + 1);
        acc /= &one_r - qpow(t, i);
    }
    acc
}

pub fn binom2(n: i64) -> i64 {
    n * (n - 1) / 2
}

/// Ordinary binomial coefficient as an [`ExactInt`].
pub fn binomial(n: u64, k: u64) -> ExactInt {
    if k > n {
        return IBig::ZERO;
    }
    let k = k.min(n - k);
    let mut acc = IBig::ONE;
    for i in 0..k {
        acc *= IBig::from(n - i);
        acc /= IBig::from(i + 1);
    }
    acc
}

/// Converts an exact integer to the nearest `f64` (may be infinite).
pub fn exact_to_f64(n: &ExactInt) -> f64 {
    to_f64(&Real::from(n.clone()).with_precision(64).value())
}
