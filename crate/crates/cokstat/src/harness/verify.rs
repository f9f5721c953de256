//! Self-check suites run by `verify`. Each suite is a fast, deterministic
//! slice of the property tests, so a release binary can check itself.

use rand::Rng;
use serde::Serialize;

use crate::arith::{is_zero, real_int, to_f64};
use crate::lab::{
    make_distribution, sample_matrix, smith_valuations, substream, BitMatrix, DistKind,
    MatrixModPL, ResidueRing,
};
use crate::limit::{
    check_qbinomial_identities, h_hat, h_series, identity_target, inversion_identity,
    inversion_identity_with, LimitError,
};
use crate::partition::{
    dominance_leq, extended_signatures_in_box, iterate_subpartitions, partitions_of,
    signatures_in_box, ExtInt, ExtendedSignature, Partition, Signature,
};
use crate::pgroup::oracle::{
    brute_force_chain_count, brute_force_subgroups, brute_force_sur_count, DEFAULT_CAP,
};
use crate::pgroup::{
    chain_count, hom_count, max_chain_bounds, max_chain_count_of, nk_ratio, subgroup_count,
    subgroup_count_bounds, sur_count, AbelianPGroup,
};

pub const SUITES: [&str; 4] = ["qseries", "triangularity", "groups", "lab"];

#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    /// Added to the λ = (1, 0, …) coefficient of the series H_ν before the
    /// series-based inversion check, to confirm the check can fail.
    pub perturb: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
}

/// Runs `selector` ("all" or one of [`SUITES`]). Unknown names yield an empty
/// failing report.
pub fn verify_suite(selector: &str, opts: &VerifyOptions) -> VerifyReport {
    let names: Vec<&str> = if selector == "all" {
        SUITES.to_vec()
    } else {
        vec![selector]
    };
    let suites: Vec<SuiteReport> = names
        .into_iter()
        .map(|name| {
            let checks = match name {
                "qseries" => qseries(opts),
                "triangularity" => vec![triangularity()],
                "groups" => groups(),
                "lab" => lab(),
                other => vec![Check {
                    name: "selector".into(),
                    passed: false,
                    detail: format!("unknown suite {other:?}"),
                }],
            };
            SuiteReport {
                suite: name.to_string(),
                passed: checks.iter().all(|c| c.passed),
                checks,
            }
        })
        .collect();
    VerifyReport {
        passed: suites.iter().all(|s| s.passed),
        suites,
    }
}

fn check(name: &str, result: Result<Option<String>, String>, ok_detail: String) -> Check {
    match result {
        Ok(None) => Check {
            name: name.into(),
            passed: true,
            detail: ok_detail,
        },
        Ok(Some(fail)) | Err(fail) => Check {
            name: name.into(),
            passed: false,
            detail: fail,
        },
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn qseries(opts: &VerifyOptions) -> Vec<Check> {
    let mut out = Vec::new();

    let mut worst = 0f64;
    let r = (|| {
        for q in [1.5, 2.0, 3.0] {
            for n in -4..=4 {
                let ms = (-4..=4).map(ExtInt::Fin).chain([ExtInt::NegInf]);
                for m in ms {
                    let res = check_qbinomial_identities(n, m, q, 1e-12).map_err(err)?;
                    let w = res.weight.max(res.cdf);
                    worst = worst.max(w);
                    if w > 1e-9 {
                        return Ok(Some(format!("q={q} n={n} m={m:?}: residual {w:e}")));
                    }
                }
            }
        }
        Ok(None)
    })();
    out.push(check(
        "qbinomial_identities",
        r,
        format!("max residual {worst:e}"),
    ));

    let mut worst = 0f64;
    let r = (|| {
        for q in [2.0, 3.0] {
            for (b, mus) in [
                (vec![0], vec!["(0)", "(3)", "(-2)", "(-inf)"]),
                (
                    vec![1, -1],
                    vec!["(0,0)", "(1,-2)", "(2,-inf)", "(-inf,-inf)"],
                ),
            ] {
                let beta = Signature::from_parts(&b);
                let s = h_series(&beta, q, 60, 192);
                for m in mus {
                    let mu: ExtendedSignature = m.parse().map_err(err)?;
                    let a = s.evaluate(&mu).map_err(err)?;
                    let h = h_hat(&beta, &mu, q, 1e-20).map_err(err)?;
                    let diff = (to_f64(&a.value) - to_f64(&h.value)).abs() + a.tail_bound;
                    worst = worst.max(diff);
                    if diff > 1e-12 {
                        return Ok(Some(format!("β={b:?} μ={m}: {diff:e}")));
                    }
                }
            }
        }
        Ok(None)
    })();
    out.push(check(
        "series_matches_product",
        r,
        format!("max difference {worst:e}"),
    ));

    let r = (|| {
        let beta = Signature::from_parts(&[1, -2, -2]);
        let s = h_series(&beta, 3.0, 25, 200);
        let e = s.factors.coefficient_bound_constant();
        for (lambda, a) in &s.coefficients {
            let e1 = (lambda[0] - lambda[1]) as i64;
            let bound = e * 3f64.powf((-e1 - crate::arith::binom2(e1 + 1)) as f64);
            if to_f64(a).abs() > bound * (1.0 + 1e-12) {
                return Ok(Some(format!("λ={lambda:?} exceeds the bound")));
            }
        }
        Ok(None)
    })();
    out.push(check("coefficient_bound", r, "ok".into()));

    for cdf in [false, true] {
        let mut worst = 0f64;
        let r = (|| {
            for d in 1..=2 {
                for nu in signatures_in_box(d, -2, 2) {
                    for mu in extended_signatures_in_box(d, -2, 2) {
                        let est = inversion_identity(&nu, &mu, 2.0, 1e-8, cdf).map_err(err)?;
                        let diff = (est.to_f64() - identity_target(&nu, &mu, cdf)).abs();
                        worst = worst.max(diff);
                        if diff > 1e-6 {
                            return Ok(Some(format!("ν={nu} μ={mu}: {diff:e}")));
                        }
                    }
                }
            }
            Ok(None)
        })();
        let name = if cdf {
            "cdf_identity"
        } else {
            "weight_identity"
        };
        out.push(check(name, r, format!("max residual {worst:e}")));
    }

    let mut worst = 0f64;
    let r = (|| {
        let q = 2.0;
        for nu in [
            Signature::from_parts(&[0]),
            Signature::from_parts(&[1, 0]),
            Signature::from_parts(&[0, -1]),
        ] {
            for mu in [
                "(0)", "(1)", "(-1)", "(-inf)", "(1,0)", "(0,-1)", "(0,0)", "(1,-inf)",
            ] {
                let mu: ExtendedSignature = mu.parse().map_err(err)?;
                if mu.d() != nu.d() {
                    continue;
                }
                let est = series_identity(&nu, &mu, q, opts.perturb).map_err(err)?;
                let diff = (est - identity_target(&nu, &mu, false)).abs();
                worst = worst.max(diff);
                if diff > 1e-6 {
                    return Ok(Some(format!("ν={nu} μ={mu}: {diff:e}")));
                }
            }
        }
        Ok(None)
    })();
    out.push(check(
        "series_inversion_identity",
        r,
        format!("max residual {worst:e}"),
    ));
    out
}

/// Weight inversion of the point mass at μ with every Ĥ_β(μ) taken from the
/// truncated power series.
fn series_identity(
    nu: &Signature,
    mu: &ExtendedSignature,
    q: f64,
    perturb: Option<f64>,
) -> Result<f64, LimitError> {
    let d = nu.d();
    let est = inversion_identity_with(nu, q, 1e-8, false, |beta, _| {
        let mut s = h_series(beta, q, 60, 192);
        if let (Some(delta), true) = (perturb, beta == nu) {
            let mut lambda = vec![0u32; d];
            lambda[0] = 1;
            s.perturb(&lambda, delta);
        }
        s.evaluate(mu)
    })?;
    Ok(est.to_f64())
}

fn triangularity() -> Check {
    let mut count = 0usize;
    let r = (|| {
        for d in 1..=2 {
            for beta in signatures_in_box(d, -3, 3) {
                for mu in extended_signatures_in_box(d, -3, 3) {
                    let h = h_hat(&beta, &mu, 2.0, 1e-15).map_err(err)?;
                    let v = to_f64(&h.value);
                    let dominated = dominance_leq(&mu, &beta.to_extended()).map_err(err)?;
                    count += 1;
                    if !(-1e-15..=1.0 + 1e-15).contains(&v) {
                        return Ok(Some(format!("β={beta} μ={mu}: value {v}")));
                    }
                    if is_zero(&h.value) == dominated {
                        return Ok(Some(format!("β={beta} μ={mu}: zero pattern")));
                    }
                }
            }
        }
        Ok(None)
    })();
    check("triangularity", r, format!("{count} pairs"))
}

fn groups_up_to(p: u64, max_exp: u32) -> Vec<AbelianPGroup> {
    (0..=max_exp)
        .flat_map(|n| partitions_of(n, n as usize))
        .map(|ty| AbelianPGroup::new(p, ty).unwrap())
        .collect()
}

fn groups() -> Vec<Check> {
    let mut out = Vec::new();
    let small: Vec<AbelianPGroup> = groups_up_to(2, 5)
        .into_iter()
        .chain(groups_up_to(3, 3))
        .collect();

    let r = (|| {
        for g in &small {
            let brute = brute_force_subgroups(g, DEFAULT_CAP).map_err(err)?;
            for mu in iterate_subpartitions(&g.ty) {
                let c = brute.get(&mu).copied().unwrap_or(0);
                if subgroup_count(&mu, &g.ty, g.p) != c.into() {
                    return Ok(Some(format!("subgroups of type {mu} in {}", g.ty)));
                }
            }
            for k in 0..=3 {
                if chain_count(g, k) != brute_force_chain_count(g, k, DEFAULT_CAP).map_err(err)? {
                    return Ok(Some(format!("n_{k} of {}", g.ty)));
                }
            }
        }
        for p in [2, 3] {
            for lambda in (0..=3).flat_map(|n| partitions_of(n, 3)) {
                for mu in (0..=4).flat_map(|n| partitions_of(n, 4)) {
                    let b = brute_force_sur_count(&mu, &lambda, p, DEFAULT_CAP).map_err(err)?;
                    if sur_count(&mu, &lambda, p) != b {
                        return Ok(Some(format!("Sur({mu}, {lambda}) at p={p}")));
                    }
                }
            }
        }
        Ok(None)
    })();
    out.push(check(
        "oracle_equivalence",
        r,
        format!("{} groups", small.len()),
    ));

    let r = (|| {
        for p in [2u64, 3] {
            for lambda in (0..=6).flat_map(|n| partitions_of(n, n as usize)) {
                for mu in iterate_subpartitions(&lambda) {
                    let c = subgroup_count(&mu, &lambda, p);
                    let (lo, hi) = subgroup_count_bounds(&mu, &lambda, p);
                    if c < lo || real_int(c.clone(), 256) > hi {
                        return Ok(Some(format!("subgroup bound for {mu} ⊆ {lambda} at p={p}")));
                    }
                }
            }
            for d in 1..=3u32 {
                for n in 0..=6 {
                    for lc in partitions_of(n, n as usize) {
                        if lc.first() > d {
                            continue;
                        }
                        let lambda = lc.conjugate();
                        let c = max_chain_count_of(&lc, p);
                        let (lo, hi) = max_chain_bounds(&lc, p, d as u64);
                        if c < lo || real_int(c.clone(), 256) > hi {
                            return Ok(Some(format!("chain bound for λ={lambda} at p={p}")));
                        }
                    }
                }
            }
        }
        Ok(None)
    })();
    out.push(check("count_bounds", r, "ok".into()));

    let ratio = nk_ratio(
        &AbelianPGroup::new(2, Partition::from_parts(&[1, 1])).unwrap(),
        10_000,
    );
    out.push(Check {
        name: "nk_ratio".into(),
        passed: (ratio / 3.0 - 1.0).abs() < 0.02,
        detail: format!("n_k/binom(k,2) at k=10^4 for (Z/2)^2: {ratio:.5}"),
    });

    let r = (|| {
        for p in [2u64, 3] {
            for lambda in (0..=4).flat_map(|n| partitions_of(n, n as usize)) {
                for mu in (0..=4).flat_map(|n| partitions_of(n, n as usize)) {
                    let total: crate::arith::ExactInt = iterate_subpartitions(&lambda)
                        .map(|nu| subgroup_count(&nu, &lambda, p) * sur_count(&mu, &nu, p))
                        .sum();
                    if total != hom_count(&mu, &lambda, p) {
                        return Ok(Some(format!("Hom({mu}, {lambda}) at p={p}")));
                    }
                }
            }
        }
        Ok(None)
    })();
    out.push(check("hom_factorization", r, "ok".into()));
    out
}

/// U·diag·V for random unimodular U, V built from elementary row operations.
fn scrambled_diagonal<R: Rng>(ring: ResidueRing, vals: &[u32], rng: &mut R) -> MatrixModPL {
    let n = vals.len();
    let mut rows: Vec<Vec<i64>> = vec![vec![0; n]; n];
    for (i, &v) in vals.iter().enumerate() {
        rows[i][i] = (ring.p as i64).pow(v);
    }
    let mut m = MatrixModPL::from_rows(ring, &rows);
    for side in 0..2 {
        let mut u = MatrixModPL::identity(n, ring);
        for _ in 0..3 * n {
            let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
            if i == j {
                continue;
            }
            let c = rng.random_range(0..ring.modulus);
            for col in 0..n {
                let x = ring.add(u.entries[i * n + col], ring.mul(c, u.entries[j * n + col]));
                u.entries[i * n + col] = x;
            }
        }
        m = if side == 0 { u.mul(&m) } else { m.mul(&u) };
    }
    m
}

fn lab() -> Vec<Check> {
    let mut out = Vec::new();
    let r = (|| {
        for case in 0..200u64 {
            let mut rng = substream(7, case);
            let p = if case % 2 == 0 { 2 } else { 3 };
            let ring = ResidueRing::new(p, 3).map_err(err)?;
            let n = rng.random_range(1..=8);
            let mut vals: Vec<u32> = (0..n).map(|_| rng.random_range(0..=3)).collect();
            let m = scrambled_diagonal(ring, &vals, &mut rng);
            vals.sort_unstable();
            if smith_valuations(&m) != vals {
                return Ok(Some(format!("case {case}: expected {vals:?}")));
            }
        }
        Ok(None)
    })();
    out.push(check("snf_unimodular_invariance", r, "200 cases".into()));

    let r = (|| {
        let dist = make_distribution(DistKind::UniformResidues, 2).map_err(err)?;
        let ring = ResidueRing::new(2, 1).map_err(err)?;
        for case in 0..100u64 {
            let mut rng = substream(11, case);
            let n = rng.random_range(1..=64);
            let b = BitMatrix::sample(&dist, n, &mut rng);
            let rows: Vec<Vec<i64>> = (0..n)
                .map(|i| (0..n).map(|j| b.get(i, j) as i64).collect())
                .collect();
            let m = MatrixModPL::from_rows(ring, &rows);
            let general = smith_valuations(&m).iter().filter(|&&v| v == 0).count();
            if general != b.rank() {
                return Ok(Some(format!("case {case}: n={n}")));
            }
        }
        Ok(None)
    })();
    out.push(check("gf2_matches_general", r, "100 cases".into()));

    let r = (|| {
        let ring = ResidueRing::new(3, 2).map_err(err)?;
        let dist = make_distribution(DistKind::UniformResidues, 3).map_err(err)?;
        let mut rng = substream(13, 0);
        let a = sample_matrix(&dist, 5, ring, &mut rng);
        let i = MatrixModPL::identity(5, ring);
        Ok((a.mul(&i) != a || i.mul(&a) != a).then(|| "identity product".to_string()))
    })();
    out.push(check("matrix_product", r, "ok".into()));
    out
}
