use cokstat::arith::{real_int, ExactInt};
use cokstat::partition::{iterate_subpartitions, partitions_of, Partition};
use cokstat::pgroup::oracle::{
    brute_force_chain_count_literal, brute_force_sur_count, brute_force_type_pairs, DEFAULT_CAP,
};
use cokstat::pgroup::{
    chain_count, hom_count, max_chain_bounds, max_chain_count_of, nk_ratio, subgroup_count,
    subgroup_count_bounds, sur_count, AbelianPGroup,
};
use proptest::prelude::*;

fn all_partitions(max_size: u32) -> Vec<Partition> {
    (0..=max_size)
        .flat_map(|n| partitions_of(n, n as usize))
        .collect()
}

fn small_partition() -> impl Strategy<Value = Partition> {
    prop::sample::select(all_partitions(6))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hom_factors_through_surjections(mu in small_partition(), lambda in small_partition(), p in prop::sample::select(vec![2u64, 3, 5])) {
        let total: ExactInt = iterate_subpartitions(&lambda)
            .map(|nu| subgroup_count(&nu, &lambda, p) * sur_count(&mu, &nu, p))
            .sum();
        prop_assert_eq!(total, hom_count(&mu, &lambda, p));
    }

    #[test]
    fn sur_matches_generator_enumeration(mu in small_partition(), lambda in small_partition(), p in prop::sample::select(vec![2u64, 3])) {
        let order = |l: &Partition| (p as u128).pow(l.size() as u32);
        prop_assume!(order(&mu) <= 64 && order(&lambda) <= 64);
        let brute = brute_force_sur_count(&mu, &lambda, p, DEFAULT_CAP).unwrap();
        prop_assert_eq!(sur_count(&mu, &lambda, p), brute);
    }

    #[test]
    fn surjections_need_room(mu in small_partition(), lambda in small_partition()) {
        let s = sur_count(&mu, &lambda, 2);
        prop_assert!(s <= hom_count(&mu, &lambda, 2));
        if !mu.contains(&lambda) {
            prop_assert_eq!(s, ExactInt::ZERO);
        }
    }
}

#[test]
fn subgroup_quotient_duality() {
    for p in [2u64, 3] {
        for lambda in all_partitions(6) {
            let g = AbelianPGroup::new(p, lambda.clone()).unwrap();
            if g.order_u128().is_none_or(|o| o > 729) {
                continue;
            }
            let pairs = brute_force_type_pairs(&g, 1024).unwrap();
            for mu in iterate_subpartitions(&lambda) {
                let by_cotype = pairs.iter().filter(|(_, c)| *c == mu).count() as u64;
                let by_type = pairs.iter().filter(|(t, _)| *t == mu).count() as u64;
                assert_eq!(
                    subgroup_count(&mu, &lambda, p),
                    by_type.into(),
                    "{mu} in {lambda}"
                );
                assert_eq!(by_cotype, by_type, "{mu} in {lambda} at p={p}");
            }
        }
    }
}

#[test]
fn chains_match_lattice_walks() {
    for p in [2u64, 3] {
        for lambda in all_partitions(6) {
            let g = AbelianPGroup::new(p, lambda.clone()).unwrap();
            if g.order_u128().is_none_or(|o| o > 64) {
                continue;
            }
            for k in 0..=3 {
                let lit = brute_force_chain_count_literal(&g, k, DEFAULT_CAP).unwrap();
                assert_eq!(chain_count(&g, k), lit, "n_{k}({lambda}) p={p}");
            }
        }
    }
}

#[test]
fn subgroup_bounds() {
    for p in [2u64, 3] {
        for lambda in all_partitions(8) {
            for mu in iterate_subpartitions(&lambda) {
                let c = subgroup_count(&mu, &lambda, p);
                let (lo, hi) = subgroup_count_bounds(&mu, &lambda, p);
                assert!(lo <= c, "{mu} ⊆ {lambda}");
                assert!(real_int(c, 256) <= hi, "{mu} ⊆ {lambda}");
            }
        }
    }
}

#[test]
fn composition_series_bounds() {
    for p in [2u64, 3] {
        for d in 1..=4u32 {
            for n in 0..=10 {
                for lc in partitions_of(n, n as usize)
                    .into_iter()
                    .filter(|l| l.first() <= d)
                {
                    let c = max_chain_count_of(&lc, p);
                    let (lo, hi) = max_chain_bounds(&lc, p, d as u64);
                    assert!(lo <= c && real_int(c, 256) <= hi, "{lc} d={d} p={p}");
                }
            }
        }
    }
}

#[test]
fn known_chain_counts() {
    let g = |p, v: &[u32]| AbelianPGroup::new(p, Partition::from_parts(v)).unwrap();
    // cyclic groups have a single composition series, n_k(Z/p) = k
    assert_eq!(max_chain_count_of(&Partition::row(5), 3), 1.into());
    for k in 0..8 {
        assert_eq!(chain_count(&g(2, &[1]), k), k.into());
    }
    // (Z/p)^2 has p + 1 composition series
    assert_eq!(
        max_chain_count_of(&Partition::from_parts(&[1, 1]), 5),
        6.into()
    );
    let r = nk_ratio(&g(2, &[1, 1]), 10_000);
    assert!((r / 3.0 - 1.0).abs() < 0.02, "{r}");
}
