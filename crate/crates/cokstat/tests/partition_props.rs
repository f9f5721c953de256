use cokstat::partition::{
    dominance_leq, dominates, iterate_dominated_box, ExtInt, ExtendedSignature, Partition,
    Signature,
};
use proptest::prelude::*;

fn partition(max_part: u32, max_len: usize) -> impl Strategy<Value = Partition> {
    prop::collection::vec(0..=max_part, 0..=max_len).prop_map(sorted)
}

fn sorted(mut v: Vec<u32>) -> Partition {
    v.sort_unstable_by(|a, b| b.cmp(a));
    Partition::new(v).unwrap()
}

fn signature(d: usize) -> impl Strategy<Value = Signature> {
    prop::collection::vec(-5i64..=5, d).prop_map(|mut v| {
        v.sort_unstable_by(|a, b| b.cmp(a));
        Signature::from_parts(&v)
    })
}

fn extended(d: usize) -> impl Strategy<Value = ExtendedSignature> {
    (signature(d), 0..=d).prop_map(move |(s, fin)| {
        let parts: Vec<ExtInt> = s
            .parts()
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                if i < fin {
                    ExtInt::Fin(x)
                } else {
                    ExtInt::NegInf
                }
            })
            .collect();
        ExtendedSignature::new(parts).unwrap()
    })
}

fn leq(a: &ExtendedSignature, b: &ExtendedSignature) -> bool {
    dominance_leq(a, b).unwrap()
}

proptest! {
    #[test]
    fn conjugation_is_an_involution(l in partition(8, 8)) {
        prop_assume!(l.size() <= 20);
        let c = l.conjugate();
        prop_assert_eq!(c.size(), l.size());
        prop_assert_eq!(c.conjugate(), l);
    }

    #[test]
    fn text_round_trip(l in partition(9, 6), s in signature(3), e in extended(4)) {
        prop_assert_eq!(l.to_string().parse::<Partition>().unwrap(), l);
        prop_assert_eq!(s.to_string().parse::<Signature>().unwrap(), s);
        prop_assert_eq!(e.to_string().parse::<ExtendedSignature>().unwrap(), e);
    }

    #[test]
    fn dominance_is_a_partial_order(
        (a, b, c) in (1usize..=4).prop_flat_map(|d| (extended(d), extended(d), extended(d)))
    ) {
        prop_assert!(leq(&a, &a));
        if leq(&a, &b) && leq(&b, &a) {
            prop_assert_eq!(&a, &b);
        }
        if leq(&a, &b) && leq(&b, &c) {
            prop_assert!(leq(&a, &c));
        }
    }

    #[test]
    fn containment_implies_dominance(l in partition(6, 4), cut in prop::collection::vec(0u32..=6, 4)) {
        let d = 4;
        let mu: Vec<u32> = l.padded(d).iter().zip(&cut).map(|(x, c)| x.saturating_sub(*c)).collect();
        let mu = sorted(mu);
        prop_assume!(l.contains(&mu));
        prop_assert!(leq(&mu.to_signature(d).to_extended(), &l.to_signature(d).to_extended()));
    }

    #[test]
    fn dominated_box_grows_and_stays_below(d in 1usize..=3, nu in signature(3), depth in 0u64..5) {
        let nu = Signature::from_parts(&nu.parts()[..d]);
        let small: Vec<Signature> = iterate_dominated_box(&nu, depth).collect();
        let big: Vec<Signature> = iterate_dominated_box(&nu, depth + 1).collect();
        for b in &small {
            prop_assert!(dominates(&nu, b));
            prop_assert!(leq(&b.to_extended(), &nu.to_extended()));
            prop_assert!(big.contains(b));
        }
        prop_assert!(small.contains(&nu));
    }
}

#[test]
fn negative_infinity_sorts_last() {
    let e: ExtendedSignature = "(0,-inf)".parse().unwrap();
    assert!(leq(&e, &"(0,-3)".parse().unwrap()));
    assert!(!leq(&"(0,-3)".parse().unwrap(), &e));
    assert!("(-inf,0)".parse::<ExtendedSignature>().is_err());
}
