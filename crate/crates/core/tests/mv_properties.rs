//! Mixed-volume properties checked against an independent
//! inclusion–exclusion oracle and the defining axioms.

use num_rational::BigRational;
use num_traits::{FromPrimitive, ToPrimitive, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use toric_core::lattice::{ExponentVector, Support};
use toric_core::subdivision::{mixed_volume, total_volume};

fn support(points: &[Vec<i64>]) -> Support {
    Support::new(points.iter().map(|p| ExponentVector::new(p.clone())).collect())
}

/// Inclusion–exclusion over Minkowski sums of every nonempty subset:
/// MV(Q1..Qn) = sum_S (-1)^(n-|S|) Vol(sum_{i in S} Qi).
fn mv_oracle(supports: &[&Support]) -> i64 {
    let n = supports.len();
    let mut acc = BigRational::zero();
    for mask in 1u32..(1 << n) {
        let subset: Vec<&Support> = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| supports[i])
            .collect();
        let vol = total_volume(&subset);
        if (n - subset.len()) % 2 == 0 {
            acc += vol;
        } else {
            acc -= vol;
        }
    }
    assert!(acc.is_integer(), "oracle value must be an integer");
    acc.to_integer().to_i64().unwrap()
}

fn random_support(rng: &mut ChaCha8Rng, n: usize) -> Support {
    loop {
        let npts = rng.gen_range(2..=5);
        let mut pts: Vec<Vec<i64>> = (0..npts)
            .map(|_| (0..n).map(|_| rng.gen_range(0..=4)).collect())
            .collect();
        pts.sort();
        pts.dedup();
        if pts.len() >= 2 {
            return support(&pts);
        }
    }
}

#[test]
fn matches_inclusion_exclusion_oracle_on_random_instances() {
    for seed in 0..40u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 2 + (seed % 2) as usize;
        let supports: Vec<Support> = (0..n).map(|_| random_support(&mut rng, n)).collect();
        let refs: Vec<&Support> = supports.iter().collect();
        let mv = mixed_volume(&refs).unwrap();
        let oracle = mv_oracle(&refs);
        assert_eq!(mv, oracle, "seed {} supports {:?}", seed, supports);
    }
}

#[test]
fn degenerate_family_has_zero_mixed_volume() {
    // both polytopes are segments along the same line: MV must vanish
    let a = support(&[vec![0, 0], vec![1, 1]]);
    let b = support(&[vec![0, 0], vec![2, 2], vec![3, 3]]);
    assert_eq!(mixed_volume(&[&a, &b]).unwrap(), 0);
    assert_eq!(mv_oracle(&[&a, &b]), 0);
}

fn arb_support(n: usize) -> impl Strategy<Value = Support> {
    proptest::collection::vec(proptest::collection::vec(0i64..=4, n), 2..=5).prop_filter_map(
        "needs two distinct points",
        |mut pts| {
            pts.sort();
            pts.dedup();
            if pts.len() >= 2 {
                Some(support(&pts))
            } else {
                None
            }
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn symmetry_in_the_arguments(a in arb_support(2), b in arb_support(2)) {
        prop_assert_eq!(mixed_volume(&[&a, &b]).unwrap(), mixed_volume(&[&b, &a]).unwrap());
    }

    #[test]
    fn translation_invariance(a in arb_support(2), b in arb_support(2), t in proptest::collection::vec(-3i64..=3, 2)) {
        let shift = ExponentVector::new(t);
        let shifted = Support::new(a.points().iter().map(|p| p + &shift).collect());
        prop_assert_eq!(
            mixed_volume(&[&a, &b]).unwrap(),
            mixed_volume(&[&shifted, &b]).unwrap()
        );
    }

    #[test]
    fn diagonal_identity_is_scaled_volume(q in arb_support(2)) {
        // MV(Q, Q) = 2! * Vol(Q) in the lattice normalization
        let mv = mixed_volume(&[&q, &q]).unwrap();
        let two_vol = BigRational::from_i64(2).unwrap() * total_volume(&[&q]);
        prop_assert!(two_vol.is_integer());
        prop_assert_eq!(mv, two_vol.to_integer().to_i64().unwrap());
    }

    #[test]
    fn three_dimensional_diagonal_identity(q in arb_support(3)) {
        let mv = mixed_volume(&[&q, &q, &q]).unwrap();
        let six_vol = BigRational::from_i64(6).unwrap() * total_volume(&[&q]);
        prop_assert!(six_vol.is_integer());
        prop_assert_eq!(mv, six_vol.to_integer().to_i64().unwrap());
    }
}
