use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vnlab_core::calculus::eval_poly_on_tuple;
use vnlab_core::lattice::{LatticeBox, MultiIndex};
use vnlab_core::linalg::{DenseMatrix, LinearOperator};
use vnlab_core::multishift::{build_truncated_multishift, CommutingTuple, WeightFamily};
use vnlab_core::poly::{polydisc_sup, AnyPoly, PolyJson, SupConfig};
use vnlab_core::sampling::{complex_gaussian, random_commuting_pair, random_contraction, random_matrix, random_poly};
use vnlab_core::C64;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rank_unrank_roundtrip(sides in prop::collection::vec(1usize..7, 1..5), pick in any::<u64>()) {
        let b = LatticeBox::new(sides).unwrap();
        let k = (pick % b.volume() as u64) as usize;
        let alpha = b.unrank(k).unwrap();
        prop_assert!(b.contains(&alpha));
        prop_assert_eq!(b.rank(&alpha).unwrap(), k);
    }

    #[test]
    fn kronecker_norm_is_multiplicative(seed in any::<u64>(), r in 1usize..6, s in 1usize..6) {
        let mut g = rng(seed);
        let x = random_matrix(&mut g, r, r);
        let y = random_matrix(&mut g, s, s);
        let lhs = x.kron(&y).op_norm().unwrap();
        let rhs = x.op_norm().unwrap() * y.op_norm().unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1.0));
    }

    #[test]
    fn diagonal_tuples_evaluate_pointwise(seed in any::<u64>(), d in 1usize..4, n in 1usize..6) {
        let mut g = rng(seed);
        let points: Vec<Vec<C64>> = (0..n).map(|_| (0..d).map(|_| 0.5 * complex_gaussian(&mut g)).collect()).collect();
        let mats = (0..d)
            .map(|j| DenseMatrix::diagonal(&points.iter().map(|z| z[j]).collect::<Vec<_>>()))
            .collect();
        let t = CommutingTuple::dense(mats).unwrap();
        let p = random_poly(&mut g, d, 4);
        let value = eval_poly_on_tuple(&p, &t).unwrap().densify().unwrap();
        let expected = DenseMatrix::diagonal(&points.iter().map(|z| p.eval(z).unwrap()).collect::<Vec<_>>());
        prop_assert!(value.sub(&expected).unwrap().max_abs() <= 1e-10 * (1.0 + expected.max_abs()));
    }

    #[test]
    fn sup_bracket_dominates_samples(seed in any::<u64>(), d in 1usize..3) {
        let mut g = rng(seed);
        let p = random_poly(&mut g, d, 4);
        let sup = polydisc_sup(&p, &SupConfig { grid_n: [0, 64, 32][d], ..Default::default() }).unwrap();
        prop_assert!(sup.lower <= sup.upper);
        let at_witness: Vec<C64> = sup.witness.iter().map(|&t| C64::from_polar(1.0, t)).collect();
        prop_assert!(p.eval(&at_witness).unwrap().norm() >= sup.lower - 1e-12);
        for _ in 0..200 {
            let z: Vec<C64> = (0..d).map(|_| C64::from_polar(g.random_range(0.0..1.0f64).sqrt(), g.random_range(0.0..std::f64::consts::TAU))).collect();
            prop_assert!(p.eval(&z).unwrap().norm() <= sup.upper);
        }
    }

    #[test]
    fn truncations_commute(seed in any::<u64>(), n in 1usize..4, m in 2usize..6) {
        let mut g = rng(seed);
        let (a, b) = random_commuting_pair(&mut g, n);
        let w = WeightFamily::constant(vec![a, b]).unwrap();
        let t = build_truncated_multishift(&w, &LatticeBox::cube(2, m).unwrap()).unwrap();
        let scale = t.norms().unwrap().iter().fold(1.0f64, |acc, x| acc.max(*x));
        prop_assert!(t.commutation_residual() <= 1e-12 * scale * scale);
    }

    #[test]
    fn larger_boxes_never_shrink_norms(seed in any::<u64>(), m in 1usize..5) {
        let mut g = rng(seed);
        let w = WeightFamily::constant(vec![random_contraction(&mut g, 2)]).unwrap();
        let p = random_poly(&mut g, 1, 4);
        let norm = |side| {
            let t = build_truncated_multishift(&w, &LatticeBox::cube(1, side).unwrap()).unwrap();
            eval_poly_on_tuple(&p, &t).unwrap().densify().unwrap().op_norm().unwrap()
        };
        prop_assert!(norm(m + 1) >= norm(m) - 1e-10);
    }

    #[test]
    fn polynomial_json_roundtrip(seed in any::<u64>(), d in 1usize..5) {
        let p = random_poly(&mut rng(seed), d, 5);
        let text = serde_json::to_string(&p.to_json()).unwrap();
        match PolyJson::parse(&text).unwrap() {
            AnyPoly::Scalar(q) => prop_assert_eq!(q, p),
            AnyPoly::Matrix(_) => prop_assert!(false, "scalar polynomial came back as a matrix"),
        }
    }
}

#[test]
fn unit_index_shifts_stay_in_a_larger_box() {
    let b = LatticeBox::new(vec![3, 4]).unwrap();
    let big = b.expanded(1);
    for alpha in b.iter() {
        for axis in 0..2 {
            let mut e = alpha.entries().to_vec();
            e[axis] += 1;
            assert!(big.contains(&MultiIndex::new(e)));
        }
    }
}
