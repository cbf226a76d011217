//! Serialize/parse round-trips over randomly generated problem data.

use ndarray::{Array1, Array2};
use proptest::prelude::*;
use sensas::{AffineQuadraticProblem, ParameterVector};
use sensas_cli::{parse_problem_text, serialize_affine, ParsedProblem};

fn values(n: usize) -> impl Strategy<Value = Vec<f64>> {
    // Mix of awkward magnitudes; all finite.
    prop::collection::vec(
        prop_oneof![
            -1e3f64..1e3,
            -1e-6f64..1e-6,
            Just(0.0),
            Just(-0.0),
            Just(1.0 / 3.0),
        ],
        n,
    )
}

fn arbitrary_problem() -> impl Strategy<Value = (AffineQuadraticProblem, ParameterVector)> {
    (1usize..4, 1usize..4).prop_flat_map(|(k_u, n_a)| {
        (
            values(k_u * k_u),
            values(k_u * k_u),
            values(k_u),
            values(k_u),
            values(k_u),
            values(k_u * k_u),
            values(k_u * n_a),
            values(n_a),
            values(n_a * n_a),
            values(n_a),
            0..n_a,
            0..n_a,
        )
            .prop_map(
                move |(l0, l1, q0, q1, c, m, n, d, g, alpha0, k1, k2)| {
                    let mut data = AffineQuadraticProblem::zeros(k_u, n_a);
                    data.l0 = Array2::from_shape_vec((k_u, k_u), l0).unwrap();
                    data.l1.insert(k1, Array2::from_shape_vec((k_u, k_u), l1).unwrap());
                    data.q0 = Array1::from_vec(q0);
                    data.q1.insert(k2, Array1::from_vec(q1));
                    let (j, k) = (k1.min(k2), k1.max(k2));
                    data.l2.insert((j, k), Array2::zeros((k_u, k_u)));
                    data.q2.insert((j, k), Array1::from_vec(c.clone()));
                    data.c = Array1::from_vec(c);
                    let msym = Array2::from_shape_vec((k_u, k_u), m).unwrap();
                    data.m = &msym + &msym.t();
                    data.n = Array2::from_shape_vec((k_u, n_a), n).unwrap();
                    data.d = Array1::from_vec(d);
                    let gsym = Array2::from_shape_vec((n_a, n_a), g).unwrap();
                    data.g = &gsym + &gsym.t();
                    let alpha0 = ParameterVector::new(Array1::from_vec(alpha0)).unwrap();
                    (data, alpha0)
                },
            )
    })
}

fn bits1(v: &Array1<f64>) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

fn bits2(v: &Array2<f64>) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

proptest! {
    /// Every stored block survives a serialize/parse cycle bit-for-bit.
    #[test]
    fn serialize_parse_is_identity((data, alpha0) in arbitrary_problem()) {
        let text = serialize_affine(&data, &alpha0);
        let parsed = parse_problem_text(&text).unwrap();
        let (back, alpha_back) = match parsed {
            ParsedProblem::Affine { data, alpha0 } => (data, alpha0),
            other => panic!("expected affine data, got {other:?}"),
        };
        prop_assert_eq!(bits1(&alpha_back.values), bits1(&alpha0.values));
        prop_assert_eq!(bits2(&back.l0), bits2(&data.l0));
        prop_assert_eq!(bits1(&back.q0), bits1(&data.q0));
        prop_assert_eq!(bits1(&back.c), bits1(&data.c));
        prop_assert_eq!(bits2(&back.m), bits2(&data.m));
        prop_assert_eq!(bits2(&back.n), bits2(&data.n));
        prop_assert_eq!(bits1(&back.d), bits1(&data.d));
        prop_assert_eq!(bits2(&back.g), bits2(&data.g));
        prop_assert_eq!(back.l1.len(), data.l1.len());
        for (k, block) in &data.l1 {
            prop_assert_eq!(bits2(&back.l1[k]), bits2(block));
        }
        for (jk, block) in &data.l2 {
            prop_assert_eq!(bits2(&back.l2[jk]), bits2(block));
        }
        for (k, block) in &data.q1 {
            prop_assert_eq!(bits1(&back.q1[k]), bits1(block));
        }
        for (jk, block) in &data.q2 {
            prop_assert_eq!(bits1(&back.q2[jk]), bits1(block));
        }
    }
}
