use proptest::prelude::*;

use llgeo::cocycle::{cocycle_direct, cocycle_via_pairing, CocycleInput};
use llgeo::generators::{make_bp_soliton_at, make_random};
use llgeo::io::{decode, encode, Snapshot};
use llgeo::momenta::{degree, momentum_n};
use llgeo::so3::{self, Mat3, Vec3};
use llgeo::*;

fn small_vec() -> impl Strategy<Value = Vec3> {
    (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b, c)| Vec3::new(a, b, c))
}

fn element() -> impl Strategy<Value = EuclideanAlgebraElement> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(|(w, x, y)| {
        EuclideanAlgebraElement::new(SkewMatrix::from_upper(2, &[w]).unwrap(), &[x, y]).unwrap()
    })
}

fn element3() -> impl Strategy<Value = EuclideanAlgebraElement> {
    (small_vec(), small_vec()).prop_map(|(w, a)| {
        EuclideanAlgebraElement::new(SkewMatrix::from_upper(3, w.as_slice()).unwrap(), a.as_slice()).unwrap()
    })
}

fn size(e: &EuclideanAlgebraElement) -> f64 {
    (e.omega.norm().powi(2) + e.adot.norm_squared()).sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exp_is_a_rotation(v in small_vec()) {
        let r = so3::exp(&v);
        prop_assert!((r.transpose() * r - Mat3::identity()).norm() < 1e-12);
        prop_assert!((r.determinant() - 1.0).abs() < 1e-12);
        prop_assert!((so3::exp(&-v) * r - Mat3::identity()).norm() < 1e-12);
    }

    #[test]
    fn log_inverts_exp_below_pi(v in small_vec()) {
        prop_assume!(v.norm() < 3.0);
        prop_assert!((so3::log(&so3::exp(&v)).unwrap() - v).norm() < 1e-9);
    }

    #[test]
    fn random_fields_satisfy_invariants(seed in 0u64..1000, amp in 0.1..3.0f64) {
        let g = Grid::cube(2, 24, 5.0).unwrap();
        let n = make_random(&g, seed, amp, 3.5).unwrap();
        prop_assert!(n.norm_deviation() < 1e-14);
        prop_assert!(n.is_decaying());
        for (i, v) in n.values().iter().enumerate() {
            if n.in_layer(i) {
                prop_assert_eq!(*v, llgeo::field::k_axis() * -1.0);
            }
        }
        prop_assert!(momentum_n(&n) >= 0.0);
        prop_assert_eq!(n, make_random(&g, seed, amp, 3.5).unwrap());
    }

    #[test]
    fn snapshot_encoding_round_trips(seed in 0u64..1000, cells in 12usize..24) {
        let g = Grid::centered(&[cells, cells + 3], &[8.0, 9.0]).unwrap();
        let n = make_random(&g, seed, 2.0, 1.5).unwrap();
        let snap = Snapshot::Spin(n);
        let bytes = encode(&snap);
        let back = decode(&bytes).unwrap();
        prop_assert_eq!(&back, &snap);
        prop_assert_eq!(encode(&back), bytes);
    }

    #[test]
    fn algebra_bracket_is_antisymmetric(a in element3(), b in element3(), c in element3()) {
        let ab = a.bracket(&b);
        let ba = b.bracket(&a);
        prop_assert!(size(&ab.add(&ba)) < 1e-14);
        let jacobi = a.bracket(&b.bracket(&c))
            .add(&b.bracket(&c.bracket(&a)))
            .add(&c.bracket(&a.bracket(&b)));
        prop_assert!(size(&jacobi) < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn cocycle_is_antisymmetric_and_bilinear(
        seed in 0u64..1000, a in element(), b in element(), c in element(), s in -2.0..2.0f64
    ) {
        let g = Grid::cube(2, 40, 6.0).unwrap();
        let mu = make_random(&g, seed, 2.5, 4.0).unwrap();
        let sigma = |x: &EuclideanAlgebraElement, y: &EuclideanAlgebraElement| {
            let inp = CocycleInput::new(mu.clone(), *x, *y).unwrap();
            (cocycle_direct(&inp), cocycle_via_pairing(&inp))
        };
        let (ab, ab_pair) = sigma(&a, &b);
        let (ba, _) = sigma(&b, &a);
        let scale = 1.0 + ab.abs();
        prop_assert!((ab + ba).abs() < 1e-10 * scale);
        prop_assert!((ab - ab_pair).abs() < 1e-9 * scale);
        let (lin, _) = sigma(&a.scale(s).add(&c), &b);
        let (cb, _) = sigma(&c, &b);
        prop_assert!((lin - (s * ab + cb)).abs() < 1e-9 * (1.0 + lin.abs()));
    }

    #[test]
    fn degree_is_insensitive_to_small_shifts(dx in -0.5..0.5f64, dy in -0.5..0.5f64) {
        let g = Grid::cube(2, 96, 8.0).unwrap();
        let n = make_bp_soliton_at(&g, 1, 1.5, 5.5, SpaceVec::new(dx, dy, 0.0)).unwrap();
        prop_assert!((degree(&n).unwrap() - 1.0).abs() < 0.02);
    }
}
