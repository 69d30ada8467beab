use ndarray::Array2;
use proptest::prelude::*;
use terrain_core::combine::{combine, weighted_sum, CombineKind, Modifier};
use terrain_core::expr::{eval_expression_terrain, parse};
use terrain_core::{Extent, GridSpec, Terrain, TerrainError};

fn spec() -> GridSpec {
    GridSpec::new(Extent::new(0.0, 6.0, 0.0, 4.0), 6, 4).unwrap()
}

fn terrain() -> impl Strategy<Value = Terrain> {
    prop::collection::vec(-100.0f64..100.0, 24)
        .prop_map(|v| Terrain::new(spec(), Array2::from_shape_vec((6, 4), v).unwrap()).unwrap())
}

proptest! {
    #[test]
    fn weighted_sum_matches_cellwise_sum(ts in prop::collection::vec(terrain(), 1..5), w in prop::collection::vec(-3.0f64..3.0, 5)) {
        let w = &w[..ts.len()];
        let out = weighted_sum(&ts, w).unwrap();
        for ((i, j), v) in out.heights().indexed_iter() {
            let expect: f64 = ts.iter().zip(w).map(|(t, w)| w * t.get(i, j)).sum();
            prop_assert!((v - expect).abs() <= 1e-9 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn weighted_sum_is_linear(a in terrain(), b in terrain(), s in -5.0f64..5.0) {
        let lhs = weighted_sum(&[&a, &b], &[s, s]).unwrap();
        let sum = combine(&[&a, &b], CombineKind::Add).unwrap();
        let rhs = Modifier::Scale(s).apply(&sum).unwrap();
        for (x, y) in lhs.heights().iter().zip(rhs.heights()) {
            prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn folds_are_order_independent(mut ts in prop::collection::vec(terrain(), 1..5)) {
        for kind in [CombineKind::Add, CombineKind::Min, CombineKind::Max] {
            let a = combine(&ts, kind).unwrap();
            ts.reverse();
            let b = combine(&ts, kind).unwrap();
            for (x, y) in a.heights().iter().zip(b.heights()) {
                prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()));
            }
        }
    }

    #[test]
    fn min_and_max_bound_every_input(ts in prop::collection::vec(terrain(), 1..5)) {
        let lo = combine(&ts, CombineKind::Min).unwrap();
        let hi = combine(&ts, CombineKind::Max).unwrap();
        for t in &ts {
            for ((i, j), v) in t.heights().indexed_iter() {
                prop_assert!(lo.get(i, j) <= *v && *v <= hi.get(i, j));
            }
        }
    }

    #[test]
    fn clip_bounds_and_is_idempotent(t in terrain(), lo in -50.0f64..0.0, span in 0.0f64..80.0) {
        let m = Modifier::Clip { lo, hi: lo + span };
        let once = m.apply(&t).unwrap();
        prop_assert!(once.min() >= lo && once.max() <= lo + span);
        let twice = m.apply(&once).unwrap();
        prop_assert_eq!(twice.heights(), once.heights());
    }

    #[test]
    fn smoothing_keeps_the_mean(t in terrain(), sigma in 0.1f64..3.0) {
        let s = Modifier::Smooth(sigma).apply(&t).unwrap();
        prop_assert!((s.mean() - t.mean()).abs() < 1e-9 * (1.0 + t.mean().abs()) + 1e-9);
        prop_assert!(s.max() <= t.max() + 1e-9 && s.min() >= t.min() - 1e-9);
    }
}

#[test]
fn product_and_constant_cases() {
    let a = Terrain::constant(spec(), 2.0);
    let b = Terrain::constant(spec(), -3.5);
    assert!(combine(&[&a, &b], CombineKind::Prod).unwrap().heights().iter().all(|v| *v == -7.0));
    assert!(matches!(combine::<&Terrain>(&[], CombineKind::Add), Err(TerrainError::NoTerrains)));
    assert!(weighted_sum(&[&a, &b], &[1.0]).is_err());
    let other = Terrain::constant(GridSpec::new(Extent::new(0.0, 6.0, 0.0, 4.0), 3, 4).unwrap(), 0.0);
    assert!(matches!(combine(&[&a, &other], CombineKind::Add), Err(TerrainError::GridMismatch(_))));
    assert!(Modifier::Clip { lo: 1.0, hi: 0.0 }.apply(&a).is_err());
    assert!(Modifier::Smooth(-1.0).apply(&a).is_err());
}

#[test]
fn rounding() {
    let t = Terrain::from_fn(spec(), |x, _| x / 3.0).unwrap();
    let r = Modifier::Around(2).apply(&t).unwrap();
    assert_eq!(r.get(0, 0), 0.17);
    assert_eq!(r.get(5, 0), 1.83);
}

#[test]
fn expressions() {
    let s = GridSpec::new(Extent::new(-2.0, 2.0, -2.0, 2.0), 4, 4).unwrap();
    let t = eval_expression_terrain("x**2 + np.abs(y) - 2*x*y", s).unwrap();
    for ((i, j), v) in t.heights().indexed_iter() {
        let (x, y) = (s.x_center(i), s.y_center(j));
        assert!((v - (x * x + y.abs() - 2.0 * x * y)).abs() < 1e-12);
    }
    let r = eval_expression_terrain("r", s).unwrap();
    assert!((r.get(0, 0) - 1.5f64.hypot(1.5)).abs() < 1e-12);
    assert!(eval_expression_terrain("1/(x-x)", s).is_err());
    for (bad, column) in [("x +", 4), ("sin(x", 6), ("x $ y", 3), ("foo(x)", 1)] {
        match parse(bad) {
            Err(TerrainError::Expression { column: c, .. }) => assert_eq!(c, column, "{bad}"),
            other => panic!("{bad}: {other:?}"),
        }
    }
}
