use proptest::prelude::*;
use replicator_core::dynamics::replicator_field_raw;
use replicator_core::equilibria::{residual, DEFAULT_ENUM_TOL};
use replicator_core::phase::simplex_lattice;
use replicator_core::{
    build, converge, enumerate_fixed_points, replicator_field, FixedPoint, ModelSpec, PayoffMatrix,
    SimplexState, Stability,
};

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("S{i}")).collect()
}

fn matrix(n: usize, entries: Vec<f64>) -> PayoffMatrix {
    let l = labels(n);
    let refs: Vec<&str> = l.iter().map(String::as_str).collect();
    PayoffMatrix::from_rows(&refs, entries.chunks(n).map(<[f64]>::to_vec).collect()).unwrap()
}

/// A game of size 2..=4 with entries in [-5, 5], plus a state on its simplex.
fn game_and_state() -> impl Strategy<Value = (PayoffMatrix, SimplexState)> {
    (2usize..=4).prop_flat_map(|n| {
        (
            prop::collection::vec(-5.0..5.0f64, n * n),
            prop::collection::vec(0.0..1.0f64, n),
        )
            .prop_filter_map("zero weights", move |(m, w)| {
                let x = SimplexState::normalized(w).ok()?;
                Some((matrix(n, m), x))
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn field_is_tangent((a, x) in game_and_state()) {
        let v = replicator_field(&a, &x).unwrap();
        prop_assert!(v.iter().sum::<f64>().abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn column_shift_leaves_field_unchanged((a, x) in game_and_state(), col in 0usize..4, c in -5.0..5.0f64) {
        let col = col % a.n();
        let v = replicator_field(&a, &x).unwrap();
        let w = replicator_field(&a.with_column_shift(col, c), &x).unwrap();
        for (p, q) in v.iter().zip(&w) {
            prop_assert!((p - q).abs() <= 1e-12, "{p} vs {q}");
        }
    }

    #[test]
    fn uniform_payoff_has_no_flow(n in 2usize..=4, c in -5.0..5.0f64, w in prop::collection::vec(0.01..1.0f64, 4)) {
        let a = matrix(n, vec![c; n * n]);
        let x = SimplexState::normalized(w[..n].to_vec()).unwrap();
        let v = replicator_field(&a, &x).unwrap();
        prop_assert!(v.iter().all(|f| f.abs() <= 1e-12));
    }

    #[test]
    fn two_strategy_reduction(m in prop::collection::vec(-5.0..5.0f64, 4), xa in 0.0..=1.0f64) {
        let a = matrix(2, m);
        let x = SimplexState::new(vec![xa, 1.0 - xa]).unwrap();
        let f = replicator_core::fitness(&a, &x).unwrap();
        let v = replicator_field(&a, &x).unwrap();
        prop_assert!((v[0] - xa * (1.0 - xa) * (f[0] - f[1])).abs() <= 1e-12);
    }

    #[test]
    fn enumerated_points_are_fixed((a, _) in game_and_state()) {
        for p in enumerate_fixed_points(&a, DEFAULT_ENUM_TOL).unwrap() {
            prop_assert!(residual(&a, p.x.as_slice()) < 1e-8);
        }
    }

    #[test]
    fn text_round_trip((a, _) in game_and_state()) {
        prop_assert_eq!(PayoffMatrix::parse_text(&a.to_text()).unwrap(), a);
    }
}

fn same_point_set(p: &[FixedPoint], q: &[FixedPoint]) -> bool {
    p.len() == q.len()
        && p.iter().all(|a| {
            q.iter().any(|b| {
                b.x.distance(a.x.as_slice()) < 1e-7 && b.classification == a.classification
            })
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn column_shift_keeps_fixed_points_and_classes(
        m in prop::collection::vec(-2.0..2.0f64, 9),
        col in 0usize..3,
        c in -3.0..3.0f64,
    ) {
        let a = matrix(3, m);
        let p = enumerate_fixed_points(&a, DEFAULT_ENUM_TOL).unwrap();
        let q = enumerate_fixed_points(&a.with_column_shift(col, c), DEFAULT_ENUM_TOL).unwrap();
        prop_assert!(same_point_set(&p, &q), "{:?}\nvs\n{:?}", p, q);
    }
}

fn standard_games() -> Vec<PayoffMatrix> {
    let mut out = vec![build(&ModelSpec::bso()).unwrap(), build(&ModelSpec::bdo()).unwrap()];
    for r in [0.2, 0.5, 0.8] {
        out.push(build(&ModelSpec::bso().with_equivocator(r)).unwrap());
        out.push(build(&ModelSpec::bdo().with_equivocator(r)).unwrap());
        for d in [0.15, 0.45] {
            out.push(build(&ModelSpec::bso().with_equivocator(r).with_preference("A", d)).unwrap());
            out.push(build(&ModelSpec::bdo().with_equivocator(r).with_preference("A", d)).unwrap());
        }
    }
    out
}

#[test]
fn grid_scan_finds_nothing_new() {
    let mut games = standard_games();
    games.push(matrix(3, vec![0.3, -1.2, 0.8, 1.1, 0.2, -0.4, -0.7, 0.9, 0.5]));
    games.push(matrix(3, vec![2.0, 0.5, -1.0, 0.0, 1.5, 0.3, 1.2, -0.6, 0.4]));
    for a in &games {
        let points = enumerate_fixed_points(a, DEFAULT_ENUM_TOL).unwrap();
        assert!(points.iter().all(|p| !p.degenerate));
        for x in simplex_lattice(a.n(), 0.005).unwrap() {
            let speed = replicator_field_raw(a, x.as_slice())
                .unwrap()
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()));
            if speed < 1e-10 {
                let near = points.iter().any(|p| p.x.distance(x.as_slice()) <= 0.01);
                assert!(near, "{a}: zero of the field at {:?} not enumerated", x.as_slice());
            }
        }
    }
}

#[test]
fn stable_points_attract() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let radius = 1e-3;
    let mut checked = 0;
    for a in standard_games() {
        for p in enumerate_fixed_points(&a, DEFAULT_ENUM_TOL).unwrap() {
            if p.classification != Some(Stability::Stable) {
                continue;
            }
            for _ in 0..10 {
                // move a distance of at most `radius` toward a random state
                let w: Vec<f64> = (0..a.n()).map(|_| rng.random::<f64>()).collect();
                let z = SimplexState::normalized(w).unwrap();
                let x0: Vec<f64> = p.x.as_slice().iter().zip(z.as_slice()).map(|(x, z)| x + radius * (z - x)).collect();
                let x0 = SimplexState::normalized(x0).unwrap();
                assert!(x0.distance(p.x.as_slice()) <= radius);
                let tr = converge(&a, &x0, 0.01, 1e-10, 1e4).unwrap();
                let d = tr.terminal_state.distance(p.x.as_slice());
                assert!(d <= 1e-4, "{a}: from {:?} ended {d:e} from {:?}", x0.as_slice(), p.x.as_slice());
            }
            checked += 1;
        }
    }
    assert!(checked > 20);
}
