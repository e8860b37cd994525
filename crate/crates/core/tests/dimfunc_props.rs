use phidim_core::dimfunc::{
    check_axioms, check_axioms_with, constant_df, doubling_bound_check, geometric_grid, max_interpolant,
    min_interpolant, CheckpointSequence, DimensionFunction, Piece, PieceKind, Staircase, Tail,
};
use phidim_core::{math, Scale};
use proptest::prelude::*;

/// Checkpoint depths and values satisfying both axioms; `u = 1` gives a
/// flat step.
fn checkpoints() -> impl Strategy<Value = Vec<(f64, f64)>> {
    (0.3f64..4.0, 0.05f64..3.0, prop::collection::vec((1.05f64..5.0, prop_oneof![Just(1.0), 0.02f64..1.0]), 1..8))
        .prop_map(|(d0, t0, steps)| {
            let mut out = vec![(d0, t0)];
            for (m, u) in steps {
                let (d, t) = *out.last().unwrap();
                let d1 = d * m;
                let floor = t * d / d1;
                out.push((d1, (floor + u * (t - floor)).min(t)));
            }
            out
        })
}

fn sequence(raw: &[(f64, f64)]) -> CheckpointSequence {
    CheckpointSequence::new(raw.iter().map(|&(d, t)| (Scale::from_depth(d), t)).collect()).unwrap()
}

/// Grid of `n` depths spread geometrically over `[d0, d1]`.
fn depth_grid(d0: f64, d1: f64, n: usize) -> Vec<Scale> {
    let step = math::ln(d1 / d0) / (n - 1) as f64;
    (0..n).map(|k| Scale::from_depth(d0 * math::exp(step * k as f64))).collect()
}

/// Another dimension function through the same checkpoints: refine the
/// sequence with admissible extra points and interpolate it.
fn competitor(raw: &[(f64, f64)], extra: &[(f64, f64)], use_max: bool) -> DimensionFunction {
    let mut refined = vec![raw[0]];
    for (i, w) in raw.windows(2).enumerate() {
        let ((d0, t0), (d1, t1)) = (w[0], w[1]);
        let (s, u) = extra[i % extra.len()];
        let d = d0 + s * (d1 - d0);
        // Admissible values at depth d lie in [max(t1, t0·d0/d), min(t0, t1·d1/d)].
        let lo = t1.max(t0 * d0 / d);
        let hi = t0.min(t1 * d1 / d);
        let v = lo + u * (hi - lo);
        if d > d0 && d < d1 && v * d > t0 * d0 && t1 * d1 > v * d {
            refined.push((d, v));
        }
        refined.push((d1, t1));
    }
    let seq = sequence(&refined);
    if use_max {
        max_interpolant(&seq)
    } else {
        min_interpolant(&seq)
    }
}

fn rel_close(a: f64, b: f64) -> bool {
    math::abs(a - b) <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn interpolants_are_extremal(
        raw in checkpoints(),
        extra in prop::collection::vec((0.05f64..0.95, 0.0f64..1.0), 1..8),
        use_max in any::<bool>(),
    ) {
        let seq = sequence(&raw);
        let hi = max_interpolant(&seq);
        let lo = min_interpolant(&seq);
        let (d0, dn) = (raw[0].0, raw[raw.len() - 1].0);
        let grid = depth_grid(d0, dn * 1.5, 100);
        prop_assert!(check_axioms(&hi, &grid).unwrap().pass);
        prop_assert!(check_axioms(&lo, &grid).unwrap().pass);
        for &(d, t) in &raw {
            prop_assert!(rel_close(hi.eval(Scale::from_depth(d)).unwrap(), t));
            prop_assert!(rel_close(lo.eval(Scale::from_depth(d)).unwrap(), t));
        }
        let other = competitor(&raw, &extra, use_max);
        prop_assert!(check_axioms(&other, &grid).unwrap().pass);
        for s in depth_grid(d0, dn, 100) {
            let v = other.eval(s).unwrap();
            prop_assert!(lo.eval(s).unwrap() <= v * (1.0 + 1e-12));
            prop_assert!(v <= hi.eval(s).unwrap() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn rate_windows_keep_the_axioms(raw in checkpoints(), alpha in 0.05f64..20.0) {
        let phi = max_interpolant(&sequence(&raw));
        let w = phi.rate_window(alpha).unwrap();
        let grid = depth_grid(raw[0].0, raw[raw.len() - 1].0 * 2.0, 60);
        prop_assert!(check_axioms(&w, &grid).unwrap().pass);
        for s in &grid {
            prop_assert!(rel_close(w.eval(*s).unwrap() * alpha, phi.eval(*s).unwrap()));
        }
        prop_assert!(rel_close(w.sup_bound() * alpha, phi.sup_bound()));
    }

    #[test]
    fn doubling_sandwich(raw in checkpoints(), c in prop_oneof![Just(0.5), Just(0.25)], theta in 0.01f64..5.0) {
        let grid = geometric_grid(Scale::from_depth(raw[0].0), 0.7, 50);
        for phi in [max_interpolant(&sequence(&raw)), min_interpolant(&sequence(&raw)), constant_df(theta).unwrap()] {
            let rep = doubling_bound_check(&phi, c, &grid).unwrap();
            prop_assert!(rep.pass, "{:?}", rep.rows.iter().find(|r| !r.pass));
        }
    }

    #[test]
    fn staircases_are_dimension_functions(g in 1.1f64..6.0, t in 0.05f64..3.0, x in 0.0f64..1.0, start in 0.2f64..3.0) {
        // decay in (1/g, 1]
        let decay = 1.0 / g + x * (1.0 - 1.0 / g);
        prop_assume!(decay * g > 1.0 + 1e-9);
        let phi = DimensionFunction::new(
            Scale::from_depth(0.1),
            vec![Piece::new(Scale::from_depth(start + 0.1), Scale::from_depth(0.1), PieceKind::Constant(t))],
            Tail::Staircase(Staircase { growth: g, theta: t, decay }),
            None,
        ).unwrap();
        let grid = depth_grid(0.1, 1e4, 400);
        prop_assert!(check_axioms(&phi, &grid).unwrap().pass);
    }
}

#[test]
fn identity_is_not_a_dimension_function() {
    let grid = geometric_grid(Scale::from_radius(0.5).unwrap(), 0.5, 20);
    let rep = check_axioms_with(|s| Ok(s.radius()), &grid).unwrap();
    assert_eq!(rep.failure(), Some("growth axiom"));
}

#[test]
fn increasing_function_fails_monotonicity() {
    let grid = geometric_grid(Scale::from_radius(0.5).unwrap(), 0.5, 20);
    let rep = check_axioms_with(|s| Ok(1.0 + s.depth()), &grid).unwrap();
    assert!(rep.growth);
    assert_eq!(rep.failure(), Some("monotone-decrease axiom"));
}
