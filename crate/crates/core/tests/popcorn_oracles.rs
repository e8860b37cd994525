use phidim_core::covering::{ball_restrict, covering_number};
use phidim_core::dimfunc::constant_df;
use phidim_core::estimator::ScaleGrid;
use phidim_core::popcorn::{
    baseline, box_dimension_trace, isolated_point_collapse, modified_dimension_witness, popcorn_value, sample_graph,
    Abscissa, DEFAULT_POINT_BUDGET,
};
use phidim_core::{math, Scale};
use proptest::prelude::*;

fn totient(n: u64) -> u64 {
    (1..=n).filter(|&k| gcd(k, n) == 1).count() as u64
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[test]
fn sample_counts_match_totient_sums() {
    let mut sum = 0;
    for q in 1..=300u64 {
        sum += totient(q);
        if q >= 2 {
            let s = sample_graph(1.0, q, DEFAULT_POINT_BUDGET).unwrap();
            assert_eq!(s.points().len() as u64, 1 + sum, "Q = {q}");
        }
    }
    let s = sample_graph(1.0, 1000, DEFAULT_POINT_BUDGET).unwrap();
    let asymptotic = 3.0 * 1e6 / (std::f64::consts::PI * std::f64::consts::PI);
    assert!(math::abs(s.points().len() as f64 / asymptotic - 1.0) < 0.02);
}

#[test]
fn sampled_fractions_are_reduced_and_sorted() {
    let s = sample_graph(1.5, 200, DEFAULT_POINT_BUDGET).unwrap();
    for w in s.points().windows(2) {
        assert!(w[0].x < w[1].x);
        // Farey neighbours satisfy bc - ad = 1.
        assert_eq!(w[1].p * w[0].q - w[0].p * w[1].q, 1);
    }
    for p in s.points() {
        assert_eq!(gcd(p.p, p.q), 1);
        assert!(math::close(p.height, (p.q as f64).powf(-1.5), 1e-14));
    }
}

#[test]
fn nearest_neighbour_of_the_witness() {
    let s = sample_graph(1.0, 50, DEFAULT_POINT_BUDGET).unwrap();
    let rep = isolated_point_collapse(&s, &constant_df(1.0).unwrap(), None).unwrap();
    let nearest = s
        .points()
        .iter()
        .filter(|p| (p.p, p.q) != (1, 2))
        .map(|p| (p.x - 0.5).abs().max((p.height - 0.5).abs()))
        .fold(f64::INFINITY, f64::min);
    assert_eq!(rep.nearest, nearest);
    assert!(nearest >= 1.0 / 6.0);
    assert_eq!((rep.count, rep.quotient), (1, 0.0));
    let r = Scale::from_radius(1.0 / 12.0 - 1e-9).unwrap();
    for theta in [0.1, 1.0, 5.0] {
        let rep = isolated_point_collapse(&s, &constant_df(theta).unwrap(), Some(r)).unwrap();
        assert_eq!(rep.quotient, 0.0);
    }
    assert!(isolated_point_collapse(&s, &constant_df(1.0).unwrap(), Some(Scale::from_radius(0.2).unwrap())).is_err());
}

#[test]
fn baseline_breaks_isolation_at_its_own_points() {
    let s = sample_graph(1.0, 50, DEFAULT_POINT_BUDGET).unwrap();
    let joined = s.with_baseline();
    // Every ball centred on the segment meets a whole stretch of it.
    let ball = ball_restrict(&joined, [0.5, 0.0], 0.01).unwrap();
    assert!(covering_number(&ball, 0.0001).unwrap().lower > 1);
}

#[test]
fn baseline_trace_tends_to_one() {
    let radii: Vec<f64> = (20..=26).map(|k| 0.5f64.powi(k)).collect();
    let trace = box_dimension_trace(&baseline(), &radii, None).unwrap();
    for r in &trace.records {
        assert!((0.95..=1.05).contains(&r.value), "{r:?}");
    }
}

#[test]
fn popcorn_points_add_mass() {
    let s = sample_graph(1.0, 400, DEFAULT_POINT_BUDGET).unwrap();
    let radii: Vec<f64> = (3..=9).map(|k| 0.5f64.powi(k)).collect();
    let full = box_dimension_trace(&s.with_baseline(), &radii, Some(s.resolution_floor())).unwrap();
    let base = box_dimension_trace(&baseline(), &radii, None).unwrap();
    for (a, b) in full.records.iter().zip(&base.records) {
        assert!(a.value > b.value);
    }
    assert!(box_dimension_trace(&s.with_baseline(), &[1e-7], Some(s.resolution_floor())).is_err());
}

#[test]
fn witness_chain_and_degeneracy() {
    let phi = constant_df(1.0).unwrap();
    let grid = ScaleGrid::geometric(Scale::from_depth(24.0 * math::ln(2.0)), 0.5, 8).unwrap();
    let radii: Vec<f64> = (4..=9).map(|k| 0.5f64.powi(k)).collect();
    let s = sample_graph(1.0, 400, DEFAULT_POINT_BUDGET).unwrap();
    let rep = modified_dimension_witness(&s, &phi, &grid, &radii, 0.05).unwrap();
    assert!(rep.chain_holds && !rep.near_degenerate);
    let s = sample_graph(1.9, 100, DEFAULT_POINT_BUDGET).unwrap();
    assert!(modified_dimension_witness(&s, &phi, &grid, &radii, 0.05).unwrap().near_degenerate);
    let s = sample_graph(2.0, 100, DEFAULT_POINT_BUDGET).unwrap();
    assert!(modified_dimension_witness(&s, &phi, &grid, &radii, 0.05).is_err());
}

proptest! {
    #[test]
    fn heights_depend_on_the_reduced_denominator(p in 1u64..500, q in 1u64..500, k in 1u64..20, t in 0.1f64..4.0) {
        prop_assume!(p <= q);
        let a = popcorn_value(t, Abscissa::Rational { p, q }).unwrap();
        let b = popcorn_value(t, Abscissa::Rational { p: p * k, q: q * k }).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!(math::close(a, ((q / gcd(p, q)) as f64).powf(-t), 1e-14));
    }
}
