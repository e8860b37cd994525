use phidim_core::covering::GeomSet;
use phidim_core::dimfunc::constant_df;
use phidim_core::estimator::{
    omega, phi_lower_estimate, quasi_phi_lower_estimate, windowed_lower_estimate, GeomCounter, MoranCounter, ScaleGrid,
};
use phidim_core::moran::{formula_dimension, LevelSelection, MoranSpec};
use phidim_core::{math, Scale};
use proptest::prelude::*;

fn grid(k0: f64, n: usize) -> ScaleGrid {
    ScaleGrid::geometric(Scale::from_depth(k0 * math::ln(2.0)), 0.5, n).unwrap()
}

fn point_set() -> impl Strategy<Value = Vec<[f64; 2]>> {
    prop::collection::vec(0u32..4096, 2..60).prop_map(|v| v.into_iter().map(|k| [k as f64 / 4096.0, 0.0]).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn running_minimum_and_bounds(pts in point_set(), theta in 0.3f64..2.0) {
        let set = GeomSet::points(1, pts).unwrap();
        let counter = GeomCounter::new(&set);
        let rep = phi_lower_estimate(&counter, &constant_df(theta).unwrap(), &grid(2.0, 6)).unwrap();
        for w in rep.records.windows(2) {
            prop_assert!(w[1].running_min <= w[0].running_min);
        }
        for r in &rep.records {
            prop_assert!(r.quotient_lo <= r.quotient + 1e-12 && r.quotient <= r.quotient_hi + 1e-12);
        }
        prop_assert!((0.0..=1.0).contains(&rep.value));
    }

    #[test]
    fn more_centres_never_raise_a_quotient(pts in point_set(), extra in prop::collection::vec(0u32..4096, 1..10)) {
        let set = GeomSet::points(1, pts).unwrap();
        let phi = constant_df(1.0).unwrap();
        let g = grid(2.0, 5);
        let few = GeomCounter::new(&set);
        let mut many = GeomCounter::new(&set);
        many.extend_centers(&extra.iter().map(|&k| [k as f64 / 4096.0, 0.0]).collect::<Vec<_>>());
        let a = phi_lower_estimate(&few, &phi, &g);
        let b = phi_lower_estimate(&many, &phi, &g);
        // Extra centres may see an empty ball; only compare when both ran.
        if let (Ok(a), Ok(b)) = (a, b) {
            for (x, y) in a.records.iter().zip(&b.records) {
                prop_assert!(y.quotient <= x.quotient + 1e-12);
            }
        }
    }

    #[test]
    fn omega_is_translation_and_scale_covariant(pts in point_set(), shift in -5.0f64..5.0, lambda in 0.01f64..10.0) {
        let set = GeomSet::points(1, pts.clone()).unwrap();
        let x = Scale::from_radius(0.2).unwrap();
        let y = Scale::from_radius(0.01).unwrap();
        let base = omega(&GeomCounter::new(&set), x, y).unwrap().value;
        let moved = GeomSet::points(1, pts.iter().map(|p| [p[0] + shift, 0.0]).collect()).unwrap();
        let centres: Vec<[f64; 2]> = set.sample_points(4096).iter().map(|p| [p[0] + shift, 0.0]).collect();
        let t = omega(&GeomCounter::with_centers(&moved, centres), x, y).unwrap().value;
        prop_assert!(math::close(t, base, 1e-9));
        // Dyadic λ keeps every coordinate exact.
        let lam = 2f64.powi(math::round(math::log2(lambda)) as i32);
        let scaled = GeomSet::points(1, pts.iter().map(|p| [p[0] * lam, 0.0]).collect()).unwrap();
        let s = omega(&GeomCounter::new(&scaled), x.scaled(lam), y.scaled(lam)).unwrap().value;
        prop_assert!(math::close(s, base, 1e-9));
    }
}

#[test]
fn interval_estimates_reach_one() {
    let unit = GeomSet::interval(0.0, 1.0).unwrap();
    let counter = GeomCounter::new(&unit);
    for theta in [0.5, 1.0, 2.0] {
        let k0 = math::ceil(24.0 / theta);
        let g = grid(k0, 8);
        let p = phi_lower_estimate(&counter, &constant_df(theta).unwrap(), &g).unwrap();
        assert!(math::abs(p.value - 1.0) <= 0.05, "{theta}: {}", p.value);
        let q = quasi_phi_lower_estimate(&counter, &constant_df(theta).unwrap(), &g, &[1.0, 1.25]).unwrap();
        assert!(math::abs(q.value - 1.0) <= 0.05);
        // The corner quotient is 1 - 1/(wθk), so the half window needs twice the
        // depth; w = 1 that deep would overflow an exact count.
        let gw = grid(math::ceil(48.0 / theta), 8);
        let w = windowed_lower_estimate(&counter, &constant_df(theta).unwrap(), &gw, &[0.5, 0.75]).unwrap();
        assert!(math::abs(w.value - 1.0) <= 0.05, "{theta}: {}", w.value);
    }
}

#[test]
fn popcorn_like_isolated_point_gives_zero() {
    let set = GeomSet::points(2, vec![[0.5, 0.5], [0.0, 0.0], [1.0, 0.0]]).unwrap();
    let counter = GeomCounter::with_centers(&set, vec![[0.5, 0.5]]);
    let rep = phi_lower_estimate(&counter, &constant_df(1.0).unwrap(), &grid(3.0, 3)).unwrap();
    assert!(rep.records.iter().all(|r| r.quotient == 0.0));
    assert_eq!(rep.value, 0.0);
}

#[test]
fn moran_estimates_track_the_formula_at_cylinder_scales() {
    let spec = MoranSpec::constant(1, 1.0 / 3.0).unwrap();
    let phi = constant_df(1.0).unwrap();
    let counter = MoranCounter::new(&spec).unwrap();
    let scales: Vec<Scale> = (20..28).map(|n| spec.scale(n).unwrap()).collect();
    let rep = phi_lower_estimate(&counter, &phi, &ScaleGrid::new(scales).unwrap()).unwrap();
    let f = formula_dimension(&spec, &phi, LevelSelection::Range { from: 20, to: 27 }).unwrap();
    for (r, t) in rep.records.iter().zip(&f.terms) {
        let slack = 2.0 / t.l_phi as f64;
        assert!(r.quotient_lo <= t.quotient.unwrap() + slack && t.quotient.unwrap() <= r.quotient_hi + slack);
    }
}

#[test]
fn ordering_chain_on_a_cantor_set() {
    let spec = MoranSpec::constant(1, 0.3).unwrap();
    let phi = constant_df(1.0).unwrap();
    let counter = MoranCounter::new(&spec).unwrap();
    let scales: Vec<Scale> = (12..20).map(|n| spec.scale(n).unwrap()).collect();
    let g = ScaleGrid::new(scales).unwrap();
    let p = phi_lower_estimate(&counter, &phi, &g).unwrap();
    let q = quasi_phi_lower_estimate(&counter, &phi, &g, &[1.0, 2.0, 4.0]).unwrap();
    let w = windowed_lower_estimate(&counter, &phi, &g, &[0.25, 0.5, 1.0]).unwrap();
    let tol = 0.02 + p.tolerance() + q.tolerance() + w.tolerance();
    assert!(w.value <= q.value + tol && q.value <= p.value + tol, "{} {} {}", w.value, q.value, p.value);
}
