//! Popcorn graphs `S_t = {(p/q, q^{-t})}` sampled up to a maximal
//! denominator, and the three numbers that separate their dimensions:
//! an isolated point (quotient 0), the segment below the graph (1) and the
//! box-counting trace (towards `4/(2+t)`).

use alloc::vec::Vec;

use crate::covering::{ball_restrict, covering_number, Aabb, CountBounds, GeomSet};
use crate::dimfunc::DimensionFunction;
use crate::estimator::{phi_lower_estimate, EstimateReport, GeomCounter, ScaleGrid};
use crate::math;
use crate::{Error, Scale};

/// Default cap on the number of sampled points.
pub const DEFAULT_POINT_BUDGET: u64 = 20_000_000;

/// Box targets closer to 1 than this are flagged as near-degenerate.
pub const DEGENERACY_MARGIN: f64 = 0.05;

/// An abscissa: a fraction given as integers, or the irrational marker.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Abscissa {
    Rational { p: u64, q: u64 },
    Irrational,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `f_t(p/q) = q^{-t}` after reduction; 0 off the rationals.
pub fn popcorn_value(t: f64, x: Abscissa) -> Result<f64, Error> {
    check_t(t)?;
    match x {
        Abscissa::Irrational => Ok(0.0),
        Abscissa::Rational { q: 0, .. } => Err(Error::param("q", "denominator must be positive")),
        Abscissa::Rational { p, q } if p > q => Err(Error::param("p", "need p ≤ q")),
        Abscissa::Rational { p, q } => Ok(height(t, q / gcd(p, q).max(1))),
    }
}

fn height(t: f64, q: u64) -> f64 {
    math::pow(q as f64, -t)
}

fn check_t(t: f64) -> Result<(), Error> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(Error::param("t", "must be positive and finite"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PopcornPoint {
    pub p: u64,
    pub q: u64,
    pub x: f64,
    pub height: f64,
}

/// Graph points over the Farey fractions of order `Q`, endpoints included,
/// in increasing `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct PopcornSample {
    t: f64,
    q_max: u64,
    points: Vec<PopcornPoint>,
}

impl PopcornSample {
    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn q_max(&self) -> u64 {
        self.q_max
    }

    pub fn points(&self) -> &[PopcornPoint] {
        &self.points
    }

    /// Points with `0 < x < 1`.
    pub fn interior(&self) -> &[PopcornPoint] {
        &self.points[1..self.points.len() - 1]
    }

    /// Smallest gap between Farey neighbours of order `Q` is at least
    /// `1/Q²`; half of that is where the sample stops resembling `S_t`.
    pub fn resolution_floor(&self) -> f64 {
        0.5 / (self.q_max as f64 * self.q_max as f64)
    }

    pub fn to_geom_set(&self) -> GeomSet {
        let pts = self.points.iter().map(|p| [p.x, p.height]).collect();
        GeomSet::points(2, pts).expect("a sample is non-empty")
    }

    /// The sample joined with the baseline segment.
    pub fn with_baseline(&self) -> GeomSet {
        self.to_geom_set().union(&baseline()).expect("both sets are planar")
    }
}

/// `[0,1]×{0}`, standing in for the irrational points of the graph.
pub fn baseline() -> GeomSet {
    GeomSet::boxes(2, alloc::vec![Aabb::new([0.0, 0.0], [1.0, 0.0])]).expect("valid box")
}

/// Enumerate `S_t` up to denominator `Q` by the Farey next-term recurrence.
pub fn sample_graph(t: f64, q_max: u64, budget: u64) -> Result<PopcornSample, Error> {
    check_t(t)?;
    if q_max < 2 {
        return Err(Error::param("Q", "need Q ≥ 2"));
    }
    // 3Q²/π² + Q over-estimates the Farey count comfortably.
    let estimate = (0.31 * q_max as f64 * q_max as f64) as u128 + q_max as u128 + 2;
    if estimate > budget as u128 {
        return Err(Error::Budget { what: "popcorn points", needed: estimate, budget: budget as u128 });
    }
    let mut points = Vec::with_capacity(estimate as usize);
    let (mut a, mut b, mut c, mut d) = (0u64, 1u64, 1u64, q_max);
    points.push(PopcornPoint { p: 0, q: 1, x: 0.0, height: height(t, 1) });
    while c <= q_max {
        points.push(PopcornPoint { p: c, q: d, x: c as f64 / d as f64, height: height(t, d) });
        let k = (q_max + b) / d;
        (a, b, c, d) = (c, d, k * c - a, k * d - b);
    }
    Ok(PopcornSample { t, q_max, points })
}

/// A certified per-scale quotient of 0 at an isolated sample point.
#[derive(Clone, Debug, PartialEq)]
pub struct CollapseReport {
    pub witness: [f64; 2],
    /// Sup distance to the nearest other sample point.
    pub nearest: f64,
    pub big: Scale,
    pub small: Scale,
    pub count: u64,
    pub quotient: f64,
}

/// Take `x = (1/2, 2^{-t})` and `R` below its spacing to the rest of the
/// sample; the ball then holds one point, so the count is 1 and the
/// quotient is exactly 0. `requested` asks for a specific `R`, which must
/// lie below the spacing.
pub fn isolated_point_collapse(
    sample: &PopcornSample,
    phi: &DimensionFunction,
    requested: Option<Scale>,
) -> Result<CollapseReport, Error> {
    let witness = [0.5, height(sample.t, 2)];
    let nearest = sample
        .points
        .iter()
        .filter(|p| !(p.p == 1 && p.q == 2))
        .map(|p| math::abs(p.x - witness[0]).max(math::abs(p.height - witness[1])))
        .fold(f64::INFINITY, f64::min);
    let big = match requested {
        Some(r) if r.radius() < nearest => r,
        Some(r) => {
            return Err(Error::param(
                "R",
                alloc::format!("R = {r} is not below the sample spacing {nearest} at the witness; the sample cannot certify isolation there"),
            ))
        }
        None => Scale::from_radius(nearest / 2.0).ok_or(Error::param("sample", "degenerate spacing"))?,
    };
    let small = big.powf(1.0 + phi.eval(big)?);
    let ball = ball_restrict(&sample.to_geom_set(), witness, big.radius())?;
    let count = covering_number(&ball, small.radius())?.upper;
    let quotient = if count == 1 { 0.0 } else { math::ln(count as f64) / (small.depth() - big.depth()) };
    Ok(CollapseReport { witness, nearest, big, small, count, quotient })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoxRecord {
    pub r: f64,
    pub count: CountBounds,
    /// From the upper count.
    pub value: f64,
}

/// `ln N_r / ln(1/r)` with `N_r` the covering number at radius `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxTrace {
    pub records: Vec<BoxRecord>,
    /// Number of trailing records over which the trace strictly increases.
    pub increasing_tail: usize,
    pub resolution_floor: Option<f64>,
}

impl BoxTrace {
    pub fn last(&self) -> Option<f64> {
        self.records.last().map(|r| r.value)
    }
}

/// Box-counting trace of `set` over a decreasing radius grid. Radii below
/// `floor` are refused.
pub fn box_dimension_trace(set: &GeomSet, r_grid: &[f64], floor: Option<f64>) -> Result<BoxTrace, Error> {
    if r_grid.is_empty() {
        return Err(Error::Grid("empty radius grid".into()));
    }
    if r_grid.windows(2).any(|w| !(w[1] < w[0])) || !(r_grid[0] < 1.0) || !(r_grid[r_grid.len() - 1] > 0.0) {
        return Err(Error::Grid("radii must decrease strictly inside (0, 1)".into()));
    }
    if let Some(f) = floor {
        if let Some(&r) = r_grid.iter().find(|&&r| r < f) {
            return Err(Error::Grid(alloc::format!("radius {r} is below the resolution floor {f}")));
        }
    }
    let mut records = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let count = covering_number(set, r)?;
        records.push(BoxRecord { r, count, value: math::ln(count.upper as f64) / -math::ln(r) });
    }
    let mut increasing_tail = 1;
    while increasing_tail < records.len() {
        let i = records.len() - increasing_tail;
        if records[i].value > records[i - 1].value {
            increasing_tail += 1;
        } else {
            break;
        }
    }
    Ok(BoxTrace { records, increasing_tail, resolution_floor: floor })
}

/// The strict chain `0 < 1 < 4/(2+t)` assembled from the sample.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessReport {
    pub t: f64,
    pub collapse: CollapseReport,
    pub baseline: EstimateReport,
    pub box_trace: BoxTrace,
    pub target: f64,
    /// `0 < baseline − tol` and `baseline + tol < final box value`.
    pub chain_holds: bool,
    pub near_degenerate: bool,
}

/// `4/(2+t)` for `t < 2`, else 1.
pub fn box_target(t: f64) -> f64 {
    if t < 2.0 {
        4.0 / (2.0 + t)
    } else {
        1.0
    }
}

/// Run the collapse witness, the baseline estimate on `grid` and the box
/// trace of sample plus baseline on `r_grid`.
pub fn modified_dimension_witness(
    sample: &PopcornSample,
    phi: &DimensionFunction,
    grid: &ScaleGrid,
    r_grid: &[f64],
    tolerance: f64,
) -> Result<WitnessReport, Error> {
    let t = sample.t;
    if t >= 2.0 {
        return Err(Error::param("t", "the strict chain needs 0 < t < 2"));
    }
    let collapse = isolated_point_collapse(sample, phi, None)?;
    let base = baseline();
    let mut counter = GeomCounter::new(&base);
    counter.extend_centers(&[[0.0, 0.0]]);
    let baseline = phi_lower_estimate(&counter, phi, grid)?;
    let box_trace = box_dimension_trace(&sample.with_baseline(), r_grid, Some(sample.resolution_floor()))?;
    let target = box_target(t);
    let last = box_trace.last().unwrap_or(0.0);
    let chain_holds = collapse.quotient < baseline.value - tolerance && baseline.value + tolerance < last;
    Ok(WitnessReport {
        t,
        collapse,
        baseline,
        box_trace,
        target,
        chain_holds,
        near_degenerate: target - 1.0 < DEGENERACY_MARGIN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values() {
        assert_eq!(popcorn_value(1.0, Abscissa::Rational { p: 1, q: 2 }).unwrap(), 0.5);
        assert_eq!(popcorn_value(2.0, Abscissa::Rational { p: 3, q: 4 }).unwrap(), 1.0 / 16.0);
        assert_eq!(popcorn_value(1.0, Abscissa::Rational { p: 2, q: 4 }).unwrap(), 0.5);
        assert_eq!(popcorn_value(1.0, Abscissa::Irrational).unwrap(), 0.0);
        assert!(popcorn_value(1.0, Abscissa::Rational { p: 1, q: 0 }).is_err());
    }

    #[test]
    fn small_samples() {
        let s = sample_graph(1.0, 3, DEFAULT_POINT_BUDGET).unwrap();
        let interior: Vec<(u64, u64)> = s.interior().iter().map(|p| (p.p, p.q)).collect();
        assert_eq!(interior, [(1, 3), (1, 2), (2, 3)]);
        assert_eq!(sample_graph(1.0, 5, DEFAULT_POINT_BUDGET).unwrap().interior().len(), 9);
        assert!(sample_graph(1.0, 1, DEFAULT_POINT_BUDGET).is_err());
        assert!(sample_graph(1.0, 1000, 1000).unwrap_err().is_budget());
    }

    #[test]
    fn targets() {
        assert!(math::close(box_target(1.0), 4.0 / 3.0, 1e-15));
        assert_eq!(box_target(2.0), 1.0);
    }
}
