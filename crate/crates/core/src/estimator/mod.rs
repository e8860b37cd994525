//! Dimension estimates from local covering counts.
//!
//! Every estimate is a per-scale quotient `ln N_r(B(x,R) ∩ F) / ln(R/r)`,
//! minimised over sampled centres (and over sub-scales for the quasi and
//! windowed variants), followed by a running minimum as the stand-in for
//! the liminf.

mod moran_counter;
mod scans;

use alloc::vec::Vec;
use core::fmt::Debug;

use crate::count::Count;
use crate::covering::{ball_restrict_local, covering_number, GeomSet};
use crate::dimfunc::{validate_grid, DimensionFunction};
use crate::{Error, Scale};

pub use moran_counter::{MoranCenter, MoranCounter};
pub use scans::{
    equivalence_gap_check, measure_doubling_constant, rate_window_scan, variational_scan, variational_scan_estimate,
    GapReport, GapVerdict, PairCheck, RateWindowReport, RatioCheck, ScanEntry, VariationalReport,
};

/// Cap on centres sampled from a materialized set.
pub const CENTER_CAP: usize = 4096;

/// Bounds and a point value for one local count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoverEstimate {
    pub lower: Count,
    pub value: Count,
    pub upper: Count,
    pub exact: bool,
}

/// Source of local counts `N_r(B(x,R) ∩ F)`.
pub trait LocalCounter {
    type Center: Clone + Debug;

    fn dim(&self) -> u8;

    /// Centres sampled for the infimum at scale `R`.
    fn centers(&self, big: Scale) -> Result<Vec<Self::Center>, Error>;

    fn count(&self, center: &Self::Center, big: Scale, small: Scale) -> Result<CoverEstimate, Error>;
}

/// Counts on a materialized [`GeomSet`], with a fixed centre sample.
#[derive(Clone, Debug)]
pub struct GeomCounter<'a> {
    set: &'a GeomSet,
    centers: Vec<[f64; 2]>,
}

impl<'a> GeomCounter<'a> {
    /// Centres default to [`GeomSet::sample_points`] capped at [`CENTER_CAP`].
    pub fn new(set: &'a GeomSet) -> GeomCounter<'a> {
        GeomCounter { set, centers: set.sample_points(CENTER_CAP) }
    }

    pub fn with_centers(set: &'a GeomSet, centers: Vec<[f64; 2]>) -> GeomCounter<'a> {
        GeomCounter { set, centers }
    }

    /// Add centres to the sample.
    pub fn extend_centers(&mut self, extra: &[[f64; 2]]) {
        self.centers.extend_from_slice(extra);
    }

    pub fn sample(&self) -> &[[f64; 2]] {
        &self.centers
    }
}

fn radius(s: Scale) -> Result<f64, Error> {
    let r = s.radius();
    if r > 0.0 && s.is_representable() {
        Ok(r)
    } else {
        Err(Error::Unsupported(alloc::format!("scale {s} is below the range of a materialized set")))
    }
}

impl LocalCounter for GeomCounter<'_> {
    type Center = [f64; 2];

    fn dim(&self) -> u8 {
        self.set.dim()
    }

    fn centers(&self, _big: Scale) -> Result<Vec<[f64; 2]>, Error> {
        if self.centers.is_empty() {
            return Err(Error::Empty);
        }
        Ok(self.centers.clone())
    }

    fn count(&self, c: &[f64; 2], big: Scale, small: Scale) -> Result<CoverEstimate, Error> {
        let sub = ball_restrict_local(self.set, *c, radius(big)?)?;
        let b = covering_number(&sub, radius(small)?)?;
        let (lower, upper) = (Count::from_u64(b.lower), Count::from_u64(b.upper));
        Ok(CoverEstimate { lower, value: upper, upper, exact: b.exact })
    }
}

/// Strictly decreasing list of scales `R`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleGrid {
    scales: Vec<Scale>,
}

impl ScaleGrid {
    pub fn new(scales: Vec<Scale>) -> Result<ScaleGrid, Error> {
        validate_grid(&scales)?;
        if scales[0].depth() <= 0.0 {
            return Err(Error::Grid("scales must lie below 1".into()));
        }
        Ok(ScaleGrid { scales })
    }

    /// `R_k = R_0·γ^k`, `k < n`.
    pub fn geometric(r0: Scale, gamma: f64, n: usize) -> Result<ScaleGrid, Error> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::param("gamma", "must lie in (0, 1)"));
        }
        ScaleGrid::new(crate::dimfunc::geometric_grid(r0, gamma, n))
    }

    pub fn scales(&self) -> &[Scale] {
        &self.scales
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }
}

/// Which definition a report estimates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimateKind {
    PhiLower,
    QuasiPhiLower,
    Windowed,
}

impl EstimateKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimateKind::PhiLower => "phi-lower",
            EstimateKind::QuasiPhiLower => "quasi-phi-lower",
            EstimateKind::Windowed => "windowed",
        }
    }
}

/// One scale of a trace. Counts and `r` are those of the minimising pair.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateRecord {
    pub big: Scale,
    pub small: Scale,
    pub count: CoverEstimate,
    pub quotient_lo: f64,
    pub quotient: f64,
    pub quotient_hi: f64,
    pub running_min: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateReport {
    pub kind: EstimateKind,
    pub dim: u8,
    pub records: Vec<EstimateRecord>,
    /// Final running minimum clamped to `[0, d]`.
    pub value: f64,
    /// Final running minimum before clamping.
    pub raw_value: f64,
    /// Running minima of the per-scale lower and upper quotient bounds.
    pub value_lo: f64,
    pub value_hi: f64,
}

impl EstimateReport {
    /// Half the spread of the final bounds.
    pub fn tolerance(&self) -> f64 {
        (self.value_hi - self.value_lo).max(0.0)
    }
}

fn quotient(c: Count, denom: f64) -> f64 {
    if c.ln() <= 0.0 {
        0.0
    } else {
        c.ln() / denom
    }
}

fn estimate<C, F>(counter: &C, grid: &ScaleGrid, kind: EstimateKind, smalls: F) -> Result<EstimateReport, Error>
where
    C: LocalCounter,
    F: Fn(Scale) -> Result<Vec<Scale>, Error>,
{
    let mut records = Vec::with_capacity(grid.len());
    let (mut run, mut run_lo, mut run_hi) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    for &big in grid.scales() {
        let centers = counter.centers(big)?;
        let mut best: Option<(f64, f64, f64, Scale, CoverEstimate)> = None;
        for small in smalls(big)? {
            let denom = small.depth() - big.depth();
            for c in &centers {
                let est = counter.count(c, big, small)?;
                let (lo, q, hi) = (quotient(est.lower, denom), quotient(est.value, denom), quotient(est.upper, denom));
                best = Some(match best {
                    None => (lo, q, hi, small, est),
                    Some(b) => {
                        let keep = if q < b.1 { (lo, q, hi, small, est) } else { (b.0, b.1, b.2, b.3, b.4) };
                        (keep.0.min(lo).min(b.0), keep.1, keep.2.min(hi).min(b.2), keep.3, keep.4)
                    }
                });
            }
        }
        let (lo, q, hi, small, count) = best.ok_or(Error::Empty)?;
        run = run.min(q);
        run_lo = run_lo.min(lo);
        run_hi = run_hi.min(hi);
        records.push(EstimateRecord {
            big,
            small,
            count,
            quotient_lo: lo,
            quotient: q,
            quotient_hi: hi,
            running_min: run,
        });
    }
    let d = counter.dim() as f64;
    Ok(EstimateReport {
        kind,
        dim: counter.dim(),
        records,
        value: run.clamp(0.0, d),
        raw_value: run,
        value_lo: run_lo.clamp(0.0, d),
        value_hi: run_hi.clamp(0.0, d),
    })
}

fn window(phi: &DimensionFunction, big: Scale, w: f64) -> Result<Scale, Error> {
    Ok(big.powf(1.0 + w * phi.eval(big)?))
}

/// `dim_L^φ` trace with `r = R^{1+φ(R)}`.
pub fn phi_lower_estimate<C: LocalCounter>(
    counter: &C,
    phi: &DimensionFunction,
    grid: &ScaleGrid,
) -> Result<EstimateReport, Error> {
    estimate(counter, grid, EstimateKind::PhiLower, |big| Ok(alloc::vec![window(phi, big, 1.0)?]))
}

/// Quasi variant: `r = R^{1+wφ(R)}` for each `w ≥ 1` in `fractions`.
pub fn quasi_phi_lower_estimate<C: LocalCounter>(
    counter: &C,
    phi: &DimensionFunction,
    grid: &ScaleGrid,
    fractions: &[f64],
) -> Result<EstimateReport, Error> {
    if fractions.is_empty() || fractions.iter().any(|&w| !(w.is_finite() && w >= 1.0)) {
        return Err(Error::param("fractions", "quasi sub-scales need multipliers w ≥ 1 (r ≤ R^{1+φ(R)})"));
    }
    estimate(counter, grid, EstimateKind::QuasiPhiLower, |big| fractions.iter().map(|&w| window(phi, big, w)).collect())
}

/// Windowed lower dimension: `r = R^{1+wΦ(R)}` for each `w ∈ (0, 1]`.
pub fn windowed_lower_estimate<C: LocalCounter>(
    counter: &C,
    big_phi: &DimensionFunction,
    grid: &ScaleGrid,
    fractions: &[f64],
) -> Result<EstimateReport, Error> {
    if fractions.is_empty() || fractions.iter().any(|&w| !(w > 0.0 && w <= 1.0)) {
        return Err(Error::param("fractions", "windowed sub-scales need w in (0, 1] (R^{1+Φ(R)} ≤ r < R)"));
    }
    estimate(counter, grid, EstimateKind::Windowed, |big| fractions.iter().map(|&w| window(big_phi, big, w)).collect())
}

/// Local complexity at window `(x, y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaReport<T> {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub center: T,
    pub count: CoverEstimate,
}

/// `ω(x, y) = min_ξ ln N_y(B(ξ,x) ∩ F) / ln(x/y)` over sampled centres.
pub fn omega<C: LocalCounter>(counter: &C, x: Scale, y: Scale) -> Result<OmegaReport<C::Center>, Error> {
    let denom = y.depth() - x.depth();
    if !(denom > 0.0) {
        return Err(Error::param("y", "need 0 < y < x"));
    }
    let mut best: Option<OmegaReport<C::Center>> = None;
    for c in counter.centers(x)? {
        let est = counter.count(&c, x, y)?;
        let (lo, q, hi) = (quotient(est.lower, denom), quotient(est.value, denom), quotient(est.upper, denom));
        match &mut best {
            Some(b) => {
                b.lower = b.lower.min(lo);
                b.upper = b.upper.min(hi);
                if q < b.value {
                    b.value = q;
                    b.center = c;
                    b.count = est;
                }
            }
            None => best = Some(OmegaReport { value: q, lower: lo, upper: hi, center: c, count: est }),
        }
    }
    best.ok_or(Error::Empty)
}
