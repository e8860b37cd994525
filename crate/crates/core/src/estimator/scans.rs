//! Scans over rate windows `φ_α = φ/α` and the gap between nearby
//! dimension functions.

use alloc::vec::Vec;

use super::{phi_lower_estimate, quasi_phi_lower_estimate, EstimateReport, LocalCounter, ScaleGrid};
use crate::dimfunc::DimensionFunction;
use crate::math;
use crate::moran::{formula_dimension, LevelSelection, MoranSpec};
use crate::Error;

/// One `α` of a scan.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanEntry {
    pub alpha: f64,
    /// `None` when every window was degenerate.
    pub value: Option<f64>,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VariationalReport {
    pub entries: Vec<ScanEntry>,
    pub infimum: Option<f64>,
    pub argmin: Option<f64>,
    /// Quasi estimate over the same windows, when an estimator was run.
    pub quasi: Option<EstimateReport>,
}

fn check_alphas(alphas: &[f64], upper: Option<f64>) -> Result<(), Error> {
    if alphas.is_empty() {
        return Err(Error::param("alphas", "empty grid"));
    }
    for &a in alphas {
        if !(a.is_finite() && a > 0.0) || upper.is_some_and(|u| a > u) {
            return Err(Error::param("alphas", alloc::format!("alpha {a} is outside the admissible range")));
        }
    }
    if alphas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("alphas", "must be strictly increasing"));
    }
    Ok(())
}

fn formula_entry(
    spec: &MoranSpec,
    phi: &DimensionFunction,
    alpha: f64,
    select: LevelSelection,
) -> Result<ScanEntry, Error> {
    let rep = formula_dimension(spec, &phi.rate_window(alpha)?, select)?;
    let tolerance = if rep.value.is_some() { rep.discretization } else { 0.0 };
    Ok(ScanEntry { alpha, value: rep.value, tolerance })
}

fn summarize(entries: Vec<ScanEntry>, quasi: Option<EstimateReport>) -> VariationalReport {
    let mut best: Option<(f64, f64)> = None;
    for e in &entries {
        if let Some(v) = e.value {
            if best.is_none_or(|b| v < b.0) {
                best = Some((v, e.alpha));
            }
        }
    }
    VariationalReport { infimum: best.map(|b| b.0), argmin: best.map(|b| b.1), entries, quasi }
}

/// `α ↦ dim_L^{φ_α}` from the Moran formula, for `α ∈ (0, 1]`.
pub fn variational_scan(
    spec: &MoranSpec,
    phi: &DimensionFunction,
    alphas: &[f64],
    select: LevelSelection,
) -> Result<VariationalReport, Error> {
    check_alphas(alphas, Some(1.0))?;
    let entries = alphas.iter().map(|&a| formula_entry(spec, phi, a, select)).collect::<Result<_, _>>()?;
    Ok(summarize(entries, None))
}

/// The same scan from estimates, with the quasi estimate whose sub-scales
/// are the windows `R^{1+φ(R)/α}` of the grid.
pub fn variational_scan_estimate<C: LocalCounter>(
    counter: &C,
    phi: &DimensionFunction,
    alphas: &[f64],
    grid: &ScaleGrid,
) -> Result<VariationalReport, Error> {
    check_alphas(alphas, Some(1.0))?;
    let mut entries = Vec::with_capacity(alphas.len());
    for &a in alphas {
        let rep = phi_lower_estimate(counter, &phi.rate_window(a)?, grid)?;
        entries.push(ScanEntry { alpha: a, value: Some(rep.value), tolerance: rep.tolerance() });
    }
    let fractions: Vec<f64> = alphas.iter().rev().map(|a| 1.0 / a).collect();
    let quasi = quasi_phi_lower_estimate(counter, phi, grid, &fractions)?;
    Ok(summarize(entries, Some(quasi)))
}

/// `φ(α)/α ≥ φ(β)/β` for adjacent `α < β`.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioCheck {
    pub alpha: f64,
    pub beta: f64,
    pub left: f64,
    pub right: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// `(1/α − 1/β)·φ(γ) ≤ φ(α)/α − φ(β)/β` with `γ = αβ/(β−α)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairCheck {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub value_gamma: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateWindowReport {
    pub entries: Vec<ScanEntry>,
    pub ratios: Vec<RatioCheck>,
    pub pairs: Vec<PairCheck>,
    pub pass: bool,
}

/// Formula values over a positive `α` grid with the monotonicity and pair
/// inequality checks between adjacent values. A missing value counts as 0
/// on the right-hand sides and as the ambient dimension on the left.
pub fn rate_window_scan(
    spec: &MoranSpec,
    phi: &DimensionFunction,
    alphas: &[f64],
    select: LevelSelection,
) -> Result<RateWindowReport, Error> {
    check_alphas(alphas, None)?;
    let d = spec.dim() as f64;
    let entries: Vec<ScanEntry> =
        alphas.iter().map(|&a| formula_entry(spec, phi, a, select)).collect::<Result<_, _>>()?;
    let mut ratios = Vec::new();
    let mut pairs = Vec::new();
    for w in entries.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let (va, vb) = (a.value.unwrap_or(0.0), b.value.unwrap_or(d));
        let tol = a.tolerance / a.alpha + b.tolerance / b.alpha;
        let (left, right) = (va / a.alpha, vb / b.alpha);
        ratios.push(RatioCheck {
            alpha: a.alpha,
            beta: b.alpha,
            left,
            right,
            tolerance: tol,
            pass: right <= left + tol,
        });

        let gamma = a.alpha * b.alpha / (b.alpha - a.alpha);
        let g = formula_entry(spec, phi, gamma, select)?;
        let k = 1.0 / a.alpha - 1.0 / b.alpha;
        let lhs = k * g.value.unwrap_or(d);
        let rhs = a.value.unwrap_or(0.0) / a.alpha - b.value.unwrap_or(d) / b.alpha;
        let tolerance = tol + k * g.tolerance;
        pairs.push(PairCheck {
            alpha: a.alpha,
            beta: b.alpha,
            gamma,
            value_gamma: g.value,
            lhs,
            rhs,
            tolerance,
            pass: lhs <= rhs + tolerance,
        });
    }
    let pass = ratios.iter().all(|c| c.pass) && pairs.iter().all(|c| c.pass);
    Ok(RateWindowReport { entries, ratios, pairs, pass })
}

/// Largest upper count of `B(x, 2R)` at radius `R` over the grid and the
/// sampled centres.
pub fn measure_doubling_constant<C: LocalCounter>(counter: &C, grid: &ScaleGrid) -> Result<f64, Error> {
    let mut c = 1.0f64;
    for &r in grid.scales() {
        let big = r.scaled(2.0);
        for x in counter.centers(big)? {
            c = c.max(counter.count(&x, big, r)?.upper.approx());
        }
    }
    Ok(c)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GapVerdict {
    Holds,
    Violated,
    /// `φ/ψ` strays too far from 1 for the bound to say anything.
    Inapplicable,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapReport {
    pub epsilon: f64,
    pub doubling: f64,
    /// `ε(1 + 2 log₂ C + ε)`.
    pub bound: f64,
    pub phi: EstimateReport,
    pub psi: EstimateReport,
    pub gap: f64,
    /// Estimator slack added to the bound.
    pub tolerance: f64,
    pub verdict: GapVerdict,
}

/// Compare the `φ` and `ψ` estimates with the doubling bound on their gap.
/// `doubling = None` measures `C` on the counter; `max_epsilon` is where the
/// check is declared inapplicable.
pub fn equivalence_gap_check<C: LocalCounter>(
    counter: &C,
    phi: &DimensionFunction,
    psi: &DimensionFunction,
    grid: &ScaleGrid,
    doubling: Option<f64>,
    extra_tolerance: f64,
    max_epsilon: f64,
) -> Result<GapReport, Error> {
    let mut epsilon = 0.0f64;
    for &r in grid.scales() {
        epsilon = epsilon.max(math::abs(phi.eval(r)? / psi.eval(r)? - 1.0));
    }
    let doubling = match doubling {
        Some(c) if c >= 1.0 => c,
        Some(_) => return Err(Error::param("doubling", "a doubling constant is at least 1")),
        None => measure_doubling_constant(counter, grid)?,
    };
    let bound = epsilon * (1.0 + 2.0 * math::log2(doubling) + epsilon);
    let p = phi_lower_estimate(counter, phi, grid)?;
    let q = phi_lower_estimate(counter, psi, grid)?;
    let gap = math::abs(p.value - q.value);
    let tolerance = p.tolerance() + q.tolerance() + extra_tolerance;
    let verdict = if epsilon > max_epsilon {
        GapVerdict::Inapplicable
    } else if gap <= bound + tolerance {
        GapVerdict::Holds
    } else {
        GapVerdict::Violated
    };
    Ok(GapReport { epsilon, doubling, bound, phi: p, psi: q, gap, tolerance, verdict })
}
