//! Dimension functions: positive maps `R ↦ φ(R)` on `(0, R_max]` with `φ`
//! non-increasing and `φ(R)·ln(1/R)` non-decreasing as `R → 0`.
//!
//! A function is a finite list of pieces, each either a constant or
//! `c / ln(1/R)`, followed by a tail that covers everything below the last
//! breakpoint. The tail is a constant or a [`Staircase`], an infinite
//! checkpoint schedule interpolated with the maximal shape.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::math;
use crate::{Error, Scale};

/// Relative slack used when comparing evaluated values.
pub const AXIOM_TOL: f64 = 1e-12;

/// Shape of a piece.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PieceKind {
    /// `φ(R) = θ`.
    Constant(f64),
    /// `φ(R) = c / ln(1/R)`.
    LogReciprocal(f64),
}

impl PieceKind {
    fn at_depth(self, depth: f64) -> f64 {
        match self {
            PieceKind::Constant(t) => t,
            PieceKind::LogReciprocal(c) => c / depth,
        }
    }

    fn scaled(self, k: f64) -> PieceKind {
        match self {
            PieceKind::Constant(t) => PieceKind::Constant(t * k),
            PieceKind::LogReciprocal(c) => PieceKind::LogReciprocal(c * k),
        }
    }

    fn parameter(self) -> f64 {
        match self {
            PieceKind::Constant(v) | PieceKind::LogReciprocal(v) => v,
        }
    }
}

/// A piece on the half-open interval `(lower, upper]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Piece {
    pub lower: Scale,
    pub upper: Scale,
    pub kind: PieceKind,
}

impl Piece {
    pub fn new(lower: Scale, upper: Scale, kind: PieceKind) -> Piece {
        Piece { lower, upper, kind }
    }
}

/// Infinite tail with checkpoints `ln(1/R_k) = D_0·growth^k` and values
/// `θ_k = theta·decay^k`, where `D_0` is the depth where the tail starts.
/// Between checkpoints it follows the maximal interpolant shape.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Staircase {
    pub growth: f64,
    pub theta: f64,
    pub decay: f64,
}

impl Staircase {
    fn validate(&self) -> Result<(), Error> {
        if !(self.growth.is_finite() && self.growth > 1.0) {
            return Err(Error::param("growth", "must exceed 1"));
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return Err(Error::param("decay", "must lie in (0, 1]"));
        }
        if self.decay * self.growth <= 1.0 {
            return Err(Error::param("decay", "decay·growth must exceed 1"));
        }
        if !(self.theta.is_finite() && self.theta > 0.0) {
            return Err(Error::param("theta", "must be positive"));
        }
        Ok(())
    }

    fn at_depth(&self, d0: f64, depth: f64) -> f64 {
        let lg = math::ln(self.growth);
        let mut k = math::floor(math::ln(depth / d0) / lg).max(0.0);
        // Guard the floor against rounding at exact checkpoint depths.
        while d0 * math::pow(self.growth, k + 1.0) <= depth {
            k += 1.0;
        }
        while k > 0.0 && d0 * math::pow(self.growth, k) > depth {
            k -= 1.0;
        }
        let dk = d0 * math::pow(self.growth, k);
        let tk = self.theta * math::pow(self.decay, k);
        if depth <= self.decay * self.growth * dk {
            tk
        } else {
            tk * self.decay * dk * self.growth / depth
        }
    }
}

/// Rule for scales below the last breakpoint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tail {
    Constant(f64),
    Staircase(Staircase),
}

/// An evaluable dimension function.
#[derive(Clone, Debug, PartialEq)]
pub struct DimensionFunction {
    r_max: Scale,
    pieces: Vec<Piece>,
    tail: Tail,
    sup_bound: f64,
}

impl DimensionFunction {
    /// Assemble a function from contiguous pieces ordered from large to small
    /// scales. `sup_bound` defaults to the largest piece value; a supplied
    /// bound must not be smaller.
    pub fn new(
        r_max: Scale,
        pieces: Vec<Piece>,
        tail: Tail,
        sup_bound: Option<f64>,
    ) -> Result<DimensionFunction, Error> {
        if !r_max.depth().is_finite() || r_max.depth() < 0.0 {
            return Err(Error::param("r_max", "must lie in (0, 1]"));
        }
        let mut top = r_max;
        let mut sup = 0.0f64;
        for (i, p) in pieces.iter().enumerate() {
            if p.upper != top {
                return Err(Error::param("pieces", format!("piece {i} does not start where the previous one ends")));
            }
            if !(p.lower < p.upper) {
                return Err(Error::param("pieces", format!("piece {i} is empty or reversed")));
            }
            let v = p.kind.parameter();
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param("pieces", format!("piece {i} has a non-positive parameter")));
            }
            if matches!(p.kind, PieceKind::LogReciprocal(_)) && p.upper.depth() <= 0.0 {
                return Err(Error::param("pieces", format!("log-reciprocal piece {i} must lie below scale 1")));
            }
            sup = sup.max(p.kind.at_depth(p.upper.depth()));
            top = p.lower;
        }
        match tail {
            Tail::Constant(t) => {
                if !(t.is_finite() && t > 0.0) {
                    return Err(Error::param("tail", "constant tail must be positive"));
                }
                sup = sup.max(t);
            }
            Tail::Staircase(s) => {
                s.validate()?;
                if top.depth() <= 0.0 {
                    return Err(Error::param("tail", "staircase tail must start below scale 1"));
                }
                sup = sup.max(s.theta);
            }
        }
        let sup_bound = match sup_bound {
            None => sup,
            Some(m) if m.is_finite() && m >= sup * (1.0 - AXIOM_TOL) => m,
            Some(m) => return Err(Error::param("sup_bound", format!("{m} is below the largest value {sup}"))),
        };
        Ok(DimensionFunction { r_max, pieces, tail, sup_bound })
    }

    /// `φ ≡ θ` on `(0, 1]`.
    pub fn constant(theta: f64) -> Result<DimensionFunction, Error> {
        if !(theta.is_finite() && theta > 0.0) {
            return Err(Error::param("theta", "must be positive"));
        }
        Ok(DimensionFunction { r_max: Scale::ONE, pieces: Vec::new(), tail: Tail::Constant(theta), sup_bound: theta })
    }

    /// The constant function `1/θ' − 1` whose dimension is the lower
    /// spectrum at `θ' ∈ (0, 1)`.
    pub fn from_spectrum_theta(theta_prime: f64) -> Result<DimensionFunction, Error> {
        if !(theta_prime > 0.0 && theta_prime < 1.0) {
            return Err(Error::param("theta_prime", "must lie in (0, 1)"));
        }
        DimensionFunction::constant(1.0 / theta_prime - 1.0)
    }

    pub fn r_max(&self) -> Scale {
        self.r_max
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    /// Scale where the tail takes over.
    pub fn tail_start(&self) -> Scale {
        self.pieces.last().map_or(self.r_max, |p| p.lower)
    }

    /// `φ(R)`.
    pub fn eval(&self, r: Scale) -> Result<f64, Error> {
        let d = r.depth();
        if !d.is_finite() || d < self.r_max.depth() {
            return Err(Error::Domain { scale: r.to_string(), max: self.r_max.to_string() });
        }
        Ok(self.at_depth(d))
    }

    /// `φ` at `ln(1/R) = depth`, without the domain check.
    pub fn at_depth(&self, depth: f64) -> f64 {
        let idx = self.pieces.partition_point(|p| p.lower.depth() <= depth);
        match self.pieces.get(idx) {
            Some(p) => p.kind.at_depth(depth),
            None => match self.tail {
                Tail::Constant(t) => t,
                Tail::Staircase(s) => s.at_depth(self.tail_start().depth(), depth),
            },
        }
    }

    /// `φ_α : R ↦ φ(R)/α`.
    pub fn rate_window(&self, alpha: f64) -> Result<DimensionFunction, Error> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::param("alpha", "must be positive"));
        }
        let k = 1.0 / alpha;
        let pieces = self.pieces.iter().map(|p| Piece { kind: p.kind.scaled(k), ..*p }).collect();
        let tail = match self.tail {
            Tail::Constant(t) => Tail::Constant(t * k),
            Tail::Staircase(s) => Tail::Staircase(Staircase { theta: s.theta * k, ..s }),
        };
        Ok(DimensionFunction { r_max: self.r_max, pieces, tail, sup_bound: self.sup_bound * k })
    }
}

/// `φ ≡ θ`.
pub fn constant_df(theta: f64) -> Result<DimensionFunction, Error> {
    DimensionFunction::constant(theta)
}

/// `φ ≡ 1/θ' − 1`.
pub fn from_spectrum_theta(theta_prime: f64) -> Result<DimensionFunction, Error> {
    DimensionFunction::from_spectrum_theta(theta_prime)
}

/// `R ↦ φ(R)/α`.
pub fn rate_window(phi: &DimensionFunction, alpha: f64) -> Result<DimensionFunction, Error> {
    phi.rate_window(alpha)
}

/// A finite list of `(R_n, θ_n)` with `R_n` strictly decreasing, `θ_n`
/// non-increasing and `θ_n·ln(1/R_n)` strictly increasing.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckpointSequence {
    entries: Vec<(Scale, f64)>,
}

impl CheckpointSequence {
    pub fn new(entries: Vec<(Scale, f64)>) -> Result<CheckpointSequence, Error> {
        if entries.is_empty() {
            return Err(Error::Checkpoints("no checkpoints".into()));
        }
        let mut bad = Vec::new();
        for (i, (r, t)) in entries.iter().enumerate() {
            if !(r.depth() > 0.0 && r.depth().is_finite()) {
                bad.push(format!("R_{} not in (0,1)", i + 1));
            }
            if !(t.is_finite() && *t > 0.0) {
                bad.push(format!("θ_{} not positive", i + 1));
            }
        }
        for (i, w) in entries.windows(2).enumerate() {
            let ((r0, t0), (r1, t1)) = (w[0], w[1]);
            let pair = format!("({}, {})", i + 1, i + 2);
            if !(r1 < r0) {
                bad.push(format!("{pair}: scales not strictly decreasing"));
            }
            if t1 > t0 {
                bad.push(format!("{pair}: θ increases"));
            }
            if !(t1 * r1.depth() > t0 * r0.depth()) {
                bad.push(format!("{pair}: θ·ln(1/R) not strictly increasing"));
            }
        }
        if bad.is_empty() {
            Ok(CheckpointSequence { entries })
        } else {
            Err(Error::Checkpoints(bad.join("; ")))
        }
    }

    pub fn entries(&self) -> &[(Scale, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Two pieces on `[r1, r0]` meeting at depth `knee`. When rounding pushes
/// the knee onto an end, only the piece that survives is kept.
fn push_knee(pieces: &mut Vec<Piece>, r0: Scale, r1: Scale, knee: f64, upper: PieceKind, lower: PieceKind) {
    if knee >= r1.depth() {
        pieces.push(Piece::new(r1, r0, upper));
    } else if knee <= r0.depth() {
        pieces.push(Piece::new(r1, r0, lower));
    } else {
        let k = Scale::from_depth(knee);
        pieces.push(Piece::new(k, r0, upper));
        pieces.push(Piece::new(r1, k, lower));
    }
}

/// Largest dimension function through the checkpoints: `θ_n` down to `R'_n`,
/// then `θ_{n+1}·ln(1/R_{n+1}) / ln(1/R)` down to `R_{n+1}`.
pub fn max_interpolant(pts: &CheckpointSequence) -> DimensionFunction {
    let e = &pts.entries;
    let mut pieces = Vec::new();
    for w in e.windows(2) {
        let ((r0, t0), (r1, t1)) = (w[0], w[1]);
        if t1 == t0 {
            pieces.push(Piece::new(r1, r0, PieceKind::Constant(t0)));
            continue;
        }
        let c = t1 * r1.depth();
        push_knee(&mut pieces, r0, r1, c / t0, PieceKind::Constant(t0), PieceKind::LogReciprocal(c));
    }
    let last = e[e.len() - 1].1;
    DimensionFunction::new(e[0].0, pieces, Tail::Constant(last), None)
        .expect("validated checkpoints give a valid interpolant")
}

/// Smallest dimension function through the checkpoints on `[R_N, R_1]`:
/// `θ_n·ln(1/R_n) / ln(1/R)` down to `R̃_n`, then `θ_{n+1}` down to `R_{n+1}`.
///
/// Below `R_N` no smallest choice exists (a log-reciprocal tail breaks the
/// growth axiom), so the tail is the constant `θ_N`.
pub fn min_interpolant(pts: &CheckpointSequence) -> DimensionFunction {
    let e = &pts.entries;
    let mut pieces = Vec::new();
    for w in e.windows(2) {
        let ((r0, t0), (r1, t1)) = (w[0], w[1]);
        if t1 == t0 {
            pieces.push(Piece::new(r1, r0, PieceKind::Constant(t0)));
            continue;
        }
        let c = t0 * r0.depth();
        push_knee(&mut pieces, r0, r1, c / t1, PieceKind::LogReciprocal(c), PieceKind::Constant(t1));
    }
    let last = e[e.len() - 1].1;
    DimensionFunction::new(e[0].0, pieces, Tail::Constant(last), None)
        .expect("validated checkpoints give a valid interpolant")
}

/// Outcome for one adjacent grid pair.
#[derive(Clone, Debug, PartialEq)]
pub struct AxiomPair {
    pub upper: Scale,
    pub lower: Scale,
    /// `φ(lower) ≤ φ(upper)`.
    pub monotone: bool,
    /// `φ(lower)·ln(1/lower) ≥ φ(upper)·ln(1/upper)`.
    pub growth: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AxiomReport {
    pub pairs: Vec<AxiomPair>,
    pub monotone: bool,
    pub growth: bool,
    pub pass: bool,
}

impl AxiomReport {
    /// Name of the first axiom that fails, if any.
    pub fn failure(&self) -> Option<&'static str> {
        if !self.growth {
            Some("growth axiom")
        } else if !self.monotone {
            Some("monotone-decrease axiom")
        } else {
            None
        }
    }
}

pub(crate) fn validate_grid(grid: &[Scale]) -> Result<(), Error> {
    if grid.is_empty() {
        return Err(Error::Grid("empty grid".into()));
    }
    if let Some(i) = grid.windows(2).position(|w| !(w[1] < w[0])) {
        return Err(Error::Grid(format!("scales not strictly decreasing at index {}", i + 1)));
    }
    if grid.iter().any(|s| !s.depth().is_finite()) {
        return Err(Error::Grid("non-finite scale".into()));
    }
    Ok(())
}

/// Check both axioms on each adjacent pair of a strictly decreasing grid.
pub fn check_axioms(phi: &DimensionFunction, grid: &[Scale]) -> Result<AxiomReport, Error> {
    check_axioms_with(|s| phi.eval(s), grid)
}

/// [`check_axioms`] for an arbitrary pointwise map, e.g. to show that a
/// candidate is not a dimension function.
pub fn check_axioms_with<F>(f: F, grid: &[Scale]) -> Result<AxiomReport, Error>
where
    F: Fn(Scale) -> Result<f64, Error>,
{
    validate_grid(grid)?;
    let values = grid.iter().map(|&s| f(s)).collect::<Result<Vec<_>, _>>()?;
    let mut pairs = Vec::with_capacity(grid.len().saturating_sub(1));
    for i in 1..grid.len() {
        let (v0, v1) = (values[i - 1], values[i]);
        let (g0, g1) = (v0 * grid[i - 1].depth(), v1 * grid[i].depth());
        pairs.push(AxiomPair {
            upper: grid[i - 1],
            lower: grid[i],
            monotone: v1 <= v0 + AXIOM_TOL * math::abs(v0).max(1.0),
            growth: g1 >= g0 - AXIOM_TOL * math::abs(g0).max(1.0),
        });
    }
    let monotone = pairs.iter().all(|p| p.monotone);
    let growth = pairs.iter().all(|p| p.growth);
    Ok(AxiomReport { pairs, monotone, growth, pass: monotone && growth })
}

/// Log-form terms of `R^{-φ(R)} ≤ (CR)^{-φ(CR)} ≤ C^{-M}·R^{-φ(R)}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DoublingRow {
    pub scale: Scale,
    pub left: f64,
    pub middle: f64,
    pub right: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DoublingReport {
    pub c: f64,
    pub m: f64,
    pub rows: Vec<DoublingRow>,
    pub pass: bool,
}

/// Verify the doubling sandwich of `R^{-φ(R)}` at every grid scale, with
/// `M = sup_bound`.
pub fn doubling_bound_check(phi: &DimensionFunction, c: f64, grid: &[Scale]) -> Result<DoublingReport, Error> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::param("C", "must lie in (0, 1)"));
    }
    if grid.is_empty() {
        return Err(Error::Grid("empty grid".into()));
    }
    let m = phi.sup_bound();
    let shift = -math::ln(c);
    let mut rows = Vec::with_capacity(grid.len());
    for &r in grid {
        let left = phi.eval(r)? * r.depth();
        let middle = phi.eval(r.scaled(c))? * (r.depth() + shift);
        let right = m * shift + left;
        let tol = AXIOM_TOL * right.abs().max(1.0);
        rows.push(DoublingRow { scale: r, left, middle, right, pass: left <= middle + tol && middle <= right + tol });
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(DoublingReport { c, m, rows, pass })
}

/// Geometric grid `R_k = r0·ratio^k`, `k < n`, in log space.
pub fn geometric_grid(r0: Scale, ratio: f64, n: usize) -> Vec<Scale> {
    let step = -math::ln(ratio);
    (0..n).map(|k| Scale::from_depth(r0.depth() + step * k as f64)).collect()
}

impl core::fmt::Display for PieceKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            PieceKind::Constant(t) => write!(f, "const {t}"),
            PieceKind::LogReciprocal(c) => write!(f, "{c}/ln(1/R)"),
        }
    }
}

/// Short human-readable description, used in report provenance.
pub fn describe(phi: &DimensionFunction) -> String {
    match (phi.pieces.is_empty(), phi.tail) {
        (true, Tail::Constant(t)) => format!("constant {t}"),
        _ => format!("piecewise ({} pieces) from {}", phi.pieces.len(), phi.r_max),
    }
}
