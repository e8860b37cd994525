//! Covering numbers `N_r` and packing numbers `M_r` under the sup metric.
//!
//! Balls are closed squares (intervals in 1D). `M_r` counts subsets with
//! pairwise distance strictly greater than `r`. One-dimensional sets and
//! planar sets lying on an axis-parallel line are counted exactly; other
//! planar sets are solved exhaustively up to 12 points and bounded otherwise.

mod line;
mod plane;

use alloc::format;
use alloc::vec::Vec;

use crate::Error;

/// Closed axis-aligned box. In 1D the second coordinate is unused and zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Aabb {
    pub fn new(lo: [f64; 2], hi: [f64; 2]) -> Aabb {
        Aabb { lo, hi }
    }

    pub fn interval(a: f64, b: f64) -> Aabb {
        Aabb { lo: [a, 0.0], hi: [b, 0.0] }
    }

    /// Closed ball of radius `r` around `x`.
    pub fn ball(x: [f64; 2], r: f64) -> Aabb {
        Aabb { lo: [x[0] - r, x[1] - r], hi: [x[0] + r, x[1] + r] }
    }

    fn contains(&self, p: [f64; 2], dim: u8) -> bool {
        (0..dim as usize).all(|k| self.lo[k] <= p[k] && p[k] <= self.hi[k])
    }

    fn intersect(&self, o: &Aabb, dim: u8) -> Option<Aabb> {
        let mut out = *self;
        for k in 0..dim as usize {
            out.lo[k] = self.lo[k].max(o.lo[k]);
            out.hi[k] = self.hi[k].min(o.hi[k]);
            if out.lo[k] > out.hi[k] {
                return None;
            }
        }
        Some(out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Geom {
    Points(Vec<[f64; 2]>),
    Boxes(Vec<Aabb>),
}

/// A finite union of points or closed boxes in `R^d`, `d ∈ {1, 2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeomSet {
    dim: u8,
    pub(crate) geom: Geom,
}

fn check_dim(dim: u8) -> Result<(), Error> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        Err(Error::param("d", "only d = 1 and d = 2 are supported"))
    }
}

impl GeomSet {
    pub fn points(dim: u8, mut points: Vec<[f64; 2]>) -> Result<GeomSet, Error> {
        check_dim(dim)?;
        if points.is_empty() {
            return Err(Error::Empty);
        }
        for p in &mut points {
            if dim == 1 {
                p[1] = 0.0;
            }
            if !(p[0].is_finite() && p[1].is_finite()) {
                return Err(Error::param("points", "coordinates must be finite"));
            }
        }
        Ok(GeomSet { dim, geom: Geom::Points(points) })
    }

    pub fn boxes(dim: u8, mut boxes: Vec<Aabb>) -> Result<GeomSet, Error> {
        check_dim(dim)?;
        if boxes.is_empty() {
            return Err(Error::Empty);
        }
        for (i, b) in boxes.iter_mut().enumerate() {
            if dim == 1 {
                b.lo[1] = 0.0;
                b.hi[1] = 0.0;
            }
            let finite = b.lo.iter().chain(&b.hi).all(|v| v.is_finite());
            if !finite || b.lo[0] > b.hi[0] || b.lo[1] > b.hi[1] {
                return Err(Error::param("boxes", format!("box {i} is not a finite closed box")));
            }
        }
        Ok(GeomSet { dim, geom: Geom::Boxes(boxes) })
    }

    /// `[a, b]` in 1D.
    pub fn interval(a: f64, b: f64) -> Result<GeomSet, Error> {
        GeomSet::boxes(1, alloc::vec![Aabb::interval(a, b)])
    }

    pub fn dim(&self) -> u8 {
        self.dim
    }

    pub fn as_points(&self) -> Option<&[[f64; 2]]> {
        match &self.geom {
            Geom::Points(p) => Some(p),
            Geom::Boxes(_) => None,
        }
    }

    pub fn as_boxes(&self) -> Option<&[Aabb]> {
        match &self.geom {
            Geom::Boxes(b) => Some(b),
            Geom::Points(_) => None,
        }
    }

    /// Number of points or boxes.
    pub fn len(&self) -> usize {
        match &self.geom {
            Geom::Points(p) => p.len(),
            Geom::Boxes(b) => b.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn bounding_box(&self) -> Aabb {
        let mut bb = Aabb { lo: [f64::INFINITY; 2], hi: [f64::NEG_INFINITY; 2] };
        let mut grow = |lo: [f64; 2], hi: [f64; 2]| {
            for k in 0..2 {
                bb.lo[k] = bb.lo[k].min(lo[k]);
                bb.hi[k] = bb.hi[k].max(hi[k]);
            }
        };
        match &self.geom {
            Geom::Points(p) => p.iter().for_each(|&q| grow(q, q)),
            Geom::Boxes(b) => b.iter().for_each(|b| grow(b.lo, b.hi)),
        }
        bb
    }

    /// Union with another set of the same dimension. Points joined with
    /// boxes become degenerate boxes.
    pub fn union(&self, other: &GeomSet) -> Result<GeomSet, Error> {
        if self.dim != other.dim {
            return Err(Error::param("d", "cannot join sets of different dimension"));
        }
        match (&self.geom, &other.geom) {
            (Geom::Points(a), Geom::Points(b)) => GeomSet::points(self.dim, [a.as_slice(), b].concat()),
            _ => {
                let mut boxes = self.to_boxes();
                boxes.extend(other.to_boxes());
                GeomSet::boxes(self.dim, boxes)
            }
        }
    }

    fn to_boxes(&self) -> Vec<Aabb> {
        match &self.geom {
            Geom::Points(p) => p.iter().map(|&q| Aabb::new(q, q)).collect(),
            Geom::Boxes(b) => b.clone(),
        }
    }

    /// Sorted components along `axis`, as closed intervals.
    fn components(&self, axis: usize) -> Vec<(f64, f64)> {
        let iv = match &self.geom {
            Geom::Points(p) => p.iter().map(|q| (q[axis], q[axis])).collect(),
            Geom::Boxes(b) => b.iter().map(|b| (b.lo[axis], b.hi[axis])).collect(),
        };
        line::merge(iv)
    }

    /// For planar sets on a horizontal or vertical line, the varying axis.
    fn line_axis(&self) -> Option<usize> {
        if self.dim == 1 {
            return Some(0);
        }
        let bb = self.bounding_box();
        if bb.lo[1] == bb.hi[1] {
            Some(0)
        } else if bb.lo[0] == bb.hi[0] {
            Some(1)
        } else {
            None
        }
    }

    /// A few points of the set: every point (strided beyond `cap`), or box
    /// corners and centres.
    pub fn sample_points(&self, cap: usize) -> Vec<[f64; 2]> {
        let all: Vec<[f64; 2]> = match &self.geom {
            Geom::Points(p) => p.clone(),
            Geom::Boxes(b) => b
                .iter()
                .flat_map(|b| {
                    let mid = [(b.lo[0] + b.hi[0]) / 2.0, (b.lo[1] + b.hi[1]) / 2.0];
                    if self.dim == 1 {
                        alloc::vec![b.lo, mid, b.hi]
                    } else {
                        alloc::vec![b.lo, [b.hi[0], b.lo[1]], [b.lo[0], b.hi[1]], b.hi, mid]
                    }
                })
                .collect(),
        };
        stride(all, cap)
    }
}

/// Deterministic stride subsample keeping at most `cap` items.
pub(crate) fn stride<T>(v: Vec<T>, cap: usize) -> Vec<T> {
    if v.len() <= cap || cap == 0 {
        return v;
    }
    let step = v.len().div_ceil(cap);
    v.into_iter().step_by(step).collect()
}

/// Certified bounds on a count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CountBounds {
    pub lower: u64,
    pub upper: u64,
    pub exact: bool,
}

impl CountBounds {
    pub fn exact(n: u64) -> CountBounds {
        CountBounds { lower: n, upper: n, exact: true }
    }

    pub fn between(lower: u64, upper: u64) -> CountBounds {
        debug_assert!(lower <= upper);
        CountBounds { lower, upper, exact: lower == upper }
    }
}

fn check_radius(r: f64) -> Result<(), Error> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(Error::param("r", "radius must be positive and finite"))
    }
}

/// `F ∩ B(x, R)`.
pub fn ball_restrict(set: &GeomSet, x: [f64; 2], r: f64) -> Result<GeomSet, Error> {
    check_radius(r)?;
    let ball = Aabb::ball(x, r);
    let geom = match &set.geom {
        Geom::Points(p) => Geom::Points(p.iter().copied().filter(|&q| ball.contains(q, set.dim)).collect()),
        Geom::Boxes(b) => Geom::Boxes(b.iter().filter_map(|b| b.intersect(&ball, set.dim)).collect()),
    };
    let out = GeomSet { dim: set.dim, geom };
    if out.is_empty() {
        Err(Error::Empty)
    } else {
        Ok(out)
    }
}

/// [`ball_restrict`] in coordinates centred on `x`. Covering numbers are
/// translation invariant, and the shift keeps radii far below `ulp(x)`
/// resolvable.
pub fn ball_restrict_local(set: &GeomSet, x: [f64; 2], r: f64) -> Result<GeomSet, Error> {
    check_radius(r)?;
    let ball = Aabb::ball([0.0, 0.0], r);
    let shift = |p: [f64; 2]| [p[0] - x[0], p[1] - x[1]];
    let geom = match &set.geom {
        Geom::Points(p) => Geom::Points(p.iter().map(|&q| shift(q)).filter(|&q| ball.contains(q, set.dim)).collect()),
        Geom::Boxes(b) => Geom::Boxes(
            b.iter().filter_map(|b| Aabb { lo: shift(b.lo), hi: shift(b.hi) }.intersect(&ball, set.dim)).collect(),
        ),
    };
    let out = GeomSet { dim: set.dim, geom };
    if out.is_empty() {
        Err(Error::Empty)
    } else {
        Ok(out)
    }
}

/// `N_r(F)`.
pub fn covering_number(set: &GeomSet, r: f64) -> Result<CountBounds, Error> {
    check_radius(r)?;
    if let Some(axis) = set.line_axis() {
        return line::cover_count(&set.components(axis), r).map(CountBounds::exact);
    }
    if let Some(p) = set.as_points().filter(|p| p.len() <= plane::EXACT_LIMIT) {
        return Ok(CountBounds::exact(plane::exact_cover(p, r)));
    }
    let upper = plane::grid_cells(set, 2.0 * r)?;
    let mut lower = upper.div_ceil(4).max(1);
    if let Some(m) = plane::greedy_pack(set, 2.0 * r) {
        lower = lower.max(m);
    }
    Ok(CountBounds::between(lower.min(upper), upper))
}

/// `M_r(F)`: largest subset with pairwise distance `> r`.
pub fn packing_number(set: &GeomSet, r: f64) -> Result<CountBounds, Error> {
    check_radius(r)?;
    if let Some(axis) = set.line_axis() {
        return line::pack_count(&set.components(axis), r).map(CountBounds::exact);
    }
    if let Some(p) = set.as_points().filter(|p| p.len() <= plane::EXACT_LIMIT) {
        return Ok(CountBounds::exact(plane::exact_pack(p, r)));
    }
    let upper = covering_number(set, r / 2.0)?.upper;
    let lower = plane::greedy_pack(set, r).unwrap_or(1).max(1);
    Ok(CountBounds::between(lower.min(upper), upper))
}

/// Centres of the greedy 1D cover at radius `r`, for sets on a line.
pub fn cover_centers(set: &GeomSet, r: f64) -> Result<Vec<[f64; 2]>, Error> {
    check_radius(r)?;
    let axis = set.line_axis().ok_or_else(|| Error::Unsupported("cover centres need a set on a line".into()))?;
    let fixed = set.bounding_box().lo[1 - axis];
    Ok(line::cover_starts(&set.components(axis), r)?
        .into_iter()
        .map(|s| {
            let mut c = [0.0; 2];
            c[axis] = s + r;
            if set.dim == 2 {
                c[1 - axis] = fixed;
            }
            c
        })
        .collect())
}

/// `N_r ≤ M_r ≤ N_{r/2}`, judged on certified bounds only.
#[derive(Clone, Debug, PartialEq)]
pub struct SandwichReport {
    pub r: f64,
    pub cover: CountBounds,
    pub pack: CountBounds,
    pub cover_half: CountBounds,
    /// False only when the bounds certify a violation.
    pub pass: bool,
}

pub fn sandwich_check(set: &GeomSet, r: f64) -> Result<SandwichReport, Error> {
    let cover = covering_number(set, r)?;
    let pack = packing_number(set, r)?;
    let cover_half = covering_number(set, r / 2.0)?;
    let pass = cover.lower <= pack.upper && pack.lower <= cover_half.upper;
    Ok(SandwichReport { r, cover, pack, cover_half, pass })
}

/// Both sides of the product lower bound for nested packings.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainReport {
    /// Lower bound on the packing count at the finest scale in `B(x, R)`.
    pub lhs: u64,
    /// Upper bound on the product of per-scale factors.
    pub rhs: f64,
    /// Factors: the outer count, then the sampled infimum per finer scale.
    pub factors: Vec<u64>,
    pub pass: bool,
    pub centers: usize,
}

/// Check `P_{r_k}(B(x,R)∩F) ≥ P_{r_1}(B(x,R−r_1)∩F) · Π inf_y P_{r_i}(B(y,r_{i−1}−r_i)∩F)`.
///
/// `P_r` counts disjoint closed radius-`r` balls centred in `F`, i.e. points
/// pairwise more than `2r` apart. With that convention the nested balls of a
/// packing stay disjoint and the product bound holds; the infimum over `y`
/// runs over `centers` (default: [`GeomSet::sample_points`]).
pub fn chain_lower_bound_check(
    set: &GeomSet,
    x: [f64; 2],
    scales: &[f64],
    big_r: f64,
    centers: Option<&[[f64; 2]]>,
) -> Result<ChainReport, Error> {
    check_radius(big_r)?;
    if scales.is_empty() {
        return Err(Error::Grid("empty scale chain".into()));
    }
    if scales.iter().any(|&s| !(s > 0.0)) || scales.windows(2).any(|w| !(w[1] < w[0])) || !(scales[0] < big_r) {
        return Err(Error::Grid("scales must decrease strictly and start below R".into()));
    }
    let disjoint = |s: &GeomSet, r: f64| packing_number(s, 2.0 * r);
    let sample;
    let centers = match centers {
        Some(c) => c,
        None => {
            sample = set.sample_points(512);
            &sample
        }
    };
    let k = scales.len();
    let lhs = disjoint(&ball_restrict(set, x, big_r)?, scales[k - 1])?.lower;
    let mut factors = Vec::with_capacity(k);
    factors.push(disjoint(&ball_restrict(set, x, big_r - scales[0])?, scales[0])?.upper);
    for w in scales.windows(2) {
        let mut best = u64::MAX;
        for &y in centers {
            match ball_restrict(set, y, w[0] - w[1]) {
                Ok(b) => best = best.min(disjoint(&b, w[1])?.upper),
                Err(Error::Empty) => continue,
                Err(e) => return Err(e),
            }
        }
        if best == u64::MAX {
            return Err(Error::Empty);
        }
        factors.push(best);
    }
    let rhs = factors.iter().map(|&f| f as f64).product::<f64>();
    Ok(ChainReport { lhs, rhs, pass: lhs as f64 >= rhs, factors, centers: centers.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn pts(xs: &[f64]) -> GeomSet {
        GeomSet::points(1, xs.iter().map(|&x| [x, 0.0]).collect()).unwrap()
    }

    #[test]
    fn restrict() {
        let unit = GeomSet::interval(0.0, 1.0).unwrap();
        let b = ball_restrict(&unit, [0.0, 0.0], 0.5).unwrap();
        assert_eq!(b.as_boxes().unwrap(), &[Aabb::interval(0.0, 0.5)]);
        let f = pts(&[0.0, 0.3, 0.9]);
        assert_eq!(ball_restrict(&f, [0.25, 0.0], 0.1).unwrap().as_points().unwrap(), &[[0.3, 0.0]]);
        assert_eq!(ball_restrict(&f, [0.6, 0.0], 0.1), Err(Error::Empty));
    }

    #[test]
    fn counts() {
        assert_eq!(covering_number(&pts(&[0.0, 1.0]), 0.4).unwrap(), CountBounds::exact(2));
        let unit = GeomSet::interval(0.0, 1.0).unwrap();
        assert_eq!(covering_number(&unit, 0.25).unwrap(), CountBounds::exact(2));
        assert_eq!(packing_number(&pts(&[0.0, 0.5, 1.0]), 0.5).unwrap(), CountBounds::exact(2));
        assert_eq!(packing_number(&pts(&[0.0, 0.5, 1.0]), 0.49).unwrap(), CountBounds::exact(3));
        assert_eq!(packing_number(&unit, 0.5).unwrap(), CountBounds::exact(2));
        assert!(covering_number(&unit, 0.0).is_err());
        assert!(packing_number(&unit, -1.0).is_err());
    }

    #[test]
    fn sandwiches() {
        let rep = sandwich_check(&pts(&[0.0, 1.0]), 0.4).unwrap();
        assert_eq!((rep.cover.upper, rep.pack.upper, rep.cover_half.upper), (2, 2, 2));
        let rep = sandwich_check(&GeomSet::interval(0.0, 1.0).unwrap(), 0.25).unwrap();
        assert_eq!((rep.cover.upper, rep.pack.upper, rep.cover_half.upper), (2, 4, 4));
        assert!(rep.pass);
        let rep = sandwich_check(&pts(&[0.3]), 0.01).unwrap();
        assert_eq!((rep.cover.upper, rep.pack.upper, rep.cover_half.upper), (1, 1, 1));
    }

    #[test]
    fn planar_exact_and_bounds() {
        let sq = GeomSet::points(2, vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]).unwrap();
        assert_eq!(covering_number(&sq, 0.5).unwrap(), CountBounds::exact(1));
        assert_eq!(covering_number(&sq, 0.49).unwrap(), CountBounds::exact(4));
        assert_eq!(packing_number(&sq, 0.99).unwrap(), CountBounds::exact(4));
        assert_eq!(packing_number(&sq, 1.0).unwrap(), CountBounds::exact(1));
        let unit = GeomSet::boxes(2, vec![Aabb::new([0.0, 0.0], [1.0, 1.0])]).unwrap();
        let b = covering_number(&unit, 0.125).unwrap();
        assert_eq!(b.upper, 16);
        assert!(b.lower <= 16 && b.lower >= 4);
        let seg = GeomSet::boxes(2, vec![Aabb::new([0.0, 0.5], [1.0, 0.5])]).unwrap();
        assert_eq!(covering_number(&seg, 0.25).unwrap(), CountBounds::exact(2));
    }

    #[test]
    fn chain_examples() {
        let unit = GeomSet::interval(0.0, 1.0).unwrap();
        let rep = chain_lower_bound_check(&unit, [0.0, 0.0], &[0.1, 0.02], 0.5, None).unwrap();
        assert!(rep.pass, "{rep:?}");
        let one = chain_lower_bound_check(&unit, [0.3, 0.0], &[0.1], 0.5, None).unwrap();
        assert_eq!(one.factors.len(), 1);
        assert!(one.pass);
        assert!(chain_lower_bound_check(&unit, [0.0, 0.0], &[0.6], 0.5, None).is_err());
        assert!(chain_lower_bound_check(&unit, [0.0, 0.0], &[0.01, 0.1], 0.5, None).is_err());
    }
}
