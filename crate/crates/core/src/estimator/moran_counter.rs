//! Ball counts on a one-dimensional Moran set without materializing it.
//!
//! Centres are left endpoints of level-`l(R)` cylinders. Such a ball splits
//! into a right part inside the centre's own cylinder and, when the gap to
//! the left neighbour is shorter than `R`, a left part inside the mirrored
//! sibling. Both parts are prefixes `[0, t]` of a cylinder, counted by
//! following a single path down the levels.

use alloc::vec::Vec;
use core::f64::consts::LN_2;

use super::{CoverEstimate, LocalCounter};
use crate::count::Count;
use crate::math;
use crate::moran::{MoranSpec, LEVEL_TOL};
use crate::{Error, Scale};

/// How far below `l(R)` neighbour gaps are inspected.
const GAP_SCAN: u64 = 64;

/// A centre class: the left endpoint of a level-`level` cylinder whose
/// address has its last `1` at `gap_level` (`None`: the origin).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MoranCenter {
    pub level: u64,
    pub gap_level: Option<u64>,
}

/// [`LocalCounter`] over the implicit set of a one-dimensional schedule.
#[derive(Clone, Copy, Debug)]
pub struct MoranCounter<'a> {
    spec: &'a MoranSpec,
}

#[derive(Clone, Copy, Debug)]
struct LevelCounts {
    contained: Count,
    intersecting: Count,
}

impl LevelCounts {
    const ZERO: LevelCounts = LevelCounts { contained: Count::ZERO, intersecting: Count::ZERO };

    fn add(self, o: LevelCounts) -> LevelCounts {
        LevelCounts { contained: self.contained + o.contained, intersecting: self.intersecting + o.intersecting }
    }
}

impl<'a> MoranCounter<'a> {
    pub fn new(spec: &'a MoranSpec) -> Result<MoranCounter<'a>, Error> {
        if spec.dim() != 1 {
            return Err(Error::Unsupported("implicit counting needs d = 1".into()));
        }
        Ok(MoranCounter { spec })
    }

    fn tol(d: f64) -> f64 {
        LEVEL_TOL * d.abs().max(1.0)
    }

    /// `ln` of the gap left of a cylinder whose address ends in `1` at `j`.
    fn ln_gap(&self, j: u64) -> Result<f64, Error> {
        let r = self.spec.ratio(j)?;
        if r == 0.5 {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(-self.spec.depth(j - 1)? + math::ln(1.0 - 2.0 * r))
    }

    /// Deepest level `≤ m` whose ratio is exactly one half.
    fn last_half_level(&self, m: u64) -> Option<u64> {
        let blocks = self.spec.blocks();
        let total = self.spec.block_levels();
        if m > total && self.spec.tail() == Some(0.5) {
            return Some(m);
        }
        let mut end = m.min(total);
        let mut start = total;
        for b in blocks.iter().rev() {
            start -= b.len;
            if start >= end {
                continue;
            }
            if b.ratio == 0.5 {
                return Some(end);
            }
            end = start;
            if end == 0 {
                break;
            }
        }
        None
    }

    /// Counts of level-`k` descendants of a level-`q0` cylinder that lie in,
    /// or meet, its left prefix of length `t = e^{-t_depth}`.
    fn prefix(&self, q0: u64, t_depth: f64, k: u64) -> Result<LevelCounts, Error> {
        let spec = self.spec;
        let tol = Self::tol(t_depth);
        if k <= q0 {
            let full = k == q0 && t_depth <= spec.depth(q0)? + tol;
            return Ok(LevelCounts {
                contained: if full { Count::ONE } else { Count::ZERO },
                intersecting: Count::ONE,
            });
        }
        let q = spec.level_at_depth(t_depth)?.max(q0);
        if q >= k {
            let full = q == k && math::abs(spec.depth(k)? - t_depth) <= tol;
            return Ok(LevelCounts {
                contained: if full { Count::ONE } else { Count::ZERO },
                intersecting: Count::ONE,
            });
        }
        let mut u = math::exp(spec.depth(q)? - t_depth);
        let mut level = q;
        let mut acc = LevelCounts::ZERO;
        loop {
            if u >= 1.0 - 1e-12 {
                let all = Count::pow2(k - level);
                acc = acc.add(LevelCounts { contained: all, intersecting: all });
                break;
            }
            if level == k {
                acc.intersecting = acc.intersecting + Count::ONE;
                break;
            }
            let r = spec.ratio(level + 1)?;
            if u < r {
                u /= r;
                level += 1;
                continue;
            }
            let left = Count::pow2(k - level - 1);
            acc = acc.add(LevelCounts { contained: left, intersecting: left });
            if u >= 1.0 - r {
                u = ((u - (1.0 - r)) / r).max(0.0);
                level += 1;
                continue;
            }
            break;
        }
        Ok(acc)
    }

    fn level_counts(&self, c: &MoranCenter, big: Scale, k: u64) -> Result<LevelCounts, Error> {
        let d = big.depth();
        let mut out = self.prefix(c.level, d, k)?;
        if let Some(j) = c.gap_level {
            let lg = self.ln_gap(j)?;
            // t = R - g, kept in log form.
            let rel = math::exp(lg + d);
            if rel < 1.0 {
                let t_depth = d - math::ln1p(-rel);
                out = out.add(self.prefix(j, t_depth, k)?);
            }
        }
        Ok(out)
    }

    /// Smallest level whose cylinders are no longer than `2r`.
    fn level_below(&self, depth_2r: f64) -> Result<u64, Error> {
        let k = self.spec.level_at_depth(depth_2r)?;
        if self.spec.depth(k)? >= depth_2r - Self::tol(depth_2r) {
            Ok(k)
        } else {
            Ok(k + 1)
        }
    }
}

impl LocalCounter for MoranCounter<'_> {
    type Center = MoranCenter;

    fn dim(&self) -> u8 {
        1
    }

    fn centers(&self, big: Scale) -> Result<Vec<MoranCenter>, Error> {
        let m = self.spec.l_of_r(big)?;
        let mut out = alloc::vec![MoranCenter { level: m, gap_level: None }];
        if let Some(j) = self.last_half_level(m) {
            out.push(MoranCenter { level: m, gap_level: Some(j) });
        }
        for j in m.saturating_sub(GAP_SCAN).max(1)..=m {
            if self.spec.ratio(j)? < 0.5 && self.ln_gap(j)? < big.ln() {
                out.push(MoranCenter { level: m, gap_level: Some(j) });
            }
        }
        Ok(out)
    }

    fn count(&self, c: &MoranCenter, big: Scale, small: Scale) -> Result<CoverEstimate, Error> {
        if !(small < big) {
            return Err(Error::param("r", "small scale must be below R"));
        }
        let m = c.level;
        let rho_m = self.spec.depth(m)?;
        if big.depth() < rho_m - Self::tol(rho_m) {
            return Err(Error::param("center", "ball radius exceeds the centre's cylinder"));
        }
        let k_up = self.level_below(small.depth() - LN_2)?;
        let upper = self.level_counts(c, big, k_up.max(m))?.intersecting;
        let lower = match k_up.checked_sub(1) {
            Some(k_lo) if k_lo >= m => self.level_counts(c, big, k_lo)?.contained.half_ceil().max(Count::ONE),
            _ => Count::ONE,
        };
        let k_pt = self.spec.level_at_depth(small.depth())?.max(m);
        let value = self.level_counts(c, big, k_pt)?.intersecting.max(lower).min(upper);
        Ok(CoverEstimate { lower, value, upper, exact: lower == upper })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::{ball_restrict, covering_number};

    fn third() -> MoranSpec {
        MoranSpec::constant(1, 1.0 / 3.0).unwrap()
    }

    #[test]
    fn counts_bracket_materialized_covers() {
        for spec in
            [third(), MoranSpec::explicit(1, &[0.5, 0.25, 0.4, 0.5, 0.3, 0.25, 0.5, 0.2, 0.45, 0.5], None).unwrap()]
        {
            let counter = MoranCounter::new(&spec).unwrap();
            let set = spec.level_set(10, 1 << 12).unwrap().to_geom_set();
            for (lb, ls) in [(1u64, 4u64), (2, 5), (2, 7), (3, 8), (1, 9)] {
                let big = Scale::from_depth(spec.depth(lb).unwrap() * 1.0001);
                let small = Scale::from_depth(spec.depth(ls).unwrap() * 0.9999);
                for c in counter.centers(big).unwrap() {
                    let est = counter.count(&c, big, small).unwrap();
                    let x = left_endpoint(&spec, &c);
                    let n =
                        covering_number(&ball_restrict(&set, [x, 0.0], big.radius()).unwrap(), small.radius()).unwrap();
                    assert!(est.lower.approx() <= n.lower as f64 + 1e-9, "{c:?} {est:?} {n:?}");
                    assert!(est.upper.approx() >= n.upper as f64 - 1e-9, "{c:?} {est:?} {n:?}");
                }
            }
        }
    }

    /// A concrete left endpoint realising the centre class, built from the
    /// address `0…0 1 0…0`.
    fn left_endpoint(spec: &MoranSpec, c: &MoranCenter) -> f64 {
        match c.gap_level {
            None => 0.0,
            Some(j) => {
                let parent = math::exp(-spec.depth(j - 1).unwrap());
                let child = math::exp(-spec.depth(j).unwrap());
                parent - child
            }
        }
    }

    #[test]
    fn deep_counts_are_powers_of_two() {
        let half = MoranSpec::constant(1, 0.5).unwrap();
        let counter = MoranCounter::new(&half).unwrap();
        let big = Scale::from_depth(2000.0 * LN_2);
        let small = Scale::from_depth(4000.0 * LN_2);
        let c = MoranCenter { level: 2000, gap_level: None };
        let est = counter.count(&c, big, small).unwrap();
        // [0, R] at radius r needs R/2r = 2^1999 balls.
        assert!(math::close(est.upper.ln(), 1999.0 * LN_2, 1e-9), "{est:?}");
        assert!(est.lower.ln() <= 1999.0 * LN_2 + 1e-6);
        assert!(est.value.ln() >= est.lower.ln() && est.value.ln() <= est.upper.ln());
    }
}
