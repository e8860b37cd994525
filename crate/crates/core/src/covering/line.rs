//! Exact one-dimensional covering and packing by left-to-right sweeps.

use alloc::vec::Vec;

use crate::math;
use crate::Error;

/// Slack, in units of the ball diameter, absorbed when rounding counts.
pub(crate) const SWEEP_TOL: f64 = 1e-9;

const COUNT_LIMIT: f64 = 9.0e15;

/// Merge closed intervals into sorted, disjoint components.
pub(crate) fn merge(mut iv: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    iv.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(iv.len());
    for (a, b) in iv {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

fn count(k: f64) -> Result<u64, Error> {
    if k > COUNT_LIMIT {
        return Err(Error::Budget { what: "1D count", needed: k as u128, budget: COUNT_LIMIT as u128 });
    }
    Ok(k as u64)
}

/// Left ends of the balls of the greedy cover: each ball starts at the
/// first point not yet covered.
pub(crate) fn cover_starts(comps: &[(f64, f64)], r: f64) -> Result<Vec<f64>, Error> {
    let d = 2.0 * r;
    let mut out = Vec::new();
    let mut frontier = f64::NEG_INFINITY;
    for &(a, b) in comps {
        if b <= frontier + SWEEP_TOL * d {
            continue;
        }
        let start = if a > frontier { a } else { frontier };
        let k = count(math::ceil((b - start) / d - SWEEP_TOL).max(1.0))?;
        out.extend((0..k).map(|i| start + i as f64 * d));
        frontier = start + k as f64 * d;
    }
    Ok(out)
}

/// Minimal number of closed radius-`r` balls covering the components.
pub(crate) fn cover_count(comps: &[(f64, f64)], r: f64) -> Result<u64, Error> {
    let d = 2.0 * r;
    let mut total = 0u64;
    let mut frontier = f64::NEG_INFINITY;
    for &(a, b) in comps {
        if b <= frontier + SWEEP_TOL * d {
            continue;
        }
        // A closed start covers from `a`; an open frontier only beyond it.
        let start = if a > frontier { a } else { frontier };
        let k = count(math::ceil((b - start) / d - SWEEP_TOL).max(1.0))?;
        total += k;
        frontier = start + k as f64 * d;
    }
    Ok(total)
}

/// Largest subset with pairwise distance strictly greater than `r`.
pub(crate) fn pack_count(comps: &[(f64, f64)], r: f64) -> Result<u64, Error> {
    let mut total = 0u64;
    // Every later pick must lie strictly beyond `threshold`.
    let mut threshold = f64::NEG_INFINITY;
    for &(a, b) in comps {
        if b <= threshold + SWEEP_TOL * r {
            continue;
        }
        let (base, k) = if a > threshold + SWEEP_TOL * r {
            (a, math::ceil((b - a) / r - SWEEP_TOL).max(1.0))
        } else {
            (threshold, math::ceil((b - threshold) / r - SWEEP_TOL).max(1.0))
        };
        let k = count(k)?;
        total += k;
        threshold = base + k as f64 * r;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn merge_touching() {
        assert_eq!(merge(vec![(0.5, 1.0), (0.0, 0.5), (2.0, 2.0)]), vec![(0.0, 1.0), (2.0, 2.0)]);
    }

    #[test]
    fn sweeps() {
        let unit = [(0.0, 1.0)];
        assert_eq!(cover_count(&unit, 0.25).unwrap(), 2);
        assert_eq!(cover_count(&unit, 0.125).unwrap(), 4);
        assert_eq!(pack_count(&unit, 0.5).unwrap(), 2);
        assert_eq!(pack_count(&unit, 0.25).unwrap(), 4);
        let three = [(0.0, 0.0), (0.5, 0.5), (1.0, 1.0)];
        assert_eq!(pack_count(&three, 0.5).unwrap(), 2);
        assert_eq!(pack_count(&three, 0.49).unwrap(), 3);
        assert_eq!(cover_starts(&unit, 0.25).unwrap(), vec![0.0, 0.5]);
    }
}
