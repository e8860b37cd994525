//! Planar counts: exact search for tiny point sets, grid and greedy bounds
//! otherwise.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{Aabb, Geom, GeomSet};
use crate::math;
use crate::Error;

/// Point sets up to this size are solved exactly.
pub(crate) const EXACT_LIMIT: usize = 12;

/// Candidate points fed to the greedy packing before it is skipped.
const PACK_BUDGET: usize = 200_000;

/// Boxes spanning more grid cells than this are counted as rectangles
/// instead of cell by cell.
const ENUM_CELLS: u64 = 4096;

const MAX_LARGE_BOXES: usize = 64;

fn linf(a: [f64; 2], b: [f64; 2]) -> f64 {
    math::abs(a[0] - b[0]).max(math::abs(a[1] - b[1]))
}

/// Minimal cover by squares of side `2r` (exhaustive, `n ≤ 12`).
pub(crate) fn exact_cover(points: &[[f64; 2]], r: f64) -> u64 {
    let n = points.len();
    let full = (1usize << n) - 1;
    let d = 2.0 * r;
    let mut masks = Vec::with_capacity(n * n);
    // An optimal square can be slid until its left and bottom edges touch
    // covered points, so anchors at point coordinates suffice.
    for px in points {
        for py in points {
            let (x0, y0) = (px[0], py[1]);
            let mut m = 0usize;
            for (k, p) in points.iter().enumerate() {
                if p[0] >= x0 && p[0] <= x0 + d && p[1] >= y0 && p[1] <= y0 + d {
                    m |= 1 << k;
                }
            }
            if m != 0 {
                masks.push(m);
            }
        }
    }
    masks.sort_unstable();
    masks.dedup();
    let mut best = alloc::vec![u8::MAX; full + 1];
    best[0] = 0;
    for state in 0..=full {
        if best[state] == u8::MAX {
            continue;
        }
        // Cover the lowest uncovered point next.
        let missing = !state & full;
        if missing == 0 {
            continue;
        }
        let bit = missing & missing.wrapping_neg();
        for &m in masks.iter().filter(|&&m| m & bit != 0) {
            let next = state | m;
            best[next] = best[next].min(best[state] + 1);
        }
    }
    best[full] as u64
}

/// Largest subset with pairwise distance `> r` (exhaustive, `n ≤ 12`).
pub(crate) fn exact_pack(points: &[[f64; 2]], r: f64) -> u64 {
    let n = points.len();
    let mut conflict = alloc::vec![0usize; n];
    for i in 0..n {
        for j in 0..n {
            if i != j && linf(points[i], points[j]) <= r {
                conflict[i] |= 1 << j;
            }
        }
    }
    let mut best = 0u32;
    for mask in 0usize..(1 << n) {
        if mask.count_ones() <= best {
            continue;
        }
        let ok = (0..n).filter(|i| mask >> i & 1 == 1).all(|i| conflict[i] & mask == 0);
        if ok {
            best = mask.count_ones();
        }
    }
    best as u64
}

struct Grid {
    origin: [f64; 2],
    side: f64,
}

impl Grid {
    /// Cells are `(kδ, (k+1)δ]` except the first, which is closed.
    fn index(&self, v: f64, axis: usize) -> Result<i64, Error> {
        let t = math::ceil((v - self.origin[axis]) / self.side) - 1.0;
        if t > (1u64 << 31) as f64 {
            return Err(Error::Budget { what: "grid cells per axis", needed: t as u128, budget: 1 << 31 });
        }
        Ok(t.max(0.0) as i64)
    }

    fn key(&self, p: [f64; 2]) -> Result<u64, Error> {
        Ok(((self.index(p[0], 0)? as u64) << 32) | self.index(p[1], 1)? as u64)
    }

    fn rect(&self, b: &Aabb) -> Result<[i64; 4], Error> {
        Ok([self.index(b.lo[0], 0)?, self.index(b.hi[0], 0)?, self.index(b.lo[1], 1)?, self.index(b.hi[1], 1)?])
    }
}

fn union_area(rects: &[[i64; 4]]) -> u64 {
    let mut xs: Vec<i64> = rects.iter().flat_map(|r| [r[0], r[1] + 1]).collect();
    let mut ys: Vec<i64> = rects.iter().flat_map(|r| [r[2], r[3] + 1]).collect();
    xs.sort_unstable();
    xs.dedup();
    ys.sort_unstable();
    ys.dedup();
    let mut area = 0u64;
    for xw in xs.windows(2) {
        for yw in ys.windows(2) {
            let hit = rects.iter().any(|r| r[0] <= xw[0] && xw[1] <= r[1] + 1 && r[2] <= yw[0] && yw[1] <= r[3] + 1);
            if hit {
                area += ((xw[1] - xw[0]) * (yw[1] - yw[0])) as u64;
            }
        }
    }
    area
}

/// Number of grid cells of side `δ` meeting the set.
pub(crate) fn grid_cells(set: &GeomSet, side: f64) -> Result<u64, Error> {
    let bb = set.bounding_box();
    let grid = Grid { origin: bb.lo, side };
    let mut keys: Vec<u64> = Vec::new();
    let mut large: Vec<[i64; 4]> = Vec::new();
    match &set.geom {
        Geom::Points(pts) => {
            keys.reserve(pts.len());
            for p in pts {
                keys.push(grid.key(*p)?);
            }
        }
        Geom::Boxes(boxes) => {
            for b in boxes {
                let r = grid.rect(b)?;
                let n = (r[1] - r[0] + 1) as u64 * (r[3] - r[2] + 1) as u64;
                if n <= ENUM_CELLS {
                    for i in r[0]..=r[1] {
                        for j in r[2]..=r[3] {
                            keys.push(((i as u64) << 32) | j as u64);
                        }
                    }
                } else {
                    large.push(r);
                }
            }
        }
    }
    if large.len() > MAX_LARGE_BOXES {
        return Err(Error::Budget {
            what: "large boxes in grid count",
            needed: large.len() as u128,
            budget: MAX_LARGE_BOXES as u128,
        });
    }
    keys.sort_unstable();
    keys.dedup();
    let inside = |k: u64| {
        let (i, j) = ((k >> 32) as i64, (k & 0xffff_ffff) as i64);
        large.iter().any(|r| r[0] <= i && i <= r[1] && r[2] <= j && j <= r[3])
    };
    let loose = keys.iter().filter(|&&k| !inside(k)).count() as u64;
    Ok(loose + union_area(&large))
}

/// Points of the set usable as packing candidates, or `None` when a box
/// lattice would exceed the budget.
fn candidates(set: &GeomSet, sep: f64) -> Option<Vec<[f64; 2]>> {
    match &set.geom {
        Geom::Points(p) => (p.len() <= PACK_BUDGET).then(|| p.clone()),
        Geom::Boxes(boxes) => {
            let step = sep * (1.0 + 1e-9);
            let mut out = Vec::new();
            for b in boxes {
                let nx = math::floor((b.hi[0] - b.lo[0]) / step) + 1.0;
                let ny = math::floor((b.hi[1] - b.lo[1]) / step) + 1.0;
                if out.len() as f64 + nx * ny > PACK_BUDGET as f64 {
                    return None;
                }
                for i in 0..nx as usize {
                    for j in 0..ny as usize {
                        out.push([b.lo[0] + i as f64 * step, b.lo[1] + j as f64 * step]);
                    }
                }
            }
            Some(out)
        }
    }
}

/// Size of a greedy subset with pairwise distance `> sep`; `None` when the
/// candidate budget is exceeded.
pub(crate) fn greedy_pack(set: &GeomSet, sep: f64) -> Option<u64> {
    let cands = candidates(set, sep)?;
    let mut chosen: BTreeMap<(i64, i64), Vec<[f64; 2]>> = BTreeMap::new();
    let cell = |p: [f64; 2]| (math::floor(p[0] / sep) as i64, math::floor(p[1] / sep) as i64);
    let mut n = 0u64;
    for p in cands {
        let (ci, cj) = cell(p);
        let clash = (-1..=1).any(|di| {
            (-1..=1).any(|dj| chosen.get(&(ci + di, cj + dj)).is_some_and(|v| v.iter().any(|&q| linf(p, q) <= sep)))
        });
        if !clash {
            chosen.entry((ci, cj)).or_default().push(p);
            n += 1;
        }
    }
    Some(n)
}
