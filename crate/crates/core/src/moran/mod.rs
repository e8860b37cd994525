//! Homogeneous Moran sets in `[0,1]^d`.
//!
//! A schedule is a run-length list of ratio blocks followed by an optional
//! constant tail ratio. `ln(1/ρ(n))` is evaluated in closed form from block
//! prefix sums, so levels in the hundreds of thousands cost nothing and
//! never underflow.

mod examples;
mod formula;

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use crate::covering::{Aabb, GeomSet};
use crate::dimfunc::DimensionFunction;
use crate::math;
use crate::{Error, Scale};

pub use examples::{example1_spec, example2_spec, ExampleParams};
pub use formula::{formula_dimension, FormulaReport, FormulaTerm, LevelSelection};

/// Relative tolerance when locating a depth on the level ladder.
pub const LEVEL_TOL: f64 = 1e-12;

/// Default cap on the number of boxes in a materialized level.
pub const DEFAULT_BOX_BUDGET: u64 = 1 << 22;

/// `len` consecutive levels sharing one ratio.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioBlock {
    pub ratio: f64,
    pub len: u64,
}

/// How a schedule was produced.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScheduleKind {
    Constant,
    Explicit,
    Example1 { alpha: f64 },
    Example2 { alpha: f64 },
}

impl ScheduleKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScheduleKind::Constant => "constant",
            ScheduleKind::Explicit => "explicit",
            ScheduleKind::Example1 { .. } => "example1",
            ScheduleKind::Example2 { .. } => "example2",
        }
    }
}

/// A checkpoint scale of a generated schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckpointRecord {
    /// `l(R_n)`.
    pub level: u64,
    /// `R_n = ρ(level)`.
    pub scale: Scale,
    /// Lengths of the ratio blocks placed right after the checkpoint.
    pub blocks: Vec<u64>,
    /// Whether the block lengths equal the window offsets recomputed from
    /// the finished schedule.
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MoranSpec {
    dim: u8,
    kind: ScheduleKind,
    blocks: Vec<RatioBlock>,
    tail: Option<f64>,
    checkpoints: Vec<CheckpointRecord>,
    start_level: Vec<u64>,
    start_depth: Vec<f64>,
}

fn check_ratio(r: f64) -> Result<(), Error> {
    if r > 0.0 && r <= 0.5 {
        Ok(())
    } else {
        Err(Error::param("ratio", format!("{r} is outside (0, 1/2]")))
    }
}

impl MoranSpec {
    /// General constructor. Adjacent blocks with equal ratios are merged.
    pub fn from_blocks(
        dim: u8,
        kind: ScheduleKind,
        blocks: Vec<RatioBlock>,
        tail: Option<f64>,
        checkpoints: Vec<CheckpointRecord>,
    ) -> Result<MoranSpec, Error> {
        if !(dim == 1 || dim == 2) {
            return Err(Error::param("d", "only d = 1 and d = 2 are supported"));
        }
        let mut merged: Vec<RatioBlock> = Vec::with_capacity(blocks.len());
        for b in blocks {
            check_ratio(b.ratio)?;
            if b.len == 0 {
                continue;
            }
            match merged.last_mut() {
                Some(last) if last.ratio == b.ratio => last.len += b.len,
                _ => merged.push(b),
            }
        }
        if let Some(t) = tail {
            check_ratio(t)?;
        }
        if merged.is_empty() && tail.is_none() {
            return Err(Error::param("ratios", "schedule is empty"));
        }
        let mut start_level = Vec::with_capacity(merged.len() + 1);
        let mut start_depth = Vec::with_capacity(merged.len() + 1);
        let (mut lvl, mut dep) = (0u64, 0.0f64);
        for b in &merged {
            start_level.push(lvl);
            start_depth.push(dep);
            lvl += b.len;
            dep += b.len as f64 * -math::ln(b.ratio);
        }
        start_level.push(lvl);
        start_depth.push(dep);
        Ok(MoranSpec { dim, kind, blocks: merged, tail, checkpoints, start_level, start_depth })
    }

    /// `r_n ≡ r`.
    pub fn constant(dim: u8, r: f64) -> Result<MoranSpec, Error> {
        MoranSpec::from_blocks(dim, ScheduleKind::Constant, Vec::new(), Some(r), Vec::new())
    }

    /// Listed ratios, then an optional constant tail.
    pub fn explicit(dim: u8, ratios: &[f64], tail: Option<f64>) -> Result<MoranSpec, Error> {
        let blocks = ratios.iter().map(|&ratio| RatioBlock { ratio, len: 1 }).collect();
        MoranSpec::from_blocks(dim, ScheduleKind::Explicit, blocks, tail, Vec::new())
    }

    pub fn dim(&self) -> u8 {
        self.dim
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn blocks(&self) -> &[RatioBlock] {
        &self.blocks
    }

    pub fn tail(&self) -> Option<f64> {
        self.tail
    }

    pub fn checkpoints(&self) -> &[CheckpointRecord] {
        &self.checkpoints
    }

    /// Number of levels fixed by the block list.
    pub fn block_levels(&self) -> u64 {
        *self.start_level.last().unwrap()
    }

    /// Deepest defined level, `None` when the tail makes it unbounded.
    pub fn max_level(&self) -> Option<u64> {
        self.tail.is_none().then(|| self.block_levels())
    }

    /// `r_* = inf r_n`.
    pub fn r_star(&self) -> f64 {
        self.blocks.iter().map(|b| b.ratio).chain(self.tail).fold(f64::INFINITY, f64::min)
    }

    fn exhausted(&self, n: u64) -> Error {
        Error::Budget { what: "schedule levels", needed: n as u128, budget: self.block_levels() as u128 }
    }

    /// `r_n`, `n ≥ 1`.
    pub fn ratio(&self, n: u64) -> Result<f64, Error> {
        if n == 0 {
            return Err(Error::param("n", "levels start at 1"));
        }
        if n <= self.block_levels() {
            let b = self.start_level.partition_point(|&s| s < n);
            return Ok(self.blocks[b - 1].ratio);
        }
        self.tail.ok_or_else(|| self.exhausted(n))
    }

    /// `ln(1/ρ(n))`; zero at `n = 0`.
    pub fn depth(&self, n: u64) -> Result<f64, Error> {
        let total = self.block_levels();
        if n >= total {
            let end = *self.start_depth.last().unwrap();
            if n == total {
                return Ok(end);
            }
            let t = self.tail.ok_or_else(|| self.exhausted(n))?;
            return Ok(end + (n - total) as f64 * -math::ln(t));
        }
        let b = self.start_level.partition_point(|&s| s <= n) - 1;
        let blk = self.blocks[b];
        Ok(self.start_depth[b] + (n - self.start_level[b]) as f64 * -math::ln(blk.ratio))
    }

    /// `ρ(n)` as a scale.
    pub fn scale(&self, n: u64) -> Result<Scale, Error> {
        self.depth(n).map(Scale::from_depth)
    }

    /// Largest level `n` with `ln(1/ρ(n)) ≤ depth` (up to [`LEVEL_TOL`]).
    pub fn level_at_depth(&self, depth: f64) -> Result<u64, Error> {
        let t = depth + LEVEL_TOL * depth.abs().max(1.0);
        if t < 0.0 {
            return Ok(0);
        }
        let nb = self.blocks.len();
        let b = self.start_depth.partition_point(|&d| d <= t);
        if b <= nb {
            let b = b - 1;
            let step = -math::ln(self.blocks[b].ratio);
            let k = math::floor((t - self.start_depth[b]) / step) as u64;
            return Ok(self.start_level[b] + k.min(self.blocks[b].len));
        }
        let end = self.start_depth[nb];
        match self.tail {
            Some(r) => Ok(self.block_levels() + math::floor((t - end) / -math::ln(r)) as u64),
            None if t < end + LEVEL_TOL * end.max(1.0) => Ok(self.block_levels()),
            None => Err(Error::Unsupported(format!(
                "depth {depth} lies below the {} levels of a finite schedule",
                self.block_levels()
            ))),
        }
    }

    /// `l(R)`: the level with `ρ(l+1) < R ≤ ρ(l)`.
    pub fn l_of_r(&self, r: Scale) -> Result<u64, Error> {
        let d1 = self.depth(1)?;
        if !r.depth().is_finite() || r.depth() < d1 - LEVEL_TOL * d1.max(1.0) {
            return Err(Error::Domain { scale: r.to_string(), max: self.scale(1)?.to_string() });
        }
        self.level_at_depth(r.depth())
    }

    /// `l(R)` and `l_φ(R)` for a given value `φ(R)`.
    pub fn window_at(&self, r: Scale, phi_value: f64) -> Result<WindowLevels, Error> {
        let l = self.l_of_r(r)?;
        let m = self.level_at_depth((1.0 + phi_value) * r.depth())?;
        let l_phi = m.saturating_sub(l);
        Ok(WindowLevels { l, l_phi, degenerate: l_phi == 0 })
    }

    /// Boxes of the level-`n` cylinders, refusing more than `budget` boxes.
    pub fn level_set(&self, n: u64, budget: u64) -> Result<LevelApproximation, Error> {
        let needed = 1u128 << (self.dim as u128 * n as u128).min(127);
        if needed > budget as u128 {
            return Err(Error::Budget { what: "level-set boxes", needed, budget: budget as u128 });
        }
        let d = self.dim as usize;
        let mut corners: Vec<[f64; 2]> = alloc::vec![[0.0, 0.0]];
        for k in 1..=n {
            let parent = math::exp(-self.depth(k - 1)?);
            let child = math::exp(-self.depth(k)?);
            let off = parent - child;
            let mut next = Vec::with_capacity(corners.len() << d);
            for c in &corners {
                if d == 1 {
                    next.push(*c);
                    next.push([c[0] + off, 0.0]);
                } else {
                    for (i, j) in [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)] {
                        next.push([c[0] + i * off, c[1] + j * off]);
                    }
                }
            }
            corners = next;
        }
        let side = math::exp(-self.depth(n)?);
        let boxes = corners
            .into_iter()
            .map(|c| {
                let mut hi = [c[0] + side, 0.0];
                if d == 2 {
                    hi[1] = c[1] + side;
                }
                Aabb::new(c, hi)
            })
            .collect();
        Ok(LevelApproximation { level: n, dim: self.dim, side, boxes })
    }
}

/// Level indices around a scale.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WindowLevels {
    pub l: u64,
    pub l_phi: u64,
    /// `l_φ = 0`: the small scale sits inside the level of `R` itself.
    pub degenerate: bool,
}

/// The level-`n` cylinders of a Moran set.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelApproximation {
    pub level: u64,
    pub dim: u8,
    pub side: f64,
    pub boxes: Vec<Aabb>,
}

impl LevelApproximation {
    pub fn count(&self) -> usize {
        self.boxes.len()
    }

    pub fn to_geom_set(&self) -> GeomSet {
        GeomSet::boxes(self.dim, self.boxes.clone()).expect("level sets are non-empty")
    }
}

/// `ln ρ(n)`.
pub fn rho(spec: &MoranSpec, n: u64) -> Result<f64, Error> {
    spec.depth(n).map(|d| -d)
}

/// See [`MoranSpec::level_set`].
pub fn level_set(spec: &MoranSpec, n: u64, budget: u64) -> Result<LevelApproximation, Error> {
    spec.level_set(n, budget)
}

/// `l(R)`.
pub fn l_of_r(spec: &MoranSpec, r: Scale) -> Result<u64, Error> {
    spec.l_of_r(r)
}

/// `l(R)` and `l_φ(R)`.
pub fn l_phi_of_r(spec: &MoranSpec, phi: &DimensionFunction, r: Scale) -> Result<WindowLevels, Error> {
    spec.window_at(r, phi.eval(r)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dimfunc::constant_df;
    use core::f64::consts::LN_2;

    fn s(r: f64) -> Scale {
        Scale::from_radius(r).unwrap()
    }

    #[test]
    fn rho_values() {
        let half = MoranSpec::constant(1, 0.5).unwrap();
        assert!(math::close(rho(&half, 10).unwrap(), -10.0 * LN_2, 1e-15));
        assert_eq!(rho(&half, 0).unwrap(), 0.0);
        let third = MoranSpec::constant(1, 1.0 / 3.0).unwrap();
        assert!(math::close(rho(&third, 4).unwrap(), -4.0 * math::ln(3.0), 1e-15));
    }

    #[test]
    fn explicit_schedule_lookup() {
        let spec = MoranSpec::explicit(1, &[0.5, 0.25, 0.25, 0.5], None).unwrap();
        assert_eq!(spec.blocks().len(), 3);
        assert_eq!(spec.ratio(1).unwrap(), 0.5);
        assert_eq!(spec.ratio(2).unwrap(), 0.25);
        assert_eq!(spec.ratio(3).unwrap(), 0.25);
        assert_eq!(spec.ratio(4).unwrap(), 0.5);
        assert!(spec.ratio(5).is_err());
        assert!(math::close(spec.depth(4).unwrap(), 6.0 * LN_2, 1e-15));
        assert!(spec.depth(5).is_err());
        assert_eq!(spec.level_at_depth(3.5 * LN_2).unwrap(), 2);
        assert!(MoranSpec::explicit(1, &[0.6], None).is_err());
        assert!(MoranSpec::constant(3, 0.5).is_err());
    }

    #[test]
    fn level_indices() {
        let half = MoranSpec::constant(1, 0.5).unwrap();
        assert_eq!(half.l_of_r(s(0.3)).unwrap(), 1);
        assert_eq!(half.l_of_r(s(0.25)).unwrap(), 2);
        assert!(half.l_of_r(s(0.7)).is_err());
        let third = MoranSpec::constant(1, 1.0 / 3.0).unwrap();
        assert_eq!(third.l_of_r(s(1.0 / 3.0)).unwrap(), 1);
        let one = constant_df(1.0).unwrap();
        let w = l_phi_of_r(&half, &one, s(1.0 / 16.0)).unwrap();
        assert_eq!((w.l, w.l_phi), (4, 4));
        let w = l_phi_of_r(&half, &one, s(0.3)).unwrap();
        assert_eq!((w.l, w.l_phi), (1, 2));
        let tiny = constant_df(1e-3).unwrap();
        let w = l_phi_of_r(&half, &tiny, s(0.3)).unwrap();
        assert!(w.degenerate && w.l_phi == 0);
    }

    #[test]
    fn level_sets() {
        let half = MoranSpec::constant(1, 0.5).unwrap();
        let ls = half.level_set(2, DEFAULT_BOX_BUDGET).unwrap();
        let got: Vec<(f64, f64)> = ls.boxes.iter().map(|b| (b.lo[0], b.hi[0])).collect();
        assert_eq!(got, [(0.0, 0.25), (0.25, 0.5), (0.5, 0.75), (0.75, 1.0)]);
        let third = MoranSpec::constant(1, 1.0 / 3.0).unwrap();
        let ls = third.level_set(1, DEFAULT_BOX_BUDGET).unwrap();
        assert!(math::close(ls.boxes[0].hi[0], 1.0 / 3.0, 1e-15));
        assert!(math::close(ls.boxes[1].lo[0], 2.0 / 3.0, 1e-15));
        assert!(math::close(ls.boxes[1].hi[0], 1.0, 1e-15));
        let sq = MoranSpec::constant(2, 1.0 / 3.0).unwrap().level_set(1, DEFAULT_BOX_BUDGET).unwrap();
        assert_eq!(sq.count(), 4);
        let mut lows: Vec<(f64, f64)> = sq.boxes.iter().map(|b| (b.lo[0], b.lo[1])).collect();
        lows.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let t = 2.0 / 3.0;
        let want = [(0.0, 0.0), (0.0, t), (t, 0.0), (t, t)];
        for (g, w) in lows.iter().zip(want) {
            assert!(math::close(g.0, w.0, 1e-15) && math::close(g.1, w.1, 1e-15));
        }
        let err = half.level_set(23, DEFAULT_BOX_BUDGET).unwrap_err();
        assert!(err.is_budget());
    }
}
