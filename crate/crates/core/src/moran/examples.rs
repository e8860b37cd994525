//! The two block-schedule constructions that separate `dim_L^φ` from
//! `dim_L^ψ` in opposite directions.
//!
//! Checkpoints are chosen greedily: `R_{n+1}` is the first cylinder scale at
//! or below `min{R_n^{1+ψ(R_n)}/16, R_n^{2n}}/2`. Block lengths come from the
//! window sandwich at `R_n`. When integer rounding makes a block length
//! disagree with the window recomputed from the finished schedule, the
//! checkpoint is moved down by whole `1/2`-levels until they agree.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::LN_2;

use super::{CheckpointRecord, MoranSpec, RatioBlock, ScheduleKind};
use crate::dimfunc::DimensionFunction;
use crate::math;
use crate::{Error, Scale};

/// Parameters shared by both constructions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExampleParams {
    /// Block ratio exponent: blocks use `r = 2^{-α}`.
    pub alpha: f64,
    /// `R_1 = r_1`, so `l(R_1) = 1`. Must not exceed 1/2.
    pub first_scale: Scale,
    /// Number of checkpoints to place.
    pub checkpoints: usize,
    /// Refuse schedules with more levels than this.
    pub max_levels: u64,
    /// How many extra `1/2`-levels may be tried to make a checkpoint exact.
    pub snap_limit: u32,
}

impl Default for ExampleParams {
    fn default() -> Self {
        ExampleParams {
            alpha: 2.0,
            first_scale: Scale::from_depth(8.0 * LN_2),
            checkpoints: 6,
            max_levels: 50_000_000,
            snap_limit: 256,
        }
    }
}

impl ExampleParams {
    fn validate(&self) -> Result<(), Error> {
        if !(self.alpha.is_finite() && self.alpha > 1.0) {
            return Err(Error::param("alpha", "must exceed 1"));
        }
        let r1 = self.first_scale.radius();
        if !(r1 > 0.0 && r1 <= 0.5) {
            return Err(Error::param("first_scale", "must lie in (0, 1/2]"));
        }
        if self.checkpoints == 0 {
            return Err(Error::param("checkpoints", "need at least one checkpoint"));
        }
        if self.max_levels == 0 {
            return Err(Error::param("max_levels", "must be positive"));
        }
        Ok(())
    }
}

/// One planned block after a checkpoint, and the window it must realise.
struct Plan {
    blocks: Vec<RatioBlock>,
    /// `(φ-value, expected l_φ)` pairs to verify on the built schedule.
    windows: Vec<(f64, u64)>,
}

fn floor_div(x: f64, step: f64) -> u64 {
    math::floor(x / step + 1e-12 * (x / step).abs().max(1.0)).max(0.0) as u64
}

struct Builder {
    blocks: Vec<RatioBlock>,
    level: u64,
    depth: f64,
    max_levels: u64,
}

impl Builder {
    fn push(&mut self, ratio: f64, len: u64) -> Result<(), Error> {
        if len == 0 {
            return Ok(());
        }
        let level = self.level + len;
        if level > self.max_levels {
            return Err(Error::Budget {
                what: "schedule levels",
                needed: level as u128,
                budget: self.max_levels as u128,
            });
        }
        self.blocks.push(RatioBlock { ratio, len });
        self.level = level;
        self.depth += len as f64 * -math::ln(ratio);
        Ok(())
    }

    /// Whether the planned blocks, followed by `1/2`-levels, realise every
    /// expected window at the checkpoint `level + extra`.
    fn consistent(&self, extra: u64, plan: &Plan) -> Result<bool, Error> {
        let mut blocks = self.blocks.clone();
        blocks.push(RatioBlock { ratio: 0.5, len: extra });
        blocks.extend(plan.blocks.iter().copied());
        let spec = MoranSpec::from_blocks(1, ScheduleKind::Explicit, blocks, Some(0.5), Vec::new())?;
        let at = spec.scale(self.level + extra)?;
        for &(v, want) in &plan.windows {
            if spec.window_at(at, v)?.l_phi != want {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn build<F>(
    kind: ScheduleKind,
    params: &ExampleParams,
    psi: &DimensionFunction,
    mut plan_at: F,
) -> Result<MoranSpec, Error>
where
    F: FnMut(usize, Scale) -> Result<Plan, Error>,
{
    params.validate()?;
    let mut b = Builder { blocks: Vec::new(), level: 0, depth: 0.0, max_levels: params.max_levels };
    b.push(params.first_scale.radius(), 1)?;
    let mut records = Vec::with_capacity(params.checkpoints);
    for n in 1..=params.checkpoints {
        let tries = if n == 1 { 0 } else { params.snap_limit };
        let mut chosen = None;
        for extra in 0..=tries as u64 {
            let at = Scale::from_depth(b.depth + extra as f64 * LN_2);
            let plan = plan_at(n, at)?;
            if b.consistent(extra, &plan)? {
                chosen = Some((extra, plan, true));
                break;
            }
            if chosen.is_none() {
                chosen = Some((extra, plan, false));
            }
        }
        let (extra, plan, exact) = chosen.expect("at least one attempt");
        let (extra, plan) = if exact { (extra, plan) } else { (0, plan_at(n, Scale::from_depth(b.depth))?) };
        b.push(0.5, extra)?;
        let at = Scale::from_depth(b.depth);
        let psi_v = psi.eval(at)?;
        records.push(CheckpointRecord {
            level: b.level,
            scale: at,
            blocks: plan.blocks.iter().map(|x| x.len).collect(),
            exact,
        });
        for blk in &plan.blocks {
            b.push(blk.ratio, blk.len)?;
        }
        if n == params.checkpoints {
            break;
        }
        let d = at.depth();
        let target = f64::max((1.0 + psi_v) * d + math::ln(16.0), 2.0 * n as f64 * d) + LN_2;
        let fill = math::ceil((target - b.depth) / LN_2).max(1.0) as u64;
        b.push(0.5, fill)?;
    }
    let mut spec = MoranSpec::from_blocks(1, kind, b.blocks, Some(0.5), Vec::new())?;
    for r in &mut records {
        r.scale = spec.scale(r.level)?;
    }
    spec.checkpoints = records;
    Ok(spec)
}

/// Schedule on which `dim_L^φ = 1/α` while `dim_L^ψ > 1/α`: after each
/// checkpoint `R_n`, `l_φ(R_n)` levels of ratio `2^{-α}` followed by
/// `1/2`-levels down to `R_{n+1}`.
///
/// Requires `φ(R_n)/ψ(R_n) < 1` at every checkpoint.
pub fn example1_spec(
    params: &ExampleParams,
    phi: &DimensionFunction,
    psi: &DimensionFunction,
) -> Result<MoranSpec, Error> {
    let a = params.alpha * LN_2;
    let ra = math::pow(2.0, -params.alpha);
    build(ScheduleKind::Example1 { alpha: params.alpha }, params, psi, |n, at| {
        let (p, q) = (phi.eval(at)?, psi.eval(at)?);
        if !(p < q) {
            return Err(Error::param("phi", format!("φ/ψ = {} is not below 1 at checkpoint {n}", p / q)));
        }
        let k = floor_div(p * at.depth(), a);
        Ok(Plan { blocks: alloc::vec![RatioBlock { ratio: ra, len: k }], windows: alloc::vec![(p, k)] })
    })
}

/// Schedule on which `dim_L^φ = (α+1)/(2α)` exceeds `dim_L^ψ = (α+2)/(3α)`
/// for `ψ = 3φ/2`: after each checkpoint, blocks of ratios `2^{-α}`, `1/2`,
/// `2^{-α}`, `1/2` ending at `l_{φ/2}`, `l_φ`, `l_ψ` and `l(R_{n+1})`.
pub fn example2_spec(params: &ExampleParams, phi: &DimensionFunction) -> Result<MoranSpec, Error> {
    let psi = phi.rate_window(2.0 / 3.0)?;
    let a = params.alpha * LN_2;
    let ra = math::pow(2.0, -params.alpha);
    build(ScheduleKind::Example2 { alpha: params.alpha }, params, &psi.clone(), |_, at| {
        let d = at.depth();
        let p = phi.eval(at)?;
        let q = psi.eval(at)?;
        let k1 = floor_div(0.5 * p * d, a);
        let k2 = floor_div(p * d - k1 as f64 * a, LN_2);
        let k3 = floor_div(q * d - k1 as f64 * a - k2 as f64 * LN_2, a);
        Ok(Plan {
            blocks: alloc::vec![
                RatioBlock { ratio: ra, len: k1 },
                RatioBlock { ratio: 0.5, len: k2 },
                RatioBlock { ratio: ra, len: k3 },
            ],
            windows: alloc::vec![(0.5 * p, k1), (p, k1 + k2), (q, k1 + k2 + k3)],
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dimfunc::constant_df;

    #[test]
    fn example1_blocks_match_windows() {
        let phi = constant_df(0.5).unwrap();
        let psi = constant_df(1.0).unwrap();
        let spec = example1_spec(&ExampleParams::default(), &phi, &psi).unwrap();
        assert_eq!(spec.checkpoints().len(), 6);
        for (n, cp) in spec.checkpoints().iter().enumerate() {
            let w = spec.window_at(cp.scale, 0.5).unwrap();
            assert_eq!(w.l, cp.level);
            if cp.exact {
                assert_eq!(w.l_phi, cp.blocks[0], "checkpoint {}", n + 1);
            }
            if let Some(next) = spec.checkpoints().get(n + 1) {
                let d = cp.scale.depth();
                let bound = f64::min(2.0 * d + math::ln(16.0), 2.0 * (n + 1) as f64 * d);
                assert!(next.scale.depth() > bound);
            }
        }
        assert!(spec.checkpoints()[1..].iter().all(|c| c.exact));
    }

    #[test]
    fn example1_rejects_dominated_pairs() {
        let phi = constant_df(1.0).unwrap();
        let err = example1_spec(&ExampleParams::default(), &phi, &phi).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { name: "phi", .. }));
    }

    #[test]
    fn budget_is_enforced() {
        let phi = constant_df(0.5).unwrap();
        let params = ExampleParams { max_levels: 100, ..ExampleParams::default() };
        assert!(example2_spec(&params, &phi).unwrap_err().is_budget());
    }

    #[test]
    fn parameters_are_validated() {
        let phi = constant_df(0.5).unwrap();
        for params in [
            ExampleParams { alpha: 1.0, ..ExampleParams::default() },
            ExampleParams { first_scale: Scale::from_radius(0.75).unwrap(), ..ExampleParams::default() },
            ExampleParams { checkpoints: 0, ..ExampleParams::default() },
        ] {
            assert!(example2_spec(&params, &phi).is_err());
        }
    }
}
