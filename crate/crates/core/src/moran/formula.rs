use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::LN_2;

use super::MoranSpec;
use crate::dimfunc::DimensionFunction;
use crate::{Error, Scale};

/// Which levels `n` (scales `R = ρ(n)`) enter the trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LevelSelection {
    /// Every level in `from..=to`.
    Range { from: u64, to: u64 },
    /// The recorded checkpoint levels, skipping the first `skip`.
    Checkpoints { skip: usize },
}

/// One term `l_φ·ln 2 / ln(ρ(n)/ρ(n+l_φ))` of the dimension formula.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FormulaTerm {
    pub level: u64,
    pub scale: Scale,
    pub phi: f64,
    pub l_phi: u64,
    /// `ln(ρ(n)/ρ(n+l_φ))`.
    pub window_depth: f64,
    /// `None` when the window is degenerate (`l_φ = 0`).
    pub quotient: Option<f64>,
    /// Index into the schedule's checkpoints, when the level is one.
    pub checkpoint: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FormulaReport {
    pub terms: Vec<FormulaTerm>,
    /// Running minimum of the defined quotients, one entry per term.
    pub running_min: Vec<Option<f64>>,
    /// Final running minimum.
    pub value: Option<f64>,
    /// Index of the term attaining `value`.
    pub argmin: Option<usize>,
    /// `2/l_φ` at the attaining term: shifting one block boundary by a
    /// level moves the quotient by about this much.
    pub discretization: f64,
    pub r_star: f64,
}

/// Evaluate the exact Moran dimension formula on the selected levels.
pub fn formula_dimension(
    spec: &MoranSpec,
    phi: &DimensionFunction,
    select: LevelSelection,
) -> Result<FormulaReport, Error> {
    if spec.dim() != 1 {
        return Err(Error::Unsupported(format!("the dimension formula needs d = 1, got d = {}", spec.dim())));
    }
    let r_star = spec.r_star();
    if !(r_star > 0.0) {
        return Err(Error::param("ratios", "r_* must be positive"));
    }
    let levels: Vec<(u64, Option<usize>)> = match select {
        LevelSelection::Range { from, to } => {
            if from == 0 || to < from {
                return Err(Error::param("levels", format!("invalid level range {from}..={to}")));
            }
            (from..=to).map(|n| (n, spec.checkpoints().iter().position(|c| c.level == n))).collect()
        }
        LevelSelection::Checkpoints { skip } => {
            if spec.checkpoints().len() <= skip {
                return Err(Error::param("checkpoints", "no checkpoints left after the burn-in"));
            }
            spec.checkpoints().iter().enumerate().skip(skip).map(|(i, c)| (c.level, Some(i))).collect()
        }
    };
    let mut terms = Vec::with_capacity(levels.len());
    for (n, checkpoint) in levels {
        let d = spec.depth(n)?;
        let scale = Scale::from_depth(d);
        let p = phi.eval(scale)?;
        let l_phi = spec.level_at_depth((1.0 + p) * d)?.saturating_sub(n);
        let window_depth = spec.depth(n + l_phi)? - d;
        let quotient = (l_phi > 0).then(|| l_phi as f64 * LN_2 / window_depth);
        terms.push(FormulaTerm { level: n, scale, phi: p, l_phi, window_depth, quotient, checkpoint });
    }
    let mut running_min = Vec::with_capacity(terms.len());
    let (mut best, mut argmin) = (None::<f64>, None);
    for (i, t) in terms.iter().enumerate() {
        if let Some(q) = t.quotient {
            if best.is_none_or(|b| q < b) {
                best = Some(q);
                argmin = Some(i);
            }
        }
        running_min.push(best);
    }
    let discretization = argmin.map_or(1.0, |i| 2.0 / terms[i].l_phi as f64);
    Ok(FormulaReport { terms, running_min, value: best, argmin, discretization, r_star })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dimfunc::constant_df;
    use crate::math;

    #[test]
    fn half_schedule_is_the_interval() {
        let spec = MoranSpec::constant(1, 0.5).unwrap();
        for theta in [0.5, 1.0, 2.0] {
            let rep = formula_dimension(&spec, &constant_df(theta).unwrap(), LevelSelection::Range { from: 1, to: 60 })
                .unwrap();
            assert!(rep.terms.iter().filter_map(|t| t.quotient).all(|q| math::close(q, 1.0, 1e-12)));
            assert!(math::close(rep.value.unwrap(), 1.0, 1e-12));
        }
    }

    #[test]
    fn thirds_converge_to_log2_log3() {
        let spec = MoranSpec::constant(1, 1.0 / 3.0).unwrap();
        let rep =
            formula_dimension(&spec, &constant_df(1.0).unwrap(), LevelSelection::Range { from: 20, to: 40 }).unwrap();
        let target = math::ln(2.0) / math::ln(3.0);
        for t in &rep.terms {
            assert_eq!(t.l_phi, t.level);
            assert!(math::close(t.quotient.unwrap(), target, 1e-12));
        }
    }

    #[test]
    fn two_dimensional_specs_are_refused() {
        let spec = MoranSpec::constant(2, 0.5).unwrap();
        let err = formula_dimension(&spec, &constant_df(1.0).unwrap(), LevelSelection::Range { from: 1, to: 3 });
        assert!(matches!(err, Err(Error::Unsupported(_))));
    }
}
