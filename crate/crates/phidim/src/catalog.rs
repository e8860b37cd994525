//! The experiment kinds, their parameters, and the result each reproduces.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    MoranFormula,
    MoranEstimate,
    DimfuncCheck,
    Variational,
    RateWindow,
    EquivalenceGap,
    Popcorn,
    ReproduceExample1,
    ReproduceExample2,
}

impl Kind {
    pub const ALL: [Kind; 9] = [
        Kind::MoranFormula,
        Kind::MoranEstimate,
        Kind::DimfuncCheck,
        Kind::Variational,
        Kind::RateWindow,
        Kind::EquivalenceGap,
        Kind::Popcorn,
        Kind::ReproduceExample1,
        Kind::ReproduceExample2,
    ];

    pub fn name(self) -> &'static str {
        entry(self).name
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Entry {
    pub kind: Kind,
    pub name: &'static str,
    /// The result this kind reproduces.
    pub anchor: &'static str,
    pub summary: &'static str,
    pub required: &'static [&'static str],
    pub optional: &'static [&'static str],
}

/// Every field of [`crate::config::Params`].
pub const ALL_PARAMS: &[&str] = &[
    "spec",
    "phi",
    "psi",
    "alpha",
    "checkpoints",
    "alphas",
    "levels",
    "skip",
    "from_checkpoint",
    "grid",
    "estimators",
    "quasi_fractions",
    "windowed_fractions",
    "expect",
    "set",
    "gap_alpha",
    "doubling",
    "doubling_c",
    "random_scales",
    "t",
    "q_max",
    "point_budget",
    "radii",
    "write_points",
];

pub const CATALOG: [Entry; 9] = [
    Entry {
        kind: Kind::MoranFormula,
        name: "moran-formula",
        anchor: "Moran dimension formula: liminf of l_φ·log 2 / log(ρ(n)/ρ(n+l_φ))",
        summary: "exact formula trace of a homogeneous Moran schedule",
        required: &["spec", "phi"],
        optional: &["levels", "expect", "alpha", "checkpoints", "psi"],
    },
    Entry {
        kind: Kind::MoranEstimate,
        name: "moran-estimate",
        anchor: "φ-lower, quasi-φ-lower and windowed definitions on a Moran set",
        summary: "covering-number estimates on a Moran schedule",
        required: &["spec", "phi", "grid"],
        optional: &["estimators", "quasi_fractions", "windowed_fractions", "expect", "alpha", "checkpoints", "psi"],
    },
    Entry {
        kind: Kind::DimfuncCheck,
        name: "dimfunc-check",
        anchor: "dimension-function axioms and the doubling sandwich of R^{-φ(R)}",
        summary: "grid check of the monotone-decrease and growth axioms",
        required: &["phi"],
        optional: &["grid", "random_scales", "doubling_c"],
    },
    Entry {
        kind: Kind::Variational,
        name: "variational",
        anchor: "variational principle: quasi dimension as inf over α in (0,1) of dim_L^{φ/α}",
        summary: "α-scan of rate windows against the quasi estimate",
        required: &[],
        optional: &["spec", "alpha", "checkpoints", "phi", "alphas", "levels", "grid", "windowed_fractions"],
    },
    Entry {
        kind: Kind::RateWindow,
        name: "rate-window",
        anchor: "rate-window bounds: φ(α)/α monotone and the pair lower bound",
        summary: "α-scan of rate windows with monotonicity and pair checks",
        required: &[],
        optional: &["spec", "alpha", "checkpoints", "phi", "alphas", "levels"],
    },
    Entry {
        kind: Kind::EquivalenceGap,
        name: "equivalence-gap",
        anchor: "gap bound ε(1 + 2 log₂ C + ε) for nearby dimension functions",
        summary: "estimate gap between φ and ψ against the doubling bound",
        required: &[],
        optional: &["set", "phi", "psi", "gap_alpha", "grid", "doubling"],
    },
    Entry {
        kind: Kind::Popcorn,
        name: "popcorn",
        anchor: "popcorn graph: isolated-point collapse and box dimension 4/(2+t)",
        summary: "popcorn sample, collapse witness, baseline estimate and box trace",
        required: &["t", "q_max"],
        optional: &["phi", "point_budget", "grid", "radii", "write_points"],
    },
    Entry {
        kind: Kind::ReproduceExample1,
        name: "reproduce-example1",
        anchor: "block schedule with dim_L^φ < dim_L^ψ for φ < ψ",
        summary: "checkpoint traces under φ and ψ on the first block schedule",
        required: &[],
        optional: &["alpha", "checkpoints", "phi", "psi", "from_checkpoint"],
    },
    Entry {
        kind: Kind::ReproduceExample2,
        name: "reproduce-example2",
        anchor: "block schedule with (α+2)/(3α) = dim_L^ψ < dim_L^φ = (α+1)/(2α), ψ = 3φ/2",
        summary: "checkpoint traces under φ and 3φ/2 on the second block schedule",
        required: &[],
        optional: &["alpha", "checkpoints", "phi", "skip"],
    },
];

pub fn entry(kind: Kind) -> &'static Entry {
    CATALOG.iter().find(|e| e.kind == kind).expect("every kind is catalogued")
}
