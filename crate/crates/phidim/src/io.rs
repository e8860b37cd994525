//! File formats: JSON documents for dimension functions and Moran
//! schedules, CSV tables with a `#`-prefixed provenance header.
//!
//! Scales are written as decimal strings. A table body parsed back and
//! written again is byte-identical to the original.

use std::fmt;
use std::str::FromStr;

use phidim_core::dimfunc::{DimensionFunction, Piece, PieceKind, Staircase, Tail};
use phidim_core::estimator::EstimateReport;
use phidim_core::moran::{CheckpointRecord, MoranSpec, RatioBlock, ScheduleKind};
use phidim_core::{Count, Scale};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("bad scale literal `{0}`")]
    Scale(String),
    #[error("bad count literal `{0}`")]
    Count(String),
    #[error(transparent)]
    Core(#[from] phidim_core::Error),
    #[error("{0}")]
    Schema(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// A [`Scale`] that (de)serializes as its decimal string.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct ScaleCell(pub Scale);

impl fmt::Display for ScaleCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for ScaleCell {
    type Err = FormatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_scale(s).map(ScaleCell)
    }
}

/// Decimal radius, or `2^-k` for dyadic scales of any depth.
pub fn parse_scale(s: &str) -> Result<Scale, FormatError> {
    let t = s.trim();
    if let Some(k) = t.strip_prefix("2^-") {
        let k: f64 = k.parse().map_err(|_| FormatError::Scale(s.into()))?;
        if k.is_finite() && k >= 0.0 {
            return Ok(Scale::from_depth(k * std::f64::consts::LN_2));
        }
        return Err(FormatError::Scale(s.into()));
    }
    t.parse().map_err(|_| FormatError::Scale(s.into()))
}

impl Serialize for ScaleCell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for ScaleCell {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A [`Count`]: the integer when exact, else `e^<ln>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CountCell(pub Count);

impl fmt::Display for CountCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.exact() {
            Some(n) => write!(f, "{n}"),
            None => write!(f, "e^{}", self.0.ln()),
        }
    }
}

impl FromStr for CountCell {
    type Err = FormatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(ln) = s.strip_prefix("e^") {
            let ln: f64 = ln.parse().map_err(|_| FormatError::Count(s.into()))?;
            return Ok(CountCell(Count::from_ln(ln)));
        }
        s.parse::<u64>().map(|n| CountCell(Count::from_u64(n))).map_err(|_| FormatError::Count(s.into()))
    }
}

impl Serialize for CountCell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CountCell {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

// ---- dimension functions ----

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PieceShape {
    #[serde(rename = "const")]
    Const,
    #[serde(rename = "logrec")]
    LogRec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceDoc {
    pub r_lo: ScaleCell,
    pub r_hi: ScaleCell,
    pub kind: PieceShape,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TailDoc {
    Const { value: f64 },
    Staircase { growth: f64, theta: f64, decay: f64 },
}

/// JSON form of a [`DimensionFunction`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimfuncDoc {
    /// Defaults to the first piece's `r_hi`, or 1 without pieces.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<ScaleCell>,
    #[serde(default)]
    pub pieces: Vec<PieceDoc>,
    pub tail: TailDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sup_bound: Option<f64>,
}

impl DimfuncDoc {
    pub fn from_function(phi: &DimensionFunction) -> DimfuncDoc {
        let pieces = phi
            .pieces()
            .iter()
            .map(|p| {
                let (kind, value) = match p.kind {
                    PieceKind::Constant(v) => (PieceShape::Const, v),
                    PieceKind::LogReciprocal(v) => (PieceShape::LogRec, v),
                };
                PieceDoc { r_lo: ScaleCell(p.lower), r_hi: ScaleCell(p.upper), kind, value }
            })
            .collect();
        let tail = match phi.tail() {
            Tail::Constant(value) => TailDoc::Const { value },
            Tail::Staircase(s) => TailDoc::Staircase { growth: s.growth, theta: s.theta, decay: s.decay },
        };
        DimfuncDoc { r_max: Some(ScaleCell(phi.r_max())), pieces, tail, sup_bound: Some(phi.sup_bound()) }
    }

    pub fn to_function(&self) -> Result<DimensionFunction, FormatError> {
        let r_max = match (self.r_max, self.pieces.first()) {
            (Some(r), _) => r.0,
            (None, Some(p)) => p.r_hi.0,
            (None, None) => Scale::ONE,
        };
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let kind = match p.kind {
                    PieceShape::Const => PieceKind::Constant(p.value),
                    PieceShape::LogRec => PieceKind::LogReciprocal(p.value),
                };
                Piece::new(p.r_lo.0, p.r_hi.0, kind)
            })
            .collect();
        let tail = match self.tail {
            TailDoc::Const { value } => Tail::Constant(value),
            TailDoc::Staircase { growth, theta, decay } => Tail::Staircase(Staircase { growth, theta, decay }),
        };
        Ok(DimensionFunction::new(r_max, pieces, tail, self.sup_bound)?)
    }
}

pub fn dimfunc_to_json(phi: &DimensionFunction) -> String {
    serde_json::to_string_pretty(&DimfuncDoc::from_function(phi)).expect("plain data serializes")
}

pub fn dimfunc_from_json(s: &str) -> Result<DimensionFunction, FormatError> {
    serde_json::from_str::<DimfuncDoc>(s)?.to_function()
}

// ---- Moran schedules ----

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockDoc {
    pub ratio: f64,
    pub len: u64,
}

/// Generation parameters of the example schedules.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<usize>,
    /// Ratio of a constant schedule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleName {
    Constant,
    Explicit,
    Example1,
    Example2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleDoc {
    pub kind: ScheduleName,
    #[serde(default, skip_serializing_if = "is_default")]
    pub params: ScheduleParams,
    /// Run-length ratio blocks.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub blocks: Vec<BlockDoc>,
    /// Single levels, read before `blocks`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ratios_prefix: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<f64>,
}

fn is_default(p: &ScheduleParams) -> bool {
    *p == ScheduleParams::default()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointDoc {
    pub level: u64,
    pub scale: ScaleCell,
    pub blocks: Vec<u64>,
    pub exact: bool,
}

/// JSON form of a [`MoranSpec`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoranDoc {
    pub d: u8,
    pub schedule: ScheduleDoc,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checkpoints: Vec<CheckpointDoc>,
}

impl MoranDoc {
    pub fn from_spec(spec: &MoranSpec) -> MoranDoc {
        let (kind, alpha) = match spec.kind() {
            ScheduleKind::Constant => (ScheduleName::Constant, None),
            ScheduleKind::Explicit => (ScheduleName::Explicit, None),
            ScheduleKind::Example1 { alpha } => (ScheduleName::Example1, Some(alpha)),
            ScheduleKind::Example2 { alpha } => (ScheduleName::Example2, Some(alpha)),
        };
        let checkpoints: Vec<CheckpointDoc> = spec
            .checkpoints()
            .iter()
            .map(|c| CheckpointDoc {
                level: c.level,
                scale: ScaleCell(c.scale),
                blocks: c.blocks.clone(),
                exact: c.exact,
            })
            .collect();
        let params = ScheduleParams { alpha, checkpoints: alpha.map(|_| checkpoints.len()), r: None };
        MoranDoc {
            d: spec.dim(),
            schedule: ScheduleDoc {
                kind,
                params,
                blocks: spec.blocks().iter().map(|b| BlockDoc { ratio: b.ratio, len: b.len }).collect(),
                ratios_prefix: Vec::new(),
                tail: spec.tail(),
            },
            checkpoints,
        }
    }

    /// Whether the document lists its ratios, as opposed to asking for a
    /// generated example schedule.
    pub fn is_materialized(&self) -> bool {
        let s = &self.schedule;
        !s.blocks.is_empty() || !s.ratios_prefix.is_empty() || s.tail.is_some() || s.params.r.is_some()
    }

    pub fn to_spec(&self) -> Result<MoranSpec, FormatError> {
        let s = &self.schedule;
        let alpha = || s.params.alpha.ok_or_else(|| FormatError::Schema("example schedules need params.alpha".into()));
        let kind = match s.kind {
            ScheduleName::Constant => ScheduleKind::Constant,
            ScheduleName::Explicit => ScheduleKind::Explicit,
            ScheduleName::Example1 => ScheduleKind::Example1 { alpha: alpha()? },
            ScheduleName::Example2 => ScheduleKind::Example2 { alpha: alpha()? },
        };
        if !self.is_materialized() {
            return Err(FormatError::Schema(format!(
                "schedule `{}` lists no ratios; example schedules are generated by an experiment",
                kind.name()
            )));
        }
        let mut blocks: Vec<RatioBlock> = s.ratios_prefix.iter().map(|&ratio| RatioBlock { ratio, len: 1 }).collect();
        blocks.extend(s.blocks.iter().map(|b| RatioBlock { ratio: b.ratio, len: b.len }));
        let tail = match (s.tail, s.params.r) {
            (Some(a), Some(b)) if a != b => return Err(FormatError::Schema("`tail` and `params.r` disagree".into())),
            (t, r) => t.or(r),
        };
        let checkpoints = self
            .checkpoints
            .iter()
            .map(|c| CheckpointRecord { level: c.level, scale: c.scale.0, blocks: c.blocks.clone(), exact: c.exact })
            .collect();
        Ok(MoranSpec::from_blocks(self.d, kind, blocks, tail, checkpoints)?)
    }
}

pub fn moran_to_json(spec: &MoranSpec) -> String {
    serde_json::to_string_pretty(&MoranDoc::from_spec(spec)).expect("plain data serializes")
}

pub fn moran_from_json(s: &str) -> Result<MoranSpec, FormatError> {
    serde_json::from_str::<MoranDoc>(s)?.to_spec()
}

// ---- tables ----

/// Provenance lines written above every table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Header {
    pub tool: String,
    pub version: String,
    pub core_version: String,
    pub kind: String,
    pub config_sha256: String,
    pub seed: u64,
}

impl Header {
    pub fn new(kind: &str, config_sha256: &str, seed: u64) -> Header {
        Header {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            core_version: phidim_core::VERSION.into(),
            kind: kind.into(),
            config_sha256: config_sha256.into(),
            seed,
        }
    }

    pub fn lines(&self) -> String {
        format!(
            "# {} {} (core {})\n# kind {}\n# config-sha256 {}\n# seed {}\n",
            self.tool, self.version, self.core_version, self.kind, self.config_sha256, self.seed
        )
    }
}

/// Serialize rows as a CSV body (header row included).
pub fn csv_body<T: Serialize>(rows: &[T]) -> Result<String, FormatError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| FormatError::Schema(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// A table ready to write: provenance header plus body.
pub fn csv_document<T: Serialize>(header: &Header, rows: &[T]) -> Result<String, FormatError> {
    Ok(header.lines() + &csv_body(rows)?)
}

/// Split a document into its provenance lines and body.
pub fn split_header(doc: &str) -> (&str, &str) {
    let mut at = 0;
    for line in doc.split_inclusive('\n') {
        if !line.starts_with('#') {
            break;
        }
        at += line.len();
    }
    doc.split_at(at)
}

/// Parse the body of a table document.
pub fn read_csv<T: DeserializeOwned>(doc: &str) -> Result<Vec<T>, FormatError> {
    let (_, body) = split_header(doc);
    let mut r = csv::Reader::from_reader(body.as_bytes());
    Ok(r.deserialize().collect::<Result<Vec<T>, _>>()?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    #[serde(rename = "R")]
    pub big: ScaleCell,
    pub r: ScaleCell,
    pub count_lo: CountCell,
    pub count_hi: CountCell,
    pub quotient_lo: f64,
    pub quotient: f64,
    pub quotient_hi: f64,
    pub running_min: f64,
}

pub fn estimate_rows(rep: &EstimateReport) -> Vec<EstimateRow> {
    rep.records
        .iter()
        .map(|r| EstimateRow {
            big: ScaleCell(r.big),
            r: ScaleCell(r.small),
            count_lo: CountCell(r.count.lower),
            count_hi: CountCell(r.count.upper),
            quotient_lo: r.quotient_lo,
            quotient: r.quotient,
            quotient_hi: r.quotient_hi,
            running_min: r.running_min,
        })
        .collect()
}

/// One term of the Moran formula.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormulaRow {
    pub level: u64,
    pub checkpoint: Option<usize>,
    #[serde(rename = "R")]
    pub big: ScaleCell,
    pub phi: f64,
    pub l_phi: u64,
    pub window_depth: f64,
    pub quotient: Option<f64>,
    pub running_min: Option<f64>,
}

/// Both traces of an example reproduction, one row per checkpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExampleRow {
    pub checkpoint: usize,
    pub level: u64,
    #[serde(rename = "R")]
    pub big: ScaleCell,
    pub exact: bool,
    pub l_phi: u64,
    pub quotient_phi: Option<f64>,
    pub running_min_phi: Option<f64>,
    pub l_psi: u64,
    pub quotient_psi: Option<f64>,
    pub running_min_psi: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub alpha: f64,
    pub value: Option<f64>,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub value_gamma: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub alpha: f64,
    pub beta: f64,
    pub left: f64,
    pub right: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomRow {
    #[serde(rename = "R")]
    pub big: ScaleCell,
    pub value: f64,
    pub monotone: bool,
    pub growth: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingCsvRow {
    pub c: f64,
    #[serde(rename = "R")]
    pub big: ScaleCell,
    pub left: f64,
    pub middle: f64,
    pub right: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PopcornRow {
    pub p: u64,
    pub q: u64,
    pub x: f64,
    pub height: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxRow {
    pub r: f64,
    pub count_lo: u64,
    pub count_hi: u64,
    pub value: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells() {
        let c: CountCell = "e^1234.5".parse().unwrap();
        assert_eq!(c.to_string(), "e^1234.5");
        assert_eq!("17".parse::<CountCell>().unwrap().0.exact(), Some(17));
        let s = parse_scale("2^-10").unwrap();
        assert!((s.radius() - 1.0 / 1024.0).abs() < 1e-18);
        assert!(parse_scale("-1").is_err());
        assert!(parse_scale("2^-x").is_err());
    }

    #[test]
    fn split() {
        let (h, b) = split_header("# a\n# b\nx,y\n1,2\n");
        assert_eq!(h, "# a\n# b\n");
        assert_eq!(b, "x,y\n1,2\n");
    }
}
