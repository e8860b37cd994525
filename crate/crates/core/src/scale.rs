use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use crate::math;

/// A positive length `R`, stored as `ln(1/R)`.
///
/// Ordering follows the radius: `a < b` means `a` is the smaller length.
/// Values parsed from text remember their decimal form so that printing them
/// again reproduces the input exactly.
#[derive(Clone, Copy, Debug)]
pub struct Scale {
    depth: f64,
    repr: Repr,
}

#[derive(Clone, Copy, Debug)]
enum Repr {
    Derived,
    Radius(f64),
    Decimal { mantissa: f64, exp10: i32 },
}

/// Error returned when a scale string cannot be parsed.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid scale literal (expected a positive decimal)")]
pub struct ParseScaleError;

impl Scale {
    pub const ONE: Scale = Scale { depth: 0.0, repr: Repr::Radius(1.0) };

    /// Scale from a positive finite radius.
    pub fn from_radius(r: f64) -> Option<Scale> {
        (r.is_finite() && r > 0.0).then(|| Scale { depth: -math::ln(r), repr: Repr::Radius(r) })
    }

    /// Scale with `ln(1/R) = depth`.
    pub fn from_depth(depth: f64) -> Scale {
        debug_assert!(depth.is_finite());
        Scale { depth, repr: Repr::Derived }
    }

    /// `ln(1/R)`.
    pub fn depth(self) -> f64 {
        self.depth
    }

    /// `ln R`.
    pub fn ln(self) -> f64 {
        -self.depth
    }

    /// The radius as `f64`; `0.0` once it underflows.
    pub fn radius(self) -> f64 {
        match self.repr {
            Repr::Radius(r) => r,
            _ => math::exp(-self.depth),
        }
    }

    /// `R^e`.
    pub fn powf(self, e: f64) -> Scale {
        Scale::from_depth(self.depth * e)
    }

    /// `c·R` for `c > 0`.
    pub fn scaled(self, c: f64) -> Scale {
        Scale::from_depth(self.depth - math::ln(c))
    }

    /// Whether the radius is representable as a normal `f64`.
    pub fn is_representable(self) -> bool {
        self.depth < 700.0
    }

    pub fn min(self, other: Scale) -> Scale {
        if self.depth >= other.depth {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Scale) -> Scale {
        if self.depth <= other.depth {
            self
        } else {
            other
        }
    }
}

impl PartialEq for Scale {
    fn eq(&self, other: &Self) -> bool {
        self.depth == other.depth
    }
}

impl PartialOrd for Scale {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        other.depth.partial_cmp(&self.depth)
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.repr {
            Repr::Radius(r) => write_radius(f, r),
            Repr::Decimal { mantissa, exp10 } => write!(f, "{mantissa}e{exp10}"),
            Repr::Derived => {
                if self.is_representable() {
                    write_radius(f, math::exp(-self.depth))
                } else {
                    let l10 = -self.depth / core::f64::consts::LN_10;
                    let mut e = math::floor(l10) as i32;
                    let mut m = math::round(math::pow(10.0, l10 - e as f64) * 1e11) / 1e11;
                    if m >= 10.0 {
                        m /= 10.0;
                        e += 1;
                    }
                    write!(f, "{m}e{e}")
                }
            }
        }
    }
}

fn write_radius(f: &mut fmt::Formatter<'_>, r: f64) -> fmt::Result {
    if r >= 1e-5 {
        write!(f, "{r}")
    } else {
        write!(f, "{r:e}")
    }
}

impl FromStr for Scale {
    type Err = ParseScaleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Ok(r) = s.parse::<f64>() {
            if r.is_finite() && r >= f64::MIN_POSITIVE {
                return Ok(Scale { depth: -math::ln(r), repr: Repr::Radius(r) });
            }
            if r < 0.0 || r.is_nan() || r.is_infinite() {
                return Err(ParseScaleError);
            }
        }
        let (m, e) = s.split_once(['e', 'E']).ok_or(ParseScaleError)?;
        let mantissa: f64 = m.parse().map_err(|_| ParseScaleError)?;
        let exp10: i32 = e.parse().map_err(|_| ParseScaleError)?;
        if !(mantissa.is_finite() && mantissa > 0.0) {
            return Err(ParseScaleError);
        }
        let depth = -(math::ln(mantissa) + exp10 as f64 * core::f64::consts::LN_10);
        Ok(Scale { depth, repr: Repr::Decimal { mantissa, exp10 } })
    }
}
