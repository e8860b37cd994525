//! Non-negative counts that may exceed every integer type.

use core::fmt;

use crate::math;

/// A count held as its natural log, with the exact integer kept while it fits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Count {
    ln: f64,
    exact: Option<u64>,
}

const EXACT_LIMIT: u64 = 1 << 53;

impl Count {
    pub const ZERO: Count = Count { ln: f64::NEG_INFINITY, exact: Some(0) };
    pub const ONE: Count = Count { ln: 0.0, exact: Some(1) };

    pub fn from_u64(n: u64) -> Count {
        let ln = if n == 0 { f64::NEG_INFINITY } else { math::ln(n as f64) };
        Count { ln, exact: (n <= EXACT_LIMIT).then_some(n) }
    }

    /// `2^e`.
    pub fn pow2(e: u64) -> Count {
        let exact = (e < 53).then(|| 1u64 << e);
        Count { ln: e as f64 * core::f64::consts::LN_2, exact }
    }

    /// Count with the given natural log and no exact value.
    pub fn from_ln(ln: f64) -> Count {
        if ln <= 36.0 {
            let n = math::round(math::exp(ln));
            if math::abs(math::exp(ln) - n) < 1e-9 * n.max(1.0) {
                return Count::from_u64(n as u64);
            }
        }
        Count { ln, exact: None }
    }

    pub fn ln(self) -> f64 {
        self.ln
    }

    pub fn exact(self) -> Option<u64> {
        self.exact
    }

    pub fn is_zero(self) -> bool {
        self.ln == f64::NEG_INFINITY
    }

    /// Approximate value as `f64` (may be infinite).
    pub fn approx(self) -> f64 {
        match self.exact {
            Some(n) => n as f64,
            None => math::exp(self.ln),
        }
    }

    /// `ceil(n / 2)`.
    pub fn half_ceil(self) -> Count {
        match self.exact {
            Some(n) => Count::from_u64(n.div_ceil(2)),
            None => Count { ln: self.ln - core::f64::consts::LN_2, exact: None },
        }
    }

    pub fn max(self, other: Count) -> Count {
        if other.ln > self.ln {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Count) -> Count {
        if other.ln < self.ln {
            other
        } else {
            self
        }
    }
}

impl core::ops::Add for Count {
    type Output = Count;

    fn add(self, other: Count) -> Count {
        let exact = match (self.exact, other.exact) {
            (Some(a), Some(b)) => a.checked_add(b).filter(|s| *s <= EXACT_LIMIT),
            _ => None,
        };
        match exact {
            Some(n) => Count::from_u64(n),
            None => Count { ln: math::log_add_exp(self.ln, other.ln), exact: None },
        }
    }
}

impl fmt::Display for Count {
    /// Exact integers print as integers, larger counts as `m.mmmmmmmmmmme+N`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(n) = self.exact {
            return write!(f, "{n}");
        }
        let l10 = self.ln / core::f64::consts::LN_10;
        let mut e = math::floor(l10) as i64;
        let mut m = math::round(math::pow(10.0, l10 - e as f64) * 1e11) / 1e11;
        if m >= 10.0 {
            m /= 10.0;
            e += 1;
        }
        write!(f, "{m}e{e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn exact_arithmetic() {
        let c = Count::pow2(3) + Count::from_u64(5);
        assert_eq!(c.exact(), Some(13));
        assert_eq!(c.half_ceil().exact(), Some(7));
        assert_eq!(Count::ZERO + Count::ONE, Count::ONE);
    }

    #[test]
    fn huge_counts_stay_finite() {
        let c = Count::pow2(5000) + Count::pow2(5000);
        assert_eq!(c.exact(), None);
        assert!(math::close(c.ln(), 5001.0 * core::f64::consts::LN_2, 1e-14));
        assert!(c.to_string().contains('e'));
    }
}
