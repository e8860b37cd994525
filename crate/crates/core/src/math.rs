//! Thin wrappers over `libm` so the rest of the crate reads like std code.

pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

pub fn ln1p(x: f64) -> f64 {
    libm::log1p(x)
}

pub fn pow(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

pub fn round(x: f64) -> f64 {
    libm::round(x)
}

pub fn log2(x: f64) -> f64 {
    libm::log2(x)
}

pub fn log10(x: f64) -> f64 {
    libm::log10(x)
}

pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

/// `ln(e^a + e^b)` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + ln1p(exp(lo - hi))
}

/// `ln(1 - e^{-x})` for `x > 0`.
pub fn ln_one_minus_exp_neg(x: f64) -> f64 {
    if x < core::f64::consts::LN_2 {
        ln(-libm::expm1(-x))
    } else {
        ln1p(-exp(-x))
    }
}

/// True when `a` and `b` agree to `rel` relative tolerance (absolute near zero).
pub fn close(a: f64, b: f64, rel: f64) -> bool {
    abs(a - b) <= rel * f64::max(1.0, f64::max(abs(a), abs(b)))
}
