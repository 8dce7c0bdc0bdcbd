//! Thin `libm` shims so the rest of the crate reads like std float code.

pub(crate) const E: f64 = core::f64::consts::E;

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub(crate) fn tan(x: f64) -> f64 {
    libm::tan(x)
}

#[inline]
pub(crate) fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

/// `x^beta` with the common small integer exponents special-cased.
#[inline]
pub(crate) fn pow_beta(x: f64, beta: f64) -> f64 {
    if beta == 0.0 {
        1.0
    } else if beta == 1.0 {
        x
    } else if beta == 2.0 {
        x * x
    } else if beta == 3.0 {
        x * x * x
    } else {
        powf(x, beta)
    }
}

/// `log^beta(e + t)` for `t ≥ 0`.
#[inline]
pub(crate) fn log_e_plus_pow(t: f64, beta: f64) -> f64 {
    if beta == 0.0 {
        1.0
    } else {
        pow_beta(ln(E + t), beta)
    }
}

#[inline]
pub(crate) fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}

/// `⌈log₂ x⌉` for `x ≥ 1`.
#[inline]
pub(crate) fn ceil_log2(x: f64) -> u32 {
    libm::ceil(libm::log2(x)) as u32
}
