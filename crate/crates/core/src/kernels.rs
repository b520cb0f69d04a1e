//! Scalar comparison functions for curvature bounds: the generalized
//! sine/cosine pair `sn`/`cn` and the distortion coefficients `sigma`/`tau`
//! that weight the entropy inequality, with uniform treatment of positive,
//! zero, and negative curvature parameters.

use thiserror::Error;

/// Threshold on |K| t^2 below which `sn`/`cn` switch to series evaluation.
///
/// Near K = 0 the closed forms divide by sqrt(|K|) and cancel
/// catastrophically; the series in K is exact to machine precision here.
const SERIES_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Error, PartialEq)]
pub enum KernelError {
    #[error("dimension bound must satisfy N >= 1, got {0}")]
    DimensionBound(f64),
    #[error("interpolation fraction must lie in [0, 1], got {0}")]
    Fraction(f64),
    #[error("length must be nonnegative, got {0}")]
    NegativeLength(f64),
}

/// Parameter bundle for the distortion coefficients: curvature `k`,
/// dimension bound `n >= 1`, interpolation fraction `t in [0, 1]`, and
/// separation length `theta >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureDimParams {
    pub k: f64,
    pub n: f64,
    pub t: f64,
    pub theta: f64,
}

impl CurvatureDimParams {
    pub fn new(k: f64, n: f64, t: f64, theta: f64) -> Result<Self, KernelError> {
        if !(n >= 1.0) {
            return Err(KernelError::DimensionBound(n));
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(KernelError::Fraction(t));
        }
        if !(theta >= 0.0) {
            return Err(KernelError::NegativeLength(theta));
        }
        Ok(Self { k, n, t, theta })
    }

    /// True when `tau` diverges for these parameters: K > 0, N > 1 and
    /// theta at or beyond the comparison-space diameter.
    pub fn beyond_critical_length(&self) -> bool {
        self.k > 0.0 && self.n > 1.0 && self.theta >= critical_length(self.k, self.n - 1.0)
    }

    pub fn tau(&self) -> f64 {
        tau(self.k, self.n, self.t, self.theta)
    }
}

/// Diameter of the model space with curvature K / Nminus1: pi * sqrt(Nminus1 / K).
///
/// Only meaningful for K > 0 and Nminus1 > 0; returns +inf otherwise.
pub fn critical_length(k: f64, nminus1: f64) -> f64 {
    if k > 0.0 && nminus1 > 0.0 {
        std::f64::consts::PI * (nminus1 / k).sqrt()
    } else {
        f64::INFINITY
    }
}

/// Generalized sine: sin(sqrt(K) t)/sqrt(K) for K > 0, t for K = 0,
/// sinh(sqrt(-K) t)/sqrt(-K) for K < 0. Continuous in K at 0.
pub fn sn(k: f64, t: f64) -> f64 {
    debug_assert!(t >= 0.0, "sn requires t >= 0");
    if (k * t * t).abs() < SERIES_THRESHOLD {
        // t - K t^3/6 + K^2 t^5/120; the next term is below machine epsilon here
        return t * (1.0 - k * t * t / 6.0 * (1.0 - k * t * t / 20.0));
    }
    if k > 0.0 {
        let s = k.sqrt();
        (s * t).sin() / s
    } else {
        let s = (-k).sqrt();
        (s * t).sinh() / s
    }
}

/// Generalized cosine: cos(sqrt(K) t) for K > 0, 1 for K = 0,
/// cosh(sqrt(-K) t) for K < 0. Satisfies cn^2 + K sn^2 = 1.
pub fn cn(k: f64, t: f64) -> f64 {
    debug_assert!(t >= 0.0, "cn requires t >= 0");
    if (k * t * t).abs() < SERIES_THRESHOLD {
        return 1.0 - k * t * t / 2.0 * (1.0 - k * t * t / 12.0);
    }
    if k > 0.0 {
        (k.sqrt() * t).cos()
    } else {
        ((-k).sqrt() * t).cosh()
    }
}

/// Inverse of `cn` on its principal branch: the radial distance whose
/// generalized cosine equals `x`. Used by the closed-form cone metric.
pub fn cn_inverse(k: f64, x: f64) -> f64 {
    if k > 0.0 {
        x.clamp(-1.0, 1.0).acos() / k.sqrt()
    } else if k < 0.0 {
        x.max(1.0).acosh() / (-k).sqrt()
    } else {
        panic!("cn_inverse undefined for K = 0");
    }
}

/// Inner distortion coefficient sigma: sn(K/Nminus1, theta t) / sn(K/Nminus1, theta).
///
/// Returns t at theta = 0 (the limit value) and +inf at or beyond the
/// critical length for K > 0. Callers must keep `nminus1 > 0`; the N = 1
/// case is absorbed by the vanishing exponent in `tau`.
pub fn sigma(k: f64, nminus1: f64, t: f64, theta: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&t));
    debug_assert!(theta >= 0.0);
    if !(nminus1 > 0.0) {
        return f64::NAN;
    }
    if theta == 0.0 || k == 0.0 {
        return t;
    }
    let kappa = k / nminus1;
    if k > 0.0 && theta >= critical_length(k, nminus1) {
        return f64::INFINITY;
    }
    if kappa < 0.0 {
        let s = (-kappa).sqrt();
        if s * theta > 20.0 {
            // sinh(a)/sinh(b) = e^{a-b} (1 - e^{-2a}) / (1 - e^{-2b});
            // the direct ratio overflows long before the value does
            let (a, b) = (s * theta * t, s * theta);
            return (a - b).exp() * (1.0 - (-2.0 * a).exp()) / (1.0 - (-2.0 * b).exp());
        }
    }
    sn(kappa, theta * t) / sn(kappa, theta)
}

/// Volume distortion coefficient tau = t^(1/N) * sigma_{K,N-1}^(t)(theta)^(1-1/N).
///
/// For N = 1 the exponent on sigma vanishes and tau reduces to t; for K > 0,
/// N > 1 and theta at or beyond pi*sqrt((N-1)/K) the value is +inf.
pub fn tau(k: f64, n: f64, t: f64, theta: f64) -> f64 {
    debug_assert!(n >= 1.0);
    debug_assert!((0.0..=1.0).contains(&t));
    debug_assert!(theta >= 0.0);
    if n == 1.0 || k == 0.0 {
        // t^(1/N) t^(1-1/N) collapses to t; returning it directly keeps the
        // flat case exact rather than powf-rounded
        return t;
    }
    let s = sigma(k, n - 1.0, t, theta);
    if s.is_infinite() {
        return f64::INFINITY;
    }
    t.powf(1.0 / n) * s.powf(1.0 - 1.0 / n)
}
