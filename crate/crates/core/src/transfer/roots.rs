use crate::error::{Error, Result};

/// Geometric and algebraic rates of the two far-field solutions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticRoots {
    /// `x_+ = rho + sqrt(rho² - 1)`.
    pub x_plus: f64,
    /// `x_- = 1 / x_+`.
    pub x_minus: f64,
    /// `ln x_+ = acosh(rho)`.
    pub k: f64,
    /// `(1 + sqrt(1 - 8w)) / 2`.
    pub alpha_plus: f64,
    /// `(1 - sqrt(1 - 8w)) / 2`.
    pub alpha_minus: f64,
    /// `sqrt(1 - 8w)`.
    pub delta: f64,
    /// `1 - delta / 2`.
    pub theta: f64,
}

/// `acosh(1 + eps)` without cancellation.
pub(crate) fn k_of_eps(eps: f64) -> f64 {
    (eps + (eps * (2.0 + eps)).sqrt()).ln_1p()
}

/// Real part of `alpha_-`; 1/2 once the exponents turn complex.
pub(crate) fn alpha_minus_real(w: f64) -> f64 {
    let disc = 1.0 - 8.0 * w;
    if disc > 0.0 { 0.5 * (1.0 - disc.sqrt()) } else { 0.5 }
}

/// Roots for `rho = 1 + eps`.
pub fn roots_eps(eps: f64, w: f64) -> Result<AsymptoticRoots> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::Parameter(format!("rho - 1 = {eps} must be finite and >= 0")));
    }
    if !w.is_finite() {
        return Err(Error::Parameter(format!("tail coefficient w = {w} must be finite")));
    }
    let disc = 1.0 - 8.0 * w;
    if disc < 0.0 {
        return Err(Error::Regime(format!("w = {w} > 1/8: complex exponents, no transition")));
    }
    let k = k_of_eps(eps);
    let delta = disc.sqrt();
    Ok(AsymptoticRoots {
        x_plus: k.exp(),
        x_minus: (-k).exp(),
        k,
        alpha_plus: 0.5 * (1.0 + delta),
        alpha_minus: 0.5 * (1.0 - delta),
        delta,
        theta: 1.0 - 0.5 * delta,
    })
}

/// Characteristic roots at `rho` for tail coefficient `w`.
pub fn roots(rho: f64, w: f64) -> Result<AsymptoticRoots> {
    if !(rho >= 1.0) {
        return Err(Error::Parameter(format!("rho = {rho} must be >= 1")));
    }
    roots_eps(rho - 1.0, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn roots_at_five_quarters() {
        let r = roots(1.25, 0.0).unwrap();
        assert_relative_eq!(r.x_plus, 2.0, max_relative = 1e-15);
        assert_relative_eq!(r.x_minus, 0.5, max_relative = 1e-15);
        assert_eq!(r.alpha_minus, 0.0);
        assert_eq!(r.alpha_plus, 1.0);
        assert_eq!(r.theta, 0.5);
        assert_relative_eq!(r.k, 2f64.ln(), max_relative = 1e-15);
        assert_relative_eq!(r.x_plus + r.x_minus, 2.5, max_relative = 1e-15);
    }

    #[test]
    fn theta_vanishes_at_minus_three_eighths() {
        let r = roots(1.0, -0.375).unwrap();
        assert_eq!(r.alpha_minus, -0.5);
        assert_eq!(r.theta, 0.0);
        assert_eq!(r.alpha_plus * r.alpha_minus, -0.75);
    }

    #[test]
    fn roots_at_one() {
        let r = roots(1.0, -1.0).unwrap();
        assert_eq!((r.x_plus, r.x_minus), (1.0, 1.0));
        assert_relative_eq!(r.alpha_minus, -1.0, max_relative = 1e-15);
        assert_relative_eq!(r.alpha_plus, 2.0, max_relative = 1e-15);
    }

    #[test]
    fn small_eps_matches_acosh() {
        for eps in [0.3, 4.0] {
            let rho: f64 = 1.0 + eps;
            assert_relative_eq!(k_of_eps(eps), rho.acosh(), max_relative = 1e-14);
        }
        // acosh(1 + e) = sqrt(2e) (1 - e/12 + 3e²/160 - ...)
        for eps in [1e-20f64, 1e-12, 1e-6] {
            let series = (2.0 * eps).sqrt() * (1.0 - eps / 12.0 + 3.0 * eps * eps / 160.0);
            assert_relative_eq!(k_of_eps(eps), series, max_relative = 1e-15);
        }
    }

    #[test]
    fn complex_exponents_are_a_regime_error() {
        assert!(matches!(roots(1.0, 0.2), Err(Error::Regime(_))));
        assert!(matches!(roots(0.9, 0.0), Err(Error::Parameter(_))));
    }
}
