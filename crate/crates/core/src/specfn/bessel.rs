//! Modified Bessel function of the second kind for real order.
//!
//! Temme's method: `K_μ` and `K_{μ+1}` for `|μ| <= 1/2` from a series
//! (x < 2) or Steed's continued fraction (x >= 2), then upward recurrence.

use std::f64::consts::PI;

use crate::error::{Error, Result};

use super::gamma::ln_gamma_1p_split;

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 100_000;
const SERIES_MAX_X: f64 = 2.0;

/// `(gam1, gam2, 1/Γ(1+μ), 1/Γ(1-μ))` with
/// `gam1 = (1/Γ(1-μ) - 1/Γ(1+μ)) / (2μ)` and `gam2` their half-sum.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    let (even, odd_over_mu) = ln_gamma_1p_split(mu);
    let odd = odd_over_mu * mu;
    let scale = (-even).exp();
    let sinhc = if odd.abs() < 1e-8 { 1.0 + odd * odd / 6.0 } else { odd.sinh() / odd };
    let gam1 = scale * odd_over_mu * sinhc;
    let gam2 = scale * odd.cosh();
    (gam1, gam2, scale * (-odd).exp(), scale * odd.exp())
}

/// `(K_μ(x), K_{μ+1}(x))` for `|μ| <= 1/2`.
fn k_pair(mu: f64, x: f64) -> Result<(f64, f64)> {
    let mu2 = mu * mu;
    if x < SERIES_MAX_X {
        let x2 = 0.5 * x;
        let pimu = PI * mu;
        let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = mu * d;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        let ee = e.exp();
        let mut p = 0.5 * ee / gampl;
        let mut q = 0.5 / (ee * gammi);
        let mut c = 1.0;
        let dd = x2 * x2;
        let mut sum1 = p;
        for i in 1..MAX_ITER {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - mu2);
            c *= dd / fi;
            p /= fi - mu;
            q /= fi + mu;
            let del = c * ff;
            sum += del;
            sum1 += c * (p - fi * ff);
            if del.abs() < sum.abs() * EPS {
                return Ok((sum, sum1 * 2.0 / x));
            }
        }
    } else {
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut delh = d;
        let mut h = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - mu2;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        for i in 1..MAX_ITER {
            let fi = i as f64;
            a -= 2.0 * fi;
            c = -a * c / (fi + 1.0);
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh = (b * d - 1.0) * delh;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < EPS {
                let h = a1 * h;
                let kmu = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
                return Ok((kmu, kmu * (mu + x + 0.5 - h) / x));
            }
        }
    }
    Err(Error::Convergence(format!("K_mu({x}) with mu = {mu} did not converge")))
}

/// Modified Bessel function `K_ν(x)` for real order and `x > 0`.
///
/// Accuracy targets orders in (0, 2); other orders use the same recurrence.
pub fn bessel_k(nu: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain { func: "bessel_k", detail: format!("x = {x} must be positive") });
    }
    if !nu.is_finite() {
        return Err(Error::Domain { func: "bessel_k", detail: format!("order {nu} is not finite") });
    }
    let nu = nu.abs();
    if nu == 0.5 {
        return Ok((PI / (2.0 * x)).sqrt() * (-x).exp());
    }
    let nl = (nu + 0.5).floor();
    let mu = nu - nl;
    let (mut kmu, mut k1) = k_pair(mu, x)?;
    for i in 1..=(nl as usize) {
        let next = (mu + i as f64) * (2.0 / x) * k1 + kmu;
        kmu = k1;
        k1 = next;
    }
    Ok(kmu)
}
