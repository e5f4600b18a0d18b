use crate::error::{Error, Result};

/// Root of a continuous `f` on `[lo, hi]` with `f(lo) > 0 > f(hi)` by the
/// Illinois variant of regula falsi. Stops when the bracket is shorter than
/// `xtol` or `f` vanishes.
pub(crate) fn illinois(
    mut f: impl FnMut(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
    mut f_lo: f64,
    mut f_hi: f64,
    xtol: f64,
) -> Result<f64> {
    if !(f_lo > 0.0 && f_hi < 0.0) {
        return Err(Error::Convergence(format!("root not bracketed: f({lo}) = {f_lo}, f({hi}) = {f_hi}")));
    }
    let mut side = 0i8;
    for _ in 0..400 {
        if (hi - lo).abs() <= xtol {
            break;
        }
        let mut x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if !(x > lo.min(hi) && x < lo.max(hi)) {
            x = 0.5 * (lo + hi);
        }
        let fx = f(x)?;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx > 0.0 {
            lo = x;
            f_lo = fx;
            if side == 1 {
                f_hi *= 0.5;
            }
            side = 1;
        } else {
            hi = x;
            f_hi = fx;
            if side == -1 {
                f_lo *= 0.5;
            }
            side = -1;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Unweighted least-squares line through `(x, y)`: `(slope, intercept,
/// max |residual|)`.
pub(crate) fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let resid = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).abs()).fold(0.0, f64::max);
    (slope, intercept, resid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn illinois_finds_cube_root() {
        let r = illinois(|x| Ok(2.0 - x * x * x), 0.0, 3.0, 2.0, -25.0, 1e-15).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn illinois_rejects_unbracketed() {
        assert!(illinois(|x| Ok(x), 1.0, 2.0, 1.0, 2.0, 1e-12).is_err());
    }

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 5.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 0.5 * v).collect();
        let (s, c, r) = linear_fit(&x, &y);
        assert!((s + 0.5).abs() < 1e-15 && (c - 3.0).abs() < 1e-15 && r < 1e-15);
    }
}
