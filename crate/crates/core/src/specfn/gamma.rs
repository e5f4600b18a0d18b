//! Log-gamma and digamma for real arguments.
//!
//! `ln Γ` is evaluated by a Taylor expansion around 1 and 2 (where it
//! vanishes, so relative accuracy needs care), by upward recurrence on
//! `[2.5, 10)` and by the Stirling series beyond.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
pub const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

const STIRLING_MIN: f64 = 10.0;

/// `B_{2k} / (2k (2k - 1))` for k = 1..=8.
const STIRLING_COEFFS: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// `B_{2k} / (2k)` for k = 1..=7, used by the digamma asymptotic series.
const DIGAMMA_COEFFS: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32_760.0,
    1.0 / 12.0,
];

const ZETA_TERMS: usize = 40;

/// `zeta(k) - 1` for k = 2..ZETA_TERMS+2, by direct summation to n = 10 and
/// an Euler-Maclaurin tail.
fn zeta_minus_one() -> &'static [f64; ZETA_TERMS] {
    static TABLE: OnceLock<[f64; ZETA_TERMS]> = OnceLock::new();
    TABLE.get_or_init(|| {
        // B_{2j} / (2j)!
        const BERN: [f64; 6] = [
            1.0 / 6.0 / 2.0,
            -1.0 / 30.0 / 24.0,
            1.0 / 42.0 / 720.0,
            -1.0 / 30.0 / 40_320.0,
            5.0 / 66.0 / 3_628_800.0,
            -691.0 / 2730.0 / 479_001_600.0,
        ];
        let cut = 10.0_f64;
        let mut out = [0.0; ZETA_TERMS];
        for (i, slot) in out.iter_mut().enumerate() {
            let k = (i + 2) as f64;
            let mut head = 0.0;
            for n in (2..=10).rev() {
                head += (n as f64).powf(-k);
            }
            // sum_{n > cut} n^-k
            let mut tail = cut.powf(1.0 - k) / (k - 1.0) - 0.5 * cut.powf(-k);
            let mut rising = k; // k (k+1) ... (k + 2j - 2)
            for (j, b) in BERN.iter().enumerate() {
                let e = k + 2.0 * j as f64 + 1.0;
                tail += b * rising * cut.powf(-e);
                rising *= (k + 2.0 * j as f64 + 1.0) * (k + 2.0 * j as f64 + 2.0);
            }
            *slot = head + tail;
        }
        out
    })
}

/// `ln Γ(1 + e)` for `|e| <= 1/2`.
fn ln_gamma_1p(e: f64) -> f64 {
    let z = zeta_minus_one();
    let mut acc = 0.0;
    let mut pow = e * e;
    for (i, zk) in z.iter().enumerate() {
        let k = (i + 2) as f64;
        let term = zk * pow / k;
        acc += if i % 2 == 0 { term } else { -term };
        if term.abs() < 1e-18 * acc.abs().max(1e-300) {
            break;
        }
        pow *= e;
    }
    -e.ln_1p() + e * (1.0 - EULER_GAMMA) + acc
}

/// Even part and (odd part)/mu of `ln Γ(1 + mu)` for `|mu| <= 1/2`.
pub(crate) fn ln_gamma_1p_split(mu: f64) -> (f64, f64) {
    let z = zeta_minus_one();
    let m2 = mu * mu;
    let mut even = -0.5 * (-m2).ln_1p();
    let mut odd = 1.0 - EULER_GAMMA
        - if mu.abs() < 1e-8 { 1.0 + m2 / 3.0 } else { mu.atanh() / mu };
    let mut pow = m2;
    for (i, zk) in z.iter().enumerate() {
        let k = (i + 2) as f64;
        if i % 2 == 0 {
            even += zk * pow / k;
        } else {
            odd -= zk * pow / k;
            pow *= m2;
        }
        if zk * pow < 1e-20 {
            break;
        }
    }
    (even, odd)
}

/// Stirling remainder `ln Γ(y) - [(y - 1/2) ln y - y + ln √(2π)]`, `y >= 10`.
pub(crate) fn stirling_tail(y: f64) -> f64 {
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    let mut acc = 0.0;
    let mut p = inv;
    for c in STIRLING_COEFFS {
        acc += c * p;
        p *= inv2;
    }
    acc
}

pub(crate) fn ln_gamma_pos(x: f64) -> f64 {
    if x >= STIRLING_MIN {
        (x - 0.5) * x.ln() - x + HALF_LN_2PI + stirling_tail(x)
    } else if x < 0.5 {
        ln_gamma_1p(x) - x.ln()
    } else if x < 1.5 {
        ln_gamma_1p(x - 1.0)
    } else if x < 2.5 {
        let e = x - 2.0;
        e.ln_1p() + ln_gamma_1p(e)
    } else {
        let mut y = x;
        let mut prod = 1.0;
        while y < STIRLING_MIN {
            prod *= y;
            y += 1.0;
        }
        ln_gamma_pos(y) - prod.ln()
    }
}

/// Natural logarithm of Γ(x) for x > 0.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            func: "log_gamma",
            detail: format!("x = {x} must be positive and finite"),
        });
    }
    Ok(ln_gamma_pos(x))
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// `sin(π x)` with argument reduction so that integers give exact zeros.
fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).floor(); // [0, 2)
    let (r, sign) = if r >= 1.0 { (r - 1.0, -1.0) } else { (r, 1.0) };
    let r = if r > 0.5 { 1.0 - r } else { r };
    sign * (PI * r).sin()
}

/// `(ln |Γ(x)|, sign Γ(x))` for any real `x` that is not a pole.
/// Returns `None` at the poles `x = 0, -1, -2, ...`.
pub(crate) fn ln_gamma_signed(x: f64) -> Option<(f64, f64)> {
    if x > 0.0 {
        return Some((ln_gamma_pos(x), 1.0));
    }
    if is_nonpositive_integer(x) {
        return None;
    }
    // Γ(x) Γ(1 - x) = π / sin(π x)
    let s = sin_pi(x);
    Some((PI.ln() - s.abs().ln() - ln_gamma_pos(1.0 - x), s.signum()))
}

/// `Σ ln Γ(plus_i) - Σ ln Γ(minus_j)` for positive arguments.
///
/// When both lists have the same length and every argument is large, the
/// `(y - 1/2) ln y - y` parts are combined around a common reference point
/// so that the O(y ln y) magnitudes cancel analytically.
pub(crate) fn ln_gamma_combination(plus: &[f64], minus: &[f64]) -> f64 {
    let all_large = plus.iter().chain(minus).all(|&y| y >= STIRLING_MIN);
    if plus.len() != minus.len() || !all_large || plus.is_empty() {
        return plus.iter().map(|&y| ln_gamma_pos(y)).sum::<f64>()
            - minus.iter().map(|&y| ln_gamma_pos(y)).sum::<f64>();
    }
    let x_ref = plus[0];
    let ln_ref = x_ref.ln();
    let part = |y: f64| {
        let h = y - x_ref;
        // (y - 1/2) ln y - y  minus the common (x_ref - 1/2) ln x_ref - x_ref
        h * ln_ref + (y - 0.5) * (h / x_ref).ln_1p() - h + stirling_tail(y)
    };
    plus.iter().map(|&y| part(y)).sum::<f64>() - minus.iter().map(|&y| part(y)).sum::<f64>()
}

fn digamma_pos(x: f64) -> f64 {
    let mut y = x;
    let mut shift = 0.0;
    while y < STIRLING_MIN {
        shift -= 1.0 / y;
        y += 1.0;
    }
    let inv2 = 1.0 / (y * y);
    let mut series = 0.0;
    let mut p = inv2;
    for c in DIGAMMA_COEFFS {
        series += c * p;
        p *= inv2;
    }
    shift + y.ln() - 0.5 / y - series
}

/// ψ(x) for any real non-pole `x` (reflection for x <= 0).
pub(crate) fn digamma_any(x: f64) -> f64 {
    if x > 0.0 {
        return digamma_pos(x);
    }
    if is_nonpositive_integer(x) {
        return f64::NAN;
    }
    // ψ(1 - x) - ψ(x) = π cot(π x)
    let s = sin_pi(x);
    let c = sin_pi(x + 0.5);
    digamma_pos(1.0 - x) - PI * c / s
}

/// Digamma ψ(x) = d ln Γ(x) / dx for x > 0.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            func: "digamma",
            detail: format!("x = {x} must be positive and finite"),
        });
    }
    Ok(digamma_pos(x))
}
