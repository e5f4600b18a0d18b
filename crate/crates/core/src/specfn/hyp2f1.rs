//! Gauss hypergeometric function `2F1(α, β; γ; z)` for real `z ∈ [0, 1]`.
//!
//! Intermediate quantities are carried as `m · e^e` pairs so that the large
//! parameter values reached by the closed-form model (p up to 10⁶) do not
//! overflow before the final ratio is taken.

use crate::error::{Error, Result};

use super::gamma::{digamma_any, ln_gamma_signed};

/// Series below this argument, 1 - z connection formulas above.
pub const Z_SWITCH: f64 = 0.75;

/// Distance to an integer below which `γ - α - β` takes the logarithmic branch.
const INTEGER_SNAP: f64 = 1e-8;

/// Below this distance to an integer, `γ - α - β` is handled by
/// interpolation in `γ` with nodes spaced `INTERP_STEP` apart.
const INTERP_RADIUS: f64 = 1e-3;
const INTERP_STEP: f64 = 2e-3;

const MAX_TERMS: usize = 50_000_000;

/// Parameters and argument of a `2F1` evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyper2F1Args {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub z: f64,
}

impl Hyper2F1Args {
    pub fn new(alpha: f64, beta: f64, gamma: f64, z: f64) -> Result<Self> {
        let args = Self { alpha, beta, gamma, z };
        args.validate(1.0 - z)?;
        Ok(args)
    }

    fn validate(&self, y: f64) -> Result<()> {
        let Self { alpha, beta, gamma, z } = *self;
        if ![alpha, beta, gamma, z, y].iter().all(|v| v.is_finite()) {
            return Err(domain(format!("non-finite input ({alpha}, {beta}; {gamma}; {z})")));
        }
        if gamma <= 0.0 && gamma == gamma.round() {
            return Err(domain(format!("gamma = {gamma} is a non-positive integer")));
        }
        if !(0.0..=1.0).contains(&z) || !(0.0..=1.0).contains(&y) {
            return Err(domain(format!("z = {z} outside [0, 1]")));
        }
        Ok(())
    }
}

fn domain(detail: String) -> Error {
    Error::Domain { func: "gauss_2f1", detail }
}

/// A real number stored as `m · exp(e)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Scaled {
    pub m: f64,
    pub e: f64,
}

impl Scaled {
    pub const ZERO: Scaled = Scaled { m: 0.0, e: 0.0 };

    pub fn new(m: f64, e: f64) -> Self {
        Scaled { m, e }.normalized()
    }

    pub fn from_f64(x: f64) -> Self {
        Scaled { m: x, e: 0.0 }
    }

    fn normalized(self) -> Self {
        if self.m == 0.0 || !self.m.is_finite() {
            return self;
        }
        let a = self.m.abs();
        if (1e-100..=1e100).contains(&a) {
            self
        } else {
            Scaled { m: self.m.signum(), e: self.e + a.ln() }
        }
    }

    pub fn mul(self, o: Scaled) -> Scaled {
        Scaled::new(self.m * o.m, self.e + o.e)
    }

    pub fn div(self, o: Scaled) -> Scaled {
        Scaled::new(self.m / o.m, self.e - o.e)
    }

    pub fn scale_ln(self, ln_factor: f64) -> Scaled {
        Scaled { m: self.m, e: self.e + ln_factor }
    }

    pub fn add(self, o: Scaled) -> Scaled {
        if self.m == 0.0 {
            return o;
        }
        if o.m == 0.0 {
            return self;
        }
        let e = self.e.max(o.e);
        Scaled::new(self.m * (self.e - e).exp() + o.m * (o.e - e).exp(), e)
    }

    pub fn signum(self) -> f64 {
        if self.m == 0.0 {
            0.0
        } else {
            self.m.signum()
        }
    }

    pub fn ln_abs(self) -> f64 {
        self.m.abs().ln() + self.e
    }

    pub fn to_f64(self) -> f64 {
        self.m * self.e.exp()
    }
}

/// `Π Γ(num) / Π Γ(den)` as a scaled number; zero for a pole in `den`.
pub(crate) fn gamma_ratio_scaled(num: &[f64], den: &[f64]) -> Result<Scaled> {
    let mut ln = 0.0;
    let mut sign = 1.0;
    for &x in den {
        match ln_gamma_signed(x) {
            Some((l, s)) => {
                ln -= l;
                sign *= s;
            }
            None => return Ok(Scaled::ZERO),
        }
    }
    for &x in num {
        let (l, s) = ln_gamma_signed(x).ok_or_else(|| domain(format!("pole of Γ at {x}")))?;
        ln += l;
        sign *= s;
    }
    Ok(Scaled { m: sign, e: ln })
}

/// Kahan-compensated running sum with periodic rescaling.
struct Accumulator {
    sum: f64,
    comp: f64,
    scale: f64,
}

const RESCALE: f64 = 1e200;

impl Accumulator {
    fn new(first: f64) -> Self {
        Accumulator { sum: first, comp: 0.0, scale: 0.0 }
    }

    fn add(&mut self, term: f64) {
        let y = term - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    /// Rescales when the sum grows large; returns the factor applied to
    /// the running term.
    fn rescale(&mut self) -> f64 {
        if self.sum.abs() > RESCALE {
            self.sum /= RESCALE;
            self.comp /= RESCALE;
            self.scale += RESCALE.ln();
            1.0 / RESCALE
        } else {
            1.0
        }
    }

    fn value(&self) -> Scaled {
        Scaled::new(self.sum, self.scale)
    }
}

/// `Σ_k (a)_k (b)_k / ((c)_k k!) x^k` by direct summation.
fn power_series(a: f64, b: f64, c: f64, x: f64) -> Result<Scaled> {
    if x == 0.0 {
        return Ok(Scaled::from_f64(1.0));
    }
    let mut acc = Accumulator::new(1.0);
    let mut term = 1.0;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * x;
        if term == 0.0 {
            return Ok(acc.value());
        }
        acc.add(term);
        term *= acc.rescale();
        let next = ((a + kf + 1.0) * (b + kf + 1.0) / ((c + kf + 1.0) * (kf + 2.0)) * x).abs();
        let bound = next.max(x);
        if bound < 1.0 && term.abs() < 1e-17 * acc.sum.abs() * (1.0 - bound) {
            return Ok(acc.value());
        }
    }
    Err(Error::Convergence(format!(
        "2F1 series ({a}, {b}; {c}; {x}) did not converge in {MAX_TERMS} terms"
    )))
}

/// Positive-parameter cases where the connection formula would cancel
/// catastrophically but the direct series is still affordable.
fn prefer_direct_series(a: f64, b: f64, c: f64, y: f64) -> bool {
    a > 0.0 && b > 0.0 && c > 0.0 && y >= 1e-4 && a * b * y > 4.0
}

/// `2F1(a, b; c; 1 - y)` as a scaled number, with `z = 1 - y` supplied too
/// so neither argument loses bits to the subtraction.
pub(crate) fn hyp2f1_scaled(a: f64, b: f64, c: f64, z: f64, y: f64) -> Result<Scaled> {
    Hyper2F1Args { alpha: a, beta: b, gamma: c, z }.validate(y)?;
    let excess = c - a - b;
    if y == 0.0 {
        if excess <= 0.0 {
            return Err(Error::Divergent { alpha: a, beta: b, gamma: c });
        }
        return gamma_ratio_scaled(&[c, excess], &[c - a, c - b]);
    }
    if z < Z_SWITCH || prefer_direct_series(a, b, c, y) {
        return power_series(a, b, c, z);
    }
    let m = excess.round();
    let delta = excess - m;
    if delta.abs() < INTEGER_SNAP {
        return log_branch(a, b, m as i64, y);
    }
    if delta.abs() < INTERP_RADIUS {
        // Lagrange interpolation in γ through the integer point and nodes
        // far enough from it that the connection formula is well conditioned.
        let nodes = [-2.0, -1.0, 0.0, 1.0, 2.0].map(|k: f64| k * INTERP_STEP);
        let mut total = Scaled::ZERO;
        for (i, &xi) in nodes.iter().enumerate() {
            let fi = if xi == 0.0 {
                log_branch(a, b, m as i64, y)?
            } else {
                connection(a, b, c - delta + xi, y)?
            };
            let mut w = 1.0;
            for (j, &xj) in nodes.iter().enumerate() {
                if j != i {
                    w *= (delta - xj) / (xi - xj);
                }
            }
            total = total.add(fi.mul(Scaled::from_f64(w)));
        }
        return Ok(total);
    }
    connection(a, b, c, y)
}

fn log_branch(a: f64, b: f64, m: i64, y: f64) -> Result<Scaled> {
    if m >= 0 {
        log_branch_nonneg(a, b, m as usize, y)
    } else {
        log_branch_neg(a, b, (-m) as usize, y)
    }
}

/// AS 15.3.6, for `γ - α - β` away from the integers.
fn connection(a: f64, b: f64, c: f64, y: f64) -> Result<Scaled> {
    let excess = c - a - b;
    let g1 = gamma_ratio_scaled(&[c, excess], &[c - a, c - b])?;
    let f1 = power_series(a, b, 1.0 - excess, y)?;
    let g2 = gamma_ratio_scaled(&[c, -excess], &[a, b])?.scale_ln(excess * y.ln());
    let f2 = power_series(c - a, c - b, 1.0 + excess, y)?;
    Ok(g1.mul(f1).add(g2.mul(f2)))
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Sum of `u_n · (ln y + bracket_n)` with `u_{n+1}/u_n` and the bracket
/// increments supplied by the caller.
fn log_series(
    y: f64,
    u0: f64,
    bracket0: f64,
    ratio: impl Fn(f64) -> f64,
    bracket_step: impl Fn(f64) -> f64,
) -> Result<Scaled> {
    let ln_y = y.ln();
    let mut u = u0;
    let mut br = bracket0;
    let mut acc = Accumulator::new(u * (ln_y + br));
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        u *= ratio(nf);
        br += bracket_step(nf);
        if u == 0.0 {
            return Ok(acc.value());
        }
        let term = u * (ln_y + br);
        acc.add(term);
        u *= acc.rescale();
        let next = ratio(nf + 1.0).abs();
        if next < 0.5 && term.abs() < 1e-17 * acc.sum.abs() {
            return Ok(acc.value());
        }
    }
    Err(Error::Convergence("logarithmic 2F1 series did not converge".into()))
}

/// `c = a + b + m`, m ≥ 0 (AS 15.3.10 and 15.3.11).
fn log_branch_nonneg(a: f64, b: f64, m: usize, y: f64) -> Result<Scaled> {
    let mf = m as f64;
    let c = a + b + mf;
    let mut finite = Scaled::ZERO;
    if m > 0 {
        let mut t = 1.0;
        let mut s = 1.0;
        for n in 0..m - 1 {
            let nf = n as f64;
            t *= (a + nf) * (b + nf) / ((nf + 1.0) * (1.0 - mf + nf)) * y;
            s += t;
        }
        finite = gamma_ratio_scaled(&[mf, c], &[a + mf, b + mf])?.mul(Scaled::from_f64(s));
    }
    // bracket_n = -ψ(n+1) - ψ(n+m+1) + ψ(a+n+m) + ψ(b+n+m)
    let br0 = -digamma_any(1.0) - digamma_any(mf + 1.0) + digamma_any(a + mf) + digamma_any(b + mf);
    let series = log_series(
        y,
        1.0 / factorial(m),
        br0,
        |n| (a + mf + n) * (b + mf + n) / ((n + 1.0) * (n + mf + 1.0)) * y,
        |n| -1.0 / (n + 1.0) - 1.0 / (n + mf + 1.0) + 1.0 / (a + mf + n) + 1.0 / (b + mf + n),
    )?;
    let sign = if m % 2 == 0 { -1.0 } else { 1.0 };
    let pre = gamma_ratio_scaled(&[c], &[a, b])?.scale_ln(mf * y.ln());
    Ok(finite.add(pre.mul(series).mul(Scaled::from_f64(sign))))
}

/// `c = a + b - m`, m ≥ 1 (AS 15.3.12).
fn log_branch_neg(a: f64, b: f64, m: usize, y: f64) -> Result<Scaled> {
    let mf = m as f64;
    let c = a + b - mf;
    let mut t = 1.0;
    let mut s = 1.0;
    for n in 0..m - 1 {
        let nf = n as f64;
        t *= (a - mf + nf) * (b - mf + nf) / ((nf + 1.0) * (1.0 - mf + nf)) * y;
        s += t;
    }
    let finite = gamma_ratio_scaled(&[mf, c], &[a, b])?
        .scale_ln(-mf * y.ln())
        .mul(Scaled::from_f64(s));
    let pre = gamma_ratio_scaled(&[c], &[a - mf, b - mf])?;
    if pre.m == 0.0 {
        return Ok(finite);
    }
    let br0 = -digamma_any(1.0) - digamma_any(mf + 1.0) + digamma_any(a) + digamma_any(b);
    let series = log_series(
        y,
        1.0 / factorial(m),
        br0,
        |n| (a + n) * (b + n) / ((n + 1.0) * (n + mf + 1.0)) * y,
        |n| -1.0 / (n + 1.0) - 1.0 / (n + mf + 1.0) + 1.0 / (a + n) + 1.0 / (b + n),
    )?;
    let sign = if m % 2 == 0 { -1.0 } else { 1.0 };
    Ok(finite.add(pre.mul(series).mul(Scaled::from_f64(sign))))
}

/// `2F1(α, β; γ; z)`.
///
/// Returns [`Error::Divergent`] at `z = 1` when `γ - α - β <= 0`.
pub fn gauss_2f1(args: &Hyper2F1Args) -> Result<f64> {
    let Hyper2F1Args { alpha, beta, gamma, z } = *args;
    Ok(hyp2f1_scaled(alpha, beta, gamma, z, 1.0 - z)?.to_f64())
}

/// `2F1(α, β; γ; 1 - y)` with `y` given directly, for arguments close to 1.
pub fn gauss_2f1_near_one(alpha: f64, beta: f64, gamma: f64, y: f64) -> Result<f64> {
    Ok(hyp2f1_scaled(alpha, beta, gamma, 1.0 - y, y)?.to_f64())
}
