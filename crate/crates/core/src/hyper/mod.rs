//! Closed forms of the solvable hypergeometric family.
//!
//! Everything near criticality is parameterized by `u = ln y` with
//! `y = 1 - rho^-2`, so that `2F1(.; 1 - y)` keeps full precision and the
//! marginal laws stay representable when `y` is astronomically small.

use crate::error::{Error, Result};
use crate::numeric::illinois;
use crate::potentials::{hyper_b, PotentialSeq};
use crate::specfn::gamma::ln_gamma_combination;
use crate::specfn::hyp2f1::{hyp2f1_scaled, Scaled};
use crate::transfer::roots;

/// Distance from `s = 1/2` or `s = 3/2` routed to the marginal branches.
pub const MARGINAL_SNAP: f64 = 1e-8;

/// Largest index accepted by [`wp_rho_closed`].
pub const MAX_INDEX: usize = 1_000_000;

/// Smallest `ln y` searched when solving for `rho(b0)`.
const LN_Y_FLOOR: f64 = -700.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperParams {
    pub a: f64,
    pub s: f64,
}

impl HyperParams {
    pub fn new(a: f64, s: f64) -> Result<Self> {
        if !(a > 0.75 && a.is_finite()) {
            return Err(Error::Parameter(format!("a = {a} must exceed 3/4")));
        }
        if !(s >= 0.5 && s.is_finite()) {
            return Err(Error::Parameter(format!("s = {s} must be at least 1/2")));
        }
        Ok(HyperParams { a, s })
    }

    /// The `s >= 1/2` branch for a tail coefficient `w <= 1/8`.
    pub fn from_w(a: f64, w: f64) -> Result<Self> {
        if !(w <= 0.125) {
            return Err(Error::Parameter(format!("w = {w} exceeds 1/8")));
        }
        Self::new(a, 0.5 * (1.0 + (1.0 - 8.0 * w).sqrt()))
    }

    pub fn w(&self) -> f64 {
        0.5 * (self.s - self.s * self.s)
    }

    pub fn b1(&self) -> f64 {
        hyper_b(self.a, self.s, 1).expect("parameters validated")
    }

    pub fn seq(&self) -> PotentialSeq {
        PotentialSeq::hyper(self.a, self.s).expect("parameters validated")
    }
}

/// `2F1(α, β; γ; 1 - y)` with `y = e^u`.
fn f_at(alpha: f64, beta: f64, gamma: f64, u: f64) -> Result<Scaled> {
    let y = u.exp();
    hyp2f1_scaled(alpha, beta, gamma, -u.exp_m1(), y)
}

/// `u = ln(1 - rho^-2)` for `rho = 1 + eps`, eps > 0.
fn u_of_eps(eps: f64) -> f64 {
    // 1 - rho^-2 = eps (2 + eps) / (1 + eps)²
    eps.ln() + (2.0 + eps).ln() - 2.0 * eps.ln_1p()
}

/// `rho - 1` from `u`.
fn eps_of_u(u: f64) -> f64 {
    // rho = (1 - y)^{-1/2}
    (-0.5 * (-u.exp()).ln_1p()).exp_m1()
}

fn check_rho(rho: f64) -> Result<()> {
    if rho >= 1.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("rho = {rho} must be finite and >= 1")))
    }
}

/// `F(a, a+1/2; 2a+s; z)` and `F(a-1/2, a; 2a+s-1; z)`.
fn base_pair(hp: &HyperParams, u: f64) -> Result<(Scaled, Scaled)> {
    let (a, s) = (hp.a, hp.s);
    Ok((f_at(a, a + 0.5, 2.0 * a + s, u)?, f_at(a - 0.5, a, 2.0 * a + s - 1.0, u)?))
}

fn divergent_to_regime(e: Error, what: &str) -> Error {
    match e {
        Error::Divergent { .. } => Error::Regime(format!("{what} diverges at rho = 1 for s = 1/2")),
        other => other,
    }
}

/// `w_1(rho)` as a ratio of two Gauss functions in `rho^-2`.
pub fn w1_closed(hp: &HyperParams, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    let (a, s) = (hp.a, hp.s);
    if rho == 1.0 {
        let num = hyp2f1_scaled(a, a + 0.5, 2.0 * a + s, 1.0, 0.0);
        let den = hyp2f1_scaled(a - 0.5, a, 2.0 * a + s - 1.0, 1.0, 0.0);
        let (num, den) = (num.map_err(|e| divergent_to_regime(e, "w_1"))?, den.map_err(|e| divergent_to_regime(e, "w_1"))?);
        return Ok((num.ln_abs() - den.ln_abs()).exp());
    }
    let (num, den) = base_pair(hp, u_of_eps(rho - 1.0))?;
    Ok((num.ln_abs() - den.ln_abs() - rho.ln()).exp())
}

/// `ln w_p(rho)`, p >= 1, rho >= 1.
pub fn ln_wp_closed(hp: &HyperParams, rho: f64, p: usize) -> Result<f64> {
    check_rho(rho)?;
    if p == 0 || p > MAX_INDEX {
        return Err(Error::Parameter(format!("index p = {p} outside 1..={MAX_INDEX}")));
    }
    let (a, s) = (hp.a, hp.s);
    let pf = p as f64;
    let (alpha, beta, gamma) = (a + (pf - 1.0) / 2.0, a + pf / 2.0, 2.0 * a + pf + s - 1.0);
    let (num, den) = if rho == 1.0 {
        (
            hyp2f1_scaled(alpha, beta, gamma, 1.0, 0.0),
            hyp2f1_scaled(a - 0.5, a, 2.0 * a + s - 1.0, 1.0, 0.0),
        )
    } else {
        let u = u_of_eps(rho - 1.0);
        (f_at(alpha, beta, gamma, u), f_at(a - 0.5, a, 2.0 * a + s - 1.0, u))
    };
    let (num, den) = (num.map_err(|e| divergent_to_regime(e, "w_p"))?, den.map_err(|e| divergent_to_regime(e, "w_p"))?);
    let const_part = ln_gamma_combination(&[s - 1.0 + 2.0 * a, s + 2.0 * a], &[2.0 * a, 2.0 * s + 2.0 * a - 1.0]);
    let p_part = ln_gamma_combination(
        &[2.0 * a + pf - 1.0, 2.0 * s + 2.0 * a + pf - 2.0],
        &[s + pf - 2.0 + 2.0 * a, s + pf - 1.0 + 2.0 * a],
    );
    Ok(std::f64::consts::LN_2 - pf * (2.0 * rho).ln() + num.ln_abs() - den.ln_abs() + 0.5 * (const_part + p_part))
}

/// `w_p(rho)`; underflows to zero far out at large `rho`.
pub fn wp_rho_closed(hp: &HyperParams, rho: f64, p: usize) -> Result<f64> {
    Ok(ln_wp_closed(hp, rho, p)?.exp())
}

/// `w_p(1)` in elementary gamma form.
pub fn wp_critical(hp: &HyperParams, p: usize) -> Result<f64> {
    if p == 0 {
        return Err(Error::Parameter("index p must be at least 1".into()));
    }
    let (a, s) = (hp.a, hp.s);
    let pf = p as f64;
    let ln = -(a + s - 1.0).ln()
        + 0.5 * ((2.0 * a + pf + s - 2.0).ln() + (2.0 * a + s - 1.0).ln())
        + 0.5 * ln_gamma_combination(&[2.0 * a + 2.0 * s - 1.0], &[2.0 * a])
        + 0.5 * ln_gamma_combination(&[2.0 * a + pf - 1.0], &[2.0 * a + 2.0 * s + pf - 2.0]);
    Ok(ln.exp())
}

/// Critical contact weight in gamma form, valid for all `s >= 1/2`.
pub fn b0c_closed(hp: &HyperParams) -> f64 {
    let (a, s) = (hp.a, hp.s);
    0.5 * ln_gamma_combination(&[a + s - 1.0, a + 0.5], &[a, s + a - 0.5]).exp()
}

/// `b0` as a function of `u = ln(1 - rho^-2)`.
fn b0_of_u(hp: &HyperParams, b1: f64, u: f64) -> Result<f64> {
    let (num, den) = base_pair(hp, u)?;
    // z F(a, a+1/2; 2a+s; z) / (4 b1 F(a-1/2, a; 2a+s-1; z))
    Ok((num.ln_abs() - den.ln_abs() + (-u.exp()).ln_1p()).exp() / (4.0 * b1))
}

/// `u = ln(1 - rho(b0)^-2)` solving the implicit equation.
fn solve_u(hp: &HyperParams, b0: f64) -> Result<f64> {
    if !(b0 > 0.0 && b0.is_finite()) {
        return Err(Error::Parameter(format!("contact weight b0 = {b0} must be positive and finite")));
    }
    let b0c = b0c_closed(hp);
    if b0 >= b0c {
        return Err(Error::Regime(format!("b0 = {b0} is not below the critical value {b0c}")));
    }
    let b1 = hp.b1();
    let g = |u: f64| -> Result<f64> { Ok(b0_of_u(hp, b1, u)? - b0) };
    let mut hi = -1e-3;
    let mut g_hi = g(hi)?;
    if g_hi > 0.0 {
        return Err(Error::Convergence(format!("b0 = {b0} too small to bracket rho")));
    }
    let mut lo = -1.0;
    let mut g_lo = g(lo)?;
    while g_lo < 0.0 {
        hi = lo;
        g_hi = g_lo;
        lo *= 2.0;
        if lo < LN_Y_FLOOR {
            return Err(Error::Resource(format!(
                "b0 = {b0} is closer to b0c than 1 - rho^-2 = e^{LN_Y_FLOOR} resolves"
            )));
        }
        g_lo = g(lo)?;
    }
    illinois(g, lo, hi, g_lo, g_hi, 1e-15 * lo.abs())
}

/// `rho(b0) - 1` for `0 < b0 < b0c`.
pub fn eps_closed(hp: &HyperParams, b0: f64) -> Result<f64> {
    Ok(eps_of_u(solve_u(hp, b0)?))
}

/// `rho(b0)` for `0 < b0 < b0c`.
pub fn rho_closed(hp: &HyperParams, b0: f64) -> Result<f64> {
    Ok(1.0 + eps_closed(hp, b0)?)
}

/// Residual `F(a, a+1/2; 2a+s; z) - 4 rho² b0 b1 F(a-1/2, a; 2a+s-1; z)`
/// of the implicit equation, relative to its first term.
pub fn implicit_residual(hp: &HyperParams, b0: f64, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    let (num, den) = base_pair(hp, u_of_eps(rho - 1.0))?;
    let rhs = (den.ln_abs() + 2.0 * rho.ln() + (4.0 * b0 * hp.b1()).ln() - num.ln_abs()).exp();
    Ok(1.0 - rhs)
}

/// `ln m` at `u`, from the ratio form of the return density.
fn ln_m_of_u(hp: &HyperParams, u: f64) -> Result<f64> {
    let (a, s) = (hp.a, hp.s);
    let (f0, g0) = base_pair(hp, u)?;
    let f1 = f_at(a + 1.0, a + 1.5, 2.0 * a + s + 1.0, u)?;
    let g1 = f_at(a + 0.5, a + 1.0, 2.0 * a + s, u)?;
    let ln_z = (-u.exp()).ln_1p();
    // 2 + 2z (f1/f0) a(a+1/2)/(2a+s) - 2z (g1/g0) a(a-1/2)/(2a+s-1)
    let plus = f1.div(f0).scale_ln(ln_z + (2.0 * a * (a + 0.5) / (2.0 * a + s)).ln());
    let c2 = 2.0 * a * (a - 0.5) / (2.0 * a + s - 1.0);
    let minus = g1.div(g0).scale_ln(ln_z + c2.abs().ln());
    // c2 < 0 for a < 1/2 turns the subtraction into an addition
    let minus = if c2 < 0.0 { minus } else { Scaled { m: -minus.m, e: minus.e } };
    let denom = if c2 == 0.0 { Scaled::from_f64(2.0).add(plus) } else { Scaled::from_f64(2.0).add(plus).add(minus) };
    if denom.signum() <= 0.0 {
        return Err(Error::Convergence(format!("return-density denominator lost positivity at ln y = {u}")));
    }
    Ok(-denom.ln_abs())
}

/// `ln m(b0)` for `0 < b0 < b0c`; stays finite where `m` underflows.
pub fn ln_m_closed(hp: &HyperParams, b0: f64) -> Result<f64> {
    ln_m_of_u(hp, solve_u(hp, b0)?)
}

/// `Σ_p w_p(1 + eps)²` for eps > 0, from `m = 1 / (1 + S / (4 b0 b1))`.
pub fn s2_closed(hp: &HyperParams, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Parameter(format!("rho - 1 = {eps} must be positive and finite")));
    }
    let u = u_of_eps(eps);
    let b1 = hp.b1();
    let b0 = b0_of_u(hp, b1, u)?;
    Ok(4.0 * b0 * b1 * (-ln_m_of_u(hp, u)?).exp_m1())
}

/// Return density `m(b0)` for `0 < b0 < b0c`.
pub fn m_closed(hp: &HyperParams, b0: f64) -> Result<f64> {
    Ok(ln_m_closed(hp, b0)?.exp())
}

/// `m(b0)` as `b0 -> b0c` from below, evaluated at `1 - rho^-2 = e^-700`.
/// Positive only in the first-order regime `s > 3/2`.
pub fn m_critical_closed(hp: &HyperParams) -> Result<f64> {
    Ok(ln_m_of_u(hp, LN_Y_FLOOR)?.exp())
}

/// Flat chain (`s = 1`): `(rho, m)`.
pub fn special_s1(b0: f64) -> Result<(f64, f64)> {
    if !(b0 > 0.0 && b0 < 0.5) {
        return Err(Error::Domain { func: "special_s1", detail: format!("b0 = {b0} outside (0, 1/2)") });
    }
    Ok((0.5 / (b0 * (1.0 - b0)).sqrt(), (0.5 - b0) / (1.0 - b0)))
}

/// `lim m(b0) / (1/2 - b0)` as `b0 -> 1/2` for the flat chain.
pub const S1_AMPLITUDE: f64 = 2.0;

/// The `s = 2` family in elementary form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecialS2 {
    pub rho: f64,
    pub m: f64,
    /// `lim m` at the critical point, `1/(4a + 2)`.
    pub limit: f64,
}

/// `s = 2`: explicit `rho(b0)`, `m(b0)` and the jump.
pub fn special_s2(a: f64, b0: f64) -> Result<SpecialS2> {
    if !(a > 0.75) {
        return Err(Error::Domain { func: "special_s2", detail: format!("a = {a} must exceed 3/4") });
    }
    let c = a / (2.0 * a + 1.0);
    if !(b0 > 0.0 && b0 < c) {
        return Err(Error::Domain { func: "special_s2", detail: format!("b0 = {b0} outside (0, {c})") });
    }
    let g = c - b0;
    let c2 = c * c;
    let x = (c2 * g * g + g * (c - 2.0 * c2)).sqrt() + c * g;
    // the displayed expression is ln rho: rho^-2 = 1 - x²/c²
    let y = x * x / c2;
    let rho = 1.0 / (1.0 - y).sqrt();
    let root = g.sqrt() * (c2 - (b0 + 2.0) * c + 1.0).sqrt();
    let sc = c.sqrt();
    let num = sc * (4.0 * b0 * c * c2 - (8.0 * b0 * b0 + 6.0 * b0) * c2 + (4.0 * b0.powi(3) + 6.0 * b0 * b0 + 3.0 * b0) * c
        - 3.0 * b0 * b0)
        + root * (4.0 * b0 * c2 - (4.0 * b0 * b0 + 2.0 * b0) * c + b0);
    let den = sc
        * (4.0 * c2 * c2 - (12.0 * b0 + 8.0) * c * c2 + (12.0 * b0 * b0 + 16.0 * b0 + 4.0) * c2
            - (4.0 * b0.powi(3) + 8.0 * b0 * b0 + 8.0 * b0) * c
            + 4.0 * b0 * b0)
        + root * (4.0 * c * c2 - (8.0 * b0 + 4.0) * c2 + (4.0 * b0 * b0 + 4.0 * b0) * c - 2.0 * b0);
    Ok(SpecialS2 { rho, m: -num / den, limit: 1.0 / (4.0 * a + 2.0) })
}

/// Singular behavior of `m` as `b0` approaches `b0c` from below.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CriticalLaw {
    /// `m ~ (b0c - b0)^exponent`, `1/2 < s < 3/2`.
    Power { exponent: f64 },
    /// `m ~ coefficient / ln(b0c - b0)` at `s = 3/2`.
    Log { coefficient: f64 },
    /// `m ~ prefactor exp(-d / (b0c - b0))` scale at `s = 1/2`.
    Essential { d: f64, prefactor: f64 },
    /// Jump of `m` at `b0c`, `s > 3/2`.
    FirstOrder { jump: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalBehavior {
    pub law: CriticalLaw,
    /// `1 - sqrt(1 - 8w)/2`.
    pub theta: f64,
}

impl CriticalBehavior {
    pub fn tag(&self) -> &'static str {
        match self.law {
            CriticalLaw::Power { .. } => "power",
            CriticalLaw::Log { .. } => "log",
            CriticalLaw::Essential { .. } => "essential",
            CriticalLaw::FirstOrder { .. } => "firstorder",
        }
    }
}

pub fn critical_behavior(hp: &HyperParams) -> Result<CriticalBehavior> {
    let (a, s) = (hp.a, hp.s);
    let r = roots(1.0, hp.w())?;
    let theta = 1.0 - r.delta / 2.0;
    let law = if (s - 0.5).abs() < MARGINAL_SNAP {
        let d = (2.0 * a - 0.5) / (4.0 * hp.b1() * (a - 0.5).powi(2));
        CriticalLaw::Essential { d, prefactor: (a - 0.5) * d * d }
    } else if (s - 1.5).abs() < MARGINAL_SNAP {
        CriticalLaw::Log { coefficient: -1.0 / (2.0 * a + 0.5) }
    } else if s < 1.5 {
        let exponent = (1.5 - s) / (s - 0.5);
        let via_theta = theta / (1.0 - theta);
        if (exponent - via_theta).abs() > 1e-12 * exponent.max(1.0) {
            return Err(Error::Convergence(format!("exponent {exponent} disagrees with θ/(1-θ) = {via_theta}")));
        }
        CriticalLaw::Power { exponent }
    } else {
        CriticalLaw::FirstOrder { jump: 1.0 / (2.0 + 2.0 * a / (s - 1.5)) }
    };
    Ok(CriticalBehavior { law, theta })
}
