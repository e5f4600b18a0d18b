use crate::error::{Error, Result};
use crate::numeric::illinois;
use crate::potentials::PotentialSeq;

use super::roots::k_of_eps;
use super::solver::{converged_sweep, Converged, SolverConfig};

/// Tolerance on `ln w_1` used for the critical line. The seed error at
/// `rho = 1` is algebraic, so this is looser than the default.
pub(crate) const CRITICAL_TOL: f64 = 1e-12;

/// Relative closeness to `b0c` treated as exactly critical.
const CRITICAL_SNAP: f64 = 1e-13;

/// Relative weight of the neglected tail in `Σ w_p²`.
const TAIL_TOL: f64 = 1e-13;

const EPS_FLOOR: f64 = 1e-40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Localized,
    Critical,
    Delocalized,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Localized => "localized",
            Regime::Critical => "critical",
            Regime::Delocalized => "delocalized",
        }
    }
}

/// Thermodynamic state at one contact weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub b0: f64,
    /// `+inf` when there is no transition.
    pub b0c: f64,
    pub rho: f64,
    pub eps: f64,
    /// `-ln rho`.
    pub gibbs: f64,
    /// Return density `m`.
    pub m: f64,
    pub regime: Regime,
}

fn check_b0(b0: f64) -> Result<()> {
    if b0 > 0.0 && b0.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("contact weight b0 = {b0} must be positive and finite")))
    }
}

/// `w_1` at `rho = 1 + eps`.
fn w1_at(bseq: &PotentialSeq, eps: f64) -> Result<f64> {
    let tol = if eps == 0.0 { CRITICAL_TOL } else { SolverConfig::default().tol };
    let cfg = SolverConfig { tol, ..SolverConfig::default() };
    Ok(converged_sweep(bseq, eps, 2, &cfg)?.log_w[0].exp())
}

/// The contact weight `b0` for which `rho = 1 + eps` is the largest root.
pub fn b0_of_eps(bseq: &PotentialSeq, eps: f64) -> Result<f64> {
    Ok(w1_at(bseq, eps)? / (4.0 * (1.0 + eps) * bseq.b(1)))
}

/// Critical contact weight; `+inf` when no positive solution exists at
/// `rho = 1`.
pub fn b0_critical(bseq: &PotentialSeq) -> Result<f64> {
    match b0_of_eps(bseq, 0.0) {
        Ok(v) => Ok(v),
        Err(Error::NotTransient { .. }) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

fn below_critical(b0: f64, b0c: f64) -> Result<()> {
    if b0 < b0c * (1.0 - CRITICAL_SNAP) {
        Ok(())
    } else {
        Err(Error::Regime(format!("b0 = {b0} is not below the critical value {b0c}")))
    }
}

/// `rho - 1` as a function of `b0 < b0c`.
pub fn eps_of_b0(bseq: &PotentialSeq, b0: f64) -> Result<f64> {
    check_b0(b0)?;
    let b0c = b0_critical(bseq)?;
    below_critical(b0, b0c)?;
    eps_of_b0_given(bseq, b0)
}

/// Requires `b0 < b0c`.
fn eps_of_b0_given(bseq: &PotentialSeq, b0: f64) -> Result<f64> {
    // g decreases in eps, from b0c - b0 > 0 towards -b0. Without a
    // transition, eps below the spectral edge has no positive solution;
    // that side counts as g = +inf, which degrades Illinois to bisection.
    let g = |eps: f64| -> Result<f64> {
        match b0_of_eps(bseq, eps) {
            Ok(v) => Ok(v - b0),
            Err(Error::NotTransient { .. }) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    };
    let mut hi = 1.0;
    let mut g_hi = g(hi)?;
    while g_hi > 0.0 {
        hi *= 16.0;
        if hi > 1e12 {
            return Err(Error::Convergence(format!("no bracket for rho(b0) at b0 = {b0}")));
        }
        g_hi = g(hi)?;
    }
    let mut lo = hi / 16.0;
    let mut g_lo = g(lo)?;
    while g_lo < 0.0 {
        hi = lo;
        g_hi = g_lo;
        lo /= 1024.0;
        if lo < EPS_FLOOR {
            return Ok(hi);
        }
        g_lo = g(lo)?;
    }
    let u = illinois(|u| g(u.exp()), lo.ln(), hi.ln(), g_lo, g_hi, 1e-14)?;
    if g_lo.is_infinite() {
        // the bracket may have closed on the edge instead of on a root
        let at = g(u.exp())?;
        if !(at.abs() <= 1e-8 * b0) {
            return Err(Error::Regime(format!(
                "b0 = {b0} is not reached above the spectral edge rho - 1 = {:e}",
                u.exp()
            )));
        }
    }
    Ok(u.exp())
}

/// Largest eigenvalue `rho > 1` of the full transfer matrix at contact
/// weight `b0 < b0c`. On and above the critical line this is a regime error.
pub fn rho_of_b0(bseq: &PotentialSeq, b0: f64) -> Result<f64> {
    Ok(1.0 + eps_of_b0(bseq, b0)?)
}

/// Free energy `-ln rho`, zero for `b0 >= b0c`.
pub fn gibbs(bseq: &PotentialSeq, b0: f64) -> Result<f64> {
    match eps_of_b0(bseq, b0) {
        Ok(eps) => Ok(-eps.ln_1p()),
        Err(Error::Regime(_)) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// `ln w_p` for p = 1..=P together with the neglected tail of `Σ w_p²`.
pub(crate) struct SquareSum {
    pub log_w: Vec<f64>,
    pub sum: f64,
}

fn log_sum_exp2(log_w: &[f64]) -> f64 {
    let top = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = log_w.iter().map(|l| (2.0 * (l - top)).exp()).sum();
    s * (2.0 * top).exp()
}

pub(crate) fn square_sum(bseq: &PotentialSeq, eps: f64) -> Result<SquareSum> {
    let defaults = SolverConfig::default();
    if eps == 0.0 {
        let roots = super::roots::roots_eps(0.0, bseq.tail().w)?;
        if roots.alpha_minus >= -0.5 {
            return Ok(SquareSum { log_w: Vec::new(), sum: f64::INFINITY });
        }
        let p = 1 << 16;
        let cfg = SolverConfig { tol: CRITICAL_TOL, ..defaults };
        let Converged { log_w, .. } = converged_sweep(bseq, 0.0, p, &cfg)?;
        // w_p ~ p^γ beyond the table; γ from the last octave
        let gamma = (log_w[p - 1] - log_w[p / 2 - 1]) / std::f64::consts::LN_2;
        let last = (2.0 * log_w[p - 1]).exp();
        let tail = last * (p as f64 / (-2.0 * gamma - 1.0) - 0.5);
        let sum = log_sum_exp2(&log_w) + tail;
        return Ok(SquareSum { log_w, sum });
    }
    let k = k_of_eps(eps);
    let mut p = ((18.0 / k).ceil() as usize).max(defaults.p_max);
    loop {
        if 2 * p > defaults.max_seed {
            return Err(Error::Resource(format!("Σ w_p² at rho - 1 = {eps:e} needs more than {p} terms")));
        }
        let Converged { log_w, .. } = converged_sweep(bseq, eps, p, &defaults)?;
        let sum = log_sum_exp2(&log_w);
        let x2 = (-2.0 * k).exp();
        let tail = (2.0 * log_w[p - 1]).exp() * x2 / -(-2.0 * k).exp_m1();
        if tail <= TAIL_TOL * sum {
            return Ok(SquareSum { log_w, sum: sum + tail });
        }
        p *= 2;
    }
}

fn density_from_sum(b0: f64, b1: f64, sum: f64) -> f64 {
    if sum.is_infinite() {
        0.0
    } else {
        1.0 / (1.0 + sum / (4.0 * b0 * b1))
    }
}

/// Return density `m(b0)`: the inverse of `1 + Σ w_p² / (4 b0 b1)` in the
/// localized phase, zero in the delocalized phase, and the limiting value
/// on the critical line.
pub fn return_density(bseq: &PotentialSeq, b0: f64) -> Result<f64> {
    Ok(phase_point(bseq, b0)?.m)
}

/// Full thermodynamic state at `b0`.
pub fn phase_point(bseq: &PotentialSeq, b0: f64) -> Result<PhasePoint> {
    check_b0(b0)?;
    phase_point_given(bseq, b0, b0_critical(bseq)?)
}

/// [`phase_point`] with a precomputed critical weight, for sweeps along a
/// fixed sequence.
pub fn phase_point_given(bseq: &PotentialSeq, b0: f64, b0c: f64) -> Result<PhasePoint> {
    check_b0(b0)?;
    let regime = if b0 < b0c * (1.0 - CRITICAL_SNAP) {
        Regime::Localized
    } else if b0 <= b0c * (1.0 + CRITICAL_SNAP) {
        Regime::Critical
    } else {
        Regime::Delocalized
    };
    let (eps, m) = match regime {
        Regime::Delocalized => (0.0, 0.0),
        Regime::Critical => (0.0, density_from_sum(b0, bseq.b(1), square_sum(bseq, 0.0)?.sum)),
        Regime::Localized => {
            let eps = eps_of_b0_given(bseq, b0)?;
            (eps, density_from_sum(b0, bseq.b(1), square_sum(bseq, eps)?.sum))
        }
    };
    Ok(PhasePoint { b0, b0c, rho: 1.0 + eps, eps, gibbs: -eps.ln_1p(), m, regime })
}

/// The positive-recurrent walk equivalent to the localized chain.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizedWalk {
    pub rho: f64,
    pub b0: f64,
    /// `v_0 = 1`, `v_p = w_p / (2 sqrt(b0 b1))`.
    pub v: Vec<f64>,
    /// Up-step probabilities `p_n`, n = 0..len; `p_0 = 1`.
    pub p_up: Vec<f64>,
    /// Down-step probabilities `q_n = v_{n-1} / (2 rho sqrt(b_n b_{n-1}) v_n)`,
    /// computed separately from `p_up`; `q_0 = 0`.
    pub q_down: Vec<f64>,
    /// Stationary law `v_n² / Σ v²`.
    pub nu: Vec<f64>,
    /// Limit of `p_n` at large n: `x_- / (2 rho)`.
    pub p_limit: f64,
}

impl LocalizedWalk {
    pub fn len(&self) -> usize {
        self.p_up.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p_up.is_empty()
    }

    /// `p_n`, with the limiting value beyond the table.
    pub fn p(&self, n: usize) -> f64 {
        self.p_up.get(n).copied().unwrap_or(self.p_limit)
    }

    /// `q_n`, with the limiting value `1 - p_limit` beyond the table.
    pub fn q(&self, n: usize) -> f64 {
        self.q_down.get(n).copied().unwrap_or(1.0 - self.p_limit)
    }
}

/// The localized walk at `b0 < b0c`.
pub fn localized_walk(bseq: &PotentialSeq, b0: f64) -> Result<LocalizedWalk> {
    check_b0(b0)?;
    let b0c = b0_critical(bseq)?;
    below_critical(b0, b0c)?;
    let eps = eps_of_b0_given(bseq, b0)?;
    let rho = 1.0 + eps;
    let SquareSum { log_w, sum } = square_sum(bseq, eps)?;
    let b1 = bseq.b(1);
    let ln_scale = -(2.0 * (b0 * b1).sqrt()).ln();
    let len = log_w.len();
    let mut v = Vec::with_capacity(len + 1);
    v.push(1.0);
    v.extend(log_w.iter().map(|l| (l + ln_scale).exp()));
    let total = 1.0 + sum / (4.0 * b0 * b1);
    let nu: Vec<f64> = v.iter().map(|x| x * x / total).collect();
    let mut p_up = Vec::with_capacity(len);
    p_up.push(1.0);
    for n in 1..len {
        // p_n = v_{n+1} / (2 rho sqrt(b_n b_{n+1}) v_n)
        let ln_p = log_w[n] - log_w[n - 1] - 0.5 * (bseq.log_b(n) + bseq.log_b(n + 1)) - (2.0 * rho).ln();
        p_up.push(ln_p.exp());
    }
    let ln_v: Vec<f64> = std::iter::once(0.0).chain(log_w.iter().map(|l| l + ln_scale)).collect();
    let ln_b = |n: usize| if n == 0 { b0.ln() } else { bseq.log_b(n) };
    let mut q_down = Vec::with_capacity(len);
    q_down.push(0.0);
    for n in 1..len {
        let ln_q = ln_v[n - 1] - ln_v[n] - 0.5 * (ln_b(n) + ln_b(n - 1)) - (2.0 * rho).ln();
        q_down.push(ln_q.exp());
    }
    let x_minus = (-k_of_eps(eps)).exp();
    Ok(LocalizedWalk { rho, b0, v, p_up, q_down, nu, p_limit: x_minus / (2.0 * rho) })
}
