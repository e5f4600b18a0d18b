//! Backward-ratio computation of the minimal solution of
//! `R w = rho w - 1_{p=1}`.
//!
//! The ratios `t_n = w_n / w_{n+1}` are carried as `d_n = t_n - 1`, which
//! keeps full relative precision when `rho - 1` and `1 - b_n` are tiny.

use crate::error::{Error, Result};
use crate::potentials::PotentialSeq;

use super::roots::{alpha_minus_real, k_of_eps};

/// Seed-doubling and accuracy controls for [`minimal_solution_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Change of `ln w_1` and `ln w_P` between seed doublings that
    /// certifies convergence.
    pub tol: f64,
    /// Number of values `w_1..w_P` kept in the result.
    pub p_max: usize,
    pub min_seed: usize,
    pub max_seed: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { tol: 1e-13, p_max: 1024, min_seed: 1 << 10, max_seed: 1 << 24 }
    }
}

/// Consecutive seed doublings with a sign failure before the equation is
/// declared to have no positive solution.
const SIGN_FAILURES: usize = 3;

/// The minimal positive solution `w_p(rho)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimalSolution {
    pub rho: f64,
    /// `rho - 1`, carried separately for accuracy near criticality.
    pub eps: f64,
    /// `t_p = w_p / w_{p+1}` for p = 1..=P (index p - 1).
    pub ratios: Vec<f64>,
    /// `w_p` for p = 1..=P (index p - 1); may underflow far out.
    pub values: Vec<f64>,
    /// `ln w_p` for p = 1..=P.
    pub log_values: Vec<f64>,
    pub w1: f64,
    pub seed_index: usize,
    /// Seed doubling met the tolerance. Unconverged runs are reported as
    /// errors, so this is always set on a returned value.
    pub converged: bool,
}

impl MinimalSolution {
    pub fn cutoff(&self) -> usize {
        self.values.len()
    }

    /// `w_p`, 1-based.
    pub fn w(&self, p: usize) -> f64 {
        self.values[p - 1]
    }

    /// Largest residual of the recurrence relative to `rho w_p`, p < P.
    pub fn max_residual(&self, bseq: &PotentialSeq) -> f64 {
        let mut worst = 0.0f64;
        for p in 1..self.values.len() {
            let lb = bseq.log_b(p);
            // every term divided by w_p
            let up = (-0.5 * (lb + bseq.log_b(p + 1))).exp() / (2.0 * self.ratios[p - 1]);
            let down = if p == 1 {
                1.0 / self.w1
            } else {
                self.ratios[p - 2] * (-0.5 * (lb + bseq.log_b(p - 1))).exp() / 2.0
            };
            worst = worst.max((down + up - self.rho).abs() / self.rho);
        }
        worst
    }
}

/// One backward sweep from seed index `m`: `d_n` for n = 1..m-1 and `w_1`.
pub(crate) struct Sweep {
    pub d: Vec<f64>,
    pub w1: f64,
}

pub(crate) enum SweepOutcome {
    Ok(Sweep),
    SignFailure(String),
}

fn sweep(bseq: &PotentialSeq, eps: f64, k: f64, alpha_m: f64, m: usize) -> SweepOutcome {
    bseq.with_log_b(m + 1, |lb| {
        let l = |n: usize| lb[n - 1];
        // d[p - 1] = d_p
        let mut d = vec![0.0; m];
        // t_m ≈ x_+ ((m + 1)/m)^{-α₋}
        let mut dn = (k - alpha_m * (1.0 / m as f64).ln_1p()).exp_m1();
        d[m - 1] = dn;
        for n in (2..=m).rev() {
            let (ln_prev, ln_n, ln_next) = (l(n - 1), l(n), l(n + 1));
            let half_sum = 0.5 * (ln_n + ln_prev);
            let half_diff = 0.5 * (ln_prev - ln_next);
            let a = half_sum.exp();
            let b = half_diff.exp();
            // t_{n-1} = 2 rho sqrt(b_n b_{n-1}) - sqrt(b_{n-1}/b_{n+1}) / t_n
            let next = 2.0 * eps * a + 2.0 * half_sum.exp_m1() - half_diff.exp_m1() + b * dn / (1.0 + dn);
            if !(next > -1.0) {
                return SweepOutcome::SignFailure(format!("t_{} <= 0 with seed index {m}", n - 1));
            }
            dn = next;
            d[n - 2] = dn;
        }
        let t1 = 1.0 + dn;
        // w_1 (rho - 1/(2 sqrt(b_1 b_2) t_1)) = 1
        let denom = (1.0 + eps) - (-0.5 * (l(1) + l(2))).exp() / (2.0 * t1);
        if !(denom > 0.0) {
            return SweepOutcome::SignFailure(format!("rho - 1/(2 sqrt(b1 b2) t1) = {denom:e} with seed index {m}"));
        }
        SweepOutcome::Ok(Sweep { d, w1: 1.0 / denom })
    })
}

/// `ln w_p` for p = 1..=count from a sweep.
fn log_values(sw: &Sweep, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    let mut lw = sw.w1.ln();
    for p in 1..=count {
        out.push(lw);
        lw -= sw.d[p - 1].ln_1p();
    }
    out
}

/// `ln w_p` for p = 1..=check from a certified sweep, after removing the leading algebraic seed error.
pub(crate) struct Converged {
    pub log_w: Vec<f64>,
    pub seed_index: usize,
}

/// Runs seed doublings until `w_1` and `w_check` settle.
///
/// Near `rho = 1` the seed error decays like `M^{-(1 + Δ)}`; one Richardson
/// step with that exponent is applied to every `ln w_p`. Away from
/// criticality the raw differences are already exponentially small and the
/// correction is negligible.
pub(crate) fn converged_sweep(bseq: &PotentialSeq, eps: f64, check: usize, cfg: &SolverConfig) -> Result<Converged> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::Parameter(format!("rho - 1 = {eps} must be finite and >= 0")));
    }
    let w = bseq.tail().w;
    let k = k_of_eps(eps);
    let alpha_m = alpha_minus_real(w);
    let order = 1.0 + (1.0 - 8.0 * w).max(0.0).sqrt();
    let gain = 1.0 / (order.exp2() - 1.0);
    let check = check.max(2);
    let mut m = cfg.min_seed.max(2 * check).max(16).next_power_of_two();
    let mut raw_prev: Option<Vec<f64>> = None;
    let mut ext_prev: Option<Vec<f64>> = None;
    let mut failures = 0usize;
    loop {
        match sweep(bseq, eps, k, alpha_m, m) {
            SweepOutcome::SignFailure(reason) => {
                failures += 1;
                raw_prev = None;
                ext_prev = None;
                if failures >= SIGN_FAILURES || 2 * m > cfg.max_seed {
                    return Err(Error::NotTransient { eps, reason });
                }
            }
            SweepOutcome::Ok(sw) => {
                failures = 0;
                let raw = log_values(&sw, check);
                let ext: Option<Vec<f64>> =
                    raw_prev.as_ref().map(|rp| raw.iter().zip(rp).map(|(r, p)| r + (r - p) * gain).collect());
                if let (Some(e), Some(ep)) = (&ext, &ext_prev) {
                    let change = (e[0] - ep[0]).abs().max((e[check - 1] - ep[check - 1]).abs());
                    if change < cfg.tol {
                        return Ok(Converged { log_w: e.clone(), seed_index: m });
                    }
                }
                if 2 * m > cfg.max_seed {
                    let change = match (&ext, &ext_prev) {
                        (Some(e), Some(ep)) => format!(", last change of ln w_1 {:e}", (e[0] - ep[0]).abs()),
                        _ => String::new(),
                    };
                    return Err(Error::Convergence(format!(
                        "w_1 not settled at seed index {m} (rho - 1 = {eps:e}){change}"
                    )));
                }
                raw_prev = Some(raw);
                ext_prev = ext;
            }
        }
        m *= 2;
    }
}

/// Minimal solution at `rho = 1 + eps`.
pub fn minimal_solution_eps(bseq: &PotentialSeq, eps: f64, cfg: &SolverConfig) -> Result<MinimalSolution> {
    let p = cfg.p_max.max(2);
    let c = converged_sweep(bseq, eps, p + 1, cfg)?;
    let lv = &c.log_w;
    Ok(MinimalSolution {
        rho: 1.0 + eps,
        eps,
        ratios: (0..p).map(|i| (lv[i] - lv[i + 1]).exp()).collect(),
        values: lv[..p].iter().map(|l| l.exp()).collect(),
        log_values: lv[..p].to_vec(),
        w1: lv[0].exp(),
        seed_index: c.seed_index,
        converged: true,
    })
}

/// Minimal solution with an explicit configuration.
pub fn minimal_solution_with(bseq: &PotentialSeq, rho: f64, cfg: &SolverConfig) -> Result<MinimalSolution> {
    if !(rho >= 1.0) {
        return Err(Error::Parameter(format!("rho = {rho} must be >= 1")));
    }
    minimal_solution_eps(bseq, rho - 1.0, cfg)
}

/// Minimal positive solution of `R w = rho w - 1_{p=1}` for p = 1..=1024.
pub fn minimal_solution(bseq: &PotentialSeq, rho: f64, tol: f64) -> Result<MinimalSolution> {
    minimal_solution_with(bseq, rho, &SolverConfig { tol, ..SolverConfig::default() })
}
