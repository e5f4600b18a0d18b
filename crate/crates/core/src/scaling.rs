//! Exponent fits near the wetting point and the three-zone profile of
//! `w(1 + eps)`.

use crate::error::{Error, Result};
use crate::hyper::{self, HyperParams};
use crate::numeric::linear_fit;
use crate::potentials::PotentialSeq;
use crate::specfn::bessel_k;
use crate::transfer::{self, SolverConfig};

/// Fitted slopes below this are reported as marginal rather than as
/// exponents.
pub const MARGINAL_SLOPE: f64 = 0.05;

/// `θ` this close to 0 or 1 marks a marginal family.
const MARGINAL_THETA: f64 = 0.05;

/// Anything that yields `Σ w_p(1 + eps)²` and `m(b0)`.
pub trait DensityModel {
    /// Coefficient `w` of the `w / n²` tail.
    fn tail_w(&self) -> f64;
    fn critical_b0(&self) -> Result<f64>;
    /// `Σ_p w_p(1 + eps)²`, eps > 0.
    fn s2(&self, eps: f64) -> Result<f64>;
    /// `ln m(b0)` for `b0 < b0c`.
    fn ln_density(&self, b0: f64) -> Result<f64>;
    /// `lim m(b0)` as `b0 -> b0c` from below.
    fn critical_density(&self) -> Result<f64>;
}

impl DensityModel for PotentialSeq {
    fn tail_w(&self) -> f64 {
        self.tail().w
    }

    fn critical_b0(&self) -> Result<f64> {
        transfer::b0_critical(self)
    }

    fn s2(&self, eps: f64) -> Result<f64> {
        s2_of_eps(self, eps)
    }

    fn ln_density(&self, b0: f64) -> Result<f64> {
        let p = transfer::phase_point(self, b0)?;
        if p.regime != transfer::Regime::Localized {
            return Err(Error::Regime(format!("b0 = {b0} is not below the critical value {}", p.b0c)));
        }
        Ok(p.m.ln())
    }

    fn critical_density(&self) -> Result<f64> {
        let b0c = self.critical_b0()?;
        if !b0c.is_finite() {
            return Err(Error::Regime("no transition".into()));
        }
        transfer::return_density(self, b0c)
    }
}

impl DensityModel for HyperParams {
    fn tail_w(&self) -> f64 {
        self.w()
    }

    fn critical_b0(&self) -> Result<f64> {
        Ok(hyper::b0c_closed(self))
    }

    fn s2(&self, eps: f64) -> Result<f64> {
        hyper::s2_closed(self, eps)
    }

    fn ln_density(&self, b0: f64) -> Result<f64> {
        hyper::ln_m_closed(self, b0)
    }

    fn critical_density(&self) -> Result<f64> {
        hyper::m_critical_closed(self)
    }
}

/// `S(eps) = Σ_p w_p(1 + eps)²` from the transfer solver, tail included.
pub fn s2_of_eps(bseq: &PotentialSeq, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Parameter(format!("rho - 1 = {eps} must be positive and finite")));
    }
    Ok(transfer::phase::square_sum(bseq, eps)?.sum)
}

/// A log-log least-squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentFit {
    /// Small parameter (eps or `b0c - b0`), strictly decreasing.
    pub x: Vec<f64>,
    /// Fitted quantity (`S(eps)` or `m`), as its natural log.
    pub ln_y: Vec<f64>,
    pub slope: f64,
    /// Largest deviation from the fitted line in log-log.
    pub residual: f64,
    /// Predicted exponent, NaN when `θ` is undefined.
    pub reference: f64,
    /// The family sits at `θ ≈ 0` or `θ ≈ 1`, or the slope is too small to
    /// call a power law.
    pub marginal: bool,
}

impl ExponentFit {
    pub fn relative_error(&self) -> f64 {
        ((self.slope - self.reference) / self.reference).abs()
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 6 {
        return Err(Error::Parameter(format!("fit grid needs at least 6 points, got {}", grid.len())));
    }
    if !grid.iter().all(|x| *x > 0.0 && x.is_finite()) {
        return Err(Error::Parameter("fit grid must be positive and finite".into()));
    }
    if !grid.windows(2).all(|w| w[1] < w[0]) {
        return Err(Error::Parameter("fit grid must be strictly decreasing".into()));
    }
    if grid[0] / grid[grid.len() - 1] < 100.0 {
        return Err(Error::Parameter("fit grid must span at least two decades".into()));
    }
    Ok(())
}

/// `θ = 1 - sqrt(1 - 8w) / 2`, or NaN above `w = 1/8`.
fn theta_of_w(w: f64) -> f64 {
    transfer::roots(1.0, w).map(|r| r.theta).unwrap_or(f64::NAN)
}

fn theta_is_marginal(theta: f64) -> bool {
    !(theta > MARGINAL_THETA && theta < 1.0 - MARGINAL_THETA)
}

/// Slope of `-ln S` against `ln eps`, compared with `θ`.
pub fn fit_theta<M: DensityModel + ?Sized>(model: &M, eps_grid: &[f64]) -> Result<ExponentFit> {
    check_grid(eps_grid)?;
    let ln_y = eps_grid.iter().map(|e| Ok(model.s2(*e)?.ln())).collect::<Result<Vec<_>>>()?;
    let lx: Vec<f64> = eps_grid.iter().map(|e| e.ln()).collect();
    let (slope, _, residual) = linear_fit(&lx, &ln_y);
    let theta = theta_of_w(model.tail_w());
    Ok(ExponentFit {
        x: eps_grid.to_vec(),
        ln_y,
        slope: -slope,
        residual,
        reference: theta,
        marginal: -slope < MARGINAL_SLOPE || theta_is_marginal(theta),
    })
}

/// Behaviour of `m` as `b0 -> b0c`.
#[derive(Debug, Clone, PartialEq)]
pub enum OrderParameterLaw {
    /// Continuous transition, `m ~ (b0c - b0)^slope`.
    Exponent(ExponentFit),
    /// First-order transition with `m(b0c⁻) = jump`.
    Jump { jump: f64 },
}

/// Log-log slope of `m` against `b0c - b0`, compared with `θ / (1 - θ)`.
///
/// Below `w = -3/8` the transition is first order and the limiting density
/// is reported instead.
pub fn fit_m_exponent<M: DensityModel + ?Sized>(model: &M, b0c: f64, gap_grid: &[f64]) -> Result<OrderParameterLaw> {
    if !(b0c > 0.0 && b0c.is_finite()) {
        return Err(Error::Regime(format!("no finite critical point (b0c = {b0c})")));
    }
    let w = model.tail_w();
    if w < -0.375 {
        return Ok(OrderParameterLaw::Jump { jump: model.critical_density()? });
    }
    check_grid(gap_grid)?;
    if gap_grid[0] >= b0c {
        return Err(Error::Parameter(format!("largest gap {} exceeds b0c = {b0c}", gap_grid[0])));
    }
    let ln_y = gap_grid.iter().map(|g| model.ln_density(b0c - g)).collect::<Result<Vec<_>>>()?;
    let lx: Vec<f64> = gap_grid.iter().map(|g| g.ln()).collect();
    let (slope, _, residual) = linear_fit(&lx, &ln_y);
    let theta = theta_of_w(w);
    Ok(OrderParameterLaw::Exponent(ExponentFit {
        x: gap_grid.to_vec(),
        ln_y,
        slope,
        residual,
        reference: theta / (1.0 - theta),
        marginal: theta_is_marginal(theta),
    }))
}

/// `n` points from `hi` down to `lo`, equally spaced in `ln`.
pub fn log_grid(hi: f64, lo: f64, n: usize) -> Vec<f64> {
    let (a, b) = (hi.ln(), lo.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Agreement of `w(1 + eps)` with its three asymptotic descriptions.
#[derive(Debug, Clone, PartialEq)]
pub struct ZoneReport {
    pub eps: f64,
    /// `N = floor(eps^{-1/2})`.
    pub n_scale: usize,
    /// Zone 1 is `n <= zone1_end = N / ln(1/eps)`.
    pub zone1_end: usize,
    /// `max |w_n(1 + eps) / w_n(1) - 1|` over zone 1.
    pub zone1: f64,
    /// Bessel order `1/2 - α_-`.
    pub nu: f64,
    /// `max |w_n / (c sqrt(n) K_nu(n sqrt(2 eps))) - 1|` for n in [N/2, 2N],
    /// with `c` matched at n = N.
    pub zone2: f64,
    /// `max |w_{n+1} / w_n - x_-|` over n in [3N, 10N].
    pub zone3: f64,
    /// `|w_{n+1} / w_n - x_-|` at n = 10N.
    pub zone3_at_10n: f64,
}

/// Compares `w(1 + eps)` with its continuity limit, the Bessel profile and
/// the geometric tail.
pub fn zone_check(bseq: &PotentialSeq, eps: f64) -> Result<ZoneReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Parameter(format!("rho - 1 = {eps} must lie in (0, 1)")));
    }
    let r = transfer::roots_eps(eps, bseq.tail().w)?;
    let n_scale = (eps.powf(-0.5).floor() as usize).max(1);
    let zone1_end = ((n_scale as f64 / (1.0 / eps).ln()).floor() as usize).max(1);
    let far = 10 * n_scale + 1;
    let cfg = SolverConfig::default();
    let near = transfer::solver::converged_sweep(bseq, eps, far, &cfg)?.log_w;
    let crit_cfg = SolverConfig { tol: transfer::phase::CRITICAL_TOL, ..cfg };
    let crit = transfer::solver::converged_sweep(bseq, 0.0, zone1_end.max(2), &crit_cfg)?.log_w;
    let lw = |n: usize| near[n - 1];

    let zone1 = (1..=zone1_end).map(|n| (lw(n) - crit[n - 1]).exp_m1().abs()).fold(0.0, f64::max);

    let nu = 0.5 - r.alpha_minus;
    let kappa = (2.0 * eps).sqrt();
    let ln_f = |n: usize| -> Result<f64> {
        let x = n as f64;
        Ok(0.5 * x.ln() + bessel_k(nu, x * kappa)?.ln())
    };
    let ln_c = lw(n_scale) - ln_f(n_scale)?;
    let mut zone2 = 0.0f64;
    for n in (n_scale / 2).max(1)..=2 * n_scale {
        zone2 = zone2.max((lw(n) - ln_c - ln_f(n)?).exp_m1().abs());
    }

    let ratio_dev = |n: usize| ((lw(n + 1) - lw(n)).exp() - r.x_minus).abs();
    let zone3 = (3 * n_scale..=10 * n_scale).map(ratio_dev).fold(0.0, f64::max);
    Ok(ZoneReport { eps, n_scale, zone1_end, zone1, nu, zone2, zone3, zone3_at_10n: ratio_dev(10 * n_scale) })
}
