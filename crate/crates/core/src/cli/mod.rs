//! Batch commands behind the `wetting` binary. Every command returns a
//! [`Table`] rendered as CSV.

mod family;

use rayon::prelude::*;

use crate::error::Error;
use crate::hyper;
use crate::mcwalk::{self, Boundary};
use crate::potentials::PotentialSeq;
use crate::scaling::{self, DensityModel, OrderParameterLaw};
use crate::transfer::{self, Regime};

pub use family::{FamilyError, FamilySpec};

/// Environment variable read for the default worker count.
pub const THREADS_ENV: &str = "WETTING_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error("{0}")]
    Numeric(#[from] Error),
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 for usage errors, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Family(_) => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

/// CSV number: 17 significant digits, `inf`, `-inf` and `nan` literals.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        // adding +0 turns -0 into +0
        format!("{:.16e}", x + 0.0)
    }
}

/// Header plus rows, emitted in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn to_csv(&self) -> CliResult<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Column `name` of every row.
    pub fn column(&self, name: &str) -> Vec<&str> {
        let i = self.header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name}"));
        self.rows.iter().map(|r| r[i].as_str()).collect()
    }
}

/// Runs `f` on a pool of `threads` workers, or the default pool size.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    match threads {
        Some(0) => usage("--threads must be at least 1"),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

fn check_b0(b0: f64) -> CliResult<()> {
    if b0 > 0.0 && b0.is_finite() {
        Ok(())
    } else {
        usage(format!("--b0 must be positive and finite, got {b0}"))
    }
}

fn regime_label(p: &transfer::PhasePoint) -> &'static str {
    if p.b0c.is_infinite() { "no-transition" } else { p.regime.as_str() }
}

/// `family, b0, u, b0c, rho, gibbs, m, regime`.
pub fn cmd_solve(family: &FamilySpec, b0: f64) -> CliResult<Table> {
    check_b0(b0)?;
    let seq = family.build()?;
    let p = transfer::phase_point(&seq, b0)?;
    let mut t = Table::new(&["family", "b0", "u", "b0c", "rho", "gibbs", "m", "regime"]);
    t.rows.push(vec![
        family.to_string(),
        num(b0),
        num(-b0.ln()),
        num(p.b0c),
        num(p.rho),
        num(p.gibbs),
        num(p.m),
        regime_label(&p).into(),
    ]);
    Ok(t)
}

/// Hypergeometric `s` on the branch `s >= 1/2` with tail coefficient `w`.
fn s_of_w(w: f64) -> Option<f64> {
    let disc = 1.0 - 8.0 * w;
    (disc >= 0.0).then(|| 0.5 * (1.0 + disc.sqrt()))
}

/// `w, s, b0c, u_c, b0c_closed, status, u_c_monotone` for the
/// hypergeometric family at fixed `a`.
pub fn cmd_critical_line(a: f64, w_grid: &[f64]) -> CliResult<Table> {
    if w_grid.is_empty() {
        return usage("empty w grid");
    }
    let rows: Vec<(f64, f64, f64, f64, String)> = w_grid
        .par_iter()
        .map(|&w| {
            let Some(s) = s_of_w(w) else {
                return Ok((w, f64::NAN, f64::NAN, f64::NAN, "skipped: w > 1/8, complex exponents".to_string()));
            };
            let hp = hyper::HyperParams::new(a, s)?;
            let b0c = transfer::b0_critical(&hp.seq())?;
            let status = if b0c.is_finite() { "ok" } else { "no-transition" };
            Ok((w, s, b0c, hyper::b0c_closed(&hp), status.to_string()))
        })
        .collect::<crate::Result<_>>()?;
    let u: Vec<f64> = rows.iter().filter(|r| r.2.is_finite()).map(|r| -r.2.ln()).collect();
    let monotone = u.windows(2).all(|p| p[1] >= p[0]) || u.windows(2).all(|p| p[1] <= p[0]);
    let mut t = Table::new(&["w", "s", "b0c", "u_c", "b0c_closed", "status", "u_c_monotone"]);
    for (w, s, b0c, closed, status) in rows {
        t.rows.push(vec![num(w), num(s), num(b0c), num(-b0c.ln()), num(closed), status, monotone.to_string()]);
    }
    Ok(t)
}

/// Iso-`w` lines `m(u)` and the boundary `u = u_c(w)` with its jump.
///
/// Columns `kind, w, s, u, b0, m, regime, jump_closed`; `kind` is `line`
/// or `boundary`, and `jump_closed` is the closed-form first-order jump on
/// boundary rows.
pub fn cmd_phase_diagram(a: f64, w_list: &[f64], u_grid: &[f64]) -> CliResult<Table> {
    if w_list.is_empty() || u_grid.is_empty() {
        return usage("empty w list or u grid");
    }
    if let Some(w) = w_list.iter().find(|w| s_of_w(**w).is_none()) {
        return usage(format!("w = {w} > 1/8 has no transition in the hypergeometric family"));
    }
    let seqs: Vec<(f64, f64, PotentialSeq, f64)> = w_list
        .par_iter()
        .map(|&w| {
            let s = s_of_w(w).expect("checked above");
            let seq = hyper::HyperParams::new(a, s)?.seq();
            let b0c = transfer::b0_critical(&seq)?;
            Ok((w, s, seq, b0c))
        })
        .collect::<crate::Result<_>>()?;
    let mut t = Table::new(&["kind", "w", "s", "u", "b0", "m", "regime", "jump_closed"]);
    for (w, s, seq, b0c) in &seqs {
        let points: Vec<transfer::PhasePoint> = u_grid
            .par_iter()
            .map(|u| transfer::phase_point_given(seq, (-u).exp(), *b0c))
            .collect::<crate::Result<_>>()?;
        for (u, p) in u_grid.iter().zip(&points) {
            t.rows.push(vec![
                "line".into(),
                num(*w),
                num(*s),
                num(*u),
                num(p.b0),
                num(p.m),
                regime_label(p).into(),
                num(f64::NAN),
            ]);
        }
        if b0c.is_finite() {
            let p = transfer::phase_point_given(seq, *b0c, *b0c)?;
            let closed = if *s > 1.5 { 1.0 / (2.0 + 2.0 * a / (s - 1.5)) } else { 0.0 };
            t.rows.push(vec![
                "boundary".into(),
                num(*w),
                num(*s),
                num(-b0c.ln()),
                num(*b0c),
                num(p.m),
                Regime::Critical.as_str().into(),
                num(closed),
            ]);
        }
    }
    Ok(t)
}

/// Which implementation supplies `S(eps)` and `m(b0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelChoice {
    /// Closed forms for the hypergeometric family, transfer otherwise.
    Auto,
    Transfer,
    Closed,
}

impl std::str::FromStr for ModelChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "auto" => Ok(ModelChoice::Auto),
            "transfer" => Ok(ModelChoice::Transfer),
            "closed" => Ok(ModelChoice::Closed),
            _ => Err(format!("model must be auto, transfer or closed, got {s:?}")),
        }
    }
}

fn density_model(family: &FamilySpec, choice: ModelChoice) -> CliResult<(Box<dyn DensityModel + Sync>, &'static str)> {
    let closed = family.hyper_params();
    match (choice, closed) {
        (ModelChoice::Transfer, _) | (ModelChoice::Auto, None) => Ok((Box::new(family.build()?), "transfer")),
        (_, Some(hp)) => Ok((Box::new(hp), "closed")),
        (ModelChoice::Closed, None) => usage("closed forms exist only for the hyper family"),
    }
}

/// `law, value, reference, relative_error, residual, marginal, points,
/// model`: the divergence exponent `θ` and the order-parameter law.
pub fn cmd_exponent(family: &FamilySpec, choice: ModelChoice, eps_grid: &[f64], gap_grid: &[f64]) -> CliResult<Table> {
    let (model, label) = density_model(family, choice)?;
    let model = model.as_ref();
    let mut t = Table::new(&["law", "value", "reference", "relative_error", "residual", "marginal", "points", "model"]);
    let theta = scaling::fit_theta(model, eps_grid).map_err(grid_error)?;
    t.rows.push(vec![
        "theta".into(),
        num(theta.slope),
        num(theta.reference),
        num(theta.relative_error()),
        num(theta.residual),
        theta.marginal.to_string(),
        theta.x.len().to_string(),
        label.into(),
    ]);
    let b0c = model.critical_b0()?;
    match scaling::fit_m_exponent(model, b0c, gap_grid).map_err(grid_error)? {
        OrderParameterLaw::Exponent(f) => t.rows.push(vec![
            "m_exponent".into(),
            num(f.slope),
            num(f.reference),
            num(f.relative_error()),
            num(f.residual),
            f.marginal.to_string(),
            f.x.len().to_string(),
            label.into(),
        ]),
        OrderParameterLaw::Jump { jump } => t.rows.push(vec![
            "m_jump".into(),
            num(jump),
            num(f64::NAN),
            num(f64::NAN),
            num(f64::NAN),
            "false".into(),
            "0".into(),
            label.into(),
        ]),
    }
    Ok(t)
}

/// Bad grids are a usage problem, not a numerical one.
fn grid_error(e: Error) -> CliError {
    match e {
        Error::Parameter(msg) => CliError::Usage(msg),
        other => CliError::Numeric(other),
    }
}

/// One [`scaling::ZoneReport`] per `eps`.
pub fn cmd_profile(family: &FamilySpec, eps_list: &[f64]) -> CliResult<Table> {
    if eps_list.is_empty() {
        return usage("empty eps list");
    }
    let seq = family.build()?;
    let reports: Vec<scaling::ZoneReport> =
        eps_list.par_iter().map(|e| scaling::zone_check(&seq, *e)).collect::<crate::Result<_>>().map_err(grid_error)?;
    let mut t =
        Table::new(&["eps", "n_scale", "zone1_end", "zone1", "nu", "zone2", "zone3", "zone3_at_10n"]);
    for r in reports {
        t.rows.push(vec![
            num(r.eps),
            r.n_scale.to_string(),
            r.zone1_end.to_string(),
            num(r.zone1),
            num(r.nu),
            num(r.zone2),
            num(r.zone3),
            num(r.zone3_at_10n),
        ]);
    }
    Ok(t)
}

/// One row per replica with the return fraction, its batch-means error,
/// the even-time origin frequency and the exact targets `m` and `2 ν_0`.
pub fn cmd_simulate(family: &FamilySpec, b0: f64, steps: u64, seed: u64, replicas: u64) -> CliResult<Table> {
    check_b0(b0)?;
    if steps == 0 || replicas == 0 {
        return usage("--steps and --replicas must be positive");
    }
    let seq = family.build()?;
    let walk = transfer::localized_walk(&seq, b0)?;
    let stats = mcwalk::sample_replicas(&walk, steps, seed, replicas)?;
    let mut t = Table::new(&[
        "seed",
        "stream",
        "steps",
        "return_fraction",
        "return_se",
        "m",
        "even_origin_fraction",
        "even_origin_se",
        "two_nu0",
        "odd_returns",
    ]);
    for s in stats {
        t.rows.push(vec![
            s.seed.to_string(),
            s.stream.to_string(),
            s.steps.to_string(),
            num(s.return_fraction),
            num(s.return_se),
            num(walk.nu[0]),
            num(s.even_origin_fraction),
            num(s.even_origin_se),
            num(2.0 * walk.nu[0]),
            s.odd_returns.to_string(),
        ]);
    }
    Ok(t)
}

/// `n, boundary, z, expected_returns, density` for each path length.
pub fn cmd_enumerate(family: &FamilySpec, b0: f64, lengths: &[usize], boundary: Boundary) -> CliResult<Table> {
    check_b0(b0)?;
    if lengths.is_empty() {
        return usage("no path length given");
    }
    if let Some(n) = lengths.iter().find(|n| **n > mcwalk::MAX_ENUMERATION) {
        return usage(format!("--n {n} exceeds the enumeration limit {}", mcwalk::MAX_ENUMERATION));
    }
    let seq = family.build()?;
    let mut t = Table::new(&["n", "boundary", "z", "expected_returns", "density"]);
    for &n in lengths {
        let e = mcwalk::enumerate_sos(&seq, b0, n, boundary)?;
        let sites = match boundary {
            Boundary::Bridge => n.saturating_sub(1),
            Boundary::Free => n,
        };
        let density = if e.z == 0.0 || sites == 0 { f64::NAN } else { e.expected_returns / sites as f64 };
        t.rows.push(vec![n.to_string(), boundary.as_str().into(), num(e.z), num(e.expected_returns), num(density)]);
    }
    Ok(t)
}

/// Parses a comma-separated list of numbers.
pub fn parse_list(flag: &str, s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|p| match p.trim().parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => usage(format!("{flag}: {p:?} is not a finite number")),
        })
        .collect()
}

/// `lo:hi:n` as `n` points spaced linearly, or a plain list.
pub fn parse_grid(flag: &str, s: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [_] => parse_list(flag, s),
        [lo, hi, n] => {
            let lo = parse_list(flag, lo)?[0];
            let hi = parse_list(flag, hi)?[0];
            let n: usize = n.trim().parse().map_err(|_| CliError::Usage(format!("{flag}: bad point count {n:?}")))?;
            if n < 2 {
                return usage(format!("{flag}: need at least 2 points"));
            }
            Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
        }
        _ => usage(format!("{flag}: expected a list or lo:hi:n, got {s:?}")),
    }
}

/// `hi:lo:n` as `n` points spaced geometrically from `hi` down to `lo`.
pub fn parse_log_grid(flag: &str, s: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [hi, lo, n] = parts.as_slice() else {
        return usage(format!("{flag}: expected hi:lo:n, got {s:?}"));
    };
    let hi = parse_list(flag, hi)?[0];
    let lo = parse_list(flag, lo)?[0];
    let n: usize = n.trim().parse().map_err(|_| CliError::Usage(format!("{flag}: bad point count {n:?}")))?;
    if !(hi > lo && lo > 0.0) || n < 2 {
        return usage(format!("{flag}: need hi > lo > 0 and n >= 2"));
    }
    Ok(scaling::log_grid(hi, lo, n))
}

#[cfg(test)]
mod tests;
