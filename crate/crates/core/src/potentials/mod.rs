//! Pinning sequences `b_n = e^{V(n)}`, n >= 1.
//!
//! Every sequence is exposed through `log_b(n)` so that `1 - b_n ~ w/n²`
//! keeps full relative accuracy far out in the tail.

mod walk;

use std::fmt;
use std::sync::{Arc, RwLock};

use crate::error::{param, Error, Result};

pub use walk::{
    bessel_p, homographic_p, homographic_params, walk_to_b, walk_to_b_at, wall_dual, WalkSpec,
};

/// Tail `b_n = 1 - w/n² + O(n^{-2-zeta})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailSpec {
    pub w: f64,
    pub zeta: f64,
}

impl TailSpec {
    pub fn new(w: f64, zeta: f64) -> Result<Self> {
        if !(zeta > 0.0 && zeta <= 1.0) {
            return param(format!("tail exponent zeta = {zeta} must lie in (0, 1]"));
        }
        if !w.is_finite() {
            return param(format!("tail coefficient w = {w} is not finite"));
        }
        Ok(TailSpec { w, zeta })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Explicit,
    Hypergeometric,
    WalkDerived,
}

enum Source {
    Hyper { a: f64, s: f64, coeffs: HyperCoeffs },
    InverseSquare { w: f64 },
    /// Explicit `log b_n` for n = 1..=head.len(), then `1 - w/n²`.
    Head { log_head: Vec<f64>, w: f64 },
    Walk(walk::WalkTable),
}

struct Inner {
    source: Source,
    tail: TailSpec,
    family: Family,
    label: String,
    /// `log b_n` at index n - 1.
    cache: RwLock<Vec<f64>>,
}

/// A pinning sequence with lazily cached values. Cloning shares the cache.
#[derive(Clone)]
pub struct PotentialSeq(Arc<Inner>);

impl fmt::Debug for PotentialSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotentialSeq")
            .field("label", &self.0.label)
            .field("family", &self.0.family)
            .field("tail", &self.0.tail)
            .finish()
    }
}

/// Largest index kept in the cache; beyond it values are computed on demand.
const CACHE_CAP: usize = 1 << 22;

impl PotentialSeq {
    fn from_source(source: Source, tail: TailSpec, family: Family, label: String) -> Self {
        PotentialSeq(Arc::new(Inner { source, tail, family, label, cache: RwLock::new(Vec::new()) }))
    }

    /// The solvable hypergeometric family.
    pub fn hyper(a: f64, s: f64) -> Result<Self> {
        check_hyper(a, s)?;
        let tail = TailSpec::new((s - s * s) / 2.0, 1.0)?;
        Ok(Self::from_source(Source::Hyper { a, s, coeffs: HyperCoeffs::new(s) }, tail, Family::Hypergeometric, format!("hyper:{a},{s}")))
    }

    /// `b_n = 1 - w/n²`.
    pub fn inverse_square(w: f64) -> Result<Self> {
        inverse_square_b(w, 1)?;
        let tail = TailSpec::new(w, 1.0)?;
        Ok(Self::from_source(Source::InverseSquare { w }, tail, Family::Explicit, format!("invsq:{w}")))
    }

    /// Explicit values `b_1..b_k` followed by the tail `1 - w/n²` for n > k.
    pub fn with_head(head: &[f64], w: f64) -> Result<Self> {
        if let Some(bad) = head.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
            return param(format!("explicit b_n = {bad} must be positive"));
        }
        let k = head.len();
        if k == 0 {
            return Self::inverse_square(w);
        }
        if w >= ((k + 1) * (k + 1)) as f64 {
            return param(format!("tail 1 - w/n^2 with w = {w} is not positive after n = {k}"));
        }
        let tail = TailSpec::new(w, 1.0)?;
        let log_head = head.iter().map(|b| b.ln()).collect();
        let label = format!("head:{}|invsq:{w}", head.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(","));
        Ok(Self::from_source(Source::Head { log_head, w }, tail, Family::Explicit, label))
    }

    pub(crate) fn from_walk_table(table: walk::WalkTable, w: f64, label: String) -> Result<Self> {
        let tail = TailSpec::new(w, 1.0)?;
        Ok(Self::from_source(Source::Walk(table), tail, Family::WalkDerived, label))
    }

    pub fn tail(&self) -> TailSpec {
        self.0.tail
    }

    pub fn family(&self) -> Family {
        self.0.family
    }

    pub fn label(&self) -> &str {
        &self.0.label
    }

    /// Hypergeometric parameters `(a, s)` when the sequence belongs to that family.
    pub fn hyper_params(&self) -> Option<(f64, f64)> {
        match self.0.source {
            Source::Hyper { a, s, .. } => Some((a, s)),
            _ => None,
        }
    }

    fn compute_log_b(&self, n: usize) -> f64 {
        match &self.0.source {
            Source::Hyper { a, s, coeffs } => coeffs.log_b(*a, *s, n),
            Source::InverseSquare { w } => inverse_square_log_b(*w, n),
            Source::Head { log_head, w } => {
                if n <= log_head.len() {
                    log_head[n - 1]
                } else {
                    inverse_square_log_b(*w, n)
                }
            }
            Source::Walk(t) => t.log_b(n),
        }
    }

    /// `ln b_n` for n >= 1.
    pub fn log_b(&self, n: usize) -> f64 {
        assert!(n >= 1, "b_n is indexed from 1");
        {
            let cache = self.0.cache.read().unwrap_or_else(|e| e.into_inner());
            if n <= cache.len() {
                return cache[n - 1];
            }
        }
        if n > CACHE_CAP {
            return self.compute_log_b(n);
        }
        self.extend_cache(n);
        self.0.cache.read().unwrap_or_else(|e| e.into_inner())[n - 1]
    }

    pub fn b(&self, n: usize) -> f64 {
        self.log_b(n).exp()
    }

    fn extend_cache(&self, n: usize) {
        let mut cache = self.0.cache.write().unwrap_or_else(|e| e.into_inner());
        if n <= cache.len() {
            return;
        }
        let target = n.max(2 * cache.len()).max(1024).min(CACHE_CAP);
        let start = cache.len() + 1;
        let extra = target - cache.len();
        cache.reserve(extra);
        for k in start..=target {
            cache.push(self.compute_log_b(k));
        }
    }

    /// Runs `f` on the slice `[log b_1, ..., log b_n]`.
    pub fn with_log_b<R>(&self, n: usize, f: impl FnOnce(&[f64]) -> R) -> R {
        if n <= CACHE_CAP {
            if n > 0 {
                self.log_b(n);
            }
            let cache = self.0.cache.read().unwrap_or_else(|e| e.into_inner());
            f(&cache[..n])
        } else {
            let cache_len = self.0.cache.read().unwrap_or_else(|e| e.into_inner()).len();
            if cache_len < CACHE_CAP {
                self.log_b(CACHE_CAP);
            }
            let cache = self.0.cache.read().unwrap_or_else(|e| e.into_inner());
            let mut v = Vec::with_capacity(n);
            v.extend_from_slice(&cache[..]);
            for k in cache.len() + 1..=n {
                v.push(self.compute_log_b(k));
            }
            drop(cache);
            f(&v)
        }
    }

    /// `n² (1 - b_n)`, the local tail coefficient.
    pub fn tail_coefficient(&self, n: usize) -> f64 {
        let nf = n as f64;
        -nf * nf * self.log_b(n).exp_m1()
    }

    /// Positivity, convergence to 1 and summability of `|1 - b_n|`, checked
    /// on indices up to `n_check`.
    pub fn validate(&self, n_check: usize, tol: f64) -> Result<()> {
        let n_check = n_check.max(16);
        let mut partial = 0.0;
        let mut half_partial = 0.0;
        for n in 1..=n_check {
            let lb = self.log_b(n);
            if !lb.is_finite() {
                return Err(Error::Parameter(format!("b_{n} is not a positive finite number")));
            }
            partial += lb.exp_m1().abs();
            if n == n_check / 2 {
                half_partial = partial;
            }
        }
        let dev = self.log_b(n_check).exp_m1().abs();
        if dev >= tol {
            return Err(Error::Parameter(format!("|1 - b_{n_check}| = {dev:e} is not below {tol:e}")));
        }
        // the second half of the partial sums must be consistent with a summable tail
        let w = self.0.tail.w.abs().max(1e-300);
        let bound = 4.0 * w / (n_check as f64 / 2.0) + tol;
        if partial - half_partial > bound {
            return Err(Error::Parameter(format!(
                "partial sums of |1 - b_n| are not Cauchy: increment {:e} over [{}, {n_check}]",
                partial - half_partial,
                n_check / 2
            )));
        }
        Ok(())
    }
}

fn check_hyper(a: f64, s: f64) -> Result<()> {
    if !(a > 0.75 && a.is_finite()) {
        return param(format!("hypergeometric family needs a > 3/4, got a = {a}"));
    }
    if !(s >= 0.5 && s.is_finite()) {
        return param(format!("hypergeometric family needs s >= 1/2, got s = {s}"));
    }
    Ok(())
}

/// `b_n` of the hypergeometric family.
pub fn hyper_b(a: f64, s: f64, n: usize) -> Result<f64> {
    check_hyper(a, s)?;
    if n == 0 {
        return param("hyper_b is defined for n >= 1");
    }
    Ok(HyperCoeffs::new(s).log_b(a, s, n).exp())
}

/// `B_j` for j = 0..=17.
const BERNOULLI: [f64; 18] = [
    1.0,
    -0.5,
    1.0 / 6.0,
    0.0,
    -1.0 / 30.0,
    0.0,
    1.0 / 42.0,
    0.0,
    -1.0 / 30.0,
    0.0,
    5.0 / 66.0,
    0.0,
    -691.0 / 2730.0,
    0.0,
    7.0 / 6.0,
    0.0,
    -3617.0 / 510.0,
    0.0,
];

fn bernoulli_poly(n: usize, t: f64) -> f64 {
    let mut binom = 1.0;
    let mut acc = 0.0;
    for (j, bj) in BERNOULLI.iter().enumerate().take(n + 1) {
        if *bj != 0.0 {
            acc += binom * bj * t.powi((n - j) as i32);
        }
        binom = binom * (n - j) as f64 / (j + 1) as f64;
    }
    acc
}

/// Terms of the `1/x` expansion used beyond this many units of `x`.
const HYPER_ASYMPTOTIC_TERMS: usize = 16;

fn hyper_asymptotic_threshold(s: f64) -> f64 {
    30.0_f64.max(10.0 * (s + 1.0))
}

/// `Σ_{k>=2} c_k / x^k` from ln Γ(x+α)/Γ(x+β) ~ (α-β) ln x +
/// Σ (-1)^{k+1} (B_{k+1}(α) - B_{k+1}(β)) / (k(k+1) x^k), summed over the
/// four gamma factors of `b_n`. The k = 1 coefficient is `(2 - s)/2`.
/// Coefficients of `x^{-k}`, k = 2..=16, in the large-x expansion of
/// `ln b - ln1p(u) + u`, highest power first for Horner evaluation.
#[derive(Debug, Clone)]
struct HyperCoeffs([f64; HYPER_ASYMPTOTIC_TERMS - 1]);

impl HyperCoeffs {
    fn new(s: f64) -> Self {
        let mut c = [0.0; HYPER_ASYMPTOTIC_TERMS - 1];
        for k in 2..=HYPER_ASYMPTOTIC_TERMS {
            let kp = k + 1;
            let diff = bernoulli_poly(kp, -0.5) - bernoulli_poly(kp, 0.0) + bernoulli_poly(kp, s - 1.0)
                - bernoulli_poly(kp, s - 0.5);
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            c[HYPER_ASYMPTOTIC_TERMS - k] = sign * diff / (k * kp) as f64;
        }
        HyperCoeffs(c)
    }

    fn tail(&self, x: f64) -> f64 {
        let r = 1.0 / x;
        let mut acc = 0.0;
        for c in self.0 {
            acc = (acc + c) * r;
        }
        acc * r
    }

    fn log_b(&self, a: f64, s: f64, n: usize) -> f64 {
        let x = a + n as f64 / 2.0;
        let threshold = hyper_asymptotic_threshold(s);
        if x >= threshold {
            // the k = 1 term of the expansion cancels -u from ln1p(u)
            return ln1p_minus_x((s - 2.0) / (2.0 * x)) + self.tail(x);
        }
        // b(x)/b(x + 1) = 1 + s(s - 1) / (4 (x + s/2)(x - 1/2)(x + s - 1))
        let k = (threshold - x).ceil() as usize;
        let xk = x + k as f64;
        let c = s * (s - 1.0) / 4.0;
        let mut acc = 0.0;
        for j in 0..k {
            let y = x + j as f64;
            acc += (c / ((y + s / 2.0) * (y - 0.5) * (y + s - 1.0))).ln_1p();
        }
        acc + ln1p_minus_x((s - 2.0) / (2.0 * xk)) + self.tail(xk)
    }
}

#[cfg(test)]
fn hyper_log_b(a: f64, s: f64, n: usize) -> f64 {
    HyperCoeffs::new(s).log_b(a, s, n)
}

/// `ln(1 + u) - u`.
fn ln1p_minus_x(u: f64) -> f64 {
    if u.abs() < 1e-2 {
        let mut term = -u * u / 2.0;
        let mut acc = term;
        let mut k = 2.0;
        while term.abs() > 1e-20 * acc.abs() {
            term *= -u * k / (k + 1.0);
            acc += term;
            k += 1.0;
        }
        acc
    } else {
        u.ln_1p() - u
    }
}

/// `b_n = 1 - w/n²`.
pub fn inverse_square_b(w: f64, n: usize) -> Result<f64> {
    if !(w < 1.0) || !w.is_finite() {
        return param(format!("inverse-square tail needs w < 1 so that b_1 > 0, got w = {w}"));
    }
    if n == 0 {
        return param("inverse_square_b is defined for n >= 1");
    }
    let nf = n as f64;
    Ok(1.0 - w / (nf * nf))
}

fn inverse_square_log_b(w: f64, n: usize) -> f64 {
    let nf = n as f64;
    (-w / (nf * nf)).ln_1p()
}
