//! Monte Carlo sampling of the localized walk and exact enumeration of
//! short SOS paths.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::potentials::PotentialSeq;
use crate::transfer::LocalizedWalk;

/// Number of batches for the batch-means error bars.
pub const BATCHES: usize = 100;

/// Longest path [`enumerate_sos`] will visit exhaustively.
pub const MAX_ENUMERATION: usize = 24;

/// Heights whose occupation fractions get their own error bar.
const TRACKED_HEIGHTS: usize = 16;

/// Summary of one sampled trajectory `X_0 = 0, X_1, ..., X_T`.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkStats {
    pub steps: u64,
    pub seed: u64,
    /// Stream index; stream `i` is the base generator advanced by `i` jumps.
    pub stream: u64,
    /// Visits to 0 among `X_1..X_T`.
    pub return_count: u64,
    /// Returns at odd times, which the period-2 structure forbids.
    pub odd_returns: u64,
    /// `histogram[n]` = number of `t in 1..=T` with `X_t = n`.
    pub histogram: Vec<u64>,
    pub return_fraction: f64,
    /// Batch-means standard error of `return_fraction`.
    pub return_se: f64,
    /// Occupation fractions and their standard errors for small heights.
    pub occupation: Vec<f64>,
    pub occupation_se: Vec<f64>,
    /// Fraction of even times `t` with `X_t = 0`; tends to `2 ν_0`.
    pub even_origin_fraction: f64,
    pub even_origin_se: f64,
}

impl WalkStats {
    /// Occupation fraction at height `n`.
    pub fn occupation_fraction(&self, n: usize) -> f64 {
        self.histogram.get(n).map_or(0.0, |c| *c as f64 / self.steps as f64)
    }
}

/// Mean and standard error of the mean over batches.
fn batch_mean_se(batches: &[f64]) -> (f64, f64) {
    let k = batches.len() as f64;
    let mean = batches.iter().sum::<f64>() / k;
    if batches.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = batches.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

fn stream_rng(seed: u64, stream: u64) -> Xoshiro256PlusPlus {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    for _ in 0..stream {
        rng.jump();
    }
    rng
}

/// Simulates `steps` moves of the walk from `X_0 = 0` with generator stream
/// 0 of `seed`.
pub fn sample_walk(walk: &LocalizedWalk, steps: u64, seed: u64) -> Result<WalkStats> {
    sample_walk_stream(walk, steps, seed, 0)
}

/// As [`sample_walk`], on an independent stream of the same seed.
pub fn sample_walk_stream(walk: &LocalizedWalk, steps: u64, seed: u64, stream: u64) -> Result<WalkStats> {
    if steps == 0 {
        return Err(Error::Parameter("number of steps must be positive".into()));
    }
    let mut rng = stream_rng(seed, stream);
    let n_batches = (BATCHES as u64).min(steps) as usize;
    let mut histogram: Vec<u64> = vec![0; TRACKED_HEIGHTS];
    let mut batch_occ = vec![vec![0u64; TRACKED_HEIGHTS]; n_batches];
    let mut batch_even = vec![(0u64, 0u64); n_batches];
    let mut batch_len = vec![0u64; n_batches];
    let mut x = 0usize;
    let mut odd_returns = 0;
    for t in 1..=steps {
        let up = rng.random::<f64>() < walk.p(x);
        x = if up { x + 1 } else { x - 1 };
        if x >= histogram.len() {
            histogram.resize(x + 1, 0);
        }
        histogram[x] += 1;
        // batch of step t, balanced to within one step
        let b = (((t - 1) as u128 * n_batches as u128) / steps as u128) as usize;
        batch_len[b] += 1;
        if x < TRACKED_HEIGHTS {
            batch_occ[b][x] += 1;
        }
        if t % 2 == 0 {
            batch_even[b].1 += 1;
            if x == 0 {
                batch_even[b].0 += 1;
            }
        } else if x == 0 {
            odd_returns += 1;
        }
    }
    let mut occupation = Vec::with_capacity(TRACKED_HEIGHTS);
    let mut occupation_se = Vec::with_capacity(TRACKED_HEIGHTS);
    for n in 0..TRACKED_HEIGHTS {
        let per: Vec<f64> = (0..n_batches).map(|b| batch_occ[b][n] as f64 / batch_len[b] as f64).collect();
        let (_, se) = batch_mean_se(&per);
        occupation.push(histogram[n] as f64 / steps as f64);
        occupation_se.push(se);
    }
    let evens: Vec<f64> = batch_even.iter().filter(|e| e.1 > 0).map(|(hit, tot)| *hit as f64 / *tot as f64).collect();
    let (_, even_origin_se) = batch_mean_se(&evens);
    let even_total: u64 = batch_even.iter().map(|e| e.1).sum();
    let even_hits: u64 = batch_even.iter().map(|e| e.0).sum();
    Ok(WalkStats {
        steps,
        seed,
        stream,
        return_count: histogram[0],
        odd_returns,
        return_fraction: occupation[0],
        return_se: occupation_se[0],
        histogram,
        occupation,
        occupation_se,
        even_origin_fraction: if even_total == 0 { f64::NAN } else { even_hits as f64 / even_total as f64 },
        even_origin_se,
    })
}

/// Independent replicas on streams `0..replicas`, run in parallel.
pub fn sample_replicas(walk: &LocalizedWalk, steps: u64, seed: u64, replicas: u64) -> Result<Vec<WalkStats>> {
    (0..replicas).into_par_iter().map(|i| sample_walk_stream(walk, steps, seed, i)).collect()
}

/// Path boundary condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// `X_N = 0`.
    Bridge,
    /// `X_N` unconstrained.
    Free,
}

impl Boundary {
    pub fn as_str(self) -> &'static str {
        match self {
            Boundary::Bridge => "bridge",
            Boundary::Free => "free",
        }
    }
}

/// Exact statistics of all paths of length `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactEnsemble {
    pub n: usize,
    pub boundary: Boundary,
    /// `Σ_paths 2^{-N} Π_{k=0}^{N} 1/b_{X_k}`.
    pub z: f64,
    /// Expected number of `l` with `X_l = 0`: `l in 1..N` for bridges,
    /// `l in 1..=N` for free paths. NaN when `z = 0`.
    pub expected_returns: f64,
    /// Law of `X_N`; a point mass at 0 for bridges.
    pub end_heights: Vec<f64>,
}

struct Enumerator<'a> {
    inv_b: &'a [f64],
    n: usize,
    bridge: bool,
    z: f64,
    zero_weight: f64,
    end: Vec<f64>,
}

impl Enumerator<'_> {
    /// Extends a path at height `x` after `len` steps with weight `w` and
    /// `zeros` visits to 0 so far.
    fn walk(&mut self, x: usize, len: usize, w: f64, zeros: u32) {
        if len == self.n {
            if self.bridge && x != 0 {
                return;
            }
            // the endpoint of a bridge is not counted as a return
            let counted = if self.bridge { zeros.saturating_sub(1) } else { zeros };
            self.z += w;
            self.zero_weight += w * counted as f64;
            self.end[x] += w;
            return;
        }
        // a bridge must be able to come back down
        let remaining = self.n - len - 1;
        let up = x + 1;
        if !self.bridge || up <= remaining {
            self.walk(up, len + 1, 0.5 * w * self.inv_b[up], zeros);
        }
        if x > 0 {
            let down = x - 1;
            self.walk(down, len + 1, 0.5 * w * self.inv_b[down], zeros + u32::from(down == 0));
        }
    }
}

/// Exhaustive enumeration of the SOS paths of length `n` from height 0
/// with contact weight `b0`.
pub fn enumerate_sos(bseq: &PotentialSeq, b0: f64, n: usize, boundary: Boundary) -> Result<ExactEnsemble> {
    if !(b0 > 0.0 && b0.is_finite()) {
        return Err(Error::Parameter(format!("contact weight b0 = {b0} must be positive and finite")));
    }
    if n > MAX_ENUMERATION {
        return Err(Error::Resource(format!("enumeration of 2^{n} paths exceeds the limit N <= {MAX_ENUMERATION}")));
    }
    let inv_b: Vec<f64> = (0..=n).map(|k| if k == 0 { 1.0 / b0 } else { 1.0 / bseq.b(k) }).collect();
    let bridge = boundary == Boundary::Bridge;
    let mut e = Enumerator { inv_b: &inv_b, n, bridge, z: 0.0, zero_weight: 0.0, end: vec![0.0; n + 1] };
    if bridge && n % 2 == 1 {
        // parity: no path returns after an odd number of steps
        return Ok(ExactEnsemble { n, boundary, z: 0.0, expected_returns: f64::NAN, end_heights: e.end });
    }
    e.walk(0, 0, inv_b[0], 0);
    let z = e.z;
    let end_heights = e.end.iter().map(|w| w / z).collect();
    Ok(ExactEnsemble { n, boundary, z, expected_returns: e.zero_weight / z, end_heights })
}

/// `P(X_steps = 0 | X_0 = 0)` for the walk, by exact powers of its kernel.
pub fn walk_return_probability(walk: &LocalizedWalk, steps: usize) -> f64 {
    let mut prob = vec![0.0; steps + 2];
    prob[0] = 1.0;
    for _ in 0..steps {
        let mut next = vec![0.0; steps + 2];
        for (x, px) in prob.iter().enumerate().take(steps + 1) {
            if *px == 0.0 {
                continue;
            }
            next[x + 1] += px * walk.p(x);
            if x > 0 {
                next[x - 1] += px * walk.q(x);
            }
        }
        prob = next;
    }
    prob[0]
}

/// Largest `|p_n + q_n - 1|` over the first `len` kernel rows.
pub fn kernel_row_defect(walk: &LocalizedWalk, len: usize) -> f64 {
    (0..len).map(|n| (walk.p(n) + walk.q(n) - 1.0).abs()).fold(0.0, f64::max)
}

/// Both sides of `Z_{2N} = rho^{2N} P(X_{2N} = 0) / b0`, with the left side
/// from enumeration.
pub fn bridge_identity(bseq: &PotentialSeq, walk: &LocalizedWalk, half_length: usize) -> Result<(f64, f64)> {
    let steps = 2 * half_length;
    let z = enumerate_sos(bseq, walk.b0, steps, Boundary::Bridge)?.z;
    let rhs = walk.rho.powi(steps as i32) * walk_return_probability(walk, steps) / walk.b0;
    Ok((z, rhs))
}

/// Exact finite-size return densities: `E[returns] / (2N - 1)` for bridges
/// of length `2N`, `E[returns] / N` for free paths of length `N`.
pub fn finite_size_m(bseq: &PotentialSeq, b0: f64, sizes: &[usize], boundary: Boundary) -> Result<Vec<(usize, f64)>> {
    sizes
        .iter()
        .map(|&n| {
            if n == 0 {
                return Err(Error::Parameter("system size must be at least 1".into()));
            }
            let (len, denom) = match boundary {
                Boundary::Bridge => (2 * n, (2 * n - 1) as f64),
                Boundary::Free => (n, n as f64),
            };
            let e = enumerate_sos(bseq, b0, len, boundary)?;
            Ok((n, e.expected_returns / denom))
        })
        .collect()
}

#[cfg(test)]
mod tests;
