use crate::error::{Error, Result};
use crate::potentials::PotentialSeq;

const MAX_ITER: usize = 5_000_000;

/// Relative residual `|Q² x - λ² x| / λ²` that ends the iteration.
const TOL: f64 = 1e-12;

/// Largest eigenvalue of the leading `k x k` block of the transfer matrix
/// with contact weight `b0`, by power iteration on its square.
///
/// The square has the Perron pair `±λ` merged into one eigenvalue, so the
/// iteration converges despite the bipartite structure.
pub fn truncated_spectrum(bseq: &PotentialSeq, b0: f64, k: usize) -> Result<f64> {
    if !(b0 > 0.0 && b0.is_finite()) {
        return Err(Error::Parameter(format!("contact weight b0 = {b0} must be positive and finite")));
    }
    if k == 0 {
        return Err(Error::Parameter("truncation size must be at least 1".into()));
    }
    if k == 1 {
        return Ok(0.0);
    }
    let mut ln_b = Vec::with_capacity(k);
    ln_b.push(b0.ln());
    ln_b.extend((1..k).map(|n| bseq.log_b(n)));
    // off[i] = Q_{i, i+1}
    let off: Vec<f64> = (0..k - 1).map(|i| 0.5 * (-0.5 * (ln_b[i] + ln_b[i + 1])).exp()).collect();
    let apply = |x: &[f64], y: &mut [f64]| {
        for i in 0..k {
            let mut s = 0.0;
            if i > 0 {
                s += off[i - 1] * x[i - 1];
            }
            if i + 1 < k {
                s += off[i] * x[i + 1];
            }
            y[i] = s;
        }
    };
    let mut x = vec![1.0 / (k as f64).sqrt(); k];
    let mut y = vec![0.0; k];
    let mut z = vec![0.0; k];
    for _ in 0..MAX_ITER {
        apply(&x, &mut y);
        // |Q x|² / |x|² with |x| = 1
        let lam2: f64 = y.iter().map(|v| v * v).sum();
        apply(&y, &mut z);
        if lam2 == 0.0 {
            return Ok(0.0);
        }
        let resid = x.iter().zip(&z).map(|(xi, zi)| (zi - lam2 * xi).powi(2)).sum::<f64>().sqrt();
        let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (xi, zi) in x.iter_mut().zip(&z) {
            *xi = zi / norm;
        }
        if resid <= TOL * lam2 {
            return Ok(lam2.sqrt());
        }
    }
    Err(Error::Convergence(format!("power iteration on a {k} x {k} block did not settle")))
}
