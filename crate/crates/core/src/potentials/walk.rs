//! Reflected nearest-neighbour walks and the pinning sequences they induce
//! through `b_n b_{n+1} = 1/(4 p_n q_{n+1})`.

use crate::error::{param, Error, Result};

use super::PotentialSeq;

#[derive(Debug, Clone, Copy, PartialEq)]
enum WalkKind {
    Symmetric,
    Bessel { x0: f64, d: f64 },
    Homographic { x0: f64, d: f64, a: f64, b: f64 },
}

/// Up-probabilities `p_n` of a walk on {0, 1, 2, ...} with `p_0 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkSpec {
    kind: WalkKind,
}

/// Indices checked for `p_n ∈ (0, 1)` at construction; `p_n` is monotone
/// in n beyond a few steps for both families.
const PROBABILITY_CHECK: usize = 4096;

impl WalkSpec {
    pub fn symmetric() -> Self {
        WalkSpec { kind: WalkKind::Symmetric }
    }

    pub fn bessel(x0: f64, d: f64) -> Result<Self> {
        check_bessel(x0, d)?;
        WalkSpec { kind: WalkKind::Bessel { x0, d } }.checked()
    }

    /// Homographic walk fitted to the Bessel walk with the same `(x0, d)`.
    pub fn homographic(x0: f64, d: f64) -> Result<Self> {
        let (a, b) = homographic_params(x0, d)?;
        WalkSpec { kind: WalkKind::Homographic { x0, d, a, b } }.checked()
    }

    fn checked(self) -> Result<Self> {
        for n in 1..=PROBABILITY_CHECK {
            let p = self.p(n);
            if !(p > 0.0 && p < 1.0) {
                return param(format!("walk {self:?} has p_{n} = {p} outside (0, 1)"));
            }
        }
        Ok(self)
    }

    /// `(x0, d)` for the Bessel and homographic families.
    pub fn geometry(&self) -> Option<(f64, f64)> {
        match self.kind {
            WalkKind::Symmetric => None,
            WalkKind::Bessel { x0, d } | WalkKind::Homographic { x0, d, .. } => Some((x0, d)),
        }
    }

    /// `p_n - 1/2` without cancellation; 1/2 at n = 0.
    pub fn half_offset(&self, n: usize) -> f64 {
        if n == 0 {
            return 0.5;
        }
        let nf = n as f64;
        match self.kind {
            WalkKind::Symmetric => 0.0,
            WalkKind::Bessel { x0, d } => {
                // (A - B)/(2(A + B)) with A/B = (1 + 1/(n - 1 + x0))^{d-1}
                0.5 * (0.5 * (d - 1.0) * (1.0 / (nf - 1.0 + x0)).ln_1p()).tanh()
            }
            WalkKind::Homographic { x0, a, b, .. } => (a - b) / (2.0 * (nf + x0 + b)),
        }
    }

    pub fn p(&self, n: usize) -> f64 {
        0.5 + self.half_offset(n)
    }

    pub fn q(&self, n: usize) -> f64 {
        0.5 - self.half_offset(n)
    }

    /// Drift coefficient λ in `p_n - 1/2 ~ λ/(2n)`.
    pub fn lambda(&self) -> f64 {
        match self.kind {
            WalkKind::Symmetric => 0.0,
            WalkKind::Bessel { d, .. } | WalkKind::Homographic { d, .. } => (d - 1.0) / 2.0,
        }
    }

    /// `w = λ(1 - λ)/2 = (d - 1)(3 - d)/8`.
    pub fn tail_w(&self) -> f64 {
        let l = self.lambda();
        l * (1.0 - l) / 2.0
    }

    fn label(&self) -> String {
        match self.kind {
            WalkKind::Symmetric => "walkderived:symmetric".into(),
            WalkKind::Bessel { x0, d } => format!("walkderived:bessel,{x0},{d}"),
            WalkKind::Homographic { x0, d, .. } => format!("walkderived:homographic,{x0},{d}"),
        }
    }

    /// `ln(4 p_n q_{n+1})`.
    pub(crate) fn ln_4pq(&self, n: usize) -> f64 {
        (2.0 * self.half_offset(n)).ln_1p() + (-2.0 * self.half_offset(n + 1)).ln_1p()
    }

    /// `ln V_l = ln(p_{2l-2} q_{2l-1} / (p_{2l-1} q_{2l}))`.
    fn ln_v(&self, l: usize) -> f64 {
        let h = |n| 2.0 * self.half_offset(n);
        h(2 * l - 2).ln_1p() + (-h(2 * l - 1)).ln_1p() - h(2 * l - 1).ln_1p() - (-h(2 * l)).ln_1p()
    }
}

fn check_bessel(x0: f64, d: f64) -> Result<()> {
    if !(x0 > 0.0 && x0.is_finite()) {
        return param(format!("Bessel walk needs x0 > 0, got {x0}"));
    }
    if !d.is_finite() || (d < 0.0 && d % 2.0 == 0.0) {
        return param(format!("Bessel walk dimension d = {d} must not be an even negative integer"));
    }
    Ok(())
}

/// `p_n` of the Bessel walk.
pub fn bessel_p(x0: f64, d: f64, n: usize) -> Result<f64> {
    check_bessel(x0, d)?;
    if n == 0 {
        return Ok(1.0);
    }
    Ok(WalkSpec { kind: WalkKind::Bessel { x0, d } }.p(n))
}

/// `(a, b)` of the homographic walk matching the Bessel walk at n = 1 and
/// as n → ∞. At `d = 1` both walks are symmetric and `(0, 0)` is returned.
pub fn homographic_params(x0: f64, d: f64) -> Result<(f64, f64)> {
    check_bessel(x0, d)?;
    if d == 1.0 {
        return Ok((0.0, 0.0));
    }
    let p1 = bessel_p(x0, d, 1)?;
    let a = ((3.0 + 2.0 * x0 - d) * p1 - (1.0 + x0)) / (1.0 - 2.0 * p1);
    Ok((a, a - (d - 1.0) / 2.0))
}

/// `p̄_n = (n + x0 + a) / (2 (n + x0 + b))`.
pub fn homographic_p(x0: f64, a: f64, b: f64, n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let nf = n as f64;
    (nf + x0 + a) / (2.0 * (nf + x0 + b))
}

/// Wall duality `d ↦ 2 - d`, which swaps `p_n` and `q_n`.
pub fn wall_dual(d: f64) -> f64 {
    2.0 - d
}

/// Precomputed suffix sums `T(k) = Σ_{l > k} ln V_l` with `ln b_{2k} = -T(k)`.
pub(crate) struct WalkTable {
    walk: WalkSpec,
    suffix: Vec<f64>,
}

const PRODUCT_TOL: f64 = 1e-13;
const PRODUCT_MAX: usize = 1 << 24;

impl WalkTable {
    fn build(walk: WalkSpec) -> Result<Self> {
        // Doubling on the partial sums of ln V_l; the increments decay like
        // 1/L², so the remainder past L is a third of the last increment.
        let mut sum = 0.0;
        let mut comp = 0.0;
        let mut l_done = 0usize;
        let mut l_target = 1024usize;
        let mut last_increment = f64::INFINITY;
        let mut lnv = Vec::new();
        loop {
            let start = sum;
            for l in l_done + 1..=l_target {
                let v = walk.ln_v(l);
                lnv.push(v);
                let y = v - comp;
                let t = sum + y;
                comp = (t - sum) - y;
                sum = t;
            }
            let increment = sum - start;
            l_done = l_target;
            if increment.abs() < PRODUCT_TOL && last_increment.is_finite() {
                let remainder = increment / 3.0;
                return Ok(Self::from_terms(walk, &lnv, remainder));
            }
            last_increment = increment;
            l_target *= 2;
            if l_target > PRODUCT_MAX {
                return Err(Error::Convergence(format!(
                    "product for b0* not settled: last doubling changed ln v by {increment:e}"
                )));
            }
        }
    }

    fn from_terms(walk: WalkSpec, lnv: &[f64], remainder: f64) -> Self {
        let len = lnv.len();
        let mut suffix = vec![0.0; len + 1];
        suffix[len] = remainder;
        let mut comp = 0.0;
        let mut acc = remainder;
        for k in (0..len).rev() {
            let y = lnv[k] - comp;
            let t = acc + y;
            comp = (t - acc) - y;
            acc = t;
            suffix[k] = acc;
        }
        WalkTable { walk, suffix }
    }

    /// `T(k)`, extrapolated as `T(L) (L/k)²` beyond the table.
    fn tail(&self, k: usize) -> f64 {
        let len = self.suffix.len() - 1;
        if k <= len {
            self.suffix[k]
        } else {
            let r = len as f64 / k as f64;
            self.suffix[len] * r * r
        }
    }

    pub(crate) fn ln_b0(&self) -> f64 {
        -self.suffix[0]
    }

    pub(crate) fn log_b(&self, n: usize) -> f64 {
        let k = n / 2;
        if n % 2 == 0 {
            -self.tail(k)
        } else {
            -self.walk.ln_4pq(n - 1) + self.tail(k)
        }
    }
}

/// The unique `b0*` for which the sequence solving
/// `b_n b_{n+1} = 1/(4 p_n q_{n+1})` tends to 1, and that sequence.
pub fn walk_to_b(walk: &WalkSpec) -> Result<(f64, PotentialSeq)> {
    let table = WalkTable::build(*walk)?;
    let b0 = table.ln_b0().exp();
    let seq = PotentialSeq::from_walk_table(table, walk.tail_w(), walk.label())?;
    Ok((b0, seq))
}

/// General-ρ form of [`walk_to_b`]. For walks with `p_n → 1/2` the
/// constraint `b_n → 1` forces `ρ = 1`.
pub fn walk_to_b_at(walk: &WalkSpec, rho: f64) -> Result<(f64, PotentialSeq)> {
    if !(rho >= 1.0) {
        return param(format!("rho = {rho} must be >= 1"));
    }
    if rho > 1.0 {
        return Err(Error::Constraint(format!(
            "4 rho^2 p_n q_(n+1) -> rho^2 = {} for a walk with p_n -> 1/2, so b_n cannot tend to 1",
            rho * rho
        )));
    }
    walk_to_b(walk)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bessel_examples() {
        for &x0 in &[0.3, 1.0, 4.0] {
            for n in [1, 5, 100] {
                assert_eq!(bessel_p(x0, 1.0, n).unwrap(), 0.5);
            }
        }
        assert_relative_eq!(bessel_p(1.0, 2.0, 1).unwrap(), 2.0 / 3.0, max_relative = 1e-15);
        for n in 1..50 {
            let nf = n as f64;
            assert_relative_eq!(bessel_p(1.0, 2.0, n).unwrap(), (nf + 1.0) / (2.0 * nf + 1.0), max_relative = 1e-15);
        }
        assert!(bessel_p(0.0, 2.0, 1).is_err());
        assert!(bessel_p(1.0, -2.0, 1).is_err());
    }

    #[test]
    fn homographic_examples() {
        let (a, b) = homographic_params(1.7, 2.0).unwrap();
        assert!(a.abs() < 1e-14);
        assert_relative_eq!(b, -0.5, max_relative = 1e-14);
        assert_eq!(homographic_params(1.7, 1.0).unwrap(), (0.0, 0.0));
        assert_eq!(homographic_p(1.7, 0.0, 0.0, 9), 0.5);
        assert_eq!(wall_dual(0.0), 2.0);
    }

    #[test]
    fn homographic_tracks_bessel() {
        for &(x0, d) in &[(1.0, 0.0), (0.5, 1.5), (2.0, 3.0)] {
            let (a, b) = homographic_params(x0, d).unwrap();
            assert_relative_eq!(homographic_p(x0, a, b, 1), bessel_p(x0, d, 1).unwrap(), max_relative = 1e-14);
            let mut max_dev = 0.0f64;
            for n in 1..=1000 {
                let dev = (homographic_p(x0, a, b, n) - bessel_p(x0, d, n).unwrap()).abs();
                max_dev = max_dev.max(dev);
                if n >= 100 {
                    let nf = n as f64;
                    assert!(dev * nf * nf < 10.0, "d = {d}, n = {n}: {dev:e}");
                }
            }
            assert!(max_dev < 2e-2);
        }
    }

    #[test]
    fn symmetric_walk_gives_flat_sequence() {
        let (b0, seq) = walk_to_b(&WalkSpec::symmetric()).unwrap();
        assert_relative_eq!(b0, 0.5, max_relative = 1e-15);
        for n in [1, 2, 3, 10, 1001, 100_000] {
            assert!((seq.b(n) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn walk_sequence_satisfies_recurrence() {
        for walk in [WalkSpec::bessel(1.0, 0.0).unwrap(), WalkSpec::homographic(0.7, 1.6).unwrap()] {
            let (b0, seq) = walk_to_b(&walk).unwrap();
            let r0 = 4.0 * walk.p(0) * walk.q(1) * b0 * seq.b(1) - 1.0;
            assert!(r0.abs() < 1e-12);
            for n in 1..20_000 {
                let r = 4.0 * walk.p(n) * walk.q(n + 1) * seq.b(n) * seq.b(n + 1) - 1.0;
                assert!(r.abs() < 1e-12, "n = {n}: {r:e}");
            }
        }
    }

    #[test]
    fn bessel_tail_coefficient_and_duality() {
        let d = 0.0;
        let w = (d - 1.0) * (3.0 - d) / 8.0;
        let (_, seq) = walk_to_b(&WalkSpec::bessel(1.0, d).unwrap()).unwrap();
        assert_eq!(seq.tail().w, -0.375);
        let c3 = seq.tail_coefficient(1000);
        let c4 = seq.tail_coefficient(10_000);
        assert!((c4 - w).abs() < 2e-2, "{c4}");
        assert!((c4 - w).abs() < (c3 - w).abs());
        // Wall duality swaps p and q, so λ changes sign and w is not preserved;
        // (d - 1)(3 - d)/8 is symmetric under d -> 4 - d instead.
        let dual = WalkSpec::bessel(1.0, wall_dual(d)).unwrap();
        assert_eq!(dual.lambda(), -WalkSpec::bessel(1.0, d).unwrap().lambda());
        let (_, dual_seq) = walk_to_b(&dual).unwrap();
        assert!((dual_seq.tail_coefficient(10_000) - 0.125).abs() < 2e-2);
        assert_eq!(WalkSpec::bessel(1.0, 4.0 - d).unwrap().tail_w(), w);
    }

    #[test]
    fn rho_above_one_is_a_constraint_violation() {
        let walk = WalkSpec::bessel(1.0, 0.5).unwrap();
        assert!(matches!(walk_to_b_at(&walk, 1.1), Err(Error::Constraint(_))));
        assert!(walk_to_b_at(&walk, 1.0).is_ok());
    }
}
