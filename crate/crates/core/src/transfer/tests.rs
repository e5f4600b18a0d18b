use super::*;
use crate::error::Error;
use crate::potentials::PotentialSeq;
use approx::assert_relative_eq;

fn flat() -> PotentialSeq {
    PotentialSeq::hyper(1.0, 1.0).unwrap()
}

/// Flat chain: w_1 = 2 x_-, b0 = x_- / (2 rho), Σ w_p² = 4 x_-² / (1 - x_-²).
fn flat_oracle(rho: f64) -> (f64, f64, f64) {
    let xm = rho - (rho * rho - 1.0).sqrt();
    let b0 = xm / (2.0 * rho);
    let m = 1.0 / (1.0 + xm * xm / (b0 * (1.0 - xm * xm)));
    (2.0 * xm, b0, m)
}

#[test]
fn flat_chain_geometric_solution() {
    let sol = minimal_solution(&flat(), 1.25, 1e-13).unwrap();
    assert!(sol.converged);
    assert_relative_eq!(sol.w1, 1.0, max_relative = 1e-13);
    for p in 1..=40 {
        assert_relative_eq!(sol.w(p), 2.0 * 0.5f64.powi(p as i32), max_relative = 1e-12);
    }
    assert!(sol.ratios.iter().take(100).all(|t| (t - 2.0).abs() < 1e-12));
}

#[test]
fn flat_chain_at_threshold_is_constant() {
    let sol = minimal_solution(&flat(), 1.0, 1e-13).unwrap();
    for p in [1, 2, 10, 500] {
        assert_relative_eq!(sol.w(p), 2.0, max_relative = 1e-12);
    }
}

#[test]
fn rational_family_first_value() {
    let seq = PotentialSeq::hyper(1.0, 2.0).unwrap();
    let sol = minimal_solution(&seq, 1.0, 1e-13).unwrap();
    assert_relative_eq!(sol.w1, 1.5, max_relative = 1e-11);
}

#[test]
fn residual_is_small() {
    for (a, s, rho) in [(0.97, 1.25, 1.0), (1.3, 0.8, 1.01), (1.0, 2.0, 1.3), (2.0, 0.6, 1.0 + 1e-6)] {
        let seq = PotentialSeq::hyper(a, s).unwrap();
        let sol = minimal_solution(&seq, rho, 1e-13).unwrap();
        assert!(sol.max_residual(&seq) < 1e-12, "({a}, {s}, {rho}): {}", sol.max_residual(&seq));
        assert!(sol.ratios.iter().all(|t| *t > 0.0));
        assert!(sol.log_values.iter().all(|l| l.is_finite()));
    }
}

#[test]
fn flat_chain_phase_diagram() {
    let seq = flat();
    assert_relative_eq!(b0_critical(&seq).unwrap(), 0.5, max_relative = 1e-11);
    for rho in [1.0001, 1.01, 1.25, 3.0] {
        let (w1, b0, m) = flat_oracle(rho);
        assert_relative_eq!(b0_of_eps(&seq, rho - 1.0).unwrap() * 4.0 * rho, w1, max_relative = 1e-12);
        assert_relative_eq!(rho_of_b0(&seq, b0).unwrap(), rho, max_relative = 1e-12);
        assert_relative_eq!(return_density(&seq, b0).unwrap(), m, max_relative = 1e-10);
    }
    assert_relative_eq!(return_density(&seq, 0.2).unwrap(), 0.375, max_relative = 1e-11);
    assert_relative_eq!(gibbs(&seq, 0.2).unwrap(), -(1.25f64).ln(), max_relative = 1e-12);
    let p = phase_point(&seq, 0.7).unwrap();
    assert_eq!((p.regime, p.rho, p.m), (Regime::Delocalized, 1.0, 0.0));
    assert_eq!(phase_point(&seq, 0.5).unwrap().regime, Regime::Critical);
    assert!(matches!(rho_of_b0(&seq, 0.5), Err(Error::Regime(_))));
    assert!(matches!(rho_of_b0(&seq, 0.7), Err(Error::Regime(_))));
    assert_eq!(gibbs(&seq, 0.5).unwrap(), 0.0);
    assert_eq!(gibbs(&seq, 0.7).unwrap(), 0.0);
}

#[test]
fn gibbs_derivative_is_density_over_b0() {
    let seq = flat();
    let h = 1e-6;
    let d = (gibbs(&seq, 0.2 + h).unwrap() - gibbs(&seq, 0.2 - h).unwrap()) / (2.0 * h);
    assert!((d - 1.875).abs() < 1e-4, "{d}");
}

#[test]
fn walk_probabilities_normalize() {
    let seq = PotentialSeq::hyper(0.97, 1.25).unwrap();
    let b0 = 0.5 * b0_critical(&seq).unwrap();
    let walk = localized_walk(&seq, b0).unwrap();
    assert_eq!((walk.p(0), walk.q(0)), (1.0, 0.0));
    for n in 1..walk.len() {
        assert!((walk.p(n) + walk.q(n) - 1.0).abs() < 1e-12, "n = {n}");
    }
    assert!(walk.p_limit < 0.5);
    assert!((walk.p(walk.len() - 1) - walk.p_limit).abs() < 1e-3);
    assert_relative_eq!(walk.nu[0], return_density(&seq, b0).unwrap(), max_relative = 1e-10);
}

#[test]
fn flat_chain_localized_walk() {
    let walk = localized_walk(&flat(), 0.2).unwrap();
    assert_relative_eq!(walk.rho, 1.25, max_relative = 1e-12);
    assert_eq!(walk.p(0), 1.0);
    for n in 1..50 {
        assert_relative_eq!(walk.p(n), 0.2, max_relative = 1e-11);
    }
    assert_relative_eq!(walk.q(1), 0.8, max_relative = 1e-11);
    assert_relative_eq!(walk.v[1], 2.5 * 0.2f64.sqrt(), max_relative = 1e-12);
    assert_relative_eq!(walk.p_limit, 0.2, max_relative = 1e-12);
    assert_relative_eq!(walk.nu[0], 0.375, max_relative = 1e-11);
    assert_relative_eq!(walk.nu.iter().sum::<f64>(), 1.0, max_relative = 1e-12);
    assert!(localized_walk(&flat(), 0.6).is_err());
}

#[test]
fn rho_inverts_b0_of_eps() {
    let seq = PotentialSeq::hyper(0.97, 1.25).unwrap();
    let b0c = b0_critical(&seq).unwrap();
    for frac in [0.1, 0.5, 0.9, 0.999, 1.0 - 1e-6] {
        let b0 = frac * b0c;
        let eps = eps_of_b0(&seq, b0).unwrap();
        assert!(eps > 0.0);
        assert_relative_eq!(b0_of_eps(&seq, eps).unwrap(), b0, max_relative = 1e-12);
    }
}

#[test]
fn spectrum_approaches_rho() {
    let seq = PotentialSeq::hyper(0.97, 1.25).unwrap();
    let rho = rho_of_b0(&seq, 0.2).unwrap();
    let top = truncated_spectrum(&seq, 0.2, 400).unwrap();
    assert_relative_eq!(top, rho, max_relative = 1e-10);
    assert_relative_eq!(truncated_spectrum(&flat(), 0.2, 200).unwrap(), 1.25, max_relative = 1e-12);
}

#[test]
fn strong_repulsion_is_not_transient() {
    let seq = PotentialSeq::inverse_square(0.5).unwrap();
    assert!(matches!(minimal_solution(&seq, 1.0, 1e-13), Err(Error::NotTransient { .. })));
    assert_eq!(b0_critical(&seq).unwrap(), f64::INFINITY);
    let p = phase_point(&seq, 3.0).unwrap();
    assert_eq!(p.regime, Regime::Localized);
    assert!(p.rho > 1.0 && p.m > 0.0);
}

#[test]
fn blocked_head_is_not_transient() {
    // 4 b1 b2 < 1 with a short-range tail
    let seq = PotentialSeq::with_head(&[0.2, 0.2], 0.0).unwrap();
    assert_eq!(b0_critical(&seq).unwrap(), f64::INFINITY);
}

#[test]
fn invalid_arguments() {
    assert!(matches!(minimal_solution(&flat(), 0.5, 1e-13), Err(Error::Parameter(_))));
    assert!(matches!(return_density(&flat(), 0.0), Err(Error::Parameter(_))));
    assert!(matches!(rho_of_b0(&flat(), f64::NAN), Err(Error::Parameter(_))));
}

#[test]
fn ratio_tends_to_decaying_root() {
    for (a, s) in [(0.97, 1.25), (1.3, 0.8), (1.0, 2.0)] {
        let seq = PotentialSeq::hyper(a, s).unwrap();
        for rho in [1.0 + 1e-4, 1.01, 1.5] {
            // the approach to x_- is O(1/(p² k)), so keep a long table
            let cfg = SolverConfig { p_max: 1 << 14, ..SolverConfig::default() };
            let sol = minimal_solution_with(&seq, rho, &cfg).unwrap();
            let x_minus = roots(rho, 0.0).unwrap().x_minus;
            let p = sol.cutoff();
            let tail = (sol.log_values[p - 1] - sol.log_values[p - 2]).exp();
            assert!((tail - x_minus).abs() < 1e-6, "({a}, {s}, {rho}): {tail} vs {x_minus}");
        }
    }
}

#[test]
fn critical_profile_follows_decaying_exponent() {
    for (a, s) in [(0.97, 1.25), (1.3, 0.8), (1.0, 2.0)] {
        let seq = PotentialSeq::hyper(a, s).unwrap();
        let cfg = SolverConfig { p_max: 100_000, ..SolverConfig::default() };
        let sol = minimal_solution_with(&seq, 1.0, &cfg).unwrap();
        let alpha = roots(1.0, seq.tail().w).unwrap().alpha_minus;
        let p = 100_000;
        assert!(sol.cutoff() >= p, "cutoff {}", sol.cutoff());
        // w_p ~ C p^α₋; the local slope removes the amplitude C
        let local = (sol.log_values[p - 1] - sol.log_values[p / 2 - 1]) / 2f64.ln();
        assert!((local / alpha - 1.0).abs() < 0.02, "({a}, {s}): {local} vs {alpha}");
    }
}

#[test]
fn spectrum_matches_rho_per_family() {
    let families = [PotentialSeq::hyper(0.97, 1.25).unwrap(), PotentialSeq::inverse_square(-0.5).unwrap(), flat()];
    for seq in families {
        let b0c = b0_critical(&seq).unwrap();
        for f in [0.3, 0.6, 0.9] {
            let b0 = f * b0c;
            let rho = rho_of_b0(&seq, b0).unwrap();
            let top = truncated_spectrum(&seq, b0, 2000).unwrap();
            assert!((top - rho).abs() < 1e-8 * rho, "b0 = {b0}: {top} vs {rho}");
        }
    }
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        /// `w_1`, `w_1 / rho` and every `w_n` decrease in rho.
        #[test]
        fn minimal_solution_decreases_in_rho(a in 0.8f64..2.0, s in 0.6f64..2.5, r in 1.0f64..1.5, dr in 0.001f64..0.5) {
            let seq = PotentialSeq::hyper(a, s).unwrap();
            let lo = minimal_solution(&seq, r, 1e-13).unwrap();
            let hi = minimal_solution(&seq, r + dr, 1e-13).unwrap();
            prop_assert!(hi.w1 < lo.w1);
            prop_assert!(hi.w1 / (r + dr) < lo.w1 / r);
            let n = lo.cutoff().min(hi.cutoff()).min(200);
            for p in 1..=n {
                prop_assert!(hi.log_values[p - 1] < lo.log_values[p - 1], "p = {}", p);
            }
        }

        #[test]
        fn density_is_non_increasing_in_b0(a in 0.8f64..2.0, s in 0.6f64..2.5, f in 0.05f64..0.95, df in 0.001f64..0.3) {
            let seq = PotentialSeq::hyper(a, s).unwrap();
            let b0c = b0_critical(&seq).unwrap();
            let m1 = return_density(&seq, f * b0c).unwrap();
            let m2 = return_density(&seq, (f + df) * b0c).unwrap();
            prop_assert!(m2 <= m1, "{} then {}", m1, m2);
            prop_assert!((0.0..=1.0).contains(&m1));
        }
    }
}
