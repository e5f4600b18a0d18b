use super::*;
use crate::hyper::HyperParams;
use crate::transfer::{b0_critical, localized_walk, return_density};
use approx::assert_relative_eq;

fn flat() -> PotentialSeq {
    PotentialSeq::hyper(1.0, 1.0).unwrap()
}

#[test]
fn two_step_bridge() {
    let e = enumerate_sos(&flat(), 0.2, 2, Boundary::Bridge).unwrap();
    assert_relative_eq!(e.z, 6.25, max_relative = 1e-15);
    assert_eq!(e.expected_returns, 0.0);
}

#[test]
fn odd_bridges_vanish() {
    for n in [1, 3, 7] {
        assert_eq!(enumerate_sos(&flat(), 0.2, n, Boundary::Bridge).unwrap().z, 0.0);
    }
}

#[test]
fn free_paths_by_brute_force() {
    // all 2^n sign sequences, discarding those that go below 0
    let seq = PotentialSeq::hyper(0.97, 1.25).unwrap();
    let b0 = 0.4;
    let n = 10;
    let b = |x: i64| if x == 0 { b0 } else { seq.b(x as usize) };
    let (mut z, mut zeros, mut end) = (0.0, 0.0, vec![0.0; n + 1]);
    for mask in 0u32..(1 << n) {
        let mut x = 0i64;
        let mut w = 1.0 / b0;
        let mut hits = 0;
        let mut ok = true;
        for k in 0..n {
            x += if mask >> k & 1 == 1 { 1 } else { -1 };
            if x < 0 {
                ok = false;
                break;
            }
            w *= 0.5 / b(x);
            hits += i32::from(x == 0);
        }
        if ok {
            z += w;
            zeros += w * hits as f64;
            end[x as usize] += w;
        }
    }
    let e = enumerate_sos(&seq, b0, n, Boundary::Free).unwrap();
    assert_relative_eq!(e.z, z, max_relative = 1e-13);
    assert_relative_eq!(e.expected_returns, zeros / z, max_relative = 1e-13);
    for (got, want) in e.end_heights.iter().zip(&end) {
        assert_relative_eq!(*got, want / z, max_relative = 1e-12, epsilon = 1e-300);
    }
    assert_relative_eq!(e.end_heights.iter().sum::<f64>(), 1.0, max_relative = 1e-14);
}

#[test]
fn enumeration_limits() {
    assert!(matches!(enumerate_sos(&flat(), 0.2, 25, Boundary::Free), Err(Error::Resource(_))));
    assert!(enumerate_sos(&flat(), -0.2, 4, Boundary::Free).is_err());
    let e = enumerate_sos(&flat(), 0.2, 0, Boundary::Bridge).unwrap();
    assert_relative_eq!(e.z, 5.0, max_relative = 1e-15);
}

#[test]
fn bridge_identity_across_families() {
    for (a, s, frac) in [(1.0, 1.0, 0.4), (0.97, 1.25, 0.6), (1.0, 2.0, 0.8)] {
        let seq = HyperParams::new(a, s).unwrap().seq();
        let walk = localized_walk(&seq, frac * b0_critical(&seq).unwrap()).unwrap();
        assert!(kernel_row_defect(&walk, 64) < 1e-12);
        for n in 1..=8 {
            let (z, rhs) = bridge_identity(&seq, &walk, n).unwrap();
            assert_relative_eq!(z, rhs, max_relative = 1e-10);
        }
    }
}

#[test]
fn even_heights_carry_half_the_mass() {
    let seq = PotentialSeq::hyper(0.97, 1.25).unwrap();
    let walk = localized_walk(&seq, 0.5 * b0_critical(&seq).unwrap()).unwrap();
    let even: f64 = walk.v.iter().step_by(2).map(|v| v * v).sum();
    let all: f64 = walk.v.iter().map(|v| v * v).sum();
    assert_relative_eq!(even, 0.5 * all, max_relative = 1e-10);
}

#[test]
fn finite_size_density_approaches_m() {
    let seq = flat();
    let m = return_density(&seq, 0.2).unwrap();
    let bridge = finite_size_m(&seq, 0.2, &(1..=12).collect::<Vec<_>>(), Boundary::Bridge).unwrap();
    assert_eq!(bridge[0].1, 0.0);
    assert!(bridge.windows(2).all(|w| w[1].1 > w[0].1 && w[1].1 < m));
    assert!((bridge[11].1 - m).abs() < 0.01);
    // free paths alternate with the parity of N; each parity class is monotone
    let free = finite_size_m(&seq, 0.2, &(2..=24).collect::<Vec<_>>(), Boundary::Free).unwrap();
    let even: Vec<f64> = free.iter().filter(|(n, _)| n % 2 == 0).map(|x| x.1).collect();
    let odd: Vec<f64> = free.iter().filter(|(n, _)| n % 2 == 1).map(|x| x.1).collect();
    assert!(even.windows(2).all(|w| w[1] < w[0] && w[1] > m));
    assert!(odd.windows(2).all(|w| w[1] > w[0] && w[1] < m));
    assert!((even.last().unwrap() - m).abs() < 1e-3);
}

#[test]
fn finite_size_density_decays_above_critical() {
    let bridge = finite_size_m(&flat(), 0.55, &(3..=12).collect::<Vec<_>>(), Boundary::Bridge).unwrap();
    assert!(bridge.windows(2).all(|w| w[1].1 < w[0].1));
}

#[test]
fn sampled_walk_matches_stationary_law() {
    let walk = localized_walk(&flat(), 0.2).unwrap();
    let st = sample_walk(&walk, 1_000_000, 20_241_016).unwrap();
    assert_eq!(st.histogram.iter().sum::<u64>(), st.steps);
    assert_eq!(st.odd_returns, 0);
    assert!((st.return_fraction - 0.375).abs() < 3.0 * st.return_se);
    for n in 0..=5 {
        assert!((st.occupation[n] - walk.nu[n]).abs() < 3.0 * st.occupation_se[n], "n = {n}");
    }
    assert!((st.even_origin_fraction - 2.0 * walk.nu[0]).abs() < 3.0 * st.even_origin_se);
}

#[test]
fn sampling_is_reproducible() {
    let walk = localized_walk(&flat(), 0.2).unwrap();
    let a = sample_walk(&walk, 10_000, 7).unwrap();
    assert_eq!(a, sample_walk(&walk, 10_000, 7).unwrap());
    assert_eq!(a.histogram[1] > 0, true);
    let reps = sample_replicas(&walk, 10_000, 7, 3).unwrap();
    assert_eq!(reps[0], a);
    assert_ne!(reps[1].histogram, a.histogram);
    assert!(sample_walk(&walk, 0, 7).is_err());
    // X_1 = 1 always
    let one = sample_walk(&walk, 1, 99).unwrap();
    assert_eq!(one.histogram[1], 1);
}
