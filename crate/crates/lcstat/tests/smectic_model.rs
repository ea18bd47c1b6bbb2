#![allow(clippy::needless_range_loop)]

use lcstat::bingham::{r_from_s2, s4_from_r};
use lcstat::nematic_model::{equilibrium_branches, Phase};
use lcstat::smectic1d::*;
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

const ISO_ENTROPY: f64 = -2.5310242469692907; // -ln 4π

fn random_profile(rng: &mut ChaCha8Rng, modes: usize, amp: f64) -> SmecticProfile {
    loop {
        let d = rng.random_range(1.2..2.0);
        let u: Vec<f64> = (1..=modes).map(|n| amp * (rng.random::<f64>() - 0.5) / n as f64).collect();
        let v0 = rng.random_range(0.1..0.7);
        let mut v = vec![v0];
        for n in 1..=modes {
            v.push(v0 * u[n - 1] + 0.1 * amp * (rng.random::<f64>() - 0.5) / n as f64);
        }
        let p = SmecticProfile::new(d, u, v, modes).unwrap();
        if smectic_energy(&p, 20.0, &SmecticCoefficients::fig5_preset()).is_ok() {
            return p;
        }
    }
}

fn profile_strategy() -> impl Strategy<Value = SmecticProfile> {
    any::<u64>().prop_map(|seed| random_profile(&mut ChaCha8Rng::seed_from_u64(seed), 6, 0.8))
}

#[test]
fn printed_coefficients() {
    let n = smectic_n(0.0).unwrap();
    assert_eq!(n.n22, -55.0 / 4032.0);
    assert_eq!((n.n12, n.n13), (-5.0 / 16.0, -9.0 / 128.0));
    let p = SmecticCoefficients::fig5_preset();
    assert_eq!((p.n31, p.n32, p.eta), (0.00089, 0.00089, 0.1));
    assert!((smectic_n(0.1).unwrap().n31 - (11.0 / 57600.0 + 1.3 / 5400.0)).abs() < 1e-18);
    assert!(smectic_n(0.1).unwrap().with_n3(0.0, 1.0).unwrap_err().is_input());
    assert!(smectic_n(1.5).unwrap_err().is_input());
}

#[test]
fn isotropic_energy() {
    let n = SmecticCoefficients::fig5_preset();
    let p = SmecticProfile::homogeneous(1.5, 0.0, (8, 8, 8)).unwrap();
    for alpha in [3.0, 12.0] {
        let e = smectic_energy(&p, alpha, &n).unwrap();
        assert!((e - (ISO_ENTROPY + alpha / 2.0 * n.n11)).abs() < 1e-12);
    }
    assert!((ISO_ENTROPY + (4.0 * PI).ln()).abs() < 1e-15);
}

#[test]
fn homogeneous_nematic_matches_bulk_branch() {
    let n = SmecticCoefficients::fig5_preset();
    for alpha in [18.0, 25.0, 40.0] {
        let b = *equilibrium_branches(alpha).unwrap().nematic().unwrap();
        let p = SmecticProfile::homogeneous(1.5, b.s2, (4, 4, 4)).unwrap();
        let e = smectic_energy(&p, alpha, &n).unwrap();
        // the second-order bulk model carries no S4² term and no constant N11 part
        let aligned = e - alpha / 2.0 * (n.n11 + n.n13 * b.s4 * b.s4);
        assert!((aligned - b.free_energy).abs() < 1e-9, "alpha {alpha}: {aligned} vs {}", b.free_energy);
    }
}

#[test]
fn infeasible_profile_names_the_point() {
    let n = SmecticCoefficients::fig5_preset();
    let p = SmecticProfile::new(1.5, vec![1.2], vec![0.3, 0.0], 1).unwrap();
    let err = smectic_energy(&p, 20.0, &n).unwrap_err();
    assert!(err.to_string().contains("collocation point"), "{err}");
    assert!(err.is_input());
}

#[test]
fn aliasing_control() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = SmecticCoefficients::fig5_preset();
    for _ in 0..5 {
        let p = random_profile(&mut rng, 8, 0.4);
        let m = p.grid_size();
        let a = smectic_energy_on_grid(&p, 25.0, &n, m, 0.0).unwrap();
        let b = smectic_energy_on_grid(&p, 25.0, &n, 2 * m, 0.0).unwrap();
        assert!((a - b).abs() < 1e-10, "{:e}", (a - b).abs());
    }
    let p = random_profile(&mut rng, 8, 0.4);
    assert!(smectic_energy_on_grid(&p, 25.0, &n, 10, 0.0).unwrap_err().is_input());
}

#[test]
fn translation_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = SmecticCoefficients::fig5_preset();
    for _ in 0..5 {
        let p = random_profile(&mut rng, 8, 0.4);
        // a converged quadrature, so the check is not an aliasing check
        let m = 8 * p.grid_size();
        let a = smectic_energy_on_grid(&p, 25.0, &n, m, 0.0).unwrap();
        let b = smectic_energy_on_grid(&p, 25.0, &n, m, 0.37).unwrap();
        assert!((a - b).abs() < 1e-10, "{:e}", (a - b).abs());
    }
}

#[test]
fn s4_spectrum_matches_direct_transform() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..5 {
        let p = random_profile(&mut rng, 8, 0.6);
        let m = p.grid_size();
        let (n1, _, n3) = p.modes();
        let mut w = vec![0.0; n3 + 1];
        for j in 0..m {
            let x = j as f64 / m as f64;
            let c = 1.0 + (1..=n1).map(|k| p.u[k - 1] * (2.0 * PI * k as f64 * x).cos()).sum::<f64>();
            let cs2: f64 = p.v.iter().enumerate().map(|(k, v)| v * (2.0 * PI * k as f64 * x).cos()).sum();
            let q = c * s4_from_r(r_from_s2(cs2 / c).unwrap()).unwrap();
            for (k, wk) in w.iter_mut().enumerate() {
                let f = if k == 0 { 1.0 } else { 2.0 };
                *wk += f * q * (2.0 * PI * k as f64 * x).cos() / m as f64;
            }
        }
        let got = p.spectra().unwrap().w;
        for (a, b) in got.iter().zip(&w) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }
}

#[test]
fn isotropic_minimizer_below_onset() {
    let n = SmecticCoefficients::fig5_preset();
    let opts = MinimizeOptions::default();
    for alpha in [4.0, 10.0] {
        let m = minimize_profile(alpha, &n, &opts, &[]).unwrap();
        assert!((m.energy - (ISO_ENTROPY + alpha / 2.0 * n.n11)).abs() < 1e-8);
        assert_eq!(classify_phase(&m.profile, PHASE_TOL, PHASE_TOL).unwrap(), Phase::Isotropic);
    }
}

#[test]
fn inner_descent_is_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let n = SmecticCoefficients::fig5_preset();
    for alpha in [12.0, 25.0, 35.0] {
        let p = random_profile(&mut rng, 8, 0.8);
        let res = minimize_at_period(&p, alpha, &n, 200, 1e-10).unwrap();
        for w in res.history.windows(2) {
            assert!(w[1] <= w[0], "alpha {alpha}: {} > {}", w[1], w[0]);
        }
        assert!(res.energy <= smectic_energy(&p, alpha, &n).unwrap());
    }
}

#[test]
fn minimizer_is_deterministic() {
    let n = SmecticCoefficients::fig5_preset();
    let opts = MinimizeOptions::default();
    let a = minimize_profile(24.0, &n, &opts, &[]).unwrap();
    let b = minimize_profile(24.0, &n, &opts, &[]).unwrap();
    assert_eq!(a, b);
}

#[test]
fn refinement_stability() {
    let n = SmecticCoefficients::fig5_preset();
    let coarse = MinimizeOptions::default();
    let fine = MinimizeOptions { modes: (16, 16, 16), ..MinimizeOptions::default() };
    let a = minimize_profile(25.0, &n, &coarse, &[]).unwrap();
    let b = minimize_profile(25.0, &n, &fine, &[]).unwrap();
    assert_eq!(classify_phase(&a.profile, PHASE_TOL, PHASE_TOL).unwrap(), Phase::SmecticA);
    let (de, dd) = ((a.energy - b.energy).abs(), (a.profile.d - b.profile.d).abs());
    assert!(de < 1e-6 && dd < 1e-3, "energy change {de:e}, period change {dd:e}");
}

#[test]
fn classification_thresholds() {
    let mut p = SmecticProfile::homogeneous(1.5, 0.0, (2, 2, 2)).unwrap();
    assert_eq!(classify_phase(&p, PHASE_TOL, PHASE_TOL).unwrap(), Phase::Isotropic);
    p.v[0] = 0.5;
    assert_eq!(classify_phase(&p, PHASE_TOL, PHASE_TOL).unwrap(), Phase::Nematic);
    p.u[0] = 0.3;
    assert_eq!(classify_phase(&p, PHASE_TOL, PHASE_TOL).unwrap(), Phase::SmecticA);
}

#[test]
fn option_validation() {
    let n = SmecticCoefficients::fig5_preset();
    let bad = MinimizeOptions { d_range: (2.0, 1.0), ..MinimizeOptions::default() };
    assert!(minimize_profile(20.0, &n, &bad, &[]).unwrap_err().is_input());
    let bad = MinimizeOptions { modes: (0, 4, 4), ..MinimizeOptions::default() };
    assert!(minimize_profile(20.0, &n, &bad, &[]).unwrap_err().is_input());
    assert!(phase_diagram(&[], &n, &MinimizeOptions::default()).unwrap_err().is_input());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gradient_matches_central_differences(p in profile_strategy(), alpha in 10.0f64..40.0) {
        let n = SmecticCoefficients::fig5_preset();
        let (_, g) = smectic_energy_gradient(&p, alpha, &n).unwrap();
        let h = 1e-6;
        let n1 = p.u.len();
        let mut worst = 0.0f64;
        for i in 0..g.len() {
            let shifted = |s: f64| {
                let mut q = p.clone();
                if i < n1 { q.u[i] += s } else { q.v[i - n1] += s }
                smectic_energy(&q, alpha, &n).unwrap()
            };
            let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
            worst = worst.max((fd - g[i]).abs());
        }
        let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(worst <= 1e-6 * scale, "worst {worst:e} scale {scale:e}");
    }
}
