//! Acceptance criteria 1-11. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.
#![allow(clippy::needless_range_loop)]

use lcstat::bingham::{s2_from_r, s4_from_r, s4_from_r_moment_form, r_from_s2, q_from_b, solve_bingham, QTensor};
use lcstat::frank::{concentration_from_phi, dimensional_k, fig4_sweep, frank_constants, frank_from_tensor_model};
use lcstat::geometry_kernel::*;
use lcstat::nematic_model::{equilibrium_branches, isotropic_linearization, Phase};
use lcstat::quadrature::SphereQuadrature;
use lcstat::smectic1d::*;
use lcstat::tensor_algebra::*;
use nalgebra::{Matrix3, Rotation3, Vector3};
use num_rational::Ratio;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{LN_2, PI};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

type Outcome = (bool, String);

fn random_unit(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    let z: f64 = rng.random_range(-1.0..1.0);
    let phi: f64 = rng.random_range(0.0..2.0 * PI);
    let s = (1.0 - z * z).sqrt();
    Vector3::new(s * phi.cos(), s * phi.sin(), z)
}

fn c1_excluded_volume() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let gamma = rng.random_range(0.05..PI - 0.05);
        let eta = rng.random_range(0.05..1.0);
        let geom = RodGeometry::unit(eta).unwrap();
        let (m, m2) = frame_aligned_pair(gamma);
        let est = moment_mc(&m, &m2, &geom, 0, 1_000_000, 100 + i).unwrap();
        worst = worst.max((est.value[0] - excluded_volume(gamma, &geom)).abs() / est.stderr[0]);
    }
    let secs = t.elapsed().as_secs_f64();
    (worst <= 3.0 && secs < 30.0, format!("max |z| = {worst:.3} over 20 draws, {secs:.1} s"))
}

fn c2_moment_closed_forms() -> Outcome {
    let mut worst_z = 0.0f64;
    let mut seed = 200;
    for gamma in [PI / 6.0, PI / 3.0, PI / 2.0] {
        for eta in [0.1, 0.5] {
            let geom = RodGeometry::unit(eta).unwrap();
            let (m, m2) = frame_aligned_pair(gamma);
            let est = moment_mc_orders(&m, &m2, &geom, &[2, 4], 10_000_000, seed).unwrap();
            seed += 1;
            let d2 = second_moment_diag(gamma, &geom).unwrap();
            for i in 0..3 {
                let (v, s) = est[0].component(&[i, i]);
                worst_z = worst_z.max((v - d2[i]).abs() / s);
            }
            let w = fourth_moment_frame(gamma, &geom).unwrap();
            let pairs = [
                ([0, 0, 0, 0], w.w1111),
                ([1, 1, 1, 1], w.w2222),
                ([2, 2, 2, 2], w.w3333),
                ([0, 0, 1, 1], w.w1122),
                ([1, 1, 2, 2], w.w2233),
                ([0, 0, 2, 2], w.w1133),
            ];
            for (idx, exact) in pairs {
                let (v, s) = est[1].component(&idx);
                worst_z = worst_z.max((v - exact).abs() / s);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_rel = 0.0f64;
    for _ in 0..200 {
        let (m, m2) = (random_unit(&mut rng), random_unit(&mut rng));
        if m.cross(&m2).norm() < 1e-3 {
            continue;
        }
        let geom = RodGeometry::unit(rng.random_range(0.05..1.0)).unwrap();
        let a = second_moment_from_b(&m, &m2, &geom).unwrap();
        let b = second_moment_from_frame(&m, &m2, &geom).unwrap();
        worst_rel = worst_rel.max((a - b).abs().max() / b.abs().max());
        let a = fourth_moment_from_r(&m, &m2, &geom).unwrap();
        let b = fourth_moment_from_frame(&m, &m2, &geom).unwrap();
        let diff = a.components().iter().zip(b.components()).fold(0.0f64, |x, (p, q)| x.max((p - q).abs()));
        worst_rel = worst_rel.max(diff / b.max_abs());
    }
    (
        worst_z <= 3.0 && worst_rel <= 1e-9,
        format!("max |z| = {worst_z:.3} over 54 components; reconstruction rel err {worst_rel:.2e}"),
    )
}

fn c3_legendre_table() -> Outcome {
    let sq = |x: f64| (1.0 - x * x).sqrt();
    let asx = |x: f64| if x == 0.0 { 1.0 } else { x.asin() / x };
    let checks: Vec<(f64, f64)> = vec![
        (legendre_project(sq, 0).unwrap(), PI / 4.0),
        (legendre_project(sq, 2).unwrap(), -5.0 * PI / 32.0),
        (legendre_project(sq, 4).unwrap(), -9.0 * PI / 256.0),
        (legendre_project(|x| 1.0 / sq(x), 0).unwrap(), PI / 2.0),
        (legendre_project(|x| 1.0 / sq(x), 2).unwrap(), 5.0 * PI / 8.0),
        (legendre_project(asx, 0).unwrap(), PI * LN_2 / 2.0),
        (legendre_project(asx, 2).unwrap(), 5.0 * PI / 16.0 * (3.0 - 4.0 * LN_2)),
        (1.0 / legendre_project(|x| x * x, 2).unwrap(), 1.5),
        (1.0 / legendre_project(|x| x.powi(4), 4).unwrap(), 35.0 / 8.0),
    ];
    let worst = checks.iter().fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    (worst <= 1e-8, format!("max abs err {worst:.2e} over 9 coefficients"))
}

fn c4_bingham() -> Outcome {
    let rt = [-0.4, -0.1, 0.1, 0.5, 0.9]
        .iter()
        .map(|&s| (s2_from_r(r_from_s2(s).unwrap()).unwrap() - s).abs())
        .fold(0.0f64, f64::max);
    let s4 = [-5.0, 0.0, 1.0, 10.0, 50.0]
        .iter()
        .map(|&r| (s4_from_r(r).unwrap() - s4_from_r_moment_form(r).unwrap()).abs())
        .fold(0.0f64, f64::max);
    let quad = SphereQuadrature::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut biax = 0.0f64;
    let mut n = 0;
    while n < 50 {
        let (l1, l2): (f64, f64) = (rng.random_range(-0.3..0.6), rng.random_range(-0.3..0.6));
        let l3 = -l1 - l2;
        if !(-0.3..0.6).contains(&l3) {
            continue;
        }
        let axis = random_unit(&mut rng) * rng.random_range(0.0..PI);
        let rot = Rotation3::from_scaled_axis(axis).into_inner();
        let q = QTensor::project(rot * Matrix3::from_diagonal(&Vector3::new(l1, l2, l3)) * rot.transpose());
        let err = match solve_bingham(&q, &quad) {
            Ok(sol) => (q_from_b(&sol.b, &quad).0 - q.matrix()).abs().max(),
            Err(_) => f64::INFINITY,
        };
        biax = biax.max(err);
        n += 1;
    }
    (
        rt <= 1e-10 && s4 <= 1e-10 && biax <= 1e-9,
        format!("S2 roundtrip {rt:.2e}, S4 forms {s4:.2e}, biaxial Q roundtrip {biax:.2e} on 50 draws"),
    )
}

fn c5_bifurcation() -> Outcome {
    let (mut lo, mut hi) = (10.0, 20.0);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if isotropic_linearization(mid).unwrap() > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let spinodal = 0.5 * (lo + hi);
    let grid: Vec<f64> = (0..=80).map(|i| 20.0 + 0.5 * i as f64).chain((7..=20).map(|i| 10.0 * i as f64)).collect();
    let mut bad = Vec::new();
    for &alpha in &grid {
        let eq = equilibrium_branches(alpha).unwrap();
        let ok = matches!(eq.nematic(), Some(n) if n.free_energy < eq.isotropic().free_energy && eq.preferred().r > 0.0);
        if !ok {
            bad.push(alpha);
        }
    }
    (
        (spinodal - 16.0).abs() <= 1e-6 && bad.is_empty(),
        format!("sign change at alpha = {spinodal:.9}; nematic preferred at {}/{} points in [20, 200]", grid.len() - bad.len(), grid.len()),
    )
}

fn c6_frank_algebra() -> Outcome {
    let mut worst = 0.0f64;
    for eta in [0.05, 0.1, 0.3, 0.6, 1.0] {
        let geom = RodGeometry::unit(eta).unwrap();
        for i in 0..10 {
            let alpha = 20.0 + 4.0 * i as f64;
            let a = frank_constants(alpha, &geom).unwrap().as_array();
            let b = frank_from_tensor_model(alpha, &geom, 1.0).unwrap().as_array();
            for k in 0..4 {
                worst = worst.max((a[k] - b[k]).abs() / a[k].abs());
            }
        }
    }
    let mut ratio_dev = 0.0f64;
    let mut order_ok = true;
    for eta in [1e-4, 3e-4, 1e-3] {
        let geom = RodGeometry::unit(eta).unwrap();
        for alpha in [20.0, 30.0, 40.0, 60.0] {
            let k = frank_constants(alpha, &geom).unwrap();
            ratio_dev = ratio_dev.max((k.k1 / k.k2 - 3.0).abs());
            order_ok &= k.k3 > k.k1;
        }
    }
    (
        worst <= 1e-8 && ratio_dev <= 1e-3 && order_ok,
        format!("two-path rel err {worst:.2e} on 5x10 grid; |K1/K2 - 3| <= {ratio_dev:.2e}; K3 > K1: {order_ok}"),
    )
}

fn c7_fig4_qualitative() -> Outcome {
    let t = Instant::now();
    let grid: Vec<f64> = (0..=172).map(|i| 14.0 + 0.5 * i as f64).collect();
    let rows = fig4_sweep(&[0.1, 1.0], &grid).unwrap();
    let mut checked = 0;
    let mut ok = true;
    let mut crossings = Vec::new();
    let mut prev: Option<f64> = None;
    for row in &rows {
        let Some(k) = row.constants else { continue };
        if row.eta == 0.1 {
            checked += 1;
            ok &= k.k3 >= k.k1 && k.k1 >= k.k2 && k.k2 > 0.0;
        } else {
            let d = k.k1 - k.k3;
            if let Some(p) = prev {
                if p.signum() != d.signum() {
                    crossings.push(row.alpha);
                }
            }
            prev = Some(d);
        }
    }
    let short: Vec<_> = rows.iter().filter(|r| r.eta == 1.0).filter_map(|r| r.constants).collect();
    let (first, last) = (short[0], short[short.len() - 1]);
    let report = format!(
        "eta=1.0 exploratory: K1-K3 = {:.3e} at alpha {} and {:.3e} at alpha {}, sign changes at {:?}",
        first.k1 - first.k3,
        first.alpha,
        last.k1 - last.k3,
        last.alpha,
        crossings
    );
    let secs = t.elapsed().as_secs_f64();
    (ok && checked > 0 && secs < 60.0, format!("K3 >= K1 >= K2 > 0 on {checked} nematic points at eta=0.1, {secs:.1} s; {report}"))
}

fn c8_dimensional() -> Outcome {
    let (d, t, phi) = (5e-8, 400.0, 0.4);
    let eta = 1.0 / 15.0;
    let l = d / eta;
    let c = concentration_from_phi(phi, l, d);
    let alpha = PI * l * l * d * c;
    let k = frank_constants(alpha, &RodGeometry::unit(eta).unwrap()).unwrap();
    let dyn_k: Vec<f64> = k.as_array().iter().map(|&v| dimensional_k(v, c, l, d, t).unwrap()).collect();
    let ok = dyn_k[..3].iter().all(|&v| (1e-7..=1e-5).contains(&v));
    (
        ok,
        format!(
            "L = {:.0} A, alpha = {alpha:.2}: K1 = {:.3e}, K2 = {:.3e}, K3 = {:.3e} dyn (K4 = {:.3e})",
            l * 1e8,
            dyn_k[0],
            dyn_k[1],
            dyn_k[2],
            dyn_k[3]
        ),
    )
}

struct SmecticSweep {
    points: Vec<PhasePoint>,
    boundaries: Vec<PhaseBoundary>,
    secs: f64,
}

fn smectic_sweep() -> SmecticSweep {
    let t = Instant::now();
    let coeffs = SmecticCoefficients::fig5_preset();
    let opts = MinimizeOptions::default();
    let grid: Vec<f64> = (0..=30).map(|i| 10.0 + i as f64).collect();
    let sweep = phase_diagram(&grid, &coeffs, &opts).unwrap();
    let boundaries = refine_boundaries(&sweep, &coeffs, &opts, 1e-4).unwrap();
    let points = sweep.into_iter().filter_map(|(_, r)| r.ok()).collect();
    SmecticSweep { points, boundaries, secs: t.elapsed().as_secs_f64() }
}

fn c9_layer_period(s: &SmecticSweep) -> Outcome {
    let smectic: Vec<(f64, f64)> = s.points.iter().filter_map(|p| p.d.map(|d| (p.alpha, d))).collect();
    let in_range = smectic.iter().filter(|(_, d)| (1.50..=1.55).contains(d)).count();
    let drops: Vec<String> = smectic
        .windows(2)
        .filter(|w| w[1].1 < w[0].1 - 1e-3)
        .map(|w| format!("{:.4}->{:.4} at alpha {}->{}", w[0].1, w[1].1, w[0].0, w[1].0))
        .collect();
    let (dmin, dmax) = smectic.iter().fold((f64::MAX, f64::MIN), |(a, b), (_, d)| (a.min(*d), b.max(*d)));
    (
        in_range > 0 && drops.is_empty() && s.secs < 300.0,
        format!(
            "{} smectic points, d in [{dmin:.4}, {dmax:.4}], {in_range} inside [1.50, 1.55]; decreases beyond 1e-3: {:?}; {:.1} s",
            smectic.len(),
            drops,
            s.secs
        ),
    )
}

fn c10_phase_structure(s: &SmecticSweep) -> Outcome {
    let first = s.points.first().map(|p| p.phase);
    let last = s.points.last().map(|p| p.phase);
    let slope = s.points.windows(2).map(|w| ((w[1].energy - w[0].energy) / (w[1].alpha - w[0].alpha)).abs()).fold(0.0f64, f64::max);
    let mut continuity = true;
    let mut notes = Vec::new();
    for b in &s.boundaries {
        let bound = 2.0 * slope * (b.alpha_hi - b.alpha_lo);
        continuity &= b.energy_jump() <= bound;
        notes.push(format!("{}->{} at {:.5} jump {:.1e} (bound {:.1e})", b.phase_lo, b.phase_hi, b.alpha_lo, b.energy_jump(), bound));
    }
    let coeffs = SmecticCoefficients::fig5_preset();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0f64;
    let mut n = 0;
    while n < 10 {
        let u: Vec<f64> = (1..=8).map(|k| 0.8 * (rng.random::<f64>() - 0.5) / k as f64).collect();
        let v0 = rng.random_range(0.1..0.7);
        let v: Vec<f64> = std::iter::once(v0)
            .chain((1..=8).map(|k| v0 * u[k - 1] + 0.08 * (rng.random::<f64>() - 0.5) / k as f64))
            .collect();
        let p = SmecticProfile::new(rng.random_range(1.2..2.0), u, v, 8).unwrap();
        let alpha = rng.random_range(10.0..40.0);
        let Ok((_, g)) = smectic_energy_gradient(&p, alpha, &coeffs) else { continue };
        let h = 1e-6;
        let mut err = 0.0f64;
        for i in 0..g.len() {
            let at = |s: f64| {
                let mut q = p.clone();
                if i < 8 { q.u[i] += s } else { q.v[i - 8] += s }
                smectic_energy(&q, alpha, &coeffs).unwrap()
            };
            err = err.max(((at(h) - at(-h)) / (2.0 * h) - g[i]).abs());
        }
        worst = worst.max(err / g.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        n += 1;
    }
    let ok = first == Some(Phase::Isotropic) && last == Some(Phase::SmecticA) && continuity && worst <= 1e-6;
    (
        ok,
        format!(
            "alpha 10: {:?}, alpha 40: {:?}; boundaries [{}]; gradient rel err {worst:.2e} on 10 profiles",
            first.map(|p| p.label()),
            last.map(|p| p.label()),
            notes.join("; ")
        ),
    )
}

fn c11_tensor_identities() -> Outcome {
    type Q = Ratio<i64>;
    let units: [[Q; 3]; 3] = [
        [Q::new(3, 5), Q::new(4, 5), Q::new(0, 1)],
        [Q::new(2, 3), Q::new(1, 3), Q::new(2, 3)],
        [Q::new(2, 7), Q::new(3, 7), Q::new(6, 7)],
    ];
    let mut exact = true;
    for m in &units {
        for k in 2..=4 {
            exact &= xi_tensor_unchecked(k, *m).contract_pair().is_zero();
        }
        for k in 0..=4usize {
            for l in 1..=2usize {
                if k + 2 * l > 4 {
                    continue;
                }
                let lhs = sigma_tensor(*m, k, l).unwrap().contract_pair();
                let mut rhs = sigma_tensor(*m, k, l - 1).unwrap().scale(Q::from_integer((2 * k + 2 * l + 1) as i64));
                if k >= 2 {
                    rhs = rhs.add(&sigma_tensor(*m, k - 2, l).unwrap());
                }
                exact &= lhs == rhs;
            }
        }
    }
    let quad = SphereQuadrature::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let n = random_unit(&mut rng);
        for r in [-3.0, 2.0, 8.0] {
            let b = (n * n.transpose() - Matrix3::identity() / 3.0) * r;
            for (k, s) in [(2usize, s2_from_r(r).unwrap()), (4, s4_from_r(r).unwrap())] {
                let mut z = 0.0;
                let mut acc = SymTensor::zeros(k);
                for (node, w) in quad.nodes.iter().zip(&quad.weights) {
                    let m = Vector3::from(*node);
                    let e = w * (m.transpose() * b * m)[0].exp();
                    z += e;
                    acc = acc.add(&xi_tensor(k, *node).unwrap().scale(e));
                }
                let want = xi_tensor(k, [n.x, n.y, n.z]).unwrap().scale(s);
                let err = acc.scale(1.0 / z).components().iter().zip(want.components()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                worst = worst.max(err);
            }
        }
    }
    (exact && worst <= 1e-9, format!("exact rational identities: {exact}; uniaxial averages err {worst:.2e}"))
}

fn run(id: usize, f: impl FnOnce() -> Outcome) -> bool {
    let (ok, detail) = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
        (false, format!("panicked: {}", msg.unwrap_or_default()))
    });
    println!("criterion {id:>2} {}: {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

fn main() {
    let mut results = vec![
        run(1, c1_excluded_volume),
        run(2, c2_moment_closed_forms),
        run(3, c3_legendre_table),
        run(4, c4_bingham),
        run(5, c5_bifurcation),
        run(6, c6_frank_algebra),
        run(7, c7_fig4_qualitative),
        run(8, c8_dimensional),
    ];
    match catch_unwind(smectic_sweep) {
        Ok(sweep) => {
            results.push(run(9, || c9_layer_period(&sweep)));
            results.push(run(10, || c10_phase_structure(&sweep)));
        }
        Err(_) => {
            results.push(run(9, || (false, "smectic sweep panicked".into())));
            results.push(run(10, || (false, "smectic sweep panicked".into())));
        }
    }
    results.push(run(11, c11_tensor_identities));
    let passed = results.iter().filter(|&&r| r).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
