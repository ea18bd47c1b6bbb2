//! One-dimensional smectic-A model: cosine-series profiles of `c(x)` and
//! `c(x)S2(x)`, spectral energy, constrained minimization over profile and
//! period, phase classification and α sweeps.

use std::f64::consts::{LN_2, PI};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::bingham::{BinghamTable, TableValues};
use crate::nematic_model::{equilibrium_branches, Phase};
use crate::{Error, Result};

/// Accepted range of `S2` at collocation points.
pub const S2_FEASIBLE: (f64, f64) = (-0.49, 0.99);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmecticCoefficients {
    pub eta: f64,
    pub n11: f64,
    pub n12: f64,
    pub n13: f64,
    pub n21: f64,
    pub n22: f64,
    pub n23: f64,
    pub n24: f64,
    pub n25: f64,
    pub n31: f64,
    pub n32: f64,
}

/// All ten coefficients at aspect ratio `η ∈ [0, 1]`.
pub fn smectic_n(eta: f64) -> Result<SmecticCoefficients> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Input(format!("eta = {eta} not in [0, 1]")));
    }
    let e2 = eta * eta;
    Ok(SmecticCoefficients {
        eta,
        n11: 0.5 + 2.0 * eta + 4.0 * e2 / 3.0,
        n12: -5.0 / 16.0,
        n13: -9.0 / 128.0,
        n21: 1.0 / 72.0 + eta / 9.0 + 5.0 * e2 / 18.0 + e2 * eta / 3.0 + 2.0 * e2 * e2 / 15.0,
        n22: -55.0 / 4032.0 - (432.0 * LN_2 - 367.0) * e2 / 4704.0,
        n23: (365.0 - 2048.0 * LN_2) * e2 / 12544.0,
        n24: 7.0 / 288.0 + 2.0 * eta / 9.0 + 7.0 * e2 / 18.0 + e2 * eta / 6.0,
        n25: -1.0 / 112.0 - (12.0 * LN_2 - 10.0) * e2 / 49.0,
        n31: 11.0 / 57600.0 + 13.0 * eta / 5400.0,
        n32: 107.0 / 451584.0 + eta / 216.0,
    })
}

impl SmecticCoefficients {
    /// Replace the fourth-order coefficients; both must be positive.
    pub fn with_n3(mut self, n31: f64, n32: f64) -> Result<Self> {
        if !(n31 > 0.0 && n32 > 0.0) {
            return Err(Error::Input(format!("N31 = {n31} and N32 = {n32} must be positive")));
        }
        self.n31 = n31;
        self.n32 = n32;
        Ok(self)
    }

    /// `η = 0.1` with `N31 = N32 = 0.00089`.
    pub fn fig5_preset() -> Self {
        smectic_n(0.1).and_then(|c| c.with_n3(0.00089, 0.00089)).expect("preset values are valid")
    }
}

/// Period `d` (units of L), `u[n-1] = u_n` for `n = 1..=n1` (`u_0 = 1`),
/// `v[n] = v_n` for `n = 0..=n2`, and `n3` retained modes of `cS4`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmecticProfile {
    pub d: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub n3: usize,
}

/// Pointwise values on a collocation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSamples {
    pub x: Vec<f64>,
    pub c: Vec<f64>,
    pub s2: Vec<f64>,
    pub r: Vec<f64>,
    pub s4: Vec<f64>,
}

/// `w[0..=n3]` of `cS4` and `t[0..=n1]` of `ln c + (2/3) r S2 - ln Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSpectra {
    pub w: Vec<f64>,
    pub t: Vec<f64>,
}

struct Grid {
    m: usize,
    // cos[n][j]
    cos: Vec<Vec<f64>>,
}

impl Grid {
    fn new(m: usize, nmax: usize, offset: f64) -> Self {
        let cos = (0..=nmax)
            .map(|n| (0..m).map(|j| (2.0 * PI * n as f64 * (j as f64 + offset) / m as f64).cos()).collect())
            .collect();
        Grid { m, cos }
    }

    /// Cosine coefficients `(1/M)Σ f` for `n = 0` and `(2/M)Σ f cos` otherwise.
    fn project(&self, f: &[f64], nmax: usize) -> Vec<f64> {
        (0..=nmax)
            .map(|n| {
                let s: f64 = f.iter().zip(&self.cos[n]).map(|(a, b)| a * b).sum();
                if n == 0 {
                    s / self.m as f64
                } else {
                    2.0 * s / self.m as f64
                }
            })
            .collect()
    }
}

impl SmecticProfile {
    pub fn new(d: f64, u: Vec<f64>, v: Vec<f64>, n3: usize) -> Result<Self> {
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::Input(format!("period d = {d} must be positive")));
        }
        if u.is_empty() || v.len() < 2 || n3 == 0 {
            return Err(Error::Input("mode counts n1, n2, n3 must be at least 1".into()));
        }
        Ok(SmecticProfile { d, u, v, n3 })
    }

    /// Homogeneous profile with `c = 1` and `S2 = s2`.
    pub fn homogeneous(d: f64, s2: f64, modes: (usize, usize, usize)) -> Result<Self> {
        let mut v = vec![0.0; modes.1 + 1];
        v[0] = s2;
        Self::new(d, vec![0.0; modes.0], v, modes.2)
    }

    pub fn modes(&self) -> (usize, usize, usize) {
        (self.u.len(), self.v.len() - 1, self.n3)
    }

    fn nmax(&self) -> usize {
        self.u.len().max(self.v.len() - 1).max(self.n3)
    }

    /// Default collocation size `4·max(n1, n2, n3)`.
    pub fn grid_size(&self) -> usize {
        4 * self.nmax()
    }

    fn params(&self) -> Vec<f64> {
        self.u.iter().chain(&self.v).copied().collect()
    }

    fn with_params(&self, d: f64, x: &[f64]) -> Self {
        let n1 = self.u.len();
        SmecticProfile { d, u: x[..n1].to_vec(), v: x[n1..].to_vec(), n3: self.n3 }
    }

    fn collocate(&self, grid: &Grid) -> Result<(Vec<f64>, Vec<f64>, Vec<TableValues>)> {
        let table = BinghamTable::shared();
        let mut c = vec![1.0; grid.m];
        let mut p = vec![0.0; grid.m];
        for (n, un) in self.u.iter().enumerate() {
            for (cj, cos) in c.iter_mut().zip(&grid.cos[n + 1]) {
                *cj += un * cos;
            }
        }
        for (n, vn) in self.v.iter().enumerate() {
            for (pj, cos) in p.iter_mut().zip(&grid.cos[n]) {
                *pj += vn * cos;
            }
        }
        let mut tv = Vec::with_capacity(grid.m);
        for j in 0..grid.m {
            let s2 = p[j] / c[j];
            if !(c[j] > 0.0 && s2 > S2_FEASIBLE.0 && s2 < S2_FEASIBLE.1) {
                return Err(Error::Domain(format!(
                    "constraint violated at collocation point {j} (x = {:.6}): c = {}, S2 = {}",
                    self.d * j as f64 / grid.m as f64,
                    c[j],
                    s2
                )));
            }
            tv.push(table.invert_s2(s2)?);
        }
        Ok((c, p, tv))
    }

    /// Values at `m` equispaced points `x_j = j d / m`.
    pub fn samples(&self, m: usize) -> Result<ProfileSamples> {
        let grid = Grid::new(m, self.nmax(), 0.0);
        let (c, _, tv) = self.collocate(&grid)?;
        Ok(ProfileSamples {
            x: (0..m).map(|j| self.d * j as f64 / m as f64).collect(),
            c,
            s2: tv.iter().map(|t| t.s2).collect(),
            r: tv.iter().map(|t| t.r).collect(),
            s4: tv.iter().map(|t| t.s4).collect(),
        })
    }

    pub fn spectra(&self) -> Result<ProfileSpectra> {
        let grid = Grid::new(self.grid_size(), self.nmax(), 0.0);
        let (c, _, tv) = self.collocate(&grid)?;
        let q: Vec<f64> = c.iter().zip(&tv).map(|(c, t)| c * t.s4).collect();
        let ent: Vec<f64> =
            c.iter().zip(&tv).map(|(c, t)| c.ln() + 2.0 / 3.0 * t.r * t.s2 - t.ln_z).collect();
        Ok(ProfileSpectra { w: grid.project(&q, self.n3), t: grid.project(&ent, self.u.len()) })
    }

    pub fn mean_s2(&self) -> Result<f64> {
        let s = self.samples(self.grid_size())?;
        Ok(s.s2.iter().sum::<f64>() / s.s2.len() as f64)
    }
}

/// Energy per unit length on the default grid.
pub fn smectic_energy(profile: &SmecticProfile, alpha: f64, coeffs: &SmecticCoefficients) -> Result<f64> {
    Ok(evaluate(profile, alpha, coeffs, profile.grid_size(), 0.0, false)?.0)
}

/// Energy on `m` points `x_j = (j + offset) d / m`.
pub fn smectic_energy_on_grid(
    profile: &SmecticProfile,
    alpha: f64,
    coeffs: &SmecticCoefficients,
    m: usize,
    offset: f64,
) -> Result<f64> {
    if m < 2 * profile.nmax() + 1 {
        return Err(Error::Input(format!("grid of {m} points cannot resolve {} modes", profile.nmax())));
    }
    Ok(evaluate(profile, alpha, coeffs, m, offset, false)?.0)
}

/// Energy and its gradient with respect to `(u_1..u_n1, v_0..v_n2)`.
pub fn smectic_energy_gradient(
    profile: &SmecticProfile,
    alpha: f64,
    coeffs: &SmecticCoefficients,
) -> Result<(f64, Vec<f64>)> {
    let (e, g) = evaluate(profile, alpha, coeffs, profile.grid_size(), 0.0, true)?;
    Ok((e, g.expect("gradient requested")))
}

fn evaluate(
    profile: &SmecticProfile,
    alpha: f64,
    n: &SmecticCoefficients,
    m: usize,
    offset: f64,
    want_grad: bool,
) -> Result<(f64, Option<Vec<f64>>)> {
    let nmax = profile.nmax();
    let grid = Grid::new(m, nmax, offset);
    let (c, p, tv) = profile.collocate(&grid)?;
    let mf = m as f64;
    let q: Vec<f64> = c.iter().zip(&tv).map(|(c, t)| c * t.s4).collect();
    let w = grid.project(&q, profile.n3);

    let mut ent = 0.0;
    let mut bulk = 0.0;
    for j in 0..m {
        let t = &tv[j];
        ent += c[j] * (c[j].ln() + 2.0 / 3.0 * t.r * t.s2 - t.ln_z);
        bulk += n.n11 * c[j] * c[j] + n.n12 * p[j] * p[j] + n.n13 * q[j] * q[j];
    }
    ent /= mf;
    bulk /= mf;

    let coef = |a: &[f64], i: usize| a.get(i).copied().unwrap_or(0.0);
    let k0 = 2.0 * PI / profile.d;
    let mut grad_terms = 0.0;
    for i in 1..=nmax {
        let k2 = (k0 * i as f64).powi(2);
        let (u, v, wi) = (coef(&profile.u, i - 1), coef(&profile.v, i), coef(&w, i));
        grad_terms += 0.5
            * (k2 * (-n.n21 * u * u - n.n22 * v * v - n.n23 * wi * wi - n.n24 * u * v - n.n25 * v * wi)
                + k2 * k2 * (n.n31 * u * u + n.n32 * v * v));
    }
    let energy = ent + 0.5 * alpha * (bulk + grad_terms);
    if !want_grad {
        return Ok((energy, None));
    }

    // sensitivity to w_n through the gradient terms
    let dg_dw: Vec<f64> = (0..=profile.n3)
        .map(|i| {
            if i == 0 {
                return 0.0;
            }
            let k2 = (k0 * i as f64).powi(2);
            0.5 * k2 * (-2.0 * n.n23 * w[i] - n.n25 * coef(&profile.v, i))
        })
        .collect();
    let mut ec = vec![0.0; m];
    let mut ep = vec![0.0; m];
    for j in 0..m {
        let t = &tv[j];
        let s2 = t.s2;
        let phi = 2.0 / 3.0 * t.r * s2 - t.ln_z;
        let dphi = 2.0 / 3.0 * t.r + (2.0 / 3.0 * s2 - t.dln_z) / t.ds2;
        let ds4 = t.ds4 / t.ds2;
        let mut eq = 2.0 * n.n13 * q[j] / mf;
        for (i, g) in dg_dw.iter().enumerate().skip(1) {
            eq += g * 2.0 / mf * grid.cos[i][j];
        }
        eq *= 0.5 * alpha;
        ec[j] = (c[j].ln() + 1.0 + phi - dphi * s2 + alpha * n.n11 * c[j]) / mf + eq * (t.s4 - ds4 * s2);
        ep[j] = (dphi + alpha * n.n12 * p[j]) / mf + eq * ds4;
    }
    let n1 = profile.u.len();
    let mut grad = Vec::with_capacity(n1 + profile.v.len());
    for i in 1..=n1 {
        let k2 = (k0 * i as f64).powi(2);
        let (u, v) = (profile.u[i - 1], coef(&profile.v, i));
        let direct = 0.5 * (k2 * (-2.0 * n.n21 * u - n.n24 * v) + 2.0 * k2 * k2 * n.n31 * u);
        let s: f64 = ec.iter().zip(&grid.cos[i]).map(|(a, b)| a * b).sum();
        grad.push(s + 0.5 * alpha * direct);
    }
    for i in 0..profile.v.len() {
        let s: f64 = ep.iter().zip(&grid.cos[i]).map(|(a, b)| a * b).sum();
        let direct = if i == 0 {
            0.0
        } else {
            let k2 = (k0 * i as f64).powi(2);
            let (u, v) = (coef(&profile.u, i - 1), profile.v[i]);
            0.5 * (k2 * (-2.0 * n.n22 * v - n.n24 * u - n.n25 * coef(&w, i)) + 2.0 * k2 * k2 * n.n32 * v)
        };
        grad.push(s + 0.5 * alpha * direct);
    }
    Ok((energy, Some(grad)))
}

/// Knobs of [`minimize_profile`].
#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeOptions {
    pub modes: (usize, usize, usize),
    pub d_range: (f64, f64),
    pub d_tol: f64,
    pub d_scan_points: usize,
    pub max_iter: usize,
    pub grad_tol: f64,
    pub seed: u64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            modes: (8, 8, 8),
            d_range: (1.0, 2.5),
            d_tol: 1e-4,
            d_scan_points: 16,
            max_iter: 300,
            grad_tol: 1e-10,
            seed: 0,
        }
    }
}

impl MinimizeOptions {
    fn validate(&self) -> Result<()> {
        let (a, b) = self.d_range;
        if !(a > 0.0 && a < b && b.is_finite()) {
            return Err(Error::Input(format!("d range ({a}, {b}) must satisfy 0 < d_min < d_max")));
        }
        if self.modes.0 == 0 || self.modes.1 == 0 || self.modes.2 == 0 {
            return Err(Error::Input("mode counts must be at least 1".into()));
        }
        if self.d_scan_points < 2 || !(self.d_tol > 0.0) {
            return Err(Error::Input("need at least 2 scan points and a positive d tolerance".into()));
        }
        Ok(())
    }
}

/// Inner minimization result at fixed period.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerResult {
    pub profile: SmecticProfile,
    pub energy: f64,
    /// Energy after every accepted step, starting with the initial value.
    pub history: Vec<f64>,
    pub converged: bool,
}

fn hessian(profile: &SmecticProfile, x: &[f64], g: &[f64], alpha: f64, n: &SmecticCoefficients) -> DMatrix<f64> {
    let dim = x.len();
    let mut h = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        let step = 1e-6 * x[i].abs().max(1.0);
        let mut col = None;
        for s in [step, -step] {
            let mut xp = x.to_vec();
            xp[i] += s;
            if let Ok((_, gp)) = smectic_energy_gradient(&profile.with_params(profile.d, &xp), alpha, n) {
                col = Some((gp, s));
                break;
            }
        }
        if let Some((gp, s)) = col {
            for k in 0..dim {
                h[(k, i)] = (gp[k] - g[k]) / s;
            }
        }
    }
    (&h + h.transpose()) * 0.5
}

/// Damped Newton over `(u, v)` at fixed `d`. The Hessian is a finite
/// difference of the analytic gradient with eigenvalues replaced by their
/// absolute values (floored); steps are accepted by monotone Armijo
/// backtracking and trial points violating the constraints count as failures.
pub fn minimize_at_period(
    start: &SmecticProfile,
    alpha: f64,
    coeffs: &SmecticCoefficients,
    max_iter: usize,
    grad_tol: f64,
) -> Result<InnerResult> {
    let mut x = start.params();
    let (mut e, mut g) = smectic_energy_gradient(start, alpha, coeffs)?;
    let mut history = vec![e];
    let mut converged = false;
    let mut flat_steps = 0;
    for _ in 0..max_iter {
        if g.iter().fold(0.0f64, |m, v| m.max(v.abs())) < grad_tol {
            converged = true;
            break;
        }
        let h = hessian(start, &x, &g, alpha, coeffs);
        let eig = h.symmetric_eigen();
        let top = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
        let gv = DVector::from_column_slice(&g);
        let proj = eig.eigenvectors.transpose() * &gv;
        let scaled = DVector::from_iterator(
            proj.len(),
            proj.iter().zip(eig.eigenvalues.iter()).map(|(p, l)| p / l.abs().max(1e-10 * top)),
        );
        let newton: Vec<f64> = (&eig.eigenvectors * scaled).iter().map(|v| -v).collect();
        let steepest: Vec<f64> = g.iter().map(|v| -v / top).collect();
        let mut accepted = None;
        for dir in [&newton, &steepest] {
            let slope: f64 = g.iter().zip(dir.iter()).map(|(a, b)| a * b).sum();
            if !(slope < 0.0) {
                continue;
            }
            let mut step = 1.0;
            for _ in 0..60 {
                let trial: Vec<f64> = x.iter().zip(dir.iter()).map(|(xi, di)| xi + step * di).collect();
                if let Ok((et, gt)) = smectic_energy_gradient(&start.with_params(start.d, &trial), alpha, coeffs) {
                    if et <= e + 1e-4 * step * slope {
                        accepted = Some((trial, et, gt));
                        break;
                    }
                }
                step *= 0.5;
            }
            if accepted.is_some() {
                break;
            }
        }
        let Some((xn, en, gn)) = accepted else {
            // no decrease representable in floating point
            converged = true;
            break;
        };
        flat_steps = if e - en <= 1e-15 * e.abs().max(1.0) { flat_steps + 1 } else { 0 };
        x = xn;
        e = en;
        g = gn;
        history.push(e);
        if flat_steps >= 3 {
            converged = true;
            break;
        }
    }
    Ok(InnerResult { profile: start.with_params(start.d, &x), energy: e, history, converged })
}

/// Minimizer over profile and period.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimized {
    pub profile: SmecticProfile,
    pub energy: f64,
    pub history: Vec<f64>,
    pub converged: bool,
    /// Index into the list of starting profiles that produced the minimizer.
    pub start: usize,
}

/// Default starting profiles at period `d`: homogeneous isotropic,
/// homogeneous nematic, and single-mode density waves of small and large
/// amplitude (two of them seeded from `seed`).
pub fn starting_profiles(alpha: f64, d: f64, opts: &MinimizeOptions) -> Result<Vec<SmecticProfile>> {
    let modes = opts.modes;
    let s_nem = equilibrium_branches(alpha)?.nematic().map_or(0.5, |b| b.s2.min(0.9));
    let mut out = vec![
        SmecticProfile::homogeneous(d, 0.0, modes)?,
        SmecticProfile::homogeneous(d, s_nem, modes)?,
    ];
    let wave = |s2: f64, u1: f64, extra: &[(f64, f64)]| -> Result<SmecticProfile> {
        let mut p = SmecticProfile::homogeneous(d, s2, modes)?;
        p.u[0] = u1;
        if p.v.len() > 1 {
            p.v[1] = s2 * u1;
        }
        for (i, (a, b)) in extra.iter().enumerate() {
            if i + 1 < p.u.len() {
                p.u[i + 1] = *a;
            }
            if i + 2 < p.v.len() {
                p.v[i + 2] = *b;
            }
        }
        Ok(p)
    };
    out.push(wave(s_nem, 0.3, &[])?);
    out.push(wave(s_nem, 0.8, &[])?);
    out.push(wave(0.0, 0.1, &[])?);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..2 {
        let u1 = 0.05 + 0.25 * rng.random::<f64>();
        let extra: Vec<(f64, f64)> =
            (0..3).map(|_| (2e-3 * (rng.random::<f64>() - 0.5), 2e-3 * (rng.random::<f64>() - 0.5))).collect();
        out.push(wave(s_nem, u1, &extra)?);
    }
    Ok(out)
}

fn at_period(p: &SmecticProfile, d: f64) -> SmecticProfile {
    SmecticProfile { d, ..p.clone() }
}

/// Minimize over `(u, v)` and `d`. Every start is relaxed at five reference
/// periods (warm starts also at their own period); the best layered result seeds a coarse scan over `d_range`, which
/// is refined by golden-section search. Uniform results do not depend on `d`.
pub fn minimize_profile(
    alpha: f64,
    coeffs: &SmecticCoefficients,
    opts: &MinimizeOptions,
    extra_starts: &[SmecticProfile],
) -> Result<Minimized> {
    opts.validate()?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Input(format!("alpha = {alpha} must be positive")));
    }
    let (dmin, dmax) = opts.d_range;
    let starts = starting_profiles(alpha, 0.5 * (dmin + dmax), opts)?;
    let warm: Vec<&SmecticProfile> = extra_starts.iter().filter(|p| p.modes() == opts.modes).collect();
    let dgrid: Vec<f64> =
        (0..opts.d_scan_points).map(|i| dmin + (dmax - dmin) * i as f64 / (opts.d_scan_points - 1) as f64).collect();
    let refs = [0.1, 0.3, 0.5, 0.7, 0.9].map(|f| dmin + f * (dmax - dmin));
    // warm starts keep their own period as well
    let mut jobs: Vec<(usize, f64)> = (0..starts.len()).flat_map(|s| refs.iter().map(move |&d| (s, d))).collect();
    let all: Vec<&SmecticProfile> = starts.iter().chain(warm.iter().copied()).collect();
    for (i, w) in warm.iter().enumerate() {
        let s = starts.len() + i;
        jobs.push((s, w.d.clamp(dmin, dmax)));
        jobs.extend(refs.iter().map(|&d| (s, d)));
    }
    let relaxed: Vec<Option<InnerResult>> = jobs
        .par_iter()
        .map(|&(s, d)| minimize_at_period(&at_period(all[s], d), alpha, coeffs, opts.max_iter, opts.grad_tol).ok())
        .collect();
    let is_layered = |r: &InnerResult| r.profile.u.iter().any(|u| u.abs() > PHASE_TOL);
    let pick = |layered: bool| -> Option<(usize, &InnerResult)> {
        let mut best: Option<(usize, &InnerResult)> = None;
        for (&(s, _), r) in jobs.iter().zip(&relaxed) {
            if let Some(r) = r.as_ref().filter(|r| is_layered(r) == layered) {
                if best.is_none_or(|(_, b)| r.energy < b.energy - 1e-13) {
                    best = Some((s, r));
                }
            }
        }
        best
    };
    let uniform = pick(false).map(|(s, r)| (s, r.clone()));
    let Some((s_best, layered_seed)) = pick(true).map(|(s, r)| (s, r.profile.clone())) else {
        return match uniform {
            Some((s, r)) => Ok(Minimized {
                profile: r.profile,
                energy: r.energy,
                history: r.history,
                converged: r.converged,
                start: s,
            }),
            None => Err(Error::Optimization(format!(
                "no starting profile satisfied the constraints at alpha = {alpha}"
            ))),
        };
    };
    // coarse scan in d from the best layered candidate
    let scan: Vec<Option<InnerResult>> = dgrid
        .par_iter()
        .map(|&d| minimize_at_period(&at_period(&layered_seed, d), alpha, coeffs, opts.max_iter, opts.grad_tol).ok())
        .collect();
    let mut best: Option<(usize, &InnerResult)> = None;
    for (k, r) in scan.iter().enumerate() {
        if let Some(r) = r {
            if best.is_none_or(|(_, b)| r.energy < b.energy - 1e-13) {
                best = Some((k, r));
            }
        }
    }
    let Some((k_best, coarse)) = best else {
        return Err(Error::Optimization(format!("period scan failed at alpha = {alpha}")));
    };
    let coarse = coarse.clone();
    let seed = coarse.profile.clone();
    let relax = |d: f64| -> Option<InnerResult> {
        minimize_at_period(&at_period(&seed, d), alpha, coeffs, opts.max_iter, opts.grad_tol).ok()
    };
    let f = |d: f64| relax(d).map_or(f64::INFINITY, |r| r.energy);
    let step = dgrid[1] - dgrid[0];
    let mut lo = (dgrid[k_best] - step).max(dmin);
    let mut hi = (dgrid[k_best] + step).min(dmax);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > opts.d_tol {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = f(x2);
        }
    }
    let refined = relax(0.5 * (lo + hi));
    let result = match refined {
        Some(r) if r.energy <= coarse.energy => r,
        _ => coarse,
    };
    let (start, result) = match uniform {
        Some((s, u)) if u.energy < result.energy => (s, u),
        _ => (s_best, result),
    };
    Ok(Minimized { profile: result.profile, energy: result.energy, history: result.history, converged: result.converged, start })
}

/// Smectic-A if some `|u_n| > tol_density`, else nematic if the mean `S2`
/// exceeds `tol_order`, else isotropic.
pub fn classify_phase(profile: &SmecticProfile, tol_density: f64, tol_order: f64) -> Result<Phase> {
    if profile.u.iter().any(|u| u.abs() > tol_density) {
        return Ok(Phase::SmecticA);
    }
    Ok(if profile.mean_s2()? > tol_order { Phase::Nematic } else { Phase::Isotropic })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub alpha: f64,
    pub eta: f64,
    pub phase: Phase,
    /// Present only for smectic-A points.
    pub d: Option<f64>,
    pub energy: f64,
    /// `max_n |u_n|`
    pub density_amplitude: f64,
    /// `max_{n≥1} |v_n|`
    pub order_amplitude: f64,
    pub mean_s2: f64,
    pub profile: SmecticProfile,
}

/// Classification thresholds used by the sweeps.
pub const PHASE_TOL: f64 = 1e-4;

pub fn phase_point(alpha: f64, coeffs: &SmecticCoefficients, m: &Minimized) -> Result<PhasePoint> {
    let phase = classify_phase(&m.profile, PHASE_TOL, PHASE_TOL)?;
    Ok(PhasePoint {
        alpha,
        eta: coeffs.eta,
        phase,
        d: (phase == Phase::SmecticA).then_some(m.profile.d),
        energy: m.energy,
        density_amplitude: m.profile.u.iter().fold(0.0, |a, u| a.max(u.abs())),
        order_amplitude: m.profile.v[1..].iter().fold(0.0, |a, v| a.max(v.abs())),
        mean_s2: m.profile.mean_s2()?,
        profile: m.profile.clone(),
    })
}

/// One point per α in grid order. A forward pass warm-starts each point from
/// the previous minimizer; a backward pass then retries each point from its
/// right neighbour and keeps the lower energy. Failures are recorded per point
/// and the sweep continues.
pub fn phase_diagram(
    alpha_grid: &[f64],
    coeffs: &SmecticCoefficients,
    opts: &MinimizeOptions,
) -> Result<Vec<(f64, Result<PhasePoint>)>> {
    if alpha_grid.is_empty() {
        return Err(Error::Input("alpha grid must be nonempty".into()));
    }
    opts.validate()?;
    let mut out: Vec<(f64, Result<PhasePoint>)> = Vec::with_capacity(alpha_grid.len());
    let mut warm: Vec<SmecticProfile> = Vec::new();
    for &alpha in alpha_grid {
        let res = minimize_profile(alpha, coeffs, opts, &warm).and_then(|m| phase_point(alpha, coeffs, &m));
        if let Ok(p) = &res {
            warm = vec![p.profile.clone()];
        }
        out.push((alpha, res));
    }
    for i in (0..out.len().saturating_sub(1)).rev() {
        let Ok(next) = &out[i + 1].1 else { continue };
        let alpha = out[i].0;
        let warm = [next.profile.clone()];
        let Ok(retry) = minimize_profile(alpha, coeffs, opts, &warm).and_then(|m| phase_point(alpha, coeffs, &m)) else {
            continue;
        };
        let better = match &out[i].1 {
            Ok(p) => retry.energy < p.energy - 1e-12,
            Err(_) => true,
        };
        if better {
            out[i].1 = Ok(retry);
        }
    }
    Ok(out)
}

/// Bracket `[alpha_lo, alpha_hi]` around a change of phase label.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseBoundary {
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    pub phase_lo: Phase,
    pub phase_hi: Phase,
    pub energy_lo: f64,
    pub energy_hi: f64,
}

impl PhaseBoundary {
    pub fn energy_jump(&self) -> f64 {
        (self.energy_hi - self.energy_lo).abs()
    }
}

/// Bisect every label change of a sweep down to a bracket of `width`.
pub fn refine_boundaries(
    sweep: &[(f64, Result<PhasePoint>)],
    coeffs: &SmecticCoefficients,
    opts: &MinimizeOptions,
    width: f64,
) -> Result<Vec<PhaseBoundary>> {
    let ok: Vec<&PhasePoint> = sweep.iter().filter_map(|(_, r)| r.as_ref().ok()).collect();
    let mut out = Vec::new();
    for pair in ok.windows(2) {
        let (mut lo, mut hi) = (pair[0].clone(), pair[1].clone());
        if lo.phase == hi.phase {
            continue;
        }
        while hi.alpha - lo.alpha > width {
            let mid = 0.5 * (lo.alpha + hi.alpha);
            let warm = [lo.profile.clone(), hi.profile.clone()];
            let p = phase_point(mid, coeffs, &minimize_profile(mid, coeffs, opts, &warm)?)?;
            if p.phase == lo.phase {
                lo = p;
            } else {
                hi = p;
            }
        }
        out.push(PhaseBoundary {
            alpha_lo: lo.alpha,
            alpha_hi: hi.alpha,
            phase_lo: lo.phase,
            phase_hi: hi.phase,
            energy_lo: lo.energy,
            energy_hi: hi.energy,
        });
    }
    Ok(out)
}
