//! Bingham closure: the orientation density `exp(B:mm)/Z` matching a given
//! second moment `Q`.
//!
//! `B` is kept traceless, so `Z = 4π` for the uniform density. On the uniaxial
//! path `B = r(nn - I/3)` and everything reduces to integrals of `exp(r z²)`
//! over `z ∈ [0, 1]`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{Matrix3, SymmetricEigen, Vector3};

use crate::quadrature::{gauss_legendre, SphereQuadrature};
use crate::tensor_algebra::{legendre_unchecked, SymTensor};
use crate::{Error, Result};

/// Largest |r| accepted by the uniaxial path.
pub const R_GUARD: f64 = 200.0;

/// Averages of `z²`, `z⁴`, `z⁶` under `exp(r z²)` on [0, 1] and `ln ∫ exp(r z²) dz`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniaxialMoments {
    pub r: f64,
    pub z2: f64,
    pub z4: f64,
    pub z6: f64,
    pub log_i0: f64,
}

impl UniaxialMoments {
    pub fn s2(&self) -> f64 {
        (3.0 * self.z2 - 1.0) / 2.0
    }

    /// `S4` from the moment form `35⟨z⁴⟩/8 - 5S2/2 - 7/8`.
    pub fn s4(&self) -> f64 {
        35.0 * self.z4 / 8.0 - 2.5 * self.s2() - 7.0 / 8.0
    }

    /// `ln Z` for the traceless dual field `r(nn - I/3)`.
    pub fn ln_z(&self) -> f64 {
        (4.0 * PI).ln() + self.log_i0 - self.r / 3.0
    }

    pub fn ds2_dr(&self) -> f64 {
        1.5 * (self.z4 - self.z2 * self.z2)
    }

    pub fn ds4_dr(&self) -> f64 {
        (35.0 * (self.z6 - self.z4 * self.z2) - 30.0 * (self.z4 - self.z2 * self.z2)) / 8.0
    }
}

/// Panels of [0, 1] graded toward the end where `exp(r z²)` concentrates.
fn panels(r: f64) -> Vec<(f64, f64)> {
    let width = 1.0 / (8.0 * r.abs().max(1.0));
    let mut cuts = vec![0.0, 1.0];
    let mut h = 0.5;
    while h > width {
        cuts.push(if r > 0.0 { 1.0 - h } else { h });
        h *= 0.5;
    }
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2).map(|w| (w[0], w[1])).collect()
}

fn raw_sums(r: f64, per_panel: usize, panels: &[(f64, f64)]) -> [f64; 4] {
    let gl = gauss_legendre(per_panel);
    let shift = r.max(0.0);
    let mut s = [0.0; 4];
    for &(a, b) in panels {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (x, w) in gl.nodes.iter().zip(&gl.weights) {
            let z = mid + half * x;
            let z2 = z * z;
            let e = w * half * (r * z2 - shift).exp();
            s[0] += e;
            s[1] += e * z2;
            s[2] += e * z2 * z2;
            s[3] += e * z2 * z2 * z2;
        }
    }
    s
}

fn check_r(r: f64) -> Result<()> {
    if !(r.abs() <= R_GUARD) {
        return Err(Error::Input(format!("|r| = {} exceeds the guard {R_GUARD}", r.abs())));
    }
    Ok(())
}

/// Moments by a graded composite Gauss-Legendre rule, doubling the points per
/// panel until the four sums agree to 1e-14 relative.
pub fn uniaxial_moments(r: f64) -> Result<UniaxialMoments> {
    check_r(r)?;
    let p = panels(r);
    let mut prev = raw_sums(r, 16, &p);
    let mut n = 32;
    loop {
        let cur = raw_sums(r, n, &p);
        let settled = cur.iter().zip(&prev).all(|(a, b)| (a - b).abs() <= 1e-14 * a.abs().max(1e-300));
        if settled || n >= 128 {
            if !settled {
                return Err(Error::Numeric { msg: format!("uniaxial moments at r = {r} did not settle"), estimate: cur[0] });
            }
            return Ok(UniaxialMoments {
                r,
                z2: cur[1] / cur[0],
                z4: cur[2] / cur[0],
                z6: cur[3] / cur[0],
                log_i0: cur[0].ln() + r.max(0.0),
            });
        }
        prev = cur;
        n *= 2;
    }
}

/// `S2(r) = ∫(3z²-1)/2 e^{rz²} / ∫e^{rz²}` on [0, 1].
pub fn s2_from_r(r: f64) -> Result<f64> {
    Ok(uniaxial_moments(r)?.s2())
}

/// `S4(r) = ⟨P4(z)⟩`, integrated directly against `P4`.
pub fn s4_from_r(r: f64) -> Result<f64> {
    check_r(r)?;
    let p = panels(r);
    let shift = r.max(0.0);
    let gl = gauss_legendre(32);
    let (mut num, mut den) = (0.0, 0.0);
    for &(a, b) in &p {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (x, w) in gl.nodes.iter().zip(&gl.weights) {
            let z = mid + half * x;
            let e = w * half * (r * z * z - shift).exp();
            num += e * legendre_unchecked(4, z);
            den += e;
        }
    }
    Ok(num / den)
}

/// `S4` through `35∫t⁴e^{rt²}/(8∫e^{rt²}) - 5S2/2 - 7/8`.
pub fn s4_from_r_moment_form(r: f64) -> Result<f64> {
    Ok(uniaxial_moments(r)?.s4())
}

/// Unique `r` with `S2(r) = s2`; Newton with a bisection safeguard.
pub fn r_from_s2(s2: f64) -> Result<f64> {
    if !(s2 > -0.5 && s2 < 1.0) {
        return Err(Error::Domain(format!("S2 = {s2} outside (-1/2, 1)")));
    }
    let (mut lo, mut hi) = (-R_GUARD, R_GUARD);
    let s_lo = s2_from_r(lo)?;
    let s_hi = s2_from_r(hi)?;
    if s2 <= s_lo || s2 >= s_hi {
        return Err(Error::Domain(format!(
            "S2 = {s2} needs |r| > {R_GUARD}; bracket [{lo}, {hi}] maps to [{s_lo}, {s_hi}]"
        )));
    }
    let mut r = 7.5 * s2;
    for _ in 0..200 {
        let mom = uniaxial_moments(r)?;
        let f = mom.s2() - s2;
        if f.abs() < 1e-15 {
            return Ok(r);
        }
        if f > 0.0 {
            hi = r;
        } else {
            lo = r;
        }
        let mut next = r - f / mom.ds2_dr();
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - r).abs() < 1e-14 * r.abs().max(1.0) {
            return Ok(next);
        }
        r = next;
    }
    Err(Error::Numeric { msg: format!("r_from_s2({s2}) did not converge"), estimate: r })
}

/// Uniaxial order: `S2`, `S4`, the Bingham parameter `r` and director `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniaxialState {
    pub s2: f64,
    pub s4: f64,
    pub r: f64,
    pub n: Vector3<f64>,
}

impl UniaxialState {
    pub fn from_s2(s2: f64, n: Vector3<f64>) -> Result<Self> {
        let r = r_from_s2(s2)?;
        Ok(UniaxialState { s2, s4: s4_from_r(r)?, r, n: n.normalize() })
    }

    pub fn from_r(r: f64, n: Vector3<f64>) -> Result<Self> {
        let m = uniaxial_moments(r)?;
        Ok(UniaxialState { s2: m.s2(), s4: m.s4(), r, n: n.normalize() })
    }
}

/// Cubic Hermite table of `r ↦ (S2, S4, ln Z)` for repeated inversions.
///
/// Knot values come from [`uniaxial_moments`]; the interpolant, not the raw
/// quadrature, is what the table returns, together with its exact derivatives.
#[derive(Debug, Clone)]
pub struct BinghamTable {
    r0: f64,
    h: f64,
    s2: Vec<f64>,
    ds2: Vec<f64>,
    s4: Vec<f64>,
    ds4: Vec<f64>,
    lnz: Vec<f64>,
    dlnz: Vec<f64>,
}

/// Interpolated values and their derivatives with respect to `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableValues {
    pub r: f64,
    pub s2: f64,
    pub ds2: f64,
    pub s4: f64,
    pub ds4: f64,
    pub ln_z: f64,
    pub dln_z: f64,
}

fn hermite(y0: f64, d0: f64, y1: f64, d1: f64, h: f64, t: f64) -> (f64, f64) {
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let value = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
    let dh00 = 6.0 * t2 - 6.0 * t;
    let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
    let dh01 = -6.0 * t2 + 6.0 * t;
    let dh11 = 3.0 * t2 - 2.0 * t;
    let slope = (dh00 * y0 + dh01 * y1) / h + dh10 * d0 + dh11 * d1;
    (value, slope)
}

impl BinghamTable {
    pub fn new(r_min: f64, r_max: f64, knots: usize) -> Result<Self> {
        if knots < 2 || !(r_min < r_max) {
            return Err(Error::Input("table needs r_min < r_max and at least 2 knots".into()));
        }
        let h = (r_max - r_min) / (knots - 1) as f64;
        let mut t = BinghamTable {
            r0: r_min,
            h,
            s2: Vec::with_capacity(knots),
            ds2: Vec::with_capacity(knots),
            s4: Vec::with_capacity(knots),
            ds4: Vec::with_capacity(knots),
            lnz: Vec::with_capacity(knots),
            dlnz: Vec::with_capacity(knots),
        };
        for i in 0..knots {
            let m = uniaxial_moments(r_min + h * i as f64)?;
            t.s2.push(m.s2());
            t.ds2.push(m.ds2_dr());
            t.s4.push(m.s4());
            t.ds4.push(m.ds4_dr());
            t.lnz.push(m.ln_z());
            t.dlnz.push(2.0 * m.s2() / 3.0);
        }
        Ok(t)
    }

    /// Shared table on r ∈ [-100, 200] with 15001 knots (`r = 0` is a knot).
    pub fn shared() -> &'static BinghamTable {
        static TABLE: OnceLock<BinghamTable> = OnceLock::new();
        TABLE.get_or_init(|| BinghamTable::new(-100.0, R_GUARD, 15001).expect("table construction"))
    }

    pub fn r_range(&self) -> (f64, f64) {
        (self.r0, self.r0 + self.h * (self.s2.len() - 1) as f64)
    }

    pub fn s2_range(&self) -> (f64, f64) {
        (self.s2[0], *self.s2.last().unwrap())
    }

    fn eval_cell(&self, i: usize, t: f64) -> TableValues {
        let h = self.h;
        let (s2, ds2) = hermite(self.s2[i], self.ds2[i], self.s2[i + 1], self.ds2[i + 1], h, t);
        let (s4, ds4) = hermite(self.s4[i], self.ds4[i], self.s4[i + 1], self.ds4[i + 1], h, t);
        let (ln_z, dln_z) = hermite(self.lnz[i], self.dlnz[i], self.lnz[i + 1], self.dlnz[i + 1], h, t);
        TableValues { r: self.r0 + h * (i as f64 + t), s2, ds2, s4, ds4, ln_z, dln_z }
    }

    pub fn eval_r(&self, r: f64) -> Result<TableValues> {
        let (a, b) = self.r_range();
        if !(r >= a && r <= b) {
            return Err(Error::Domain(format!("r = {r} outside table range [{a}, {b}]")));
        }
        let u = (r - self.r0) / self.h;
        let i = (u.floor() as usize).min(self.s2.len() - 2);
        Ok(self.eval_cell(i, u - i as f64))
    }

    /// Invert the interpolated `S2(r)`.
    pub fn invert_s2(&self, s2: f64) -> Result<TableValues> {
        let (a, b) = self.s2_range();
        if !(s2 >= a && s2 <= b) {
            return Err(Error::Domain(format!("S2 = {s2} outside table range [{a}, {b}]")));
        }
        let i = self.s2.partition_point(|&v| v <= s2).clamp(1, self.s2.len() - 1) - 1;
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut t = (s2 - self.s2[i]) / (self.s2[i + 1] - self.s2[i]);
        for _ in 0..60 {
            let v = self.eval_cell(i, t);
            let f = v.s2 - s2;
            if f.abs() < 1e-15 {
                return Ok(v);
            }
            if f > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let mut next = t - f / (v.ds2 * self.h);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() < 1e-15 {
                return Ok(self.eval_cell(i, next));
            }
            t = next;
        }
        Ok(self.eval_cell(i, t))
    }
}

/// Symmetric traceless 3×3 order tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QTensor(Matrix3<f64>);

impl QTensor {
    /// Accepts a matrix that is symmetric and traceless to 1e-10 and projects it exactly.
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        let asym = (m - m.transpose()).abs().max();
        if asym > 1e-10 || m.trace().abs() > 1e-10 {
            return Err(Error::Input(format!("Q must be symmetric and traceless (asymmetry {asym:e}, trace {:e})", m.trace())));
        }
        Ok(Self::project(m))
    }

    /// Symmetric traceless part of any matrix.
    pub fn project(m: Matrix3<f64>) -> Self {
        let s = (m + m.transpose()) * 0.5;
        QTensor(s - Matrix3::identity() * (s.trace() / 3.0))
    }

    pub fn zero() -> Self {
        QTensor(Matrix3::zeros())
    }

    pub fn uniaxial(s2: f64, n: Vector3<f64>) -> Self {
        let n = n.normalize();
        QTensor((n * n.transpose() - Matrix3::identity() / 3.0) * s2)
    }

    /// From the six components `(q11, q22, q12, q13, q23)` with `q33 = -q11 - q22`.
    pub fn from_components(q11: f64, q22: f64, q12: f64, q13: f64, q23: f64) -> Self {
        QTensor(Matrix3::new(q11, q12, q13, q12, q22, q23, q13, q23, -q11 - q22))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    /// `Q:Q`.
    pub fn norm_sq(&self) -> f64 {
        self.0.component_mul(&self.0).sum()
    }

    pub fn eigenvalues(&self) -> Vector3<f64> {
        SymmetricEigen::new(self.0).eigenvalues
    }

    /// Every eigenvalue strictly inside (-1/3, 2/3).
    pub fn is_physical(&self) -> bool {
        self.eigenvalues().iter().all(|&l| l > -1.0 / 3.0 && l < 2.0 / 3.0)
    }

    pub fn rotate(&self, rot: &Matrix3<f64>) -> Self {
        QTensor(rot * self.0 * rot.transpose())
    }
}

/// Dual field `B`, partition value `Z` and the final moment residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinghamSolution {
    pub b: Matrix3<f64>,
    pub z: f64,
    pub ln_z: f64,
    pub residual: f64,
}

/// `Q = ⟨mm - I/3⟩` and `ln Z` for the density `exp(B:mm)/Z`.
pub fn q_from_b(b: &Matrix3<f64>, quad: &SphereQuadrature) -> (Matrix3<f64>, f64) {
    let shift = SymmetricEigen::new(*b).eigenvalues.max();
    let mut z = 0.0;
    let mut second = Matrix3::zeros();
    for (n, w) in quad.nodes.iter().zip(&quad.weights) {
        let m = Vector3::new(n[0], n[1], n[2]);
        let e = w * ((m.transpose() * b * m)[0] - shift).exp();
        z += e;
        second += m * m.transpose() * e;
    }
    (second / z - Matrix3::identity() / 3.0, z.ln() + shift)
}

/// Solve `⟨mm - I/3⟩_B = Q` for traceless `B` by damped Newton on the convex
/// dual `ln Z(B) - B:Q`, in the eigenframe of `Q`.
pub fn solve_bingham(q: &QTensor, quad: &SphereQuadrature) -> Result<BinghamSolution> {
    let eig = SymmetricEigen::new(*q.matrix());
    let lam = eig.eigenvalues;
    if let Some(l) = lam.iter().find(|&&l| !(l > -1.0 / 3.0 && l < 2.0 / 3.0)) {
        return Err(Error::Domain(format!("eigenvalue {l} of Q outside (-1/3, 2/3)")));
    }
    let t = [lam[0] - lam[2], lam[1] - lam[2]];
    // u = m1² - m3², v = m2² - m3² at every node, in Q's eigenframe
    let vt = eig.eigenvectors.transpose();
    let uv: Vec<[f64; 2]> = quad
        .nodes
        .iter()
        .map(|n| {
            let e = vt * Vector3::new(n[0], n[1], n[2]);
            [e[0] * e[0] - e[2] * e[2], e[1] * e[1] - e[2] * e[2]]
        })
        .collect();
    let stats = |b: [f64; 2]| {
        let shift = b[0].abs() + b[1].abs();
        let (mut z, mut g, mut h) = (0.0, [0.0; 2], [[0.0; 2]; 2]);
        for (p, w) in uv.iter().zip(&quad.weights) {
            let e = w * (b[0] * p[0] + b[1] * p[1] - shift).exp();
            z += e;
            for i in 0..2 {
                g[i] += e * p[i];
                for j in 0..2 {
                    h[i][j] += e * p[i] * p[j];
                }
            }
        }
        let mean = [g[0] / z, g[1] / z];
        let cov = [
            [h[0][0] / z - mean[0] * mean[0], h[0][1] / z - mean[0] * mean[1]],
            [h[1][0] / z - mean[1] * mean[0], h[1][1] / z - mean[1] * mean[1]],
        ];
        let ln_z = z.ln() + shift;
        let phi = ln_z - b[0] * t[0] - b[1] * t[1];
        (phi, [mean[0] - t[0], mean[1] - t[1]], cov, ln_z)
    };
    // moment residual in the three diagonal slots: ⟨m_i²⟩ - 1/3 - λ_i
    let residual_of = |grad: [f64; 2]| {
        let r3 = -(grad[0] + grad[1]) / 3.0;
        (grad[0] + r3).abs().max((grad[1] + r3).abs()).max(r3.abs())
    };
    let mut b = [0.0, 0.0];
    let (mut phi, mut grad, mut cov, mut ln_z) = stats(b);
    let mut residual = residual_of(grad);
    let mut iter = 0;
    while residual > 1e-13 {
        iter += 1;
        if iter > 200 {
            return Err(Error::Numeric { msg: "Bingham Newton iteration stagnated".into(), estimate: residual });
        }
        let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
        let step = [
            -(cov[1][1] * grad[0] - cov[0][1] * grad[1]) / det,
            -(-cov[1][0] * grad[0] + cov[0][0] * grad[1]) / det,
        ];
        if step[0].abs().max(step[1].abs()) < 1e-14 * b[0].abs().max(b[1].abs()).max(1.0) {
            break;
        }
        let slope = step[0] * grad[0] + step[1] * grad[1];
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial = [b[0] + scale * step[0], b[1] + scale * step[1]];
            let s = stats(trial);
            // near the solution φ changes below rounding; the residual still decides
            if s.0 <= phi + 1e-4 * scale * slope || residual_of(s.1) < 0.5 * residual {
                b = trial;
                (phi, grad, cov, ln_z) = s;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            break;
        }
        residual = residual_of(grad);
    }
    if residual > 1e-10 {
        return Err(Error::Numeric { msg: "Bingham Newton iteration stagnated".into(), estimate: residual });
    }
    let v = eig.eigenvectors;
    let diag = Matrix3::from_diagonal(&Vector3::new(b[0], b[1], -b[0] - b[1]));
    Ok(BinghamSolution { b: v * diag * v.transpose(), z: ln_z.exp(), ln_z, residual })
}

/// `Q4 = (1/Z) ∫ Ξ4(m) exp(B:mm) dm`.
pub fn q4_from_bingham(sol: &BinghamSolution, quad: &SphereQuadrature) -> SymTensor<f64> {
    let shift = SymmetricEigen::new(sol.b).eigenvalues.max();
    let mut z = 0.0;
    let mut m4 = [0.0; 15];
    let mut m2 = Matrix3::zeros();
    let idx4 = crate::tensor_algebra::canonical_indices(4);
    for (n, w) in quad.nodes.iter().zip(&quad.weights) {
        let m = Vector3::new(n[0], n[1], n[2]);
        let e = w * ((m.transpose() * sol.b * m)[0] - shift).exp();
        z += e;
        m2 += m * m.transpose() * e;
        for (k, idx) in idx4.iter().enumerate() {
            m4[k] += e * m[idx[0]] * m[idx[1]] * m[idx[2]] * m[idx[3]];
        }
    }
    let m2 = m2 / z;
    let d = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    let mut k = 0;
    SymTensor::from_fn(4, |ix| {
        let (i, j, a, l) = (ix[0], ix[1], ix[2], ix[3]);
        let sym_md = m2[(i, j)] * d(a, l)
            + m2[(i, a)] * d(j, l)
            + m2[(i, l)] * d(j, a)
            + m2[(j, a)] * d(i, l)
            + m2[(j, l)] * d(i, a)
            + m2[(a, l)] * d(i, j);
        let dd = d(i, j) * d(a, l) + d(i, a) * d(j, l) + d(i, l) * d(j, a);
        let v = m4[k] / z - sym_md / 7.0 + dd / 35.0;
        k += 1;
        v
    })
}

/// `c (ln c + Q:B_Q - ln Z_Q)`.
pub fn bingham_entropy(c: f64, q: &QTensor, quad: &SphereQuadrature) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::Input(format!("density c = {c} must be positive")));
    }
    let sol = solve_bingham(q, quad)?;
    Ok(c * (c.ln() + q.matrix().component_mul(&sol.b).sum() - sol.ln_z))
}
