//! Bulk free energy with the Bingham closure, homogeneous equilibria, and the
//! elastic coefficients of the Q-tensor energy.

use std::f64::consts::PI;

use crate::bingham::{solve_bingham, uniaxial_moments, QTensor};
use crate::geometry_kernel::RodGeometry;
use crate::quadrature::SphereQuadrature;
use crate::tensor_algebra::{expansion_coefficients, AlphaCoefficients, Scalar};
use crate::{Error, Result};

/// Phase label shared by the homogeneous and layered models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Isotropic,
    Nematic,
    SmecticA,
}

impl Phase {
    pub fn label(&self) -> &'static str {
        match self {
            Phase::Isotropic => "isotropic",
            Phase::Nematic => "nematic",
            Phase::SmecticA => "smectic-A",
        }
    }
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Coefficient of `L³η c|Q|²` in the bulk energy density per particle.
pub const BULK_QUADRATIC: f64 = 15.0 * PI / 64.0;

/// `c (ln c + Q:B_Q - ln Z_Q - (15π/64) L³η c |Q|²)` in units of `k_B T`.
pub fn bulk_free_energy(c: f64, q: &QTensor, geom: &RodGeometry, quad: &SphereQuadrature) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::Input(format!("density c = {c} must be positive")));
    }
    let sol = solve_bingham(q, quad)?;
    let qb = q.matrix().component_mul(&sol.b).sum();
    Ok(c * (c.ln() + qb - sol.ln_z - BULK_QUADRATIC * geom.l.powi(3) * geom.eta * c * q.norm_sq()))
}

/// Uniaxial free energy per particle at concentration `α = πL²Dc`, leaving out
/// the `ln c` term common to every branch: `(2/3) r S2 - ln Z - (5α/32) S2²`.
pub fn branch_free_energy(alpha: f64, r: f64) -> Result<f64> {
    let m = uniaxial_moments(r)?;
    let s2 = m.s2();
    Ok(2.0 / 3.0 * r * s2 - m.ln_z() - 5.0 * alpha / 32.0 * s2 * s2)
}

/// Self-consistency residual `g(r) = r - (15α/32) S2(r)`.
pub fn consistency_residual(alpha: f64, r: f64) -> Result<f64> {
    Ok(r - 15.0 * alpha / 32.0 * uniaxial_moments(r)?.s2())
}

/// `g'(0) = 1 - (15α/32) S2'(0)`, which changes sign at the isotropic spinodal.
pub fn isotropic_linearization(alpha: f64) -> Result<f64> {
    Ok(1.0 - 15.0 * alpha / 32.0 * uniaxial_moments(0.0)?.ds2_dr())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub r: f64,
    pub s2: f64,
    pub s4: f64,
    /// Per-particle energy without `ln c`, see [`branch_free_energy`].
    pub free_energy: f64,
    /// Local minimum of the uniaxial energy in `S2` (`g'(r) > 0`).
    pub stable: bool,
}

impl Branch {
    /// Energy per unit volume `c (ln c + f)` with `c = α/(π η L³)`.
    pub fn energy_per_volume(&self, alpha: f64, geom: &RodGeometry) -> f64 {
        let c = alpha / (PI * geom.eta * geom.l.powi(3));
        c * (c.ln() + self.free_energy)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousEquilibrium {
    pub alpha: f64,
    /// Isotropic root first, then nematic roots in increasing `r`.
    pub branches: Vec<Branch>,
}

impl HomogeneousEquilibrium {
    pub fn isotropic(&self) -> &Branch {
        &self.branches[0]
    }

    /// Lowest-energy nematic root; ties go to the larger `S2`.
    pub fn nematic(&self) -> Option<&Branch> {
        self.branches[1..].iter().fold(None, |best: Option<&Branch>, b| match best {
            Some(a) if a.free_energy < b.free_energy - 1e-14 => Some(a),
            Some(a) if (a.free_energy - b.free_energy).abs() <= 1e-14 && a.s2 >= b.s2 => Some(a),
            _ => Some(b),
        })
    }

    /// Global minimum among all roots.
    pub fn preferred(&self) -> &Branch {
        match self.nematic() {
            Some(n) if n.free_energy < self.isotropic().free_energy => n,
            _ => self.isotropic(),
        }
    }
}

fn make_branch(alpha: f64, r: f64) -> Result<Branch> {
    let m = uniaxial_moments(r)?;
    let s2 = m.s2();
    Ok(Branch {
        r,
        s2,
        s4: m.s4(),
        free_energy: 2.0 / 3.0 * r * s2 - m.ln_z() - 5.0 * alpha / 32.0 * s2 * s2,
        stable: 1.0 - 15.0 * alpha / 32.0 * m.ds2_dr() > 0.0,
    })
}

/// Roots of `r = (15α/32) S2(r)` on `r ∈ [0, 200]` by a logarithmic sign scan
/// (2048 points) refined with bisection to 1e-12.
pub fn equilibrium_branches(alpha: f64) -> Result<HomogeneousEquilibrium> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Input(format!("alpha = {alpha} must be positive")));
    }
    let mut branches = vec![make_branch(alpha, 0.0)?];
    let n = 2048;
    let (lo, hi) = (1e-6f64, 200.0f64);
    let grid: Vec<f64> = (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect();
    let g = |r: f64| consistency_residual(alpha, r);
    let mut prev = (grid[0], g(grid[0])?);
    for &r in &grid[1..] {
        let cur = (r, g(r)?);
        if prev.1 == 0.0 {
            branches.push(make_branch(alpha, prev.0)?);
        } else if prev.1.signum() != cur.1.signum() && cur.1 != 0.0 {
            let (mut a, mut b, fa) = (prev.0, cur.0, prev.1);
            while b - a > 1e-12 * b.max(1.0) {
                let mid = 0.5 * (a + b);
                let fm = g(mid)?;
                if fm.signum() == fa.signum() {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            branches.push(make_branch(alpha, 0.5 * (a + b))?);
        }
        prev = cur;
    }
    Ok(HomogeneousEquilibrium { alpha, branches })
}

/// Smallest α with a nematic root: the minimum of `α(r) = 32 r / (15 S2(r))`.
pub fn nematic_onset() -> Result<(f64, f64)> {
    let a = |r: f64| -> Result<f64> { Ok(32.0 * r / (15.0 * uniaxial_moments(r)?.s2())) };
    let (mut lo, mut hi) = (0.1f64, 30.0f64);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (a(x1)?, a(x2)?);
    while hi - lo > 1e-9 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = a(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = a(x2)?;
        }
    }
    let r = 0.5 * (lo + hi);
    Ok((a(r)?, r))
}

/// Concentration where the stable nematic root has the isotropic energy.
///
/// Along the root curve `α = 32r/(15 S2)` the per-particle energy is
/// `r S2/3 - ln Z`, so the crossing solves `r S2/3 - ln Z + ln 4π = 0`.
/// Returns `(α, r, S2)`.
pub fn transition_alpha() -> Result<(f64, f64, f64)> {
    let (_, r_star) = nematic_onset()?;
    let h = |r: f64| -> Result<f64> {
        let m = uniaxial_moments(r)?;
        Ok(r * m.s2() / 3.0 - m.ln_z() + (4.0 * PI).ln())
    };
    let (mut a, mut b) = (r_star, 50.0);
    let fa = h(a)?;
    if fa.signum() == h(b)?.signum() {
        return Err(Error::Numeric { msg: "transition not bracketed".into(), estimate: fa });
    }
    while b - a > 1e-12 {
        let mid = 0.5 * (a + b);
        if h(mid)?.signum() == fa.signum() {
            a = mid;
        } else {
            b = mid;
        }
    }
    let r = 0.5 * (a + b);
    let s2 = uniaxial_moments(r)?.s2();
    Ok((32.0 * r / (15.0 * s2), r, s2))
}

/// `J1..J7` of the second-order elastic energy, in units of `k_B T L⁵`
/// (so `J/(π L⁵ η)` are pure α-combinations).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticCoefficients {
    pub j: [f64; 7],
}

/// The seven combinations of `α_ij` multiplying `-πL⁵η k_B T`:
/// `J_i = -π L⁵ η k_B T · combination_i`.
pub fn j_combinations<T: Scalar>(a: &[T; 7]) -> [T; 7] {
    let [a11, a12, a13, a21, a22, a31, a32] = *a;
    let r = |n: i64, d: i64| T::from_i64(n).unwrap() / T::from_i64(d).unwrap();
    let half = r(1, 2);
    [
        half * (a11 + r(2, 3) * a21 + r(2, 9) * a31 + r(4, 45) * a32),
        half * (r(3, 2) * a12 + r(3, 7) * a22 + r(9, 49) * a32),
        r(35, 16) * a13,
        half * (r(2, 1) * a21 + r(4, 3) * a31 + r(2, 5) * a22 + r(8, 15) * a32),
        half * (a31 + r(25, 49) * a32 + r(6, 7) * a22),
        r(3, 4) * a32,
        half * (r(3, 1) * a22 + r(18, 7) * a32),
    ]
}

/// The same combinations before simplification, grouped as they arise from
/// the moment expansion (`α31 - α32/2` blocks and the `Ξ4:Ξ2` remainders).
pub fn j_combinations_grouped<T: Scalar>(a: &[T; 7]) -> [T; 7] {
    let [a11, a12, a13, a21, a22, a31, a32] = *a;
    let r = |n: i64, d: i64| T::from_i64(n).unwrap() / T::from_i64(d).unwrap();
    let half = r(1, 2);
    let a3 = a31 - half * a32;
    let q4q2 = r(3, 1) * a22 + r(18, 7) * a32;
    [
        half * (a11 + r(2, 3) * a21 + r(2, 9) * a31 - r(2, 18) * a32 + r(1, 5) * a32),
        half * (r(3, 2) * a12 - r(9, 49) * a32 + r(3, 7) * a22 + r(18, 49) * a32),
        half * r(35, 8) * a13,
        half * (r(2, 1) * a21 + r(4, 3) * a3 + r(6, 7) * a32 + r(2, 15) * q4q2),
        half * (a3 + r(27, 98) * a32 + r(2, 7) * q4q2),
        half * r(3, 2) * a32,
        half * q4q2,
    ]
}

fn alpha_array(a: &AlphaCoefficients) -> [f64; 7] {
    [a.a11, a.a12, a.a13, a.a21, a.a22, a.a31, a.a32]
}

/// `J_i / (π L⁵ η k_B T)`.
pub fn elastic_j_reduced(eta: f64) -> Result<[f64; 7]> {
    let e = expansion_coefficients(eta)?;
    Ok(j_combinations(&alpha_array(&e.alpha)).map(|v| -v))
}

pub fn elastic_j(geom: &RodGeometry) -> Result<ElasticCoefficients> {
    let scale = PI * geom.l.powi(5) * geom.eta;
    Ok(ElasticCoefficients { j: elastic_j_reduced(geom.eta)?.map(|v| v * scale) })
}

/// Same values through the grouped path.
pub fn elastic_j_grouped(geom: &RodGeometry) -> Result<ElasticCoefficients> {
    let e = expansion_coefficients(geom.eta)?;
    let scale = PI * geom.l.powi(5) * geom.eta;
    Ok(ElasticCoefficients { j: j_combinations_grouped(&alpha_array(&e.alpha)).map(|v| -v * scale) })
}

fn check_len(name: &str, v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::Input(format!("{name} needs {n} entries, got {}", v.len())));
    }
    Ok(())
}

/// Second-order elastic energy density
/// `(1/2)[J1|∇c|² + J2|∇(cQ)|² + J3|∇(cQ4)|² + J4 ∂i(cQij)∂jc
///  + J5(∂i(cQik)∂j(cQjk) + ∂i(cQjk)∂j(cQik))
///  + J6(∂i(cQ4iklm)∂j(cQ4jklm) + ∂i(cQ4jklm)∂j(cQ4iklm))
///  + J7 ∂i(cQ4ijkl)∂j(cQkl)]`.
///
/// `grad_cq[h*9 + i*3 + j] = ∂h(cQij)` and
/// `grad_cq4[h*81 + i*27 + j*9 + k*3 + l] = ∂h(cQ4ijkl)`.
pub fn elastic_energy_density(
    grad_c: &[f64; 3],
    grad_cq: &[f64],
    grad_cq4: &[f64],
    j: &ElasticCoefficients,
) -> Result<f64> {
    check_len("grad_cq", grad_cq, 27)?;
    check_len("grad_cq4", grad_cq4, 243)?;
    let q = |h: usize, i: usize, k: usize| grad_cq[h * 9 + i * 3 + k];
    let q4 = |h: usize, i: usize, k: usize, l: usize, m: usize| grad_cq4[h * 81 + i * 27 + k * 9 + l * 3 + m];
    let t1: f64 = grad_c.iter().map(|x| x * x).sum();
    let t2: f64 = grad_cq.iter().map(|x| x * x).sum();
    let t3: f64 = grad_cq4.iter().map(|x| x * x).sum();
    let div_q: Vec<f64> = (0..3).map(|k| (0..3).map(|i| q(i, i, k)).sum()).collect();
    let t4: f64 = (0..3).map(|k| div_q[k] * grad_c[k]).sum();
    let mut t5 = div_q.iter().map(|x| x * x).sum::<f64>();
    let mut t6 = 0.0;
    let mut t7 = 0.0;
    for i in 0..3 {
        for a in 0..3 {
            for k in 0..3 {
                t5 += q(i, a, k) * q(a, i, k);
            }
        }
    }
    for k in 0..3 {
        for l in 0..3 {
            for m in 0..3 {
                let d: f64 = (0..3).map(|i| q4(i, i, k, l, m)).sum();
                t6 += d * d;
                for i in 0..3 {
                    for a in 0..3 {
                        t6 += q4(i, a, k, l, m) * q4(a, i, k, l, m);
                    }
                }
                t7 += d * q(k, l, m);
            }
        }
    }
    let jj = &j.j;
    Ok(0.5 * (jj[0] * t1 + jj[1] * t2 + jj[2] * t3 + jj[3] * t4 + jj[4] * t5 + jj[5] * t6 + jj[6] * t7))
}

/// Coefficients of the fourth-order (second-derivative) elastic terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourthOrderCoefficients {
    /// `∂ij(cQ4ijpq) ∂kl(cQ4klpq)`
    pub q4_q4: f64,
    /// `∂ij(cQij) ∂kl(cQkl)`
    pub q2_q2_div: f64,
    /// `∂ik(cQip) ∂jk(cQjp)`
    pub q2_q2_mixed: f64,
    /// `∂ij(cQpq) ∂ij(cQpq)`
    pub q2_q2_full: f64,
    /// `∂ij(c) ∂ij(c)`
    pub c_c: f64,
    /// `∂ij(cQ4ijkp) ∂kl(cQlp)`
    pub q4_q2_mixed: f64,
    /// `∂ij(cQ4ijpq) ∂kk(cQpq)`
    pub q4_q2_laplace: f64,
    /// `∂ij(cQ4ijkl) ∂kl(c)`
    pub q4_c: f64,
    /// `∂ij(cQij) ∂kk(c)`
    pub q2_c: f64,
}

impl FourthOrderCoefficients {
    /// Rational combinations of `(μ11, μ21, μ22)` times `scale`.
    pub fn from_mu(mu11: f64, mu21: f64, mu22: f64, scale: f64) -> Self {
        FourthOrderCoefficients {
            q4_q4: scale * 9.0 * mu22,
            q2_q2_div: scale * (6.0 * mu21 + 24.0 / 49.0 * mu22),
            q2_q2_mixed: scale * 144.0 / 49.0 * mu22,
            q2_q2_full: scale * 9.0 / 49.0 * mu22,
            c_c: scale * (2.0 / 5.0 * mu11 + 2.0 / 3.0 * mu21 + 8.0 / 75.0 * mu22),
            q4_q2_mixed: scale * 72.0 / 7.0 * mu22,
            q4_q2_laplace: scale * 18.0 / 7.0 * mu22,
            q4_c: scale * (2.0 * mu11 + 12.0 / 5.0 * mu22),
            q2_c: scale * (12.0 / 7.0 * mu11 + 4.0 * mu21 + 44.0 / 35.0 * mu22),
        }
    }

    pub fn as_array(&self) -> [f64; 9] {
        [
            self.q4_q4,
            self.q2_q2_div,
            self.q2_q2_mixed,
            self.q2_q2_full,
            self.c_c,
            self.q4_q2_mixed,
            self.q4_q2_laplace,
            self.q4_c,
            self.q2_c,
        ]
    }
}

/// Fourth-order coefficients in units of `k_B T`, scaled by `π L⁶ D / 24`.
pub fn fourth_order_coefficients(geom: &RodGeometry) -> Result<FourthOrderCoefficients> {
    let e = expansion_coefficients(geom.eta)?;
    let scale = PI * geom.l.powi(6) * geom.d / 24.0;
    Ok(FourthOrderCoefficients::from_mu(e.mu11, e.mu21, e.mu22, scale))
}
