//! Director distortions and Oseen-Frank constants of the hard-rod model.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::bingham::s4_from_r;
use crate::geometry_kernel::RodGeometry;
use crate::nematic_model::{elastic_energy_density, elastic_j_reduced, equilibrium_branches, ElasticCoefficients, Phase};
use crate::tensor_algebra::xi_tensor_derivative;
use crate::{Error, Result};

/// Boltzmann constant in erg/K.
pub const K_BOLTZMANN: f64 = 1.380649e-16;

/// Director value and gradient `grad[i][j] = ∂_i n_j` at a point.
pub type DirectorSample = ([f64; 3], [[f64; 3]; 3]);

pub type CustomField = Arc<dyn Fn([f64; 3]) -> Result<DirectorSample> + Send + Sync>;

#[derive(Clone)]
pub enum DirectorField {
    Uniform([f64; 3]),
    /// Planar radial `(x, y, 0)/ρ`.
    Splay,
    /// `(cos kz, sin kz, 0)`
    Twist { k: f64 },
    /// `(sin kz, 0, cos kz)`
    Bend { k: f64 },
    /// `x/|x|`
    Hedgehog,
    Custom(CustomField),
}

impl fmt::Debug for DirectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DirectorField::Uniform(n) => write!(f, "Uniform({n:?})"),
            DirectorField::Splay => write!(f, "Splay"),
            DirectorField::Twist { k } => write!(f, "Twist {{ k: {k} }}"),
            DirectorField::Bend { k } => write!(f, "Bend {{ k: {k} }}"),
            DirectorField::Hedgehog => write!(f, "Hedgehog"),
            DirectorField::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl DirectorField {
    pub fn sample(&self, x: [f64; 3]) -> Result<DirectorSample> {
        let zero = [[0.0; 3]; 3];
        match self {
            DirectorField::Uniform(n) => {
                let norm = n.iter().map(|v| v * v).sum::<f64>().sqrt();
                if !(norm > 0.0) {
                    return Err(Error::Input("uniform director must be nonzero".into()));
                }
                Ok((n.map(|v| v / norm), zero))
            }
            DirectorField::Splay => {
                let rho = x[0].hypot(x[1]);
                if rho < 1e-12 {
                    return Err(Error::Domain(format!("splay field is singular on the axis at {x:?}")));
                }
                let n = [x[0] / rho, x[1] / rho, 0.0];
                let mut g = zero;
                for i in 0..2 {
                    for j in 0..2 {
                        g[i][j] = (f64::from(u8::from(i == j)) - n[i] * n[j]) / rho;
                    }
                }
                Ok((n, g))
            }
            DirectorField::Twist { k } => {
                let (s, c) = (k * x[2]).sin_cos();
                let mut g = zero;
                g[2] = [-k * s, k * c, 0.0];
                Ok(([c, s, 0.0], g))
            }
            DirectorField::Bend { k } => {
                let (s, c) = (k * x[2]).sin_cos();
                let mut g = zero;
                g[2] = [k * c, 0.0, -k * s];
                Ok(([s, 0.0, c], g))
            }
            DirectorField::Hedgehog => {
                let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                if r < 1e-12 {
                    return Err(Error::Domain(format!("hedgehog field is singular at {x:?}")));
                }
                let n = x.map(|v| v / r);
                let mut g = zero;
                for i in 0..3 {
                    for j in 0..3 {
                        g[i][j] = (f64::from(u8::from(i == j)) - n[i] * n[j]) / r;
                    }
                }
                Ok((n, g))
            }
            DirectorField::Custom(f) => f(x),
        }
    }
}

/// `(I1, I2, I3, I4)`: `(div n)²`, `(n·curl n)²`, `|n × curl n|²`,
/// `tr(∇n)² - (div n)²`.
pub fn distortion_invariants(field: &DirectorField, point: [f64; 3]) -> Result<[f64; 4]> {
    let (n, g) = field.sample(point)?;
    Ok(invariants_from_gradient(&n, &g))
}

pub fn invariants_from_gradient(n: &[f64; 3], g: &[[f64; 3]; 3]) -> [f64; 4] {
    let div = g[0][0] + g[1][1] + g[2][2];
    let curl = [g[1][2] - g[2][1], g[2][0] - g[0][2], g[0][1] - g[1][0]];
    let twist = n[0] * curl[0] + n[1] * curl[1] + n[2] * curl[2];
    let cross = [
        n[1] * curl[2] - n[2] * curl[1],
        n[2] * curl[0] - n[0] * curl[2],
        n[0] * curl[1] - n[1] * curl[0],
    ];
    let mut tr = 0.0;
    #[allow(clippy::needless_range_loop)]
    for i in 0..3 {
        for j in 0..3 {
            tr += g[i][j] * g[j][i];
        }
    }
    [div * div, twist * twist, cross.iter().map(|v| v * v).sum(), tr - div * div]
}

/// Frank constants in units of `π c² L⁵ η k_B T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrankConstants {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    pub s2: f64,
    pub s4: f64,
    pub alpha: f64,
    pub eta: f64,
}

impl FrankConstants {
    pub fn as_array(&self) -> [f64; 4] {
        [self.k1, self.k2, self.k3, self.k4]
    }
}

/// Closed-form constants at given order parameters, `[K1, K2, K3, K4]`.
pub fn frank_from_order(s2: f64, s4: f64, eta: f64) -> [f64; 4] {
    let e2 = eta * eta;
    let cross = -1.0 / 64.0 + 5.0 * e2 / 14.0 - 3.0 / 7.0 * e2 * LN_2;
    let log_part = 0.125 - LN_2 / 2.0;
    let k13_s2 = -s2 * s2 * (e2 * 299.0 / 1568.0 - 15.0 / 448.0 - 12.0 * LN_2 * e2 / 49.0);
    let k1 = k13_s2 + s4 * s4 * (15.0 * e2 / 128.0 - 115.0 * e2 / 49.0 * log_part) + s2 * s4 * 15.0 / 7.0 * cross;
    let k2 = -5.0 * s2 * s2 * (e2 * 19.0 / 1568.0 - 1.0 / 448.0 - 3.0 * LN_2 * e2 / 98.0)
        + s4 * s4 * (15.0 * e2 / 128.0 - 15.0 / 49.0 * e2 * log_part)
        + s2 * s4 * 5.0 / 7.0 * cross;
    let k3 = k13_s2 + s4 * s4 * (15.0 * e2 / 128.0 - 150.0 / 49.0 * e2 * log_part) - s2 * s4 * 20.0 / 7.0 * cross;
    let k4 = s2 * s2 / 2.0 * (9.0 * LN_2 * e2 / 98.0 - 51.0 * e2 / 392.0 + 5.0 / 224.0)
        - s4 * s4 * 25.0 * e2 / 49.0 * (0.25 - LN_2)
        + s2 * s4 * 5.0 / 7.0 * cross;
    [k1, k2, k3, k4]
}

/// Constants assembled from `J1..J7` at unit concentration.
pub fn k_from_j(s2: f64, s4: f64, j: &[f64; 7]) -> [f64; 4] {
    let [_, j2, j3, _, j5, j6, j7] = *j;
    let (a, b, m) = (s2 * s2, s4 * s4, s2 * s4);
    [
        2.0 * a * (j2 + j5) + b * (16.0 / 7.0 * j3 + 92.0 / 49.0 * j6) - 6.0 / 7.0 * j7 * m,
        2.0 * a * j2 + b * (16.0 / 7.0 * j3 + 12.0 / 49.0 * j6) - 2.0 / 7.0 * j7 * m,
        2.0 * a * (j2 + j5) + b * (16.0 / 7.0 * j3 + 120.0 / 49.0 * j6) + 8.0 / 7.0 * j7 * m,
        a * j5 + 40.0 / 49.0 * j6 * b - 2.0 / 7.0 * j7 * m,
    ]
}

/// Nematic state used for the constants: lowest-energy nematic root, with
/// `S4` from the Bingham closure at that root.
pub fn nematic_state(alpha: f64) -> Result<(f64, f64)> {
    let eq = equilibrium_branches(alpha)?;
    let b = eq.nematic().ok_or(Error::Isotropic(alpha))?;
    Ok((b.s2, s4_from_r(b.r)?))
}

pub fn frank_constants(alpha: f64, geom: &RodGeometry) -> Result<FrankConstants> {
    let (s2, s4) = nematic_state(alpha)?;
    let [k1, k2, k3, k4] = frank_from_order(s2, s4, geom.eta);
    Ok(FrankConstants { k1, k2, k3, k4, s2, s4, alpha, eta: geom.eta })
}

/// Elastic energy density (unit concentration, `J` in units of `πL⁵η k_BT`)
/// of the uniaxial state `Q = S2 Ξ2(n)`, `Q4 = S4 Ξ4(n)` at a point.
pub fn tensor_density(field: &DirectorField, point: [f64; 3], s2: f64, s4: f64, j: &ElasticCoefficients) -> Result<f64> {
    let (n, g) = field.sample(point)?;
    let mut gq = Vec::with_capacity(27);
    let mut gq4 = Vec::with_capacity(243);
    for dn in &g {
        gq.extend(xi_tensor_derivative(2, n, *dn).to_full().into_iter().map(|v| s2 * v));
        gq4.extend(xi_tensor_derivative(4, n, *dn).to_full().into_iter().map(|v| s4 * v));
    }
    elastic_energy_density(&[0.0; 3], &gq, &gq4, j)
}

/// Constants read off the tensor elastic density on canonical fields:
/// splay at `ρ = 1`, twist and bend with wavenumber `k` at `z = 0`, and `K4`
/// from the hedgehog once `K1..K3` are known.
pub fn frank_from_tensor_model(alpha: f64, geom: &RodGeometry, k: f64) -> Result<FrankConstants> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::Input(format!("wavenumber k = {k} must be positive")));
    }
    let (s2, s4) = nematic_state(alpha)?;
    let [k1, k2, k3, k4] = frank_from_fields(s2, s4, geom.eta, k)?;
    Ok(FrankConstants { k1, k2, k3, k4, s2, s4, alpha, eta: geom.eta })
}

/// Field-extraction path at given order parameters.
pub fn frank_from_fields(s2: f64, s4: f64, eta: f64, k: f64) -> Result<[f64; 4]> {
    let j = ElasticCoefficients { j: elastic_j_reduced(eta)? };
    let extract = |field: DirectorField, point: [f64; 3], which: usize| -> Result<f64> {
        let inv = distortion_invariants(&field, point)?;
        Ok(2.0 * tensor_density(&field, point, s2, s4, &j)? / inv[which])
    };
    let k1 = extract(DirectorField::Splay, [0.6, 0.8, 0.3], 0)?;
    let k2 = extract(DirectorField::Twist { k }, [0.2, -0.4, 0.0], 1)?;
    let k3 = extract(DirectorField::Bend { k }, [0.3, 0.1, 0.0], 2)?;
    let p = [0.5, -0.3, 0.7];
    let inv = distortion_invariants(&DirectorField::Hedgehog, p)?;
    let dens = tensor_density(&DirectorField::Hedgehog, p, s2, s4, &j)?;
    let k4 = (2.0 * dens - k1 * inv[0] - k2 * inv[1] - k3 * inv[2]) / inv[3] - k2;
    Ok([k1, k2, k3, k4])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig4Row {
    pub eta: f64,
    pub alpha: f64,
    pub phase: Phase,
    /// `None` on isotropic rows.
    pub constants: Option<FrankConstants>,
}

/// Constants over an `η × α` grid, row-major in `η`.
pub fn fig4_sweep(eta_list: &[f64], alpha_grid: &[f64]) -> Result<Vec<Fig4Row>> {
    if eta_list.is_empty() || alpha_grid.is_empty() {
        return Err(Error::Input("eta list and alpha grid must be nonempty".into()));
    }
    let pts: Vec<(f64, f64)> = eta_list.iter().flat_map(|&e| alpha_grid.iter().map(move |&a| (e, a))).collect();
    pts.par_iter()
        .map(|&(eta, alpha)| {
            let geom = RodGeometry::unit(eta)?;
            match frank_constants(alpha, &geom) {
                Ok(c) => Ok(Fig4Row { eta, alpha, phase: Phase::Nematic, constants: Some(c) }),
                Err(Error::Isotropic(_)) => Ok(Fig4Row { eta, alpha, phase: Phase::Isotropic, constants: None }),
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// Number density from volume fraction, `c = 4Φ/(π L D²)`.
pub fn concentration_from_phi(phi: f64, l: f64, d: f64) -> f64 {
    4.0 * phi / (PI * l * d * d)
}

/// `K = K̃ π c² L⁵ η k_B T` in CGS (dyn); inputs in cm⁻³, cm, cm, K.
pub fn dimensional_k(k_dimless: f64, c: f64, l: f64, d: f64, t: f64) -> Result<f64> {
    for (name, v) in [("c", c), ("L", l), ("D", d), ("T", t)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Input(format!("{name} = {v} must be positive")));
        }
    }
    Ok(k_dimless * PI * c * c * l.powi(5) * (d / l) * K_BOLTZMANN * t)
}
