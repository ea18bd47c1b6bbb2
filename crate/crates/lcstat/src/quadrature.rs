//! Gauss-Legendre rules with node doubling and a product rule on the unit sphere.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::GaussLegendre;

use crate::{Error, Result};

/// Nodes and weights of an n-point Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GlRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GlRule {
    /// Integrate `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

/// Cached n-point rule.
pub fn gauss_legendre(n: usize) -> Arc<GlRule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GlRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let rule = GaussLegendre::new(n.try_into().expect("rule size must be >= 2"));
            let mut pairs: Vec<(f64, f64)> = rule.into_node_weight_pairs().into_vec();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            Arc::new(GlRule {
                nodes: pairs.iter().map(|p| p.0).collect(),
                weights: pairs.iter().map(|p| p.1).collect(),
            })
        })
        .clone()
}

/// Node-doubling Gauss-Legendre (16, 32, ..., 512) until successive estimates
/// differ by less than `tol`.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let mut prev = gauss_legendre(16).integrate(a, b, &f);
    let mut n = 32;
    while n <= 512 {
        let cur = gauss_legendre(n).integrate(a, b, &f);
        if (cur - prev).abs() < tol {
            return Ok(cur);
        }
        prev = cur;
        n *= 2;
    }
    Err(Error::Numeric {
        msg: format!("Gauss-Legendre did not settle to {tol:e} with 512 nodes"),
        estimate: prev,
    })
}

/// Product rule on S²: Gauss-Legendre in cos θ times the trapezoid rule in φ.
#[derive(Debug, Clone)]
pub struct SphereQuadrature {
    pub nodes: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl SphereQuadrature {
    pub fn product(n_theta: usize, n_phi: usize) -> Self {
        let gl = gauss_legendre(n_theta);
        let mut nodes = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        let dphi = 2.0 * PI / n_phi as f64;
        for (z, w) in gl.nodes.iter().zip(&gl.weights) {
            let s = (1.0 - z * z).max(0.0).sqrt();
            for j in 0..n_phi {
                let phi = (j as f64 + 0.5) * dphi;
                nodes.push([s * phi.cos(), s * phi.sin(), *z]);
                weights.push(w * dphi);
            }
        }
        SphereQuadrature { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

impl Default for SphereQuadrature {
    fn default() -> Self {
        SphereQuadrature::product(64, 128)
    }
}
