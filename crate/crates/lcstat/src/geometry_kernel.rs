//! Spherocylinder pair geometry, the hard-core kernel and its moments.
//!
//! The kernel `G(r; m, m')` is 1 when a rod at the origin along `m` and a rod
//! at `r` along `m'` overlap. Its support is the Minkowski sum of a rhombus
//! with side `L` and a ball of radius `D`. Moments are reported either in the
//! pair frame `(n1, n2, n3)` or in the lab frame.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::tensor_algebra::{canonical_indices, sym_product, SymTensor};
use crate::{Error, Result};

/// Rod length `L`, cap diameter `D` and aspect ratio `η = D/L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RodGeometry {
    pub l: f64,
    pub d: f64,
    pub eta: f64,
}

impl RodGeometry {
    pub fn new(l: f64, d: f64) -> Result<Self> {
        if !(l > 0.0 && l.is_finite()) || !(d > 0.0 && d.is_finite()) {
            return Err(Error::Input(format!("rod needs L > 0 and D > 0, got L = {l}, D = {d}")));
        }
        let eta = d / l;
        if eta > 1.0 {
            return Err(Error::Input(format!("eta = D/L = {eta} exceeds 1")));
        }
        Ok(RodGeometry { l, d, eta })
    }

    /// Unit-length rod with `D = η`.
    pub fn unit(eta: f64) -> Result<Self> {
        Self::new(1.0, eta)
    }
}

fn check_unit(v: &Vector3<f64>, name: &str) -> Result<()> {
    if (v.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::Input(format!("{name} must be a unit vector, |{name}| = {}", v.norm())));
    }
    Ok(())
}

/// Orthonormal frame attached to a pair of rod axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairFrame {
    pub m: Vector3<f64>,
    pub m2: Vector3<f64>,
    pub gamma: f64,
    pub cos_beta: f64,
    pub sin_beta: f64,
    pub n1: Vector3<f64>,
    pub n2: Vector3<f64>,
    pub n3: Vector3<f64>,
}

impl PairFrame {
    pub fn new(m: Vector3<f64>, m2: Vector3<f64>) -> Result<Self> {
        check_unit(&m, "m")?;
        check_unit(&m2, "m'")?;
        let sin_gamma = m.cross(&m2).norm();
        let gamma = sin_gamma.atan2(m.dot(&m2));
        if sin_gamma < 1e-12 {
            return Err(Error::DegenerateFrame(gamma));
        }
        let sum = m + m2;
        let diff = m - m2;
        let cos_beta = sum.norm() / 2.0;
        let sin_beta = diff.norm() / 2.0;
        let n1 = sum / (2.0 * cos_beta);
        let n2 = diff / (2.0 * sin_beta);
        Ok(PairFrame { m, m2, gamma, cos_beta, sin_beta, n1, n2, n3: n1.cross(&n2) })
    }

    /// Rotation whose rows are `n1, n2, n3`.
    pub fn rotation(&self) -> Matrix3<f64> {
        Matrix3::from_rows(&[self.n1.transpose(), self.n2.transpose(), self.n3.transpose()])
    }
}

/// Axes `m = (cos β, sin β, 0)` and `m' = (cos β, -sin β, 0)`, whose pair frame
/// coincides with the lab frame.
pub fn frame_aligned_pair(gamma: f64) -> (Vector3<f64>, Vector3<f64>) {
    let (s, c) = (gamma / 2.0).sin_cos();
    (Vector3::new(c, s, 0.0), Vector3::new(c, -s, 0.0))
}

/// Squared minimum distance between the segments `{t m}` and `{r + t m2}`,
/// `t ∈ [-L/2, L/2]`.
pub fn segment_distance_sq(r: &Vector3<f64>, m: &Vector3<f64>, m2: &Vector3<f64>, l: f64) -> f64 {
    let d1 = m * l;
    let d2 = m2 * l;
    let p1 = -0.5 * d1;
    let p2 = r - 0.5 * d2;
    let w = p1 - p2;
    let a = d1.dot(&d1);
    let e = d2.dot(&d2);
    let b = d1.dot(&d2);
    let c = d1.dot(&w);
    let f = d2.dot(&w);
    let denom = a * e - b * b;
    let mut s = if denom > 1e-14 * a * e { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
    let mut t = (b * s + f) / e;
    if t < 0.0 {
        t = 0.0;
        s = (-c / a).clamp(0.0, 1.0);
    } else if t > 1.0 {
        t = 1.0;
        s = ((b - c) / a).clamp(0.0, 1.0);
    }
    (p1 + d1 * s - p2 - d2 * t).norm_squared()
}

/// Hard-core kernel: true when the two spherocylinders overlap.
pub fn rods_overlap(r: &Vector3<f64>, m: &Vector3<f64>, m2: &Vector3<f64>, geom: &RodGeometry) -> bool {
    segment_distance_sq(r, m, m2, geom.l) < geom.d * geom.d
}

/// Zeroth moment (excluded volume) `2L²D sinγ + 2πD²L + 4πD³/3`.
pub fn excluded_volume(gamma: f64, geom: &RodGeometry) -> f64 {
    let (l, d) = (geom.l, geom.d);
    2.0 * l * l * d * gamma.sin() + 2.0 * PI * d * d * l + 4.0 / 3.0 * PI * d.powi(3)
}

fn check_gamma(gamma: f64) -> Result<(f64, f64, f64)> {
    if !(gamma > 0.0 && gamma < PI) || gamma.sin() < 1e-12 {
        return Err(Error::DegenerateFrame(gamma));
    }
    let (sb, cb) = (gamma / 2.0).sin_cos();
    Ok((gamma.sin(), cb, sb))
}

/// Diagonal of the second moment `∫G rr dr` in the pair frame.
pub fn second_moment_diag(gamma: f64, geom: &RodGeometry) -> Result<[f64; 3]> {
    let (sg, cb, sb) = check_gamma(gamma)?;
    let e = geom.eta;
    let (e2, e3, e4) = (e * e, e * e * e, e * e * e * e);
    let pre = geom.l.powi(4) * geom.d;
    let m1 = (sg / 3.0 + 2.0 * PI * e / 3.0 + 4.0 * (PI - gamma) * e2 / 3.0 + PI * e3) * cb * cb
        + (4.0 * sg * e2 / 3.0 + PI * sb * sb * e3 / 2.0 + 4.0 * PI * e4 / 15.0);
    let m2 = (sg / 3.0 + 2.0 * PI * e / 3.0 + 4.0 * gamma * e2 / 3.0 + PI * e3) * sb * sb
        + (4.0 * sg * e2 / 3.0 + PI * cb * cb * e3 / 2.0 + 4.0 * PI * e4 / 15.0);
    let m3 = geom.l * geom.l * geom.d.powi(3) * (2.0 * sg / 3.0 + PI * e / 2.0 + 4.0 * PI * e2 / 15.0);
    Ok([pre * m1, pre * m2, m3])
}

/// Frame components of the fourth moment: `∫r1⁴, ∫r2⁴, ∫r3⁴, ∫r1²r2², ∫r2²r3², ∫r1²r3²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourthMomentFrame {
    pub w1111: f64,
    pub w2222: f64,
    pub w3333: f64,
    pub w1122: f64,
    pub w2233: f64,
    pub w1133: f64,
}

impl FourthMomentFrame {
    pub fn as_array(&self) -> [f64; 6] {
        [self.w1111, self.w2222, self.w3333, self.w1122, self.w2233, self.w1133]
    }
}

pub fn fourth_moment_frame(gamma: f64, geom: &RodGeometry) -> Result<FourthMomentFrame> {
    let (sg, cb, sb) = check_gamma(gamma)?;
    let e = geom.eta;
    let p = |k: i32| e.powi(k);
    let pre = geom.l.powi(6) * geom.d;
    let gc = PI - gamma;
    // `lead(c, s, g)` is the ∫r1⁴ form; ∫r2⁴ follows by c <-> s and π-γ -> γ.
    let lead = |c: f64, s: f64, g: f64| {
        (2.0 * sg / 15.0 + 2.0 * PI * e / 5.0 + 4.0 * g * p(2) / 3.0 + PI * p(3) - PI * p(5) / 12.0) * c.powi(4)
            + (8.0 * p(2) / 3.0 + 16.0 * p(4) / 15.0) * c.powi(3) * s
            + (PI * p(3) + 8.0 * g * p(4) / 5.0 + PI * p(5) / 2.0) * c * c
            + 32.0 * p(4) / 15.0 * c * s
            + (PI * p(5) / 4.0 + 4.0 * PI * p(6) / 35.0)
    };
    let w3 = 2.0 * sg * p(4) / 5.0 + PI * p(5) / 4.0 + 4.0 * PI * p(6) / 35.0;
    let w4 = (sg / 45.0 + PI * e / 15.0 - PI * p(5) / 12.0) * cb * cb * sb * sb
        + (4.0 * p(2) / 9.0 + 8.0 * p(4) / 15.0) * cb * sb
        + 4.0 * p(4) / 15.0 * (gamma * sb * sb + gc * cb * cb)
        + (PI * p(3) / 6.0 + PI * p(5) / 6.0 + 4.0 * PI * p(6) / 105.0);
    let side = |s2: f64, g: f64| {
        (sg * p(2) / 9.0 + PI * p(3) / 6.0 + 4.0 * g * p(4) / 15.0 + PI * p(5) / 12.0) * s2
            + 8.0 * p(4) / 15.0 * cb * sb
            + (PI * p(5) / 12.0 + 4.0 * PI * p(6) / 105.0)
    };
    Ok(FourthMomentFrame {
        w1111: pre * lead(cb, sb, gc),
        w2222: pre * lead(sb, cb, gamma),
        w3333: pre * w3,
        w1122: pre * w4,
        w2233: pre * side(sb * sb, gamma),
        w1133: pre * side(cb * cb, gc),
    })
}

const PARALLEL_GUARD: f64 = 1.0 - 1e-6;

fn check_x(x: f64) -> Result<f64> {
    if !(x.abs() <= PARALLEL_GUARD) {
        return Err(Error::Singular(x));
    }
    Ok((1.0 - x * x).sqrt())
}

fn asin_over_x(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 + x2 / 6.0 + 3.0 * x2 * x2 / 40.0
    } else {
        x.asin() / x
    }
}

/// `(B1, B2, B3)` with `M2 = B1 I + B2 (mm + m'm') + B3 (mm' + m'm)(m·m')`.
pub fn kernel_b(x: f64, geom: &RodGeometry) -> Result<[f64; 3]> {
    let s = check_x(x)?;
    let e = geom.eta;
    let pre = geom.l.powi(4) * geom.d;
    let b1 = 2.0 * s * e * e / 3.0 + PI * e.powi(3) / 2.0 + 4.0 * PI * e.powi(4) / 15.0;
    let b2 = s / 6.0 + PI * e * (1.0 + e) / 3.0 + PI * e.powi(3) / 4.0 + 2.0 * e * e / (3.0 * s);
    let b3 = e * e * (2.0 * asin_over_x(x) / 3.0 - 2.0 / (3.0 * s));
    Ok([pre * b1, pre * b2, pre * b3])
}

/// `(R1, ..., R6)` of the fourth-moment decomposition
/// `R1 (δδ)_sym + R2 [(δmm)_sym + (δm'm')_sym] + R3 (δ(mm'+m'm))_sym
///  + R4 (m⁴ + m'⁴) + R5 (mmm'm')_sym + R6 [(m³m')_sym + (m'³m)_sym]`.
pub fn kernel_r(x: f64, geom: &RodGeometry) -> Result<[f64; 6]> {
    let s = check_x(x)?;
    let gamma = x.acos();
    let e = geom.eta;
    let p = |k: i32| e.powi(k);
    let s3 = s * s * s;
    let pre = geom.l.powi(6) * geom.d;
    let r1 = 2.0 * s * p(4) / 15.0 + PI * p(5) / 12.0 + 4.0 * PI * p(6) / 105.0;
    let r2 = s * p(2) / 18.0 + PI * p(3) / 12.0 + PI * p(4) / 15.0 + PI * p(5) / 24.0 + 2.0 * p(4) / (15.0 * s);
    let r3 = (PI - 2.0 * gamma) * p(4) / 15.0 - 2.0 * p(4) * x / (15.0 * s);
    let r4 = s / 40.0 + 3.0 * PI * e / 40.0 + PI * p(2) / 12.0 + PI * p(3) / 8.0 - PI * p(5) / 24.0
        + p(2) / (3.0 * s)
        - 2.0 * p(4) / (15.0 * s3);
    let r5 = s / 72.0 + PI * e / 24.0 + PI * p(2) / 12.0 + PI * p(3) / 8.0
        + (p(2) / 9.0 + 2.0 * p(4) / 15.0) / s
        - 2.0 * p(4) * x * x / (15.0 * s3);
    let r6 = (PI - 2.0 * gamma) * p(2) / 12.0 - p(2) * x / (6.0 * s) + 2.0 * p(4) * x.powi(3) / (15.0 * s3);
    Ok([r1, r2, r3, r4, r5, r6].map(|v| pre * v))
}

fn arr(v: &Vector3<f64>) -> [f64; 3] {
    [v.x, v.y, v.z]
}

/// Lab-frame second moment assembled from `(B1, B2, B3)`.
pub fn second_moment_from_b(m: &Vector3<f64>, m2: &Vector3<f64>, geom: &RodGeometry) -> Result<Matrix3<f64>> {
    check_unit(m, "m")?;
    check_unit(m2, "m'")?;
    let x = m.dot(m2);
    let [b1, b2, b3] = kernel_b(x, geom)?;
    Ok(Matrix3::identity() * b1
        + (m * m.transpose() + m2 * m2.transpose()) * b2
        + (m * m2.transpose() + m2 * m.transpose()) * (b3 * x))
}

/// Lab-frame second moment rotated from the pair-frame diagonal.
pub fn second_moment_from_frame(m: &Vector3<f64>, m2: &Vector3<f64>, geom: &RodGeometry) -> Result<Matrix3<f64>> {
    let f = PairFrame::new(*m, *m2)?;
    let [a, b, c] = second_moment_diag(f.gamma, geom)?;
    Ok(f.n1 * f.n1.transpose() * a + f.n2 * f.n2.transpose() * b + f.n3 * f.n3.transpose() * c)
}

/// Lab-frame fourth moment assembled from `(R1, ..., R6)`.
pub fn fourth_moment_from_r(m: &Vector3<f64>, m2: &Vector3<f64>, geom: &RodGeometry) -> Result<SymTensor<f64>> {
    check_unit(m, "m")?;
    check_unit(m2, "m'")?;
    let r = kernel_r(m.dot(m2), geom)?;
    let (a, b) = (arr(m), arr(m2));
    let terms = [
        sym_product::<f64>(&[], 2).scale(r[0]),
        sym_product(&[(a, 2)], 1).add(&sym_product(&[(b, 2)], 1)).scale(r[1]),
        sym_product(&[(a, 1), (b, 1)], 1).scale(r[2]),
        sym_product(&[(a, 4)], 0).add(&sym_product(&[(b, 4)], 0)).scale(r[3]),
        sym_product(&[(a, 2), (b, 2)], 0).scale(r[4]),
        sym_product(&[(a, 3), (b, 1)], 0).add(&sym_product(&[(b, 3), (a, 1)], 0)).scale(r[5]),
    ];
    Ok(terms.iter().skip(1).fold(terms[0].clone(), |acc, t| acc.add(t)))
}

/// Lab-frame fourth moment rotated from the pair-frame components.
pub fn fourth_moment_from_frame(m: &Vector3<f64>, m2: &Vector3<f64>, geom: &RodGeometry) -> Result<SymTensor<f64>> {
    let f = PairFrame::new(*m, *m2)?;
    let w = fourth_moment_frame(f.gamma, geom)?;
    let pure = [w.w1111, w.w2222, w.w3333];
    let frame_component = |idx: &[usize]| -> f64 {
        let mut counts = [0usize; 3];
        for &i in idx {
            counts[i] += 1;
        }
        match counts {
            [4, 0, 0] | [0, 4, 0] | [0, 0, 4] => pure[counts.iter().position(|&c| c == 4).unwrap()],
            [2, 2, 0] => w.w1122,
            [0, 2, 2] => w.w2233,
            [2, 0, 2] => w.w1133,
            _ => 0.0,
        }
    };
    let rot = f.rotation();
    Ok(SymTensor::from_fn(4, |lab| {
        let mut acc = 0.0;
        for flat in 0..81usize {
            let fi = [flat / 27, (flat / 9) % 3, (flat / 3) % 3, flat % 3];
            let v = frame_component(&fi);
            if v != 0.0 {
                acc += v * (0..4).map(|p| rot[(fi[p], lab[p])]).product::<f64>();
            }
        }
        acc
    }))
}

/// Monte Carlo estimate of `∫G r⊗...⊗r dr` over canonical components.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentEstimate {
    pub order: usize,
    pub value: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_samples: u64,
    pub seed: u64,
}

impl MomentEstimate {
    /// Component at a (not necessarily sorted) multi-index.
    pub fn component(&self, idx: &[usize]) -> (f64, f64) {
        let mut s = idx.to_vec();
        s.sort_unstable();
        let pos = canonical_indices(self.order).iter().position(|c| *c == s).expect("index of wrong order");
        (self.value[pos], self.stderr[pos])
    }
}

const MC_CHUNK: u64 = 1 << 16;

/// Estimates for several orders from one sample stream.
///
/// Samples are uniform in the cube `[-(L+D), L+D]³`, which contains the
/// support of `G`. Chunk `j` uses stream `j` of a ChaCha8 generator seeded with
/// `seed`, so results do not depend on the thread count.
pub fn moment_mc_orders(
    m: &Vector3<f64>,
    m2: &Vector3<f64>,
    geom: &RodGeometry,
    orders: &[usize],
    n_samples: u64,
    seed: u64,
) -> Result<Vec<MomentEstimate>> {
    if n_samples == 0 {
        return Err(Error::Input("n_samples must be at least 1".into()));
    }
    check_unit(m, "m")?;
    check_unit(m2, "m'")?;
    if let Some(o) = orders.iter().find(|&&o| o > 4) {
        return Err(Error::Input(format!("moment order {o} not supported")));
    }
    let index_sets: Vec<Vec<Vec<usize>>> = orders.iter().map(|&o| canonical_indices(o)).collect();
    let width: usize = index_sets.iter().map(|s| s.len()).sum();
    let half = geom.l + geom.d;
    let n_chunks = n_samples.div_ceil(MC_CHUNK);
    let partial: Vec<(Vec<f64>, Vec<f64>)> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let count = MC_CHUNK.min(n_samples - chunk * MC_CHUNK);
            let mut sum = vec![0.0; width];
            let mut sq = vec![0.0; width];
            for _ in 0..count {
                let r = Vector3::new(
                    half * (2.0 * rng.random::<f64>() - 1.0),
                    half * (2.0 * rng.random::<f64>() - 1.0),
                    half * (2.0 * rng.random::<f64>() - 1.0),
                );
                if !rods_overlap(&r, m, m2, geom) {
                    continue;
                }
                let mut k = 0;
                for set in &index_sets {
                    for idx in set {
                        let g: f64 = idx.iter().map(|&i| r[i]).product();
                        sum[k] += g;
                        sq[k] += g * g;
                        k += 1;
                    }
                }
            }
            (sum, sq)
        })
        .collect();
    let mut sum = vec![0.0; width];
    let mut sq = vec![0.0; width];
    for (s, q) in &partial {
        for k in 0..width {
            sum[k] += s[k];
            sq[k] += q[k];
        }
    }
    let vol = (2.0 * half).powi(3);
    let n = n_samples as f64;
    let mut out = Vec::with_capacity(orders.len());
    let mut k = 0;
    for (&order, set) in orders.iter().zip(&index_sets) {
        let mut value = Vec::with_capacity(set.len());
        let mut stderr = Vec::with_capacity(set.len());
        for _ in set {
            let mean = sum[k] / n;
            let var = if n_samples > 1 { ((sq[k] / n - mean * mean) * n / (n - 1.0)).max(0.0) } else { 0.0 };
            value.push(vol * mean);
            stderr.push(vol * (var / n).sqrt());
            k += 1;
        }
        out.push(MomentEstimate { order, value, stderr, n_samples, seed });
    }
    Ok(out)
}

pub fn moment_mc(
    m: &Vector3<f64>,
    m2: &Vector3<f64>,
    geom: &RodGeometry,
    order: usize,
    n_samples: u64,
    seed: u64,
) -> Result<MomentEstimate> {
    Ok(moment_mc_orders(m, m2, geom, &[order], n_samples, seed)?.remove(0))
}
