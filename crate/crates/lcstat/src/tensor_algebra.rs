//! Symmetric and traceless tensors in three dimensions, Legendre polynomials
//! and the expansion-coefficient tables of the hard-rod kernel.
//!
//! Symmetric tensors are stored by canonical multi-index: the sorted index
//! tuples `i1 <= i2 <= ... <= ik` in lexicographic order, so an order-2 tensor
//! has 6 entries and an order-4 tensor 15. The arithmetic is generic so the
//! combinatorial identities can be checked in exact rational arithmetic.

use std::f64::consts::{LN_2, PI};
use std::fmt::Debug;

use num_traits::{FromPrimitive, Num};

use crate::quadrature::integrate_adaptive;
use crate::{Error, Result};

pub trait Scalar: Num + Copy + FromPrimitive + PartialEq + Debug {}
impl<T: Num + Copy + FromPrimitive + PartialEq + Debug> Scalar for T {}

pub type Vec3<T> = [T; 3];

fn int<T: Scalar>(n: i64) -> T {
    T::from_i64(n).expect("small integer must be representable")
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Sorted index tuples of an order-`k` symmetric tensor, lexicographic.
pub fn canonical_indices(order: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..3 {
            cur.push(i);
            rec(i, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, order, &mut Vec::with_capacity(order), &mut out);
    out
}

/// Number of distinct index permutations of a sorted multi-index.
pub fn multiplicity(idx: &[usize]) -> usize {
    let mut counts = [0usize; 3];
    for &i in idx {
        counts[i] += 1;
    }
    factorial(idx.len()) / counts.iter().map(|&c| factorial(c)).product::<usize>()
}

fn full_offset(idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, &i| acc * 3 + i)
}

fn full_index(order: usize, mut flat: usize) -> Vec<usize> {
    let mut idx = vec![0; order];
    for slot in idx.iter_mut().rev() {
        *slot = flat % 3;
        flat /= 3;
    }
    idx
}

/// Fully symmetric tensor of order `k` on R³.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor<T> {
    order: usize,
    data: Vec<T>,
}

/// Order-2 or order-4 symmetric traceless tensor.
pub type TracelessTensor = SymTensor<f64>;

impl<T: Scalar> SymTensor<T> {
    pub fn zeros(order: usize) -> Self {
        let n = (order + 1) * (order + 2) / 2;
        SymTensor { order, data: vec![T::zero(); n] }
    }

    pub fn from_fn<F: FnMut(&[usize]) -> T>(order: usize, mut f: F) -> Self {
        let data = canonical_indices(order).iter().map(|i| f(i)).collect();
        SymTensor { order, data }
    }

    /// Build from a full `3^k` row-major array; only canonical entries are read.
    pub fn from_full(order: usize, full: &[T]) -> Result<Self> {
        if full.len() != 3usize.pow(order as u32) {
            return Err(Error::Input(format!(
                "full array of order {order} needs {} entries, got {}",
                3usize.pow(order as u32),
                full.len()
            )));
        }
        Ok(Self::from_fn(order, |i| full[full_offset(i)]))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn components(&self) -> &[T] {
        &self.data
    }

    /// Component at any (not necessarily sorted) multi-index.
    pub fn get(&self, idx: &[usize]) -> T {
        assert_eq!(idx.len(), self.order, "index length must equal tensor order");
        let mut s = idx.to_vec();
        s.sort_unstable();
        // position of a sorted tuple in the canonical enumeration
        let mut pos = 0;
        let mut start = 0;
        let mut left = self.order;
        for &i in &s {
            for j in start..i {
                // tuples that put j here and then fill `left - 1` slots from j..3
                pos += multichoose(3 - j, left - 1);
            }
            start = i;
            left -= 1;
        }
        self.data[pos]
    }

    pub fn to_full(&self) -> Vec<T> {
        let n = 3usize.pow(self.order as u32);
        (0..n).map(|f| self.get(&full_index(self.order, f))).collect()
    }

    /// Contraction over one index pair (all pairs agree by symmetry).
    pub fn contract_pair(&self) -> SymTensor<T> {
        assert!(self.order >= 2, "contraction needs order >= 2");
        SymTensor::from_fn(self.order - 2, |rest| {
            let mut acc = T::zero();
            for a in 0..3 {
                let mut idx = vec![a, a];
                idx.extend_from_slice(rest);
                acc = acc + self.get(&idx);
            }
            acc
        })
    }

    /// Full contraction `A_{i1..ik} B_{i1..ik}`.
    pub fn dot(&self, other: &SymTensor<T>) -> T {
        assert_eq!(self.order, other.order, "orders must match");
        canonical_indices(self.order)
            .iter()
            .zip(self.data.iter().zip(&other.data))
            .fold(T::zero(), |acc, (idx, (a, b))| acc + int::<T>(multiplicity(idx) as i64) * *a * *b)
    }

    pub fn scale(&self, s: T) -> SymTensor<T> {
        SymTensor { order: self.order, data: self.data.iter().map(|&x| x * s).collect() }
    }

    pub fn add(&self, other: &SymTensor<T>) -> SymTensor<T> {
        assert_eq!(self.order, other.order, "orders must match");
        SymTensor {
            order: self.order,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| *x == T::zero())
    }
}

impl SymTensor<f64> {
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Largest pair contraction entry in absolute value.
    pub fn trace_residual(&self) -> f64 {
        if self.order < 2 {
            return 0.0;
        }
        self.contract_pair().max_abs()
    }
}

fn multichoose(n: usize, k: usize) -> usize {
    // number of multisets of size k from n symbols
    if n == 0 {
        return usize::from(k == 0);
    }
    let mut num = 1usize;
    let mut den = 1usize;
    for i in 0..k {
        num *= n + i;
        den *= i + 1;
    }
    num / den
}

/// Sum of the distinct tensors obtained by placing the listed vectors (each
/// with its multiplicity) and `n_delta` Kronecker deltas over the index slots.
///
/// `sym_product(&[(m, 2)], 1)` is `(mm δ)_sym` with 6 terms.
pub fn sym_product<T: Scalar>(groups: &[(Vec3<T>, usize)], n_delta: usize) -> SymTensor<T> {
    let order = groups.iter().map(|g| g.1).sum::<usize>() + 2 * n_delta;
    SymTensor::from_fn(order, |idx| {
        let mut counts: Vec<usize> = groups.iter().map(|g| g.1).collect();
        let mut used = vec![false; order];
        sym_rec(groups, &mut counts, n_delta, idx, &mut used)
    })
}

fn sym_rec<T: Scalar>(
    groups: &[(Vec3<T>, usize)],
    counts: &mut [usize],
    deltas: usize,
    idx: &[usize],
    used: &mut [bool],
) -> T {
    let Some(p) = used.iter().position(|u| !u) else {
        return T::one();
    };
    used[p] = true;
    let mut acc = T::zero();
    for g in 0..groups.len() {
        if counts[g] > 0 {
            let c = groups[g].0[idx[p]];
            if c != T::zero() {
                counts[g] -= 1;
                acc = acc + c * sym_rec(groups, counts, deltas, idx, used);
                counts[g] += 1;
            }
        }
    }
    if deltas > 0 {
        for q in p + 1..used.len() {
            if !used[q] && idx[q] == idx[p] {
                used[q] = true;
                acc = acc + sym_rec(groups, counts, deltas - 1, idx, used);
                used[q] = false;
            }
        }
    }
    used[p] = false;
    acc
}

/// Number of distinct terms in `sym_product` with the given multiplicities.
pub fn sym_product_term_count(counts: &[usize], n_delta: usize) -> usize {
    let order = counts.iter().sum::<usize>() + 2 * n_delta;
    factorial(order)
        / (counts.iter().map(|&c| factorial(c)).product::<usize>()
            * factorial(n_delta)
            * 2usize.pow(n_delta as u32))
}

/// `σ(m; k, l)`: symmetrized product of `k` copies of `m` and `l` deltas.
pub fn sigma_tensor<T: Scalar>(m: Vec3<T>, k: usize, l: usize) -> Result<SymTensor<T>> {
    if k + 2 * l > 4 {
        return Err(Error::Input(format!("sigma order {} exceeds 4", k + 2 * l)));
    }
    Ok(sym_product(&[(m, k)], l))
}

/// `(k+2l)! / (k! l! 2^l)`.
pub fn sigma_term_count(k: usize, l: usize) -> usize {
    sym_product_term_count(&[k], l)
}

/// Coefficient of `σ(k-2l, l)` in `Ξ_k`: `(-1)^l / ((2k-1)(2k-3)...(2k-2l+1))`.
fn xi_weight<T: Scalar>(k: usize, l: usize) -> T {
    let mut den: i64 = 1;
    for j in 0..l {
        den *= 2 * k as i64 - 1 - 2 * j as i64;
    }
    let sign = if l.is_multiple_of(2) { 1 } else { -1 };
    int::<T>(sign) / int::<T>(den)
}

/// `Ξ_k(m)` without checking `|m| = 1`; generic for exact arithmetic.
pub fn xi_tensor_unchecked<T: Scalar>(k: usize, m: Vec3<T>) -> SymTensor<T> {
    let mut out = SymTensor::zeros(k);
    for l in 0..=k / 2 {
        out = out.add(&sym_product(&[(m, k - 2 * l)], l).scale(xi_weight::<T>(k, l)));
    }
    out
}

/// Derivative of `Ξ_k(m)` along `dm`.
pub fn xi_tensor_derivative<T: Scalar>(k: usize, m: Vec3<T>, dm: Vec3<T>) -> SymTensor<T> {
    let mut out = SymTensor::zeros(k);
    for l in 0..=k / 2 {
        let j = k - 2 * l;
        if j == 0 {
            continue;
        }
        let mut groups = vec![(dm, 1)];
        if j > 1 {
            groups.push((m, j - 1));
        }
        out = out.add(&sym_product(&groups, l).scale(xi_weight::<T>(k, l)));
    }
    out
}

/// `Ξ_k(m)`, the order-`k` symmetric traceless tensor of a unit vector.
pub fn xi_tensor(k: usize, m: Vec3<f64>) -> Result<TracelessTensor> {
    if !(1..=4).contains(&k) {
        return Err(Error::Input(format!("xi tensor order {k} not in 1..=4")));
    }
    let norm2 = m.iter().map(|x| x * x).sum::<f64>();
    if (norm2.sqrt() - 1.0).abs() > 1e-12 {
        return Err(Error::Input(format!("|m| = {} is not 1", norm2.sqrt())));
    }
    Ok(xi_tensor_unchecked(k, m))
}

/// `(2n-1)!! / n!`, the factor in `P_n(m·m') = b_n Ξ_n(m):Ξ_n(m')`.
pub fn b_coefficient(n: usize) -> f64 {
    let dfact: f64 = (1..=n).map(|j| (2 * j - 1) as f64).product();
    dfact / factorial(n) as f64
}

/// Legendre polynomial `P_n(x)` by the three-term recurrence.
pub fn legendre_p(n: usize, x: f64) -> Result<f64> {
    if n > 6 {
        return Err(Error::Input(format!("Legendre degree {n} > 6")));
    }
    if !(x.abs() <= 1.0 + 1e-14) {
        return Err(Error::Domain(format!("Legendre argument {x} outside [-1, 1]")));
    }
    Ok(legendre_unchecked(n, x))
}

pub(crate) fn legendre_unchecked(n: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return p0;
    }
    for j in 1..n {
        let jf = j as f64;
        let p2 = ((2.0 * jf + 1.0) * x * p1 - jf * p0) / (jf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// `P_n(x) = 2^n Σ_k C(n,k) C((n+k-1)/2, n) x^k` with the generalized binomial.
pub fn legendre_p_explicit(n: usize, x: f64) -> f64 {
    fn gbinom(a: f64, k: usize) -> f64 {
        (0..k).fold(1.0, |acc, j| acc * (a - j as f64) / (j + 1) as f64)
    }
    let mut acc = 0.0;
    for k in 0..=n {
        acc += gbinom(n as f64, k) * gbinom((n + k) as f64 / 2.0 - 0.5, n) * x.powi(k as i32);
    }
    2f64.powi(n as i32) * acc
}

/// Legendre coefficient `a_n = (2n+1)/2 ∫ f P_n dx` over [-1, 1].
///
/// Integrated in θ with x = cos θ so that inverse square-root endpoint
/// singularities become smooth.
pub fn legendre_project<F: Fn(f64) -> f64>(f: F, n: usize) -> Result<f64> {
    if n > 6 {
        return Err(Error::Input(format!("Legendre degree {n} > 6")));
    }
    let integral = integrate_adaptive(
        |t| {
            let x = t.cos();
            f(x) * legendre_unchecked(n, x) * t.sin()
        },
        0.0,
        PI,
        1e-10,
    )?;
    Ok((2 * n + 1) as f64 / 2.0 * integral)
}

/// The seven kernel expansion coefficients `α_ij`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaCoefficients {
    pub a11: f64,
    pub a12: f64,
    pub a13: f64,
    pub a21: f64,
    pub a22: f64,
    pub a31: f64,
    pub a32: f64,
}

impl AlphaCoefficients {
    /// Polynomials in η; valid for any real η including the needle limit η = 0.
    pub fn polynomial(eta: f64) -> Self {
        let e2 = eta * eta;
        AlphaCoefficients {
            a11: e2 / 6.0 + e2 * eta / 2.0 + 4.0 * e2 * e2 / 15.0,
            a12: -(2.0 * e2 / 3.0) * (5.0 / 32.0),
            a13: -(2.0 * e2 / 3.0) * (9.0 / 256.0),
            a21: 1.0 / 24.0 + eta * (1.0 + 2.0 * eta) / 3.0 + e2 * eta / 4.0,
            a22: -5.0 / 192.0 + 5.0 * e2 / 12.0,
            a31: e2 * (LN_2 / 3.0 - 1.0 / 3.0),
            a32: e2 * (5.0 / 24.0 - 5.0 * LN_2 / 6.0),
        }
    }

    /// `α_ij` by index, `None` for pairs that do not exist.
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        match (i, j) {
            (1, 1) => Some(self.a11),
            (1, 2) => Some(self.a12),
            (1, 3) => Some(self.a13),
            (2, 1) => Some(self.a21),
            (2, 2) => Some(self.a22),
            (3, 1) => Some(self.a31),
            (3, 2) => Some(self.a32),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionCoefficients {
    pub eta: f64,
    pub alpha: AlphaCoefficients,
    pub mu11: f64,
    pub mu21: f64,
    pub mu22: f64,
    /// P0, P2, P4 coefficients of √(1-x²).
    pub sqrt_one_minus_x2: [f64; 3],
    /// P0, P2 coefficients of 1/√(1-x²).
    pub inv_sqrt_one_minus_x2: [f64; 2],
    /// P0, P2 coefficients of arcsin(x)/x.
    pub arcsin_over_x: [f64; 2],
    /// b1..b4.
    pub b: [f64; 4],
}

pub fn expansion_coefficients(eta: f64) -> Result<ExpansionCoefficients> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::Input(format!("eta = {eta} outside (0, 1]")));
    }
    Ok(ExpansionCoefficients {
        eta,
        alpha: AlphaCoefficients::polynomial(eta),
        mu11: 1.0 / 160.0 + 3.0 * eta / 40.0,
        mu21: 1.0 / 288.0 + eta / 24.0,
        mu22: -5.0 / 2304.0,
        sqrt_one_minus_x2: [PI / 4.0, -5.0 * PI / 32.0, -9.0 * PI / 256.0],
        inv_sqrt_one_minus_x2: [PI / 2.0, 5.0 * PI / 8.0],
        arcsin_over_x: [PI * LN_2 / 2.0, 5.0 * PI / 16.0 * (3.0 - 4.0 * LN_2)],
        b: [b_coefficient(1), b_coefficient(2), b_coefficient(3), b_coefficient(4)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_rational::Ratio;

    type Q = Ratio<i64>;

    fn q(n: i64, d: i64) -> Q {
        Ratio::new(n, d)
    }

    #[test]
    fn canonical_counts() {
        assert_eq!(canonical_indices(2).len(), 6);
        assert_eq!(canonical_indices(4).len(), 15);
        assert_eq!(canonical_indices(5).len(), 21);
    }

    #[test]
    fn get_matches_enumeration() {
        for order in 0..=5 {
            let t = SymTensor::<f64>::from_fn(order, |i| full_offset(i) as f64);
            for (pos, idx) in canonical_indices(order).iter().enumerate() {
                assert_eq!(t.components()[pos], full_offset(idx) as f64);
                let mut rev = idx.clone();
                rev.reverse();
                assert_eq!(t.get(&rev), t.components()[pos]);
            }
        }
    }

    #[test]
    fn xi2_of_z() {
        let t = xi_tensor(2, [0.0, 0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(t.get(&[0, 0]), -1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.get(&[1, 1]), -1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.get(&[2, 2]), 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.get(&[0, 2]), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn xi4_zzzz_exact() {
        let t = xi_tensor_unchecked(4, [q(0, 1), q(0, 1), q(1, 1)]);
        assert_eq!(t.get(&[2, 2, 2, 2]), q(8, 35));
        assert_eq!(t.get(&[0, 0, 2, 2]), q(-4, 35));
    }

    #[test]
    fn xi_rejects_non_unit() {
        assert!(matches!(xi_tensor(2, [1.0, 1.0, 0.0]), Err(Error::Input(_))));
        assert!(matches!(xi_tensor(5, [1.0, 0.0, 0.0]), Err(Error::Input(_))));
    }

    #[test]
    fn sigma_counts() {
        assert_eq!(sigma_term_count(1, 1), 3);
        assert_eq!(sigma_term_count(2, 1), 6);
        assert_eq!(sigma_term_count(0, 2), 3);
        assert_eq!(sigma_term_count(4, 0), 1);
        assert_eq!(sym_product_term_count(&[1, 1], 1), 12);
        assert_eq!(sym_product_term_count(&[2, 2], 0), 6);
        assert!(sigma_tensor([1.0, 0.0, 0.0], 3, 1).is_err());
    }

    #[test]
    fn sigma_term_count_by_evaluation() {
        // with all-ones vectors every term contributes 1 to a component
        // whose indices are all equal
        let ones = [1i64, 1, 1];
        for (k, l) in [(1, 1), (2, 1), (0, 2), (2, 0), (4, 0), (0, 1)] {
            let s = sigma_tensor(ones, k, l).unwrap();
            let idx = vec![0; k + 2 * l];
            assert_eq!(s.get(&idx) as usize, sigma_term_count(k, l));
        }
    }

    #[test]
    fn sigma_contraction_2_1_float() {
        let m = [0.36, 0.48, 0.8];
        let lhs = sigma_tensor(m, 2, 1).unwrap().contract_pair();
        let rhs = sigma_tensor(m, 2, 0).unwrap().scale(7.0).add(&sigma_tensor(m, 0, 1).unwrap());
        for (a, b) in lhs.components().iter().zip(rhs.components()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn legendre_values() {
        assert_eq!(legendre_p(2, 1.0).unwrap(), 1.0);
        assert_abs_diff_eq!(legendre_p(2, 0.0).unwrap(), -0.5, epsilon = 1e-15);
        let x: f64 = 0.3;
        let closed = (35.0 * x.powi(4) - 30.0 * x * x + 3.0) / 8.0;
        assert_abs_diff_eq!(legendre_p(4, x).unwrap(), closed, epsilon = 1e-15);
        assert_abs_diff_eq!(legendre_p_explicit(4, x), closed, epsilon = 1e-14);
        for n in 0..=6 {
            assert_abs_diff_eq!(legendre_p(n, 1.0).unwrap(), 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(legendre_p_explicit(n, -0.7), legendre_p(n, -0.7).unwrap(), epsilon = 1e-13);
        }
        assert!(legendre_p(7, 0.1).is_err());
        assert!(legendre_p(2, 1.5).is_err());
    }

    #[test]
    fn projections_match_table() {
        let e = expansion_coefficients(0.3).unwrap();
        let s = |x: f64| (1.0 - x * x).sqrt();
        for (i, n) in [0, 2, 4].into_iter().enumerate() {
            assert_abs_diff_eq!(legendre_project(s, n).unwrap(), e.sqrt_one_minus_x2[i], epsilon = 1e-9);
        }
        assert_abs_diff_eq!(legendre_project(s, 1).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn b_values() {
        assert_eq!(b_coefficient(2), 1.5);
        assert_eq!(b_coefficient(4), 35.0 / 8.0);
        assert_eq!(b_coefficient(1), 1.0);
    }

    #[test]
    fn alpha_values() {
        assert_eq!(AlphaCoefficients::polynomial(0.0).a21, 1.0 / 24.0);
        let e = expansion_coefficients(0.5).unwrap();
        assert_abs_diff_eq!(e.alpha.a12, -5.0 / 192.0, epsilon = 1e-16);
        assert_eq!(e.mu22, -5.0 / 2304.0);
        assert_eq!(e.alpha.get(3, 2), Some(e.alpha.a32));
        assert_eq!(e.alpha.get(2, 3), None);
        assert!(expansion_coefficients(0.0).is_err());
        assert!(expansion_coefficients(1.5).is_err());
    }

    #[test]
    fn alpha12_from_projection_of_b2_sine_term() {
        // B2 carries L⁴D sinγ/6; B1 carries 2η² sinγ/3, whose P2 part defines α12
        let eta = 0.5;
        let p2 = legendre_project(|x| (1.0 - x * x).sqrt(), 2).unwrap();
        let from_b1 = 2.0 * eta * eta / 3.0 * p2 / PI;
        assert_abs_diff_eq!(from_b1, AlphaCoefficients::polynomial(eta).a12, epsilon = 1e-10);
        let from_b2 = p2 / 6.0 / PI;
        assert_abs_diff_eq!(from_b2, -5.0 / 192.0, epsilon = 1e-10);
    }

    #[test]
    fn derivative_matches_difference() {
        let m = [0.6, 0.0, 0.8];
        let dm = [0.8, 0.3, -0.6];
        let h = 1e-6;
        let plus = [m[0] + h * dm[0], m[1] + h * dm[1], m[2] + h * dm[2]];
        let minus = [m[0] - h * dm[0], m[1] - h * dm[1], m[2] - h * dm[2]];
        for k in 1..=4 {
            let d = xi_tensor_derivative(k, m, dm);
            let fd = xi_tensor_unchecked(k, plus).add(&xi_tensor_unchecked(k, minus).scale(-1.0)).scale(0.5 / h);
            for (a, b) in d.components().iter().zip(fd.components()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-8);
            }
        }
    }
}
