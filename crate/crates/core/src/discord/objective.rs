//! Discord objectives as functions of local measurement bases.
//!
//! For rank-1 product measurements with basis `U_k` on subsystem `k`, the
//! symmetric objective is
//! `Σ_k S(ρ_k) - S(ρ) + H(p) - Σ_k H(p_k)` where `p` is the joint outcome
//! distribution and `p_k` its marginals. The one-sided objective with basis
//! `{b_ν}` on `B` is `S(ρ_B) - S(ρ_AB) + Σ_ν [S̃(R_ν) - η(Tr R_ν)]` with
//! `R_ν = <b_ν|ρ_AB|b_ν>` and `S̃` the entropy of an unnormalised spectrum.

use nalgebra::DMatrix;

use super::optimizer::{BasisObjective, PairFn};
use crate::entropy::{eta, subsystem_entropy, vn_entropy};
use crate::matfun::{self, CMat, C64};
use crate::states::DensityMatrix;

fn row_major_strides(dims: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    strides
}

/// Eigenvalues of a small Hermitian matrix (lower triangle ignored).
pub(crate) fn small_hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    match m.nrows() {
        0 => vec![],
        1 => vec![m[(0, 0)].re],
        2 => {
            let (a, d, b) = (m[(0, 0)].re, m[(1, 1)].re, m[(0, 1)]);
            let mean = 0.5 * (a + d);
            let r = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
            vec![mean + r, mean - r]
        }
        _ => matfun::hermitian_part(m).symmetric_eigenvalues().iter().copied().collect(),
    }
}

/// `S̃(R) - η(Tr R)`, i.e. `p·S(R/p)` for `p = Tr R`.
fn weighted_entropy(m: &CMat) -> f64 {
    let ev = small_hermitian_eigenvalues(m);
    let tr: f64 = ev.iter().sum();
    ev.iter().map(|&l| eta(l)).sum::<f64>() - eta(tr)
}

/// Symmetric (N-partite) objective over rank-1 product measurements.
pub(crate) struct ProductObjective {
    rho: CMat,
    dims: Vec<usize>,
    strides: Vec<usize>,
    constant: f64,
}

impl ProductObjective {
    pub fn new(rho: &DensityMatrix) -> crate::Result<Self> {
        let n = rho.n_subsystems();
        let mut constant = -vn_entropy(rho);
        for k in 0..n {
            constant += subsystem_entropy(rho, &[k])?;
        }
        Ok(Self {
            rho: rho.matrix().clone(),
            dims: rho.dims().to_vec(),
            strides: row_major_strides(rho.dims()),
            constant,
        })
    }

    /// Joint outcome distribution in row-major order.
    pub fn joint_probs(&self, bases: &[CMat]) -> Vec<f64> {
        let u = matfun::tensor_all(bases);
        let rotated = u.adjoint() * &self.rho * &u;
        rotated.diagonal().iter().map(|z| z.re).collect()
    }

    fn marginal(&self, p: &[f64], k: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dims[k]];
        for (idx, &v) in p.iter().enumerate() {
            out[(idx / self.strides[k]) % self.dims[k]] += v;
        }
        out
    }
}

pub(crate) struct ProductPair {
    /// `(a, b, d)` per joint outcome of the other subsystems.
    blocks: Vec<(f64, C64, f64)>,
}

impl PairFn for ProductPair {
    fn eval(&self, theta: f64, phi: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        let e = C64::from_polar(1.0, -phi);
        let (mut pi, mut pj, mut h) = (0.0, 0.0, 0.0);
        for &(a, b, d) in &self.blocks {
            let cross = 2.0 * c * s * (e * b).re;
            let qi = c * c * a + s * s * d + cross;
            let qj = s * s * a + c * c * d - cross;
            pi += qi;
            pj += qj;
            h += eta(qi) + eta(qj);
        }
        h - eta(pi) - eta(pj)
    }

    fn slope(&self, theta: f64, phi: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        let (s2, c2) = (2.0 * theta).sin_cos();
        let e = C64::from_polar(1.0, -phi);
        let (mut pi, mut pj, mut dp, mut acc) = (0.0, 0.0, 0.0, 0.0);
        for &(a, b, d) in &self.blocks {
            let cross = 2.0 * c * s * (e * b).re;
            let qi = c * c * a + s * s * d + cross;
            let qj = s * s * a + c * c * d - cross;
            let dq = s2 * (d - a) + 2.0 * c2 * (e * b).re;
            pi += qi;
            pj += qj;
            dp += dq;
            acc -= (log2_pos(qi) - log2_pos(qj)) * dq;
        }
        acc + (log2_pos(pi) - log2_pos(pj)) * dp
    }
}

/// `log2` clamped at the smallest positive normal number.
fn log2_pos(x: f64) -> f64 {
    x.max(f64::MIN_POSITIVE).log2()
}

impl BasisObjective for ProductObjective {
    /// `R_m` for each joint outcome `m` of the other subsystems.
    type SiteCache = Vec<CMat>;
    type Pair = ProductPair;

    fn basis_dims(&self) -> &[usize] {
        &self.dims
    }

    fn value(&self, bases: &[CMat]) -> f64 {
        let p = self.joint_probs(bases);
        let mut v = self.constant + p.iter().map(|&x| eta(x)).sum::<f64>();
        for k in 0..self.dims.len() {
            v -= self.marginal(&p, k).iter().map(|&x| eta(x)).sum::<f64>();
        }
        v
    }

    fn site_cache(&self, bases: &[CMat], k: usize) -> Vec<CMat> {
        let dk = self.dims[k];
        let factors: Vec<CMat> = bases
            .iter()
            .enumerate()
            .map(|(l, b)| if l == k { matfun::identity(dk) } else { b.clone() })
            .collect();
        let w = matfun::tensor_all(&factors);
        let rotated = w.adjoint() * &self.rho * &w;
        let total: usize = self.dims.iter().product();
        let (stride, outer) = (self.strides[k], total / dk);
        // enumerate the other digits: high part above k, low part below k
        (0..outer)
            .map(|m| {
                let (hi, lo) = (m / stride, m % stride);
                let base = hi * stride * dk + lo;
                DMatrix::from_fn(dk, dk, |x, y| rotated[(base + x * stride, base + y * stride)])
            })
            .collect()
    }

    fn pair(&self, cache: &Vec<CMat>, basis: &CMat, i: usize, j: usize) -> ProductPair {
        let ui = basis.column(i);
        let uj = basis.column(j);
        let blocks = cache
            .iter()
            .map(|r| {
                let ri = r * ui;
                let rj = r * uj;
                (ui.dotc(&ri).re, ui.dotc(&rj), uj.dotc(&rj).re)
            })
            .collect();
        ProductPair { blocks }
    }
}

/// One-sided objective with the measurement on the second factor.
pub(crate) struct OneSidedObjective {
    rho: CMat,
    da: usize,
    dims: [usize; 1],
    constant: f64,
}

impl OneSidedObjective {
    pub fn new(rho: &DensityMatrix) -> crate::Result<Self> {
        let (da, db) = rho.bipartite_dims()?;
        let constant = subsystem_entropy(rho, &[1])? - vn_entropy(rho);
        Ok(Self { rho: rho.matrix().clone(), da, dims: [db], constant })
    }

    /// `<x|ρ|y>` as an operator on `A`.
    fn block(&self, x: &[C64], y: &[C64]) -> CMat {
        let db = self.dims[0];
        DMatrix::from_fn(self.da, self.da, |a, a2| {
            let mut acc = C64::new(0.0, 0.0);
            for (k, xk) in x.iter().enumerate() {
                let mut row = C64::new(0.0, 0.0);
                for (l, yl) in y.iter().enumerate() {
                    row += self.rho[(a * db + k, a2 * db + l)] * yl;
                }
                acc += xk.conj() * row;
            }
            acc
        })
    }
}

fn column(u: &CMat, i: usize) -> Vec<C64> {
    u.column(i).iter().copied().collect()
}

pub(crate) struct OneSidedPair {
    rii: CMat,
    rjj: CMat,
    rij: CMat,
}

impl OneSidedPair {
    fn rotated(&self, theta: f64, phi: f64) -> (CMat, CMat, CMat) {
        let (s, c) = theta.sin_cos();
        let e = C64::from_polar(1.0, -phi);
        let coherent = &self.rij * e + self.rij.adjoint() * e.conj();
        let cross = &coherent * C64::new(c * s, 0.0);
        let ri = &self.rii * C64::new(c * c, 0.0) + &self.rjj * C64::new(s * s, 0.0) + &cross;
        let rj = &self.rii * C64::new(s * s, 0.0) + &self.rjj * C64::new(c * c, 0.0) - &cross;
        let (s2, c2) = (2.0 * theta).sin_cos();
        let dri = (&self.rjj - &self.rii) * C64::new(s2, 0.0) + coherent * C64::new(c2, 0.0);
        (ri, rj, dri)
    }
}

/// `log2` on the support of a small PSD matrix, zero on its kernel.
fn log2_support(m: &CMat) -> CMat {
    let e = matfun::hermitian_part(m).symmetric_eigen();
    let max = e.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let cut = matfun::EPS_SUPP * max;
    let logs = e.eigenvalues.map(|l| C64::new(if l > cut && l > 0.0 { l.log2() } else { 0.0 }, 0.0));
    &e.eigenvectors * CMat::from_diagonal(&logs) * e.eigenvectors.adjoint()
}

impl PairFn for OneSidedPair {
    fn eval(&self, theta: f64, phi: f64) -> f64 {
        let (ri, rj, _) = self.rotated(theta, phi);
        weighted_entropy(&ri) + weighted_entropy(&rj)
    }

    fn slope(&self, theta: f64, phi: f64) -> f64 {
        let (ri, rj, dri) = self.rotated(theta, phi);
        let diff = log2_support(&ri) - log2_support(&rj);
        let dtr = dri.trace().re;
        -(dri * diff).trace().re + dtr * (log2_pos(ri.trace().re) - log2_pos(rj.trace().re))
    }
}

impl BasisObjective for OneSidedObjective {
    type SiteCache = ();
    type Pair = OneSidedPair;

    fn basis_dims(&self) -> &[usize] {
        &self.dims
    }

    fn value(&self, bases: &[CMat]) -> f64 {
        let u = &bases[0];
        self.constant
            + (0..self.dims[0])
                .map(|nu| {
                    let b = column(u, nu);
                    weighted_entropy(&self.block(&b, &b))
                })
                .sum::<f64>()
    }

    fn site_cache(&self, _: &[CMat], _: usize) {}

    fn pair(&self, _: &(), basis: &CMat, i: usize, j: usize) -> OneSidedPair {
        let (bi, bj) = (column(basis, i), column(basis, j));
        OneSidedPair { rii: self.block(&bi, &bi), rjj: self.block(&bj, &bj), rij: self.block(&bi, &bj) }
    }
}

/// `Σ_k S(ρ_k) - S(ρ)`.
pub(crate) fn total_correlation(rho: &DensityMatrix) -> crate::Result<f64> {
    let mut t = -vn_entropy(rho);
    for k in 0..rho.n_subsystems() {
        t += subsystem_entropy(rho, &[k])?;
    }
    Ok(t)
}
