//! Dense complex-matrix kernel.
//!
//! Everything downstream (entropies, channels, discord objectives) is built on
//! the Hermitian eigendecomposition here. Spectral functions of PSD matrices
//! share one support convention: eigenvalues at or below
//! [`EPS_SUPP`]` * lambda_max` are treated as exact zeros.
//!
//! Composite indices are row-major with the first tensor factor slowest, so
//! for `A ⊗ B` the index of `(a, b)` is `a * dim_b + b`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Tolerance for Hermiticity checks (max entry deviation, scaled by `max(1, |M|_max)`).
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Most negative eigenvalue accepted as numerical noise in PSD inputs.
pub const PSD_FLOOR: f64 = 1e-10;
/// Relative support cutoff.
pub const EPS_SUPP: f64 = 1e-10;
/// Default eigenvalue clustering tolerance for [`spectral_projectors`].
pub const CLUSTER_TOL: f64 = 1e-8;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn identity(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

pub fn zeros(dim: usize) -> CMat {
    CMat::zeros(dim, dim)
}

/// Real diagonal matrix.
pub fn diag(values: &[f64]) -> CMat {
    let mut m = zeros(values.len());
    for (k, &v) in values.iter().enumerate() {
        m[(k, k)] = C64::new(v, 0.0);
    }
    m
}

/// Pauli matrices indexed 0..4 as `I, X, Y, Z`.
pub fn pauli(k: usize) -> CMat {
    let entries = match k {
        0 => [ONE, ZERO, ZERO, ONE],
        1 => [ZERO, ONE, ONE, ZERO],
        2 => [ZERO, -I, I, ZERO],
        3 => [ONE, ZERO, ZERO, -ONE],
        _ => panic!("pauli index {k} out of range"),
    };
    CMat::from_row_slice(2, 2, &entries)
}

/// `|v><v|`
pub fn outer(v: &CVec) -> CMat {
    v * v.adjoint()
}

/// Computational basis vector `|k>` in dimension `dim`.
pub fn basis_vector(dim: usize, k: usize) -> CVec {
    let mut v = CVec::zeros(dim);
    v[k] = ONE;
    v
}

pub fn check_square(m: &CMat) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare(m.nrows(), m.ncols()));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(m.nrows())
}

fn check_same_dim(a: &CMat, b: &CMat) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::DimMismatch(format!(
            "{:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest entrywise deviation `|M - M^†|`.
pub fn hermiticity_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn check_hermitian(m: &CMat) -> Result<()> {
    check_square(m)?;
    let defect = hermiticity_defect(m);
    if defect > HERMITIAN_TOL * max_abs(m).max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    Ok(())
}

/// `(M + M^†) / 2`
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Largest entrywise deviation of `U^† U` from the identity.
pub fn unitarity_defect(u: &CMat) -> f64 {
    let n = u.ncols();
    max_abs(&(u.adjoint() * u - identity(n)))
}

/// Eigenvalues sorted descending with orthonormal eigenvectors as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianEigensystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMat,
}

impl HermitianEigensystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// Eigenvalues at or below this value are outside the support.
    pub fn support_cutoff(&self) -> f64 {
        EPS_SUPP * self.max_eigenvalue().max(0.0)
    }

    /// Number of eigenvalues strictly above [`Self::support_cutoff`].
    pub fn support_rank(&self) -> usize {
        let cut = self.support_cutoff();
        if self.max_eigenvalue() <= 0.0 {
            return 0;
        }
        self.eigenvalues.iter().filter(|&&l| l > cut).count()
    }

    pub fn eigenvector(&self, k: usize) -> CVec {
        self.eigenvectors.column(k).into_owned()
    }

    /// `Σ_k f(λ_k) |u_k><u_k|`
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> CMat {
        let n = self.dim();
        let mut scaled = self.eigenvectors.clone();
        for (k, &l) in self.eigenvalues.iter().enumerate() {
            let fk = f(l);
            for i in 0..n {
                scaled[(i, k)] *= fk;
            }
        }
        scaled * self.eigenvectors.adjoint()
    }

    pub fn reconstruct(&self) -> CMat {
        self.map(|l| l)
    }

    /// Projector onto the span of eigenvectors with eigenvalue above the support cutoff.
    pub fn support_projector(&self) -> CMat {
        let cut = self.support_cutoff();
        let positive = self.max_eigenvalue() > 0.0;
        self.map(|l| if positive && l > cut { 1.0 } else { 0.0 })
    }
}

/// Hermitian eigendecomposition with eigenvalues sorted descending.
///
/// Each eigenvector's phase is fixed by making its largest-magnitude component
/// real and positive (first such index on ties), so the result is a pure
/// function of the input bits.
pub fn eig_hermitian(m: &CMat) -> Result<HermitianEigensystem> {
    check_hermitian(m)?;
    let n = m.nrows();
    if n == 0 {
        return Ok(HermitianEigensystem {
            eigenvalues: Vec::new(),
            eigenvectors: CMat::zeros(0, 0),
        });
    }
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut vectors = CMat::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        let col = eig.eigenvectors.column(src);
        let mut pivot = 0;
        let mut best = -1.0;
        for i in 0..n {
            let mag = col[i].norm();
            if mag > best {
                best = mag;
                pivot = i;
            }
        }
        let phase = if best > 0.0 {
            col[pivot].conj() / best
        } else {
            ONE
        };
        for i in 0..n {
            vectors[(i, dst)] = col[i] * phase;
        }
        vectors[(pivot, dst)] = C64::new(vectors[(pivot, dst)].norm(), 0.0);
    }
    Ok(HermitianEigensystem {
        eigenvalues: values,
        eigenvectors: vectors,
    })
}

/// Spectral projectors of an eigensystem, merging eigenvalues that sit within
/// `cluster_tol` of their neighbour in the sorted spectrum. Returned values are
/// cluster means, in descending order.
pub fn spectral_projectors(e: &HermitianEigensystem, cluster_tol: f64) -> Result<Vec<(f64, CMat)>> {
    if cluster_tol.is_nan() || cluster_tol <= 0.0 {
        return Err(Error::BadParams(format!(
            "cluster tolerance must be positive, got {cluster_tol}"
        )));
    }
    let n = e.dim();
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for k in 0..n {
        match clusters.last_mut() {
            Some(c) if e.eigenvalues[*c.last().unwrap()] - e.eigenvalues[k] <= cluster_tol => {
                c.push(k)
            }
            _ => clusters.push(vec![k]),
        }
    }
    Ok(clusters
        .into_iter()
        .map(|members| {
            let mean =
                members.iter().map(|&k| e.eigenvalues[k]).sum::<f64>() / members.len() as f64;
            let mut p = zeros(n);
            for &k in &members {
                let v = e.eigenvector(k);
                p += outer(&v);
            }
            (mean, p)
        })
        .collect())
}

/// Eigendecomposition of a PSD input, rejecting eigenvalues below `-PSD_FLOOR`.
pub fn eig_psd(m: &CMat) -> Result<HermitianEigensystem> {
    let e = eig_hermitian(m)?;
    let floor = -PSD_FLOOR * e.max_eigenvalue().abs().max(1.0);
    if e.min_eigenvalue() < floor {
        return Err(Error::NotPsd(e.min_eigenvalue()));
    }
    Ok(e)
}

/// Principal square root; eigenvalues below the support cutoff map to zero.
pub fn matrix_sqrt(m: &CMat) -> Result<CMat> {
    let e = eig_psd(m)?;
    let cut = e.support_cutoff();
    Ok(e.map(|l| if l > cut && l > 0.0 { l.sqrt() } else { 0.0 }))
}

/// `log2` on the support, zero on the kernel.
pub fn log2_on_support(m: &CMat) -> Result<CMat> {
    let e = eig_psd(m)?;
    let cut = e.support_cutoff();
    Ok(e.map(|l| if l > cut && l > 0.0 { l.log2() } else { 0.0 }))
}

/// Moore–Penrose inverse of a PSD matrix: inverts eigenvalues on the support only.
pub fn generalized_inverse(m: &CMat) -> Result<CMat> {
    let e = eig_psd(m)?;
    let cut = e.support_cutoff();
    Ok(e.map(|l| if l > cut && l > 0.0 { 1.0 / l } else { 0.0 }))
}

/// `M^{-1/2}` on the support, zero on the kernel.
pub fn inverse_sqrt_on_support(m: &CMat) -> Result<CMat> {
    let e = eig_psd(m)?;
    let cut = e.support_cutoff();
    Ok(e.map(|l| if l > cut && l > 0.0 { 1.0 / l.sqrt() } else { 0.0 }))
}

/// `e^{-iHt}` for Hermitian `H`.
pub fn unitary_propagator(h: &CMat, t: f64) -> Result<CMat> {
    let e = eig_hermitian(h)?;
    let n = e.dim();
    let mut scaled = e.eigenvectors.clone();
    for (k, &l) in e.eigenvalues.iter().enumerate() {
        let phase = C64::from_polar(1.0, -l * t);
        for i in 0..n {
            scaled[(i, k)] *= phase;
        }
    }
    Ok(scaled * e.eigenvectors.adjoint())
}

/// Kronecker product, first factor slowest.
pub fn tensor(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn tensor_all(factors: &[CMat]) -> CMat {
    factors
        .iter()
        .fold(CMat::identity(1, 1), |acc, f| acc.kronecker(f))
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Offsets into the full index space for every multi-index over `sites`.
fn site_offsets(dims: &[usize], sites: &[usize]) -> Vec<usize> {
    let st = strides(dims);
    let mut offsets = vec![0usize];
    for &s in sites {
        let mut next = Vec::with_capacity(offsets.len() * dims[s]);
        for &o in &offsets {
            for i in 0..dims[s] {
                next.push(o + i * st[s]);
            }
        }
        offsets = next;
    }
    offsets
}

pub fn check_dims(m: &CMat, dims: &[usize]) -> Result<()> {
    let n = check_square(m)?;
    if dims.is_empty() || dims.contains(&0) || dims.iter().product::<usize>() != n {
        return Err(Error::DimMismatch(format!(
            "dims {dims:?} do not factor a {n}x{n} matrix"
        )));
    }
    Ok(())
}

fn normalize_sites(keep: &[usize], n_sites: usize) -> Result<Vec<usize>> {
    let mut sites = keep.to_vec();
    sites.sort_unstable();
    sites.dedup();
    if sites.is_empty() || sites.len() != keep.len() || sites.iter().any(|&s| s >= n_sites) {
        return Err(Error::DimMismatch(format!(
            "invalid subsystem selection {keep:?} for {n_sites} subsystems"
        )));
    }
    Ok(sites)
}

/// Trace out every subsystem not in `keep`. Kept factors retain their order.
pub fn partial_trace(m: &CMat, dims: &[usize], keep: &[usize]) -> Result<CMat> {
    check_dims(m, dims)?;
    let kept = normalize_sites(keep, dims.len())?;
    let traced: Vec<usize> = (0..dims.len()).filter(|s| !kept.contains(s)).collect();
    let koff = site_offsets(dims, &kept);
    let toff = site_offsets(dims, &traced);
    let k = koff.len();
    Ok(CMat::from_fn(k, k, |r, c| {
        toff.iter()
            .map(|&t| m[(koff[r] + t, koff[c] + t)])
            .sum::<C64>()
    }))
}

/// Reorder tensor factors: factor `q` of the result is factor `order[q]` of `m`.
pub fn permute_subsystems(m: &CMat, dims: &[usize], order: &[usize]) -> Result<CMat> {
    check_dims(m, dims)?;
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..dims.len()).collect::<Vec<_>>() {
        return Err(Error::DimMismatch(format!(
            "{order:?} is not a permutation of {} subsystems",
            dims.len()
        )));
    }
    let map = site_offsets(dims, order);
    let n = map.len();
    Ok(CMat::from_fn(n, n, |r, c| m[(map[r], map[c])]))
}

/// `1 ⊗ … ⊗ op ⊗ … ⊗ 1` with `op` on subsystem `site`.
pub fn embed_local(op: &CMat, dims: &[usize], site: usize) -> Result<CMat> {
    if site >= dims.len() || op.nrows() != dims[site] || op.ncols() != dims[site] {
        return Err(Error::DimMismatch(format!(
            "{}x{} operator cannot act on site {site} of {dims:?}",
            op.nrows(),
            op.ncols()
        )));
    }
    let left: usize = dims[..site].iter().product();
    let right: usize = dims[site + 1..].iter().product();
    Ok(identity(left).kronecker(op).kronecker(&identity(right)))
}

pub fn commutator(a: &CMat, b: &CMat) -> Result<CMat> {
    check_same_dim(a, b)?;
    Ok(a * b - b * a)
}

/// `Tr(X^† Y)`
pub fn hs_inner(x: &CMat, y: &CMat) -> Result<C64> {
    check_same_dim(x, y)?;
    Ok(x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum())
}

pub fn trace(m: &CMat) -> C64 {
    m.trace()
}

pub fn frobenius(m: &CMat) -> f64 {
    m.norm()
}
