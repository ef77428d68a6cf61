//! Density matrices with subsystem structure.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::matfun::{self, CMat, C64};

/// Tolerance on `|Tr ρ - 1|` accepted by [`validate_density`].
pub const TRACE_TOL: f64 = 1e-10;
/// Frobenius tolerance for [`support_contained`].
pub const SUPPORT_TOL: f64 = 1e-9;

/// Seed for every random generator in the crate. Streams are ChaCha8, so a
/// seed reproduces bit-identical output across platforms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Independent stream number `index` under this seed.
    pub fn stream(self, index: u64) -> ChaCha8Rng {
        let mut rng = self.rng();
        rng.set_stream(index);
        rng
    }
}

/// Positive semi-definite, unit-trace Hermitian matrix over `dims[0] ⊗ dims[1] ⊗ …`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMat,
    dims: Vec<usize>,
}

impl DensityMatrix {
    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn n_subsystems(&self) -> usize {
        self.dims.len()
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn eig(&self) -> matfun::HermitianEigensystem {
        matfun::eig_hermitian(&self.mat).expect("density matrices are Hermitian")
    }

    /// Fails unless the state has exactly two subsystems.
    pub fn bipartite_dims(&self) -> Result<(usize, usize)> {
        match self.dims.as_slice() {
            [a, b] => Ok((*a, *b)),
            d => Err(Error::DimMismatch(format!("expected a bipartite state, got dims {d:?}"))),
        }
    }

    /// Same matrix with a different factorisation of the Hilbert space.
    pub fn with_dims(&self, dims: Vec<usize>) -> Result<Self> {
        matfun::check_dims(&self.mat, &dims)?;
        Ok(Self { mat: self.mat.clone(), dims })
    }

    /// Reorder subsystems: subsystem `q` of the result is `order[q]` of `self`.
    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        let mat = matfun::permute_subsystems(&self.mat, &self.dims, order)?;
        let dims = order.iter().map(|&k| self.dims[k]).collect();
        Ok(Self { mat, dims })
    }

    /// Wrap a matrix that is already known to be a state (e.g. a convex
    /// combination or channel image of states) after re-validating it.
    pub fn from_matrix(mat: CMat, dims: Vec<usize>) -> Result<Self> {
        validate_density(mat, dims)
    }
}

/// Validate a candidate state, returning the first violated invariant.
///
/// Eigenvalues in `[-PSD_FLOOR, 0)` are clamped to zero and a trace within
/// [`TRACE_TOL`] of one is renormalised. The matrix is only rebuilt when one of
/// these repairs actually changes something.
pub fn validate_density(mat: CMat, dims: Vec<usize>) -> Result<DensityMatrix> {
    matfun::check_dims(&mat, &dims)?;
    matfun::check_hermitian(&mat)?;
    let e = matfun::eig_hermitian(&mat)?;
    if e.min_eigenvalue() < -matfun::PSD_FLOOR {
        return Err(Error::NotPsd(e.min_eigenvalue()));
    }
    let tr = mat.trace().re;
    if (tr - 1.0).abs() > TRACE_TOL {
        return Err(Error::TraceNotOne(tr));
    }
    let mut mat = if e.min_eigenvalue() < 0.0 {
        e.map(|l| l.max(0.0))
    } else {
        mat
    };
    // hermitian part keeps diagonal imaginary noise out of entropies
    if matfun::hermiticity_defect(&mat) > 0.0 {
        mat = matfun::hermitian_part(&mat);
    }
    let tr = mat.trace().re;
    if tr != 1.0 {
        mat.unscale_mut(tr);
    }
    Ok(DensityMatrix { mat, dims })
}

/// Same checks as [`validate_density`] but the matrix is stored unchanged,
/// so a state read from a file keeps its exact entries.
pub fn check_density(mat: CMat, dims: Vec<usize>) -> Result<DensityMatrix> {
    matfun::check_dims(&mat, &dims)?;
    matfun::check_hermitian(&mat)?;
    let e = matfun::eig_hermitian(&mat)?;
    if e.min_eigenvalue() < -matfun::PSD_FLOOR {
        return Err(Error::NotPsd(e.min_eigenvalue()));
    }
    let tr = mat.trace().re;
    if (tr - 1.0).abs() > TRACE_TOL {
        return Err(Error::TraceNotOne(tr));
    }
    Ok(DensityMatrix { mat, dims })
}

pub fn reduce(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let mat = matfun::partial_trace(&rho.mat, &rho.dims, keep)?;
    let mut sites = keep.to_vec();
    sites.sort_unstable();
    let dims = sites.iter().map(|&s| rho.dims[s]).collect();
    validate_density(mat, dims)
}

/// Number of eigenvalues above the relative support cutoff.
pub fn support_dim(rho: &DensityMatrix) -> usize {
    rho.eig().support_rank()
}

/// `supp ρ ⊆ supp σ`, tested as `‖(1 - P_σ) ρ (1 - P_σ)‖_F ≤ SUPPORT_TOL`.
pub fn support_contained(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<bool> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimMismatch(format!("{} vs {}", rho.dim(), sigma.dim())));
    }
    let kernel = matfun::identity(sigma.dim()) - sigma.eig().support_projector();
    let leak = &kernel * &rho.mat * &kernel;
    Ok(leak.norm() <= SUPPORT_TOL)
}

fn ginibre(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    })
}

/// `G G^† / Tr(G G^†)` for a `dim × rank` complex Ginibre matrix `G`.
pub fn random_density(dims: &[usize], rank: usize, seed: RngSeed) -> Result<DensityMatrix> {
    let dim: usize = dims.iter().product();
    if dims.is_empty() || dim == 0 {
        return Err(Error::DimMismatch(format!("bad dims {dims:?}")));
    }
    if rank == 0 || rank > dim {
        return Err(Error::BadRank { rank, dim });
    }
    let g = ginibre(dim, rank, &mut seed.rng());
    let m = &g * g.adjoint();
    validate_density(m.unscale(m.trace().re), dims.to_vec())
}

pub fn random_pure(dims: &[usize], seed: RngSeed) -> Result<DensityMatrix> {
    random_density(dims, 1, seed)
}

/// Haar-random unitary: QR of a Ginibre matrix with the phases of `R`'s
/// diagonal absorbed into `Q`.
pub fn random_unitary(dim: usize, rng: &mut ChaCha8Rng) -> CMat {
    let g = ginibre(dim, dim, rng);
    let (q, r) = g.qr().unpack();
    let mut u = q;
    for k in 0..dim {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { matfun::ONE };
        for i in 0..dim {
            u[(i, k)] *= phase;
        }
    }
    u
}

/// `ρ_A ⊗ ρ_B` with concatenated subsystem dims.
pub fn product(a: &DensityMatrix, b: &DensityMatrix) -> DensityMatrix {
    let mut dims = a.dims.clone();
    dims.extend_from_slice(&b.dims);
    DensityMatrix { mat: matfun::tensor(&a.mat, &b.mat), dims }
}

pub fn product_all(parts: &[DensityMatrix]) -> Result<DensityMatrix> {
    let (first, rest) = parts
        .split_first()
        .ok_or_else(|| Error::BadParams("empty product".into()))?;
    Ok(rest.iter().fold(first.clone(), |acc, p| product(&acc, p)))
}

/// `1/d` on every subsystem.
pub fn maximally_mixed(dims: &[usize]) -> Result<DensityMatrix> {
    let d: usize = dims.iter().product();
    validate_density(matfun::identity(d).unscale(d as f64), dims.to_vec())
}

/// Pure state from a (not necessarily normalised) vector.
pub fn pure_state(amplitudes: &[C64], dims: &[usize]) -> Result<DensityMatrix> {
    let v = matfun::CVec::from_column_slice(amplitudes);
    let n = v.norm();
    if n == 0.0 {
        return Err(Error::BadParams("zero state vector".into()));
    }
    validate_density(matfun::outer(&v.unscale(n)), dims.to_vec())
}

/// `|Φ+> = (|00> + |11>)/√2`
pub fn bell() -> DensityMatrix {
    ghz(2).expect("valid")
}

/// `(|0…0> + |1…1>)/√2` on `n` qubits.
pub fn ghz(n: usize) -> Result<DensityMatrix> {
    if n < 2 {
        return Err(Error::BadParams(format!("GHZ needs at least 2 qubits, got {n}")));
    }
    let d = 1usize << n;
    let mut amp = vec![matfun::ZERO; d];
    amp[0] = matfun::ONE;
    amp[d - 1] = matfun::ONE;
    pure_state(&amp, &vec![2; n])
}

/// `Σ_k p_k |k><k|` on a single system; used for classical flags and tests.
pub fn diagonal_state(p: &[f64], dims: &[usize]) -> Result<DensityMatrix> {
    validate_density(matfun::diag(p), dims.to_vec())
}
