//! Von Neumann measurements (projection-valued measures).

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matfun::{self, CMat, CVec};
use crate::states::{self, DensityMatrix, RngSeed};

/// Tolerance for the projector identities checked by [`validate_pvm`].
pub const PVM_TOL: f64 = 1e-9;

/// Where a measurement acts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Site {
    /// The whole Hilbert space.
    Whole,
    /// One tensor factor; identity elsewhere.
    Subsystem(usize),
}

/// Complete family of mutually orthogonal projectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Pvm {
    projectors: Vec<CMat>,
    dim: usize,
    ranks: Vec<usize>,
}

impl Pvm {
    pub fn projectors(&self) -> &[CMat] {
        &self.projectors
    }

    pub fn projector(&self, mu: usize) -> &CMat {
        &self.projectors[mu]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn is_rank_one(&self) -> bool {
        self.ranks.iter().all(|&r| r == 1)
    }

    /// Unit vectors `|b_μ>` with `Π_μ = |b_μ><b_μ|`, for rank-1 measurements.
    /// Each vector is read off the projector column with the largest diagonal
    /// entry, which fixes the phase deterministically.
    pub fn basis_vectors(&self) -> Result<Vec<CVec>> {
        if !self.is_rank_one() {
            return Err(Error::NotPvm("basis vectors need a rank-1 measurement".into()));
        }
        Ok(self
            .projectors
            .iter()
            .map(|p| {
                let k = (0..self.dim)
                    .max_by(|&a, &b| p[(a, a)].re.total_cmp(&p[(b, b)].re))
                    .unwrap_or(0);
                let col: CVec = p.column(k).into_owned();
                let n = col.norm();
                col.unscale(n)
            })
            .collect())
    }

    /// Projectors lifted to `1 ⊗ Π_μ ⊗ 1` on a system with subsystem `dims`.
    pub fn embedded(&self, dims: &[usize], site: Site) -> Result<Vec<CMat>> {
        match site {
            Site::Whole => {
                let total: usize = dims.iter().product();
                if total != self.dim {
                    return Err(Error::DimMismatch(format!(
                        "measurement of dimension {} on a {total}-dimensional system",
                        self.dim
                    )));
                }
                Ok(self.projectors.clone())
            }
            Site::Subsystem(s) => self
                .projectors
                .iter()
                .map(|p| matfun::embed_local(p, dims, s))
                .collect(),
        }
    }

    /// Reorder outcomes: each projector is keyed by the column of its first
    /// non-negligible entry (row-major scan), ties broken by the larger
    /// magnitude of that entry, then by original position.
    pub fn canonicalized(&self) -> Pvm {
        let key = |p: &CMat| -> (usize, f64) {
            for i in 0..p.nrows() {
                for j in 0..p.ncols() {
                    let m = p[(i, j)].norm();
                    if m > 1e-12 {
                        return (j, -m);
                    }
                }
            }
            (usize::MAX, 0.0)
        };
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| {
            let (ka, kb) = (key(&self.projectors[a]), key(&self.projectors[b]));
            ka.0.cmp(&kb.0).then(ka.1.total_cmp(&kb.1)).then(a.cmp(&b))
        });
        Pvm {
            projectors: order.iter().map(|&k| self.projectors[k].clone()).collect(),
            dim: self.dim,
            ranks: order.iter().map(|&k| self.ranks[k]).collect(),
        }
    }
}

/// Check the PVM identities at [`PVM_TOL`] and report the first violation.
pub fn validate_pvm(projectors: Vec<CMat>) -> Result<Pvm> {
    let first = projectors
        .first()
        .ok_or_else(|| Error::NotPvm("empty projector list".into()))?;
    let dim = first.nrows();
    let mut ranks = Vec::with_capacity(projectors.len());
    for (mu, p) in projectors.iter().enumerate() {
        if p.shape() != (dim, dim) {
            return Err(Error::NotPvm(format!("projector {mu} has shape {:?}", p.shape())));
        }
        matfun::check_square(p)?;
        if matfun::hermiticity_defect(p) > PVM_TOL {
            return Err(Error::NotPvm(format!("projector {mu} is not Hermitian")));
        }
        if (p * p - p).norm() > PVM_TOL {
            return Err(Error::NotPvm(format!("projector {mu} is not idempotent")));
        }
        let rank = p.trace().re.round();
        if rank < 1.0 {
            return Err(Error::NotPvm(format!("projector {mu} is zero")));
        }
        ranks.push(rank as usize);
    }
    for mu in 0..projectors.len() {
        for nu in mu + 1..projectors.len() {
            if (&projectors[mu] * &projectors[nu]).norm() > PVM_TOL {
                return Err(Error::NotPvm(format!("projectors {mu} and {nu} overlap")));
            }
        }
    }
    let sum = projectors.iter().fold(matfun::zeros(dim), |acc, p| acc + p);
    if (sum - matfun::identity(dim)).norm() > PVM_TOL {
        return Err(Error::NotPvm("projectors do not sum to the identity".into()));
    }
    Ok(Pvm { projectors, dim, ranks })
}

/// `{|k><k|}` in dimension `dim`.
pub fn computational_pvm(dim: usize) -> Pvm {
    pvm_from_unitary(&matfun::identity(dim), &vec![1; dim]).expect("identity is unitary")
}

/// Group consecutive columns of `u` into projectors of the given ranks.
pub fn pvm_from_unitary(u: &CMat, rank_pattern: &[usize]) -> Result<Pvm> {
    let dim = matfun::check_square(u)?;
    if rank_pattern.is_empty()
        || rank_pattern.contains(&0)
        || rank_pattern.iter().sum::<usize>() != dim
    {
        return Err(Error::BadPattern(format!(
            "{rank_pattern:?} does not partition dimension {dim}"
        )));
    }
    let defect = matfun::unitarity_defect(u);
    if defect > PVM_TOL {
        return Err(Error::NotUnitary(defect));
    }
    let mut projectors = Vec::with_capacity(rank_pattern.len());
    let mut start = 0;
    for &r in rank_pattern {
        let cols = u.columns(start, r);
        projectors.push(cols * cols.adjoint());
        start += r;
    }
    Ok(Pvm { projectors, dim, ranks: rank_pattern.to_vec() })
}

/// Haar-random measurement with the given rank pattern.
pub fn random_pvm(dim: usize, rank_pattern: &[usize], seed: RngSeed) -> Result<Pvm> {
    random_pvm_from(dim, rank_pattern, &mut seed.rng())
}

pub fn random_pvm_from(dim: usize, rank_pattern: &[usize], rng: &mut ChaCha8Rng) -> Result<Pvm> {
    if rank_pattern.iter().sum::<usize>() != dim {
        return Err(Error::BadPattern(format!(
            "{rank_pattern:?} does not partition dimension {dim}"
        )));
    }
    pvm_from_unitary(&states::random_unitary(dim, rng), rank_pattern)
}

/// `Tr[(1 ⊗ Π_μ) ρ]` for every outcome.
pub fn outcome_probs(rho: &DensityMatrix, pvm: &Pvm, site: Site) -> Result<Vec<f64>> {
    let lifted = pvm.embedded(rho.dims(), site)?;
    Ok(lifted
        .iter()
        .map(|p| (p * rho.matrix()).trace().re)
        .collect())
}

/// Post-measurement state for outcome `mu` and its probability.
pub fn conditional_state(
    rho: &DensityMatrix,
    pvm: &Pvm,
    site: Site,
    mu: usize,
) -> Result<(DensityMatrix, f64)> {
    if mu >= pvm.len() {
        return Err(Error::CountMismatch { expected: pvm.len(), got: mu + 1 });
    }
    let lifted = pvm.embedded(rho.dims(), site)?;
    let p = &lifted[mu];
    let unnorm = p * rho.matrix() * p;
    let prob = unnorm.trace().re;
    if prob <= crate::entropy::PROB_FLOOR {
        return Err(Error::ZeroProbabilityOutcome { outcome: mu, probability: prob });
    }
    let state = states::validate_density(unnorm.unscale(prob), rho.dims().to_vec())?;
    Ok((state, prob))
}

/// Nonselective measurement `Σ_μ (1 ⊗ Π_μ) ρ (1 ⊗ Π_μ)`.
pub fn nonselective(rho: &DensityMatrix, pvm: &Pvm, site: Site) -> Result<DensityMatrix> {
    let lifted = pvm.embedded(rho.dims(), site)?;
    let out = lifted
        .iter()
        .fold(matfun::zeros(rho.dim()), |acc, p| acc + p * rho.matrix() * p);
    states::validate_density(out, rho.dims().to_vec())
}

/// `{Π_{A,μ} ⊗ Π_{B,ν}}` with `ν` fastest.
pub fn local_pvm_product(a: &Pvm, b: &Pvm) -> Pvm {
    let mut projectors = Vec::with_capacity(a.len() * b.len());
    let mut ranks = Vec::with_capacity(a.len() * b.len());
    for (pa, ra) in a.projectors.iter().zip(&a.ranks) {
        for (pb, rb) in b.projectors.iter().zip(&b.ranks) {
            projectors.push(matfun::tensor(pa, pb));
            ranks.push(ra * rb);
        }
    }
    Pvm { projectors, dim: a.dim * b.dim, ranks }
}

/// Product measurement over several subsystems, last factor fastest.
pub fn local_pvm_product_all(parts: &[Pvm]) -> Result<Pvm> {
    let (first, rest) = parts
        .split_first()
        .ok_or_else(|| Error::NotPvm("empty product".into()))?;
    Ok(rest.iter().fold(first.clone(), |acc, p| local_pvm_product(&acc, p)))
}

/// Rank-1 eigenbasis measurement of `rho`, ordered by descending eigenvalue.
pub fn eigenbasis_pvm(rho: &DensityMatrix) -> Pvm {
    let e = rho.eig();
    pvm_from_unitary(&e.eigenvectors, &vec![1; e.dim()]).expect("eigenvectors are unitary")
}
