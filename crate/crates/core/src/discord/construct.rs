//! Zero-discord states built from local measurements and a joint outcome table.

use serde::{Deserialize, Serialize};

use crate::entropy::PROB_FLOOR;
use crate::error::{Error, Result};
use crate::matfun::{self, CMat, C64};
use crate::measurements::{self, Pvm, Site};
use rand::Rng;

use crate::states::{self, DensityMatrix, RngSeed};

/// Marginal agreement required between a table and the supplied states.
pub const MARGINAL_TOL: f64 = 1e-9;

/// Joint outcome distribution over `N` measurements, row-major with the
/// last index fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointProbTable {
    shape: Vec<usize>,
    p: Vec<f64>,
}

impl JointProbTable {
    pub fn new(shape: Vec<usize>, p: Vec<f64>) -> Result<Self> {
        if shape.is_empty() || shape.contains(&0) || shape.iter().product::<usize>() != p.len() {
            return Err(Error::BadParams(format!(
                "table of {} entries does not have shape {shape:?}",
                p.len()
            )));
        }
        if let Some(bad) = p.iter().find(|x| !x.is_finite() || **x < -1e-12) {
            return Err(Error::BadParams(format!("invalid probability {bad}")));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > MARGINAL_TOL {
            return Err(Error::BadParams(format!("probabilities sum to {total}")));
        }
        Ok(Self { shape, p })
    }

    /// Two-party table `p[μ][ν]`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::BadParams("ragged probability table".into()));
        }
        Self::new(vec![rows.len(), cols], rows.concat())
    }

    /// Independent outcomes with the given marginals.
    pub fn product(marginals: &[Vec<f64>]) -> Result<Self> {
        let mut p = vec![1.0];
        for m in marginals {
            p = p.iter().flat_map(|&x| m.iter().map(move |&y| x * y)).collect();
        }
        Self::new(marginals.iter().map(Vec::len).collect(), p)
    }

    /// Seeded random table with prescribed marginals, obtained by iterative
    /// proportional fitting of a random positive table.
    pub fn random_with_marginals(marginals: &[Vec<f64>], seed: RngSeed) -> Result<Self> {
        let shape: Vec<usize> = marginals.iter().map(Vec::len).collect();
        let mut rng = seed.rng();
        let size: usize = shape.iter().product();
        let p: Vec<f64> = (0..size).map(|_| rng.random::<f64>().powi(3) + 1e-3).collect();
        let mut t = Self { shape, p };
        for _ in 0..10_000 {
            let mut worst = 0.0f64;
            for (k, target) in marginals.iter().enumerate() {
                let current = t.marginal(k);
                for (c, g) in current.iter().zip(target) {
                    worst = worst.max((c - g).abs());
                }
                for flat in 0..t.p.len() {
                    let mu = t.unflat(flat)[k];
                    t.p[flat] = if current[mu] > 0.0 { t.p[flat] * target[mu] / current[mu] } else { 0.0 };
                }
            }
            if worst < 1e-15 {
                break;
            }
        }
        Self::new(t.shape, t.p)
    }

    /// Outcome statistics of `Π_1 ⊗ … ⊗ Π_N` on `rho`.
    pub fn from_state(rho: &DensityMatrix, pvms: &[Pvm]) -> Result<Self> {
        let joint = measurements::local_pvm_product_all(pvms)?;
        let p = measurements::outcome_probs(rho, &joint, Site::Whole)?;
        Self::new(pvms.iter().map(Pvm::len).collect(), p.iter().map(|x| x.max(0.0)).collect())
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.p[self.flat(index)]
    }

    fn flat(&self, index: &[usize]) -> usize {
        index.iter().zip(&self.shape).fold(0, |acc, (&i, &d)| acc * d + i)
    }

    fn unflat(&self, mut flat: usize) -> Vec<usize> {
        let mut index = vec![0; self.shape.len()];
        for k in (0..self.shape.len()).rev() {
            index[k] = flat % self.shape[k];
            flat /= self.shape[k];
        }
        index
    }

    pub fn marginal(&self, k: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.shape[k]];
        for (flat, &v) in self.p.iter().enumerate() {
            out[self.unflat(flat)[k]] += v;
        }
        out
    }
}

/// Local measurements for the symmetric constructors.
#[derive(Debug, Clone, PartialEq)]
pub enum LocalBases {
    /// Eigenbasis of each marginal, ordered by descending eigenvalue. Inside
    /// a degenerate eigenspace the eigensolver's basis is used; any other
    /// orthonormal choice would do equally well.
    Eigenbasis,
    /// Caller-supplied measurements; no zero-discord guarantee.
    Free(Vec<Pvm>),
}

fn sandwich(sqrt: &CMat, p: &CMat) -> CMat {
    sqrt * p * sqrt
}

/// `Σ_μ p_μ/(Π_k p_{k,μ_k}) ⊗_k √ρ_k Π_{k,μ_k} √ρ_k`.
pub fn construct_zero_discord_npartite(
    marginals: &[DensityMatrix],
    bases: &LocalBases,
    p: &JointProbTable,
) -> Result<DensityMatrix> {
    let n = marginals.len();
    let pvms: Vec<Pvm> = match bases {
        LocalBases::Eigenbasis => marginals.iter().map(measurements::eigenbasis_pvm).collect(),
        LocalBases::Free(v) => v.clone(),
    };
    if pvms.len() != n || p.shape().len() != n {
        return Err(Error::DimMismatch(format!(
            "{n} marginals, {} measurements, table of rank {}",
            pvms.len(),
            p.shape().len()
        )));
    }
    let mut local_probs = Vec::with_capacity(n);
    let mut factors: Vec<Vec<CMat>> = Vec::with_capacity(n);
    for (k, (rho, pvm)) in marginals.iter().zip(&pvms).enumerate() {
        if pvm.dim() != rho.dim() || pvm.len() != p.shape()[k] {
            return Err(Error::DimMismatch(format!(
                "factor {k}: state dimension {}, measurement dimension {} with {} outcomes, table width {}",
                rho.dim(),
                pvm.dim(),
                pvm.len(),
                p.shape()[k]
            )));
        }
        let probs = measurements::outcome_probs(rho, pvm, Site::Whole)?;
        let table = p.marginal(k);
        for (mu, (x, y)) in probs.iter().zip(&table).enumerate() {
            if (x - y).abs() > MARGINAL_TOL {
                return Err(Error::MarginalMismatch(format!(
                    "factor {k} outcome {mu}: state gives {x}, table gives {y}"
                )));
            }
        }
        let sqrt = matfun::matrix_sqrt(rho.matrix())?;
        factors.push(pvm.projectors().iter().map(|q| sandwich(&sqrt, q)).collect());
        local_probs.push(probs);
    }

    let dim: usize = marginals.iter().map(DensityMatrix::dim).product();
    let mut out = matfun::zeros(dim);
    for (flat, &weight) in p.probabilities().iter().enumerate() {
        if weight <= 0.0 {
            continue;
        }
        let index = p.unflat(flat);
        let mut denom = 1.0;
        for (k, &mu) in index.iter().enumerate() {
            let pk = local_probs[k][mu];
            if pk <= PROB_FLOOR {
                return Err(Error::ZeroProbInconsistency { index, value: weight });
            }
            denom *= pk;
        }
        let term: Vec<CMat> = index.iter().enumerate().map(|(k, &mu)| factors[k][mu].clone()).collect();
        out += matfun::tensor_all(&term) * C64::new(weight / denom, 0.0);
    }
    let dims: Vec<usize> = marginals.iter().flat_map(|m| m.dims().iter().copied()).collect();
    states::validate_density(out, dims)
}

/// Two-party case of [`construct_zero_discord_npartite`].
pub fn construct_zero_discord_symmetric(
    rho_a: &DensityMatrix,
    rho_b: &DensityMatrix,
    bases: &LocalBases,
    p: &JointProbTable,
) -> Result<DensityMatrix> {
    construct_zero_discord_npartite(&[rho_a.clone(), rho_b.clone()], bases, p)
}

/// `Σ_μ ρ_{A,μ} ⊗ √ρ_B Π_{B,μ} √ρ_B`.
pub fn construct_zero_discord_one_sided(
    parts: &[DensityMatrix],
    rho_b: &DensityMatrix,
    pvm_b: &Pvm,
) -> Result<DensityMatrix> {
    if parts.len() != pvm_b.len() {
        return Err(Error::CountMismatch { expected: pvm_b.len(), got: parts.len() });
    }
    if !pvm_b.is_rank_one() {
        return Err(Error::NotPvm("one-sided construction needs a rank-1 measurement".into()));
    }
    if pvm_b.dim() != rho_b.dim() {
        return Err(Error::DimMismatch(format!(
            "measurement of dimension {} for a {}-dimensional B",
            pvm_b.dim(),
            rho_b.dim()
        )));
    }
    let da = parts.first().map_or(0, DensityMatrix::dim);
    if let Some(bad) = parts.iter().find(|r| r.dim() != da) {
        return Err(Error::DimMismatch(format!("A states of dimensions {da} and {}", bad.dim())));
    }
    let sqrt = matfun::matrix_sqrt(rho_b.matrix())?;
    let mut out = matfun::zeros(da * rho_b.dim());
    for (ra, q) in parts.iter().zip(pvm_b.projectors()) {
        out += matfun::tensor(ra.matrix(), &sandwich(&sqrt, q));
    }
    states::validate_density(out, vec![da, rho_b.dim()])
}
