//! Commutator characterizations and the eigenbasis test for zero-discord states.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matfun::{self, CMat};
use crate::measurements::{self, Pvm, Site};
use crate::states::{self, DensityMatrix};

/// Threshold used by [`remark_eigenbasis_check`].
pub const REMARK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RemarkCheck {
    /// `max_{μ≠ν} |<b_μ|√ρ|b_ν>|`
    pub offdiag_max: f64,
    /// `max_μ |<b_μ|√ρ|b_μ> - √<b_μ|ρ|b_μ>|`
    pub diag_residual_max: f64,
    pub is_eigenbasis: bool,
}

/// Whether a rank-1 measurement diagonalises `ρ`, tested through `√ρ`.
pub fn remark_eigenbasis_check(rho: &DensityMatrix, pvm: &Pvm) -> Result<RemarkCheck> {
    if pvm.dim() != rho.dim() {
        return Err(Error::DimMismatch(format!(
            "measurement of dimension {} for a {}-dimensional state",
            pvm.dim(),
            rho.dim()
        )));
    }
    let vecs = pvm.basis_vectors()?;
    let sqrt = matfun::matrix_sqrt(rho.matrix())?;
    let (mut offdiag_max, mut diag_residual_max) = (0.0f64, 0.0f64);
    for (mu, bm) in vecs.iter().enumerate() {
        let s_bm = &sqrt * bm;
        for (nu, bn) in vecs.iter().enumerate() {
            let v = bn.dotc(&s_bm);
            if mu == nu {
                let p = bm.dotc(&(rho.matrix() * bm)).re.max(0.0);
                diag_residual_max = diag_residual_max.max((v - p.sqrt()).norm());
            } else {
                offdiag_max = offdiag_max.max(v.norm());
            }
        }
    }
    Ok(RemarkCheck {
        offdiag_max,
        diag_residual_max,
        is_eigenbasis: offdiag_max <= REMARK_TOL && diag_residual_max <= REMARK_TOL,
    })
}

fn local_on_a(rho: &DensityMatrix, op_a: &CMat) -> CMat {
    let (_, db) = rho.bipartite_dims().expect("checked bipartite");
    matfun::tensor(op_a, &matfun::identity(db))
}

/// `‖[ρ_AB, ρ_A ⊗ 1]‖_F`.
pub fn lazy_commutator_norm(rho: &DensityMatrix) -> Result<f64> {
    rho.bipartite_dims()?;
    let ra = states::reduce(rho, &[0])?;
    let c = matfun::commutator(rho.matrix(), &local_on_a(rho, ra.matrix()))?;
    Ok(matfun::frobenius(&c))
}

/// `‖[ρ_AB, ρ_A ⊗ ρ_B]‖_F`.
pub fn product_commutator_norm(rho: &DensityMatrix) -> Result<f64> {
    rho.bipartite_dims()?;
    let ra = states::reduce(rho, &[0])?;
    let rb = states::reduce(rho, &[1])?;
    let c = matfun::commutator(rho.matrix(), states::product(&ra, &rb).matrix())?;
    Ok(matfun::frobenius(&c))
}

/// Spectral projectors of `ρ` with eigenvalues clustered at [`matfun::CLUSTER_TOL`].
pub fn spectral_pvm(rho: &DensityMatrix) -> Result<Pvm> {
    let projectors = matfun::spectral_projectors(&rho.eig(), matfun::CLUSTER_TOL)?
        .into_iter()
        .map(|(_, p)| p)
        .collect();
    measurements::validate_pvm(projectors)
}

#[derive(Debug, Clone)]
pub struct SpectralReconstruction {
    pub reconstruction: DensityMatrix,
    /// `‖reconstruction - ρ‖_F`
    pub residual: f64,
    pub pvm_a: Pvm,
    pub pvm_b: Pvm,
}

/// Pinch `ρ_AB` with the spectral projectors of both marginals.
pub fn reconstruct_by_spectral_pvms(rho: &DensityMatrix) -> Result<SpectralReconstruction> {
    rho.bipartite_dims()?;
    let pvm_a = spectral_pvm(&states::reduce(rho, &[0])?)?;
    let pvm_b = spectral_pvm(&states::reduce(rho, &[1])?)?;
    let joint = measurements::local_pvm_product(&pvm_a, &pvm_b);
    let reconstruction = measurements::nonselective(rho, &joint, Site::Whole)?;
    let residual = matfun::frobenius(&(reconstruction.matrix() - rho.matrix()));
    Ok(SpectralReconstruction { reconstruction, residual, pvm_a, pvm_b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matfun::C64;
    use crate::states::{bell, diagonal_state, maximally_mixed, product, random_density, RngSeed};

    #[test]
    fn remark_examples() {
        let rho = random_density(&[3], 3, RngSeed(1)).unwrap();
        let check = remark_eigenbasis_check(&rho, &measurements::eigenbasis_pvm(&rho)).unwrap();
        assert!(check.is_eigenbasis);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = CMat::from_row_slice(2, 2, &[s, s, s, -s].map(|x| C64::new(x, 0.0)));
        let plus_minus = measurements::pvm_from_unitary(&h, &[1, 1]).unwrap();
        let skew = diagonal_state(&[0.9, 0.1], &[2]).unwrap();
        let check = remark_eigenbasis_check(&skew, &plus_minus).unwrap();
        assert!(!check.is_eigenbasis);
        // |<+|√ρ|->| = (√0.9 - √0.1)/2
        assert!((check.offdiag_max - (0.9f64.sqrt() - 0.1f64.sqrt()) / 2.0).abs() < 1e-12);
        assert!(check.offdiag_max > 0.1);

        let mixed = maximally_mixed(&[3]).unwrap();
        let any = measurements::random_pvm(3, &[1, 1, 1], RngSeed(2)).unwrap();
        assert!(remark_eigenbasis_check(&mixed, &any).unwrap().is_eigenbasis);

        let coarse = measurements::validate_pvm(vec![matfun::identity(2)]).unwrap();
        assert!(matches!(remark_eigenbasis_check(&skew, &coarse), Err(Error::NotPvm(_))));
    }

    #[test]
    fn commutator_examples() {
        let a = random_density(&[2], 2, RngSeed(3)).unwrap();
        let b = random_density(&[3], 3, RngSeed(4)).unwrap();
        let p = product(&a, &b);
        assert!(lazy_commutator_norm(&p).unwrap() < 1e-12);
        assert!(product_commutator_norm(&p).unwrap() < 1e-12);
        assert!(lazy_commutator_norm(&bell()).unwrap() < 1e-12);
        assert!(product_commutator_norm(&bell()).unwrap() < 1e-12);

        // maximally mixed A marginal: any Bell-diagonal state
        let bd = states::validate_density(
            bell().matrix() * C64::new(0.6, 0.0) + maximally_mixed(&[2, 2]).unwrap().matrix() * C64::new(0.4, 0.0),
            vec![2, 2],
        )
        .unwrap();
        assert!(lazy_commutator_norm(&bd).unwrap() < 1e-12);
        assert!(lazy_commutator_norm(&random_density(&[2], 1, RngSeed(0)).unwrap()).is_err());
    }

    #[test]
    fn reconstruction_examples() {
        let cc = diagonal_state(&[0.1, 0.2, 0.3, 0.15, 0.05, 0.2], &[2, 3]).unwrap();
        let r = reconstruct_by_spectral_pvms(&cc).unwrap();
        assert!(r.residual < 1e-12);

        let r = reconstruct_by_spectral_pvms(&bell()).unwrap();
        assert!(r.residual < 1e-12);
        assert_eq!(r.pvm_a.ranks(), &[2]);
        assert_eq!(r.pvm_b.ranks(), &[2]);

        for seed in 0..10u64 {
            let rho = random_density(&[2, 2], 4, RngSeed(seed)).unwrap();
            let r = reconstruct_by_spectral_pvms(&rho).unwrap();
            let c = product_commutator_norm(&rho).unwrap();
            assert!(r.residual > 1e-7 && c > 1e-7);
        }
    }

    /// Near `1/d` the commutator is second order in the perturbation while the
    /// pinching residual is first order, so one shared tolerance cannot
    /// separate the two there.
    #[test]
    fn degenerate_point_scales_differently() {
        let noise = random_density(&[2, 2], 4, RngSeed(21)).unwrap();
        let mixed = maximally_mixed(&[2, 2]).unwrap();
        let at = |eps: f64| {
            let m = mixed.matrix() * C64::new(1.0 - eps, 0.0) + noise.matrix() * C64::new(eps, 0.0);
            let rho = states::validate_density(m, vec![2, 2]).unwrap();
            (reconstruct_by_spectral_pvms(&rho).unwrap().residual, product_commutator_norm(&rho).unwrap())
        };
        let (r1, c1) = at(1e-3);
        let (r2, c2) = at(1e-4);
        assert!((r1 / r2 - 10.0).abs() < 0.5, "residual ratio {}", r1 / r2);
        assert!((c1 / c2 - 100.0).abs() < 5.0, "commutator ratio {}", c1 / c2);
        assert!(r1 > 1e-7 && c1 < 1e-7);
    }
}
