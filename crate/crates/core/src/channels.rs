//! Completely positive maps in Kraus form and the Petz recovery map.

use serde::Serialize;

use crate::entropy::{self, ExtReal};
use crate::error::{Error, Result};
use crate::matfun::{self, CMat, C64};
use crate::measurements::{Pvm, Site};
use crate::states::{self, DensityMatrix, RngSeed};

/// Tolerance on `Σ M^†M = 1` (and `Σ MM^† = 1` for unitality).
pub const KRAUS_TOL: f64 = 1e-9;
/// Gap below which monotonicity counts as saturated in [`petz_equality_check`].
pub const GAP_TOL: f64 = 1e-7;
/// Frobenius recovery error below which Petz recovery counts as exact.
pub const RECOVERY_TOL: f64 = 1e-6;

/// `X ↦ Σ_μ M_μ X M_μ^†` with `M_μ: C^dim_in → C^dim_out`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    kraus: Vec<CMat>,
    dim_in: usize,
    dim_out: usize,
    output_dims: Vec<usize>,
}

impl KrausChannel {
    /// A trace-preserving channel. Fails with `NotTracePreserving` otherwise.
    pub fn new(kraus: Vec<CMat>) -> Result<Self> {
        let ch = Self::cp_only(kraus)?;
        let defect = ch.trace_preservation_defect();
        if defect > KRAUS_TOL {
            return Err(Error::NotTracePreserving(defect));
        }
        Ok(ch)
    }

    /// A completely positive map with no trace condition.
    pub fn cp_only(kraus: Vec<CMat>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::BadParams("a channel needs at least one Kraus operator".into()))?;
        let (dim_out, dim_in) = first.shape();
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::DimMismatch("empty Kraus operator".into()));
        }
        if let Some(bad) = kraus.iter().find(|k| k.shape() != (dim_out, dim_in)) {
            return Err(Error::DimMismatch(format!(
                "Kraus operators of shapes {:?} and {:?}",
                first.shape(),
                bad.shape()
            )));
        }
        if kraus.iter().flat_map(|k| k.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { kraus, dim_in, dim_out, output_dims: vec![dim_out] })
    }

    /// Subsystem structure reported for outputs whose dimension differs from the input.
    pub fn with_output_dims(mut self, dims: Vec<usize>) -> Result<Self> {
        if dims.iter().product::<usize>() != self.dim_out {
            return Err(Error::DimMismatch(format!(
                "output dims {dims:?} for output dimension {}",
                self.dim_out
            )));
        }
        self.output_dims = dims;
        Ok(self)
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(vec![matfun::identity(dim)]).expect("identity is a channel")
    }

    pub fn unitary(u: CMat) -> Result<Self> {
        Self::new(vec![u])
    }

    /// Qubit depolarizing channel `ρ ↦ (1-p) ρ + p 1/2`.
    pub fn depolarizing(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::BadParams(format!("depolarizing parameter {p} outside [0,1]")));
        }
        let w = [1.0 - 0.75 * p, p / 4.0, p / 4.0, p / 4.0];
        Self::new((0..4).map(|k| matfun::pauli(k).scale(w[k].sqrt())).collect())
    }

    /// Qubit amplitude damping with decay probability `gamma`.
    pub fn amplitude_damping(gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::BadParams(format!("damping {gamma} outside [0,1]")));
        }
        let c = |x: f64| C64::new(x, 0.0);
        let k0 = CMat::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c((1.0 - gamma).sqrt())]);
        let k1 = CMat::from_row_slice(2, 2, &[c(0.0), c(gamma.sqrt()), c(0.0), c(0.0)]);
        Self::new(vec![k0, k1])
    }

    /// Partial trace onto `keep` as a channel: Kraus operators `1_keep ⊗ <k|_traced`.
    pub fn partial_trace(dims: &[usize], keep: &[usize]) -> Result<Self> {
        let total: usize = dims.iter().product();
        let n = dims.len();
        let mut kept: Vec<usize> = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        if kept.is_empty() || kept.len() != keep.len() || kept.iter().any(|&s| s >= n) {
            return Err(Error::DimMismatch(format!("cannot keep {keep:?} of {dims:?}")));
        }
        let traced: Vec<usize> = (0..n).filter(|s| !kept.contains(s)).collect();
        let out_dims: Vec<usize> = kept.iter().map(|&s| dims[s]).collect();
        let dim_out: usize = out_dims.iter().product();
        let n_traced: usize = traced.iter().map(|&s| dims[s]).product();
        // decompose a full index into (kept multi-index, traced multi-index)
        let split = |mut idx: usize| -> (usize, usize) {
            let mut digits = vec![0; n];
            for s in (0..n).rev() {
                digits[s] = idx % dims[s];
                idx /= dims[s];
            }
            let fold = |sites: &[usize]| sites.iter().fold(0, |acc, &s| acc * dims[s] + digits[s]);
            (fold(&kept), fold(&traced))
        };
        let mut kraus = vec![CMat::zeros(dim_out, total); n_traced];
        for col in 0..total {
            let (k, t) = split(col);
            kraus[t][(k, col)] = matfun::ONE;
        }
        Self::new(kraus)?.with_output_dims(out_dims)
    }

    /// Random channel from a Haar-like isometry `C^dim_in → C^dim_out ⊗ C^n_kraus`.
    pub fn random(dim_in: usize, dim_out: usize, n_kraus: usize, seed: RngSeed) -> Result<Self> {
        if dim_out * n_kraus < dim_in {
            return Err(Error::BadParams(format!(
                "{n_kraus} Kraus operators of size {dim_out}x{dim_in} cannot be trace preserving"
            )));
        }
        let big = dim_out * n_kraus;
        let u = states::random_unitary(big, &mut seed.rng());
        let v = u.columns(0, dim_in);
        let kraus = (0..n_kraus)
            .map(|k| v.rows(k * dim_out, dim_out).into_owned())
            .collect();
        Self::new(kraus)
    }

    pub fn trace_preservation_defect(&self) -> f64 {
        let sum = self
            .kraus
            .iter()
            .fold(matfun::zeros(self.dim_in), |acc, m| acc + m.adjoint() * m);
        (sum - matfun::identity(self.dim_in)).norm()
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preservation_defect() <= KRAUS_TOL
    }

    pub fn is_unital(&self) -> bool {
        if self.dim_in != self.dim_out {
            return false;
        }
        let sum = self
            .kraus
            .iter()
            .fold(matfun::zeros(self.dim_out), |acc, m| acc + m * m.adjoint());
        (sum - matfun::identity(self.dim_out)).norm() <= KRAUS_TOL
    }

    pub fn apply(&self, x: &CMat) -> Result<CMat> {
        if x.shape() != (self.dim_in, self.dim_in) {
            return Err(Error::DimMismatch(format!(
                "channel input {}, operator {:?}",
                self.dim_in,
                x.shape()
            )));
        }
        Ok(self
            .kraus
            .iter()
            .fold(matfun::zeros(self.dim_out), |acc, m| acc + m * x * m.adjoint()))
    }

    /// Heisenberg-picture map `Y ↦ Σ M^† Y M`.
    pub fn adjoint_apply(&self, y: &CMat) -> Result<CMat> {
        if y.shape() != (self.dim_out, self.dim_out) {
            return Err(Error::DimMismatch(format!(
                "channel output {}, operator {:?}",
                self.dim_out,
                y.shape()
            )));
        }
        Ok(self
            .kraus
            .iter()
            .fold(matfun::zeros(self.dim_in), |acc, m| acc + m.adjoint() * y * m))
    }

    /// Image of a state. Subsystem dims carry over when the dimension is unchanged.
    pub fn apply_state(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let out = self.apply(rho.matrix())?;
        let dims = if self.dim_out == self.dim_in && self.output_dims.len() == 1 {
            rho.dims().to_vec()
        } else {
            self.output_dims.clone()
        };
        states::validate_density(out, dims)
    }
}

/// Nonselective measurement as a channel, Kraus set `{1 ⊗ Π_μ}`.
pub fn pvm_channel(pvm: &Pvm, dims: &[usize], site: Site) -> Result<KrausChannel> {
    KrausChannel::new(pvm.embedded(dims, site)?)
}

/// `Φ^†_σ = Ad_{σ^{1/2}} ∘ Φ^† ∘ Ad_{Φ(σ)^{-1/2}}`, Kraus operators
/// `σ^{1/2} M_μ^† Φ(σ)^{-1/2}` with the inverse square root taken on the
/// support of `Φ(σ)`. The result is trace preserving only on that support,
/// so it is returned as a CP map.
pub fn petz_recovery(channel: &KrausChannel, sigma: &DensityMatrix) -> Result<KrausChannel> {
    if !channel.is_trace_preserving() {
        return Err(Error::NotTracePreserving(channel.trace_preservation_defect()));
    }
    if sigma.dim() != channel.dim_in() {
        return Err(Error::DimMismatch(format!(
            "reference state dimension {} for channel input {}",
            sigma.dim(),
            channel.dim_in()
        )));
    }
    let sqrt_sigma = matfun::matrix_sqrt(sigma.matrix())?;
    let image = channel.apply(sigma.matrix())?;
    let inv_sqrt = matfun::inverse_sqrt_on_support(&image)?;
    let kraus = channel
        .kraus()
        .iter()
        .map(|m| &sqrt_sigma * m.adjoint() * &inv_sqrt)
        .collect();
    KrausChannel::cp_only(kraus)?.with_output_dims(sigma.dims().to_vec())
}

/// `S(ρ‖σ) - S(Φρ‖Φσ)`.
pub fn monotonicity_gap(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    channel: &KrausChannel,
) -> Result<ExtReal> {
    if !states::support_contained(rho, sigma)? {
        return Err(Error::SupportViolation);
    }
    let before = entropy::rel_entropy(rho, sigma)?;
    let after = entropy::rel_entropy(&channel.apply_state(rho)?, &channel.apply_state(sigma)?)?;
    match (before, after) {
        (ExtReal::Infinite, _) => Ok(ExtReal::Infinite),
        (ExtReal::Finite(a), ExtReal::Finite(b)) => Ok(ExtReal::Finite(a - b)),
        // channels preserve support inclusion, so this is a tolerance artefact
        (ExtReal::Finite(_), ExtReal::Infinite) => Err(Error::SupportViolation),
    }
}

/// Both sides of the saturation criterion for relative-entropy monotonicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PetzCheck {
    pub gap: f64,
    pub recovery_error: f64,
    /// `gap ≤ GAP_TOL` exactly when `recovery_error ≤ RECOVERY_TOL`.
    pub consistent: bool,
}

pub fn petz_equality_check(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    channel: &KrausChannel,
) -> Result<PetzCheck> {
    let gap = monotonicity_gap(rho, sigma, channel)?.to_f64();
    let recovery = petz_recovery(channel, sigma)?;
    let recovered = recovery.apply(&channel.apply(rho.matrix())?)?;
    let recovery_error = (recovered - rho.matrix()).norm();
    Ok(PetzCheck {
        gap,
        recovery_error,
        consistent: (gap <= GAP_TOL) == (recovery_error <= RECOVERY_TOL),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matfun::{diag, identity, pauli};
    use crate::measurements::{computational_pvm, random_pvm};
    use crate::states::{maximally_mixed, product, random_density, random_unitary};

    fn random_operator(n: usize, seed: u64) -> CMat {
        let rho = random_density(&[n], n, RngSeed(seed)).unwrap();
        let u = random_unitary(n, &mut RngSeed(seed + 1).rng());
        rho.matrix() * u
    }

    #[test]
    fn apply_examples() {
        let x = random_operator(3, 1);
        assert_eq!(KrausChannel::identity(3).apply(&x).unwrap(), x);

        let u = random_unitary(3, &mut RngSeed(2).rng());
        let ch = KrausChannel::unitary(u.clone()).unwrap();
        assert!((ch.apply(&x).unwrap() - &u * &x * u.adjoint()).norm() < 1e-12);

        // {I,X,Y,Z}/2 sends every state to I/2
        let full = KrausChannel::new((0..4).map(|k| pauli(k).scale(0.5)).collect()).unwrap();
        let rho = random_density(&[2], 2, RngSeed(3)).unwrap();
        let out = full.apply(rho.matrix()).unwrap();
        assert!((out - identity(2).scale(0.5)).norm() < 1e-14);
        assert!(full.apply(&identity(3)).is_err());
    }

    #[test]
    fn trace_preserved_by_tp_maps() {
        for s in 0..20u64 {
            let ch = KrausChannel::random(3, 2, 4, RngSeed(s)).unwrap();
            let x = random_operator(3, s + 50);
            assert!((ch.apply(&x).unwrap().trace() - x.trace()).norm() <= 1e-10);
        }
    }

    #[test]
    fn adjoint_examples() {
        let y = random_operator(2, 4);
        assert_eq!(KrausChannel::identity(2).adjoint_apply(&y).unwrap(), y);
        let u = random_unitary(2, &mut RngSeed(5).rng());
        let ch = KrausChannel::unitary(u.clone()).unwrap();
        assert!((ch.adjoint_apply(&y).unwrap() - u.adjoint() * &y * &u).norm() < 1e-12);
        let tp = KrausChannel::random(4, 3, 2, RngSeed(6)).unwrap();
        assert!((tp.adjoint_apply(&identity(3)).unwrap() - identity(4)).norm() < 1e-12);
    }

    #[test]
    fn adjoint_duality() {
        for s in 0..100u64 {
            let (din, dout) = (2 + s as usize % 3, 1 + s as usize % 4);
            let n_kraus = din.div_ceil(dout) + s as usize % 3;
            let ch = KrausChannel::random(din, dout, n_kraus, RngSeed(s)).unwrap();
            let a = random_operator(din, 3 * s + 1000);
            let b = random_operator(dout, 3 * s + 2000);
            let lhs = matfun::hs_inner(&ch.apply(&a).unwrap(), &b).unwrap();
            let rhs = matfun::hs_inner(&a, &ch.adjoint_apply(&b).unwrap()).unwrap();
            assert!((lhs - rhs).norm() <= 1e-9);
        }
    }

    #[test]
    fn tp_and_unital_flags() {
        let u = KrausChannel::unitary(random_unitary(2, &mut RngSeed(7).rng())).unwrap();
        assert!(u.is_trace_preserving() && u.is_unital());
        let ad = KrausChannel::amplitude_damping(0.5).unwrap();
        assert!(ad.is_trace_preserving() && !ad.is_unital());
        let cp = KrausChannel::cp_only(vec![identity(2).scale(2.0)]).unwrap();
        assert!(!cp.is_trace_preserving() && !cp.is_unital());
        assert!(matches!(
            KrausChannel::new(vec![identity(2).scale(2.0)]),
            Err(Error::NotTracePreserving(_))
        ));
    }

    #[test]
    fn pvm_channel_examples() {
        let deph = pvm_channel(&computational_pvm(2), &[2], Site::Whole).unwrap();
        let rho = random_density(&[2], 2, RngSeed(8)).unwrap();
        let out = deph.apply(rho.matrix()).unwrap();
        assert_eq!(out[(0, 1)], matfun::ZERO);
        assert_eq!(out[(1, 0)], matfun::ZERO);
        assert!(deph.is_trace_preserving() && deph.is_unital());

        let trivial = crate::measurements::validate_pvm(vec![identity(3)]).unwrap();
        let id = pvm_channel(&trivial, &[3], Site::Whole).unwrap();
        let x = random_operator(3, 9);
        assert_eq!(id.apply(&x).unwrap(), x);

        let pvm = random_pvm(3, &[1, 2], RngSeed(10)).unwrap();
        let ch = pvm_channel(&pvm, &[2, 3], Site::Subsystem(1)).unwrap();
        let y = random_operator(6, 11);
        let once = ch.apply(&y).unwrap();
        let twice = ch.apply(&once).unwrap();
        assert!((twice - once).norm() <= 1e-12);
    }

    #[test]
    fn partial_trace_channel_matches_partial_trace() {
        let rho = random_density(&[2, 3, 2], 5, RngSeed(12)).unwrap();
        let ch = KrausChannel::partial_trace(&[2, 3, 2], &[0, 2]).unwrap();
        let out = ch.apply_state(&rho).unwrap();
        let direct = states::reduce(&rho, &[0, 2]).unwrap();
        assert_eq!(out.dims(), &[2, 2]);
        assert!((out.matrix() - direct.matrix()).norm() < 1e-12);
    }

    #[test]
    fn petz_recovery_examples() {
        let sigma = random_density(&[3], 2, RngSeed(13)).unwrap();
        let id = KrausChannel::identity(3);
        let rec = petz_recovery(&id, &sigma).unwrap();
        // identity on supp σ: recovers any state supported there
        let p = sigma.eig().support_projector();
        let x = &p * random_operator(3, 14) * &p;
        assert!((rec.apply(&x).unwrap() - &x).norm() < 1e-9);

        let u = random_unitary(3, &mut RngSeed(15).rng());
        let full = random_density(&[3], 3, RngSeed(16)).unwrap();
        let ch = KrausChannel::unitary(u.clone()).unwrap();
        let rec = petz_recovery(&ch, &full).unwrap();
        let y = random_operator(3, 17);
        assert!((rec.apply(&y).unwrap() - u.adjoint() * &y * &u).norm() < 1e-9);

        // diagonal algebra: dephasing preserves diagonal states, recovery is exact
        let deph = pvm_channel(&computational_pvm(3), &[3], Site::Whole).unwrap();
        let sd = states::diagonal_state(&[0.5, 0.3, 0.2], &[3]).unwrap();
        let rd = states::diagonal_state(&[0.1, 0.6, 0.3], &[3]).unwrap();
        let rec = petz_recovery(&deph, &sd).unwrap();
        let back = rec.apply(&deph.apply(rd.matrix()).unwrap()).unwrap();
        assert!((back - rd.matrix()).norm() < 1e-9);
    }

    #[test]
    fn petz_recovers_reference_state() {
        for s in 0..30u64 {
            let sigma = random_density(&[3], 1 + s as usize % 3, RngSeed(s)).unwrap();
            let ch = KrausChannel::random(3, 2, 3, RngSeed(s + 500)).unwrap();
            let rec = petz_recovery(&ch, &sigma).unwrap();
            let back = rec.apply(&ch.apply(sigma.matrix()).unwrap()).unwrap();
            assert!((back - sigma.matrix()).norm() <= 1e-8, "seed {s}");
            // trace preserving on supp Φ(σ)
            let image = ch.apply(sigma.matrix()).unwrap();
            let supp = matfun::eig_hermitian(&image).unwrap().support_projector();
            let sum = rec.kraus().iter().fold(matfun::zeros(2), |acc, k| acc + k.adjoint() * k);
            assert!((sum - &supp).norm() <= 1e-8);
        }
    }

    #[test]
    fn monotonicity_examples() {
        let rho = random_density(&[2], 2, RngSeed(18)).unwrap();
        let sigma = random_density(&[2], 2, RngSeed(19)).unwrap();
        let g = monotonicity_gap(&rho, &sigma, &KrausChannel::identity(2)).unwrap();
        assert_eq!(g, ExtReal::Finite(0.0));
        let u = KrausChannel::unitary(random_unitary(2, &mut RngSeed(20).rng())).unwrap();
        assert!(monotonicity_gap(&rho, &sigma, &u).unwrap().to_f64().abs() < 1e-9);
        let dep = KrausChannel::depolarizing(0.5).unwrap();
        assert!(monotonicity_gap(&rho, &sigma, &dep).unwrap().to_f64() > 1e-3);

        let pure = states::diagonal_state(&[1.0, 0.0], &[2]).unwrap();
        assert!(matches!(
            monotonicity_gap(&maximally_mixed(&[2]).unwrap(), &pure, &dep),
            Err(Error::SupportViolation)
        ));
    }

    #[test]
    fn monotonicity_on_random_triples() {
        for s in 0..200u64 {
            let din = 2 + s as usize % 5;
            let dout = 1 + s as usize % 4;
            let n = din.div_ceil(dout) + 1;
            let rho = random_density(&[din], 1 + s as usize % din, RngSeed(s)).unwrap();
            let sigma = random_density(&[din], din, RngSeed(s + 10_000)).unwrap();
            let ch = KrausChannel::random(din, dout, n, RngSeed(s + 20_000)).unwrap();
            let g = monotonicity_gap(&rho, &sigma, &ch).unwrap().to_f64();
            assert!(g >= -1e-8, "seed {s}: {g}");
        }
    }

    #[test]
    fn equality_check_examples() {
        let rho = random_density(&[2], 2, RngSeed(21)).unwrap();
        let sigma = random_density(&[2], 2, RngSeed(22)).unwrap();
        let c = petz_equality_check(&rho, &sigma, &KrausChannel::identity(2)).unwrap();
        assert!(c.gap.abs() < 1e-12 && c.recovery_error < 1e-9 && c.consistent);

        // commuting classical case: local dephasing of diagonal product states
        let deph = pvm_channel(&computational_pvm(2), &[2], Site::Whole).unwrap();
        let rd = states::diagonal_state(&[0.7, 0.3], &[2]).unwrap();
        let sd = states::diagonal_state(&[0.4, 0.6], &[2]).unwrap();
        let c = petz_equality_check(&rd, &sd, &deph).unwrap();
        assert!(c.gap.abs() < 1e-12 && c.recovery_error < 1e-9 && c.consistent);

        // generic non-commuting qubit triple
        let c = petz_equality_check(&rho, &sigma, &deph).unwrap();
        assert!(c.gap > 1e-4 && c.recovery_error > 1e-4 && c.consistent, "{c:?}");
    }

    #[test]
    fn equality_for_sufficient_partial_trace() {
        for s in 0..20u64 {
            let tau = random_density(&[2], 2, RngSeed(s)).unwrap();
            let ra = random_density(&[3], 3, RngSeed(s + 100)).unwrap();
            let sa = random_density(&[3], 3, RngSeed(s + 200)).unwrap();
            let ch = KrausChannel::partial_trace(&[3, 2], &[0]).unwrap();
            let c = petz_equality_check(&product(&ra, &tau), &product(&sa, &tau), &ch).unwrap();
            assert!(c.gap.abs() <= 1e-9 && c.recovery_error <= 1e-6, "{c:?}");
        }
    }

    #[test]
    fn diag_sanity() {
        let d = diag(&[0.2, 0.8]);
        assert!(KrausChannel::identity(2).apply(&d).unwrap() == d);
    }
}
