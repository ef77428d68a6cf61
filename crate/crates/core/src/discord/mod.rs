//! Relative-entropy discord.
//!
//! The infima over measurements are searched over rank-1 PVMs by
//! multi-start coordinate descent; reported values are therefore upper
//! bounds, tagged with the number of starts and a convergence flag.

mod construct;
mod objective;
mod optimizer;
mod structure;

use serde::Serialize;

use crate::entropy::{self, mutual_info, rel_entropy, subsystem_entropy};
use crate::error::{Error, Result};
use crate::measurements::{self, Pvm, Site};
use crate::states::{self, DensityMatrix};

pub use construct::{
    construct_zero_discord_npartite, construct_zero_discord_one_sided,
    construct_zero_discord_symmetric, JointProbTable, LocalBases,
};
pub use structure::{
    lazy_commutator_norm, product_commutator_norm, reconstruct_by_spectral_pvms,
    remark_eigenbasis_check, spectral_pvm, RemarkCheck, SpectralReconstruction, REMARK_TOL,
};

use objective::{OneSidedObjective, ProductObjective};
use optimizer::{multi_start, SearchParams};

/// Search controls. `max_iter` bounds the number of sweeps per start and
/// a start stops once a sweep improves the objective by less than `tol`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscordOptions {
    pub starts: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for DiscordOptions {
    fn default() -> Self {
        Self { starts: 32, seed: 42, max_iter: 200, tol: 1e-9 }
    }
}

impl DiscordOptions {
    fn params(&self) -> SearchParams {
        SearchParams { starts: self.starts, seed: self.seed, max_sweeps: self.max_iter, tol: self.tol }
    }
}

/// Which subsystem is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// The same objective written three ways.
///
/// One-sided: `I - I|Π`, `S(ρ‖ρ_A⊗ρ_B) - S(Π(ρ)‖ρ_A⊗Π(ρ_B))` and
/// `S(ρ‖Π(ρ)) - S(ρ_B‖Π(ρ_B))`.
/// Product measurements: total correlation lost under `Π`,
/// `S(ρ‖⊗ρ_k) - S(Π(ρ)‖Π(⊗ρ_k))` and `S(ρ‖Π(ρ)) - Σ_k S(ρ_k‖Π_k(ρ_k))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObjectiveForms {
    pub mutual_information: f64,
    pub relative_entropy: f64,
    pub measured_state: f64,
}

impl ObjectiveForms {
    /// Largest pairwise difference between the three forms.
    pub fn spread(&self) -> f64 {
        let v = [self.mutual_information, self.relative_entropy, self.measured_state];
        let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
        max - min
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscordResult {
    pub value: f64,
    pub objective_forms: ObjectiveForms,
    /// One measurement per measured subsystem, outcomes in canonical order.
    #[serde(serialize_with = "crate::io::serialize_pvms")]
    pub argmin: Vec<Pvm>,
    pub starts_used: usize,
    pub converged: bool,
}

/// The three one-sided forms for a rank-1 measurement on `B`.
pub fn discord_objective_one_sided(rho_ab: &DensityMatrix, pvm_b: &Pvm) -> Result<ObjectiveForms> {
    let (_, db) = rho_ab.bipartite_dims()?;
    if pvm_b.dim() != db {
        return Err(Error::DimMismatch(format!(
            "measurement of dimension {} on a {db}-dimensional B",
            pvm_b.dim()
        )));
    }
    if !pvm_b.is_rank_one() {
        return Err(Error::NotPvm("discord needs a rank-1 measurement".into()));
    }
    let rho_a = states::reduce(rho_ab, &[0])?;
    let rho_b = states::reduce(rho_ab, &[1])?;
    let measured = measurements::nonselective(rho_ab, pvm_b, Site::Subsystem(1))?;
    let measured_b = measurements::nonselective(&rho_b, pvm_b, Site::Whole)?;

    let classical = subsystem_entropy(rho_ab, &[0])? - entropy::meas_cond_entropy(rho_ab, pvm_b)?;
    let mutual_information = mutual_info(rho_ab)? - classical;
    let relative_entropy = rel_entropy(rho_ab, &states::product(&rho_a, &rho_b))?.to_f64()
        - rel_entropy(&measured, &states::product(&rho_a, &measured_b))?.to_f64();
    let measured_state =
        rel_entropy(rho_ab, &measured)?.to_f64() - rel_entropy(&rho_b, &measured_b)?.to_f64();
    Ok(ObjectiveForms { mutual_information, relative_entropy, measured_state })
}

/// The three forms for a product measurement `Π_1 ⊗ … ⊗ Π_N` (any ranks).
pub fn discord_objective_product(rho: &DensityMatrix, pvms: &[Pvm]) -> Result<ObjectiveForms> {
    let n = rho.n_subsystems();
    if pvms.len() != n {
        return Err(Error::DimMismatch(format!("{} measurements for {n} subsystems", pvms.len())));
    }
    for (k, (p, &d)) in pvms.iter().zip(rho.dims()).enumerate() {
        if p.dim() != d {
            return Err(Error::DimMismatch(format!(
                "measurement {k} has dimension {}, subsystem has {d}",
                p.dim()
            )));
        }
    }
    let marginals: Vec<DensityMatrix> =
        (0..n).map(|k| states::reduce(rho, &[k])).collect::<Result<_>>()?;
    let joint = measurements::local_pvm_product_all(pvms)?;
    let measured = measurements::nonselective(rho, &joint, Site::Whole)?;
    let uncorrelated = states::product_all(&marginals)?;
    let measured_uncorrelated = measurements::nonselective(&uncorrelated, &joint, Site::Whole)?;

    let mutual_information =
        objective::total_correlation(rho)? - objective::total_correlation(&measured)?;
    let relative_entropy = rel_entropy(rho, &uncorrelated)?.to_f64()
        - rel_entropy(&measured, &measured_uncorrelated)?.to_f64();
    let mut measured_state = rel_entropy(rho, &measured)?.to_f64();
    for (m, p) in marginals.iter().zip(pvms) {
        let pinched = measurements::nonselective(m, p, Site::Whole)?;
        measured_state -= rel_entropy(m, &pinched)?.to_f64();
    }
    Ok(ObjectiveForms { mutual_information, relative_entropy, measured_state })
}

fn rank_one(u: &crate::matfun::CMat) -> Result<Pvm> {
    Ok(measurements::pvm_from_unitary(u, &vec![1; u.nrows()])?.canonicalized())
}

/// `D_A` or `D_B`: infimum over rank-1 measurements on the chosen side.
pub fn discord_one_sided(rho_ab: &DensityMatrix, side: Side, opts: &DiscordOptions) -> Result<DiscordResult> {
    rho_ab.bipartite_dims()?;
    let target = match side {
        Side::B => rho_ab.clone(),
        Side::A => rho_ab.permute(&[1, 0])?,
    };
    let obj = OneSidedObjective::new(&target)?;
    let best = multi_start(&obj, opts.params());
    let pvm = rank_one(&best.bases[0])?;
    let objective_forms = discord_objective_one_sided(&target, &pvm)?;
    Ok(DiscordResult {
        value: best.value,
        objective_forms,
        argmin: vec![pvm],
        starts_used: opts.starts.max(1),
        converged: best.converged,
    })
}

/// Symmetric discord over `Π_A ⊗ Π_B`.
pub fn discord_symmetric(rho_ab: &DensityMatrix, opts: &DiscordOptions) -> Result<DiscordResult> {
    rho_ab.bipartite_dims()?;
    discord_npartite(rho_ab, opts)
}

/// Discord over product measurements on all subsystems.
pub fn discord_npartite(rho: &DensityMatrix, opts: &DiscordOptions) -> Result<DiscordResult> {
    if rho.n_subsystems() < 2 {
        return Err(Error::DimMismatch(format!(
            "discord needs at least two subsystems, got {}",
            rho.n_subsystems()
        )));
    }
    let obj = ProductObjective::new(rho)?;
    let best = multi_start(&obj, opts.params());
    let argmin: Vec<Pvm> = best.bases.iter().map(rank_one).collect::<Result<_>>()?;
    let objective_forms = discord_objective_product(rho, &argmin)?;
    Ok(DiscordResult {
        value: best.value,
        objective_forms,
        argmin,
        starts_used: opts.starts.max(1),
        converged: best.converged,
    })
}
