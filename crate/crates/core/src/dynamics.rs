//! Closed bipartite evolution and the commutator formulas for local entropy
//! and mutual-information rates.
//!
//! With `dρ/dt = -i[H, ρ]` every rate has the form `i·Tr{H [ρ, L]}` for a
//! Hermitian `L`; only the interaction part of `H` contributes.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::entropy::{cmi, mutual_info, subsystem_entropy, vn_entropy};
use crate::error::{Error, Result};
use crate::io::MatrixJson;
use crate::matfun::{self, CMat, C64};
use crate::states::{self, DensityMatrix, RngSeed};

/// Tolerance on `Tr_A H_int` and `Tr_B H_int`.
pub const INTERACTION_TOL: f64 = 1e-9;
/// Largest imaginary part of a rate accepted as round-off.
pub const IMAG_TOL: f64 = 1e-9;
/// Default central-difference step.
pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    mat: CMat,
    dims: Vec<usize>,
}

impl Hamiltonian {
    pub fn new(mat: CMat, dims: Vec<usize>) -> Result<Self> {
        matfun::check_dims(&mat, &dims)?;
        matfun::check_hermitian(&mat)?;
        Ok(Hamiltonian { mat: matfun::hermitian_part(&mat), dims })
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn negated(&self) -> Self {
        Hamiltonian { mat: -&self.mat, dims: self.dims.clone() }
    }

    /// GUE-distributed Hamiltonian, `H = (G + G†)/2` with standard complex Gaussian `G`.
    pub fn random(dims: &[usize], seed: RngSeed) -> Result<Self> {
        let dim: usize = dims.iter().product();
        if dim == 0 {
            return Err(Error::BadParams("dimensions must be positive".into()));
        }
        let mut rng = seed.rng();
        let g = CMat::from_fn(dim, dim, |_, _| {
            C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
        });
        Hamiltonian::new((&g + g.adjoint()) * C64::new(0.5, 0.0), dims.to_vec())
    }

    pub fn to_json(&self) -> MatrixJson {
        MatrixJson::from_matrix(&self.mat, Some(self.dims.clone()))
    }

    pub fn from_json(j: &MatrixJson) -> Result<Self> {
        let mat = j.to_matrix()?;
        let dims = j.dims.clone().unwrap_or_else(|| vec![mat.nrows()]);
        Hamiltonian::new(mat, dims)
    }
}

/// Bipartite Hermitian operator with vanishing partial traces on both sides.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionHamiltonian {
    mat: CMat,
    da: usize,
    db: usize,
}

impl InteractionHamiltonian {
    pub fn new(mat: CMat, dims: Vec<usize>) -> Result<Self> {
        let h = Hamiltonian::new(mat, dims)?;
        let (da, db) = bipartite(h.dims())?;
        let defect = matfun::frobenius(&matfun::partial_trace(h.matrix(), h.dims(), &[0])?)
            .max(matfun::frobenius(&matfun::partial_trace(h.matrix(), h.dims(), &[1])?));
        if defect > INTERACTION_TOL {
            return Err(Error::NotInteraction(defect));
        }
        Ok(InteractionHamiltonian { mat: h.mat, da, db })
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn dims(&self) -> [usize; 2] {
        [self.da, self.db]
    }

    pub fn as_hamiltonian(&self) -> Hamiltonian {
        Hamiltonian { mat: self.mat.clone(), dims: vec![self.da, self.db] }
    }

    pub fn random(dims: [usize; 2], seed: RngSeed) -> Result<Self> {
        Ok(project_interaction(&Hamiltonian::random(&dims, seed)?)?.h_int)
    }
}

fn bipartite(dims: &[usize]) -> Result<(usize, usize)> {
    match dims {
        [a, b] => Ok((*a, *b)),
        _ => Err(Error::DimMismatch(format!("expected two subsystems, got dims {dims:?}"))),
    }
}

/// `H = H_A ⊗ 1 + 1 ⊗ H_B + H_int + c·1` with `c = 0`; the identity
/// component of `H` is split equally between `H_A` and `H_B`.
#[derive(Debug, Clone)]
pub struct HamiltonianSplit {
    pub h_a: CMat,
    pub h_b: CMat,
    pub h_int: InteractionHamiltonian,
    pub c: f64,
}

impl HamiltonianSplit {
    pub fn reassemble(&self) -> CMat {
        let [da, db] = self.h_int.dims();
        matfun::tensor(&self.h_a, &matfun::identity(db))
            + matfun::tensor(&matfun::identity(da), &self.h_b)
            + self.h_int.matrix()
            + matfun::identity(da * db) * C64::new(self.c, 0.0)
    }
}

pub fn project_interaction(h: &Hamiltonian) -> Result<HamiltonianSplit> {
    let (da, db) = bipartite(h.dims())?;
    let tr = matfun::trace(h.matrix()).re;
    let n = (da * db) as f64;
    let tr_b = matfun::partial_trace(h.matrix(), h.dims(), &[0])?.unscale(db as f64);
    let tr_a = matfun::partial_trace(h.matrix(), h.dims(), &[1])?.unscale(da as f64);
    let half = C64::new(tr / (2.0 * n), 0.0);
    let h_a = &tr_b - matfun::identity(da) * half;
    let h_b = &tr_a - matfun::identity(db) * half;
    let h_int = h.matrix() - matfun::tensor(&tr_b, &matfun::identity(db)) - matfun::tensor(&matfun::identity(da), &tr_a)
        + matfun::identity(da * db) * C64::new(tr / n, 0.0);
    Ok(HamiltonianSplit { h_a, h_b, h_int: InteractionHamiltonian::new(h_int, vec![da, db])?, c: 0.0 })
}

/// `e^{-iHt} ρ e^{iHt}`.
pub fn evolve(rho: &DensityMatrix, h: &Hamiltonian, t: f64) -> Result<DensityMatrix> {
    if rho.dims() != h.dims() {
        return Err(Error::DimMismatch(format!(
            "state dims {:?}, Hamiltonian dims {:?}",
            rho.dims(),
            h.dims()
        )));
    }
    let u = matfun::unitary_propagator(h.matrix(), t)?;
    states::validate_density(&u * rho.matrix() * u.adjoint(), rho.dims().to_vec())
}

/// How a rank-deficient marginal is treated by the rate formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Support {
    /// Refuse with [`Error::SingularMarginal`].
    #[default]
    Strict,
    /// Use `log2` on the support only; the value is exploratory.
    Force,
}

fn marginal_log(rho: &DensityMatrix, site: usize, support: Support) -> Result<CMat> {
    let m = states::reduce(rho, &[site])?;
    let e = m.eig();
    if support == Support::Strict && e.support_rank() < e.dim() {
        return Err(Error::SingularMarginal(if site == 0 { 'A' } else { 'B' }));
    }
    matfun::log2_on_support(m.matrix())
}

fn check_pair(rho: &DensityMatrix, h_int: &InteractionHamiltonian) -> Result<()> {
    if rho.dims() != h_int.dims() {
        return Err(Error::DimMismatch(format!(
            "state dims {:?}, interaction dims {:?}",
            rho.dims(),
            h_int.dims()
        )));
    }
    Ok(())
}

/// `i·Tr{H [ρ, L]}`, the derivative of `-Tr(ρ_t L)` at fixed `L`.
fn commutator_rate(h: &CMat, rho: &CMat, l: &CMat) -> Result<f64> {
    let z = matfun::I * matfun::trace(&(h * matfun::commutator(rho, l)?));
    if z.im.abs() > IMAG_TOL * z.re.abs().max(1.0) {
        return Err(Error::NotHermitian(z.im.abs()));
    }
    Ok(z.re)
}

/// `dS(ρ_A)/dt = i·Tr{H_int [ρ_AB, log2 ρ_A ⊗ 1]}` in bits per unit time.
pub fn entropy_rate_a(rho: &DensityMatrix, h_int: &InteractionHamiltonian, support: Support) -> Result<f64> {
    check_pair(rho, h_int)?;
    let [_, db] = h_int.dims();
    let l = matfun::tensor(&marginal_log(rho, 0, support)?, &matfun::identity(db));
    commutator_rate(h_int.matrix(), rho.matrix(), &l)
}

/// `dS(ρ_B)/dt = i·Tr{H_int [ρ_AB, 1 ⊗ log2 ρ_B]}`.
pub fn entropy_rate_b(rho: &DensityMatrix, h_int: &InteractionHamiltonian, support: Support) -> Result<f64> {
    check_pair(rho, h_int)?;
    let [da, _] = h_int.dims();
    let l = matfun::tensor(&matfun::identity(da), &marginal_log(rho, 1, support)?);
    commutator_rate(h_int.matrix(), rho.matrix(), &l)
}

/// `dI/dt = i·Tr{H_int [ρ_AB, log2(ρ_A ⊗ ρ_B)]}`.
pub fn mutual_info_rate(rho: &DensityMatrix, h_int: &InteractionHamiltonian, support: Support) -> Result<f64> {
    check_pair(rho, h_int)?;
    let [da, db] = h_int.dims();
    let l = matfun::tensor(&marginal_log(rho, 0, support)?, &matfun::identity(db))
        + matfun::tensor(&matfun::identity(da), &marginal_log(rho, 1, support)?);
    commutator_rate(h_int.matrix(), rho.matrix(), &l)
}

/// Central difference of `f(evolve(ρ, H, t))` at `t = 0`.
pub fn finite_difference<F>(rho: &DensityMatrix, h: &Hamiltonian, step: f64, f: F) -> Result<f64>
where
    F: Fn(&DensityMatrix) -> Result<f64>,
{
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::BadParams(format!("finite-difference step {step}")));
    }
    let plus = f(&evolve(rho, h, step)?)?;
    let minus = f(&evolve(rho, h, -step)?)?;
    Ok((plus - minus) / (2.0 * step))
}

/// Central difference of `I(A:B|E)` under `H`, with step `h ∈ [1e-7, 1e-3]`.
pub fn cmi_rate(rho_abe: &DensityMatrix, h: &Hamiltonian, step: f64) -> Result<f64> {
    if rho_abe.n_subsystems() != 3 {
        return Err(Error::DimMismatch(format!("expected a tripartite state, got dims {:?}", rho_abe.dims())));
    }
    if !(1e-7..=1e-3).contains(&step) {
        return Err(Error::BadParams(format!("step {step} outside [1e-7, 1e-3]")));
    }
    finite_difference(rho_abe, h, step, |r| cmi(r, &[0], &[1], &[2]))
}

/// One time point of a trajectory; every point is evolved directly from `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub t: f64,
    #[serde(rename = "S_A")]
    pub s_a: f64,
    #[serde(rename = "S_B")]
    pub s_b: f64,
    #[serde(rename = "S_AB")]
    pub s_ab: f64,
    #[serde(rename = "I")]
    pub i: f64,
    pub rate_a_formula: f64,
    pub rate_a_fd: f64,
    pub rate_b_formula: f64,
    pub rate_b_fd: f64,
    pub rate_i_formula: f64,
    pub rate_i_fd: f64,
}

pub const TRAJECTORY_HEADERS: [&str; 11] = [
    "t",
    "S_A",
    "S_B",
    "S_AB",
    "I",
    "rate_A_formula",
    "rate_A_fd",
    "rate_B_formula",
    "rate_B_fd",
    "rate_I_formula",
    "rate_I_fd",
];

impl TrajectoryRow {
    fn values(&self) -> [f64; 11] {
        [
            self.t,
            self.s_a,
            self.s_b,
            self.s_ab,
            self.i,
            self.rate_a_formula,
            self.rate_a_fd,
            self.rate_b_formula,
            self.rate_b_fd,
            self.rate_i_formula,
            self.rate_i_fd,
        ]
    }

    /// Largest `|formula - fd|` over the three rates.
    pub fn max_fd_residual(&self) -> f64 {
        (self.rate_a_formula - self.rate_a_fd)
            .abs()
            .max((self.rate_b_formula - self.rate_b_fd).abs())
            .max((self.rate_i_formula - self.rate_i_fd).abs())
    }
}

fn trajectory_point(
    rho: &DensityMatrix,
    h: &Hamiltonian,
    h_int: &InteractionHamiltonian,
    t: f64,
    support: Support,
) -> Result<TrajectoryRow> {
    let r = evolve(rho, h, t)?;
    let fd = |f: fn(&DensityMatrix) -> Result<f64>| finite_difference(&r, h, FD_STEP, f);
    Ok(TrajectoryRow {
        t,
        s_a: subsystem_entropy(&r, &[0])?,
        s_b: subsystem_entropy(&r, &[1])?,
        s_ab: vn_entropy(&r),
        i: mutual_info(&r)?,
        rate_a_formula: entropy_rate_a(&r, h_int, support)?,
        rate_a_fd: fd(|x| subsystem_entropy(x, &[0]))?,
        rate_b_formula: entropy_rate_b(&r, h_int, support)?,
        rate_b_fd: fd(|x| subsystem_entropy(x, &[1]))?,
        rate_i_formula: mutual_info_rate(&r, h_int, support)?,
        rate_i_fd: fd(mutual_info)?,
    })
}

/// `steps + 1` equally spaced points on `[0, t_max]`.
pub fn trajectory(
    rho: &DensityMatrix,
    h: &Hamiltonian,
    t_max: f64,
    steps: usize,
    support: Support,
) -> Result<Vec<TrajectoryRow>> {
    if !t_max.is_finite() || t_max < 0.0 || steps == 0 {
        return Err(Error::BadParams(format!("t_max {t_max}, steps {steps}")));
    }
    let h_int = project_interaction(h)?.h_int;
    (0..=steps)
        .into_par_iter()
        .map(|k| trajectory_point(rho, h, &h_int, t_max * k as f64 / steps as f64, support))
        .collect()
}

/// CSV with [`TRAJECTORY_HEADERS`] and 17 significant digits per value.
pub fn trajectory_csv(rows: &[TrajectoryRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(TRAJECTORY_HEADERS).map_err(io)?;
    for row in rows {
        w.write_record(row.values().iter().map(|v| format!("{v:.16e}"))).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}
