//! Measurement isometries, the double strong-subadditivity identity and
//! block states that saturate strong subadditivity for two triples.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::entropy::{cmi, rel_entropy};
use crate::error::{Error, Result};
use crate::io::{state_from_json, state_to_json, MatrixJson};
use crate::matfun::{self, CMat, C64};
use crate::measurements::{self, Pvm, Site};
use crate::states::{self, random_density, DensityMatrix, RngSeed};

/// `V|ψ> = Σ_μ Π_μ|ψ> ⊗ |μ>`, a `(d·m) × d` isometry with the outcome index fastest.
pub fn measurement_isometry(pvm: &Pvm, dim_b: usize) -> Result<CMat> {
    if pvm.dim() != dim_b {
        return Err(Error::DimMismatch(format!(
            "measurement of dimension {} for a {dim_b}-dimensional system",
            pvm.dim()
        )));
    }
    let m = pvm.len();
    Ok(CMat::from_fn(dim_b * m, dim_b, |row, c| pvm.projector(row % m)[(row / m, c)]))
}

/// `σ_ABC = (1 ⊗ V) ρ_AB (1 ⊗ V)^†` with dims `[d_A, d_B, m]`.
pub fn embed_with_measurement(rho_ab: &DensityMatrix, pvm: &Pvm) -> Result<DensityMatrix> {
    let (da, db) = rho_ab.bipartite_dims()?;
    let v = matfun::tensor(&matfun::identity(da), &measurement_isometry(pvm, db)?);
    states::validate_density(&v * rho_ab.matrix() * v.adjoint(), vec![da, db, pvm.len()])
}

/// The three quantities of the double-SSA identity for a rank-1 measurement on `B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DoubleSsaGap {
    /// `I(A;C|B)_σ`
    pub i_acb: f64,
    /// `I(A;B|C)_σ`
    pub i_abc: f64,
    /// `S(ρ‖ρ_A⊗ρ_B) - S(Π(ρ)‖ρ_A⊗Π(ρ_B))`
    pub relent_gap: f64,
}

impl DoubleSsaGap {
    pub fn max_deviation(&self) -> f64 {
        let v = [self.i_acb, self.i_abc, self.relent_gap];
        let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
        max - min
    }
}

pub fn double_ssa_gap(rho_ab: &DensityMatrix, pvm: &Pvm) -> Result<DoubleSsaGap> {
    if !pvm.is_rank_one() {
        return Err(Error::NotPvm("the identity is stated for rank-1 measurements".into()));
    }
    let sigma = embed_with_measurement(rho_ab, pvm)?;
    let i_acb = cmi(&sigma, &[0], &[2], &[1])?;
    let i_abc = cmi(&sigma, &[0], &[1], &[2])?;
    let rho_a = states::reduce(rho_ab, &[0])?;
    let rho_b = states::reduce(rho_ab, &[1])?;
    let measured = measurements::nonselective(rho_ab, pvm, Site::Subsystem(1))?;
    let measured_b = measurements::nonselective(&rho_b, pvm, Site::Whole)?;
    let relent_gap = rel_entropy(rho_ab, &states::product(&rho_a, &rho_b))?.to_f64()
        - rel_entropy(&measured, &states::product(&rho_a, &measured_b))?.to_f64();
    Ok(DoubleSsaGap { i_acb, i_abc, relent_gap })
}

/// `ρ_ABC = ⊕_{i,j} p_ij ρ^(i)_{a_i^L} ⊗ ρ^(ij)_{a_i^R b_j^L} ⊗ ρ^(j)_{b_j^R} ⊗ ρ^(k(i,j))_C`.
///
/// The A space is the direct sum of the blocks `a_i^L ⊗ a_i^R` laid out in
/// order of `i` (likewise B over `j`); inside a block the left factor is the
/// slower index.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSpec {
    /// `(a_i^L, a_i^R)`
    pub a_dims: Vec<(usize, usize)>,
    /// `(b_j^L, b_j^R)`
    pub b_dims: Vec<(usize, usize)>,
    pub p: Vec<Vec<f64>>,
    pub k_map: Vec<Vec<usize>>,
    pub a_left: Vec<DensityMatrix>,
    /// `ρ^(ij)` on `a_i^R ⊗ b_j^L`
    pub middle: Vec<Vec<DensityMatrix>>,
    pub b_right: Vec<DensityMatrix>,
    /// `ρ^(k)_C`, indexed by the labels in `k_map`
    pub c_states: Vec<DensityMatrix>,
}

fn offsets(blocks: &[(usize, usize)]) -> (Vec<usize>, usize) {
    let mut off = Vec::with_capacity(blocks.len());
    let mut total = 0;
    for &(l, r) in blocks {
        off.push(total);
        total += l * r;
    }
    (off, total)
}

impl BlockSpec {
    pub fn dim_a(&self) -> usize {
        offsets(&self.a_dims).1
    }

    pub fn dim_b(&self) -> usize {
        offsets(&self.b_dims).1
    }

    pub fn dim_c(&self) -> usize {
        self.c_states.first().map_or(0, DensityMatrix::dim)
    }

    /// Checks shapes, the probability table and k-map consistency on the support.
    pub fn validate(&self) -> Result<()> {
        let (ni, nj) = (self.a_dims.len(), self.b_dims.len());
        let mismatch = |what: &str| Err(Error::DimMismatch(what.to_string()));
        if ni == 0 || nj == 0 || self.c_states.is_empty() {
            return mismatch("a block spec needs at least one A block, B block and C state");
        }
        if self.a_dims.iter().chain(&self.b_dims).any(|&(l, r)| l == 0 || r == 0) {
            return mismatch("block factors must have positive dimension");
        }
        if self.p.len() != ni || self.p.iter().any(|r| r.len() != nj) {
            return mismatch("p must be an (A blocks) × (B blocks) table");
        }
        if self.k_map.len() != ni || self.k_map.iter().any(|r| r.len() != nj) {
            return mismatch("k-map must have the shape of p");
        }
        if self.a_left.len() != ni || self.b_right.len() != nj || self.middle.len() != ni {
            return mismatch("one sector state per block is required");
        }
        for (i, &(al, ar)) in self.a_dims.iter().enumerate() {
            if self.a_left[i].dim() != al {
                return mismatch(&format!("A block {i}: left state is not {al}-dimensional"));
            }
            if self.middle[i].len() != nj {
                return mismatch(&format!("A block {i}: expected {nj} middle states"));
            }
            for (j, &(bl, _)) in self.b_dims.iter().enumerate() {
                if self.middle[i][j].dim() != ar * bl {
                    return mismatch(&format!("sector ({i},{j}): middle state is not {}-dimensional", ar * bl));
                }
            }
        }
        for (j, &(_, br)) in self.b_dims.iter().enumerate() {
            if self.b_right[j].dim() != br {
                return mismatch(&format!("B block {j}: right state is not {br}-dimensional"));
            }
        }
        let dc = self.dim_c();
        if self.c_states.iter().any(|c| c.dim() != dc) {
            return mismatch("all C states must share one dimension");
        }
        let flat: Vec<f64> = self.p.concat();
        if let Some(bad) = flat.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::BadParams(format!("invalid probability {bad}")));
        }
        let total: f64 = flat.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::BadParams(format!("probabilities sum to {total}")));
        }
        for i in 0..ni {
            for j in 0..nj {
                if self.k_map[i][j] >= self.c_states.len() {
                    return Err(Error::InconsistentKMap(format!(
                        "label {} at ({i},{j}) has no C state",
                        self.k_map[i][j]
                    )));
                }
            }
        }
        // k(i,j) = k1(i) = k2(j) on the support: constant along rows and columns
        for i in 0..ni {
            for j in 0..nj {
                if self.p[i][j] <= 0.0 {
                    continue;
                }
                for j2 in 0..nj {
                    if self.p[i][j2] > 0.0 && self.k_map[i][j2] != self.k_map[i][j] {
                        return Err(Error::InconsistentKMap(format!(
                            "row {i} carries labels {} and {}",
                            self.k_map[i][j], self.k_map[i][j2]
                        )));
                    }
                }
                for i2 in 0..ni {
                    if self.p[i2][j] > 0.0 && self.k_map[i2][j] != self.k_map[i][j] {
                        return Err(Error::InconsistentKMap(format!(
                            "column {j} carries labels {} and {}",
                            self.k_map[i][j], self.k_map[i2][j]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Sector `(i, j)` state `ρ^(i) ⊗ ρ^(ij) ⊗ ρ^(j)` placed in the full AB space.
    fn sector_ab(&self, i: usize, j: usize) -> CMat {
        let (offa, da) = offsets(&self.a_dims);
        let (offb, db) = offsets(&self.b_dims);
        let (al, ar) = self.a_dims[i];
        let (bl, br) = self.b_dims[j];
        let (left, mid, right) = (self.a_left[i].matrix(), self.middle[i][j].matrix(), self.b_right[j].matrix());
        let mut out = matfun::zeros(da * db);
        let idx = |xl: usize, xr: usize, yl: usize, yr: usize| {
            let a = offa[i] + xl * ar + xr;
            let b = offb[j] + yl * br + yr;
            a * db + b
        };
        for xl in 0..al {
            for xr in 0..ar {
                for yl in 0..bl {
                    for yr in 0..br {
                        let row = idx(xl, xr, yl, yr);
                        for xl2 in 0..al {
                            for xr2 in 0..ar {
                                for yl2 in 0..bl {
                                    for yr2 in 0..br {
                                        out[(row, idx(xl2, xr2, yl2, yr2))] = left[(xl, xl2)]
                                            * mid[(xr * bl + yl, xr2 * bl + yl2)]
                                            * right[(yr, yr2)];
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Seeded spec with `2..=3` blocks per side, at least one nontrivial
    /// `a^R` and `b^L` factor, and rows and columns grouped so that several
    /// sectors share a C label.
    pub fn random(seed: RngSeed) -> Result<BlockSpec> {
        let mut rng = seed.rng();
        let ni = rng.random_range(2..=3usize);
        let nj = rng.random_range(2..=3usize);
        let mut a_dims: Vec<(usize, usize)> =
            (0..ni).map(|_| (rng.random_range(1..=2), rng.random_range(1..=2))).collect();
        let mut b_dims: Vec<(usize, usize)> =
            (0..nj).map(|_| (rng.random_range(1..=2), rng.random_range(1..=2))).collect();
        a_dims[0].1 = 2;
        b_dims[0].0 = 2;
        // rows and columns in the same group may share support
        let groups = 2;
        let row_group: Vec<usize> = (0..ni).map(|i| i % groups).collect();
        let col_group: Vec<usize> = (0..nj).map(|j| j % groups).collect();
        let n_labels = rng.random_range(1..=groups);
        let group_label: Vec<usize> = (0..groups).map(|g| g % n_labels).collect();
        let mut p = vec![vec![0.0; nj]; ni];
        let mut k_map = vec![vec![0; nj]; ni];
        for i in 0..ni {
            for j in 0..nj {
                if row_group[i] == col_group[j] {
                    p[i][j] = 0.1 + rng.random::<f64>();
                    k_map[i][j] = group_label[row_group[i]];
                } else {
                    k_map[i][j] = rng.random_range(0..n_labels);
                }
            }
        }
        let total: f64 = p.iter().flatten().sum();
        p.iter_mut().flatten().for_each(|x| *x /= total);
        let mut sub = 0u64;
        let mut state = |d: usize| -> Result<DensityMatrix> {
            sub += 1;
            random_density(&[d], d, RngSeed(seed.0.wrapping_mul(1_000_003).wrapping_add(sub)))
        };
        let a_left = a_dims.iter().map(|&(l, _)| state(l)).collect::<Result<_>>()?;
        let middle = a_dims
            .iter()
            .map(|&(_, r)| b_dims.iter().map(|&(l, _)| state(r * l)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        let b_right = b_dims.iter().map(|&(_, r)| state(r)).collect::<Result<_>>()?;
        let dc = 2 + (seed.0 % 2) as usize;
        let c_states = (0..n_labels).map(|_| state(dc)).collect::<Result<_>>()?;
        let spec = BlockSpec { a_dims, b_dims, p, k_map, a_left, middle, b_right, c_states };
        spec.validate()?;
        Ok(spec)
    }
}

pub fn construct_bi_ssa_state(spec: &BlockSpec) -> Result<DensityMatrix> {
    spec.validate()?;
    let dc = spec.dim_c();
    let mut out = matfun::zeros(spec.dim_a() * spec.dim_b() * dc);
    for (i, row) in spec.p.iter().enumerate() {
        for (j, &pij) in row.iter().enumerate() {
            if pij > 0.0 {
                let c = spec.c_states[spec.k_map[i][j]].matrix();
                out += matfun::tensor(&spec.sector_ab(i, j), c) * C64::new(pij, 0.0);
            }
        }
    }
    states::validate_density(out, vec![spec.dim_a(), spec.dim_b(), dc])
}

/// Terms of equal C label gathered into `p_k ρ_AB^(k) ⊗ ρ_C^(k)`.
#[derive(Debug, Clone)]
pub struct KBlock {
    pub label: usize,
    pub weight: f64,
    pub rho_ab: DensityMatrix,
    pub rho_c: DensityMatrix,
}

pub fn collect_k_blocks(spec: &BlockSpec) -> Result<Vec<KBlock>> {
    spec.validate()?;
    let mut blocks = Vec::new();
    for label in 0..spec.c_states.len() {
        let mut weight = 0.0;
        let mut acc = matfun::zeros(spec.dim_a() * spec.dim_b());
        for (i, row) in spec.p.iter().enumerate() {
            for (j, &pij) in row.iter().enumerate() {
                if pij > 0.0 && spec.k_map[i][j] == label {
                    weight += pij;
                    acc += spec.sector_ab(i, j) * C64::new(pij, 0.0);
                }
            }
        }
        if weight > 0.0 {
            let rho_ab = states::validate_density(acc.unscale(weight), vec![spec.dim_a(), spec.dim_b()])?;
            blocks.push(KBlock { label, weight, rho_ab, rho_c: spec.c_states[label].clone() });
        }
    }
    Ok(blocks)
}

/// `Σ_k p_k ρ_AB^(k) ⊗ ρ_C^(k)`.
pub fn rebuild_from_k_blocks(blocks: &[KBlock]) -> CMat {
    blocks
        .iter()
        .map(|b| matfun::tensor(b.rho_ab.matrix(), b.rho_c.matrix()) * C64::new(b.weight, 0.0))
        .reduce(|a, b| a + b)
        .unwrap_or_else(|| matfun::zeros(0))
}

/// `I(A;C|B)` and `I(B;C|A)` of a tripartite state.
pub fn bi_ssa_cmis(rho_abc: &DensityMatrix) -> Result<(f64, f64)> {
    if rho_abc.n_subsystems() != 3 {
        return Err(Error::DimMismatch(format!("expected a tripartite state, got dims {:?}", rho_abc.dims())));
    }
    Ok((cmi(rho_abc, &[0], &[2], &[1])?, cmi(rho_abc, &[1], &[2], &[0])?))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockSpecJson {
    pub a_dims: Vec<[usize; 2]>,
    pub b_dims: Vec<[usize; 2]>,
    pub p: Vec<Vec<f64>>,
    pub k_map: Vec<Vec<usize>>,
    pub a_left: Vec<MatrixJson>,
    pub middle: Vec<Vec<MatrixJson>>,
    pub b_right: Vec<MatrixJson>,
    pub c_states: Vec<MatrixJson>,
}

impl From<&BlockSpec> for BlockSpecJson {
    fn from(s: &BlockSpec) -> Self {
        let all = |v: &[DensityMatrix]| v.iter().map(state_to_json).collect::<Vec<_>>();
        BlockSpecJson {
            a_dims: s.a_dims.iter().map(|&(l, r)| [l, r]).collect(),
            b_dims: s.b_dims.iter().map(|&(l, r)| [l, r]).collect(),
            p: s.p.clone(),
            k_map: s.k_map.clone(),
            a_left: all(&s.a_left),
            middle: s.middle.iter().map(|row| all(row)).collect(),
            b_right: all(&s.b_right),
            c_states: all(&s.c_states),
        }
    }
}

impl BlockSpecJson {
    pub fn to_spec(&self) -> Result<BlockSpec> {
        let all = |v: &[MatrixJson]| v.iter().map(state_from_json).collect::<Result<Vec<_>>>();
        let spec = BlockSpec {
            a_dims: self.a_dims.iter().map(|&[l, r]| (l, r)).collect(),
            b_dims: self.b_dims.iter().map(|&[l, r]| (l, r)).collect(),
            p: self.p.clone(),
            k_map: self.k_map.clone(),
            a_left: all(&self.a_left)?,
            middle: self.middle.iter().map(|row| all(row)).collect::<Result<_>>()?,
            b_right: all(&self.b_right)?,
            c_states: all(&self.c_states)?,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{from_json_str, to_json_string};
    use crate::measurements::{computational_pvm, random_pvm, validate_pvm};
    use crate::states::{bell, maximally_mixed, product};

    fn close(a: &CMat, b: &CMat, tol: f64) -> bool {
        a.shape() == b.shape() && (a - b).norm() < tol
    }

    #[test]
    fn isometry_examples() {
        let whole = validate_pvm(vec![matfun::identity(3)]).unwrap();
        let v = measurement_isometry(&whole, 3).unwrap();
        assert!(close(&v, &matfun::identity(3), 1e-15));

        let v = measurement_isometry(&computational_pvm(2), 2).unwrap();
        // |b> ↦ |b>|b>
        assert_eq!(v[(0, 0)], C64::new(1.0, 0.0));
        assert_eq!(v[(3, 1)], C64::new(1.0, 0.0));
        assert!(v[(1, 0)].norm() == 0.0 && v[(2, 1)].norm() == 0.0);

        for seed in 0..20 {
            let pvm = random_pvm(4, &[1, 2, 1], RngSeed(seed)).unwrap();
            let v = measurement_isometry(&pvm, 4).unwrap();
            assert!(close(&(v.adjoint() * &v), &matfun::identity(4), 1e-10));
        }
        assert!(measurement_isometry(&computational_pvm(2), 3).is_err());
    }

    #[test]
    fn embedding_examples() {
        let rho = random_density(&[2, 3], 4, RngSeed(1)).unwrap();
        let pvm = random_pvm(3, &[1, 1, 1], RngSeed(2)).unwrap();
        let sigma = embed_with_measurement(&rho, &pvm).unwrap();
        assert_eq!(sigma.dims(), &[2, 3, 3]);
        let measured = measurements::nonselective(&rho, &pvm, Site::Subsystem(1)).unwrap();
        assert!(close(states::reduce(&sigma, &[0, 1]).unwrap().matrix(), measured.matrix(), 1e-10));
        let rb = states::reduce(&rho, &[1]).unwrap();
        let mut bc = matfun::zeros(9);
        for mu in 0..3 {
            for nu in 0..3 {
                let blk = pvm.projector(mu) * rb.matrix() * pvm.projector(nu);
                let mut flag = matfun::zeros(3);
                flag[(mu, nu)] = C64::new(1.0, 0.0);
                bc += matfun::tensor(&blk, &flag);
            }
        }
        assert!(close(states::reduce(&sigma, &[1, 2]).unwrap().matrix(), &bc, 1e-10));

        let whole = validate_pvm(vec![matfun::identity(3)]).unwrap();
        let sigma = embed_with_measurement(&rho, &whole).unwrap();
        assert!(close(sigma.matrix(), rho.matrix(), 1e-14));

        let sigma = embed_with_measurement(&bell(), &computational_pvm(2)).unwrap();
        assert!(crate::entropy::vn_entropy(&sigma) < 1e-10);
    }

    #[test]
    fn double_ssa_examples() {
        let a = random_density(&[2], 2, RngSeed(3)).unwrap();
        let b = random_density(&[3], 3, RngSeed(4)).unwrap();
        let g = double_ssa_gap(&product(&a, &b), &random_pvm(3, &[1, 1, 1], RngSeed(5)).unwrap()).unwrap();
        assert!(g.i_acb.abs() < 1e-10 && g.i_abc.abs() < 1e-10 && g.relent_gap.abs() < 1e-10);

        let cq = states::diagonal_state(&[0.1, 0.2, 0.3, 0.4], &[2, 2]).unwrap();
        let g = double_ssa_gap(&cq, &computational_pvm(2)).unwrap();
        assert!(g.max_deviation() < 1e-10 && g.i_acb.abs() < 1e-10);

        let g = double_ssa_gap(&bell(), &computational_pvm(2)).unwrap();
        for v in [g.i_acb, g.i_abc, g.relent_gap] {
            assert!((v - 1.0).abs() < 1e-10);
        }
        let coarse = validate_pvm(vec![matfun::identity(2)]).unwrap();
        assert!(double_ssa_gap(&bell(), &coarse).is_err());
    }

    fn trivial_spec(rho_ab: &DensityMatrix, rho_c: &DensityMatrix) -> BlockSpec {
        let (da, db) = rho_ab.bipartite_dims().unwrap();
        BlockSpec {
            a_dims: vec![(1, da)],
            b_dims: vec![(db, 1)],
            p: vec![vec![1.0]],
            k_map: vec![vec![0]],
            a_left: vec![maximally_mixed(&[1]).unwrap()],
            middle: vec![vec![rho_ab.with_dims(vec![da * db]).unwrap()]],
            b_right: vec![maximally_mixed(&[1]).unwrap()],
            c_states: vec![rho_c.clone()],
        }
    }

    #[test]
    fn bi_ssa_examples() {
        let rho_ab = random_density(&[2, 2], 4, RngSeed(6)).unwrap();
        let rho_c = random_density(&[2], 2, RngSeed(7)).unwrap();
        let rho = construct_bi_ssa_state(&trivial_spec(&rho_ab, &rho_c)).unwrap();
        assert!(close(rho.matrix(), product(&rho_ab, &rho_c).matrix(), 1e-14));
        let (x, y) = bi_ssa_cmis(&rho).unwrap();
        assert!(x.abs() < 1e-9 && y.abs() < 1e-9);

        // classical flag on C
        let one = maximally_mixed(&[1]).unwrap();
        let spec = BlockSpec {
            a_dims: vec![(2, 1), (2, 1)],
            b_dims: vec![(1, 2), (1, 2)],
            p: vec![vec![0.4, 0.0], vec![0.0, 0.6]],
            k_map: vec![vec![0, 1], vec![0, 1]],
            a_left: vec![random_density(&[2], 2, RngSeed(8)).unwrap(), random_density(&[2], 2, RngSeed(9)).unwrap()],
            middle: vec![vec![one.clone(), one.clone()], vec![one.clone(), one.clone()]],
            b_right: vec![random_density(&[2], 2, RngSeed(10)).unwrap(), random_density(&[2], 2, RngSeed(11)).unwrap()],
            c_states: vec![
                states::diagonal_state(&[1.0, 0.0], &[2]).unwrap(),
                states::diagonal_state(&[0.0, 1.0], &[2]).unwrap(),
            ],
        };
        let rho = construct_bi_ssa_state(&spec).unwrap();
        assert_eq!(rho.dims(), &[4, 4, 2]);
        let (x, y) = bi_ssa_cmis(&rho).unwrap();
        assert!(x.abs() < 1e-9 && y.abs() < 1e-9);
        assert!(crate::entropy::cmi(&rho, &[0], &[1], &[]).unwrap() > 0.1);

        let mut bad = spec.clone();
        bad.p = vec![vec![0.4, 0.1], vec![0.0, 0.5]];
        assert!(matches!(construct_bi_ssa_state(&bad), Err(Error::InconsistentKMap(_))));
    }

    #[test]
    fn random_specs_saturate_both_triples() {
        for seed in 0..20u64 {
            let spec = BlockSpec::random(RngSeed(seed)).unwrap();
            let rho = construct_bi_ssa_state(&spec).unwrap();
            let (x, y) = bi_ssa_cmis(&rho).unwrap();
            assert!(x.abs() < 1e-7 && y.abs() < 1e-7, "seed {seed}: {x} {y}");
            let blocks = collect_k_blocks(&spec).unwrap();
            let total: f64 = blocks.iter().map(|b| b.weight).sum();
            assert!((total - 1.0).abs() < 1e-12);
            assert!(close(&rebuild_from_k_blocks(&blocks), rho.matrix(), 1e-10));
        }
    }

    #[test]
    fn block_spec_json_round_trip() {
        let spec = BlockSpec::random(RngSeed(3)).unwrap();
        let text = to_json_string(&BlockSpecJson::from(&spec)).unwrap();
        let back = from_json_str::<BlockSpecJson>(&text).unwrap().to_spec().unwrap();
        assert_eq!(back, spec);
    }
}
