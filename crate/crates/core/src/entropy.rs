//! Entropic functionals, all in bits.

use std::cmp::Ordering;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matfun::{self, C64};
use crate::measurements::{self, Pvm, Site};
use crate::states::{self, DensityMatrix};

/// Outcome probabilities at or below this are dropped from conditional sums.
pub const PROB_FLOOR: f64 = 1e-12;

/// A real number or `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinite,
}

impl ExtReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::Infinite => None,
        }
    }

    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    /// `self - rhs` for a finite `rhs`; `∞ - x = ∞`.
    pub fn minus(self, rhs: f64) -> ExtReal {
        match self {
            ExtReal::Finite(v) => ExtReal::Finite(v - rhs),
            ExtReal::Infinite => ExtReal::Infinite,
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b),
            (ExtReal::Infinite, ExtReal::Infinite) => Some(Ordering::Equal),
            (ExtReal::Infinite, _) => Some(Ordering::Greater),
            (_, ExtReal::Infinite) => Some(Ordering::Less),
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(v) => s.serialize_f64(*v),
            ExtReal::Infinite => s.serialize_str("inf"),
        }
    }
}

/// `-x log2 x`, zero at zero.
#[inline]
pub fn eta(x: f64) -> f64 {
    if x > 0.0 {
        -x * x.log2()
    } else {
        0.0
    }
}

/// Shannon entropy of a (sub)probability vector, ignoring non-positive entries.
pub fn shannon(p: &[f64]) -> f64 {
    p.iter().map(|&x| eta(x)).sum()
}

/// Entropy of a spectrum with the relative support cutoff applied.
pub fn spectrum_entropy(eigenvalues: &[f64]) -> f64 {
    let max = eigenvalues.iter().cloned().fold(0.0, f64::max);
    let cut = matfun::EPS_SUPP * max;
    let s: f64 = eigenvalues.iter().filter(|&&l| l > cut).map(|&l| eta(l)).sum();
    s.max(0.0)
}

pub fn vn_entropy(rho: &DensityMatrix) -> f64 {
    spectrum_entropy(&rho.eig().eigenvalues)
}

/// `-Tr(M log2 M)` for a PSD matrix that is not necessarily normalised.
pub fn vn_entropy_of(m: &matfun::CMat) -> Result<f64> {
    Ok(spectrum_entropy(&matfun::eig_psd(m)?.eigenvalues))
}

/// Entropy of the reduced state on `sites`; zero for an empty selection.
pub fn subsystem_entropy(rho: &DensityMatrix, sites: &[usize]) -> Result<f64> {
    if sites.is_empty() {
        return Ok(0.0);
    }
    if sites.len() == rho.n_subsystems() {
        return Ok(vn_entropy(rho));
    }
    Ok(vn_entropy(&states::reduce(rho, sites)?))
}

/// `S(ρ‖σ)`, evaluated in the eigenbasis of `σ` restricted to its support.
pub fn rel_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<ExtReal> {
    if !states::support_contained(rho, sigma)? {
        return Ok(ExtReal::Infinite);
    }
    let e = sigma.eig();
    let cut = e.support_cutoff();
    let mut cross = 0.0;
    for (k, &l) in e.eigenvalues.iter().enumerate() {
        if l > cut && l > 0.0 {
            let v = e.eigenvector(k);
            let w: C64 = (v.adjoint() * rho.matrix() * &v)[(0, 0)];
            cross += w.re * l.log2();
        }
    }
    Ok(ExtReal::Finite(-vn_entropy(rho) - cross))
}

fn require_bipartite(rho: &DensityMatrix) -> Result<()> {
    rho.bipartite_dims().map(|_| ())
}

/// `S(A|B) = S(AB) - S(B)`
pub fn cond_entropy(rho_ab: &DensityMatrix) -> Result<f64> {
    require_bipartite(rho_ab)?;
    Ok(vn_entropy(rho_ab) - subsystem_entropy(rho_ab, &[1])?)
}

/// `I(A:B) = S(A) + S(B) - S(AB)`
pub fn mutual_info(rho_ab: &DensityMatrix) -> Result<f64> {
    require_bipartite(rho_ab)?;
    Ok(subsystem_entropy(rho_ab, &[0])? + subsystem_entropy(rho_ab, &[1])? - vn_entropy(rho_ab))
}

/// `Σ_μ p_μ S(ρ_{A,μ})` for a rank-1 measurement on `B`.
pub fn meas_cond_entropy(rho_ab: &DensityMatrix, pvm_b: &Pvm) -> Result<f64> {
    require_bipartite(rho_ab)?;
    if !pvm_b.is_rank_one() {
        return Err(Error::NotPvm("conditional entropy needs a rank-1 measurement".into()));
    }
    let mut total = 0.0;
    for mu in 0..pvm_b.len() {
        match measurements::conditional_state(rho_ab, pvm_b, Site::Subsystem(1), mu) {
            Ok((cond, p)) => total += p * subsystem_entropy(&cond, &[0])?,
            Err(Error::ZeroProbabilityOutcome { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(total)
}

fn check_partition(rho: &DensityMatrix, sets: [&[usize]; 3]) -> Result<()> {
    let n = rho.n_subsystems();
    let mut seen = vec![false; n];
    for set in sets {
        for &s in set {
            if s >= n {
                return Err(Error::BadPartition(format!("subsystem {s} out of range 0..{n}")));
            }
            if seen[s] {
                return Err(Error::BadPartition(format!("subsystem {s} listed twice")));
            }
            seen[s] = true;
        }
    }
    if sets[0].is_empty() || sets[1].is_empty() {
        return Err(Error::BadPartition("both sides must be non-empty".into()));
    }
    Ok(())
}

/// `I(a; b | cond) = S(a ∪ cond) + S(b ∪ cond) - S(a ∪ b ∪ cond) - S(cond)`.
///
/// Subsystems in none of the three sets are traced out; an empty `cond`
/// gives the mutual information of `a` and `b`.
pub fn cmi(rho: &DensityMatrix, a: &[usize], b: &[usize], cond: &[usize]) -> Result<f64> {
    check_partition(rho, [a, b, cond])?;
    let union = |sets: &[&[usize]]| -> Vec<usize> {
        let mut v: Vec<usize> = sets.iter().flat_map(|s| s.iter().copied()).collect();
        v.sort_unstable();
        v
    };
    Ok(subsystem_entropy(rho, &union(&[a, cond]))?
        + subsystem_entropy(rho, &union(&[b, cond]))?
        - subsystem_entropy(rho, &union(&[a, b, cond]))?
        - subsystem_entropy(rho, cond)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matfun::{diag, identity};
    use crate::states::{bell, ghz, maximally_mixed, product, random_density, RngSeed};

    fn classical_pair(p: &[f64]) -> DensityMatrix {
        // Σ_i p_i |ii><ii| on d×d
        let d = p.len();
        let mut diag_entries = vec![0.0; d * d];
        for (i, &pi) in p.iter().enumerate() {
            diag_entries[i * d + i] = pi;
        }
        states::diagonal_state(&diag_entries, &[d, d]).unwrap()
    }

    #[test]
    fn ext_real_ordering() {
        assert!(ExtReal::Infinite > ExtReal::Finite(1e300));
        assert!(ExtReal::Finite(1.0) < ExtReal::Finite(2.0));
        assert_eq!(ExtReal::Infinite.minus(3.0), ExtReal::Infinite);
        assert_eq!(serde_json::to_string(&ExtReal::Infinite).unwrap(), "\"inf\"");
    }

    #[test]
    fn vn_entropy_examples() {
        assert!(vn_entropy(&bell()).abs() < 1e-12);
        assert!((vn_entropy(&maximally_mixed(&[3]).unwrap()) - 3f64.log2()).abs() < 1e-12);
        let s = states::diagonal_state(&[0.5, 0.25, 0.25], &[3]).unwrap();
        assert!((vn_entropy(&s) - 1.5).abs() < 1e-14);
    }

    #[test]
    fn vn_entropy_bounds() {
        for seed in 0..50u64 {
            let rho = random_density(&[2, 3], 1 + seed as usize % 6, RngSeed(seed)).unwrap();
            let s = vn_entropy(&rho);
            assert!(s >= 0.0 && s <= 6f64.log2() + 1e-9, "{s}");
        }
    }

    #[test]
    fn rel_entropy_examples() {
        let rho = random_density(&[3], 2, RngSeed(1)).unwrap();
        assert!(rel_entropy(&rho, &rho).unwrap().to_f64().abs() < 1e-10);
        let zero = states::diagonal_state(&[1.0, 0.0], &[2]).unwrap();
        let mixed = maximally_mixed(&[2]).unwrap();
        let v = rel_entropy(&zero, &mixed).unwrap().to_f64();
        assert!((v - 1.0).abs() < 1e-14);
        assert_eq!(rel_entropy(&mixed, &zero).unwrap(), ExtReal::Infinite);
    }

    #[test]
    fn klein_inequality() {
        for seed in 0..200u64 {
            let d = 2 + seed as usize % 7;
            let rho = random_density(&[d], 1 + seed as usize % d, RngSeed(seed)).unwrap();
            let sigma = random_density(&[d], d, RngSeed(seed + 10_000)).unwrap();
            let v = rel_entropy(&rho, &sigma).unwrap().to_f64();
            assert!(v >= -1e-9);
            let dist = (rho.matrix() - sigma.matrix()).norm();
            if dist > 1e-6 {
                assert!(v > 0.0, "seed {seed}");
            }
        }
        // equality at ρ = σ
        let s = random_density(&[5], 5, RngSeed(9)).unwrap();
        assert!(rel_entropy(&s, &s).unwrap().to_f64().abs() < 1e-10);
    }

    #[test]
    fn cond_entropy_examples() {
        let a = random_density(&[2], 2, RngSeed(3)).unwrap();
        let b = random_density(&[3], 3, RngSeed(4)).unwrap();
        let p = product(&a, &b);
        assert!((cond_entropy(&p).unwrap() - vn_entropy(&a)).abs() < 1e-10);
        assert!((cond_entropy(&bell()).unwrap() + 1.0).abs() < 1e-12);
        assert!(cond_entropy(&classical_pair(&[0.3, 0.7])).unwrap().abs() < 1e-12);
        assert!(cond_entropy(&ghz(3).unwrap()).is_err());
    }

    #[test]
    fn mutual_info_examples() {
        let a = random_density(&[2], 2, RngSeed(5)).unwrap();
        let b = random_density(&[2], 2, RngSeed(6)).unwrap();
        assert!(mutual_info(&product(&a, &b)).unwrap().abs() < 1e-10);
        assert!((mutual_info(&bell()).unwrap() - 2.0).abs() < 1e-12);
        assert!((mutual_info(&classical_pair(&[0.5, 0.5])).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mutual_info_is_relative_entropy_to_product() {
        for seed in 0..60u64 {
            let dims = [2 + seed as usize % 2, 2 + seed as usize % 3];
            let rho = random_density(&dims, 1 + seed as usize % 6, RngSeed(seed)).unwrap();
            let a = states::reduce(&rho, &[0]).unwrap();
            let b = states::reduce(&rho, &[1]).unwrap();
            let rel = rel_entropy(&rho, &product(&a, &b)).unwrap().to_f64();
            let mi = mutual_info(&rho).unwrap();
            assert!(mi >= -1e-9);
            assert!((rel - mi).abs() <= 1e-8, "seed {seed}: {rel} vs {mi}");
        }
    }

    #[test]
    fn meas_cond_entropy_examples() {
        let a = random_density(&[2], 2, RngSeed(7)).unwrap();
        let b = random_density(&[2], 2, RngSeed(8)).unwrap();
        let p = product(&a, &b);
        let any = measurements::random_pvm(2, &[1, 1], RngSeed(9)).unwrap();
        assert!((meas_cond_entropy(&p, &any).unwrap() - vn_entropy(&a)).abs() < 1e-10);

        let comp = measurements::computational_pvm(2);
        assert!(meas_cond_entropy(&bell(), &comp).unwrap().abs() < 1e-12);
        assert!(meas_cond_entropy(&classical_pair(&[0.5, 0.5]), &comp).unwrap().abs() < 1e-12);

        let coarse = measurements::validate_pvm(vec![identity(2)]).unwrap();
        assert!(meas_cond_entropy(&bell(), &coarse).is_err());
    }

    #[test]
    fn meas_cond_entropy_is_nonnegative_and_bounded() {
        for seed in 0..50u64 {
            let rho = random_density(&[3, 2], 1 + seed as usize % 6, RngSeed(seed)).unwrap();
            let pvm = measurements::random_pvm(2, &[1, 1], RngSeed(seed + 77)).unwrap();
            let v = meas_cond_entropy(&rho, &pvm).unwrap();
            assert!(v >= 0.0 && v <= 3f64.log2() + 1e-9, "{v}");
        }
    }

    #[test]
    fn cmi_examples() {
        let ab = random_density(&[2, 2], 3, RngSeed(10)).unwrap();
        let c = random_density(&[2], 2, RngSeed(11)).unwrap();
        let abc = product(&ab, &c);
        assert!(cmi(&abc, &[0], &[2], &[1]).unwrap().abs() < 1e-10);

        // GHZ: S(AB) = S(BC) = S(B) = 1, S(ABC) = 0
        assert!((cmi(&ghz(3).unwrap(), &[0], &[2], &[1]).unwrap() - 1.0).abs() < 1e-12);

        let a = random_density(&[2], 2, RngSeed(12)).unwrap();
        let abc = product(&a, &bell());
        assert!(cmi(&abc, &[0], &[2], &[1]).unwrap().abs() < 1e-10);

        assert!(matches!(cmi(&abc, &[0], &[0], &[1]), Err(Error::BadPartition(_))));
        assert!(matches!(cmi(&abc, &[0], &[5], &[1]), Err(Error::BadPartition(_))));
        assert!(matches!(cmi(&abc, &[], &[2], &[1]), Err(Error::BadPartition(_))));
        // empty conditioning set is mutual information
        let mi = cmi(&bell(), &[0], &[1], &[]).unwrap();
        assert!((mi - 2.0).abs() < 1e-12);
    }

    #[test]
    fn strong_subadditivity() {
        for seed in 0..100u64 {
            let rho = random_density(&[2, 2, 2], 1 + seed as usize % 8, RngSeed(seed)).unwrap();
            assert!(cmi(&rho, &[0], &[2], &[1]).unwrap() >= -1e-8);
            assert!(cmi(&rho, &[1], &[2], &[0]).unwrap() >= -1e-8);
        }
    }

    #[test]
    fn diag_helpers() {
        assert_eq!(shannon(&[0.5, 0.5, 0.0]), 1.0);
        assert!(vn_entropy_of(&diag(&[0.5, 0.0])).unwrap() == 0.5);
    }
}
