use proptest::prelude::*;
use qdiscord::channels::{monotonicity_gap, KrausChannel};
use qdiscord::discord::{
    construct_zero_discord_symmetric, discord_objective_one_sided, discord_objective_product,
    product_commutator_norm, reconstruct_by_spectral_pvms, JointProbTable, LocalBases,
};
use qdiscord::dynamics::{evolve, Hamiltonian};
use qdiscord::entropy::{cmi, mutual_info, rel_entropy, subsystem_entropy, vn_entropy};
use qdiscord::io::{from_json_str, state_from_json, state_to_json, to_json_string, MatrixJson};
use qdiscord::measurements::random_pvm;
use qdiscord::ssa::measurement_isometry;
use qdiscord::states::{random_density, RngSeed};

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (2usize..=3, 2usize..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn entropy_bounds((da, db) in dims(), rank in 1usize..=9, seed: u64) {
        let rho = random_density(&[da, db], rank.min(da * db), RngSeed(seed)).unwrap();
        let s = vn_entropy(&rho);
        prop_assert!(s >= 0.0 && s <= ((da * db) as f64).log2() + 1e-12);
        let (sa, sb) = (subsystem_entropy(&rho, &[0]).unwrap(), subsystem_entropy(&rho, &[1]).unwrap());
        prop_assert!(sa + sb >= s - 1e-10);
        prop_assert!((sa - sb).abs() <= s + 1e-10);
        prop_assert!(mutual_info(&rho).unwrap() >= -1e-10);
    }

    #[test]
    fn strong_subadditivity(seed: u64, rank in 1usize..=8) {
        let rho = random_density(&[2, 2, 2], rank, RngSeed(seed)).unwrap();
        prop_assert!(cmi(&rho, &[0], &[2], &[1]).unwrap() >= -1e-9);
        prop_assert!(cmi(&rho, &[1], &[2], &[0]).unwrap() >= -1e-9);
    }

    #[test]
    fn relative_entropy_monotone(d in 2usize..=4, dout in 2usize..=4, kraus in 1usize..=4, seed: u64) {
        let rho = random_density(&[d], d, RngSeed(seed)).unwrap();
        let sigma = random_density(&[d], d, RngSeed(seed ^ 0x5555)).unwrap();
        prop_assert!(rel_entropy(&rho, &sigma).unwrap().to_f64() >= -1e-10);
        let ch = KrausChannel::random(d, dout, kraus.max(d.div_ceil(dout)), RngSeed(seed.wrapping_add(1))).unwrap();
        prop_assert!(monotonicity_gap(&rho, &sigma, &ch).unwrap().to_f64() >= -1e-8);
    }

    #[test]
    fn objective_forms_agree((da, db) in dims(), seed: u64) {
        let rho = random_density(&[da, db], da * db, RngSeed(seed)).unwrap();
        let pb = random_pvm(db, &vec![1; db], RngSeed(seed ^ 1)).unwrap();
        let f = discord_objective_one_sided(&rho, &pb).unwrap();
        prop_assert!(f.spread() < 1e-8 && f.mutual_information >= -1e-9);
        let pa = random_pvm(da, &vec![1; da], RngSeed(seed ^ 2)).unwrap();
        let f = discord_objective_product(&rho, &[pa, pb]).unwrap();
        prop_assert!(f.spread() < 1e-8 && f.mutual_information >= -1e-9);
    }

    #[test]
    fn isometries_are_isometric(d in 2usize..=5, seed: u64) {
        let pvm = random_pvm(d, &vec![1; d], RngSeed(seed)).unwrap();
        let v = measurement_isometry(&pvm, d).unwrap();
        let defect = (v.adjoint() * &v - nalgebra::DMatrix::identity(d, d)).norm();
        prop_assert!(defect < 1e-10);
    }

    #[test]
    fn eigenbasis_constructions_commute((da, db) in dims(), seed: u64) {
        let ra = random_density(&[da], da, RngSeed(seed)).unwrap();
        let rb = random_density(&[db], db, RngSeed(seed ^ 7)).unwrap();
        let table = JointProbTable::random_with_marginals(
            &[ra.eig().eigenvalues, rb.eig().eigenvalues], RngSeed(seed ^ 9)).unwrap();
        let rho = construct_zero_discord_symmetric(&ra, &rb, &LocalBases::Eigenbasis, &table).unwrap();
        prop_assert!(product_commutator_norm(&rho).unwrap() <= 1e-8);
        prop_assert!(reconstruct_by_spectral_pvms(&rho).unwrap().residual <= 1e-7);
    }

    #[test]
    fn closed_evolution_conserves_entropy(seed: u64, t in -10.0f64..10.0) {
        let rho = random_density(&[2, 3], 3, RngSeed(seed)).unwrap();
        let h = Hamiltonian::random(&[2, 3], RngSeed(seed ^ 3)).unwrap();
        prop_assert!((vn_entropy(&evolve(&rho, &h, t).unwrap()) - vn_entropy(&rho)).abs() <= 1e-8);
    }

    #[test]
    fn json_round_trip_is_bit_exact(d in 1usize..=6, seed: u64) {
        let rho = random_density(&[d], d, RngSeed(seed)).unwrap();
        let text = to_json_string(&state_to_json(&rho)).unwrap();
        let back = state_from_json(&from_json_str::<MatrixJson>(&text).unwrap()).unwrap();
        prop_assert_eq!(back.matrix(), rho.matrix());
    }
}
