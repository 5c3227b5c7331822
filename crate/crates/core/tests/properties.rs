//! Property tests over seeded random inputs.

mod common;

use entcost::channels::{choi, dephasing, depolarizing, kraus_from_choi, max_entangled, ChoiState};
use entcost::cost::{ec1_general, ec1_qubit, security_threshold, simulation_error, simulation_error_peak};
use entcost::entanglement::{concurrence_2q, eof_2q, eof_numeric, one_shot_cost_bounds, SearchOptions};
use entcost::entropy::{
    classical_h0_cond, classical_smooth_h0_cond, cond_von_neumann, h0, h0_cond_cq, von_neumann, CQState, ClassicalJoint,
};
use entcost::qmat::{
    fidelity, herm_eig, purified_distance, reassemble, schmidt, tensor, trace_norm, CMatrix, DensityMatrix,
};
use entcost::random::{gaussian_matrix, random_channel, random_density, random_pure, random_unitary, seeded_rng};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn conjugate(u: &CMatrix, rho: &DensityMatrix) -> DensityMatrix {
    let m = &(u * rho.mat()) * &u.adjoint();
    DensityMatrix::new(rho.dims().to_vec(), m.hermitian_part()).unwrap()
}

fn rank_upto(rng: &mut impl Rng, d: usize) -> usize {
    rng.random_range(1..=d)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn tensor_is_associative(seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let (a, b, c) = (gaussian_matrix(2, 2, &mut rng), gaussian_matrix(2, 2, &mut rng), gaussian_matrix(2, 2, &mut rng));
        let left = tensor(&tensor(&a, &b), &c);
        let right = tensor(&a, &tensor(&b, &c));
        prop_assert!(left.max_abs_diff(&right) <= 1e-12);
    }

    #[test]
    fn partial_trace_of_product(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
        let mut rng = seeded_rng(seed);
        let rho = random_density(&[da], rank_upto(&mut rng, da), &mut rng);
        let sigma = random_density(&[db], rank_upto(&mut rng, db), &mut rng);
        let reduced = rho.tensor(&sigma).partial_trace(&[0]).unwrap();
        prop_assert!(reduced.mat().max_abs_diff(rho.mat()) <= 1e-10);
    }

    #[test]
    fn hermitian_eigendecomposition_reconstructs(seed in any::<u64>(), n in 1usize..=16) {
        let mut rng = seeded_rng(seed);
        let h = gaussian_matrix(n, n, &mut rng).hermitian_part();
        let eig = herm_eig(&h).unwrap();
        prop_assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(reassemble(&eig.vectors, &eig.values).max_abs_diff(&h) <= 1e-8);
        let v = &eig.vectors;
        prop_assert!((&v.adjoint() * v).max_abs_diff(&CMatrix::identity(n)) <= 1e-9);
    }

    #[test]
    fn purified_distance_sandwich(seed in any::<u64>(), d in 2usize..5) {
        let mut rng = seeded_rng(seed);
        let rho = random_density(&[d], rank_upto(&mut rng, d), &mut rng);
        let sigma = random_density(&[d], rank_upto(&mut rng, d), &mut rng);
        let l1 = trace_norm(&(rho.mat() - sigma.mat())).unwrap();
        let p = purified_distance(&rho, &sigma).unwrap();
        prop_assert!(0.5 * l1 <= p + 1e-9);
        prop_assert!(p <= (l1 + (rho.trace() - sigma.trace()).abs()).sqrt() + 1e-9);
    }

    #[test]
    fn fidelity_symmetric_and_unitarily_invariant(seed in any::<u64>(), d in 2usize..5) {
        let mut rng = seeded_rng(seed);
        let rho = random_density(&[d], rank_upto(&mut rng, d), &mut rng);
        let sigma = random_density(&[d], rank_upto(&mut rng, d), &mut rng);
        let f = fidelity(&rho, &sigma).unwrap();
        prop_assert!((f - fidelity(&sigma, &rho).unwrap()).abs() <= 1e-9);
        let u = random_unitary(d, &mut rng);
        prop_assert!((f - fidelity(&conjugate(&u, &rho), &conjugate(&u, &sigma)).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn schmidt_reconstructs(seed in any::<u64>(), da in 1usize..5, db in 1usize..5) {
        let mut rng = seeded_rng(seed);
        let psi = random_pure(&[da, db], &mut rng);
        let s = schmidt(&psi).unwrap();
        let total: f64 = s.coefficients.iter().map(|c| c * c).sum();
        prop_assert!((total - 1.0).abs() <= 1e-9);
        prop_assert!(s.coefficients.windows(2).all(|w| w[0] >= w[1]));
        let err = s.reconstruct().iter().zip(psi.amplitudes()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-8);
    }

    #[test]
    fn choi_round_trip(seed in any::<u64>(), din in 1usize..4, dout in 1usize..4, k in 1usize..5) {
        let mut rng = seeded_rng(seed);
        let ch = random_channel(din, dout, k.max(din.div_ceil(dout)), &mut rng);
        let c = choi(&ch);
        let rebuilt = choi(&kraus_from_choi(&c).unwrap());
        prop_assert!(0.5 * trace_norm(&(rebuilt.state().mat() - c.state().mat())).unwrap() <= 1e-8);
        // the output marginal is I/d_in
        let marginal = c.state().partial_trace(&[1]).unwrap();
        prop_assert!(marginal.mat().max_abs_diff(&CMatrix::identity(din).scale_real(1.0 / din as f64)) <= 1e-9);
        prop_assert!(ChoiState::new(din, dout, c.state().clone()).is_ok());
    }

    #[test]
    fn channels_preserve_trace_and_positivity(seed in any::<u64>(), din in 1usize..4, dout in 1usize..4, k in 1usize..4) {
        let mut rng = seeded_rng(seed);
        let ch = random_channel(din, dout, k.max(din.div_ceil(dout)), &mut rng);
        let rho = random_density(&[din, 2], rank_upto(&mut rng, 2 * din), &mut rng);
        let out = ch.apply(&rho).unwrap();
        prop_assert!((out.trace() - 1.0).abs() <= 1e-9);
        prop_assert!(out.eigenvalues().iter().all(|&l| l >= -1e-9));
    }

    #[test]
    fn cq_log_rank_dominates_von_neumann(seed in any::<u64>(), da in 1usize..4, k in 1usize..4) {
        let mut rng = seeded_rng(seed);
        let mut weights: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 0.05).collect();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let branches = weights.into_iter().map(|w| (w, random_density(&[da], rank_upto(&mut rng, da), &mut rng))).collect();
        let cq = CQState::new(branches).unwrap();
        prop_assert!(h0_cond_cq(&cq) >= cond_von_neumann(&cq.block_state()).unwrap() - 1e-9);
    }

    #[test]
    fn log_rank_mixing_subadditivity(seed in any::<u64>(), d in 1usize..5, n in 1usize..5) {
        let mut rng = seeded_rng(seed);
        let parts: Vec<DensityMatrix> = (0..n).map(|_| { let r = rank_upto(&mut rng, d); random_density(&[d], r, &mut rng) }).collect();
        let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.01).collect();
        let total: f64 = w.iter().sum();
        let mut mix = CMatrix::zeros(d, d);
        for (wi, p) in w.iter().zip(&parts) {
            mix = &mix + &p.mat().scale_real(wi / total);
        }
        let mix = DensityMatrix::new(vec![d], mix.hermitian_part()).unwrap();
        let bound = parts.iter().map(h0).fold(f64::NEG_INFINITY, f64::max) + (n as f64).log2();
        prop_assert!(h0(&mix) <= bound + 1e-12);
    }

    #[test]
    fn smoothing_is_monotone_and_exact(seed in any::<u64>(), nx in 1usize..5, ny in 1usize..4) {
        let mut rng = seeded_rng(seed);
        let w: Vec<f64> = (0..nx * ny).map(|_| if rng.random_bool(0.25) { 0.0 } else { rng.random::<f64>() }).collect();
        let total: f64 = w.iter().sum::<f64>().max(1e-300);
        let p = ClassicalJoint::new(nx, ny, w.iter().map(|x| x / total).collect()).unwrap();
        prop_assert_eq!(classical_smooth_h0_cond(&p, 0.0).unwrap(), classical_h0_cond(&p));
        let mut prev = f64::INFINITY;
        for eps in [0.0, 0.01, 0.05, 0.1, 0.2, 0.35, 0.5, 0.8, 1.0] {
            let v = classical_smooth_h0_cond(&p, eps).unwrap();
            prop_assert!(v <= prev);
            prop_assert_eq!(v, common::brute_force_smooth_h0(&p.columns(), eps));
            prev = v;
        }
    }

    #[test]
    fn von_neumann_invariance_and_additivity(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
        let mut rng = seeded_rng(seed);
        let rho = random_density(&[da], rank_upto(&mut rng, da), &mut rng);
        let sigma = random_density(&[db], rank_upto(&mut rng, db), &mut rng);
        let u = random_unitary(da, &mut rng);
        prop_assert!((von_neumann(&conjugate(&u, &rho)) - von_neumann(&rho)).abs() <= 1e-9);
        prop_assert!((von_neumann(&rho.tensor(&sigma)) - von_neumann(&rho) - von_neumann(&sigma)).abs() <= 1e-9);
    }

    #[test]
    fn concurrence_is_multiplicative(seed in any::<u64>(), k in 1usize..5) {
        let mut rng = seeded_rng(seed);
        let ch = random_channel(2, 2, k, &mut rng);
        let psi = random_pure(&[2, 2], &mut rng);
        let lhs = concurrence_2q(&ch.apply(&psi.density()).unwrap()).unwrap();
        let rhs = concurrence_2q(choi(&ch).state()).unwrap() * concurrence_2q(&psi.density()).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-8);
    }

    #[test]
    fn concurrence_matches_reference(seed in any::<u64>(), rank in 1usize..=4) {
        let mut rng = seeded_rng(seed);
        let rho = random_density(&[2, 2], rank, &mut rng);
        prop_assert!((concurrence_2q(&rho).unwrap() - common::reference_concurrence(&rho)).abs() <= 1e-8);
    }

    #[test]
    fn eof_is_continuous(seed in any::<u64>(), t in 0.0f64..0.05) {
        let mut rng = seeded_rng(seed);
        let rho = random_density(&[2, 2], rank_upto(&mut rng, 4), &mut rng);
        let tau = random_density(&[2, 2], 4, &mut rng);
        let sigma = DensityMatrix::new(vec![2, 2], (&rho.mat().scale_real(1.0 - t) + &tau.mat().scale_real(t)).hermitian_part()).unwrap();
        let eps = purified_distance(&rho, &sigma).unwrap();
        prop_assume!(eps <= 0.05);
        let bound = 8.0 * eps * 1.0 + 2.0 * common::reference_binary_entropy(2.0 * eps);
        prop_assert!((eof_2q(&rho).unwrap() - eof_2q(&sigma).unwrap()).abs() <= bound);
    }

    #[test]
    fn qubit_thresholds(seed in any::<u64>(), k in 1usize..5) {
        let mut rng = seeded_rng(seed);
        let ch = random_channel(2, 2, k, &mut rng);
        prop_assert!(security_threshold(&ch).unwrap().value() >= 0.5);
        let g = ec1_general(&ch, 2, seed).unwrap();
        prop_assert!(g.certified);
        prop_assert_eq!(g.value, ec1_qubit(&ch).unwrap());
    }

    #[test]
    fn family_thresholds_agree_with_ppt(r in 0.0f64..=1.0) {
        for ch in [dephasing(r).unwrap(), depolarizing(r).unwrap(), entcost::channels::amplitude_damping(r).unwrap()] {
            let eb = entcost::channels::is_entanglement_breaking_qubit(&ch).unwrap();
            let c = common::reference_concurrence(choi(&ch).state());
            // away from the threshold band both tests are decisive
            prop_assume!(c > 1e-6 || c == 0.0);
            prop_assert_eq!(eb, ec1_qubit(&ch).unwrap() == 0.0);
        }
    }

    #[test]
    fn simulation_error_decays_past_peak(delta1 in 0.2f64..2.0, da in 1usize..4, db in 1usize..4) {
        let n0 = simulation_error_peak(delta1, da, db).ceil() as u64;
        let mut prev = simulation_error(n0, delta1, da, db).unwrap();
        for n in [n0 + 1, n0 + 10, 2 * n0 + 100, 10 * n0 + 1000] {
            let v = simulation_error(n, delta1, da, db).unwrap();
            prop_assert!(v <= prev * (1.0 + 1e-12));
            prev = v;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn numeric_eof_brackets(seed in any::<u64>(), rank in 1usize..=4) {
        let mut rng = seeded_rng(seed);
        let rho = random_density(&[2, 2], rank, &mut rng);
        let r = eof_numeric(&rho, &SearchOptions { restarts: 3, seed, ..Default::default() }).unwrap();
        prop_assert!(r.value >= eof_2q(&rho).unwrap() - 1e-9);
        prop_assert!(r.value >= 0.0 && r.value <= 1.0 + 1e-12);
        prop_assert!(r.decomposition.len() <= rank * rank);
    }

    #[test]
    fn numeric_eof_on_qubit_qutrit(seed in any::<u64>(), rank in 1usize..=3) {
        let mut rng = seeded_rng(seed);
        let rho = random_density(&[2, 3], rank, &mut rng);
        let r = eof_numeric(&rho, &SearchOptions { restarts: 2, seed, ..Default::default() }).unwrap();
        prop_assert!(r.value >= -1e-12 && r.value <= 1.0 + 1e-12);
        let back = r.decomposition.mixture();
        prop_assert!(0.5 * trace_norm(&(&back - rho.mat())).unwrap() <= 1e-8);
    }

    #[test]
    fn one_shot_upper_nonincreasing_in_eps(seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let rho = random_density(&[2, 2], 2, &mut rng);
        let opts = SearchOptions { restarts: 2, seed, ..Default::default() };
        let mut prev = f64::INFINITY;
        for eps in [0.0, 0.02, 0.1, 0.3, 0.6, 1.0] {
            let b = one_shot_cost_bounds(&rho, eps, &opts).unwrap();
            prop_assert!(b.lower <= b.upper);
            prop_assert!(b.upper <= prev);
            prev = b.upper;
        }
        // the log-rank objective is nonnegative on any genuine decomposition
        prop_assert!(one_shot_cost_bounds(&rho, 0.0, &opts).unwrap().upper >= 0.0);
    }

    #[test]
    fn separable_mixtures_have_zero_eof(seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let mut mix = CMatrix::zeros(4, 4);
        let mut total = 0.0;
        for _ in 0..2 {
            let a = random_pure(&[2], &mut rng);
            let b = random_pure(&[2], &mut rng);
            let w = rng.random::<f64>() + 0.1;
            total += w;
            let v: Vec<Complex64> = entcost::qmat::tensor_vec(a.amplitudes(), b.amplitudes());
            mix = &mix + &CMatrix::outer(&v).scale_real(w);
        }
        let rho = DensityMatrix::new(vec![2, 2], mix.scale_real(1.0 / total).hermitian_part()).unwrap();
        let r = eof_numeric(&rho, &SearchOptions { restarts: 6, seed, ..Default::default() }).unwrap();
        prop_assert!(r.value <= 1e-6, "value {}", r.value);
    }
}

#[test]
fn max_entangled_marginals_are_maximally_mixed() {
    for d in 2..5 {
        let rho = max_entangled(d).density().partial_trace(&[0]).unwrap();
        assert!(rho.mat().max_abs_diff(&CMatrix::identity(d).scale_real(1.0 / d as f64)) < 1e-12);
    }
}
