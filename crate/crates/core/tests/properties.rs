use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use surplus_consensus::delay::{
    bisect_crossing, rightmost_root, rightmost_root_oracle, tau_critical, tau_tilde_bound,
};
use surplus_consensus::graph::random::uniform_strongly_connected;
use surplus_consensus::linalg::eigenvalues;
use surplus_consensus::sim::{random_initial_state, simulate, SimConfig, Verdict};
use surplus_consensus::system::{
    find_eps_bar, lambda2_slope, track_lambda2, DEFAULT_NULL_TOLERANCE,
};
use surplus_consensus::{AugmentedSystem, DirectedGraph};

fn any_graph(n: usize, seed: u64, p: f64) -> DirectedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 1..=n {
        for j in 1..=n {
            if i != j && rng.gen::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    DirectedGraph::new(n, edges).unwrap()
}

fn hamiltonian_cycle(n: usize, seed: u64) -> DirectedGraph {
    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let edges = (0..n).map(|k| (order[k], order[(k + 1) % n]));
    DirectedGraph::new(n, edges).unwrap()
}

fn eps_grid() -> Vec<f64> {
    (1..=20).map(|k| k as f64 / 10.0).collect()
}

/// `sum lambda^k` for `k = 1..=kmax`.
fn power_sums(eig: &[Complex64], kmax: i32) -> Vec<Complex64> {
    (1..=kmax)
        .map(|k| eig.iter().map(|z| z.powi(k)).sum())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laplacian_sums_vanish(n in 1usize..10, seed in any::<u64>(), p in 0.0f64..1.0) {
        let g = any_graph(n, seed, p);
        let l = g.laplacians();
        for i in 0..n {
            prop_assert_eq!(l.l_in.row(i).sum(), 0.0);
            prop_assert_eq!(l.l_out.column(i).sum(), 0.0);
        }
        let deg = g.degrees();
        prop_assert_eq!(deg.in_degrees.iter().sum::<usize>(), g.edge_count());
        prop_assert_eq!(deg.out_degrees.iter().sum::<usize>(), g.edge_count());
        let a = g.adjacency();
        for (i, j) in g.edges() {
            prop_assert_eq!(a[(i - 1, j - 1)], 1);
        }
        prop_assert_eq!(a.iter().map(|&v| v as usize).sum::<usize>(), g.edge_count());
    }

    #[test]
    fn laplacian_spectra_of_strongly_connected_graphs(n in 2usize..=8, seed in any::<u64>(), p in 0.2f64..0.9) {
        let g = uniform_strongly_connected(n, p, seed);
        let l = g.laplacians();
        let bound = 2.0 * g.degrees().delta_bar as f64;
        for lap in [&l.l_in, &l.l_out] {
            let eig = eigenvalues(lap).unwrap();
            let nulls = eig.iter().filter(|z| z.norm() <= 1e-9).count();
            prop_assert_eq!(nulls, 1);
            for z in eig.iter().filter(|z| z.norm() > 1e-9) {
                prop_assert!(z.re > 1e-9, "eigenvalue {} too close to the imaginary axis", z);
            }
            for z in &eig {
                prop_assert!(z.norm() <= bound + 1e-9, "Gershgorin violated: {} > {}", z, bound);
            }
        }
    }

    #[test]
    fn balanced_graphs_share_diagonals(n in 2usize..10, seed in any::<u64>(), p in 0.0f64..1.0) {
        let cycle = hamiltonian_cycle(n, seed);
        prop_assert!(cycle.is_balanced());
        for g in [cycle, any_graph(n, seed, p)] {
            if g.is_balanced() {
                let l = g.laplacians();
                prop_assert_eq!(l.l_in.diagonal(), l.l_out.diagonal());
            }
        }
    }

    #[test]
    fn columns_of_m_sum_to_zero(n in 2usize..=8, seed in any::<u64>(), eps in 0.0f64..5.0) {
        let g = any_graph(n, seed, 0.5);
        let sys = AugmentedSystem::new(&g, eps).unwrap();
        prop_assert!(sys.conservation_defect() <= 1e-12);
    }

    #[test]
    fn m0_spectrum_is_union_of_laplacian_spectra(n in 2usize..=7, seed in any::<u64>(), p in 0.2f64..0.9) {
        let g = uniform_strongly_connected(n, p, seed);
        let l = g.laplacians();
        let mut expected = eigenvalues(&(-&l.l_in)).unwrap();
        expected.extend(eigenvalues(&(-&l.l_out)).unwrap());
        let actual = eigenvalues(AugmentedSystem::new(&g, 0.0).unwrap().matrix()).unwrap();
        // power sums are insensitive to the splitting of defective eigenvalues
        let scale = 2.0 * g.degrees().delta_bar as f64;
        let pe = power_sums(&expected, 2 * n as i32);
        let pa = power_sums(&actual, 2 * n as i32);
        for (k, (e, a)) in pe.iter().zip(&pa).enumerate() {
            let tol = 1e-10 * (2 * n) as f64 * scale.powi(k as i32 + 1);
            prop_assert!((e - a).norm() <= tol, "k = {}: {} vs {}", k + 1, e, a);
        }
    }

    #[test]
    fn spectrum_is_conjugate_closed(n in 2usize..=8, seed in any::<u64>(), eps in 0.0f64..3.0) {
        let g = any_graph(n, seed, 0.4);
        let spec = AugmentedSystem::new(&g, eps).unwrap().spectrum(DEFAULT_NULL_TOLERANCE).unwrap();
        prop_assert!(spec.is_conjugate_closed(1e-9));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn first_order_slope_of_lambda2(n in 2usize..=6, seed in any::<u64>(), p in 0.2f64..0.9) {
        let g = uniform_strongly_connected(n, p, seed);
        let slope = lambda2_slope(&g).unwrap();
        prop_assert!(slope < 0.0);
        for eps in [1e-3, 1e-2] {
            let l2 = track_lambda2(&g, eps, 8).unwrap();
            let ratio = l2 / eps;
            prop_assert!(
                (ratio - slope).norm() <= 0.1 * slope.abs(),
                "eps {}: lambda_2/eps = {} vs slope {}", eps, ratio, slope
            );
        }
    }

    #[test]
    fn single_null_eigenvalue_on_admissible_range(n in 2usize..=6, seed in any::<u64>(), p in 0.2f64..0.9) {
        let g = uniform_strongly_connected(n, p, seed);
        let eps_bar = find_eps_bar(&g, &eps_grid(), DEFAULT_NULL_TOLERANCE).unwrap();
        for eps in eps_grid().into_iter().filter(|&e| e <= eps_bar) {
            let spec = AugmentedSystem::new(&g, eps).unwrap().spectrum(DEFAULT_NULL_TOLERANCE).unwrap();
            prop_assert_eq!(spec.null_count(), 1);
        }
    }

    #[test]
    fn crossing_matches_delay_margin(n in 2usize..=6, seed in any::<u64>(), p in 0.2f64..0.9, frac in 0.05f64..1.0) {
        let g = uniform_strongly_connected(n, p, seed);
        let eps_bar = find_eps_bar(&g, &eps_grid(), DEFAULT_NULL_TOLERANCE).unwrap();
        let eps = (frac * eps_bar).max(0.1);
        let spec = AugmentedSystem::new(&g, eps).unwrap().spectrum(DEFAULT_NULL_TOLERANCE).unwrap();
        let margin = tau_critical(&spec).unwrap();
        let tc = margin.tau_c;
        let below = rightmost_root(&spec, tc * (1.0 - 1e-3), 2).unwrap().root.re;
        let above = rightmost_root(&spec, tc * (1.0 + 1e-3), 2).unwrap().root.re;
        prop_assert!(below < 0.0 && above > 0.0, "no sign change around {}: {} {}", tc, below, above);
        let t = bisect_crossing(&spec, 0.5 * tc, 1.5 * tc, 1e-9, 2).unwrap();
        prop_assert!((t - tc).abs() <= 1e-6 * tc, "bisection {} vs tau_c {}", t, tc);
        // at the margin the root sits on the axis at omega = |lambda_i|
        let at = rightmost_root(&spec, tc, 2).unwrap().root;
        prop_assert!(at.re.abs() < 1e-9);
        prop_assert!((at.im.abs() - margin.crossing_frequency).abs() < 1e-8);
    }

    #[test]
    fn branch_window_two_is_enough(n in 2usize..=6, seed in any::<u64>(), eps in 0.1f64..2.0, tau in 0.01f64..1.0) {
        let g = uniform_strongly_connected(n, 0.5, seed);
        let spec = AugmentedSystem::new(&g, eps).unwrap().spectrum(DEFAULT_NULL_TOLERANCE).unwrap();
        let narrow = rightmost_root(&spec, tau, 2).unwrap();
        let wide = rightmost_root(&spec, tau, 5).unwrap();
        prop_assert!((narrow.root - wide.root).norm() <= 1e-9);
        prop_assert!(narrow.residual <= 1e-10);
    }

    #[test]
    fn bound_is_below_margin_at_weak_coupling(n in 2usize..=6, seed in any::<u64>(), p in 0.2f64..0.9) {
        let g = uniform_strongly_connected(n, p, seed);
        let bound = tau_tilde_bound(&g).unwrap();
        for eps in [1e-3, 1e-2] {
            let spec = AugmentedSystem::new(&g, eps).unwrap().spectrum(DEFAULT_NULL_TOLERANCE).unwrap();
            let tc = tau_critical(&spec).unwrap().tau_c;
            prop_assert!(bound <= tc, "bound {} above tau_c({}) = {}", bound, eps, tc);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn oracle_agrees_with_lambert_roots(n in 2usize..=5, seed in any::<u64>(), frac in 0.05f64..1.9) {
        let g = uniform_strongly_connected(n, 0.5, seed);
        let eps_bar = find_eps_bar(&g, &eps_grid(), DEFAULT_NULL_TOLERANCE).unwrap();
        let eps = eps_bar.min(1.0);
        let sys = AugmentedSystem::new(&g, eps).unwrap();
        let spec = sys.spectrum(DEFAULT_NULL_TOLERANCE).unwrap();
        let tau = frac * tau_critical(&spec).unwrap().tau_c;
        let lw = rightmost_root(&spec, tau, 2).unwrap().root;
        let ps = rightmost_root_oracle(&sys, tau, 30).unwrap();
        prop_assert!((lw.re - ps.re).abs() <= 1e-6, "{} vs {}", lw, ps);
    }

    #[test]
    fn delayed_runs_conserve_the_total(n in 2usize..=6, seed in any::<u64>(), frac in 0.2f64..1.5) {
        let g = uniform_strongly_connected(n, 0.5, seed);
        let eps = 0.5;
        let sys = AugmentedSystem::new(&g, eps).unwrap();
        let spec = sys.spectrum(DEFAULT_NULL_TOLERANCE).unwrap();
        let tau = ((frac * tau_critical(&spec).unwrap().tau_c) * 100.0).round().max(1.0) / 100.0;
        let mut cfg = SimConfig::new(eps, tau, 20.0, random_initial_state(n, seed));
        cfg.z0 = random_initial_state(n, seed ^ 1);
        let traj = simulate(&sys, &cfg).unwrap();
        if !matches!(traj.verdict, Verdict::Diverged { .. }) {
            let total: f64 = cfg.x0.iter().chain(&cfg.z0).sum();
            prop_assert!(traj.max_conservation_drift() <= 1e-6 * (1.0 + total.abs()));
        }
    }
}

#[test]
fn bound_is_not_conservative_at_strong_coupling() {
    // the directed 3-cycle: the margin drops below the bound well inside (0, 2]
    let g = DirectedGraph::new(3, [(1, 2), (2, 3), (3, 1)]).unwrap();
    let bound = tau_tilde_bound(&g).unwrap();
    let spec = AugmentedSystem::new(&g, 1.8)
        .unwrap()
        .spectrum(DEFAULT_NULL_TOLERANCE)
        .unwrap();
    assert!(tau_critical(&spec).unwrap().tau_c < bound);
    let spec = AugmentedSystem::new(&g, 1e-3)
        .unwrap()
        .spectrum(DEFAULT_NULL_TOLERANCE)
        .unwrap();
    assert!(tau_critical(&spec).unwrap().tau_c > bound);
}

#[test]
fn derivative_is_exact_perturbation() {
    let g = DirectedGraph::six_agent_example();
    let m0 = AugmentedSystem::new(&g, 0.0).unwrap();
    for eps in [0.25, 1.1, 3.0] {
        let m = AugmentedSystem::new(&g, eps).unwrap();
        let d: DMatrix<f64> = m0.matrix() + surplus_consensus::system::epsilon_derivative(6) * eps;
        assert_eq!(m.matrix(), &d);
    }
}
