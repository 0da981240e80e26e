use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use relbound::channel::Channel;
use relbound::divergence::{
    affinity_matrix, bhattacharyya_distance, chernoff_distance, fidelity_distance, mu, LogLikelihood,
};
use relbound::linalg::{trace_product_re, CMatrix, Spectrum};
use relbound::optim::{minimize_lambda_max, simplex_minimize, solve_sdp, Constraint, Relation, SdpProgram, SimplexOptions};
use relbound::random::{self, rng};
use relbound::{classical_embed, ns_mapping, pure_state_lift, ClassicalChannel};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(50))]

    #[test]
    fn ns_mapping_reproduces_trace(seed in any::<u64>(), d in 1usize..=4) {
        let mut r = rng(seed);
        let (a, b) = (random::density(d, &mut r), random::density(d, &mut r));
        let pair = ns_mapping(&a, &b).unwrap();
        for k in 1..=9 {
            let s = k as f64 / 10.0;
            let direct = mu(&a, &b, s).unwrap();
            let classical: f64 = pair.q0.iter().zip(&pair.q1).map(|(p, q)| p.powf(1.0 - s) * q.powf(s)).sum();
            prop_assert!((direct - classical.ln()).abs() <= 1e-9);
        }
    }

    #[test]
    fn support_projector_is_idempotent(seed in any::<u64>(), d in 1usize..=4) {
        let mut r = rng(seed);
        let pure = random::unit_vector(d, &mut r);
        let mixed = random::density(d, &mut r);
        let psi = relbound::DensityOperator::pure(&pure).unwrap();
        for s in [&psi, &mixed] {
            let p = s.support_projector();
            prop_assert!((&p * &p - &p).norm() <= 1e-10);
            prop_assert!((trace_product_re(s.matrix(), &p) - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn lift_gram_is_bhattacharyya_affinity(seed in any::<u64>(), nx in 2usize..=5, ny in 2usize..=5) {
        let w = random::classical_channel(nx, ny, 0.4, &mut rng(seed));
        let g = affinity_matrix(&pure_state_lift(&w));
        for x in 0..nx {
            for y in 0..nx {
                let bhatt: f64 = (0..ny).map(|o| (w.prob(x, o) * w.prob(y, o)).sqrt()).sum();
                // affinity of pure states is the squared overlap
                prop_assert!(g[(x, y)] >= 0.0);
                prop_assert!((g[(x, y)].sqrt() - bhatt).abs() <= 1e-12 * 10.0);
            }
        }
    }

    #[test]
    fn distance_chain(seed in any::<u64>(), d in 1usize..=4) {
        let mut r = rng(seed);
        let (a, b) = (random::density(d, &mut r), random::density(d, &mut r));
        let df = fidelity_distance(&a, &b);
        let db = bhattacharyya_distance(&a, &b);
        let dc = chernoff_distance(&a, &b).distance;
        prop_assert!(db - df >= -1e-9);
        prop_assert!(dc - db >= -1e-9);
        prop_assert!(2.0 * df - dc >= -1e-9);
    }

    #[test]
    fn mu_is_convex_and_nonpositive(seed in any::<u64>(), d in 1usize..=4) {
        let mut r = rng(seed);
        let (a, b) = (random::density(d, &mut r), random::density(d, &mut r));
        let ll = LogLikelihood::new(&a, &b).unwrap();
        let m: Vec<f64> = (1..=99).map(|k| ll.mu(k as f64 / 100.0)).collect();
        prop_assert!(m.iter().all(|&v| v <= 1e-12));
        prop_assert!(m.windows(3).all(|w| w[0] + w[2] - 2.0 * w[1] >= -1e-12));
    }

    #[test]
    fn pure_pairs_are_reversible(seed in any::<u64>(), d in 2usize..=4) {
        let mut r = rng(seed);
        let ch = random::pure_channel(2, d, &mut r);
        let (a, b) = (ch.state(0), ch.state(1));
        let c = chernoff_distance(a, b);
        prop_assert!((c.s_star - 0.5).abs() <= 1e-9);
        prop_assert!((c.distance - bhattacharyya_distance(a, b)).abs() <= 1e-9);
    }

    #[test]
    fn embedded_rows_match_scalar_formulas(seed in any::<u64>(), ny in 2usize..=6) {
        let w = random::classical_channel(2, ny, 0.3, &mut rng(seed));
        let ch = classical_embed(&w);
        let (p, q) = (w.row(0), w.row(1));
        let bhatt: f64 = p.iter().zip(&q).map(|(a, b)| (a * b).sqrt()).sum();
        if bhatt > 0.0 {
            prop_assert!((bhattacharyya_distance(ch.state(0), ch.state(1)) + bhatt.ln()).abs() <= 1e-12);
            let s = 0.3;
            let scalar: f64 = p.iter().zip(&q).filter(|(a, b)| **a > 0.0 && **b > 0.0)
                .map(|(a, b)| a.powf(1.0 - s) * b.powf(s)).sum();
            let ll = LogLikelihood::new(ch.state(0), ch.state(1)).unwrap();
            prop_assert!((ll.mu(s) - scalar.ln()).abs() <= 1e-12);
        }
    }

    #[test]
    fn json_round_trip_is_exact(seed in any::<u64>(), nx in 1usize..=4, d in 1usize..=3) {
        let mut r = rng(seed);
        let w = random::classical_channel(nx, d + 1, 0.2, &mut r);
        let c = Channel::Classical(w);
        prop_assert_eq!(Channel::from_json(&c.to_json()).unwrap(), c);
        let q = Channel::Quantum(random::cq_channel(nx, d, &mut r));
        prop_assert_eq!(Channel::from_json(&q.to_json()).unwrap(), q);
    }
}

proptest! {
    #![proptest_config(config(30))]

    #[test]
    fn simplex_iterates_stay_on_simplex(seed in any::<u64>(), n in 1usize..=6) {
        let mut r = rng(seed);
        let target = random::distribution(n, &mut r);
        // ‖p − target‖² with a shifted minimum
        let f = |p: &[f64]| {
            let v: f64 = p.iter().zip(&target).map(|(a, b)| (a - b - 0.1).powi(2)).sum();
            let g = p.iter().zip(&target).map(|(a, b)| 2.0 * (a - b - 0.1)).collect();
            (v, g)
        };
        let res = simplex_minimize(f, n, SimplexOptions::default()).unwrap();
        let p = res.p_star.as_slice();
        prop_assert!(p.iter().all(|&x| x >= 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-15 * n as f64);
    }

    #[test]
    fn lambda_max_is_certified(seed in any::<u64>(), n in 1usize..=4, d in 1usize..=3) {
        let mut r = rng(seed);
        let ops: Vec<CMatrix> = (0..n).map(|_| random::density(d, &mut r).matrix().clone()).collect();
        let lm = minimize_lambda_max(&ops).unwrap();
        let lmax = |p: &[f64]| {
            let m = ops.iter().zip(p).fold(CMatrix::zeros(d, d), |acc, (h, &w)| acc + h * Complex64::from(w));
            Spectrum::of(&m).max()
        };
        prop_assert!(lmax(lm.result.p_star.as_slice()) <= lm.result.value + 1e-9);
        for _ in 0..20 {
            let p = random::distribution(n, &mut r);
            prop_assert!(lmax(&p) >= lm.result.value - 1e-7);
        }
    }

    #[test]
    fn sdp_complementarity(seed in any::<u64>(), n in 2usize..=7) {
        use rand::Rng;
        let mut r = rng(seed);
        // Lovász program: unit diagonal, handle overlap ≥ t, zeros on non-edges
        let mut prog = SdpProgram::new(n + 1, 1);
        prog.objective_scalars.push((0, 1.0));
        for i in 0..=n {
            prog.push(Constraint::entry(i, i, Relation::Eq, 1.0));
        }
        for x in 0..n {
            prog.push(Constraint { matrix: vec![(x, n, 1.0)], scalars: vec![(0, -1.0)], relation: Relation::Ge, rhs: 0.0 });
            for y in x + 1..n {
                if r.random::<f64>() < 0.5 {
                    prog.push(Constraint::entry(x, y, Relation::Eq, 0.0));
                }
            }
        }
        let sol = solve_sdp(&prog).unwrap();
        prop_assert!(sol.complementarity <= 1e-7);
        prop_assert!(sol.gap <= 1e-8 * (1.0 + sol.value.abs()));
        let min_eig = sol.x.clone().symmetric_eigen().eigenvalues.min();
        prop_assert!(min_eig >= -1e-9);
    }
}

#[test]
fn psd_gram_of_identical_states() {
    let w = ClassicalChannel::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
    let g = affinity_matrix(&classical_embed(&w));
    assert_eq!(g, DMatrix::from_element(2, 2, 1.0));
}
