use num_complex::Complex64;
use proptest::prelude::*;

use relbound::divergence::LogLikelihood;
use relbound::exponents::{r_infinity, r_infinity_classical, Expurgated, Gallager};
use relbound::hypotest::hoeffding_exponent;
use relbound::linalg::{trace_product_re, trace_re, CMatrix, Spectrum};
use relbound::random::{self, rng};
use relbound::theta::{confusability_graph, degree_bounds, lovasz_theta, theta_rho};
use relbound::{classical_embed, fractional_power, CQChannel};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn small_channel(seed: u64, kind: u8) -> CQChannel {
    let mut r = rng(seed);
    match kind {
        0 => classical_embed(&random::classical_channel(3, 3, 0.3, &mut r)),
        1 => random::pure_channel(3, 2, &mut r),
        _ => random::cq_channel(3, 2, &mut r),
    }
}

proptest! {
    #![proptest_config(config(20))]

    #[test]
    fn e0_optimizer_satisfies_kkt(seed in any::<u64>(), kind in 0u8..3, rho in 0.1f64..3.0) {
        let ch = small_channel(seed, kind);
        let rep = Gallager::new(&ch).e0_max(rho).unwrap();
        let p = rep.optimizer_p.as_slice();
        let alpha = 1.0 / (1.0 + rho);
        let powers: Vec<CMatrix> = ch.states().iter().map(|s| fractional_power(s, alpha).unwrap()).collect();
        let a = powers.iter().zip(p).fold(CMatrix::zeros(ch.dim(), ch.dim()), |acc, (m, &w)| acc + m * Complex64::from(w));
        let spec = Spectrum::of(&a);
        let a_rho = spec.map(|v| if v > 0.0 { v.powf(rho) } else { 0.0 });
        let total = trace_re(&spec.map(|v| if v > 0.0 { v.powf(1.0 + rho) } else { 0.0 }));
        for (x, m) in powers.iter().enumerate() {
            let grad = trace_product_re(m, &a_rho);
            prop_assert!(grad >= total - 1e-6, "x = {x}: {grad} < {total}");
            if p[x] > 1e-4 {
                prop_assert!((grad - total).abs() <= 1e-5 * total.max(1.0));
            }
        }
    }

    #[test]
    fn random_coding_below_sphere_packing(seed in any::<u64>(), kind in 0u8..3, frac in 0.05f64..0.95) {
        let ch = small_channel(seed, kind);
        let gal = Gallager::new(&ch);
        // capacity is E₀ slope at ρ = 0; stay below it via r_ρ at small ρ
        let r = frac * gal.r_rho(1e-3).unwrap();
        let er = gal.er(r).unwrap().value;
        let esp = gal.esp(r).unwrap().value;
        prop_assert!(er <= esp + 1e-6, "er {er} > esp {esp}");
    }

    #[test]
    fn expurgation_helps_below_critical_rate(seed in any::<u64>(), kind in 0u8..3, frac in 0.05f64..0.95) {
        let ch = small_channel(seed, kind);
        let gal = Gallager::new(&ch);
        let r = frac * gal.r_rho(1.0).unwrap();
        let er = gal.er(r).unwrap();
        prop_assume!(er.parameter >= 1.0 - 1e-9);
        let eex = Expurgated::new(&ch).eex(r).unwrap().value;
        prop_assert!(eex >= er.value - 1e-6, "eex {eex} < er {}", er.value);
    }

    #[test]
    fn classical_r_infinity_agrees_with_lambda_max(seed in any::<u64>(), nx in 2usize..=4, ny in 2usize..=4) {
        let w = random::classical_channel(nx, ny, 0.5, &mut rng(seed));
        let lp = r_infinity_classical(&w).value;
        let sdp = r_infinity(&classical_embed(&w)).unwrap().value;
        prop_assert!((lp - sdp).abs() <= 1e-6, "{lp} vs {sdp}");
    }

    #[test]
    fn theta_is_non_increasing_and_admissible(seed in any::<u64>(), kind in 0u8..3) {
        let ch = small_channel(seed, kind);
        let g = Expurgated::new(&ch).affinities().clone();
        let mut last = f64::INFINITY;
        for rho in [1.0, 1.5, 2.0, 4.0, 8.0, 32.0] {
            let (theta, rep) = theta_rho(&ch, rho).unwrap();
            prop_assert!(theta <= last + 1e-7);
            prop_assert!(rep.max_violation(&degree_bounds(&g, rho)) <= 1e-8);
            last = theta;
        }
    }

    #[test]
    fn theta_tends_to_lovasz(seed in any::<u64>(), kind in 0u8..3) {
        let ch = small_channel(seed, kind);
        let (far, _) = theta_rho(&ch, 1e5).unwrap();
        let (lovasz, _) = lovasz_theta(&confusability_graph(&ch)).unwrap();
        prop_assert!((far - lovasz).abs() <= 1e-3, "{far} vs {lovasz}");
    }

    #[test]
    fn theta_matches_expurgated_when_bounds_are_psd(seed in any::<u64>(), rho in 1.0f64..6.0) {
        let ch = classical_embed(&random::classical_channel(3, 4, 0.0, &mut rng(seed)));
        let ex = Expurgated::new(&ch);
        let bounds = degree_bounds(ex.affinities(), rho);
        prop_assume!(bounds.clone().symmetric_eigen().eigenvalues.min() >= 1e-9);
        let (theta, _) = theta_rho(&ch, rho).unwrap();
        let jelinek = ex.ex_max(rho).unwrap().value / rho;
        prop_assert!((theta - jelinek).abs() <= 1e-5, "{theta} vs {jelinek}");
    }

    #[test]
    fn hoeffding_is_convex_and_non_increasing(seed in any::<u64>(), d in 1usize..=3) {
        let mut r = rng(seed);
        let (a, b) = (random::density(d, &mut r), random::density(d, &mut r));
        let floor = -LogLikelihood::new(&a, &b).unwrap().mu(1.0);
        prop_assert!(hoeffding_exponent(&a, &b, floor + 1e-3).unwrap().is_finite());
        let rs: Vec<f64> = (1..=12).map(|k| floor + 0.05 * k as f64).collect();
        let es: Vec<f64> = rs.iter().map(|&x| hoeffding_exponent(&a, &b, x).unwrap()).collect();
        prop_assert!(es.windows(2).all(|w| w[1] <= w[0] + 1e-9));
        prop_assert!(es.windows(3).all(|w| w[0] + w[2] - 2.0 * w[1] >= -1e-6));
    }
}
