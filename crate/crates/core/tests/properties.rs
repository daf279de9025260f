use extremalflow::analysis::{default_tolerance, energy, sgn_word};
use extremalflow::analytic::{initial_curve, InitialFamily, Phi};
use extremalflow::evolve::step_graph;
use extremalflow::{ProblemParams64, StepControl64};
use proptest::prelude::*;

fn profile(sigma: f64, phi: Phi) -> extremalflow::GraphProfile64 {
    let p = ProblemParams64::new(1.0, 0.5, 61).unwrap();
    initial_curve(&InitialFamily::new(p, phi, sigma).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn one_step_lowers_the_energy(sigma in 0.0f64..3.0, parabola in any::<bool>()) {
        let phi = if parabola { Phi::Parabola } else { Phi::Cosine };
        let g = profile(sigma, phi);
        let (g2, dt) = step_graph(&g, &StepControl64::default()).unwrap();
        let (_, _, e0) = energy(&g.to_sampled(), 1.0);
        let (_, _, e1) = energy(&g2.to_sampled(), 1.0);
        prop_assert!(dt > 0.0);
        prop_assert!(e1 <= e0 + 1e-14);
    }

    #[test]
    fn swapping_curves_flips_the_word(s1 in -1.0f64..6.0, s2 in -1.0f64..6.0) {
        prop_assume!((s1 - s2).abs() > 1e-3);
        let (a, b) = (profile(s1, Phi::Cosine).to_sampled(), profile(s2, Phi::Cosine).to_sampled());
        let tol = default_tolerance(&ProblemParams64::new(1.0, 0.5, 61).unwrap());
        let w = sgn_word(&a, &b, tol).unwrap();
        prop_assert_eq!(sgn_word(&b, &a, tol).unwrap(), w.flipped());
        prop_assert_eq!(w.len(), 1);
    }
}
