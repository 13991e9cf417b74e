use dast_core::markov::{
    deviation_pmf, fit_alpha, fit_alphas_per_step, simulate, DeviationPmf, MarkovError, MarkovParams, STEPS,
};
use proptest::prelude::*;

/// Sum over all 2⁴ deviate/conform paths.
fn enumerate(alphas: [f64; STEPS]) -> DeviationPmf {
    let mut pmf = [0.0; STEPS + 1];
    for path in 0u32..1 << STEPS {
        let p: f64 = (0..STEPS)
            .map(|i| if path >> i & 1 == 1 { alphas[i] } else { 1.0 - alphas[i] })
            .product();
        pmf[path.count_ones() as usize] += p;
    }
    pmf
}

#[test]
fn shared_alpha_point_one() {
    let pmf = deviation_pmf(&MarkovParams::shared(0.1).unwrap());
    for (got, want) in pmf.iter().zip([0.6561, 0.2916, 0.0486, 0.0036, 0.0001]) {
        assert!((got - want).abs() < 1e-12);
    }
}

#[test]
fn degenerate_and_invalid_alphas() {
    assert_eq!(deviation_pmf(&MarkovParams::shared(0.0).unwrap()), [1.0, 0.0, 0.0, 0.0, 0.0]);
    assert_eq!(MarkovParams::shared(0.6), Err(MarkovError::Alpha(0.6)));
    assert_eq!(MarkovParams::shared(0.5), Err(MarkovError::Alpha(0.5)));
    assert!(MarkovParams::new([0.1, -0.1, 0.1, 0.1]).is_err());
}

#[test]
fn simulation_is_seeded() {
    let params = MarkovParams::new([0.1, 0.2, 0.3, 0.05]).unwrap();
    assert_eq!(simulate(&params, 5000, 3).unwrap(), simulate(&params, 5000, 3).unwrap());
    assert_ne!(simulate(&params, 5000, 3).unwrap(), simulate(&params, 5000, 4).unwrap());
    assert_eq!(simulate(&params, 0, 1), Err(MarkovError::EmptySample));
}

#[test]
fn simulation_converges() {
    let params = MarkovParams::new([0.12, 0.3, 0.05, 0.2]).unwrap();
    let exact = deviation_pmf(&params);
    let sampled = simulate(&params, 200_000, 42).unwrap();
    for (s, e) in sampled.iter().zip(exact) {
        assert!((s - e).abs() < 0.01, "{sampled:?} vs {exact:?}");
    }
}

#[test]
fn fit_recovers_grid_alphas() {
    for i in 0..200 {
        let alpha = i as f64 * 0.0025;
        let pmf = deviation_pmf(&MarkovParams::shared(alpha).unwrap());
        let fit = fit_alpha(&pmf).unwrap();
        assert!((fit.alpha - alpha).abs() < 1e-6, "alpha {alpha}: fitted {}", fit.alpha);
        assert!(fit.residual < 1e-12);
    }
}

#[test]
fn per_step_fit_is_flagged() {
    let pmf = deviation_pmf(&MarkovParams::shared(0.2).unwrap());
    let fit = fit_alphas_per_step(&pmf).unwrap();
    assert!(fit.underdetermined);
    assert!(fit.residual < 1e-12);
}

#[test]
fn fit_rejects_bad_histograms() {
    assert!(fit_alpha(&[0.5, 0.5, 0.5, 0.0, 0.0]).is_err());
    assert!(fit_alpha(&[1.2, -0.2, 0.0, 0.0, 0.0]).is_err());
}

proptest! {
    #[test]
    fn pmf_matches_enumeration(alphas in prop::array::uniform4(0.0f64..0.4999)) {
        let pmf = deviation_pmf(&MarkovParams::new(alphas).unwrap());
        let oracle = enumerate(alphas);
        for (a, b) in pmf.iter().zip(oracle) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn fit_recovers_any_alpha(alpha in 0.0f64..0.4999) {
        let pmf = deviation_pmf(&MarkovParams::shared(alpha).unwrap());
        let fit = fit_alpha(&pmf).unwrap();
        prop_assert!((fit.alpha - alpha).abs() < 1e-6);
    }
}
