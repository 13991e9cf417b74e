//! Four independent comparison steps, each deviating from common sense with
//! probability αᵢ. The distribution of the number of deviating steps is a
//! Poisson-binomial over four trials.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::report::{number, numbers};

pub const STEPS: usize = 4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MarkovError {
    #[error("alpha {0} outside [0, 0.5): each step must conform more often than it deviates")]
    Alpha(f64),
    #[error("observed shares must be non-negative and sum to 1, got {0:?}")]
    Observed([f64; 5]),
    #[error("sample size must be positive")]
    EmptySample,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovParams {
    alphas: [f64; STEPS],
}

impl MarkovParams {
    pub fn new(alphas: [f64; STEPS]) -> Result<Self, MarkovError> {
        if let Some(&a) = alphas.iter().find(|a| !(**a >= 0.0 && **a < 0.5)) {
            return Err(MarkovError::Alpha(a));
        }
        Ok(MarkovParams { alphas })
    }

    pub fn shared(alpha: f64) -> Result<Self, MarkovError> {
        Self::new([alpha; STEPS])
    }

    pub fn alphas(&self) -> [f64; STEPS] {
        self.alphas
    }

    pub fn betas(&self) -> [f64; STEPS] {
        self.alphas.map(|a| 1.0 - a)
    }
}

pub type DeviationPmf = [f64; STEPS + 1];

/// Exact distribution of the deviation count.
pub fn deviation_pmf(params: &MarkovParams) -> DeviationPmf {
    let mut pmf = [0.0; STEPS + 1];
    pmf[0] = 1.0;
    for (i, &alpha) in params.alphas.iter().enumerate() {
        for k in (0..=i + 1).rev() {
            let stay = pmf[k] * (1.0 - alpha);
            let moved = if k > 0 { pmf[k - 1] * alpha } else { 0.0 };
            pmf[k] = stay + moved;
        }
    }
    pmf
}

/// Empirical deviation shares over `n` simulated participants.
pub fn simulate(params: &MarkovParams, n: usize, seed: u64) -> Result<DeviationPmf, MarkovError> {
    if n == 0 {
        return Err(MarkovError::EmptySample);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = [0usize; STEPS + 1];
    for _ in 0..n {
        let deviated = params
            .alphas
            .iter()
            .filter(|&&a| rng.gen::<f64>() < a)
            .count();
        counts[deviated] += 1;
    }
    Ok(counts.map(|c| c as f64 / n as f64))
}

fn validate_observed(observed: &DeviationPmf) -> Result<(), MarkovError> {
    let total: f64 = observed.iter().sum();
    if observed.iter().any(|p| !(p.is_finite() && *p >= 0.0)) || (total - 1.0).abs() > 1e-6 {
        return Err(MarkovError::Observed(*observed));
    }
    Ok(())
}

fn squared_distance(a: &DeviationPmf, b: &DeviationPmf) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// Largest alpha considered; the open bound 0.5 itself is excluded.
const ALPHA_MAX: f64 = 0.5 - 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaFit {
    pub alpha: f64,
    pub residual: f64,
}

/// Shared α minimizing the squared distance between Binomial(4, α) and `observed`.
///
/// A coarse grid brackets the minimum, golden-section search refines it, and the
/// interval ends are compared explicitly so boundary optima are returned exactly.
pub fn fit_alpha(observed: &DeviationPmf) -> Result<AlphaFit, MarkovError> {
    validate_observed(observed)?;
    let loss = |a: f64| squared_distance(&deviation_pmf(&MarkovParams { alphas: [a; STEPS] }), observed);

    const GRID: usize = 200;
    let step = ALPHA_MAX / GRID as f64;
    let best = (0..=GRID)
        .min_by(|&i, &j| loss(i as f64 * step).total_cmp(&loss(j as f64 * step)))
        .expect("grid is non-empty");
    let mut lo = best.saturating_sub(1) as f64 * step;
    let mut hi = ((best + 1).min(GRID)) as f64 * step;

    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (loss(x1), loss(x2));
    while hi - lo > 1e-12 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = loss(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = loss(x2);
        }
    }
    let candidates = [lo, hi, (lo + hi) / 2.0];
    let alpha = candidates
        .into_iter()
        .min_by(|a, b| loss(*a).total_cmp(&loss(*b)))
        .expect("three candidates");
    Ok(AlphaFit {
        alpha,
        residual: loss(alpha),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepFit {
    pub alphas: [f64; STEPS],
    pub residual: f64,
    /// Always true: four step probabilities cannot be identified from a five-bin
    /// histogram, since the distribution is symmetric in the steps.
    pub underdetermined: bool,
}

/// Per-step alphas by coordinate descent from the shared fit. The answer is one of
/// many equally good ones; see [`StepFit::underdetermined`].
pub fn fit_alphas_per_step(observed: &DeviationPmf) -> Result<StepFit, MarkovError> {
    let shared = fit_alpha(observed)?;
    let mut alphas = [shared.alpha; STEPS];
    let loss = |alphas: [f64; STEPS]| squared_distance(&deviation_pmf(&MarkovParams { alphas }), observed);
    for _sweep in 0..50 {
        for i in 0..STEPS {
            let (mut lo, mut hi) = (0.0, ALPHA_MAX);
            while hi - lo > 1e-10 {
                let m1 = lo + (hi - lo) / 3.0;
                let m2 = hi - (hi - lo) / 3.0;
                let mut a1 = alphas;
                a1[i] = m1;
                let mut a2 = alphas;
                a2[i] = m2;
                if loss(a1) <= loss(a2) {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            let mut trial = alphas;
            trial[i] = (lo + hi) / 2.0;
            if loss(trial) < loss(alphas) {
                alphas = trial;
            }
        }
    }
    Ok(StepFit {
        alphas,
        residual: loss(alphas),
        underdetermined: true,
    })
}

pub fn model_json(params: &MarkovParams, pmf: &DeviationPmf, fit: Option<&AlphaFit>) -> Value {
    let mut out = json!({
        "alphas": numbers(&params.alphas),
        "pmf": numbers(pmf),
    });
    if let Some(fit) = fit {
        out["fit"] = json!({ "alpha": number(fit.alpha), "residual": number(fit.residual) });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shared_alpha_point_one() {
        let pmf = deviation_pmf(&MarkovParams::shared(0.1).unwrap());
        let expected = [0.6561, 0.2916, 0.0486, 0.0036, 0.0001];
        for (p, e) in pmf.iter().zip(expected) {
            assert!((p - e).abs() < 1e-15, "{pmf:?}");
        }
    }

    #[test]
    fn zero_alpha_is_degenerate() {
        let params = MarkovParams::shared(0.0).unwrap();
        assert_eq!(deviation_pmf(&params), [1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(simulate(&params, 100, 7).unwrap(), [1.0, 0.0, 0.0, 0.0, 0.0]);
        let fit = fit_alpha(&[1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(fit.alpha, 0.0);
        assert_eq!(fit.residual, 0.0);
    }

    #[test]
    fn rejects_alpha_at_or_above_half() {
        assert_eq!(MarkovParams::shared(0.6), Err(MarkovError::Alpha(0.6)));
        assert!(MarkovParams::shared(0.5).is_err());
        assert!(MarkovParams::new([0.1, 0.2, -0.1, 0.0]).is_err());
    }

    #[test]
    fn simulation_is_seeded() {
        let params = MarkovParams::new([0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(simulate(&params, 1000, 42), simulate(&params, 1000, 42));
        assert_ne!(simulate(&params, 1000, 42), simulate(&params, 1000, 43));
    }

    #[test]
    fn fit_recovers_shared_alpha() {
        let observed = deviation_pmf(&MarkovParams::shared(0.1).unwrap());
        let fit = fit_alpha(&observed).unwrap();
        assert!((fit.alpha - 0.1).abs() < 1e-6, "{fit:?}");
        assert!(fit.residual < 1e-15);
    }

    #[test]
    fn per_step_fit_is_flagged() {
        let observed = deviation_pmf(&MarkovParams::new([0.05, 0.1, 0.15, 0.2]).unwrap());
        let fit = fit_alphas_per_step(&observed).unwrap();
        assert!(fit.underdetermined);
        assert!(fit.residual <= fit_alpha(&observed).unwrap().residual);
    }
}
