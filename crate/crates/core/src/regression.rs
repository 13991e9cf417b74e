//! Ordinary least squares on (x, y) points.

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RegressionError {
    #[error("need at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("x values are all equal")]
    DegenerateX,
    #[error("exponential fit needs positive y, got {0}")]
    NonPositiveY(f64),
    #[error("points must be finite")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// 1 − SS_res/SS_tot; 0 when y is constant.
    pub r_squared: f64,
}

impl LinearFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

pub fn linear_regression(points: &[(f64, f64)]) -> Result<LinearFit, RegressionError> {
    if points.len() < 2 {
        return Err(RegressionError::TooFewPoints(points.len()));
    }
    if points.iter().any(|(x, y)| !(x.is_finite() && y.is_finite())) {
        return Err(RegressionError::NonFinite);
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if sxx == 0.0 {
        return Err(RegressionError::DegenerateX);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_tot: f64 = points.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    let r_squared = if ss_tot == 0.0 { 0.0 } else { 1.0 - ss_res / ss_tot };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialFit {
    pub amplitude: f64,
    pub rate: f64,
    /// Coefficient of determination of the fit of ln y on x.
    pub r_squared: f64,
}

/// Fit `y = amplitude · e^(rate · x)` by least squares on `(x, ln y)`.
pub fn exponential_fit(points: &[(f64, f64)]) -> Result<ExponentialFit, RegressionError> {
    if let Some(&(_, y)) = points.iter().find(|p| p.1.is_nan() || p.1 <= 0.0) {
        return Err(RegressionError::NonPositiveY(y));
    }
    let logged: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x, y.ln())).collect();
    let fit = linear_regression(&logged)?;
    Ok(ExponentialFit {
        amplitude: fit.intercept.exp(),
        rate: fit.slope,
        r_squared: fit.r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let fit = linear_regression(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]).unwrap();
        assert_eq!((fit.slope, fit.intercept, fit.r_squared), (2.0, 1.0, 1.0));
    }

    #[test]
    fn constant_y_has_zero_r_squared() {
        let fit = linear_regression(&[(0.0, 4.0), (1.0, 4.0), (5.0, 4.0)]).unwrap();
        assert_eq!((fit.slope, fit.r_squared), (0.0, 0.0));
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(linear_regression(&[(1.0, 2.0)]), Err(RegressionError::TooFewPoints(1)));
        assert_eq!(
            linear_regression(&[(1.0, 2.0), (1.0, 3.0)]),
            Err(RegressionError::DegenerateX)
        );
        assert_eq!(
            exponential_fit(&[(0.0, 1.0), (1.0, 0.0)]),
            Err(RegressionError::NonPositiveY(0.0))
        );
    }

    #[test]
    fn noisy_points_against_hand_sums() {
        // x = 1..5, y = 2, 4, 5, 4, 5: Sxx = 10, Sxy = 6, SStot = 6.
        // slope 0.6, intercept 2.2, SSres = 2.4, R² = 0.6.
        let pts = [(1.0, 2.0), (2.0, 4.0), (3.0, 5.0), (4.0, 4.0), (5.0, 5.0)];
        let fit = linear_regression(&pts).unwrap();
        assert!((fit.slope - 0.6).abs() < 1e-12);
        assert!((fit.intercept - 2.2).abs() < 1e-12);
        assert!((fit.r_squared - 0.6).abs() < 1e-12);
    }

    #[test]
    fn exponential_recovers_parameters() {
        let pts: Vec<(f64, f64)> = (0..6)
            .map(|i| {
                let x = i as f64 * 0.5;
                (x, 3.0 * (2.0 * x).exp())
            })
            .collect();
        let fit = exponential_fit(&pts).unwrap();
        assert!((fit.amplitude - 3.0).abs() < 1e-9);
        assert!((fit.rate - 2.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }
}
