use crate::prelude::*;

/// Shape of a sequence ordered by increasing `L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trend {
    StrictlyDecreasing,
    StrictlyIncreasing,
    Constant,
    Mixed,
}

impl Trend {
    pub fn of(values: &[f64]) -> Trend {
        let w = values.windows(2);
        if w.clone().all(|p| p[1] == p[0]) {
            Trend::Constant
        } else if w.clone().all(|p| p[1] < p[0]) {
            Trend::StrictlyDecreasing
        } else if w.clone().all(|p| p[1] > p[0]) {
            Trend::StrictlyIncreasing
        } else {
            Trend::Mixed
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Trend::StrictlyDecreasing => "decreasing",
            Trend::StrictlyIncreasing => "increasing",
            Trend::Constant => "constant",
            Trend::Mixed => "mixed",
        }
    }
}

/// Least-squares fit `value ≈ limit + slope/L`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtrapolationReport {
    /// `(L, value)` sorted by `L`.
    pub points: Vec<(f64, f64)>,
    pub limit: f64,
    pub slope: f64,
    /// Euclidean norm of the fit residuals.
    pub residual: f64,
    pub trend: Trend,
}

/// Fits `a + b/L` to at least three `(L, value)` points.
pub fn extrapolate(points: &[(f64, f64)]) -> Result<ExtrapolationReport> {
    if points.len() < 3 {
        return Err(Error::TooFewPoints { found: points.len() });
    }
    if points.iter().any(|&(l, v)| l <= 0.0 || !l.is_finite() || !v.is_finite()) {
        return Err(Error::InvalidParameter("extrapolation needs positive sizes and finite values".into()));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|p| 1.0 / p.0).collect();
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("extrapolation needs at least two distinct sizes".into()));
    }
    let sxy: f64 = xs.iter().zip(&pts).map(|(x, p)| (x - x_mean) * (p.1 - y_mean)).sum();
    let slope = sxy / sxx;
    let limit = y_mean - slope * x_mean;
    let residual = xs.iter().zip(&pts).map(|(x, p)| (p.1 - limit - slope * x).powi(2)).sum::<f64>().sqrt();
    let values: Vec<f64> = pts.iter().map(|p| p.1).collect();
    Ok(ExtrapolationReport { trend: Trend::of(&values), points: pts, limit, slope, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constant_sequence() {
        let r = extrapolate(&[(2.0, 0.5), (3.0, 0.5), (4.0, 0.5)]).unwrap();
        assert_eq!(r.slope, 0.0);
        assert_relative_eq!(r.limit, 0.5, epsilon = 1e-15);
        assert_eq!(r.trend, Trend::Constant);
    }

    #[test]
    fn exact_model_is_recovered() {
        let pts: Vec<(f64, f64)> = [2.0, 3.0, 5.0, 8.0].iter().map(|&l| (l, 1.0 + 2.0 / l)).collect();
        let r = extrapolate(&pts).unwrap();
        assert_relative_eq!(r.limit, 1.0, epsilon = 1e-12);
        assert_relative_eq!(r.slope, 2.0, epsilon = 1e-12);
        assert!(r.residual <= 1e-12);
        assert_eq!(r.trend, Trend::StrictlyDecreasing);
    }

    #[test]
    fn needs_three_points() {
        assert_eq!(extrapolate(&[(1.0, 1.0), (2.0, 2.0)]).unwrap_err(), Error::TooFewPoints { found: 2 });
    }
}
