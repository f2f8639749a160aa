//! Chi-square tests and Monte-Carlo summaries.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub p_value: f64,
    pub dof: usize,
}

/// Upper tail P(X ≥ x) for X ~ χ²(dof).
pub fn chi_square_sf(x: f64, dof: usize) -> f64 {
    if dof == 0 {
        return if x > 0.0 { 0.0 } else { 1.0 };
    }
    if x <= 0.0 {
        return 1.0;
    }
    ChiSquared::new(dof as f64).expect("positive dof").sf(x)
}

/// Pearson goodness of fit of `observed` counts against probabilities `expected`.
pub fn chi_square(observed: &[u64], expected: &[f64], total: u64) -> Result<ChiSquare> {
    if observed.len() != expected.len() {
        return Err(Error::DimensionMismatch { expected: expected.len(), found: observed.len() });
    }
    let sum: f64 = expected.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InconsistentInputs(format!("expected probabilities sum to {sum}")));
    }
    let n = total as f64;
    let mut stat = 0.0;
    for (bin, (&o, &p)) in observed.iter().zip(expected).enumerate() {
        let e = p * n;
        if e < 5.0 {
            return Err(Error::SparseBins { bin, expected: e });
        }
        let d = o as f64 - e;
        stat += d * d / e;
    }
    let dof = expected.len().saturating_sub(1);
    Ok(ChiSquare { statistic: stat, p_value: chi_square_sf(stat, dof), dof })
}

/// Two-sample homogeneity test over shared bins. Empty bins are dropped.
pub fn chi_square_homogeneity(a: &[u64], b: &[u64]) -> Result<ChiSquare> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
    }
    let na: f64 = a.iter().sum::<u64>() as f64;
    let nb: f64 = b.iter().sum::<u64>() as f64;
    if na == 0.0 || nb == 0.0 {
        return Err(Error::InconsistentInputs("empty sample".into()));
    }
    let (ka, kb) = ((nb / na).sqrt(), (na / nb).sqrt());
    let mut stat = 0.0;
    let mut used = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        if x + y == 0 {
            continue;
        }
        used += 1;
        let d = ka * x as f64 - kb * y as f64;
        stat += d * d / (x + y) as f64;
    }
    let dof = used.saturating_sub(1);
    Ok(ChiSquare { statistic: stat, p_value: chi_square_sf(stat, dof), dof })
}

/// Mean and standard error of a sample, summed in order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub n: usize,
}

impl MeanEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return MeanEstimate { mean: f64::NAN, std_err: f64::NAN, n };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        MeanEstimate { mean, std_err: (var / n as f64).sqrt(), n }
    }

    /// mean − k·std_err
    pub fn lower(&self, k: f64) -> f64 {
        self.mean - k * self.std_err
    }
}

/// Binomial standard deviation of a frequency estimate.
pub fn binomial_sigma(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proportional_counts_have_zero_statistic() {
        let r = chi_square(&[25, 25, 50], &[0.25, 0.25, 0.5], 100).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        let u = chi_square(&[100, 100, 100, 100], &[0.25; 4], 400).unwrap();
        assert_eq!(u.statistic, 0.0);
    }

    #[test]
    fn hand_computed_statistic() {
        let r = chi_square(&[130, 90, 90, 90], &[0.25; 4], 400).unwrap();
        // Σ(O−E)²/E = (900 + 100 + 100 + 100) / 100
        assert!((r.statistic - 12.0).abs() < 1e-12);
        assert_eq!(r.dof, 3);
        // χ²(3) tail: erfc(√(x/2)) + √(2x/π)·e^(−x/2)
        let x: f64 = 12.0;
        let tail = 0.000_532_005_505_139_25 + (2.0 * x / std::f64::consts::PI).sqrt() * (-x / 2.0).exp();
        assert!((r.p_value - tail).abs() < 1e-9, "{}", r.p_value);
    }

    #[test]
    fn sparse_bins_rejected() {
        assert!(matches!(chi_square(&[1, 3], &[0.5, 0.5], 8), Err(Error::SparseBins { bin: 0, .. })));
    }

    #[test]
    fn homogeneity_identical_samples() {
        let r = chi_square_homogeneity(&[10, 20, 30], &[10, 20, 30]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.dof, 2);
        // equal sizes: Σ (a−b)²/(a+b)
        let s = chi_square_homogeneity(&[10, 30], &[20, 20]).unwrap();
        assert!((s.statistic - (100.0 / 30.0 + 100.0 / 50.0)).abs() < 1e-12);
    }

    #[test]
    fn mean_estimate() {
        let m = MeanEstimate::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mean, 2.5);
        assert!((m.std_err - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }
}
