//! Small statistical helpers shared by calibration and analysis.

use statrs::distribution::{ContinuousCDF, StudentsT};

/// Coefficient of variation (population standard deviation over mean).
/// Returns 0 for constant windows, including the all-zero one.
pub fn coefficient_of_variation(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let sd = var.max(0.0).sqrt();
    if sd == 0.0 {
        0.0
    } else {
        sd / mean
    }
}

/// One-sided one-sample t-test p-value for H1: mean > 0.
/// Degenerate samples (n < 2 or zero variance) fall back to 0/1 by sign.
pub fn t_test_mean_greater_zero(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n == 0 {
        return 1.0;
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return if mean > 0.0 { 0.5 } else { 1.0 };
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0);
    if var == 0.0 {
        return if mean > 0.0 { 0.0 } else { 1.0 };
    }
    let t = mean / (var / n as f64).sqrt();
    let dist = StudentsT::new(0.0, 1.0, n as f64 - 1.0).expect("valid dof");
    1.0 - dist.cdf(t)
}

/// Benjamini-Hochberg step-up adjustment. Returns the adjusted p-values
/// (q-values); reject where q <= alpha.
pub fn benjamini_hochberg(pvalues: &[f64]) -> Vec<f64> {
    let m = pvalues.len();
    if m == 0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| pvalues[a].total_cmp(&pvalues[b]));
    let mut adjusted = vec![0.0; m];
    let mut running_min = f64::INFINITY;
    for rank in (0..m).rev() {
        let idx = order[rank];
        let q = pvalues[idx] * m as f64 / (rank + 1) as f64;
        running_min = running_min.min(q).min(1.0);
        adjusted[idx] = running_min;
    }
    adjusted
}

/// Binary confusion counts for rule presence across two calibrations.
#[derive(Debug, Clone, Copy, Default)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl Confusion {
    pub fn add(&mut self, in_a: bool, in_b: bool) {
        match (in_a, in_b) {
            (true, true) => self.tp += 1,
            (true, false) => self.fn_ += 1,
            (false, true) => self.fp += 1,
            (false, false) => self.tn += 1,
        }
    }

    /// Matthews correlation coefficient. Perfect agreement on a non-empty
    /// table is 1 even when one of the denominator factors vanishes.
    pub fn mcc(&self) -> f64 {
        let (tp, fp, tn, fn_) = (
            self.tp as f64,
            self.fp as f64,
            self.tn as f64,
            self.fn_ as f64,
        );
        let denom = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
        if denom == 0.0 {
            if self.fp == 0 && self.fn_ == 0 && (self.tp + self.tn) > 0 {
                return 1.0;
            }
            return 0.0;
        }
        (tp * tn - fp * fn_) / denom.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cv_of_constant_series_is_zero() {
        assert_eq!(coefficient_of_variation(&[5.0, 5.0, 5.0]), 0.0);
        assert_eq!(coefficient_of_variation(&[0.0, 0.0]), 0.0);
    }

    #[test]
    fn cv_matches_hand_value() {
        // mean 2, population sd 1 -> cv 0.5
        let cv = coefficient_of_variation(&[1.0, 3.0]);
        assert!((cv - 0.5).abs() < 1e-12);
    }

    #[test]
    fn t_test_detects_positive_mean() {
        let p = t_test_mean_greater_zero(&[1.0, 1.2, 0.9, 1.1, 1.05]);
        assert!(p < 1e-4, "p = {p}");
        let p = t_test_mean_greater_zero(&[-1.0, -1.2, -0.9]);
        assert!(p > 0.95);
    }

    #[test]
    fn bh_adjustment_is_monotone_and_capped() {
        let p = [0.01, 0.02, 0.03, 0.5];
        let q = benjamini_hochberg(&p);
        assert!((q[0] - 0.04).abs() < 1e-12);
        assert!((q[2] - 0.04).abs() < 1e-12);
        assert!((q[3] - 0.5).abs() < 1e-12);
        assert!(q.iter().all(|&v| v <= 1.0));
    }

    #[test]
    fn mcc_limits() {
        let mut c = Confusion::default();
        c.add(true, true);
        c.add(false, false);
        assert_eq!(c.mcc(), 1.0);

        let mut c = Confusion::default();
        c.add(true, false);
        c.add(false, true);
        assert_eq!(c.mcc(), -1.0);

        // 2x2 hand check: tp=2 fp=1 tn=3 fn=1 -> mcc = (6-1)/sqrt(3*3*4*4)=5/12
        let c = Confusion {
            tp: 2,
            fp: 1,
            tn: 3,
            fn_: 1,
        };
        assert!((c.mcc() - 5.0 / 12.0).abs() < 1e-12);
    }
}
