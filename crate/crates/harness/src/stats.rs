//! Replication statistics.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance; 0 for fewer than two values.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn standard_error(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchTest {
    pub t: f64,
    pub df: f64,
    /// P-value of the one-sided alternative mean(a) > mean(b).
    pub p_value: f64,
}

/// Welch's unequal-variance t-test of mean(a) > mean(b).
pub fn welch_greater(a: &[f64], b: &[f64]) -> WelchTest {
    let (va, vb) = (variance(a) / a.len() as f64, variance(b) / b.len() as f64);
    let diff = mean(a) - mean(b);
    let se2 = va + vb;
    if se2 <= 0.0 {
        // both samples constant: the difference is exact
        let p = if diff > 0.0 { 0.0 } else { 1.0 };
        return WelchTest {
            t: if diff > 0.0 { f64::INFINITY } else if diff < 0.0 { f64::NEG_INFINITY } else { 0.0 },
            df: f64::INFINITY,
            p_value: p,
        };
    }
    let t = diff / se2.sqrt();
    let df = se2 * se2
        / (va * va / (a.len() as f64 - 1.0).max(1.0) + vb * vb / (b.len() as f64 - 1.0).max(1.0));
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    WelchTest {
        t,
        df,
        p_value: 1.0 - dist.cdf(t),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments() {
        let xs = [2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0];
        assert_eq!(mean(&xs), 5.0);
        assert!((variance(&xs) - 32.0 / 7.0).abs() < 1e-12);
        assert!((standard_error(&xs) - (32.0 / 7.0 / 8.0f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn welch_against_reference() {
        // reference values from the textbook formula evaluated independently
        let a = [27.5, 21.0, 19.0, 23.6, 17.0, 17.9, 16.9, 20.1, 21.9, 22.6, 23.1, 19.6, 19.0, 21.7, 21.4];
        let b = [27.1, 22.0, 20.8, 23.4, 23.4, 23.5, 25.8, 22.0, 24.8, 20.2, 21.9, 22.1, 22.9, 20.5, 24.4];
        let w = welch_greater(&b, &a);
        assert!((w.t - 2.46).abs() < 0.01, "t = {}", w.t);
        assert!((w.df - 24.98).abs() < 0.05, "df = {}", w.df);
        assert!((w.p_value - 0.0106).abs() < 0.001, "p = {}", w.p_value);
    }

    #[test]
    fn constant_samples() {
        assert_eq!(welch_greater(&[3.0, 3.0], &[2.0, 2.0]).p_value, 0.0);
        assert_eq!(welch_greater(&[2.0, 2.0], &[3.0, 3.0]).p_value, 1.0);
    }

    proptest::proptest! {
        #[test]
        fn welch_is_antisymmetric(
            a in proptest::collection::vec(0.0f64..1e4, 2..10),
            b in proptest::collection::vec(0.0f64..1e4, 2..10),
        ) {
            let ab = welch_greater(&a, &b);
            let ba = welch_greater(&b, &a);
            proptest::prop_assert!((ab.t + ba.t).abs() < 1e-9 || ab.t.is_infinite());
            if ab.df.is_finite() {
                proptest::prop_assert!((ab.p_value + ba.p_value - 1.0).abs() < 1e-9);
            }
        }
    }
}
