//! Student's t distribution and the paired t-test.

use statrs::function::beta::beta_reg;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 0.05;

/// P(T > t) for t >= 0.
fn upper_tail(t: f64, df: f64) -> f64 {
    0.5 * beta_reg(0.5 * df, 0.5, df / (df + t * t))
}

fn density(t: f64, df: f64) -> f64 {
    let log_norm = ln_gamma(0.5 * (df + 1.0))
        - ln_gamma(0.5 * df)
        - 0.5 * (df * std::f64::consts::PI).ln();
    (log_norm - 0.5 * (df + 1.0) * (t * t / df).ln_1p()).exp()
}

pub fn t_cdf(t: f64, df: u32) -> f64 {
    let df = f64::from(df);
    if t >= 0.0 {
        1.0 - upper_tail(t, df)
    } else {
        upper_tail(-t, df)
    }
}

/// Inverse CDF of Student's t with `df` degrees of freedom.
///
/// Solves `P(T > t) = min(p, 1 - p)` on the positive half-line with
/// safeguarded Newton steps, then restores the sign.
pub fn t_quantile(p: f64, df: u32) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!("probability must be in (0, 1), got {p}")));
    }
    if df == 0 {
        return Err(Error::invalid("degrees of freedom must be >= 1"));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    let nu = f64::from(df);
    let target = p.min(1.0 - p);

    let mut lo = 0.0;
    let mut hi = 1.0;
    while upper_tail(hi, nu) > target {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::invalid(format!("t quantile for p = {p} overflows")));
        }
    }

    let mut t = 0.5 * (lo + hi);
    for _ in 0..200 {
        let excess = upper_tail(t, nu) - target;
        if excess == 0.0 {
            break;
        }
        if excess > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        // tail is decreasing, so d(excess)/dt = -density
        let newton = t + excess / density(t, nu);
        t = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 1e-14 * hi.max(1.0) {
            break;
        }
    }
    Ok(if p > 0.5 { t } else { -t })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub alpha: f64,
    pub mean_difference: f64,
    pub std_error: f64,
    pub t_statistic: f64,
    pub df: u32,
    /// All differences were identical, so the interval collapsed to a point.
    pub degenerate: bool,
}

impl ConfidenceInterval {
    pub fn includes_zero(&self) -> bool {
        self.lower <= 0.0 && 0.0 <= self.upper
    }

    /// The difference is significant at `alpha` when zero lies outside the
    /// interval.
    pub fn is_significant(&self) -> bool {
        !self.includes_zero()
    }
}

/// Two-sided paired t-test on `xs - ys`.
pub fn paired_ttest(xs: &[f64], ys: &[f64], alpha: f64) -> Result<ConfidenceInterval> {
    if xs.len() != ys.len() {
        return Err(Error::invalid(format!(
            "paired samples differ in length: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::invalid(format!("paired t-test needs at least 2 pairs, got {n}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must be in (0, 1), got {alpha}")));
    }
    if let Some(bad) = xs.iter().chain(ys).find(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("non-finite sample {bad}")));
    }

    let diffs: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| x - y).collect();
    let nf = n as f64;
    let mean = diffs.iter().sum::<f64>() / nf;
    let ss: f64 = diffs.iter().map(|d| (d - mean) * (d - mean)).sum();
    let sd = (ss / (nf - 1.0)).sqrt();
    let std_error = sd / nf.sqrt();
    let df = (n - 1) as u32;

    if std_error == 0.0 {
        let t_statistic = if mean == 0.0 { 0.0 } else { mean.signum() * f64::INFINITY };
        return Ok(ConfidenceInterval {
            lower: mean,
            upper: mean,
            alpha,
            mean_difference: mean,
            std_error,
            t_statistic,
            df,
            degenerate: true,
        });
    }

    let half_width = t_quantile(1.0 - alpha / 2.0, df)? * std_error;
    Ok(ConfidenceInterval {
        lower: mean - half_width,
        upper: mean + half_width,
        alpha,
        mean_difference: mean,
        std_error,
        t_statistic: mean / std_error,
        df,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn quantiles_against_tables() {
        assert_abs_diff_eq!(t_quantile(0.975, 12).unwrap(), 2.178812829663418, epsilon = 1e-8);
        assert_abs_diff_eq!(t_quantile(0.975, 1).unwrap(), 12.706204736174707, epsilon = 1e-8);
        assert_abs_diff_eq!(t_quantile(0.95, 2).unwrap(), 2.919985580355516, epsilon = 1e-8);
    }

    #[test]
    fn median_is_zero() {
        for df in [1, 2, 7, 100, 10_000] {
            assert_eq!(t_quantile(0.5, df).unwrap(), 0.0);
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for df in [1, 3, 12, 250] {
            for p in [1e-6, 0.01, 0.2, 0.49, 0.7, 0.975, 0.999999] {
                let t = t_quantile(p, df).unwrap();
                assert_abs_diff_eq!(t_cdf(t, df), p, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn quantile_input_errors() {
        assert!(t_quantile(0.0, 3).is_err());
        assert!(t_quantile(1.0, 3).is_err());
        assert!(t_quantile(f64::NAN, 3).is_err());
        assert!(t_quantile(0.9, 0).is_err());
    }

    #[test]
    fn identical_samples() {
        let xs = [1.0, 2.5, 3.0];
        let ci = paired_ttest(&xs, &xs, 0.05).unwrap();
        assert_eq!(ci.mean_difference, 0.0);
        assert_eq!((ci.lower, ci.upper), (0.0, 0.0));
        assert!(ci.includes_zero() && ci.degenerate);
    }

    #[test]
    fn constant_shift_collapses() {
        let ci = paired_ttest(&[2.0, 3.0, 4.0], &[1.0, 2.0, 3.0], 0.05).unwrap();
        assert!(ci.degenerate);
        assert_eq!((ci.lower, ci.upper), (1.0, 1.0));
        assert_eq!(ci.t_statistic, f64::INFINITY);
        assert!(ci.is_significant());
    }

    #[test]
    fn textbook_example() {
        // diffs 1, 2, 3, 4: mean 2.5, sd sqrt(5/3), df 3
        let ci = paired_ttest(&[2.0, 4.0, 6.0, 8.0], &[1.0, 2.0, 3.0, 4.0], 0.05).unwrap();
        let se = (5.0f64 / 3.0).sqrt() / 2.0;
        assert_abs_diff_eq!(ci.t_statistic, 2.5 / se, epsilon = 1e-12);
        assert_abs_diff_eq!(ci.lower, 2.5 - 3.182446305284263 * se, epsilon = 1e-9);
        assert_eq!(ci.df, 3);
    }

    #[test]
    fn ttest_errors() {
        assert!(paired_ttest(&[1.0], &[2.0], 0.05).is_err());
        assert!(paired_ttest(&[1.0, 2.0], &[2.0], 0.05).is_err());
        assert!(paired_ttest(&[1.0, 2.0], &[2.0, 1.0], 0.0).is_err());
        assert!(paired_ttest(&[1.0, f64::NAN], &[2.0, 1.0], 0.05).is_err());
    }
}
