//! Statistical evaluation: pairwise correlation between streams, a Hamming
//! weight dependency proxy, and a small intra-stream battery.

pub mod battery;
pub mod correlation;
pub mod hwd;
pub mod scan;

use std::io::Write;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::Result;

pub use battery::{mini_battery, BATTERY_ALPHA, MIN_BATTERY_SAMPLES};
pub use correlation::{average_ranks, kendall, pearson, spearman};
pub use hwd::{hwd_proxy, hwd_proxy_samples, MIN_HWD_SAMPLES};
pub use scan::{
    pairwise_correlation_scan, pairwise_correlation_scan_with, CorrelationReport, PairCorrelation,
    ScanOptions,
};

/// Outcome of one statistical test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestVerdict {
    pub name: String,
    pub statistic: f64,
    pub p_value: f64,
    /// Rejection level; `pass == (p_value >= alpha)`.
    pub alpha: f64,
    pub pass: bool,
}

impl TestVerdict {
    pub fn new(name: impl Into<String>, statistic: f64, p_value: f64, alpha: f64) -> Self {
        // NaN p-values (degenerate input) fail
        let pass = p_value >= alpha;
        Self {
            name: name.into(),
            statistic,
            p_value,
            alpha,
            pass,
        }
    }
}

/// Two-sided standard normal tail probability.
pub fn normal_two_sided_p(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    erfc(z.abs() / std::f64::consts::SQRT_2)
}

pub fn verdicts_to_json(verdicts: &[TestVerdict]) -> Result<String> {
    Ok(serde_json::to_string_pretty(verdicts)?)
}

pub fn write_verdicts_csv<W: Write>(verdicts: &[TestVerdict], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for v in verdicts {
        w.serialize(v)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_sided_normal() {
        assert!((normal_two_sided_p(0.0) - 1.0).abs() < 1e-15);
        assert!((normal_two_sided_p(1.959963984540054) - 0.05).abs() < 1e-9);
        assert!((normal_two_sided_p(-4.0) - 6.334248366623993e-5).abs() < 1e-14);
        assert!(normal_two_sided_p(f64::NAN).is_nan());
    }

    #[test]
    fn verdict_rule() {
        assert!(TestVerdict::new("t", 0.0, 0.5, 0.01).pass);
        assert!(!TestVerdict::new("t", 0.0, 0.001, 0.01).pass);
        assert!(!TestVerdict::new("t", f64::NAN, f64::NAN, 0.01).pass);
    }

    #[test]
    fn verdict_csv_header() {
        let mut buf = Vec::new();
        write_verdicts_csv(&[TestVerdict::new("monobit", 1.5, 0.13, 0.00025)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("name,statistic,p_value,alpha,pass\n"));
        assert!(text.contains("monobit,1.5,0.13,0.00025,true"));
    }
}
