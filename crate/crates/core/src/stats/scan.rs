//! Pairwise inter-stream correlation scan.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::correlation::{average_ranks, kendall, pearson, pearson_by};
use crate::error::{Error, Result};
use crate::stream::MultiStreamRng;

pub const DEFAULT_SAMPLES_PER_STREAM: usize = 1_000_000;
pub const DEFAULT_KENDALL_SAMPLES: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCorrelation {
    pub stream_i: usize,
    pub stream_j: usize,
    pub pearson: f64,
    pub spearman: f64,
    pub kendall: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub pairs_sampled: usize,
    pub samples_per_stream: usize,
    /// Kendall's tau is computed on this many leading samples of each stream.
    pub kendall_samples: usize,
    pub max_abs_pearson: f64,
    pub max_abs_spearman: f64,
    pub max_abs_kendall: f64,
    pub pairs: Vec<PairCorrelation>,
}

impl CorrelationReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// The per-pair table as CSV; the maxima are in the JSON form.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for p in &self.pairs {
            w.serialize(p)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "pairs={} samples/stream={} kendall samples={}\n{:>8} {:>8} {:>12} {:>12} {:>12}\n",
            self.pairs_sampled,
            self.samples_per_stream,
            self.kendall_samples,
            "stream_i",
            "stream_j",
            "pearson",
            "spearman",
            "kendall"
        );
        for p in &self.pairs {
            s.push_str(&format!(
                "{:>8} {:>8} {:>12.6} {:>12.6} {:>12.6}\n",
                p.stream_i, p.stream_j, p.pearson, p.spearman, p.kendall
            ));
        }
        s.push_str(&format!(
            "{:>17} {:>12.6} {:>12.6} {:>12.6}\n",
            "max |.|", self.max_abs_pearson, self.max_abs_spearman, self.max_abs_kendall
        ));
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanOptions {
    pub n_pairs: usize,
    pub samples_per_stream: usize,
    pub kendall_samples: usize,
    /// Seed for choosing the pairs.
    pub pair_seed: u64,
}

impl ScanOptions {
    pub fn new(n_pairs: usize, samples_per_stream: usize) -> Self {
        Self {
            n_pairs,
            samples_per_stream,
            kendall_samples: DEFAULT_KENDALL_SAMPLES,
            pair_seed: 0x7061_6972,
        }
    }
}

/// [`pairwise_correlation_scan_with`] with default Kendall subsample and pair seed.
pub fn pairwise_correlation_scan(
    g: &MultiStreamRng,
    n_pairs: usize,
    samples_per_stream: usize,
) -> Result<CorrelationReport> {
    pairwise_correlation_scan_with(g, &ScanOptions::new(n_pairs, samples_per_stream))
}

struct StreamSample {
    values: Vec<u32>,
    ranks: Vec<f64>,
    kendall: Vec<f64>,
}

/// Samples `n_pairs` distinct stream pairs uniformly (with replacement) and
/// computes the three coefficients on position-aligned outputs. Samples are
/// drawn from a clone of `g`, starting at each stream's current position.
pub fn pairwise_correlation_scan_with(
    g: &MultiStreamRng,
    opts: &ScanOptions,
) -> Result<CorrelationReport> {
    let n = g.n_streams();
    if n < 2 {
        return Err(Error::NotEnoughStreams(n));
    }
    if opts.n_pairs == 0 {
        return Err(Error::InvalidOption("pair count must be positive".into()));
    }
    if opts.samples_per_stream < 2 {
        return Err(Error::TooFewSamples(opts.samples_per_stream));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.pair_seed);
    let pairs: Vec<(usize, usize)> = (0..opts.n_pairs)
        .map(|_| {
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            (i.min(j), i.max(j))
        })
        .collect();

    let mut needed: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
    let mut source = g.clone();
    for &(i, j) in &pairs {
        for s in [i, j] {
            if let Entry::Vacant(e) = needed.entry(s) {
                e.insert(source.fill(s, opts.samples_per_stream)?);
            }
        }
    }
    let k = opts.kendall_samples.clamp(2, opts.samples_per_stream);
    let samples: BTreeMap<usize, StreamSample> = needed
        .into_par_iter()
        .map(|(s, values)| {
            let as_f64: Vec<f64> = values.iter().map(|&v| v as f64).collect();
            let ranks = average_ranks(&as_f64);
            let kendall = as_f64[..k].to_vec();
            (
                s,
                StreamSample {
                    values,
                    ranks,
                    kendall,
                },
            )
        })
        .collect();

    let rows: Vec<PairCorrelation> = pairs
        .par_iter()
        .map(|&(i, j)| -> Result<PairCorrelation> {
            let (a, b) = (&samples[&i], &samples[&j]);
            Ok(PairCorrelation {
                stream_i: i,
                stream_j: j,
                pearson: pearson_by(&a.values, &b.values, |v: u32| v as f64)?,
                spearman: pearson(&a.ranks, &b.ranks)?,
                kendall: kendall(&a.kendall, &b.kendall)?,
            })
        })
        .collect::<Result<_>>()?;

    let max_abs =
        |f: fn(&PairCorrelation) -> f64| rows.iter().map(|r| f(r).abs()).fold(0.0, f64::max);
    Ok(CorrelationReport {
        pairs_sampled: rows.len(),
        samples_per_stream: opts.samples_per_stream,
        kendall_samples: k,
        max_abs_pearson: max_abs(|r| r.pearson),
        max_abs_spearman: max_abs(|r| r.spearman),
        max_abs_kendall: max_abs(|r| r.kendall),
        pairs: rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::output::OutputMode;
    use crate::stream::GeneratorConfig;

    #[test]
    fn two_streams_give_the_only_pair() {
        let g = MultiStreamRng::new(GeneratorConfig::new(1, 2)).unwrap();
        let r = pairwise_correlation_scan(&g, 1, 5_000).unwrap();
        assert_eq!(r.pairs.len(), 1);
        assert_eq!((r.pairs[0].stream_i, r.pairs[0].stream_j), (0, 1));
        assert_eq!(r.kendall_samples, 5_000);
    }

    #[test]
    fn rejects_single_stream_and_zero_pairs() {
        let g = MultiStreamRng::new(GeneratorConfig::new(1, 1)).unwrap();
        assert!(matches!(
            pairwise_correlation_scan(&g, 1, 100),
            Err(Error::NotEnoughStreams(1))
        ));
        let g = MultiStreamRng::new(GeneratorConfig::new(1, 3)).unwrap();
        assert!(pairwise_correlation_scan(&g, 0, 100).is_err());
    }

    #[test]
    fn baseline_is_correlated_and_report_serializes() {
        let g = MultiStreamRng::new(GeneratorConfig::new(3, 4).with_mode(OutputMode::BASELINE))
            .unwrap();
        let r = pairwise_correlation_scan(&g, 5, 20_000).unwrap();
        assert!(r.max_abs_pearson > 0.9);
        let json = r.to_json().unwrap();
        let back: CorrelationReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
        let mut csv = Vec::new();
        r.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("stream_i,stream_j,pearson,spearman,kendall\n"));
        assert_eq!(text.lines().count(), 6);
    }
}
