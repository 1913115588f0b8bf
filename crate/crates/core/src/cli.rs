//! Command-line front end.
//!
//! Exit codes: 0 on success (or a passing assertion), 1 on usage or I/O
//! errors, 2 when an `--assert*` check fails. Nothing is written to the data
//! channel until all flags are validated and the destination is open.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::apps::{estimate_pi, mc_option_price, OptionSpec};
use crate::error::{Error, Result};
use crate::output::OutputMode;
use crate::stats::scan::{DEFAULT_KENDALL_SAMPLES, DEFAULT_SAMPLES_PER_STREAM};
use crate::stats::{
    hwd_proxy, mini_battery, pairwise_correlation_scan_with, verdicts_to_json, write_verdicts_csv,
    ScanOptions, TestVerdict,
};
use crate::stream::{
    ExecutionPlan, GeneratorConfig, MultiStreamRng, Profile, DEFAULT_BATCH_SIZE, SEED_ENV,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_ASSERT: i32 = 2;

/// Number of timed repetitions in `bench`; the median is reported.
pub const BENCH_REPETITIONS: usize = 10;

#[derive(Debug, Parser)]
#[command(
    name = "thundering",
    version,
    about = "Multi-stream shared-root LCG generator with statistical checks",
    after_help = "Raw output (gen --format raw) is a headerless sequence of little-endian \
                  32-bit words, suitable for piping into external test suites."
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Generator seed
    #[arg(long, global = true, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    /// Number of streams
    #[arg(long, global = true, default_value_t = 1)]
    pub streams: usize,
    /// Output technique: baseline, decorr, perm or full
    #[arg(long, global = true, default_value = "full", value_parser = parse_mode)]
    pub mode: OutputMode,
    /// Parameter profile: paper (c = 54) or strict (odd c)
    #[arg(long, global = true, default_value = "paper", value_parser = parse_profile)]
    pub profile: Profile,
    /// Execution plan: shared or independent
    #[arg(long, global = true, default_value = "shared", value_parser = parse_plan)]
    pub plan: ExecutionPlan,
    /// Worker threads
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    /// Root states per batch in the shared plan
    #[arg(long, global = true, default_value_t = DEFAULT_BATCH_SIZE)]
    pub batch_size: usize,
}

fn parse_mode(s: &str) -> std::result::Result<OutputMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_profile(s: &str) -> std::result::Result<Profile, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_plan(s: &str) -> std::result::Result<ExecutionPlan, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl CommonArgs {
    pub fn config(&self) -> GeneratorConfig {
        GeneratorConfig::new(self.seed, self.streams)
            .with_mode(self.mode)
            .with_profile(self.profile)
            .with_plan(self.plan)
            .with_batch_size(self.batch_size)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum WordFormat {
    /// Little-endian 32-bit words, no header
    Raw,
    /// One zero-padded hex word per line
    Hex,
    /// One decimal word per line
    Dec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Emit generated words
    Gen {
        /// Words to write per destination
        #[arg(long)]
        samples: u64,
        /// Round-robin across all streams into one sequence
        #[arg(long)]
        interleave: bool,
        #[arg(long, value_enum, default_value = "raw")]
        format: WordFormat,
        /// Write to this file instead of standard output
        #[arg(long, conflicts_with = "out_dir")]
        output: Option<PathBuf>,
        /// Write one file per stream (stream_<i>.<ext>) into this directory
        #[arg(long, conflicts_with = "interleave")]
        out_dir: Option<PathBuf>,
    },
    /// Pairwise Pearson/Spearman/Kendall scan over random stream pairs
    Corr {
        #[arg(long, default_value_t = 1000)]
        pairs: usize,
        #[arg(long, default_value_t = DEFAULT_SAMPLES_PER_STREAM)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_KENDALL_SAMPLES)]
        kendall_samples: usize,
        #[arg(long, default_value_t = 0x7061_6972)]
        pair_seed: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: ReportFormat,
        /// Baseline mode: fail unless max |Pearson| exceeds this.
        /// Other modes: fail unless max |Pearson| is below it.
        #[arg(long)]
        assert_max_pearson: Option<f64>,
    },
    /// Hamming weight dependency proxy on a stream pair
    Hwd {
        #[arg(long, default_value_t = 0)]
        stream_a: usize,
        #[arg(long, default_value_t = 1)]
        stream_b: usize,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: ReportFormat,
        /// Exit 2 if the proxy fails
        #[arg(long)]
        assert_pass: bool,
    },
    /// Monobit, byte chi-square, runs and serial-correlation tests
    Battery {
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        /// Test this stream (ignored with --interleave)
        #[arg(long, default_value_t = 0)]
        stream: usize,
        /// Test the round-robin interleave of all streams
        #[arg(long)]
        interleave: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: ReportFormat,
        /// Exit 2 if any test fails
        #[arg(long)]
        assert_pass: bool,
    },
    /// Monte Carlo estimate of pi
    Pi {
        #[arg(long, default_value_t = 10_000_000)]
        draws: u64,
    },
    /// Monte Carlo price of a European call under Black-Scholes
    Option {
        #[arg(long, default_value_t = 100.0)]
        spot: f64,
        #[arg(long, default_value_t = 100.0)]
        strike: f64,
        #[arg(long, default_value_t = 0.05)]
        rate: f64,
        #[arg(long, default_value_t = 0.2)]
        vol: f64,
        #[arg(long, default_value_t = 1.0)]
        maturity: f64,
        #[arg(long, default_value_t = 1_000_000)]
        paths: u64,
    },
    /// Throughput: median of 10 timed runs
    Bench {
        /// Words per stream per run
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
}

/// Parses `std::env::args` and runs against the process's standard streams.
pub fn run_from_env() -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidOption(msg.into())
}

pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let common = &cli.common;
    if common.threads == 0 {
        return Err(usage("--threads must be at least 1"));
    }
    let config = common.config();
    match &cli.command {
        Command::Gen {
            samples,
            interleave,
            format,
            output,
            out_dir,
        } => {
            if *samples == 0 {
                return Err(usage("--samples must be at least 1"));
            }
            let mut g = MultiStreamRng::new(config)?;
            if let Some(dir) = out_dir {
                return gen_per_stream(&mut g, *samples, *format, dir, common.threads);
            }
            match output {
                Some(path) => {
                    let file = File::create(path)?;
                    let mut w = BufWriter::new(file);
                    gen_single(
                        &mut g,
                        *samples,
                        *interleave,
                        *format,
                        common.threads,
                        &mut w,
                    )?;
                    w.flush()?;
                }
                None => {
                    let mut w = BufWriter::new(out);
                    gen_single(
                        &mut g,
                        *samples,
                        *interleave,
                        *format,
                        common.threads,
                        &mut w,
                    )?;
                    w.flush()?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Corr {
            pairs,
            samples,
            kendall_samples,
            pair_seed,
            format,
            assert_max_pearson,
        } => {
            if *pairs == 0 {
                return Err(usage("--pairs must be at least 1"));
            }
            let g = MultiStreamRng::new(config)?;
            let opts = ScanOptions {
                n_pairs: *pairs,
                samples_per_stream: *samples,
                kendall_samples: *kendall_samples,
                pair_seed: *pair_seed,
            };
            let report = pairwise_correlation_scan_with(&g, &opts)?;
            match format {
                ReportFormat::Json => writeln!(out, "{}", report.to_json()?)?,
                ReportFormat::Csv => report.write_csv(&mut *out)?,
                ReportFormat::Text => write!(out, "{}", report.to_text())?,
            }
            if let Some(threshold) = assert_max_pearson {
                let m = report.max_abs_pearson;
                let ok = if common.mode == OutputMode::BASELINE {
                    m > *threshold
                } else {
                    m < *threshold
                };
                if !ok {
                    let rel = if common.mode == OutputMode::BASELINE {
                        "above"
                    } else {
                        "below"
                    };
                    writeln!(
                        err,
                        "assertion failed: max |pearson| {m} is not {rel} {threshold}"
                    )?;
                    return Ok(EXIT_ASSERT);
                }
            }
            Ok(EXIT_OK)
        }
        Command::Hwd {
            stream_a,
            stream_b,
            samples,
            format,
            assert_pass,
        } => {
            let g = MultiStreamRng::new(config)?;
            let v = hwd_proxy(&g, (*stream_a, *stream_b), *samples)?;
            write_verdicts(std::slice::from_ref(&v), *format, out)?;
            Ok(if *assert_pass && !v.pass {
                EXIT_ASSERT
            } else {
                EXIT_OK
            })
        }
        Command::Battery {
            samples,
            stream,
            interleave,
            format,
            assert_pass,
        } => {
            let mut g = MultiStreamRng::new(config)?;
            let words = if *interleave {
                let all: Vec<usize> = (0..g.n_streams()).collect();
                g.interleave(&all, *samples)?
            } else {
                g.fill(*stream, *samples)?
            };
            let verdicts = mini_battery(&words)?;
            write_verdicts(&verdicts, *format, out)?;
            let failed = verdicts.iter().any(|v| !v.pass);
            Ok(if *assert_pass && failed {
                EXIT_ASSERT
            } else {
                EXIT_OK
            })
        }
        Command::Pi { draws } => {
            let mut g = MultiStreamRng::new(config)?;
            let streams = g.n_streams();
            let est = estimate_pi(&mut g, *draws, streams)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&est)?)?;
            Ok(EXIT_OK)
        }
        Command::Option {
            spot,
            strike,
            rate,
            vol,
            maturity,
            paths,
        } => {
            let spec = OptionSpec {
                spot: *spot,
                strike: *strike,
                rate: *rate,
                volatility: *vol,
                maturity: *maturity,
                paths: *paths,
            };
            spec.validate()?;
            let mut g = MultiStreamRng::new(config)?;
            let price = mc_option_price(&mut g, &spec)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&price)?)?;
            Ok(EXIT_OK)
        }
        Command::Bench { samples } => {
            let report = bench(&config, *samples, common.threads)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
            if !report.deterministic {
                writeln!(
                    err,
                    "assertion failed: output differs between 1 and {} threads",
                    common.threads
                )?;
                return Ok(EXIT_ASSERT);
            }
            Ok(EXIT_OK)
        }
    }
}

fn write_verdicts(
    verdicts: &[TestVerdict],
    format: ReportFormat,
    out: &mut dyn Write,
) -> Result<()> {
    match format {
        ReportFormat::Json => writeln!(out, "{}", verdicts_to_json(verdicts)?)?,
        ReportFormat::Csv => write_verdicts_csv(verdicts, &mut *out)?,
        ReportFormat::Text => {
            for v in verdicts {
                writeln!(
                    out,
                    "{:<30} statistic={:<14.6} p={:<12.4e} alpha={:<10.3e} {}",
                    v.name,
                    v.statistic,
                    v.p_value,
                    v.alpha,
                    if v.pass { "PASS" } else { "FAIL" }
                )?;
            }
        }
    }
    Ok(())
}

pub fn write_words<W: Write + ?Sized>(
    words: &[u32],
    format: WordFormat,
    w: &mut W,
) -> io::Result<()> {
    match format {
        WordFormat::Raw => {
            let mut buf = Vec::with_capacity(words.len() * 4);
            for x in words {
                buf.extend_from_slice(&x.to_le_bytes());
            }
            w.write_all(&buf)
        }
        WordFormat::Hex => words.iter().try_for_each(|x| writeln!(w, "{x:08x}")),
        WordFormat::Dec => words.iter().try_for_each(|x| writeln!(w, "{x}")),
    }
}

/// Words generated per stream per chunk when streaming output.
const GEN_CHUNK_WORDS: usize = 1 << 20;

fn gen_single<W: Write>(
    g: &mut MultiStreamRng,
    samples: u64,
    interleave: bool,
    format: WordFormat,
    threads: usize,
    w: &mut W,
) -> Result<()> {
    let mut left = samples;
    if !interleave {
        let mut buf = vec![0u32; GEN_CHUNK_WORDS.min(samples as usize)];
        while left > 0 {
            let n = (left as usize).min(buf.len());
            g.fill_into(0, &mut buf[..n])?;
            write_words(&buf[..n], format, w)?;
            left -= n as u64;
        }
        return Ok(());
    }
    let k = g.n_streams();
    let per_chunk = (GEN_CHUNK_WORDS / k).max(1);
    let mut words = Vec::with_capacity(per_chunk * k);
    while left > 0 {
        let rounds = (left.div_ceil(k as u64) as usize).min(per_chunk);
        let block = g.generate_all(rounds, threads)?;
        words.clear();
        for r in 0..rounds {
            words.extend(block.iter().map(|s| s[r]));
        }
        let n = (left as usize).min(words.len());
        write_words(&words[..n], format, w)?;
        left -= n as u64;
    }
    Ok(())
}

fn gen_per_stream(
    g: &mut MultiStreamRng,
    samples: u64,
    format: WordFormat,
    dir: &std::path::Path,
    threads: usize,
) -> Result<i32> {
    let ext = match format {
        WordFormat::Raw => "bin",
        WordFormat::Hex => "hex",
        WordFormat::Dec => "txt",
    };
    std::fs::create_dir_all(dir)?;
    let mut files = (0..g.n_streams())
        .map(|i| File::create(dir.join(format!("stream_{i}.{ext}"))).map(BufWriter::new))
        .collect::<io::Result<Vec<_>>>()?;
    let per_chunk = (GEN_CHUNK_WORDS / g.n_streams()).max(1) as u64;
    let mut left = samples;
    while left > 0 {
        let n = left.min(per_chunk) as usize;
        let block = g.generate_all(n, threads)?;
        for (words, f) in block.iter().zip(files.iter_mut()) {
            write_words(words, format, f)?;
        }
        left -= n as u64;
    }
    for f in &mut files {
        f.flush()?;
    }
    Ok(EXIT_OK)
}

/// Lowercase hex SHA-256 of the little-endian byte image of `words`.
pub fn checksum_words(words: &[u32]) -> String {
    let mut h = Sha256::new();
    for w in words {
        h.update(w.to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// SHA-256 over the round-robin interleave of per-stream blocks.
pub fn checksum_interleaved(block: &[Vec<u32>]) -> String {
    let rounds = block.first().map_or(0, |s| s.len());
    let mut h = Sha256::new();
    for r in 0..rounds {
        for s in block {
            h.update(s[r].to_le_bytes());
        }
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Serialize)]
pub struct BenchReport {
    pub streams: usize,
    pub samples_per_stream: usize,
    pub threads: usize,
    pub plan: String,
    pub mode: String,
    pub repetitions: usize,
    pub times_s: Vec<f64>,
    pub median_s: f64,
    pub samples_per_s: f64,
    pub bytes_per_s: f64,
    pub checksum: String,
    pub deterministic: bool,
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Checks that `threads` workers reproduce the single-threaded output, then
/// times [`BENCH_REPETITIONS`] fresh runs.
pub fn bench(config: &GeneratorConfig, samples: usize, threads: usize) -> Result<BenchReport> {
    let reference = MultiStreamRng::new(config.clone())?.generate_all(samples, 1)?;
    let parallel = MultiStreamRng::new(config.clone())?.generate_all(samples, threads)?;
    let checksum = checksum_interleaved(&reference);
    let deterministic = checksum == checksum_interleaved(&parallel);
    drop((reference, parallel));

    let mut times = Vec::with_capacity(BENCH_REPETITIONS);
    for _ in 0..BENCH_REPETITIONS {
        let mut g = MultiStreamRng::new(config.clone())?;
        let start = Instant::now();
        let block = g.generate_all(samples, threads)?;
        times.push(start.elapsed().as_secs_f64());
        std::hint::black_box(block);
    }
    let median_s = median(&times);
    let total = (config.n_streams * samples) as f64;
    Ok(BenchReport {
        streams: config.n_streams,
        samples_per_stream: samples,
        threads,
        plan: config.plan.to_string(),
        mode: config.mode.to_string(),
        repetitions: BENCH_REPETITIONS,
        times_s: times,
        median_s,
        samples_per_s: total / median_s,
        bytes_per_s: 4.0 * total / median_s,
        checksum,
        deterministic,
    })
}
