//! Multi-stream generator.
//!
//! Stream `i` has leaf offset `h = 2i` and decorrelator substream `i`. Its
//! `n`-th output (counting from 1) is `emit(x_n + h, ...)` where `x_n` is the
//! shared root sequence. Two execution plans produce identical outputs:
//!
//! * [`ExecutionPlan::SharedRootBatched`] materializes blocks of root states
//!   once and every leaf reads them, mirroring the hardware data flow.
//! * [`ExecutionPlan::IndependentLeaf`] steps each leaf as its own LCG with
//!   increment `c - a h`, so streams share nothing.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decorrelator::{splitmix64_next, substream_for, xs_jump, Xorshift128};
use crate::error::{Error, Result};
use crate::lcg::{lcg_jump, LcgParams, LcgState};
use crate::output::{emit_in_place, OutputMode};
use crate::state_share::{
    default_offset_for, leaf_params, leaf_transition, LeafOffset, RootBatch, MAX_LANES,
};

pub const DEFAULT_BATCH_SIZE: usize = 4096;

/// Environment variable read by the CLI for the default seed.
pub const SEED_ENV: &str = "THUNDERING_SEED";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Profile {
    /// `a = 6364136223846793005`, `c = 54`.
    #[default]
    Paper,
    /// Same multiplier, odd increment.
    Strict,
}

impl Profile {
    pub fn params(&self) -> LcgParams {
        match self {
            Profile::Paper => LcgParams::paper(),
            Profile::Strict => LcgParams::strict(),
        }
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Profile::Paper),
            "strict" => Ok(Profile::Strict),
            other => Err(Error::InvalidOption(format!(
                "unknown profile {other:?} (expected paper or strict)"
            ))),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::Paper => "paper",
            Profile::Strict => "strict",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum ExecutionPlan {
    #[default]
    SharedRootBatched,
    IndependentLeaf,
}

impl FromStr for ExecutionPlan {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shared" => Ok(ExecutionPlan::SharedRootBatched),
            "independent" => Ok(ExecutionPlan::IndependentLeaf),
            other => Err(Error::InvalidOption(format!(
                "unknown plan {other:?} (expected shared or independent)"
            ))),
        }
    }
}

impl fmt::Display for ExecutionPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExecutionPlan::SharedRootBatched => "shared",
            ExecutionPlan::IndependentLeaf => "independent",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub n_streams: usize,
    pub mode: OutputMode,
    pub profile: Profile,
    pub plan: ExecutionPlan,
    /// Root states per batch in the shared plan.
    pub batch_size: usize,
    /// Lanes of the root generator in the shared plan. Does not affect output.
    pub lanes: usize,
}

impl GeneratorConfig {
    pub fn new(seed: u64, n_streams: usize) -> Self {
        Self {
            seed,
            n_streams,
            mode: OutputMode::FULL,
            profile: Profile::Paper,
            plan: ExecutionPlan::SharedRootBatched,
            batch_size: DEFAULT_BATCH_SIZE,
            lanes: 1,
        }
    }

    pub fn with_mode(mut self, mode: OutputMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_profile(mut self, profile: Profile) -> Self {
        self.profile = profile;
        self
    }

    pub fn with_plan(mut self, plan: ExecutionPlan) -> Self {
        self.plan = plan;
        self
    }

    pub fn with_batch_size(mut self, batch_size: usize) -> Self {
        self.batch_size = batch_size;
        self
    }

    pub fn with_lanes(mut self, lanes: usize) -> Self {
        self.lanes = lanes;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n_streams == 0 {
            return Err(Error::NoStreams);
        }
        if self.n_streams as u64 >= 1 << 63 {
            return Err(Error::TooManyStreams(self.n_streams as u64));
        }
        if self.batch_size == 0 {
            return Err(Error::ZeroBatch);
        }
        if self.lanes == 0 || self.lanes > MAX_LANES {
            return Err(Error::InvalidLanes(self.lanes));
        }
        Ok(())
    }
}

/// State of one output stream.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StreamState {
    stream_id: u64,
    offset: LeafOffset,
    /// Direct LCG that generates this stream's leaf sequence.
    direct: LcgParams,
    leaf: u64,
    decorrelator: Xorshift128,
    mode: OutputMode,
    position: u64,
}

impl StreamState {
    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn offset(&self) -> LeafOffset {
        self.offset
    }

    /// Parameters `(a, c - a h)` of the equivalent direct LCG.
    pub fn direct_params(&self) -> LcgParams {
        self.direct
    }

    pub fn leaf(&self) -> u64 {
        self.leaf
    }

    pub fn decorrelator(&self) -> Xorshift128 {
        self.decorrelator
    }

    pub fn mode(&self) -> OutputMode {
        self.mode
    }

    /// Outputs emitted so far.
    pub fn position(&self) -> u64 {
        self.position
    }

    #[inline(always)]
    fn step_independent(&mut self) -> u32 {
        self.leaf = self.direct.step(self.leaf);
        self.position = self.position.wrapping_add(1);
        emit_in_place(self.leaf, &mut self.decorrelator, self.mode)
    }

    #[inline(always)]
    fn step_from_root(&mut self, root: u64) -> u32 {
        self.leaf = leaf_transition(root, self.offset);
        self.position = self.position.wrapping_add(1);
        emit_in_place(self.leaf, &mut self.decorrelator, self.mode)
    }

    fn skip(&mut self, k: u64) {
        self.leaf = lcg_jump(self.direct, LcgState(self.leaf), k).0;
        if self.mode.decorrelate {
            self.decorrelator = xs_jump(self.decorrelator, k as u128);
        }
        self.position = self.position.wrapping_add(k);
    }
}

/// Anything that hands out 32-bit uniforms per stream index.
pub trait StreamSource {
    fn stream_count(&self) -> usize;

    fn next_u32(&mut self, stream: usize) -> Result<u32>;

    /// `next_u32 / 2^32`, in `[0, 1)`.
    fn next_f64(&mut self, stream: usize) -> Result<f64> {
        Ok(u32_to_unit(self.next_u32(stream)?))
    }
}

#[inline(always)]
pub fn u32_to_unit(v: u32) -> f64 {
    v as f64 * (1.0 / 4_294_967_296.0)
}

/// Multi-stream generator.
#[derive(Clone, Debug)]
pub struct MultiStreamRng {
    config: GeneratorConfig,
    params: LcgParams,
    origin: LcgState,
    master: Xorshift128,
    streams: Vec<StreamState>,
    batch: Option<RootBatch>,
}

impl MultiStreamRng {
    /// The root state `x_0` is the first splitmix64 output of the seed; the
    /// master decorrelator state is expanded from the second.
    pub fn new(config: GeneratorConfig) -> Result<Self> {
        config.validate()?;
        let params = config.profile.params();
        let mut sm = config.seed;
        let origin = LcgState(splitmix64_next(&mut sm));
        let master = Xorshift128::from_seed(splitmix64_next(&mut sm));
        let streams = (0..config.n_streams as u64)
            .map(|id| {
                let offset = default_offset_for(id);
                StreamState {
                    stream_id: id,
                    offset,
                    direct: leaf_params(params, offset),
                    leaf: leaf_transition(origin.0, offset),
                    decorrelator: substream_for(master, id),
                    mode: config.mode,
                    position: 0,
                }
            })
            .collect();
        Ok(Self {
            config,
            params,
            origin,
            master,
            streams,
            batch: None,
        })
    }

    pub fn config(&self) -> &GeneratorConfig {
        &self.config
    }

    /// Root recurrence parameters.
    pub fn params(&self) -> LcgParams {
        self.params
    }

    /// Root state `x_0`.
    pub fn origin(&self) -> LcgState {
        self.origin
    }

    pub fn master_decorrelator(&self) -> Xorshift128 {
        self.master
    }

    pub fn n_streams(&self) -> usize {
        self.streams.len()
    }

    pub fn stream(&self, stream: usize) -> Result<&StreamState> {
        self.streams.get(stream).ok_or(Error::StreamOutOfRange {
            index: stream,
            count: self.streams.len(),
        })
    }

    pub fn streams(&self) -> &[StreamState] {
        &self.streams
    }

    fn check(&self, stream: usize) -> Result<()> {
        if stream < self.streams.len() {
            Ok(())
        } else {
            Err(Error::StreamOutOfRange {
                index: stream,
                count: self.streams.len(),
            })
        }
    }

    /// Root state `x_index`, served from the cached batch or a freshly
    /// produced one aligned to the batch grid `1 + k * batch_size`.
    fn root_at(
        batch: &mut Option<RootBatch>,
        config: &GeneratorConfig,
        params: LcgParams,
        origin: LcgState,
        index: u64,
    ) -> u64 {
        if let Some(x) = batch.as_ref().and_then(|b| b.get(index)) {
            return x;
        }
        let bs = config.batch_size as u64;
        let start = (index.wrapping_sub(1) / bs) * bs + 1;
        let len = config.batch_size.min((u64::MAX - start) as usize + 1);
        let fresh = RootBatch::produce(params, origin, start, len, config.lanes)
            .expect("lane count validated at construction");
        let x = fresh.get(index).expect("index inside fresh batch");
        *batch = Some(fresh);
        x
    }

    /// Advances `stream` by one and returns its output.
    pub fn next_u32(&mut self, stream: usize) -> Result<u32> {
        self.check(stream)?;
        Ok(self.next_unchecked(stream))
    }

    #[inline]
    fn next_unchecked(&mut self, stream: usize) -> u32 {
        let st = &mut self.streams[stream];
        match self.config.plan {
            ExecutionPlan::IndependentLeaf => st.step_independent(),
            ExecutionPlan::SharedRootBatched => {
                let root = Self::root_at(
                    &mut self.batch,
                    &self.config,
                    self.params,
                    self.origin,
                    st.position.wrapping_add(1),
                );
                st.step_from_root(root)
            }
        }
    }

    pub fn next_f64_unit(&mut self, stream: usize) -> Result<f64> {
        Ok(u32_to_unit(self.next_u32(stream)?))
    }

    /// `count` consecutive outputs of `stream`.
    pub fn fill(&mut self, stream: usize, count: usize) -> Result<Vec<u32>> {
        let mut out = vec![0; count];
        self.fill_into(stream, &mut out)?;
        Ok(out)
    }

    pub fn fill_into(&mut self, stream: usize, out: &mut [u32]) -> Result<()> {
        self.check(stream)?;
        for slot in out.iter_mut() {
            *slot = self.next_unchecked(stream);
        }
        Ok(())
    }

    /// Jumps `stream` ahead by `k` outputs in `O(log k)`.
    pub fn skip(&mut self, stream: usize, k: u64) -> Result<()> {
        self.check(stream)?;
        self.streams[stream].skip(k);
        Ok(())
    }

    /// Round-robin over `streams` until `total` outputs are produced.
    pub fn interleave(&mut self, streams: &[usize], total: usize) -> Result<Vec<u32>> {
        if streams.is_empty() {
            return Err(Error::EmptyStreamSet);
        }
        for &s in streams {
            self.check(s)?;
        }
        let mut out = Vec::with_capacity(total);
        'rounds: loop {
            for &s in streams {
                if out.len() == total {
                    break 'rounds;
                }
                out.push(self.next_unchecked(s));
            }
        }
        Ok(out)
    }

    /// The next `per_stream` outputs of every stream, computed on a pool of
    /// `threads` workers. The result does not depend on `threads`.
    ///
    /// In the shared plan, when all streams are at the same position, each
    /// root batch is produced once and then read by all leaves in parallel.
    pub fn generate_all(&mut self, per_stream: usize, threads: usize) -> Result<Vec<Vec<u32>>> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
            .map_err(|e| Error::InvalidOption(format!("thread pool: {e}")))?;
        let mut outputs: Vec<Vec<u32>> = (0..self.streams.len())
            .map(|_| Vec::with_capacity(per_stream))
            .collect();
        match self.config.plan {
            ExecutionPlan::IndependentLeaf => pool.install(|| {
                self.streams
                    .par_iter_mut()
                    .zip(outputs.par_iter_mut())
                    .for_each(|(st, out)| {
                        out.extend((0..per_stream).map(|_| st.step_independent()));
                    })
            }),
            ExecutionPlan::SharedRootBatched => {
                let first = self.streams[0].position;
                if self.streams.iter().any(|s| s.position != first) {
                    for (i, out) in outputs.iter_mut().enumerate() {
                        out.resize(per_stream, 0);
                        self.fill_into(i, out)?;
                    }
                    return Ok(outputs);
                }
                let mut done = 0usize;
                while done < per_stream {
                    let len = self.config.batch_size.min(per_stream - done);
                    let start = first.wrapping_add(done as u64).wrapping_add(1);
                    let batch = RootBatch::produce(
                        self.params,
                        self.origin,
                        start,
                        len,
                        self.config.lanes,
                    )?;
                    pool.install(|| {
                        self.streams
                            .par_iter_mut()
                            .zip(outputs.par_iter_mut())
                            .for_each(|(st, out)| {
                                out.extend(batch.states().iter().map(|&x| st.step_from_root(x)));
                            })
                    });
                    self.batch = Some(batch);
                    done += len;
                }
            }
        }
        Ok(outputs)
    }
}

impl StreamSource for MultiStreamRng {
    fn stream_count(&self) -> usize {
        self.n_streams()
    }

    fn next_u32(&mut self, stream: usize) -> Result<u32> {
        MultiStreamRng::next_u32(self, stream)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::output::emit;

    fn cfg(n: usize) -> GeneratorConfig {
        GeneratorConfig::new(0, n)
    }

    #[test]
    fn construction() {
        let g = MultiStreamRng::new(cfg(1)).unwrap();
        assert_eq!(g.n_streams(), 1);
        assert_eq!(g.stream(0).unwrap().position(), 0);
        assert!(matches!(MultiStreamRng::new(cfg(0)), Err(Error::NoStreams)));
        assert!(MultiStreamRng::new(cfg(1).with_batch_size(0)).is_err());
        assert!(MultiStreamRng::new(cfg(1).with_lanes(0)).is_err());
    }

    #[test]
    fn plans_agree_small() {
        for mode in OutputMode::ALL {
            let mut a = MultiStreamRng::new(cfg(3).with_mode(mode)).unwrap();
            let mut b = MultiStreamRng::new(
                cfg(3)
                    .with_mode(mode)
                    .with_plan(ExecutionPlan::IndependentLeaf),
            )
            .unwrap();
            for s in 0..3 {
                assert_eq!(a.fill(s, 10_000).unwrap(), b.fill(s, 10_000).unwrap());
            }
        }
    }

    #[test]
    fn isolation_and_range() {
        let mut g = MultiStreamRng::new(cfg(2)).unwrap();
        g.fill(0, 5).unwrap();
        assert_eq!(g.stream(1).unwrap().position(), 0);
        assert_eq!(g.stream(0).unwrap().position(), 5);
        assert!(matches!(
            g.next_u32(2),
            Err(Error::StreamOutOfRange { index: 2, count: 2 })
        ));
        assert!(g.fill(7, 1).is_err());
        assert!(g.skip(7, 1).is_err());
        assert!(g.next_f64_unit(7).is_err());
    }

    #[test]
    fn output_is_emit_of_leaf() {
        let mut g = MultiStreamRng::new(cfg(4)).unwrap();
        let before = g.stream(3).unwrap().clone();
        let out = g.next_u32(3).unwrap();
        let leaf = before.direct_params().step(before.leaf());
        let (expect, d) = emit(leaf, before.decorrelator(), OutputMode::FULL);
        assert_eq!(out, expect);
        assert_eq!(g.stream(3).unwrap().decorrelator(), d);
        assert_eq!(g.stream(3).unwrap().leaf(), leaf);
    }

    #[test]
    fn fill_definitions() {
        let mut a = MultiStreamRng::new(cfg(2)).unwrap();
        let mut b = a.clone();
        assert!(a.fill(0, 0).unwrap().is_empty());
        assert_eq!(a.stream(0).unwrap().position(), 0);
        let one: Vec<u32> = (0..100).map(|_| b.next_u32(0).unwrap()).collect();
        let mut two = a.fill(0, 50).unwrap();
        two.extend(a.fill(0, 50).unwrap());
        assert_eq!(one, two);
    }

    #[test]
    fn skip_matches_stepping() {
        for mode in OutputMode::ALL {
            for plan in [
                ExecutionPlan::SharedRootBatched,
                ExecutionPlan::IndependentLeaf,
            ] {
                let c = cfg(2).with_mode(mode).with_plan(plan);
                let mut a = MultiStreamRng::new(c.clone()).unwrap();
                let mut b = MultiStreamRng::new(c).unwrap();
                a.skip(1, 0).unwrap();
                assert_eq!(a.stream(1).unwrap(), b.stream(1).unwrap());
                a.skip(1, 1234).unwrap();
                let tail = a.fill(1, 10).unwrap();
                let full = b.fill(1, 1244).unwrap();
                assert_eq!(tail, full[1234..]);
            }
        }
    }

    #[test]
    fn unit_conversion() {
        assert_eq!(u32_to_unit(0), 0.0);
        assert_eq!(u32_to_unit(1 << 31), 0.5);
        let top = u32_to_unit(u32::MAX);
        assert_eq!(top, (u32::MAX as f64) / 4_294_967_296.0);
        assert!(top < 1.0);
    }

    #[test]
    fn interleave_round_robin() {
        let mut g = MultiStreamRng::new(cfg(3)).unwrap();
        let mut twin = g.clone();
        let mixed = g.interleave(&[0, 1], 5).unwrap();
        let a = twin.fill(0, 3).unwrap();
        let b = twin.fill(1, 2).unwrap();
        assert_eq!(mixed, vec![a[0], b[0], a[1], b[1], a[2]]);
        assert!(matches!(g.interleave(&[], 3), Err(Error::EmptyStreamSet)));

        let mut g = MultiStreamRng::new(cfg(1)).unwrap();
        let mut twin = g.clone();
        assert_eq!(g.interleave(&[0], 5).unwrap(), twin.fill(0, 5).unwrap());
    }

    #[test]
    fn generate_all_matches_fill() {
        for plan in [
            ExecutionPlan::SharedRootBatched,
            ExecutionPlan::IndependentLeaf,
        ] {
            let c = cfg(5).with_plan(plan).with_batch_size(7);
            let mut a = MultiStreamRng::new(c.clone()).unwrap();
            let mut b = MultiStreamRng::new(c).unwrap();
            let bulk = a.generate_all(50, 3).unwrap();
            for (s, got) in bulk.iter().enumerate() {
                assert_eq!(got, &b.fill(s, 50).unwrap());
            }
            // misaligned positions take the per-stream route
            a.skip(2, 3).unwrap();
            b.skip(2, 3).unwrap();
            let bulk = a.generate_all(20, 2).unwrap();
            for (s, got) in bulk.iter().enumerate() {
                assert_eq!(got, &b.fill(s, 20).unwrap());
            }
        }
    }

    #[test]
    fn batch_size_and_lanes_do_not_change_output() {
        let mut reference = MultiStreamRng::new(cfg(2)).unwrap();
        let expect = reference.fill(1, 5000).unwrap();
        for (bs, lanes) in [(1, 1), (3, 6), (4096, 8), (10_000, 2)] {
            let mut g = MultiStreamRng::new(cfg(2).with_batch_size(bs).with_lanes(lanes)).unwrap();
            assert_eq!(g.fill(1, 5000).unwrap(), expect);
        }
    }
}
