//! Shared-root state derivation.
//!
//! One root LCG `x_{n+1} = a x_n + c` feeds any number of leaf streams
//! `w_n = x_n + h`. Each leaf is itself an LCG with the same multiplier:
//! substituting `x_n = w_n - h` into the root recurrence gives
//! `w_{n+1} = a w_n + (c + h - a h) mod 2^64`, so a leaf can equally be run
//! on its own. Since `a` is odd, `(a - 1) h` is always even and the leaf
//! increment has the parity of `c` for every `h`.

use crate::error::{Error, Result};
use crate::lcg::{advance_params, lcg_jump, AdvanceParams, LcgParams, LcgState};

/// Constant added to the root state to form a leaf state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LeafOffset(pub u64);

impl LeafOffset {
    pub fn is_even(&self) -> bool {
        self.0 & 1 == 0
    }
}

#[inline(always)]
pub fn leaf_transition(x: u64, h: LeafOffset) -> u64 {
    x.wrapping_add(h.0)
}

/// `(c + h - a h) mod 2^64`: the increment of the direct LCG that produces
/// the leaf sequence `x_n + h`.
pub fn effective_increment(params: LcgParams, h: LeafOffset) -> u64 {
    params
        .increment
        .wrapping_add(h.0)
        .wrapping_sub(params.multiplier.wrapping_mul(h.0))
}

/// Parameters of the direct LCG equivalent to the leaf with offset `h`.
pub fn leaf_params(params: LcgParams, h: LeafOffset) -> LcgParams {
    LcgParams::new(params.multiplier, effective_increment(params, h))
}

/// `h = 2 * stream_id`.
///
/// # Panics
/// If `stream_id >= 2^63`.
pub fn default_offset_for(stream_id: u64) -> LeafOffset {
    assert!(
        stream_id < 1 << 63,
        "stream id {stream_id} has no even offset"
    );
    LeafOffset(stream_id << 1)
}

/// Maximum number of lanes in a [`RootGenerator`].
pub const MAX_LANES: usize = 64;

/// Root sequence produced by `L` interleaved lanes, each advancing by `L` steps.
///
/// Lane `j` holds `x_{s+1+j}, x_{s+1+j+L}, ...`; reading the lanes round-robin
/// yields the plain sequence `x_{s+1}, x_{s+2}, ...`.
#[derive(Clone, Debug)]
pub struct RootGenerator {
    params: LcgParams,
    lanes: Vec<u64>,
    stride: AdvanceParams,
    cursor: usize,
}

impl RootGenerator {
    /// Positions the lanes so the first call to [`next`](Self::next) returns
    /// the successor of `seed`.
    pub fn new(params: LcgParams, seed: LcgState, lanes: usize) -> Result<Self> {
        if lanes == 0 || lanes > MAX_LANES {
            return Err(Error::InvalidLanes(lanes));
        }
        let lanes_v = (0..lanes as u64)
            .map(|j| lcg_jump(params, seed, j + 1).0)
            .collect();
        Ok(Self {
            params,
            lanes: lanes_v,
            stride: advance_params(params, lanes as u64),
            cursor: 0,
        })
    }

    pub fn params(&self) -> LcgParams {
        self.params
    }

    pub fn lane_count(&self) -> usize {
        self.lanes.len()
    }

    /// Next root state in global order.
    #[inline]
    #[allow(clippy::should_implement_trait)]
    pub fn next(&mut self) -> u64 {
        let lane = &mut self.lanes[self.cursor];
        let out = *lane;
        *lane = self.stride.apply(out);
        self.cursor += 1;
        if self.cursor == self.lanes.len() {
            self.cursor = 0;
        }
        out
    }

    pub fn fill(&mut self, out: &mut [u64]) {
        for slot in out {
            *slot = self.next();
        }
    }
}

/// Immutable block of consecutive root states, `states[k] = x_{start + k}`.
#[derive(Clone, Debug)]
pub struct RootBatch {
    start: u64,
    states: Vec<u64>,
}

impl RootBatch {
    /// Produces `len` root states starting at global index `start >= 1`, given
    /// the initial root state `x_0`.
    pub fn produce(
        params: LcgParams,
        origin: LcgState,
        start: u64,
        len: usize,
        lanes: usize,
    ) -> Result<Self> {
        let before = lcg_jump(params, origin, start.saturating_sub(1));
        let mut gen = RootGenerator::new(params, before, lanes)?;
        let mut states = vec![0; len];
        gen.fill(&mut states);
        Ok(Self { start, states })
    }

    pub fn start(&self) -> u64 {
        self.start
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn contains(&self, index: u64) -> bool {
        index >= self.start && index - self.start < self.states.len() as u64
    }

    /// Root state at global index `index`, if it lies in this batch.
    #[inline]
    pub fn get(&self, index: u64) -> Option<u64> {
        if self.contains(index) {
            Some(self.states[(index - self.start) as usize])
        } else {
            None
        }
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }
}
