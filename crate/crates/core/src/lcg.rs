//! Linear congruential recurrence over modulus 2^64.
//!
//! The modulus is implicit: every operation uses wrapping 64-bit arithmetic,
//! so `x_{n+1} = (a * x_n + c) mod 2^64` is just `a.wrapping_mul(x).wrapping_add(c)`.

use crate::error::{Error, Result};

/// Multiplier used by the default parameter profiles.
pub const DEFAULT_MULTIPLIER: u64 = 6364136223846793005;
/// Increment of the default profile. Even, so it fails Hull-Dobell.
pub const PAPER_INCREMENT: u64 = 54;
/// Odd increment used by the strict profile.
pub const STRICT_INCREMENT: u64 = 1442695040888963407;

/// Multiplier and increment of an LCG modulo 2^64.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LcgParams {
    pub multiplier: u64,
    pub increment: u64,
}

impl LcgParams {
    pub const fn new(multiplier: u64, increment: u64) -> Self {
        Self {
            multiplier,
            increment,
        }
    }

    /// `a = 6364136223846793005`, `c = 54`.
    pub const fn paper() -> Self {
        Self::new(DEFAULT_MULTIPLIER, PAPER_INCREMENT)
    }

    /// Same multiplier with an odd increment, so every leaf stream has full period.
    pub const fn strict() -> Self {
        Self::new(DEFAULT_MULTIPLIER, STRICT_INCREMENT)
    }

    /// Applies one step of the recurrence.
    #[inline(always)]
    pub fn step(&self, x: u64) -> u64 {
        self.multiplier.wrapping_mul(x).wrapping_add(self.increment)
    }
}

impl Default for LcgParams {
    fn default() -> Self {
        Self::paper()
    }
}

/// Current state `x_n` of an LCG. Any 64-bit value is valid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct LcgState(pub u64);

/// Affine map equal to `stride` applications of the base recurrence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AdvanceParams {
    pub stride: u64,
    /// `a^k mod 2^64`
    pub mult: u64,
    /// `c * (a^k - 1) / (a - 1) mod 2^64`
    pub incr: u64,
}

impl AdvanceParams {
    #[inline(always)]
    pub fn apply(&self, x: u64) -> u64 {
        self.mult.wrapping_mul(x).wrapping_add(self.incr)
    }

    /// The advance as plain LCG parameters.
    pub fn as_params(&self) -> LcgParams {
        LcgParams::new(self.mult, self.incr)
    }
}

pub fn lcg_step(params: LcgParams, s: LcgState) -> LcgState {
    LcgState(params.step(s.0))
}

/// High 32 bits of a 64-bit state. The low bits of a power-of-two LCG have
/// short periods, so they are discarded.
#[inline(always)]
pub fn truncate_high32(x: u64) -> u32 {
    (x >> 32) as u32
}

/// Computes the `k`-step advance by binary decomposition of `k`
/// (Brown's doubling recurrence). No division is needed, so the result is
/// exact modulo 2^64 for any multiplier.
pub fn advance_params(params: LcgParams, k: u64) -> AdvanceParams {
    let mut acc_mult: u64 = 1;
    let mut acc_incr: u64 = 0;
    let mut cur_mult = params.multiplier;
    let mut cur_incr = params.increment;
    let mut delta = k;
    while delta > 0 {
        if delta & 1 == 1 {
            acc_mult = acc_mult.wrapping_mul(cur_mult);
            acc_incr = acc_incr.wrapping_mul(cur_mult).wrapping_add(cur_incr);
        }
        cur_incr = cur_mult.wrapping_add(1).wrapping_mul(cur_incr);
        cur_mult = cur_mult.wrapping_mul(cur_mult);
        delta >>= 1;
    }
    AdvanceParams {
        stride: k,
        mult: acc_mult,
        incr: acc_incr,
    }
}

/// State after `k` steps, in `O(log k)` multiplications.
pub fn lcg_jump(params: LcgParams, s: LcgState, k: u64) -> LcgState {
    LcgState(advance_params(params, k).apply(s.0))
}

/// Hull-Dobell conditions for a power-of-two modulus: `c` odd and `a = 1 mod 4`.
pub fn validate_full_period(params: LcgParams) -> bool {
    params.increment & 1 == 1 && params.multiplier & 3 == 1
}

/// Largest modulus width accepted by [`scaled_period`].
pub const MAX_SCALED_BITS: u32 = 20;

/// An LCG over modulus `2^bits`, small enough to walk its cycles exhaustively.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScaledLcg {
    bits: u32,
    multiplier: u64,
    increment: u64,
}

impl ScaledLcg {
    /// Reduces `multiplier` and `increment` modulo `2^bits`.
    pub fn new(bits: u32, multiplier: u64, increment: u64) -> Result<Self> {
        if !(4..=MAX_SCALED_BITS).contains(&bits) {
            return Err(Error::ScaledWidth(bits));
        }
        let mask = (1u64 << bits) - 1;
        Ok(Self {
            bits,
            multiplier: multiplier & mask,
            increment: increment & mask,
        })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn modulus(&self) -> u64 {
        1u64 << self.bits
    }

    pub fn multiplier(&self) -> u64 {
        self.multiplier
    }

    pub fn increment(&self) -> u64 {
        self.increment
    }

    #[inline(always)]
    pub fn step(&self, x: u64) -> u64 {
        self.multiplier.wrapping_mul(x).wrapping_add(self.increment) & (self.modulus() - 1)
    }
}

/// Length of the cycle that `start` eventually enters.
///
/// Walks `2^bits` steps to land inside the cycle (the tail of an LCG
/// trajectory can never be longer than the state space) and then walks the
/// cycle once.
pub fn scaled_period(lcg: ScaledLcg, start: u64) -> u64 {
    let m = lcg.modulus();
    let mut x = start & (m - 1);
    for _ in 0..m {
        x = lcg.step(x);
    }
    let anchor = x;
    let mut period = 0;
    loop {
        x = lcg.step(x);
        period += 1;
        if x == anchor {
            return period;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: u64 = DEFAULT_MULTIPLIER;

    #[test]
    fn step_examples() {
        let p = LcgParams::paper();
        assert_eq!(lcg_step(p, LcgState(0)), LcgState(54));
        assert_eq!(lcg_step(p, LcgState(1)), LcgState(6364136223846793059));
        // (a * 2^63 + 54) mod 2^64, from 128-bit arithmetic
        let wide = ((A as u128) * (1u128 << 63) + 54) as u64;
        assert_eq!(wide, 9223372036854775862);
        assert_eq!(lcg_step(p, LcgState(1 << 63)), LcgState(wide));
    }

    #[test]
    fn truncation_keeps_high_bits() {
        assert_eq!(truncate_high32(0), 0);
        assert_eq!(truncate_high32(0xFFFF_FFFF_0000_0000), 0xFFFF_FFFF);
        assert_eq!(truncate_high32(0x0123_4567_89AB_CDEF), 0x0123_4567);
    }

    #[test]
    fn advance_small_strides() {
        let p = LcgParams::paper();
        let a0 = advance_params(p, 0);
        assert_eq!((a0.mult, a0.incr), (1, 0));
        let a1 = advance_params(p, 1);
        assert_eq!((a1.mult, a1.incr), (A, 54));
        let a2 = advance_params(p, 2);
        assert_eq!(a2.mult, 7520897724310334953);
        assert_eq!(a2.incr, 11621962760954893236);
    }

    #[test]
    fn jump_matches_stepping() {
        let p = LcgParams::paper();
        let seed = LcgState(0x1234_5678_9ABC_DEF0);
        assert_eq!(lcg_jump(p, seed, 0), seed);
        let mut s = seed;
        for _ in 0..1000 {
            s = lcg_step(p, s);
        }
        assert_eq!(lcg_jump(p, seed, 1000), s);
        let half = lcg_jump(p, seed, 1 << 39);
        assert_eq!(lcg_jump(p, half, 1 << 39), lcg_jump(p, seed, 1 << 40));
    }

    #[test]
    fn hull_dobell_flags() {
        assert!(!validate_full_period(LcgParams::paper()));
        assert!(validate_full_period(LcgParams::strict()));
        assert!(!validate_full_period(LcgParams::new(3, 1)));
    }

    #[test]
    fn scaled_period_examples() {
        assert_eq!(scaled_period(ScaledLcg::new(4, 5, 1).unwrap(), 0), 16);
        assert!(scaled_period(ScaledLcg::new(4, 5, 2).unwrap(), 0) < 16);
        assert_eq!(scaled_period(ScaledLcg::new(8, 5, 1).unwrap(), 7), 256);
    }

    #[test]
    fn scaled_width_is_bounded() {
        assert!(matches!(
            ScaledLcg::new(21, 5, 1),
            Err(Error::ScaledWidth(21))
        ));
        assert!(ScaledLcg::new(3, 5, 1).is_err());
    }

    #[test]
    fn hull_dobell_desk_scale() {
        for bits in [4u32, 8, 12] {
            let m = 1u64 << bits;
            for a in (1..m).filter(|a| a % 4 == 1) {
                for c in 0..m.min(64) {
                    let period = scaled_period(ScaledLcg::new(bits, a, c).unwrap(), 0);
                    if c % 2 == 1 {
                        assert_eq!(period, m, "bits={bits} a={a} c={c}");
                    } else {
                        assert!(period < m, "bits={bits} a={a} c={c}");
                    }
                }
                if bits == 12 {
                    break;
                }
            }
        }
        let lcg = ScaledLcg::new(16, A, 12345).unwrap();
        assert_eq!(scaled_period(lcg, 99), 1 << 16);
        let lcg = ScaledLcg::new(16, A, 54).unwrap();
        assert!(scaled_period(lcg, 99) < 1 << 16);
    }
}
