//! Per-stream output function: scramble the 64-bit leaf state down to 32 bits,
//! then optionally XOR with the stream's decorrelator output.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::decorrelator::Xorshift128;
use crate::error::Error;
use crate::lcg::truncate_high32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scramble {
    TruncateHigh32,
    PermuteXshRr,
}

/// Which of the two output techniques are enabled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OutputMode {
    pub scramble: Scramble,
    pub decorrelate: bool,
}

impl OutputMode {
    pub const BASELINE: Self = Self::new(Scramble::TruncateHigh32, false);
    pub const DECORRELATION: Self = Self::new(Scramble::TruncateHigh32, true);
    pub const PERMUTATION: Self = Self::new(Scramble::PermuteXshRr, false);
    pub const FULL: Self = Self::new(Scramble::PermuteXshRr, true);

    pub const ALL: [Self; 4] = [
        Self::BASELINE,
        Self::DECORRELATION,
        Self::PERMUTATION,
        Self::FULL,
    ];

    pub const fn new(scramble: Scramble, decorrelate: bool) -> Self {
        Self {
            scramble,
            decorrelate,
        }
    }

    /// Short name used on the command line.
    pub fn name(&self) -> &'static str {
        match (self.scramble, self.decorrelate) {
            (Scramble::TruncateHigh32, false) => "baseline",
            (Scramble::TruncateHigh32, true) => "decorr",
            (Scramble::PermuteXshRr, false) => "perm",
            (Scramble::PermuteXshRr, true) => "full",
        }
    }
}

impl Default for OutputMode {
    fn default() -> Self {
        Self::FULL
    }
}

impl fmt::Display for OutputMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OutputMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(Self::BASELINE),
            "decorr" => Ok(Self::DECORRELATION),
            "perm" => Ok(Self::PERMUTATION),
            "full" => Ok(Self::FULL),
            other => Err(Error::InvalidOption(format!(
                "unknown mode {other:?} (expected baseline, decorr, perm or full)"
            ))),
        }
    }
}

/// XSH-RR 64 -> 32: xorshift the high bits down, then rotate right by the
/// top five bits of the state.
#[inline(always)]
pub fn xsh_rr(w: u64) -> u32 {
    let rot = (w >> 59) as u32;
    let folded = (((w >> 18) ^ w) >> 27) as u32;
    folded.rotate_right(rot)
}

#[inline(always)]
pub fn scramble(w: u64, how: Scramble) -> u32 {
    match how {
        Scramble::TruncateHigh32 => truncate_high32(w),
        Scramble::PermuteXshRr => xsh_rr(w),
    }
}

/// Output for leaf state `w`. When decorrelating, `d` advances one step.
pub fn emit(w: u64, d: Xorshift128, mode: OutputMode) -> (u32, Xorshift128) {
    let mut d = d;
    let out = emit_in_place(w, &mut d, mode);
    (out, d)
}

#[inline(always)]
pub(crate) fn emit_in_place(w: u64, d: &mut Xorshift128, mode: OutputMode) -> u32 {
    let scrambled = scramble(w, mode.scramble);
    if mode.decorrelate {
        scrambled ^ d.next_u32()
    } else {
        scrambled
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decorrelator::xs_step;

    #[test]
    fn xsh_rr_examples() {
        assert_eq!(xsh_rr(0), 0);
        let w = 1u64 << 59;
        let folded = ((((w >> 18) ^ w) >> 27) & 0xFFFF_FFFF) as u32;
        assert_eq!(folded, 0x4000);
        assert_eq!(xsh_rr(w), folded.rotate_right(1));
        assert_eq!(xsh_rr(w), 0x2000);
        // all-ones input: the xorshift clears the low 19 bits of the fold
        let w = u64::MAX;
        let folded = ((((w >> 18) ^ w) >> 27) & 0xFFFF_FFFF) as u32;
        assert_eq!(folded, 0xFFF8_0000);
        assert_eq!(xsh_rr(w), folded.rotate_right(31));
        assert_eq!(xsh_rr(w), 0xFFF0_0001);
    }

    #[test]
    fn emit_baseline_passes_through() {
        let d = Xorshift128::default();
        let (out, d2) = emit(0xABCD_0000_1234_0000, d, OutputMode::BASELINE);
        assert_eq!(out, 0xABCD_0000);
        assert_eq!(d2, d);
    }

    #[test]
    fn emit_decorrelated_xors() {
        let d = Xorshift128::default();
        let (_, k) = xs_step(d);
        // leaf whose high word equals the decorrelator output cancels to zero
        let w = (k as u64) << 32 | 0x55;
        let (out, d2) = emit(w, d, OutputMode::DECORRELATION);
        assert_eq!(out, 0);
        assert_eq!(d2, xs_step(d).0);

        let w = 0x0123_4567_89AB_CDEF;
        let (out, _) = emit(w, d, OutputMode::FULL);
        assert_eq!(out, xsh_rr(w) ^ k);
    }

    #[test]
    fn mode_names_round_trip() {
        for mode in OutputMode::ALL {
            assert_eq!(mode.name().parse::<OutputMode>().unwrap(), mode);
        }
        assert!("nope".parse::<OutputMode>().is_err());
    }
}
