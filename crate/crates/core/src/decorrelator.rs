//! Marsaglia's xorshift128 with GF(2) jump-ahead.
//!
//! Every stream XORs its scrambled leaf output with its own xorshift128
//! substream. Substreams are `2^64` steps apart on the single period
//! `2^128 - 1` cycle, so up to `2^64` streams never overlap.

use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Marsaglia's published seed.
pub const DEFAULT_SEED: [u32; 4] = [123456789, 362436069, 521288629, 88675123];

/// 128-bit xorshift state. Never all-zero.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Xorshift128 {
    x: u32,
    y: u32,
    z: u32,
    w: u32,
}

impl fmt::Debug for Xorshift128 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Xorshift128({:#010x}, {:#010x}, {:#010x}, {:#010x})",
            self.x, self.y, self.z, self.w
        )
    }
}

impl Default for Xorshift128 {
    fn default() -> Self {
        let [x, y, z, w] = DEFAULT_SEED;
        Self { x, y, z, w }
    }
}

#[inline(always)]
fn step_words(x: u32, y: u32, z: u32, w: u32) -> [u32; 4] {
    let t = x ^ (x << 11);
    [y, z, w, w ^ (w >> 19) ^ t ^ (t >> 8)]
}

impl Xorshift128 {
    pub fn new(x: u32, y: u32, z: u32, w: u32) -> Result<Self> {
        if x | y | z | w == 0 {
            return Err(Error::InvalidOption(
                "xorshift128 state must not be all zero".into(),
            ));
        }
        Ok(Self { x, y, z, w })
    }

    /// Expands a 64-bit seed with two splitmix64 outputs. An all-zero
    /// expansion is replaced by [`DEFAULT_SEED`].
    pub fn from_seed(seed: u64) -> Self {
        let mut sm = seed;
        let lo = splitmix64_next(&mut sm);
        let hi = splitmix64_next(&mut sm);
        let s = Self {
            x: lo as u32,
            y: (lo >> 32) as u32,
            z: hi as u32,
            w: (hi >> 32) as u32,
        };
        if s.to_bits() == 0 {
            Self::default()
        } else {
            s
        }
    }

    pub fn words(&self) -> [u32; 4] {
        [self.x, self.y, self.z, self.w]
    }

    /// Packs `x` into bits 0..32, `y` into 32..64, `z` into 64..96 and `w` into 96..128.
    pub fn to_bits(&self) -> u128 {
        (self.x as u128)
            | ((self.y as u128) << 32)
            | ((self.z as u128) << 64)
            | ((self.w as u128) << 96)
    }

    fn from_bits_unchecked(v: u128) -> Self {
        Self {
            x: v as u32,
            y: (v >> 32) as u32,
            z: (v >> 64) as u32,
            w: (v >> 96) as u32,
        }
    }

    pub fn from_bits(v: u128) -> Result<Self> {
        if v == 0 {
            return Err(Error::InvalidOption(
                "xorshift128 state must not be all zero".into(),
            ));
        }
        Ok(Self::from_bits_unchecked(v))
    }

    /// Advances one step and returns the new `w`.
    #[inline(always)]
    pub fn next_u32(&mut self) -> u32 {
        let [x, y, z, w] = step_words(self.x, self.y, self.z, self.w);
        self.x = x;
        self.y = y;
        self.z = z;
        self.w = w;
        w
    }

    /// `k` steps ahead.
    pub fn jump(&self, k: u128) -> Self {
        xs_jump(*self, k)
    }
}

/// One xorshift128 step: `t = x ^ (x << 11)`, shift the words down and
/// `w' = w ^ (w >> 19) ^ t ^ (t >> 8)`.
pub fn xs_step(s: Xorshift128) -> (Xorshift128, u32) {
    let mut next = s;
    let out = next.next_u32();
    (next, out)
}

fn step_bits(v: u128) -> u128 {
    let [x, y, z, w] = step_words(
        v as u32,
        (v >> 32) as u32,
        (v >> 64) as u32,
        (v >> 96) as u32,
    );
    (x as u128) | ((y as u128) << 32) | ((z as u128) << 64) | ((w as u128) << 96)
}

/// 128x128 matrix over GF(2), acting on row vectors: `v * M` is the XOR of
/// the rows selected by the set bits of `v`.
#[derive(Clone, PartialEq, Eq)]
pub struct Gf2Matrix128 {
    rows: [u128; 128],
}

impl fmt::Debug for Gf2Matrix128 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Gf2Matrix128").finish_non_exhaustive()
    }
}

impl Gf2Matrix128 {
    pub fn identity() -> Self {
        let mut rows = [0u128; 128];
        for (i, row) in rows.iter_mut().enumerate() {
            *row = 1u128 << i;
        }
        Self { rows }
    }

    pub fn from_rows(rows: [u128; 128]) -> Self {
        Self { rows }
    }

    pub fn rows(&self) -> &[u128; 128] {
        &self.rows
    }

    #[inline]
    pub fn apply(&self, v: u128) -> u128 {
        let mut acc = 0u128;
        let mut bits = v;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            acc ^= self.rows[i];
            bits &= bits - 1;
        }
        acc
    }

    /// `self * other`: apply `self` first, then `other`.
    pub fn mul(&self, other: &Self) -> Self {
        let mut rows = [0u128; 128];
        for (dst, src) in rows.iter_mut().zip(self.rows.iter()) {
            *dst = other.apply(*src);
        }
        Self { rows }
    }

    pub fn pow(&self, mut k: u128) -> Self {
        let mut acc = Self::identity();
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        acc
    }
}

/// Transition matrix `T` with `bits(s) * T = bits(xs_step(s))`, built row by
/// row from the images of the unit vectors.
pub fn xs_transition_matrix() -> Gf2Matrix128 {
    let mut rows = [0u128; 128];
    for (i, row) in rows.iter_mut().enumerate() {
        *row = step_bits(1u128 << i);
    }
    Gf2Matrix128 { rows }
}

/// `T^(2^i)` for `i` in `0..128`.
fn jump_table() -> &'static [Gf2Matrix128] {
    static TABLE: OnceLock<Vec<Gf2Matrix128>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = Vec::with_capacity(128);
        let mut m = xs_transition_matrix();
        for _ in 0..128 {
            let next = m.mul(&m);
            table.push(m);
            m = next;
        }
        table
    })
}

/// `k`-fold [`xs_step`] via the precomputed powers `T^(2^i)`.
pub fn xs_jump(s: Xorshift128, k: u128) -> Xorshift128 {
    if k == 0 {
        return s;
    }
    let table = jump_table();
    let mut v = s.to_bits();
    let mut bits = k;
    while bits != 0 {
        let i = bits.trailing_zeros() as usize;
        v = table[i].apply(v);
        bits &= bits - 1;
    }
    // T is invertible, so a nonzero state never maps to zero
    Xorshift128::from_bits_unchecked(v)
}

/// Substream spacing in steps.
pub const SUBSTREAM_SPACING_LOG2: u32 = 64;

/// `master` advanced by `stream_id * 2^64` steps.
pub fn substream_for(master: Xorshift128, stream_id: u64) -> Xorshift128 {
    xs_jump(master, (stream_id as u128) << SUBSTREAM_SPACING_LOG2)
}

/// splitmix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One splitmix64 output; advances `state` by the golden-ratio increment.
#[inline]
pub fn splitmix64_next(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    mix64(*state)
}
