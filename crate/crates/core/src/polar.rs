//! The polar transform `x = u·G_n` with `G_n = G_2^{⊗m}` in natural order
//! (no bit reversal), and the successive-cancellation likelihood recursion
//! that matches it.
//!
//! Splitting `u = (a, b)` into halves gives `x = ((a ⊕ b)·G', b·G')`, so the
//! bit channels of `a` are those of the half-length code over the check
//! combination of coordinates `j` and `j + n/2`, and the bit channels of `b`
//! are those over the variable combination once `a·G'` is known.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelSpec;
use crate::error::{Error, Result};

/// Block length `n = 2^m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolarParams {
    m: u32,
    n: usize,
}

impl PolarParams {
    pub fn new(m: u32) -> Result<Self> {
        if m > 30 {
            return Err(Error::InvalidParameter(format!("m = {m} is too large")));
        }
        Ok(Self { m, n: 1 << m })
    }

    pub fn from_len(n: usize) -> Result<Self> {
        if !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        Self::new(n.trailing_zeros())
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// `u·G_n` over GF(2). The transform is an involution.
pub fn encode_transform(u: &[u8]) -> Result<Vec<u8>> {
    if !u.len().is_power_of_two() {
        return Err(Error::NotPowerOfTwo(u.len()));
    }
    let mut x = u.to_vec();
    transform_in_place(&mut x);
    Ok(x)
}

/// In-place butterfly; `x.len()` must be a power of two.
pub fn transform_in_place(x: &mut [u8]) {
    let n = x.len();
    debug_assert!(n.is_power_of_two());
    let mut half = n / 2;
    while half >= 1 {
        for block in x.chunks_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter()) {
                *a ^= *b;
            }
        }
        half /= 2;
    }
}

/// Likelihood pair `(P[· | bit = 0], P[· | bit = 1])`.
pub type Pair = [f64; 2];

#[inline]
fn rescale(p: Pair) -> Pair {
    let max = p[0].max(p[1]);
    if max > 0.0 {
        [p[0] / max, p[1] / max]
    } else {
        p
    }
}

#[inline]
fn check_node(a: Pair, b: Pair) -> Pair {
    rescale([a[0] * b[0] + a[1] * b[1], a[1] * b[0] + a[0] * b[1]])
}

#[inline]
fn variable_node(a: Pair, b: Pair, alpha: u8) -> Pair {
    let s = alpha as usize;
    rescale([a[s] * b[0], a[s ^ 1] * b[1]])
}

/// Scratch buffers for one SC pass over a length-`n` block.
///
/// `pairs[d]` holds the `n >> d` likelihood pairs entering depth `d`, and
/// `partial[d]` the sub-codeword produced at that depth.
#[derive(Debug, Clone)]
pub struct LikelihoodState {
    n: usize,
    pairs: Vec<Vec<Pair>>,
    partial: Vec<Vec<u8>>,
    u: Vec<u8>,
}

impl LikelihoodState {
    pub fn new(params: PolarParams) -> Self {
        let n = params.n();
        let levels = params.m() as usize + 1;
        Self {
            n,
            pairs: (0..levels).map(|d| vec![[0.0; 2]; n >> d]).collect(),
            partial: (0..levels).map(|d| vec![0; n >> d]).collect(),
            u: vec![0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Loads the per-coordinate channel likelihoods `(W(y_j|0), W(y_j|1))`.
    pub fn load_observation(&mut self, ch: &ChannelSpec, obs: &[usize]) -> Result<()> {
        if obs.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: obs.len(),
            });
        }
        let size = ch.output_size();
        for (slot, &y) in self.pairs[0].iter_mut().zip(obs) {
            if y >= size {
                return Err(Error::UnknownSymbol { symbol: y, size });
            }
            *slot = [ch.prob(y, 0), ch.prob(y, 1)];
        }
        Ok(())
    }

    /// Runs SC in index order. `decide(i, pair)` receives the bit-channel
    /// likelihood pair for `u_i` given the loaded observation and the bits
    /// already decided, and returns `Some(bit)` to continue or `None` to stop.
    /// Returns `true` if the pass reached the last index.
    pub fn run<F>(&mut self, mut decide: F) -> Result<bool>
    where
        F: FnMut(usize, Pair) -> Result<Option<u8>>,
    {
        self.descend(0, 0, &mut decide)
    }

    /// Bits decided by the last pass.
    pub fn u(&self) -> &[u8] {
        &self.u
    }

    /// `u·G_n` for the last completed pass.
    pub fn codeword(&self) -> &[u8] {
        &self.partial[0]
    }

    fn descend<F>(&mut self, depth: usize, offset: usize, decide: &mut F) -> Result<bool>
    where
        F: FnMut(usize, Pair) -> Result<Option<u8>>,
    {
        let len = self.n >> depth;
        if len == 1 {
            let pair = self.pairs[depth][0];
            let Some(bit) = decide(offset, pair)? else {
                return Ok(false);
            };
            let bit = bit & 1;
            self.u[offset] = bit;
            self.partial[depth][0] = bit;
            return Ok(true);
        }
        let half = len / 2;

        {
            let (upper, lower) = self.pairs.split_at_mut(depth + 1);
            let src = &upper[depth];
            for (j, dst) in lower[0].iter_mut().enumerate() {
                *dst = check_node(src[j], src[j + half]);
            }
        }
        if !self.descend(depth + 1, offset, decide)? {
            return Ok(false);
        }
        {
            let (upper, lower) = self.partial.split_at_mut(depth + 1);
            upper[depth][..half].copy_from_slice(&lower[0]);
        }
        {
            let (upper, lower) = self.pairs.split_at_mut(depth + 1);
            let src = &upper[depth];
            let alpha = &self.partial[depth];
            for (j, dst) in lower[0].iter_mut().enumerate() {
                *dst = variable_node(src[j], src[j + half], alpha[j]);
            }
        }
        if !self.descend(depth + 1, offset + half, decide)? {
            return Ok(false);
        }
        let (upper, lower) = self.partial.split_at_mut(depth + 1);
        let here = &mut upper[depth];
        for (j, &beta) in lower[0].iter().enumerate() {
            here[j] ^= beta;
            here[j + half] = beta;
        }
        Ok(true)
    }
}

/// Bit-channel likelihoods `(W_n^{(i)}(obs, past | 0), W_n^{(i)}(obs, past | 1))`
/// for the 0-based index `i = past.len()`, up to a common positive factor.
pub fn sc_likelihood(ch: &ChannelSpec, obs: &[usize], past: &[u8], i: usize) -> Result<Pair> {
    let params = PolarParams::from_len(obs.len())?;
    if i >= params.n() {
        return Err(Error::IndexOutOfRange {
            index: i,
            n: params.n(),
        });
    }
    if past.len() != i {
        return Err(Error::LengthMismatch {
            expected: i,
            actual: past.len(),
        });
    }
    let mut state = LikelihoodState::new(params);
    state.load_observation(ch, obs)?;
    let mut found = None;
    state.run(|idx, pair| {
        if idx < i {
            Ok(Some(past[idx]))
        } else {
            found = Some(pair);
            Ok(None)
        }
    })?;
    let pair = found.expect("SC pass stops at the requested index");
    if pair[0] == 0.0 && pair[1] == 0.0 {
        return Err(Error::DegenerateLikelihood(i));
    }
    Ok(pair)
}
