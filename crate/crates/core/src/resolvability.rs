//! Polar coset codes as resolvability codes: uniform bits on the good
//! indices, fixed bits on the bad ones, transform, then the channel.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{sample_output, ChannelSpec};
use crate::construction::{select_good, SelectionMode};
use crate::error::{Error, Result};
use crate::oracle::table::{pinsker_l1_bound, tv_l1};
use crate::polar::{transform_in_place, PolarParams};
use crate::rng::{chunks, derive_stream};
use crate::synthesis::{synthesize_auto, QuantizationBudget, SynthesizedBitChannel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvabilityCode {
    pub params: PolarParams,
    /// Information set, sorted.
    pub good: Vec<usize>,
    /// Values on the complement of `good`, in index order.
    pub frozen: Vec<u8>,
    pub channel: ChannelSpec,
}

impl ResolvabilityCode {
    pub fn new(channel: ChannelSpec, params: PolarParams, good: Vec<usize>, frozen: Option<Vec<u8>>) -> Result<Self> {
        channel.require_symmetric()?;
        let n = params.n();
        let mut good = good;
        good.sort_unstable();
        good.dedup();
        if let Some(&i) = good.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        let frozen = frozen.unwrap_or_else(|| vec![0; n - good.len()]);
        if frozen.len() != n - good.len() {
            return Err(Error::LengthMismatch {
                expected: n - good.len(),
                actual: frozen.len(),
            });
        }
        Ok(Self {
            params,
            good,
            frozen,
            channel,
        })
    }

    pub fn n(&self) -> usize {
        self.params.n()
    }

    /// `r = |good|`.
    pub fn rate_bits(&self) -> usize {
        self.good.len()
    }

    pub fn bad(&self) -> Vec<usize> {
        let mut mask = vec![false; self.n()];
        for &i in &self.good {
            mask[i] = true;
        }
        (0..self.n()).filter(|&i| !mask[i]).collect()
    }

    /// `u` with the frozen bits in place and zeros on `good`.
    pub fn frozen_word(&self) -> Vec<u8> {
        let mut word = vec![0; self.n()];
        for (i, &b) in self.bad().iter().zip(&self.frozen) {
            word[*i] = b;
        }
        word
    }

    pub fn with_frozen(&self, frozen: Vec<u8>) -> Result<Self> {
        Self::new(self.channel.clone(), self.params, self.good.clone(), Some(frozen))
    }

    /// Target single-letter output distribution `q_Y`.
    pub fn target(&self) -> Vec<f64> {
        self.channel.output_distribution()
    }
}

/// Synthesizes `ch` and selects the information set.
pub fn build_resolvability_code(
    ch: &ChannelSpec,
    params: PolarParams,
    mode: SelectionMode,
    budget: QuantizationBudget,
) -> Result<(ResolvabilityCode, Vec<SynthesizedBitChannel>)> {
    let profile = synthesize_auto(ch, params.m(), budget)?;
    let (good, _) = select_good(&profile, mode)?;
    Ok((ResolvabilityCode::new(ch.clone(), params, good, None)?, profile))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolveSample {
    pub u: Vec<u8>,
    pub x: Vec<u8>,
    /// Output symbol indices.
    pub y: Vec<usize>,
}

pub fn resolve_encode<R: Rng + ?Sized>(code: &ResolvabilityCode, rng: &mut R) -> ResolveSample {
    let mut u = code.frozen_word();
    for &i in &code.good {
        u[i] = rng.random::<bool>() as u8;
    }
    let mut x = u.clone();
    transform_in_place(&mut x);
    let y = x.iter().map(|&b| sample_output(&code.channel, b, rng)).collect();
    ResolveSample { u, x, y }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolvabilityBound {
    /// `Σ_{bad} capacity_upper`, bits.
    pub kl_bound: f64,
    /// Pinsker bound on the L1 distance.
    pub tv_bound: f64,
}

pub fn resolvability_bound(profile: &[SynthesizedBitChannel], good: &[usize]) -> ResolvabilityBound {
    let mut is_good = vec![false; profile.len()];
    for &i in good {
        if i < is_good.len() {
            is_good[i] = true;
        }
    }
    let kl_bound: f64 = profile
        .iter()
        .filter(|b| !is_good[b.index])
        .map(|b| b.capacity_upper)
        .sum();
    ResolvabilityBound {
        kl_bound,
        tv_bound: pinsker_l1_bound(kl_bound),
    }
}

/// Per-position output histograms over `trials` encodings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalOutput {
    pub trials: usize,
    /// `counts[j][y]`: how often position `j` emitted symbol `y`.
    pub counts: Vec<Vec<u64>>,
    /// Full-sequence histogram, kept only when `|Y|^n` is small.
    pub sequence_counts: Option<Vec<u64>>,
}

impl EmpiricalOutput {
    /// Largest per-position L1 distance to `q_Y`.
    pub fn max_symbol_tv(&self, target: &[f64]) -> f64 {
        let t = self.trials as f64;
        self.counts
            .iter()
            .map(|row| {
                let freq: Vec<f64> = row.iter().map(|&c| c as f64 / t).collect();
                tv_l1(&freq, target)
            })
            .fold(0.0, f64::max)
    }
}

/// Largest `|Y|^n` for which full-sequence counts are collected.
pub const SEQUENCE_HISTOGRAM_LIMIT: usize = 1 << 16;

/// Runs `trials` encodings with chunked streams derived from `seed`.
pub fn empirical_output(code: &ResolvabilityCode, trials: usize, seed: u64) -> EmpiricalOutput {
    let n = code.n();
    let size = code.channel.output_size();
    let seq_len = (size as u128).checked_pow(n as u32);
    let keep_seq = seq_len.is_some_and(|s| s <= SEQUENCE_HISTOGRAM_LIMIT as u128);
    let seq_size = if keep_seq { seq_len.unwrap() as usize } else { 0 };
    let empty = || (vec![vec![0u64; size]; n], vec![0u64; seq_size]);
    let (counts, seq) = chunks(trials)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(chunk, len)| {
            let mut rng = derive_stream(seed, "resolve", chunk);
            let (mut counts, mut seq) = empty();
            for _ in 0..len {
                let s = resolve_encode(code, &mut rng);
                for (j, &y) in s.y.iter().enumerate() {
                    counts[j][y] += 1;
                }
                if keep_seq {
                    seq[s.y.iter().fold(0, |acc, &y| acc * size + y)] += 1;
                }
            }
            (counts, seq)
        })
        .reduce(empty, |(mut ca, mut sa), (cb, sb)| {
            for (ra, rb) in ca.iter_mut().zip(cb) {
                for (a, b) in ra.iter_mut().zip(rb) {
                    *a += b;
                }
            }
            for (a, b) in sa.iter_mut().zip(sb) {
                *a += b;
            }
            (ca, sa)
        });
    EmpiricalOutput {
        trials,
        counts,
        sequence_counts: keep_seq.then_some(seq),
    }
}
