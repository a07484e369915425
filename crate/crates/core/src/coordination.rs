//! Two-node strong coordination.
//!
//! Node X sees nature's actions `x`, fills `u` in SC order (frozen bits on
//! `F1`, common randomness on `F2`, a biased draw from the bit-channel
//! posterior of `W_{X|V}` on `F3`) and sends `u_{F3}`. Node Y rebuilds `u`,
//! computes `v = u·G_n` and passes it through `W_{Y|V}`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{coordination_target, sample_output, ChannelSpec};
use crate::construction::{CoordinationCode, IndexRole};
use crate::error::{Error, Result};
use crate::oracle::table::tv_l1;
use crate::polar::{sc_likelihood, transform_in_place, LikelihoodState};
use crate::rng::{chunks, derive_stream, StreamRng};

/// Local randomness consumed, counted in draws.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomnessLedger {
    /// Unit-interval draws at node X, one per `F3` decision.
    pub x_draws: u64,
    /// Channel-simulation draws at node Y, one per position.
    pub y_draws: u64,
    /// Common-randomness bits handed to both nodes.
    pub common_bits: u64,
}

impl RandomnessLedger {
    fn absorb(&mut self, other: &Self) {
        self.x_draws += other.x_draws;
        self.y_draws += other.y_draws;
        self.common_bits += other.common_bits;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionTranscript {
    pub x_actions: Vec<u8>,
    pub u: Vec<u8>,
    /// `u` on `F3`, in index order.
    pub message: Vec<u8>,
    pub v: Vec<u8>,
    /// Output symbol indices of `W_{Y|V}`.
    pub y_actions: Vec<usize>,
}

/// `P(u_i = 0 | x, u_1^{i-1}) = L / (1 + L)` with `L` the bit-channel
/// likelihood ratio of `W_{X|V}`.
pub fn message_bit_probability(wx_v: &ChannelSpec, x: &[u8], past: &[u8]) -> Result<f64> {
    let obs: Vec<usize> = x.iter().map(|&b| b as usize).collect();
    let [p0, p1] = sc_likelihood(wx_v, &obs, past, past.len())?;
    Ok(p0 / (p0 + p1))
}

/// Reusable node-X encoder; owns the SC scratch buffers.
#[derive(Debug, Clone)]
pub struct NodeX<'c> {
    code: &'c CoordinationCode,
    roles: Vec<IndexRole>,
    frozen: Vec<u8>,
    /// Position of each `F2` index within the common-randomness vector.
    common_slot: Vec<usize>,
    state: LikelihoodState,
}

impl<'c> NodeX<'c> {
    pub fn new(code: &'c CoordinationCode) -> Self {
        let mut common_slot = vec![usize::MAX; code.n()];
        for (k, &i) in code.partition.f2.iter().enumerate() {
            common_slot[i] = k;
        }
        Self {
            code,
            roles: code.partition.roles(),
            frozen: code.frozen_word(),
            common_slot,
            state: LikelihoodState::new(code.params),
        }
    }

    /// Returns `(u, message)`.
    pub fn encode<R: Rng + ?Sized>(
        &mut self,
        x_actions: &[u8],
        common_randomness: &[u8],
        rng: &mut R,
        ledger: &mut RandomnessLedger,
    ) -> Result<(Vec<u8>, Vec<u8>)> {
        let n = self.code.n();
        check_len(n, x_actions.len())?;
        check_len(self.code.partition.f2.len(), common_randomness.len())?;
        let obs: Vec<usize> = x_actions.iter().map(|&b| (b & 1) as usize).collect();
        self.state.load_observation(&self.code.wx_v, &obs)?;
        let (roles, frozen, slots) = (&self.roles, &self.frozen, &self.common_slot);
        let mut draws = 0u64;
        self.state.run(|i, [p0, p1]| {
            let bit = match roles[i] {
                IndexRole::Frozen => frozen[i],
                IndexRole::Common => common_randomness[slots[i]],
                IndexRole::Message => {
                    let total = p0 + p1;
                    if !(total > 0.0) {
                        return Err(Error::DegenerateLikelihood(i));
                    }
                    draws += 1;
                    let r: f64 = rng.random();
                    (r >= p0 / total) as u8
                }
            };
            Ok(Some(bit))
        })?;
        ledger.x_draws += draws;
        let u = self.state.u().to_vec();
        let message = self.code.partition.f3.iter().map(|&i| u[i]).collect();
        Ok((u, message))
    }
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::LengthMismatch { expected, actual });
    }
    Ok(())
}

pub fn node_x_encode<R: Rng + ?Sized>(
    code: &CoordinationCode,
    x_actions: &[u8],
    common_randomness: &[u8],
    rng_x: &mut R,
) -> Result<(Vec<u8>, Vec<u8>)> {
    NodeX::new(code).encode(x_actions, common_randomness, rng_x, &mut RandomnessLedger::default())
}

/// Rebuilds `u`, returns `(v, y)`.
fn node_y_inner<R: Rng + ?Sized>(
    code: &CoordinationCode,
    message: &[u8],
    common_randomness: &[u8],
    rng: &mut R,
    ledger: &mut RandomnessLedger,
) -> Result<(Vec<u8>, Vec<usize>)> {
    let part = &code.partition;
    check_len(part.f3.len(), message.len())?;
    check_len(part.f2.len(), common_randomness.len())?;
    let mut v = code.frozen_word();
    for (&i, &b) in part.f2.iter().zip(common_randomness) {
        v[i] = b & 1;
    }
    for (&i, &b) in part.f3.iter().zip(message) {
        v[i] = b & 1;
    }
    transform_in_place(&mut v);
    let y = v.iter().map(|&b| sample_output(&code.wy_v, b, rng)).collect();
    ledger.y_draws += v.len() as u64;
    Ok((v, y))
}

pub fn node_y_decode<R: Rng + ?Sized>(
    code: &CoordinationCode,
    message: &[u8],
    common_randomness: &[u8],
    rng_y: &mut R,
) -> Result<Vec<usize>> {
    Ok(node_y_inner(code, message, common_randomness, rng_y, &mut RandomnessLedger::default())?.1)
}

/// The four independent streams of one session.
#[derive(Debug, Clone)]
pub struct SessionRngs<R> {
    pub nature: R,
    pub common: R,
    pub x: R,
    pub y: R,
}

impl SessionRngs<StreamRng> {
    /// Streams for Monte Carlo chunk `chunk` under a master seed.
    pub fn derive(seed: u64, chunk: u64) -> Self {
        Self {
            nature: derive_stream(seed, "nature", chunk),
            common: derive_stream(seed, "common", chunk),
            x: derive_stream(seed, "node-x", chunk),
            y: derive_stream(seed, "node-y", chunk),
        }
    }
}

/// A coordination run: the code, the node-X scratch state and the ledger.
#[derive(Debug, Clone)]
pub struct CoordinationSession<'c, R> {
    code: &'c CoordinationCode,
    node_x: NodeX<'c>,
    rngs: SessionRngs<R>,
    pub ledger: RandomnessLedger,
}

impl<'c, R: Rng> CoordinationSession<'c, R> {
    pub fn new(code: &'c CoordinationCode, rngs: SessionRngs<R>) -> Self {
        Self {
            code,
            node_x: NodeX::new(code),
            rngs,
            ledger: RandomnessLedger::default(),
        }
    }

    /// One block: nature draws uniform `x`, the harness draws `U0`, then the
    /// two nodes run.
    pub fn run_once(&mut self) -> Result<SessionTranscript> {
        let n = self.code.n();
        let x_actions: Vec<u8> = (0..n).map(|_| self.rngs.nature.random::<bool>() as u8).collect();
        let common: Vec<u8> = (0..self.code.partition.f2.len())
            .map(|_| self.rngs.common.random::<bool>() as u8)
            .collect();
        self.ledger.common_bits += common.len() as u64;
        let (u, message) = self
            .node_x
            .encode(&x_actions, &common, &mut self.rngs.x, &mut self.ledger)?;
        let (v, y_actions) = node_y_inner(self.code, &message, &common, &mut self.rngs.y, &mut self.ledger)?;
        Ok(SessionTranscript {
            x_actions,
            u,
            message,
            v,
            y_actions,
        })
    }
}

pub fn run_session<R: Rng>(code: &CoordinationCode, rngs: SessionRngs<R>) -> Result<SessionTranscript> {
    CoordinationSession::new(code, rngs).run_once()
}

/// Largest `2^n·|Y|^n` for which full-block histograms are collected.
pub const BLOCK_HISTOGRAM_LIMIT: usize = 1 << 20;

/// Aggregated statistics over many sessions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionStats {
    pub sessions: usize,
    /// `pair_counts[j][x·|Y| + y]` for position `j`.
    pub pair_counts: Vec<Vec<u64>>,
    /// Histogram over `(x, y)` blocks, x-block most significant.
    pub block_counts: Option<Vec<u64>>,
    pub ledger: RandomnessLedger,
}

impl SessionStats {
    /// Largest per-position L1 distance between the empirical `(x_j, y_j)`
    /// table and the single-letter target.
    pub fn max_pair_tv(&self, target: &[f64]) -> f64 {
        let t = self.sessions as f64;
        self.pair_counts
            .iter()
            .map(|row| {
                let freq: Vec<f64> = row.iter().map(|&c| c as f64 / t).collect();
                tv_l1(&freq, target)
            })
            .fold(0.0, f64::max)
    }

    /// Per-position pair frequencies pooled over all positions.
    pub fn pooled_pair_frequencies(&self) -> Vec<f64> {
        let width = self.pair_counts.first().map_or(0, Vec::len);
        let total = (self.sessions * self.pair_counts.len()) as f64;
        (0..width)
            .map(|k| self.pair_counts.iter().map(|r| r[k]).sum::<u64>() as f64 / total)
            .collect()
    }
}

/// Block index of `(x, y)` in the layout of [`SessionStats::block_counts`].
pub fn block_index(x: &[u8], y: &[usize], y_size: usize) -> usize {
    let xi = x.iter().fold(0usize, |acc, &b| acc * 2 + b as usize);
    y.iter().fold(xi, |acc, &s| acc * y_size + s)
}

/// Runs `sessions` blocks in parallel chunks seeded from `seed`. The result
/// does not depend on the number of worker threads.
pub fn simulate_sessions(code: &CoordinationCode, sessions: usize, seed: u64) -> Result<SessionStats> {
    let n = code.n();
    let ys = code.wy_v.output_size();
    let width = 2 * ys;
    let block_len = (ys as u128)
        .checked_pow(n as u32)
        .and_then(|v| v.checked_mul(1u128.checked_shl(n as u32)?))
        .filter(|&v| v <= BLOCK_HISTOGRAM_LIMIT as u128)
        .map(|v| v as usize);
    let empty = || SessionStats {
        sessions: 0,
        pair_counts: vec![vec![0; width]; n],
        block_counts: block_len.map(|len| vec![0; len]),
        ledger: RandomnessLedger::default(),
    };
    let parts = chunks(sessions)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(chunk, len)| -> Result<SessionStats> {
            let mut stats = empty();
            let mut session = CoordinationSession::new(code, SessionRngs::derive(seed, chunk));
            for _ in 0..len {
                let t = session.run_once()?;
                for (j, (&x, &y)) in t.x_actions.iter().zip(&t.y_actions).enumerate() {
                    stats.pair_counts[j][x as usize * ys + y] += 1;
                }
                if let Some(blocks) = &mut stats.block_counts {
                    blocks[block_index(&t.x_actions, &t.y_actions, ys)] += 1;
                }
            }
            stats.sessions = len;
            stats.ledger = session.ledger;
            Ok(stats)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = empty();
    for part in parts {
        total.sessions += part.sessions;
        for (a, b) in total.pair_counts.iter_mut().zip(&part.pair_counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        if let (Some(a), Some(b)) = (&mut total.block_counts, &part.block_counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        total.ledger.absorb(&part.ledger);
    }
    Ok(total)
}

/// Single-letter target `q_{XY}` of a code, x-major.
pub fn single_letter_target(code: &CoordinationCode) -> Vec<f64> {
    coordination_target(&code.wx_v, &code.wy_v)
}
