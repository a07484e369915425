//! Exact brute-force distributions for small block lengths.
//!
//! Nothing here uses the SC recursion: bit channels, posteriors and induced
//! distributions all come from summing over every input word. Bit words are
//! indexed with `u_1` (index 0) as the most significant bit, output blocks in
//! mixed radix with the first symbol most significant.

pub mod table;

use serde::{Deserialize, Serialize};

use crate::channel::{coordination_target, ChannelSpec};
use crate::construction::{CoordinationCode, IndexRole};
use crate::error::{Error, Result};
use crate::polar::{encode_transform, PolarParams};
use crate::resolvability::ResolvabilityCode;

pub use table::{
    binary_entropy, check_cap, kl, pinsker_l1_bound, tv, DistTable, DEFAULT_TABLE_CAP,
};
use table::{kl_bits, outer};

fn bits_of(word: usize, n: usize) -> Vec<u8> {
    (0..n).map(|j| ((word >> (n - 1 - j)) & 1) as u8).collect()
}

fn pow(base: usize, exp: usize) -> u128 {
    (base as u128).saturating_pow(exp as u32)
}

/// `W^n(·|x)` over all output blocks.
pub fn block_output_dist(ch: &ChannelSpec, x: &[u8]) -> Vec<f64> {
    let mut dist = vec![1.0];
    for &b in x {
        dist = outer(&dist, &ch.rows()[b as usize]);
    }
    dist
}

/// Uniform-input mutual information of a binary-input channel given as two
/// rows over a common output set.
pub fn binary_input_information(row0: &[f64], row1: &[f64]) -> f64 {
    let mid: Vec<f64> = row0.iter().zip(row1).map(|(a, b)| 0.5 * (a + b)).collect();
    let d0 = kl_bits(row0, &mid).expect("mixture dominates its components");
    let d1 = kl_bits(row1, &mid).expect("mixture dominates its components");
    (0.5 * (d0 + d1)).max(0.0)
}

/// Exact transition table of bit channel `W_n^{(i)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BitChannelTable {
    pub index: usize,
    /// `rows[b][past·|Y|^n + y] = W_n^{(i)}(y, u_1^{i-1} = past | u_i = b)`.
    pub rows: [Vec<f64>; 2],
    pub capacity: f64,
}

impl BitChannelTable {
    pub fn bhattacharyya(&self) -> f64 {
        self.rows[0]
            .iter()
            .zip(&self.rows[1])
            .map(|(a, b)| (a * b).sqrt())
            .sum()
    }

    /// `(W(·|0), W(·|1))` at a given past word and output block.
    pub fn pair(&self, past: usize, y_block: usize, y_blocks: usize) -> [f64; 2] {
        let k = past * y_blocks + y_block;
        [self.rows[0][k], self.rows[1][k]]
    }
}

/// `P(u, y) = 2^{-n}·W^n(y | u·G_n)` for every input word, `u`-major.
fn full_joint(ch: &ChannelSpec, n: usize) -> Vec<f64> {
    let scale = 0.5f64.powi(n as i32);
    let mut out = Vec::new();
    for word in 0..1usize << n {
        let x = encode_transform(&bits_of(word, n)).expect("n is a power of two");
        out.extend(block_output_dist(ch, &x).into_iter().map(|p| p * scale));
    }
    out
}

/// All `n` bit channels of `ch` by direct summation over `u_{i+1}^n`.
pub fn brute_force_bit_channels(ch: &ChannelSpec, m: u32, cap: usize) -> Result<Vec<BitChannelTable>> {
    let n = PolarParams::new(m)?.n();
    let ys = ch.output_size();
    check_cap(pow(ys, n).saturating_mul(1u128 << n.min(127)), cap)?;
    let y_blocks = pow(ys, n) as usize;
    // marginals[k] = P(u_1^k, y) for k = n down to 1
    let mut marginal = full_joint(ch, n);
    let mut tables = Vec::with_capacity(n);
    for len in (1..=n).rev() {
        let i = len - 1;
        let pasts = 1usize << i;
        let mut rows = [vec![0.0; pasts * y_blocks], vec![0.0; pasts * y_blocks]];
        for past in 0..pasts {
            for b in 0..2 {
                let src = &marginal[((past << 1) | b) * y_blocks..][..y_blocks];
                // W_n^{(i)}(y, past | b) = 2·P(past, b, y)
                for (dst, &p) in rows[b][past * y_blocks..][..y_blocks].iter_mut().zip(src) {
                    *dst = 2.0 * p;
                }
            }
        }
        let capacity = binary_input_information(&rows[0], &rows[1]);
        tables.push(BitChannelTable {
            index: i,
            rows,
            capacity,
        });
        // sum out u_len
        marginal = (0..pasts)
            .flat_map(|prefix| {
                let lo = &marginal[(prefix << 1) * y_blocks..][..y_blocks];
                let hi = &marginal[((prefix << 1) | 1) * y_blocks..][..y_blocks];
                lo.iter().zip(hi).map(|(a, b)| a + b).collect::<Vec<_>>()
            })
            .collect();
    }
    tables.reverse();
    Ok(tables)
}

pub fn brute_force_bit_channel(ch: &ChannelSpec, m: u32, i: usize, cap: usize) -> Result<BitChannelTable> {
    let n = PolarParams::new(m)?.n();
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    Ok(brute_force_bit_channels(ch, m, cap)?.swap_remove(i))
}

/// Output distribution `p_{Y^n}` of a resolvability code, exactly.
pub fn induced_resolvability_dist(code: &ResolvabilityCode, cap: usize) -> Result<DistTable> {
    let n = code.n();
    let ys = code.channel.output_size();
    check_cap(pow(ys, n), cap)?;
    let base = code.frozen_word();
    let r = code.good.len();
    let mut p = vec![0.0; pow(ys, n) as usize];
    let scale = 0.5f64.powi(r as i32);
    for info in 0..1usize << r {
        let mut u = base.clone();
        for (k, &i) in code.good.iter().enumerate() {
            u[i] = ((info >> (r - 1 - k)) & 1) as u8;
        }
        let x = encode_transform(&u)?;
        for (acc, q) in p.iter_mut().zip(block_output_dist(&code.channel, &x)) {
            *acc += scale * q;
        }
    }
    DistTable::new(vec![ys; n], p)
}

/// `q_Y^n` for a resolvability code.
pub fn resolvability_target(code: &ResolvabilityCode, cap: usize) -> Result<DistTable> {
    DistTable::iid(&code.target(), code.n(), cap)
}

/// `C(W_{Y^n|S^{n-r}})` as `I(S; Y^n)` with `S` uniform over all frozen
/// vectors, enumerated.
pub fn composite_channel_capacity(code: &ResolvabilityCode, cap: usize) -> Result<f64> {
    let frozen_len = code.frozen.len();
    let ys = code.channel.output_size();
    check_cap(pow(ys, code.n()).saturating_mul(1u128 << frozen_len.min(127)), cap)?;
    let mut conditionals = Vec::with_capacity(1 << frozen_len);
    for s in 0..1usize << frozen_len {
        let variant = code.with_frozen(bits_of(s, frozen_len))?;
        conditionals.push(induced_resolvability_dist(&variant, cap)?.probs().to_vec());
    }
    let weight = 1.0 / conditionals.len() as f64;
    let mix: Vec<f64> = (0..conditionals[0].len())
        .map(|k| conditionals.iter().map(|c| c[k]).sum::<f64>() * weight)
        .collect();
    let mut info = 0.0;
    for c in &conditionals {
        info += weight * kl_bits(c, &mix)?;
    }
    Ok(info)
}

/// Exact `\tilde p` for a coordination code.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedCoordination {
    /// Over `(x_1..x_n, y_1..y_n)`.
    pub xy: DistTable,
    /// Over `(u_1..u_n, x_1..x_n)`.
    pub ux: DistTable,
}

/// Exact `\hat p` of the uniform-input nested polar code through `W_{YX|V}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleJoint {
    pub xy: DistTable,
    pub ux: DistTable,
}

fn coordination_cap(code: &CoordinationCode, cap: usize) -> Result<()> {
    let n = code.n();
    let free = code.partition.f2.len() + code.partition.f3.len();
    let entries = (1u128 << n)
        .saturating_mul(1u128 << free)
        .saturating_mul(pow(code.wy_v.output_size(), n));
    check_cap(entries, cap)?;
    check_cap(1u128 << (2 * n).min(127), cap)
}

/// Posterior `P(u_i = 0 | x, u_1^{i-1})` of the uniform-input ensemble for
/// every `i`, `past`, `x`, from enumerated bit channels of `W_{X|V}`.
/// `out[i][past·2^n + x]`; `NaN` where the conditioning event is impossible.
pub fn ensemble_posteriors(wx_v: &ChannelSpec, m: u32, cap: usize) -> Result<Vec<Vec<f64>>> {
    if wx_v.output_size() != 2 {
        return Err(Error::ConditionViolation("W_X|V must have binary output".into()));
    }
    Ok(brute_force_bit_channels(wx_v, m, cap)?
        .into_iter()
        .map(|t| {
            t.rows[0]
                .iter()
                .zip(&t.rows[1])
                .map(|(&a, &b)| if a + b > 0.0 { a / (a + b) } else { f64::NAN })
                .collect()
        })
        .collect())
}

/// Distribution of `u` given `x` under the SC encoding rule, as a list of
/// `(u word, probability)`. With `average_frozen` every `F1` bit is a fair
/// coin instead of its frozen value.
fn encoder_conditional(
    code: &CoordinationCode,
    roles: &[IndexRole],
    frozen: &[u8],
    posteriors: &[Vec<f64>],
    x_word: usize,
    average_frozen: bool,
) -> Result<Vec<(usize, f64)>> {
    let n = code.n();
    let mut frontier = vec![(0usize, 1.0f64)];
    for i in 0..n {
        let mut next = Vec::with_capacity(frontier.len() * 2);
        for (prefix, w) in frontier {
            let mut push = |bit: usize, p: f64| {
                if p > 0.0 {
                    next.push(((prefix << 1) | bit, w * p));
                }
            };
            match roles[i] {
                IndexRole::Frozen if !average_frozen => push(frozen[i] as usize, 1.0),
                IndexRole::Frozen | IndexRole::Common => {
                    push(0, 0.5);
                    push(1, 0.5);
                }
                IndexRole::Message => {
                    let p0 = posteriors[i][(prefix << n) | x_word];
                    if p0.is_nan() {
                        return Err(Error::DegenerateLikelihood(i));
                    }
                    push(0, p0);
                    push(1, 1.0 - p0);
                }
            }
        }
        frontier = next;
    }
    Ok(frontier)
}

/// Exact `\tilde p(x, y)` and `\tilde p(u, x)` induced by the SC encoder and
/// node Y's channel simulation.
pub fn induced_coordination_joint(code: &CoordinationCode, cap: usize) -> Result<InducedCoordination> {
    coordination_cap(code, cap)?;
    let (xy, ux) = induced_tables(code, cap, false)?;
    Ok(InducedCoordination {
        xy: DistTable::new(radices_xy(code), xy)?,
        ux: DistTable::new(vec![2; 2 * code.n()], ux)?,
    })
}

/// Frozen-bit-averaged `\tilde P(u, x)` (fair coins on `F1 ∪ F2`).
pub fn averaged_encoder_joint(code: &CoordinationCode, cap: usize) -> Result<DistTable> {
    coordination_cap(code, cap)?;
    let (_, ux) = induced_tables(code, cap, true)?;
    DistTable::new(vec![2; 2 * code.n()], ux)
}

fn radices_xy(code: &CoordinationCode) -> Vec<usize> {
    let n = code.n();
    let mut r = vec![2; n];
    r.extend(std::iter::repeat_n(code.wy_v.output_size(), n));
    r
}

fn induced_tables(code: &CoordinationCode, cap: usize, average_frozen: bool) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = code.n();
    let posteriors = ensemble_posteriors(&code.wx_v, code.params.m(), cap)?;
    let roles = code.partition.roles();
    let frozen = code.frozen_word();
    let y_blocks = pow(code.wy_v.output_size(), n) as usize;
    let mut xy = vec![0.0; (1 << n) * y_blocks];
    let mut ux = vec![0.0; 1 << (2 * n)];
    let qx = 0.5f64.powi(n as i32);
    for x_word in 0..1usize << n {
        let cond = encoder_conditional(code, &roles, &frozen, &posteriors, x_word, average_frozen)?;
        for (u_word, p) in cond {
            let w = qx * p;
            ux[(u_word << n) | x_word] += w;
            if !average_frozen {
                let v = encode_transform(&bits_of(u_word, n))?;
                let row = &mut xy[x_word * y_blocks..][..y_blocks];
                for (acc, q) in row.iter_mut().zip(block_output_dist(&code.wy_v, &v)) {
                    *acc += w * q;
                }
            }
        }
    }
    Ok((xy, ux))
}

/// Exact `\hat p(x, y)` and `\hat p(u, x)` with uniform bits on `F2 ∪ F3`
/// and the code's frozen values on `F1`.
pub fn ensemble_joint(code: &CoordinationCode, cap: usize) -> Result<EnsembleJoint> {
    coordination_cap(code, cap)?;
    let n = code.n();
    let frozen = code.frozen_word();
    let roles = code.partition.roles();
    let free: Vec<usize> = (0..n).filter(|&i| roles[i] != IndexRole::Frozen).collect();
    let y_blocks = pow(code.wy_v.output_size(), n) as usize;
    let mut xy = vec![0.0; (1 << n) * y_blocks];
    let mut ux = vec![0.0; 1 << (2 * n)];
    let scale = 0.5f64.powi(free.len() as i32);
    for assign in 0..1usize << free.len() {
        let mut u = frozen.clone();
        for (k, &i) in free.iter().enumerate() {
            u[i] = ((assign >> (free.len() - 1 - k)) & 1) as u8;
        }
        let u_word = u.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
        let v = encode_transform(&u)?;
        let px = block_output_dist(&code.wx_v, &v);
        let py = block_output_dist(&code.wy_v, &v);
        for (x_word, &pxv) in px.iter().enumerate() {
            if pxv == 0.0 {
                continue;
            }
            ux[(u_word << n) | x_word] += scale * pxv;
            let row = &mut xy[x_word * y_blocks..][..y_blocks];
            for (acc, &q) in row.iter_mut().zip(&py) {
                *acc += scale * pxv * q;
            }
        }
    }
    Ok(EnsembleJoint {
        xy: DistTable::new(radices_xy(code), xy)?,
        ux: DistTable::new(vec![2; 2 * n], ux)?,
    })
}

/// `\hat P(u, x) = 2^{-n}·W_X^n(x | u·G_n)` with every bit uniform.
pub fn uniform_ensemble_ux(wx_v: &ChannelSpec, m: u32, cap: usize) -> Result<DistTable> {
    let n = PolarParams::new(m)?.n();
    check_cap(1u128 << (2 * n).min(127), cap)?;
    let joint = full_joint(wx_v, n);
    DistTable::new(vec![2; 2 * n], joint)
}

/// `q^n(x, y)` in the `(x block, y block)` layout.
pub fn coordination_target_table(code: &CoordinationCode, cap: usize) -> Result<DistTable> {
    let n = code.n();
    let ys = code.wy_v.output_size();
    check_cap((1u128 << n).saturating_mul(pow(ys, n)), cap)?;
    let q = coordination_target(&code.wx_v, &code.wy_v);
    let y_blocks = pow(ys, n) as usize;
    let mut out = vec![0.0; (1 << n) * y_blocks];
    for x_word in 0..1usize << n {
        let x = bits_of(x_word, n);
        let mut dist = vec![1.0];
        for &xb in &x {
            dist = outer(&dist, &q[xb as usize * ys..][..ys]);
        }
        out[x_word * y_blocks..][..y_blocks].copy_from_slice(&dist);
    }
    DistTable::new(radices_xy(code), out)
}

/// Exact distances for a resolvability code.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolvabilitySummary {
    pub tv_l1: f64,
    pub kl_bits: f64,
    pub pinsker_l1: f64,
}

pub fn resolvability_summary(code: &ResolvabilityCode, cap: usize) -> Result<ResolvabilitySummary> {
    let p = induced_resolvability_dist(code, cap)?;
    let q = resolvability_target(code, cap)?;
    let kl_bits = kl(&p, &q)?;
    Ok(ResolvabilitySummary {
        tv_l1: tv(&p, &q)?,
        kl_bits,
        pinsker_l1: pinsker_l1_bound(kl_bits),
    })
}

/// Exact distances for a coordination code: the induced joint against the
/// target, and the two legs of the triangle decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoordinationSummary {
    /// `‖\tilde p_{XY} − q^n‖₁`.
    pub tv_l1: f64,
    /// `‖\tilde p_{UX} − \hat p_{UX}‖₁`.
    pub encoder_tv_l1: f64,
    /// `‖\hat p_{XY} − q^n‖₁`.
    pub ensemble_tv_l1: f64,
    /// `D(\hat p_{XY} ‖ q^n)` in bits.
    pub ensemble_kl_bits: f64,
    /// Frozen-averaged `‖\tilde P_{UX} − \hat P_{UX}‖₁`.
    pub averaged_encoder_tv_l1: f64,
    /// `Σ_{F1 ∪ F2} sqrt(2·ln2·C_i)` over exact bit channels of `W_{X|V}`.
    pub averaged_encoder_bound: f64,
}

impl CoordinationSummary {
    pub fn triangle_holds(&self, tol: f64) -> bool {
        self.tv_l1 <= self.encoder_tv_l1 + self.ensemble_tv_l1 + tol
    }

    pub fn telescoping_holds(&self, tol: f64) -> bool {
        self.averaged_encoder_tv_l1 <= self.averaged_encoder_bound + tol
    }
}

pub fn coordination_summary(code: &CoordinationCode, cap: usize) -> Result<CoordinationSummary> {
    let induced = induced_coordination_joint(code, cap)?;
    let hat = ensemble_joint(code, cap)?;
    let target = coordination_target_table(code, cap)?;
    let averaged = averaged_encoder_joint(code, cap)?;
    let uniform = uniform_ensemble_ux(&code.wx_v, code.params.m(), cap)?;
    let bits = brute_force_bit_channels(&code.wx_v, code.params.m(), cap)?;
    let averaged_encoder_bound = code
        .partition
        .bad_x_v
        .iter()
        .map(|&i| pinsker_l1_bound(bits[i].capacity))
        .sum();
    Ok(CoordinationSummary {
        tv_l1: tv(&induced.xy, &target)?,
        encoder_tv_l1: tv(&induced.ux, &hat.ux)?,
        ensemble_tv_l1: tv(&hat.xy, &target)?,
        ensemble_kl_bits: kl(&hat.xy, &target)?,
        averaged_encoder_tv_l1: tv(&averaged, &uniform)?,
        averaged_encoder_bound,
    })
}
