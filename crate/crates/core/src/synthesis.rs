//! Bit-channel capacities for symmetric binary-input channels.
//!
//! Every symmetric binary-input channel is equivalent, as far as bit-channel
//! capacities go, to a mixture of binary symmetric channels: each conjugate
//! output pair `{y, π(y)}` contributes a BSC with weight `W(y|0) + W(π(y)|0)`
//! and crossover `min(W(y|0), W(π(y)|0)) / weight`; fixed points of `π` are
//! BSC(1/2) components. Both polar combining steps stay inside this family,
//! so synthesis works on `(weight, crossover)` lists and keeps their size
//! bounded by merging components (degrading, lower bound) or splitting a
//! component onto its neighbours (upgrading, upper bound).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelSpec;
use crate::error::{Error, Result};
use crate::oracle;
use crate::oracle::table::{binary_entropy, check_cap};
use crate::polar::{transform_in_place, LikelihoodState, PolarParams};

/// Above this many table entries (`|Y|^n · 2^n`) synthesis falls back to
/// quantization.
pub const EXACT_AUTO_LIMIT: usize = 1 << 20;

const SAME_CROSSOVER: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthesizedBitChannel {
    /// 0-based bit-channel index.
    pub index: usize,
    pub capacity_lower: f64,
    pub capacity_upper: f64,
    pub bhattacharyya: Option<f64>,
}

/// Maximum number of output symbols kept per synthesized channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantizationBudget {
    mu: usize,
}

impl QuantizationBudget {
    pub fn new(mu: usize) -> Result<Self> {
        if mu < 2 || mu % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "quantization budget mu = {mu} must be even and at least 2"
            )));
        }
        Ok(Self { mu })
    }

    pub fn mu(&self) -> usize {
        self.mu
    }

    /// Number of BSC components that fit in `mu` output symbols.
    fn components(&self) -> usize {
        self.mu / 2
    }
}

impl Default for QuantizationBudget {
    fn default() -> Self {
        Self { mu: 64 }
    }
}

/// Exact BEC synthesis: `z⁻ = 2z − z²`, `z⁺ = z²`, index bits read from the
/// most significant one.
pub fn synthesize_bec(eps: f64, m: u32) -> Result<Vec<SynthesizedBitChannel>> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!(
            "erasure probability {eps} not in [0, 1]"
        )));
    }
    let params = PolarParams::new(m)?;
    let mut z = vec![eps];
    for _ in 0..m {
        z = z.iter().flat_map(|&z| [2.0 * z - z * z, z * z]).collect();
    }
    debug_assert_eq!(z.len(), params.n());
    Ok(z.into_iter()
        .enumerate()
        .map(|(index, z)| SynthesizedBitChannel {
            index,
            capacity_lower: 1.0 - z,
            capacity_upper: 1.0 - z,
            bhattacharyya: Some(z),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Component {
    weight: f64,
    crossover: f64,
}

type Mixture = Vec<Component>;

fn bsc_capacity(delta: f64) -> f64 {
    1.0 - binary_entropy(delta)
}

fn mixture_capacity(mix: &[Component]) -> f64 {
    mix.iter()
        .map(|c| c.weight * bsc_capacity(c.crossover))
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

fn mixture_bhattacharyya(mix: &[Component]) -> f64 {
    mix.iter()
        .map(|c| c.weight * 2.0 * (c.crossover * (1.0 - c.crossover)).sqrt())
        .sum()
}

fn mixture_from_channel(ch: &ChannelSpec) -> Result<Mixture> {
    let perm = ch.require_symmetric()?;
    let row = &ch.rows()[0];
    let mut mix = Vec::new();
    for (y, &py) in perm.iter().enumerate() {
        if py < y {
            continue;
        }
        let (a, b) = if py == y { (row[y] * 0.5, row[y] * 0.5) } else { (row[y], row[py]) };
        let weight = a + b;
        if weight > 0.0 {
            mix.push(Component {
                weight,
                crossover: a.min(b) / weight,
            });
        }
    }
    Ok(normalize(mix))
}

/// Sorts by crossover, folds crossovers into `[0, 1/2]`, merges equal ones.
fn normalize(mut mix: Mixture) -> Mixture {
    for c in &mut mix {
        c.crossover = c.crossover.min(1.0 - c.crossover).clamp(0.0, 0.5);
    }
    mix.retain(|c| c.weight > 0.0);
    mix.sort_by(|a, b| a.crossover.total_cmp(&b.crossover));
    let mut out: Mixture = Vec::with_capacity(mix.len());
    for c in mix {
        match out.last_mut() {
            Some(last) if c.crossover - last.crossover <= SAME_CROSSOVER => {
                let w = last.weight + c.weight;
                last.crossover = (last.weight * last.crossover + c.weight * c.crossover) / w;
                last.weight = w;
            }
            _ => out.push(c),
        }
    }
    out
}

fn check_combine(mix: &[Component]) -> Mixture {
    let mut out = Vec::with_capacity(mix.len() * (mix.len() + 1) / 2);
    for (i, a) in mix.iter().enumerate() {
        for (j, b) in mix.iter().enumerate().skip(i) {
            let mult = if i == j { 1.0 } else { 2.0 };
            out.push(Component {
                weight: mult * a.weight * b.weight,
                crossover: a.crossover * (1.0 - b.crossover) + b.crossover * (1.0 - a.crossover),
            });
        }
    }
    normalize(out)
}

fn variable_combine(mix: &[Component]) -> Mixture {
    let mut out = Vec::with_capacity(mix.len() * (mix.len() + 1));
    for (i, a) in mix.iter().enumerate() {
        for (j, b) in mix.iter().enumerate().skip(i) {
            let mult = if i == j { 1.0 } else { 2.0 };
            let w = mult * a.weight * b.weight;
            let (da, db) = (a.crossover, b.crossover);
            let agree = da * db + (1.0 - da) * (1.0 - db);
            if agree > 0.0 {
                out.push(Component {
                    weight: w * agree,
                    crossover: da * db / agree,
                });
            }
            let disagree = da * (1.0 - db) + db * (1.0 - da);
            if disagree > 0.0 {
                out.push(Component {
                    weight: w * disagree,
                    crossover: (da * (1.0 - db)).min(db * (1.0 - da)) / disagree,
                });
            }
        }
    }
    normalize(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapEntry {
    cost: f64,
    node: usize,
    stamp: u64,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    // min-heap on cost, ties broken by position for determinism
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Doubly linked view over a sorted mixture with lazily invalidated costs.
struct Linked {
    items: Vec<Component>,
    prev: Vec<Option<usize>>,
    next: Vec<Option<usize>>,
    alive: Vec<bool>,
    stamp: Vec<u64>,
    live: usize,
}

impl Linked {
    fn new(items: Mixture) -> Self {
        let len = items.len();
        Self {
            items,
            prev: (0..len).map(|i| i.checked_sub(1)).collect(),
            next: (0..len).map(|i| (i + 1 < len).then_some(i + 1)).collect(),
            alive: vec![true; len],
            stamp: vec![0; len],
            live: len,
        }
    }

    fn collect(self) -> Mixture {
        self.items
            .into_iter()
            .zip(self.alive)
            .filter_map(|(c, a)| a.then_some(c))
            .collect()
    }
}

/// Capacity lost by merging two BSC components into one (always ≥ 0).
fn merge_loss(a: Component, b: Component) -> f64 {
    let w = a.weight + b.weight;
    let merged = (a.weight * a.crossover + b.weight * b.crossover) / w;
    a.weight * bsc_capacity(a.crossover) + b.weight * bsc_capacity(b.crossover)
        - w * bsc_capacity(merged)
}

/// Greedy degrading merge of adjacent components until at most `k` remain.
fn degrade(mix: Mixture, k: usize) -> Mixture {
    if mix.len() <= k {
        return mix;
    }
    let mut list = Linked::new(mix);
    let mut heap = BinaryHeap::new();
    // cost of node i is the loss of merging i with its successor
    let push = |list: &Linked, heap: &mut BinaryHeap<HeapEntry>, i: usize| {
        if let Some(j) = list.next[i] {
            heap.push(HeapEntry {
                cost: merge_loss(list.items[i], list.items[j]),
                node: i,
                stamp: list.stamp[i],
            });
        }
    };
    for i in 0..list.items.len() {
        push(&list, &mut heap, i);
    }
    while list.live > k {
        let Some(entry) = heap.pop() else { break };
        let i = entry.node;
        if !list.alive[i] || entry.stamp != list.stamp[i] {
            continue;
        }
        let Some(j) = list.next[i] else { continue };
        let (a, b) = (list.items[i], list.items[j]);
        let w = a.weight + b.weight;
        list.items[i] = Component {
            weight: w,
            crossover: (a.weight * a.crossover + b.weight * b.crossover) / w,
        };
        list.alive[j] = false;
        list.next[i] = list.next[j];
        if let Some(nj) = list.next[j] {
            list.prev[nj] = Some(i);
        }
        list.live -= 1;
        list.stamp[i] += 1;
        push(&list, &mut heap, i);
        if let Some(p) = list.prev[i] {
            list.stamp[p] += 1;
            push(&list, &mut heap, p);
        }
    }
    list.collect()
}

/// Capacity gained by replacing the middle component with its split onto
/// both neighbours (always ≥ 0).
fn split_gain(left: Component, mid: Component, right: Component) -> f64 {
    let span = right.crossover - left.crossover;
    if span <= 0.0 {
        return 0.0;
    }
    let theta = (right.crossover - mid.crossover) / span;
    mid.weight
        * (theta * bsc_capacity(left.crossover) + (1.0 - theta) * bsc_capacity(right.crossover)
            - bsc_capacity(mid.crossover))
}

/// Greedy upgrading: remove interior components by splitting their mass onto
/// the neighbours so that merging the neighbours back would recover them.
fn upgrade(mix: Mixture, k: usize) -> Mixture {
    if mix.len() <= k {
        return mix;
    }
    if k == 1 {
        // BSC(min crossover) is an upgrade of every component
        let weight = mix.iter().map(|c| c.weight).sum();
        return vec![Component {
            weight,
            crossover: mix[0].crossover,
        }];
    }
    let mut list = Linked::new(mix);
    let mut heap = BinaryHeap::new();
    let push = |list: &Linked, heap: &mut BinaryHeap<HeapEntry>, i: usize| {
        if let (Some(p), Some(n)) = (list.prev[i], list.next[i]) {
            heap.push(HeapEntry {
                cost: split_gain(list.items[p], list.items[i], list.items[n]),
                node: i,
                stamp: list.stamp[i],
            });
        }
    };
    for i in 0..list.items.len() {
        push(&list, &mut heap, i);
    }
    while list.live > k {
        let Some(entry) = heap.pop() else { break };
        let i = entry.node;
        if !list.alive[i] || entry.stamp != list.stamp[i] {
            continue;
        }
        let (Some(p), Some(n)) = (list.prev[i], list.next[i]) else {
            continue;
        };
        let (left, mid, right) = (list.items[p], list.items[i], list.items[n]);
        let theta = (right.crossover - mid.crossover) / (right.crossover - left.crossover);
        list.items[p].weight += theta * mid.weight;
        list.items[n].weight += (1.0 - theta) * mid.weight;
        list.alive[i] = false;
        list.next[p] = Some(n);
        list.prev[n] = Some(p);
        list.live -= 1;
        for node in [p, n] {
            list.stamp[node] += 1;
            push(&list, &mut heap, node);
        }
    }
    list.collect()
}

fn polarize_quantized<F>(base: Mixture, m: u32, quantize: F) -> Vec<Mixture>
where
    F: Fn(Mixture) -> Mixture + Sync,
{
    let mut level = vec![quantize(base)];
    for _ in 0..m {
        level = level
            .par_iter()
            .flat_map_iter(|mix| [quantize(check_combine(mix)), quantize(variable_combine(mix))])
            .collect();
    }
    level
}

/// Quantized synthesis: `capacity_lower` from degrading merges and, when
/// `with_upper` is set, `capacity_upper` from upgrading splits (otherwise 1).
pub fn synthesize_general(
    ch: &ChannelSpec,
    m: u32,
    budget: QuantizationBudget,
    with_upper: bool,
) -> Result<Vec<SynthesizedBitChannel>> {
    PolarParams::new(m)?;
    let base = mixture_from_channel(ch)?;
    let k = budget.components();
    let lower = polarize_quantized(base.clone(), m, |mix| degrade(mix, k));
    let upper = with_upper.then(|| polarize_quantized(base, m, |mix| upgrade(mix, k)));
    Ok(lower
        .iter()
        .enumerate()
        .map(|(index, mix)| {
            let capacity_lower = mixture_capacity(mix);
            let capacity_upper = upper
                .as_ref()
                .map_or(1.0, |u| mixture_capacity(&u[index]).max(capacity_lower));
            SynthesizedBitChannel {
                index,
                capacity_lower,
                capacity_upper,
                bhattacharyya: upper.as_ref().map(|_| mixture_bhattacharyya(mix)),
            }
        })
        .collect())
}

/// Exact capacities from the BSC-mixture recursion with no merging beyond
/// coinciding crossovers. Fails once any bit channel needs more than
/// `max_components` components.
pub fn synthesize_mixture_exact(
    ch: &ChannelSpec,
    m: u32,
    max_components: usize,
) -> Result<Vec<SynthesizedBitChannel>> {
    PolarParams::new(m)?;
    let mut level = vec![mixture_from_channel(ch)?];
    for _ in 0..m {
        level = level
            .par_iter()
            .flat_map_iter(|mix| [check_combine(mix), variable_combine(mix)])
            .collect();
        if let Some(big) = level.iter().map(Vec::len).max().filter(|&l| l > max_components) {
            return Err(Error::CapExceeded {
                required: big as u128,
                cap: max_components,
            });
        }
    }
    Ok(level
        .iter()
        .enumerate()
        .map(|(index, mix)| {
            let c = mixture_capacity(mix);
            SynthesizedBitChannel {
                index,
                capacity_lower: c,
                capacity_upper: c,
                bhattacharyya: Some(mixture_bhattacharyya(mix)),
            }
        })
        .collect())
}

/// Exact capacities by enumerating every bit channel's transition table.
pub fn synthesize_exact(ch: &ChannelSpec, m: u32, cap: usize) -> Result<Vec<SynthesizedBitChannel>> {
    ch.require_symmetric()?;
    Ok(oracle::brute_force_bit_channels(ch, m, cap)?
        .into_iter()
        .map(|t| SynthesizedBitChannel {
            index: t.index,
            capacity_lower: t.capacity,
            capacity_upper: t.capacity,
            bhattacharyya: Some(t.bhattacharyya()),
        })
        .collect())
}

/// Whether exact enumeration is within [`EXACT_AUTO_LIMIT`].
pub fn exact_is_feasible(ch: &ChannelSpec, m: u32) -> bool {
    if m > 6 {
        return false;
    }
    let n = 1u32 << m;
    let required = (ch.output_size() as u128)
        .checked_pow(n)
        .and_then(|ys| ys.checked_mul(1u128 << n));
    required.is_some_and(|r| check_cap(r, EXACT_AUTO_LIMIT).is_ok())
}

/// Exact enumeration when feasible, quantized synthesis with both bounds
/// otherwise.
pub fn synthesize_auto(
    ch: &ChannelSpec,
    m: u32,
    budget: QuantizationBudget,
) -> Result<Vec<SynthesizedBitChannel>> {
    if exact_is_feasible(ch, m) {
        synthesize_exact(ch, m, EXACT_AUTO_LIMIT)
    } else {
        synthesize_general(ch, m, budget, true)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub capacity: f64,
    pub stderr: f64,
    pub trials: usize,
}

/// Genie-aided Monte Carlo estimate of `I(U_i; Y^n, U_1^{i-1})` for uniform
/// inputs, averaging `1 − h(P(u_i | y, u_1^{i-1}))` over sampled blocks.
pub fn mc_bit_channel_estimate<R: Rng + ?Sized>(
    ch: &ChannelSpec,
    m: u32,
    index: usize,
    trials: usize,
    rng: &mut R,
) -> Result<McEstimate> {
    let params = PolarParams::new(m)?;
    let n = params.n();
    if index >= n {
        return Err(Error::IndexOutOfRange { index, n });
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let mut state = LikelihoodState::new(params);
    let mut u = vec![0u8; n];
    let mut x = vec![0u8; n];
    let mut obs = vec![0usize; n];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..trials {
        for bit in &mut u {
            *bit = rng.random::<bool>() as u8;
        }
        x.copy_from_slice(&u);
        transform_in_place(&mut x);
        for (y, &xi) in obs.iter_mut().zip(&x) {
            *y = crate::channel::sample_output(ch, xi, rng);
        }
        state.load_observation(ch, &obs)?;
        let mut pair = [0.0; 2];
        state.run(|i, p| {
            if i < index {
                Ok(Some(u[i]))
            } else {
                pair = p;
                Ok(None)
            }
        })?;
        let total = pair[0] + pair[1];
        if total <= 0.0 {
            return Err(Error::DegenerateLikelihood(index));
        }
        let sample = 1.0 - binary_entropy(pair[0] / total);
        sum += sample;
        sum_sq += sample * sample;
    }
    let t = trials as f64;
    let mean = sum / t;
    let var = if trials > 1 {
        ((sum_sq - t * mean * mean) / (t - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(McEstimate {
        capacity: mean,
        stderr: (var / t).sqrt(),
        trials,
    })
}

/// Cacheable synthesis result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisProfile {
    pub n: usize,
    pub channel: ChannelSpec,
    /// `None` for exact synthesis.
    pub mu: Option<usize>,
    pub capacities_lower: Vec<f64>,
    pub capacities_upper: Vec<f64>,
}

impl SynthesisProfile {
    pub fn new(channel: ChannelSpec, mu: Option<usize>, bits: &[SynthesizedBitChannel]) -> Self {
        Self {
            n: bits.len(),
            channel,
            mu,
            capacities_lower: bits.iter().map(|b| b.capacity_lower).collect(),
            capacities_upper: bits.iter().map(|b| b.capacity_upper).collect(),
        }
    }

    pub fn bit_channels(&self) -> Vec<SynthesizedBitChannel> {
        self.capacities_lower
            .iter()
            .zip(&self.capacities_upper)
            .enumerate()
            .map(|(index, (&lo, &hi))| SynthesizedBitChannel {
                index,
                capacity_lower: lo,
                capacity_upper: hi,
                bhattacharyya: None,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{capacity, cascade, make_bec, make_bsc};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn caps(bits: &[SynthesizedBitChannel]) -> Vec<f64> {
        bits.iter().map(|b| b.capacity_lower).collect()
    }

    #[test]
    fn bec_by_hand() {
        // z = 0.5 → (0.75, 0.25) → (0.9375, 0.5625, 0.4375, 0.0625)
        let bits = synthesize_bec(0.5, 2).unwrap();
        assert_eq!(caps(&bits), vec![0.0625, 0.4375, 0.5625, 0.9375]);
        assert!(synthesize_bec(0.0, 3).unwrap().iter().all(|b| b.capacity_lower == 1.0));
        assert!(synthesize_bec(1.0, 3).unwrap().iter().all(|b| b.capacity_upper == 0.0));
        assert!(synthesize_bec(1.5, 3).is_err());
    }

    #[test]
    fn bec_conserves_capacity() {
        for eps in [0.1, 0.4, 0.77] {
            let bits = synthesize_bec(eps, 8).unwrap();
            let mean = caps(&bits).iter().sum::<f64>() / bits.len() as f64;
            assert!((mean - (1.0 - eps)).abs() < 1e-10);
        }
    }

    #[test]
    fn mixture_round_trip_capacity() {
        for ch in [
            make_bsc(0.11).unwrap(),
            make_bec(0.3).unwrap(),
            cascade(&make_bsc(0.15).unwrap(), &make_bec(0.4).unwrap()).unwrap(),
        ] {
            let mix = mixture_from_channel(&ch).unwrap();
            assert!((mixture_capacity(&mix) - capacity(&ch).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn general_matches_bec_when_unquantized() {
        let ch = make_bec(0.5).unwrap();
        let bits = synthesize_general(&ch, 3, QuantizationBudget::new(64).unwrap(), true).unwrap();
        let exact = synthesize_bec(0.5, 3).unwrap();
        for (a, b) in bits.iter().zip(&exact) {
            assert!((a.capacity_lower - b.capacity_lower).abs() < 1e-12);
            assert!((a.capacity_upper - b.capacity_upper).abs() < 1e-12);
        }
    }

    #[test]
    fn noiseless_is_exact_at_any_budget() {
        let ch = make_bsc(0.0).unwrap();
        for mu in [2, 4, 16] {
            let bits = synthesize_general(&ch, 5, QuantizationBudget::new(mu).unwrap(), true).unwrap();
            assert!(bits.iter().all(|b| b.capacity_lower == 1.0 && b.capacity_upper == 1.0));
        }
    }

    #[test]
    fn quantized_bounds_bracket_mean() {
        let ch = make_bsc(0.11).unwrap();
        let c = capacity(&ch).unwrap();
        let bits = synthesize_general(&ch, 10, QuantizationBudget::default(), true).unwrap();
        let n = bits.len() as f64;
        let lo: f64 = bits.iter().map(|b| b.capacity_lower).sum::<f64>() / n;
        let hi: f64 = bits.iter().map(|b| b.capacity_upper).sum::<f64>() / n;
        assert!(lo <= c + 1e-12 && c <= hi + 1e-12, "{lo} {c} {hi}");
        assert!((0.49..=0.501).contains(&lo), "{lo}");
        assert!(bits.iter().all(|b| b.capacity_lower <= b.capacity_upper));
    }

    #[test]
    fn upper_disabled_reports_one() {
        let bits = synthesize_general(&make_bsc(0.2).unwrap(), 3, QuantizationBudget::default(), false)
            .unwrap();
        assert!(bits.iter().all(|b| b.capacity_upper == 1.0));
    }

    #[test]
    fn budget_validation() {
        assert!(QuantizationBudget::new(0).is_err());
        assert!(QuantizationBudget::new(7).is_err());
        assert_eq!(QuantizationBudget::new(2).unwrap().mu(), 2);
    }

    #[test]
    fn rejects_asymmetric() {
        let asym = ChannelSpec::new(
            vec!["0".into(), "1".into()],
            [vec![0.9, 0.1], vec![0.3, 0.7]],
            None,
        )
        .unwrap();
        assert!(matches!(
            synthesize_general(&asym, 2, QuantizationBudget::default(), true),
            Err(Error::NotSymmetric(_))
        ));
    }

    #[test]
    fn degrade_and_upgrade_move_capacity_the_right_way() {
        let mix = mixture_from_channel(&make_bsc(0.2).unwrap()).unwrap();
        let mut m = mix;
        for _ in 0..3 {
            m = variable_combine(&m);
        }
        let c = mixture_capacity(&m);
        for k in [1, 2, 3] {
            assert!(mixture_capacity(&degrade(m.clone(), k)) <= c + 1e-12);
            assert!(mixture_capacity(&upgrade(m.clone(), k)) >= c - 1e-12);
            assert!(degrade(m.clone(), k).len() <= k);
            assert!(upgrade(m.clone(), k).len() <= k);
        }
    }

    #[test]
    fn mc_noiseless_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let est = mc_bit_channel_estimate(&make_bsc(0.0).unwrap(), 3, 2, 100, &mut rng).unwrap();
        assert_eq!(est.capacity, 1.0);
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn mc_matches_bec() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let est = mc_bit_channel_estimate(&make_bec(0.5).unwrap(), 2, 3, 100_000, &mut rng).unwrap();
        assert!((est.capacity - 0.9375).abs() <= 3.0 * est.stderr.max(1e-4), "{est:?}");
    }

    #[test]
    fn mc_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ch = make_bsc(0.1).unwrap();
        assert!(mc_bit_channel_estimate(&ch, 2, 4, 10, &mut rng).is_err());
        assert!(mc_bit_channel_estimate(&ch, 2, 0, 0, &mut rng).is_err());
    }

    #[test]
    fn exact_feasibility_limit() {
        assert!(exact_is_feasible(&make_bsc(0.1).unwrap(), 3));
        // 3^8 · 2^8 ≈ 1.7M > 2^20
        assert!(!exact_is_feasible(&make_bec(0.1).unwrap(), 3));
        assert!(!exact_is_feasible(&make_bsc(0.1).unwrap(), 10));
    }

    #[test]
    fn profile_json_keys() {
        let ch = make_bec(0.5).unwrap();
        let bits = synthesize_bec(0.5, 1).unwrap();
        let value = serde_json::to_value(SynthesisProfile::new(ch, Some(64), &bits)).unwrap();
        for key in ["n", "channel", "mu", "capacities_lower", "capacities_upper"] {
            assert!(value.get(key).is_some(), "{key}");
        }
    }
}
