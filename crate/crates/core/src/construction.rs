//! Good/bad index sets, the nested partition `F1 ∪ F2 ∪ F3`, and coordination
//! code assembly.
//!
//! All index sets are 0-based and sorted.

use serde::{Deserialize, Serialize};

use crate::channel::{joint_channel, ChannelSpec};
use crate::error::{Error, Result};
use crate::polar::PolarParams;
use crate::synthesis::{synthesize_auto, QuantizationBudget, SynthesizedBitChannel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum SelectionMode {
    /// `good = {i : capacity_lower(i) ≥ 2^{−n^β}}`.
    Threshold { beta: f64 },
    /// The `round(rate·n)` indices with the largest `capacity_lower`.
    RateTarget { rate: f64 },
}

impl SelectionMode {
    pub fn threshold(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 0.5) {
            return Err(Error::InvalidParameter(format!("beta = {beta} not in (0, 0.5)")));
        }
        Ok(Self::Threshold { beta })
    }

    pub fn rate_target(rate: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rate) {
            return Err(Error::InvalidParameter(format!("rate = {rate} not in [0, 1]")));
        }
        Ok(Self::RateTarget { rate })
    }
}

/// `2^{−n^β}`.
pub fn capacity_threshold(n: usize, beta: f64) -> f64 {
    (-(n as f64).powf(beta)).exp2()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionParams {
    /// Selection rule for `W_{YX|V}`.
    pub joint_mode: SelectionMode,
    /// Selection rule for `W_{X|V}`.
    pub marginal_mode: SelectionMode,
    /// Values on `F1`, in index order; `None` means all zero.
    pub frozen_values: Option<Vec<u8>>,
}

impl ConstructionParams {
    pub fn threshold(beta: f64) -> Result<Self> {
        let mode = SelectionMode::threshold(beta)?;
        Ok(Self {
            joint_mode: mode,
            marginal_mode: mode,
            frozen_values: None,
        })
    }
}

impl Default for ConstructionParams {
    fn default() -> Self {
        Self::threshold(0.25).expect("default beta is in range")
    }
}

/// Splits `[0, n)` into (good, bad) by `capacity_lower`.
pub fn select_good(profile: &[SynthesizedBitChannel], mode: SelectionMode) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = profile.len();
    PolarParams::from_len(n)?;
    let mut is_good = vec![false; n];
    match mode {
        SelectionMode::Threshold { beta } => {
            SelectionMode::threshold(beta)?;
            let t = capacity_threshold(n, beta);
            for b in profile {
                is_good[b.index] = b.capacity_lower >= t;
            }
        }
        SelectionMode::RateTarget { rate } => {
            SelectionMode::rate_target(rate)?;
            let k = (rate * n as f64).round() as usize;
            let mut order: Vec<&SynthesizedBitChannel> = profile.iter().collect();
            order.sort_by(|a, b| {
                b.capacity_lower
                    .total_cmp(&a.capacity_lower)
                    .then(a.index.cmp(&b.index))
            });
            for b in order.into_iter().take(k) {
                is_good[b.index] = true;
            }
        }
    }
    let good = (0..n).filter(|&i| is_good[i]).collect();
    let bad = (0..n).filter(|&i| !is_good[i]).collect();
    Ok((good, bad))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexRole {
    /// `F1`: frozen.
    Frozen,
    /// `F2`: common randomness.
    Common,
    /// `F3`: message.
    Message,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NestingPolicy {
    /// Fail on `good_x_v ⊄ good_yx_v`.
    Strict,
    /// Replace `good_x_v` by `good_x_v ∩ good_yx_v`.
    Force,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexPartition {
    pub good_yx_v: Vec<usize>,
    pub bad_yx_v: Vec<usize>,
    pub good_x_v: Vec<usize>,
    pub bad_x_v: Vec<usize>,
    pub f1: Vec<usize>,
    pub f2: Vec<usize>,
    pub f3: Vec<usize>,
    /// Number of indices removed from `good_x_v` to restore nesting.
    pub nesting_forced: usize,
}

impl IndexPartition {
    pub fn n(&self) -> usize {
        self.f1.len() + self.f2.len() + self.f3.len()
    }

    pub fn roles(&self) -> Vec<IndexRole> {
        let mut roles = vec![IndexRole::Frozen; self.n()];
        for &i in &self.f2 {
            roles[i] = IndexRole::Common;
        }
        for &i in &self.f3 {
            roles[i] = IndexRole::Message;
        }
        roles
    }
}

pub fn build_partition(
    profile_yx: &[SynthesizedBitChannel],
    profile_x: &[SynthesizedBitChannel],
    joint_mode: SelectionMode,
    marginal_mode: SelectionMode,
    policy: NestingPolicy,
) -> Result<IndexPartition> {
    if profile_yx.len() != profile_x.len() {
        return Err(Error::LengthMismatch {
            expected: profile_yx.len(),
            actual: profile_x.len(),
        });
    }
    let n = profile_yx.len();
    let (good_yx_v, bad_yx_v) = select_good(profile_yx, joint_mode)?;
    let (good_x_raw, _) = select_good(profile_x, marginal_mode)?;
    let mut in_good_yx = vec![false; n];
    for &i in &good_yx_v {
        in_good_yx[i] = true;
    }
    let violations = good_x_raw.iter().filter(|&&i| !in_good_yx[i]).count();
    if violations > 0 && policy == NestingPolicy::Strict {
        return Err(Error::NestingViolation(violations));
    }
    let good_x_v: Vec<usize> = good_x_raw.into_iter().filter(|&i| in_good_yx[i]).collect();
    let mut in_good_x = vec![false; n];
    for &i in &good_x_v {
        in_good_x[i] = true;
    }
    let bad_x_v = (0..n).filter(|&i| !in_good_x[i]).collect();
    let f2 = good_yx_v.iter().copied().filter(|&i| !in_good_x[i]).collect();
    Ok(IndexPartition {
        f1: bad_yx_v.clone(),
        f2,
        f3: good_x_v.clone(),
        good_yx_v,
        bad_yx_v,
        good_x_v,
        bad_x_v,
        nesting_forced: violations,
    })
}

/// Checks C2 (`W_{X|V}` is a BSC) and C3 (`W_{Y|V}` symmetric).
pub fn check_conditions(wx_v: &ChannelSpec, wy_v: &ChannelSpec) -> Result<()> {
    if wx_v.bsc_crossover().is_none() {
        return Err(Error::ConditionViolation("W_X|V is not a binary symmetric channel".into()));
    }
    if !wy_v.is_symmetric() {
        return Err(Error::ConditionViolation("W_Y|V is not symmetric".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinationCode {
    pub params: PolarParams,
    pub partition: IndexPartition,
    /// Values on `F1`, aligned with `partition.f1`.
    pub frozen_values: Vec<u8>,
    pub wx_v: ChannelSpec,
    pub wy_v: ChannelSpec,
    pub wyx_v: ChannelSpec,
    /// `|F3| / n`.
    pub rate_r: f64,
    /// `|F2| / n`.
    pub rate_r0: f64,
}

impl CoordinationCode {
    /// Assembles a code from an existing partition.
    pub fn from_partition(
        wx_v: ChannelSpec,
        wy_v: ChannelSpec,
        partition: IndexPartition,
        frozen_values: Option<Vec<u8>>,
    ) -> Result<Self> {
        check_conditions(&wx_v, &wy_v)?;
        let params = PolarParams::from_len(partition.n())?;
        let frozen_values = frozen_values.unwrap_or_else(|| vec![0; partition.f1.len()]);
        if frozen_values.len() != partition.f1.len() {
            return Err(Error::LengthMismatch {
                expected: partition.f1.len(),
                actual: frozen_values.len(),
            });
        }
        if frozen_values.iter().any(|&b| b > 1) {
            return Err(Error::InvalidParameter("frozen values must be bits".into()));
        }
        let n = params.n() as f64;
        let wyx_v = joint_channel(&wx_v, &wy_v)?;
        Ok(Self {
            rate_r: partition.f3.len() as f64 / n,
            rate_r0: partition.f2.len() as f64 / n,
            params,
            partition,
            frozen_values,
            wx_v,
            wy_v,
            wyx_v,
        })
    }

    pub fn n(&self) -> usize {
        self.params.n()
    }

    /// Frozen values spread over all `n` positions (zero off `F1`).
    pub fn frozen_word(&self) -> Vec<u8> {
        let mut word = vec![0; self.n()];
        for (&i, &b) in self.partition.f1.iter().zip(&self.frozen_values) {
            word[i] = b;
        }
        word
    }

    /// Same code with different frozen values.
    pub fn with_frozen_values(&self, frozen_values: Vec<u8>) -> Result<Self> {
        Self::from_partition(
            self.wx_v.clone(),
            self.wy_v.clone(),
            self.partition.clone(),
            Some(frozen_values),
        )
    }
}

/// Synthesizes both channels and builds the coordination code.
pub fn build_code(
    params: PolarParams,
    wx_v: &ChannelSpec,
    wy_v: &ChannelSpec,
    construction: &ConstructionParams,
    budget: QuantizationBudget,
) -> Result<CoordinationCode> {
    check_conditions(wx_v, wy_v)?;
    let wyx_v = joint_channel(wx_v, wy_v)?;
    let profile_yx = synthesize_auto(&wyx_v, params.m(), budget)?;
    let profile_x = synthesize_auto(wx_v, params.m(), budget)?;
    build_code_from_profiles(wx_v, wy_v, &profile_yx, &profile_x, construction)
}

/// Builds the code from precomputed profiles (forcing nesting if needed).
pub fn build_code_from_profiles(
    wx_v: &ChannelSpec,
    wy_v: &ChannelSpec,
    profile_yx: &[SynthesizedBitChannel],
    profile_x: &[SynthesizedBitChannel],
    construction: &ConstructionParams,
) -> Result<CoordinationCode> {
    let partition = build_partition(
        profile_yx,
        profile_x,
        construction.joint_mode,
        construction.marginal_mode,
        NestingPolicy::Force,
    )?;
    CoordinationCode::from_partition(
        wx_v.clone(),
        wy_v.clone(),
        partition,
        construction.frozen_values.clone(),
    )
}
