//! Binary-input discrete memoryless channels.
//!
//! A [`ChannelSpec`] holds the two transition rows `W(·|0)`, `W(·|1)` over a
//! labelled output alphabet and, for symmetric channels, the involutive output
//! permutation `π` with `W(y|0) = W(π(y)|1)`.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::table::{entropy_bits, kl_bits};

const ROW_TOLERANCE: f64 = 1e-12;
const LEMMA1_TOLERANCE: f64 = 1e-10;
const DEGRADATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelDoc", into = "ChannelDoc")]
pub struct ChannelSpec {
    outputs: Vec<String>,
    rows: [Vec<f64>; 2],
    perm: Option<Vec<usize>>,
}

/// On-disk layout: `{"outputs": [...], "rows": [[...],[...]], "perm": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ChannelDoc {
    outputs: Vec<String>,
    rows: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    perm: Option<Vec<usize>>,
}

impl TryFrom<ChannelDoc> for ChannelSpec {
    type Error = Error;

    fn try_from(doc: ChannelDoc) -> Result<Self> {
        let [r0, r1]: [Vec<f64>; 2] = doc.rows.try_into().map_err(|rows: Vec<Vec<f64>>| {
            Error::Parse(format!("expected 2 transition rows, found {}", rows.len()))
        })?;
        ChannelSpec::new(doc.outputs, [r0, r1], doc.perm)
    }
}

impl From<ChannelSpec> for ChannelDoc {
    fn from(ch: ChannelSpec) -> Self {
        let [r0, r1] = ch.rows;
        ChannelDoc {
            outputs: ch.outputs,
            rows: vec![r0, r1],
            perm: ch.perm,
        }
    }
}

impl ChannelSpec {
    pub fn new(outputs: Vec<String>, rows: [Vec<f64>; 2], perm: Option<Vec<usize>>) -> Result<Self> {
        let size = outputs.len();
        if size == 0 {
            return Err(Error::InvalidParameter("empty output alphabet".into()));
        }
        for (x, row) in rows.iter().enumerate() {
            if row.len() != size {
                return Err(Error::LengthMismatch {
                    expected: size,
                    actual: row.len(),
                });
            }
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::InvalidParameter(format!(
                    "row {x} has an entry outside [0, 1]"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_TOLERANCE {
                return Err(Error::InvalidParameter(format!("row {x} sums to {sum}")));
            }
        }
        if let Some(perm) = &perm {
            check_symmetry(&rows, perm)?;
        }
        Ok(Self {
            outputs,
            rows,
            perm,
        })
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    pub fn output_size(&self) -> usize {
        self.outputs.len()
    }

    pub fn rows(&self) -> &[Vec<f64>; 2] {
        &self.rows
    }

    pub fn symmetry_perm(&self) -> Option<&[usize]> {
        self.perm.as_deref()
    }

    pub fn is_symmetric(&self) -> bool {
        self.perm.is_some()
    }

    /// `W(y|x)`.
    #[inline]
    pub fn prob(&self, y: usize, x: u8) -> f64 {
        self.rows[x as usize][y]
    }

    /// Index of an output label.
    pub fn symbol_index(&self, label: &str) -> Option<usize> {
        self.outputs.iter().position(|s| s == label)
    }

    pub(crate) fn require_symmetric(&self) -> Result<&[usize]> {
        self.perm
            .as_deref()
            .ok_or_else(|| Error::NotSymmetric("no symmetry permutation".into()))
    }

    /// Crossover probability if this is a binary symmetric channel.
    pub fn bsc_crossover(&self) -> Option<f64> {
        let perm = self.perm.as_deref()?;
        if self.outputs.len() != 2 || perm != [1, 0] {
            return None;
        }
        Some(self.rows[0][1])
    }

    /// Output distribution `q_Y` under a uniform input.
    pub fn output_distribution(&self) -> Vec<f64> {
        self.rows[0]
            .iter()
            .zip(&self.rows[1])
            .map(|(a, b)| 0.5 * (a + b))
            .collect()
    }

    /// `I(X;Y)` under a uniform input, in bits, for any binary-input channel.
    pub fn uniform_input_information(&self) -> f64 {
        let q = self.output_distribution();
        let cond: f64 = self.rows.iter().map(|row| 0.5 * entropy_bits(row)).sum();
        (entropy_bits(&q) - cond).max(0.0)
    }

    /// `D(W(·|x) ‖ q_Y)` for both inputs, in bits.
    pub fn row_divergences(&self) -> Result<[f64; 2]> {
        let q = self.output_distribution();
        Ok([kl_bits(&self.rows[0], &q)?, kl_bits(&self.rows[1], &q)?])
    }
}

fn check_symmetry(rows: &[Vec<f64>; 2], perm: &[usize]) -> Result<()> {
    let size = rows[0].len();
    if perm.len() != size || perm.iter().any(|&p| p >= size) {
        return Err(Error::NotSymmetric("permutation has wrong shape".into()));
    }
    for (y, &py) in perm.iter().enumerate() {
        if perm[py] != y {
            return Err(Error::NotSymmetric("permutation is not an involution".into()));
        }
        if (rows[0][y] - rows[1][py]).abs() > ROW_TOLERANCE {
            return Err(Error::NotSymmetric(format!(
                "W({y}|0) != W(π({y})|1)"
            )));
        }
    }
    Ok(())
}

fn binary_labels() -> Vec<String> {
    vec!["0".into(), "1".into()]
}

pub fn make_bsc(p: f64) -> Result<ChannelSpec> {
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "BSC crossover {p} not in [0, 0.5]"
        )));
    }
    ChannelSpec::new(
        binary_labels(),
        [vec![1.0 - p, p], vec![p, 1.0 - p]],
        Some(vec![1, 0]),
    )
}

pub fn make_bec(eps: f64) -> Result<ChannelSpec> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!(
            "BEC erasure probability {eps} not in [0, 1]"
        )));
    }
    ChannelSpec::new(
        vec!["0".into(), "?".into(), "1".into()],
        [vec![1.0 - eps, eps, 0.0], vec![0.0, eps, 1.0 - eps]],
        Some(vec![2, 1, 0]),
    )
}

/// Feeds the output of `first` into `second`. `first` must have the binary
/// output alphabet `{0, 1}` that `second` takes as input.
pub fn cascade(first: &ChannelSpec, second: &ChannelSpec) -> Result<ChannelSpec> {
    if first.outputs != binary_labels() {
        return Err(Error::AlphabetMismatch(format!(
            "second channel takes {{0, 1}} but first emits {:?}",
            first.outputs
        )));
    }
    let rows = [0u8, 1].map(|x| {
        (0..second.output_size())
            .map(|z| (0..2).map(|y| first.rows[x as usize][y] * second.rows[y][z]).sum())
            .collect::<Vec<f64>>()
    });
    // π_first = swap relabels the second channel's input, so its own
    // permutation carries over.
    let perm = match (first.symmetry_perm(), second.symmetry_perm()) {
        (Some([1, 0]), Some(p)) => Some(p.to_vec()),
        _ => None,
    };
    ChannelSpec::new(second.outputs.clone(), rows, perm)
}

/// The channel `V → (X, Y)` with `W(x, y|v) = W_X(x|v)·W_Y(y|v)`; outputs
/// are ordered x-major.
pub fn joint_channel(wx: &ChannelSpec, wy: &ChannelSpec) -> Result<ChannelSpec> {
    let px = wx.require_symmetric()?;
    let py = wy.require_symmetric()?;
    let ny = wy.output_size();
    let mut outputs = Vec::with_capacity(wx.output_size() * ny);
    for a in &wx.outputs {
        for b in &wy.outputs {
            outputs.push(format!("({a},{b})"));
        }
    }
    let rows = [0usize, 1].map(|v| {
        wx.rows[v]
            .iter()
            .flat_map(|&a| wy.rows[v].iter().map(move |&b| a * b))
            .collect::<Vec<f64>>()
    });
    let perm = (0..wx.output_size())
        .flat_map(|a| (0..ny).map(move |b| px[a] * ny + py[b]))
        .collect();
    ChannelSpec::new(outputs, rows, Some(perm))
}

/// Capacity of a symmetric channel, i.e. the uniform-input mutual
/// information. Also checks that it equals `D(W(·|x) ‖ q_Y)` for both `x`.
pub fn capacity(ch: &ChannelSpec) -> Result<f64> {
    ch.require_symmetric()?;
    let c = ch.uniform_input_information();
    for (x, d) in ch.row_divergences()?.into_iter().enumerate() {
        if (c - d).abs() > LEMMA1_TOLERANCE {
            return Err(Error::NotSymmetric(format!(
                "capacity {c} differs from D(W(·|{x})‖q_Y) = {d}"
            )));
        }
    }
    Ok(c)
}

/// Whether `coarse = fine · M` for some row-stochastic `M` from fine's
/// outputs to coarse's outputs, decided by linear feasibility.
pub fn is_degraded(coarse: &ChannelSpec, fine: &ChannelSpec) -> bool {
    degrading_map(coarse, fine).is_some()
}

/// A witness map for [`is_degraded`], indexed `[fine output][coarse output]`.
pub fn degrading_map(coarse: &ChannelSpec, fine: &ChannelSpec) -> Option<Vec<Vec<f64>>> {
    let (nf, nc) = (fine.output_size(), coarse.output_size());
    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<Vec<_>> = (0..nf)
        .map(|_| (0..nc).map(|_| problem.add_var(0.0, (0.0, 1.0))).collect())
        .collect();
    for row in &vars {
        let terms: Vec<_> = row.iter().map(|&v| (v, 1.0)).collect();
        problem.add_constraint(terms.as_slice(), ComparisonOp::Eq, 1.0);
    }
    for x in 0..2 {
        for b in 0..nc {
            let terms: Vec<_> = (0..nf)
                .filter(|&a| fine.rows[x][a] > 0.0)
                .map(|a| (vars[a][b], fine.rows[x][a]))
                .collect();
            let target = coarse.rows[x][b];
            problem.add_constraint(
                terms.as_slice(),
                ComparisonOp::Le,
                target + DEGRADATION_TOLERANCE,
            );
            problem.add_constraint(
                terms.as_slice(),
                ComparisonOp::Ge,
                target - DEGRADATION_TOLERANCE,
            );
        }
    }
    let solution = problem.solve().ok()?;
    Some(
        vars.iter()
            .map(|row| row.iter().map(|&v| solution[v]).collect())
            .collect(),
    )
}

/// Draws one output symbol index from `W(·|input)`.
pub fn sample_output<R: Rng + ?Sized>(ch: &ChannelSpec, input: u8, rng: &mut R) -> usize {
    let row = &ch.rows[(input & 1) as usize];
    let draw: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_nonzero = 0;
    for (y, &p) in row.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last_nonzero = y;
            if draw < acc {
                return y;
            }
        }
    }
    last_nonzero
}

/// The action distribution `q_{XY}` with `q_X` uniform on `{0, 1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub action_channel: ChannelSpec,
}

impl TargetSpec {
    pub fn new(action_channel: ChannelSpec) -> Result<Self> {
        action_channel.require_symmetric()?;
        Ok(Self { action_channel })
    }

    /// `q_X`; always Bernoulli(1/2).
    pub fn input_dist(&self) -> [f64; 2] {
        [0.5, 0.5]
    }

    /// `q(x, y)` flattened x-major.
    pub fn joint(&self) -> Vec<f64> {
        self.action_channel
            .rows
            .iter()
            .flat_map(|row| row.iter().map(|p| 0.5 * p))
            .collect()
    }
}

/// The single-letter target `q(x, y) = Σ_v ½·W_X(x|v)·W_Y(y|v)`, x-major.
pub fn coordination_target(wx: &ChannelSpec, wy: &ChannelSpec) -> Vec<f64> {
    let mut out = vec![0.0; wx.output_size() * wy.output_size()];
    for v in 0..2 {
        for (a, &pa) in wx.rows[v].iter().enumerate() {
            for (b, &pb) in wy.rows[v].iter().enumerate() {
                out[a * wy.output_size() + b] += 0.5 * pa * pb;
            }
        }
    }
    out
}

/// Parses `bsc:p`, `bec:eps` or `bsc-bec:p,eps`.
pub fn parse_preset(text: &str) -> Result<ChannelSpec> {
    let (kind, args) = text
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("channel preset `{text}` has no `:`")))?;
    let nums = args
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("`{s}` in preset `{text}`: {e}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    match (kind, nums.as_slice()) {
        ("bsc", [p]) => make_bsc(*p),
        ("bec", [eps]) => make_bec(*eps),
        ("bsc-bec", [p, eps]) => cascade(&make_bsc(*p)?, &make_bec(*eps)?),
        _ => Err(Error::Parse(format!("unknown channel preset `{text}`"))),
    }
}
