//! Dense finite distributions and the distance functions shared across the
//! crate.
//!
//! Total variation is always the raw L1 sum `Σ|a − b|` (range `[0, 2]`).
//! KL divergence is in bits. With these conventions Pinsker reads
//! `tv_l1 ≤ sqrt(2·ln2·kl_bits)`.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default maximum number of entries in any exactly enumerated table.
pub const DEFAULT_TABLE_CAP: usize = 1 << 22;

const SUM_TOLERANCE: f64 = 1e-9;

/// Returns `CapExceeded` when `required` entries would not fit under `cap`.
pub fn check_cap(required: u128, cap: usize) -> Result<()> {
    if required > cap as u128 {
        Err(Error::CapExceeded { required, cap })
    } else {
        Ok(())
    }
}

/// A probability distribution over sequences `(s_1, …, s_k)` with
/// `s_j ∈ [0, radices[j])`, stored densely in lexicographic order (first
/// coordinate most significant).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistTable {
    radices: Vec<usize>,
    probs: Vec<f64>,
}

impl DistTable {
    pub fn new(radices: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        let size = domain_size(&radices)?;
        if size != probs.len() {
            return Err(Error::LengthMismatch {
                expected: size,
                actual: probs.len(),
            });
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "table entry {p} is not a probability"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "table sums to {sum}, not 1"
            )));
        }
        Ok(Self { radices, probs })
    }

    pub fn uniform(radices: Vec<usize>) -> Result<Self> {
        let size = domain_size(&radices)?;
        Self::new(radices, vec![1.0 / size as f64; size])
    }

    /// The i.i.d. product `Π_j single(s_j)` over `len` coordinates.
    pub fn iid(single: &[f64], len: usize, cap: usize) -> Result<Self> {
        check_cap((single.len() as u128).saturating_pow(len as u32), cap)?;
        let mut probs = vec![1.0];
        for _ in 0..len {
            probs = outer(&probs, single);
        }
        Self::new(vec![single.len(); len], probs)
    }

    pub fn radices(&self) -> &[usize] {
        &self.radices
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Marginal over the listed coordinates, kept in the listed order.
    pub fn marginal(&self, coords: &[usize]) -> Result<Self> {
        for &c in coords {
            if c >= self.radices.len() {
                return Err(Error::IndexOutOfRange {
                    index: c,
                    n: self.radices.len(),
                });
            }
        }
        let out_radices: Vec<usize> = coords.iter().map(|&c| self.radices[c]).collect();
        let mut out = vec![0.0; domain_size(&out_radices)?];
        let mut digits = vec![0usize; self.radices.len()];
        for &p in &self.probs {
            let mut idx = 0;
            for &c in coords {
                idx = idx * self.radices[c] + digits[c];
            }
            out[idx] += p;
            increment(&mut digits, &self.radices);
        }
        Self::new(out_radices, out)
    }

    fn check_same_domain(&self, other: &Self) -> Result<()> {
        if self.radices != other.radices {
            return Err(Error::DomainMismatch(format!(
                "{:?} vs {:?}",
                self.radices, other.radices
            )));
        }
        Ok(())
    }
}

fn domain_size(radices: &[usize]) -> Result<usize> {
    radices.iter().try_fold(1usize, |acc, &r| {
        acc.checked_mul(r)
            .ok_or_else(|| Error::InvalidParameter("domain size overflows".into()))
    })
}

/// Odometer increment of a mixed-radix counter, last coordinate fastest.
pub(crate) fn increment(digits: &mut [usize], radices: &[usize]) {
    for j in (0..digits.len()).rev() {
        digits[j] += 1;
        if digits[j] < radices[j] {
            return;
        }
        digits[j] = 0;
    }
}

/// Flattened outer product `a ⊗ b` with `a` most significant.
pub(crate) fn outer(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        out.extend(b.iter().map(|&y| x * y));
    }
    out
}

/// L1 distance between two tables on the same domain.
pub fn tv(a: &DistTable, b: &DistTable) -> Result<f64> {
    a.check_same_domain(b)?;
    Ok(tv_l1(&a.probs, &b.probs))
}

/// KL divergence `D(a ‖ b)` in bits.
pub fn kl(a: &DistTable, b: &DistTable) -> Result<f64> {
    a.check_same_domain(b)?;
    kl_bits(&a.probs, &b.probs)
}

pub fn tv_l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// `Σ a·log2(a/b)` with `0·log 0 = 0`; `a > 0 = b` is a support violation.
pub fn kl_bits(a: &[f64], b: &[f64]) -> Result<f64> {
    let mut sum = 0.0;
    for (&p, &q) in a.iter().zip(b) {
        if p > 0.0 {
            if q <= 0.0 {
                return Err(Error::SupportViolation);
            }
            sum += p * (p / q).log2();
        }
    }
    Ok(sum)
}

/// Pinsker bound on the L1 distance given a KL divergence in bits.
pub fn pinsker_l1_bound(kl_bits: f64) -> f64 {
    (2.0 * LN_2 * kl_bits.max(0.0)).sqrt()
}

pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

pub fn entropy_bits(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}
