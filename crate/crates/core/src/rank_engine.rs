//! Pooled and within-group ranks, and placements, for two-sample data.
//!
//! Ranks are computed by sorting once and scanning tie blocks, then written
//! back in input order. Ties are detected by exact equality of the stored
//! values.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// One group's observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    label: String,
    values: Vec<f64>,
}

impl Sample {
    /// Builds a sample, rejecting empty input and non-finite values.
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let label = label.into();
        if values.is_empty() {
            return Err(Error::EmptySample(label));
        }
        check_finite(&values)?;
        Ok(Self { label, values })
    }

    pub fn from_slice(label: impl Into<String>, values: &[f64]) -> Result<Self> {
        Self::new(label, values.to_vec())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub(crate) fn require_len(&self, min: usize) -> Result<()> {
        if self.values.len() < min {
            return Err(Error::TooSmall {
                label: self.label.clone(),
                len: self.values.len(),
                min,
            });
        }
        Ok(())
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite {
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}

/// Sorted order of a value vector together with its tie blocks.
#[derive(Debug, Clone)]
pub struct PooledLayout {
    order: Vec<usize>,
    /// Exclusive end (in sorted position) of each tie block.
    block_ends: Vec<usize>,
}

impl PooledLayout {
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample("pooled".into()));
        }
        check_finite(values)?;
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let mut block_ends = Vec::new();
        for pos in 1..order.len() {
            // -0.0 and 0.0 compare equal, which total_cmp orders apart but
            // keeps adjacent.
            if values[order[pos]] != values[order[pos - 1]] {
                block_ends.push(pos);
            }
        }
        block_ends.push(order.len());
        Ok(Self { order, block_ends })
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// True when at least two values coincide.
    pub fn has_ties(&self) -> bool {
        self.block_ends.len() < self.order.len()
    }

    /// Iterates tie blocks as slices of original indices.
    pub fn blocks(&self) -> impl Iterator<Item = &[usize]> + '_ {
        let mut start = 0;
        self.block_ends.iter().map(move |&end| {
            let block = &self.order[start..end];
            start = end;
            block
        })
    }

    /// Placement sufficient statistics for a two-group labelling of the
    /// pooled values (`in_second[i]` marks membership of group 2).
    ///
    /// Runs in O(N). Placements are multiples of ½, so the sums are exact.
    pub fn moments(&self, in_second: &[bool]) -> PlacementMoments {
        debug_assert_eq!(in_second.len(), self.order.len());
        let mut m = PlacementMoments::default();
        let (mut before1, mut before2) = (0usize, 0usize);
        for block in self.blocks() {
            let c2 = block.iter().filter(|&&i| in_second[i]).count();
            let c1 = block.len() - c2;
            // group-1 members exceed all earlier group-2 values and tie with
            // the c2 in their block; symmetrically for group 2.
            let p1 = before2 as f64 + 0.5 * c2 as f64;
            let p2 = before1 as f64 + 0.5 * c1 as f64;
            m.sum[0] += c1 as f64 * p1;
            m.sum_sq[0] += c1 as f64 * p1 * p1;
            m.sum[1] += c2 as f64 * p2;
            m.sum_sq[1] += c2 as f64 * p2 * p2;
            m.tied_pairs += (c1 * c2) as f64;
            before1 += c1;
            before2 += c2;
        }
        m.n = [before1, before2];
        m
    }
}

/// Sums of placements, squared placements and cross-group tied pairs.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PlacementMoments {
    pub n: [usize; 2],
    pub sum: [f64; 2],
    pub sum_sq: [f64; 2],
    pub tied_pairs: f64,
}

impl PlacementMoments {
    pub fn from_summary(summary: &RankSummary) -> Self {
        let mut m = PlacementMoments::default();
        for (g, ranks) in [&summary.group1, &summary.group2].into_iter().enumerate() {
            m.n[g] = ranks.placements.len();
            m.sum[g] = ranks.placements.iter().sum();
            m.sum_sq[g] = ranks.placements.iter().map(|p| p * p).sum();
        }
        // Σ_k (R⁺ − R⁻) − (R^(2)+ − R^(2)−) over group 2 counts cross ties.
        let g2 = &summary.group2;
        m.tied_pairs = (0..g2.placements.len())
            .map(|k| (g2.pooled_max[k] - g2.pooled_min[k]) - (g2.internal_max[k] - g2.internal_min[k]))
            .sum();
        m
    }

    /// Σ_k (R*_{ik} − R̄*_{i·})² for group `g` (0 or 1).
    pub fn centered_ss(&self, g: usize) -> f64 {
        let n = self.n[g] as f64;
        // n·Σp² − (Σp)² is exact in quarter units for realistic sizes.
        ((n * self.sum_sq[g] - self.sum[g] * self.sum[g]) / n).max(0.0)
    }
}

/// Rank quantities for one group of a two-sample dataset, aligned with the
/// group's input order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRanks {
    pub pooled_mid: Vec<f64>,
    pub pooled_min: Vec<f64>,
    pub pooled_max: Vec<f64>,
    pub internal_mid: Vec<f64>,
    pub internal_min: Vec<f64>,
    pub internal_max: Vec<f64>,
    /// Pooled mid-rank minus internal mid-rank.
    pub placements: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankSummary {
    pub group1: GroupRanks,
    pub group2: GroupRanks,
}

impl RankSummary {
    pub fn n1(&self) -> usize {
        self.group1.placements.len()
    }

    pub fn n2(&self) -> usize {
        self.group2.placements.len()
    }

    pub fn total(&self) -> usize {
        self.n1() + self.n2()
    }
}

fn scan_ranks(values: &[f64]) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let layout = PooledLayout::new(values)?;
    let n = values.len();
    let (mut mid, mut lo, mut hi) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut start = 0usize;
    for block in layout.blocks() {
        let min_rank = (start + 1) as f64;
        let max_rank = (start + block.len()) as f64;
        for &i in block {
            lo[i] = min_rank;
            hi[i] = max_rank;
            mid[i] = 0.5 * (min_rank + max_rank);
        }
        start += block.len();
    }
    Ok((mid, lo, hi))
}

/// Mid-ranks: (# strictly smaller) + (# equal + 1)/2, in input order.
pub fn mid_ranks(values: &[f64]) -> Result<Vec<f64>> {
    scan_ranks(values).map(|(mid, _, _)| mid)
}

/// Min-ranks ((# strictly smaller) + 1) and max-ranks (# smaller or equal).
pub fn min_max_ranks(values: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    scan_ranks(values).map(|(_, lo, hi)| (lo, hi))
}

/// Full rank summary (pooled, internal and placements) for two samples.
pub fn placements(s1: &Sample, s2: &Sample) -> Result<RankSummary> {
    s1.require_len(1)?;
    s2.require_len(1)?;
    let n1 = s1.len();
    let pooled: Vec<f64> = s1.values().iter().chain(s2.values()).copied().collect();
    let (mid, lo, hi) = scan_ranks(&pooled)?;
    let group = |sample: &Sample, offset: usize| -> Result<GroupRanks> {
        let (imid, ilo, ihi) = scan_ranks(sample.values())?;
        let range = offset..offset + sample.len();
        let pooled_mid = mid[range.clone()].to_vec();
        let placements = pooled_mid.iter().zip(&imid).map(|(r, ri)| r - ri).collect();
        Ok(GroupRanks {
            pooled_mid,
            pooled_min: lo[range.clone()].to_vec(),
            pooled_max: hi[range].to_vec(),
            internal_mid: imid,
            internal_min: ilo,
            internal_max: ihi,
            placements,
        })
    };
    Ok(RankSummary {
        group1: group(s1, 0)?,
        group2: group(s2, n1)?,
    })
}
