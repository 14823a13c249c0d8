//! Spectrum partition plans.
//!
//! The fiber's `FS` frequency slots are carved into `N` partitions, the j-th
//! holding `Nb_j` bins of `b_j` contiguous slots each. Two sizing policies are
//! provided: the interval scheme, which weighs each partition by the
//! probability that a uniformly drawn (min, max) profile window covers it, and
//! the conventional proportional scheme used as a baseline. Both leave a slot
//! remainder that is redistributed as whole extra bins.

use crate::error::{Error, Result};
use num_rational::Ratio;

/// The offered bin sizes `b_1 < b_2 < … < b_N`, in slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinSizeSet {
    sizes: Vec<u32>,
}

impl BinSizeSet {
    pub fn new(sizes: Vec<u32>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::Plan("bin size set is empty".into()));
        }
        if sizes[0] == 0 {
            return Err(Error::Plan("bin sizes must be at least 1 slot".into()));
        }
        if sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Plan(format!(
                "bin sizes must be strictly increasing, got {sizes:?}"
            )));
        }
        Ok(Self { sizes })
    }

    /// The contiguous set `{lo, lo+1, …, hi}`.
    pub fn contiguous(lo: u32, hi: u32) -> Result<Self> {
        if lo == 0 || hi < lo {
            return Err(Error::Plan(format!("invalid size range {lo}..={hi}")));
        }
        Ok(Self {
            sizes: (lo..=hi).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn sizes(&self) -> &[u32] {
        &self.sizes
    }

    /// Bin size of partition `pnum` (1-based).
    pub fn size_of(&self, pnum: u32) -> u32 {
        self.sizes[pnum as usize - 1]
    }
}

/// Probability that partition `j` of `n` can serve a request whose (min, max)
/// partition window is drawn uniformly over ordered pairs: `2j(n-j+1)/(n(n+1))`.
pub fn contribution_probability(j: u32, n: u32) -> Result<Ratio<u64>> {
    if n == 0 || j == 0 || j > n {
        return Err(Error::Plan(format!(
            "partition index {j} out of range 1..={n}"
        )));
    }
    let (j, n) = (j as u64, n as u64);
    Ok(Ratio::new(2 * j * (n - j + 1), n * (n + 1)))
}

/// How the slot remainder left by the floor in the bin-count formula is
/// turned into whole extra bins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LeftoverPolicy {
    /// Repeatedly give one extra bin to the partition with the fewest slots
    /// so far (ties to the smaller index), skipping partitions whose bin no
    /// longer fits the remainder.
    GreedySmallest,
    /// Explicit number of extra bins per partition. Lets a published slot
    /// split be reproduced exactly.
    ExtraBins(Vec<u32>),
}

impl Default for LeftoverPolicy {
    fn default() -> Self {
        LeftoverPolicy::GreedySmallest
    }
}

/// Sizing policy of a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanScheme {
    /// Interval partitioning: bin counts weighted by contribution probability.
    Sip,
    /// Conventional partitioning: slots proportional to `b_j`.
    Sp,
}

impl std::fmt::Display for PlanScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PlanScheme::Sip => write!(f, "SIP"),
            PlanScheme::Sp => write!(f, "SP"),
        }
    }
}

/// One partition of a finished plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    /// Slots per bin.
    pub bin_size: u32,
    /// Number of bins.
    pub bin_count: u32,
    /// First slot of the partition's range, 1-based.
    pub slot_start: u32,
}

impl Partition {
    pub fn slot_count(&self) -> u32 {
        self.bin_size * self.bin_count
    }
}

/// A finished division of the fiber into partitions of equal-size bins.
///
/// Partitions are laid out left to right in index order; bins within a
/// partition are indexed 1..=Nb_j left to right. Any residue smaller than the
/// smallest bin size is dead: it sits at the end of the fiber inside the last
/// partition's reported range but is never allocatable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionPlan {
    partitions: Vec<Partition>,
    fs: u32,
    dead_slots: u32,
    scheme: PlanScheme,
    /// Flat cell index of the first bin of each partition, plus total at end.
    cell_offsets: Vec<usize>,
}

impl PartitionPlan {
    /// Interval plan: `Nb_j = floor(FS * P_c(j) / sum_i b_i * P_c(i))`.
    pub fn sip(fs: u32, sizes: &BinSizeSet, leftover: &LeftoverPolicy) -> Result<Self> {
        check_fs(fs, sizes)?;
        let n = sizes.len() as u64;
        // floor(FS * P_c(j) / sum b_i P_c(i)) == floor(FS * w_j / W) with
        // w_j = 2 j (n - j + 1); the common n(n+1) denominator cancels.
        let weight = |j: u64| 2 * j * (n - j + 1);
        let total: u128 = sizes
            .sizes()
            .iter()
            .enumerate()
            .map(|(i, &b)| b as u128 * weight(i as u64 + 1) as u128)
            .sum();
        let base: Vec<u32> = (1..=n)
            .map(|j| ((fs as u128 * weight(j) as u128) / total) as u32)
            .collect();
        Self::assemble(fs, sizes, base, leftover, PlanScheme::Sip)
    }

    /// Proportional plan: target `FS_j = FS * b_j / sum b_i`, so every
    /// partition gets `floor(FS / sum b_i)` bins before redistribution.
    pub fn sp(fs: u32, sizes: &BinSizeSet, leftover: &LeftoverPolicy) -> Result<Self> {
        check_fs(fs, sizes)?;
        let sum: u64 = sizes.sizes().iter().map(|&b| b as u64).sum();
        let per = (fs as u64 / sum) as u32;
        let base = vec![per; sizes.len()];
        Self::assemble(fs, sizes, base, leftover, PlanScheme::Sp)
    }

    fn assemble(
        fs: u32,
        sizes: &BinSizeSet,
        mut counts: Vec<u32>,
        leftover: &LeftoverPolicy,
        scheme: PlanScheme,
    ) -> Result<Self> {
        let used: u32 = counts
            .iter()
            .zip(sizes.sizes())
            .map(|(&c, &b)| c * b)
            .sum();
        let mut remaining = fs - used;

        match leftover {
            LeftoverPolicy::GreedySmallest => loop {
                let pick = counts
                    .iter()
                    .zip(sizes.sizes())
                    .enumerate()
                    .filter(|(_, (_, &b))| b <= remaining)
                    .min_by_key(|(i, (&c, &b))| (c * b, *i));
                match pick {
                    Some((i, _)) => {
                        remaining -= sizes.sizes()[i];
                        counts[i] += 1;
                    }
                    None => break,
                }
            },
            LeftoverPolicy::ExtraBins(extra) => {
                if extra.len() != sizes.len() {
                    return Err(Error::Plan(format!(
                        "extra-bin vector has {} entries, expected {}",
                        extra.len(),
                        sizes.len()
                    )));
                }
                let extra_slots: u64 = extra
                    .iter()
                    .zip(sizes.sizes())
                    .map(|(&e, &b)| e as u64 * b as u64)
                    .sum();
                if extra_slots > remaining as u64 {
                    return Err(Error::Plan(format!(
                        "extra bins need {extra_slots} slots but only {remaining} are left"
                    )));
                }
                remaining -= extra_slots as u32;
                if remaining >= sizes.sizes()[0] {
                    return Err(Error::Plan(format!(
                        "extra-bin vector leaves {remaining} allocatable slots unassigned"
                    )));
                }
                for (c, &e) in counts.iter_mut().zip(extra) {
                    *c += e;
                }
            }
        }

        // Whatever is left cannot hold the smallest bin: dead slots.
        debug_assert!(remaining < sizes.sizes()[0]);

        let mut partitions = Vec::with_capacity(sizes.len());
        let mut cell_offsets = Vec::with_capacity(sizes.len() + 1);
        let mut slot = 1u32;
        let mut cells = 0usize;
        for (&count, &size) in counts.iter().zip(sizes.sizes()) {
            cell_offsets.push(cells);
            partitions.push(Partition {
                bin_size: size,
                bin_count: count,
                slot_start: slot,
            });
            slot += count * size;
            cells += count as usize;
        }
        cell_offsets.push(cells);

        Ok(Self {
            partitions,
            fs,
            dead_slots: remaining,
            scheme,
            cell_offsets,
        })
    }

    pub fn scheme(&self) -> PlanScheme {
        self.scheme
    }

    /// Number of partitions N.
    pub fn n(&self) -> u32 {
        self.partitions.len() as u32
    }

    pub fn fs(&self) -> u32 {
        self.fs
    }

    pub fn dead_slots(&self) -> u32 {
        self.dead_slots
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    /// Partition `pnum` (1-based).
    pub fn partition(&self, pnum: u32) -> &Partition {
        &self.partitions[pnum as usize - 1]
    }

    pub fn bin_size(&self, pnum: u32) -> u32 {
        self.partition(pnum).bin_size
    }

    pub fn bin_count(&self, pnum: u32) -> u32 {
        self.partition(pnum).bin_count
    }

    /// Total bins across all partitions; the flat cell space.
    pub fn total_bins(&self) -> usize {
        *self.cell_offsets.last().unwrap()
    }

    /// Flat cell index of bin `bnum` of partition `pnum` (both 1-based).
    pub fn cell_index(&self, pnum: u32, bnum: u32) -> usize {
        debug_assert!(bnum >= 1 && bnum <= self.bin_count(pnum));
        self.cell_offsets[pnum as usize - 1] + bnum as usize - 1
    }

    /// Flat cell range of a partition.
    pub fn cell_range(&self, pnum: u32) -> std::ops::Range<usize> {
        self.cell_offsets[pnum as usize - 1]..self.cell_offsets[pnum as usize]
    }

    /// Inclusive slot range `(first, last)` of partition `pnum`, extended to
    /// the end of the fiber for the last partition when dead slots exist.
    pub fn slot_range(&self, pnum: u32) -> (u32, u32) {
        let p = self.partition(pnum);
        let mut end = p.slot_start + p.slot_count() - 1;
        if pnum == self.n() {
            end += self.dead_slots;
        }
        (p.slot_start, end)
    }

    /// Inclusive slot range of one bin.
    pub fn bin_slot_range(&self, pnum: u32, bnum: u32) -> (u32, u32) {
        let p = self.partition(pnum);
        let start = p.slot_start + (bnum - 1) * p.bin_size;
        (start, start + p.bin_size - 1)
    }

    /// Largest partition index whose bin size is `<=` the given size, if any.
    pub fn last_fitting(&self, size: u32) -> Option<u32> {
        let mut found = None;
        for (i, p) in self.partitions.iter().enumerate() {
            if p.bin_size <= size {
                found = Some(i as u32 + 1);
            }
        }
        found
    }

    /// Smallest partition index whose bin size is `>=` the given size, if any.
    pub fn first_holding(&self, size: u32) -> Option<u32> {
        self.partitions
            .iter()
            .position(|p| p.bin_size >= size)
            .map(|i| i as u32 + 1)
    }

    /// Audit table: one line per partition plus a total line.
    pub fn report(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("scheme {}\n", self.scheme));
        out.push_str("j\tb_j\tNb_j\tFS_j\tslots\n");
        for (i, p) in self.partitions.iter().enumerate() {
            let (lo, hi) = self.slot_range(i as u32 + 1);
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}-{}\n",
                i + 1,
                p.bin_size,
                p.bin_count,
                p.slot_count(),
                lo,
                hi
            ));
        }
        if self.dead_slots > 0 {
            out.push_str(&format!("dead slots {}\n", self.dead_slots));
        }
        out.push_str(&format!("total {}\n", self.fs));
        out
    }
}

fn check_fs(fs: u32, sizes: &BinSizeSet) -> Result<()> {
    let max = *sizes.sizes().last().unwrap();
    if fs < max {
        return Err(Error::Plan(format!(
            "{fs} slots cannot hold the largest bin size {max}"
        )));
    }
    Ok(())
}
