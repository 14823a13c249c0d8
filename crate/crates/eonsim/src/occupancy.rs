//! Per-directed-link bin occupancy.
//!
//! Bins are addressed by `(pnum, bnum)` and flattened to one cell index per
//! plan; each link keeps a busy bitmask over cells plus the owning request
//! per busy cell. A request holds the same cell on every link of its path,
//! which is what makes the continuity constraint structural. Unoccupied-bin
//! queries intersect the free masks of a path's links on demand.

use crate::error::{Error, Result};
use crate::partition::PartitionPlan;

/// A bin address: partition number and bin number, both 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinRef {
    pub pnum: u32,
    pub bnum: u32,
}

impl std::fmt::Display for BinRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.pnum, self.bnum)
    }
}

const NO_OWNER: u32 = u32::MAX;

#[derive(Debug, Clone)]
struct Assignment {
    links: Box<[u32]>,
    bin: BinRef,
}

/// Free-cell view of one path: the AND of its links' free masks.
#[derive(Debug, Default, Clone)]
pub struct FreeMask {
    words: Vec<u64>,
}

/// Busy/owner state for every directed link under one partition plan.
#[derive(Debug, Clone)]
pub struct OccupancyStore {
    n_links: usize,
    total_cells: usize,
    words_per_link: usize,
    /// Cell offset of each partition, plus the total at the end.
    offsets: Vec<usize>,
    bin_sizes: Vec<u32>,
    /// Busy bitmask, `words_per_link` words per link.
    busy: Vec<u64>,
    /// Owning request per (link, cell); `NO_OWNER` when free.
    owners: Vec<u32>,
    /// Request id -> its path and bin, while active.
    assignments: Vec<Option<Assignment>>,
    /// Slots currently busy over all links, for utilization accounting.
    busy_slots: u64,
}

impl OccupancyStore {
    pub fn new(n_links: usize, plan: &PartitionPlan) -> Self {
        let total_cells = plan.total_bins();
        let words_per_link = total_cells.div_ceil(64).max(1);
        let mut offsets: Vec<usize> = (1..=plan.n()).map(|p| plan.cell_range(p).start).collect();
        offsets.push(total_cells);
        Self {
            n_links,
            total_cells,
            words_per_link,
            offsets,
            bin_sizes: plan.partitions().iter().map(|p| p.bin_size).collect(),
            busy: vec![0; n_links * words_per_link],
            owners: vec![NO_OWNER; n_links * total_cells],
            assignments: Vec::new(),
            busy_slots: 0,
        }
    }

    pub fn n_partitions(&self) -> u32 {
        self.bin_sizes.len() as u32
    }

    pub fn total_cells(&self) -> usize {
        self.total_cells
    }

    /// Slots busy right now, summed over all directed links.
    pub fn busy_slots(&self) -> u64 {
        self.busy_slots
    }

    pub fn is_empty(&self) -> bool {
        self.busy_slots == 0
    }

    fn cell(&self, bin: BinRef) -> usize {
        let lo = self.offsets[bin.pnum as usize - 1];
        let hi = self.offsets[bin.pnum as usize];
        let cell = lo + bin.bnum as usize - 1;
        debug_assert!(bin.bnum >= 1 && cell < hi, "bin {bin} out of range");
        cell
    }

    fn bin_of_cell(&self, cell: usize) -> BinRef {
        let pnum = self.offsets.partition_point(|&o| o <= cell) as u32;
        BinRef {
            pnum,
            bnum: (cell - self.offsets[pnum as usize - 1]) as u32 + 1,
        }
    }

    fn busy_words(&self, link: u32) -> &[u64] {
        let base = link as usize * self.words_per_link;
        &self.busy[base..base + self.words_per_link]
    }

    fn check_link(&self, link: u32) -> Result<()> {
        if (link as usize) < self.n_links {
            Ok(())
        } else {
            Err(Error::Occupancy(format!("unknown link {link}")))
        }
    }

    /// Fill `mask` with the cells free on every link of `path`.
    pub fn free_mask(&self, path: &[u32], mask: &mut FreeMask) -> Result<()> {
        if path.is_empty() {
            return Err(Error::Occupancy("empty path".into()));
        }
        mask.words.clear();
        mask.words.resize(self.words_per_link, !0u64);
        for &link in path {
            self.check_link(link)?;
            for (m, &b) in mask.words.iter_mut().zip(self.busy_words(link)) {
                *m &= !b;
            }
        }
        // Clear padding bits past the last cell.
        let tail = self.total_cells % 64;
        if tail != 0 {
            *mask.words.last_mut().unwrap() &= (1u64 << tail) - 1;
        }
        Ok(())
    }

    /// Unoccupied bin vector of a path: every cell free on all its links.
    pub fn ubv(&self, path: &[u32]) -> Result<Vec<BinRef>> {
        let mut mask = FreeMask::default();
        self.free_mask(path, &mut mask)?;
        let mut out = Vec::new();
        for pnum in 1..=self.n_partitions() {
            let mut bnum = self.first_free(&mask, pnum, 0);
            while let Some(b) = bnum {
                out.push(BinRef { pnum, bnum: b });
                bnum = self.first_free(&mask, pnum, b);
            }
        }
        Ok(out)
    }

    /// Free bins of partition `pnum` in the mask.
    pub fn free_count(&self, mask: &FreeMask, pnum: u32) -> u32 {
        let lo = self.offsets[pnum as usize - 1];
        let hi = self.offsets[pnum as usize];
        count_range(&mask.words, lo, hi)
    }

    /// Free slots summed over every partition in the mask.
    pub fn free_slots(&self, mask: &FreeMask) -> u64 {
        (1..=self.n_partitions())
            .map(|p| self.free_count(mask, p) as u64 * self.bin_sizes[p as usize - 1] as u64)
            .sum()
    }

    /// Least free bin number of partition `pnum` greater than `after`
    /// (0 = from the start), i.e. first-fit order.
    pub fn first_free(&self, mask: &FreeMask, pnum: u32, after: u32) -> Option<u32> {
        let lo = self.offsets[pnum as usize - 1];
        let hi = self.offsets[pnum as usize];
        let from = lo + after as usize;
        if from >= hi {
            return None;
        }
        first_set(&mask.words, from, hi).map(|cell| (cell - lo) as u32 + 1)
    }

    /// Mark `bin` busy for `req` on every link of `path`.
    pub fn occupy(&mut self, req: u32, path: &[u32], bin: BinRef) -> Result<()> {
        if self.assignment(req).is_some() {
            return Err(Error::Occupancy(format!("request {req} already holds a bin")));
        }
        let cell = self.cell(bin);
        for &link in path {
            self.check_link(link)?;
            if self.owners[link as usize * self.total_cells + cell] != NO_OWNER {
                return Err(Error::Occupancy(format!(
                    "occupy conflict: link {link} bin {bin} already owned by {}",
                    self.owners[link as usize * self.total_cells + cell]
                )));
            }
        }
        for &link in path {
            self.set_cell(link, cell, req);
        }
        self.busy_slots += self.bin_sizes[bin.pnum as usize - 1] as u64 * path.len() as u64;
        if self.assignments.len() <= req as usize {
            self.assignments.resize(req as usize + 1, None);
        }
        self.assignments[req as usize] = Some(Assignment {
            links: path.into(),
            bin,
        });
        Ok(())
    }

    /// Free every cell held by `req`.
    pub fn release(&mut self, req: u32) -> Result<()> {
        let a = self
            .assignments
            .get_mut(req as usize)
            .and_then(Option::take)
            .ok_or_else(|| Error::Occupancy(format!("unknown request {req}")))?;
        let cell = self.cell(a.bin);
        for &link in a.links.iter() {
            self.clear_cell(link, cell, req)?;
        }
        self.busy_slots -= self.bin_sizes[a.bin.pnum as usize - 1] as u64 * a.links.len() as u64;
        Ok(())
    }

    /// Swap `req` to `new_bin` on its fixed path. No intermediate state is
    /// observable.
    pub fn relocate(&mut self, req: u32, new_bin: BinRef) -> Result<()> {
        let a = self
            .assignments
            .get(req as usize)
            .and_then(Option::as_ref)
            .ok_or_else(|| Error::Occupancy(format!("unknown request {req}")))?;
        let links = a.links.clone();
        let old_bin = a.bin;
        let old_cell = self.cell(old_bin);
        let new_cell = self.cell(new_bin);
        for &link in links.iter() {
            let owner = self.owners[link as usize * self.total_cells + new_cell];
            if owner != NO_OWNER {
                return Err(Error::Occupancy(format!(
                    "relocate conflict: link {link} bin {new_bin} owned by {owner}"
                )));
            }
        }
        for &link in links.iter() {
            self.clear_cell(link, old_cell, req)?;
            self.set_cell(link, new_cell, req);
        }
        let old_size = self.bin_sizes[old_bin.pnum as usize - 1] as u64;
        let new_size = self.bin_sizes[new_bin.pnum as usize - 1] as u64;
        self.busy_slots = self.busy_slots + new_size * links.len() as u64 - old_size * links.len() as u64;
        self.assignments[req as usize].as_mut().unwrap().bin = new_bin;
        Ok(())
    }

    /// The bin currently held by `req`, if any.
    pub fn assignment(&self, req: u32) -> Option<BinRef> {
        self.assignments
            .get(req as usize)
            .and_then(Option::as_ref)
            .map(|a| a.bin)
    }

    fn set_cell(&mut self, link: u32, cell: usize, req: u32) {
        let base = link as usize * self.words_per_link;
        self.busy[base + cell / 64] |= 1u64 << (cell % 64);
        self.owners[link as usize * self.total_cells + cell] = req;
    }

    fn clear_cell(&mut self, link: u32, cell: usize, req: u32) -> Result<()> {
        let owner = &mut self.owners[link as usize * self.total_cells + cell];
        if *owner != req {
            return Err(Error::Occupancy(format!(
                "release mismatch on link {link}: cell owned by {owner}, not {req}"
            )));
        }
        *owner = NO_OWNER;
        let base = link as usize * self.words_per_link;
        self.busy[base + cell / 64] &= !(1u64 << (cell % 64));
        Ok(())
    }

    /// Busy cells per link, for debugging.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for link in 0..self.n_links as u32 {
            let mut cells = Vec::new();
            for cell in 0..self.total_cells {
                let owner = self.owners[link as usize * self.total_cells + cell];
                if owner != NO_OWNER {
                    cells.push(format!("{}={}", self.bin_of_cell(cell), owner));
                }
            }
            out.push_str(&format!("link {link}: {}\n", cells.join(" ")));
        }
        out
    }
}

fn count_range(words: &[u64], lo: usize, hi: usize) -> u32 {
    if lo >= hi {
        return 0;
    }
    let mut count = 0;
    for w in (lo / 64)..=((hi - 1) / 64) {
        let mut bits = words[w];
        if w == lo / 64 {
            bits &= !0u64 << (lo % 64);
        }
        if (w + 1) * 64 > hi {
            bits &= (1u64 << (hi % 64)) - 1;
        }
        count += bits.count_ones();
    }
    count
}

fn first_set(words: &[u64], lo: usize, hi: usize) -> Option<usize> {
    if lo >= hi {
        return None;
    }
    for w in (lo / 64)..=((hi - 1) / 64) {
        let mut bits = words[w];
        if w == lo / 64 {
            bits &= !0u64 << (lo % 64);
        }
        if bits != 0 {
            let cell = w * 64 + bits.trailing_zeros() as usize;
            return (cell < hi).then_some(cell);
        }
    }
    None
}
