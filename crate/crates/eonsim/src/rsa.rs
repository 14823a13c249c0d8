//! Admission: path selection and the initial spectrum assignment.
//!
//! Two routing policies are provided. Least-loaded routing scores a path by
//! its total free slots; profile-based routing counts only the free bins
//! whose partition falls inside the request's [min, max] window. The initial
//! assignment then grants the largest feasible bin on the chosen path,
//! scanning partitions from the profile maximum downward with first fit
//! inside a partition.

use crate::occupancy::{BinRef, FreeMask, OccupancyStore};
use crate::partition::PartitionPlan;
use crate::topology::Path;

/// A request's bandwidth profile and holding time. `p_min <= p_ave <= p_max`
/// are partition indices; the corresponding bin sizes are the requested
/// minimum, average, and maximum slot counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServiceProfile {
    pub src: u32,
    pub dst: u32,
    pub p_min: u32,
    pub p_ave: u32,
    pub p_max: u32,
    pub holding: f64,
}

impl ServiceProfile {
    pub fn validate(&self, n_partitions: u32) -> bool {
        1 <= self.p_min
            && self.p_min <= self.p_ave
            && self.p_ave <= self.p_max
            && self.p_max <= n_partitions
            && self.holding > 0.0
            && self.src != self.dst
    }
}

/// Why a request was turned away.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockStage {
    Routing,
    Assignment,
}

/// Outcome of admission for one request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AdmissionResult {
    Blocked(BlockStage),
    Admitted {
        /// Index into the route's path list.
        path_idx: usize,
        bin: BinRef,
        /// Bin size granted, in slots.
        assigned_size: u32,
    },
}

/// Least-loaded routing: maximize free slots over the whole spectrum.
/// Returns the winning path index, least index on ties; `None` when no path
/// has a single free bin.
pub fn route_llr(
    paths: &[Path],
    occ: &OccupancyStore,
    scratch: &mut FreeMask,
) -> Option<usize> {
    let mut best: Option<(u64, usize)> = None;
    for (idx, path) in paths.iter().enumerate() {
        occ.free_mask(&path.links, scratch).expect("known links");
        let sum = occ.free_slots(scratch);
        if best.map_or(true, |(b, _)| sum > b) {
            best = Some((sum, idx));
        }
    }
    match best {
        Some((sum, idx)) if sum > 0 => Some(idx),
        _ => None,
    }
}

/// Profile-based routing: maximize free bins with partition index inside the
/// request's [min, max] window. Ties go to the least path index.
pub fn route_pbr(
    profile: &ServiceProfile,
    paths: &[Path],
    occ: &OccupancyStore,
    scratch: &mut FreeMask,
) -> Option<usize> {
    let mut best: Option<(u64, usize)> = None;
    for (idx, path) in paths.iter().enumerate() {
        occ.free_mask(&path.links, scratch).expect("known links");
        let sum: u64 = (profile.p_min..=profile.p_max)
            .map(|p| occ.free_count(scratch, p) as u64)
            .sum();
        if best.map_or(true, |(b, _)| sum > b) {
            best = Some((sum, idx));
        }
    }
    match best {
        Some((sum, idx)) if sum > 0 => Some(idx),
        _ => None,
    }
}

/// Grant the largest feasible bin on the selected path and mark it busy, or
/// block. Scans partitions from `p_max` down to `p_min`; within a partition
/// the lowest-numbered free bin wins.
pub fn assign_initial(
    req: u32,
    profile: &ServiceProfile,
    path_idx: usize,
    path: &Path,
    plan: &PartitionPlan,
    occ: &mut OccupancyStore,
    scratch: &mut FreeMask,
) -> AdmissionResult {
    occ.free_mask(&path.links, scratch).expect("known links");
    for pnum in (profile.p_min..=profile.p_max).rev() {
        if let Some(bnum) = occ.first_free(scratch, pnum, 0) {
            let bin = BinRef { pnum, bnum };
            occ.occupy(req, &path.links, bin)
                .expect("bin was free on all links");
            return AdmissionResult::Admitted {
                path_idx,
                bin,
                assigned_size: plan.bin_size(pnum),
            };
        }
    }
    AdmissionResult::Blocked(BlockStage::Assignment)
}
