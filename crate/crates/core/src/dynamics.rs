//! Flows joining and leaving during a run.
//!
//! When a flow joins at frame `t`, each existing flow's window that is
//! already under way keeps its history and every cell earlier swaps moved
//! (its pre-allocations). Whatever the window still needs is spread evenly
//! over its remaining frames that hold no pre-allocation. The new flow
//! starts its first window at `t` with equal shares.

use crate::admission::{Decision, LoadState};
use crate::amount::Amount;
use crate::error::{Error, Result};
use crate::model::{AllocationGrid, FlowId, FlowSpec};
use crate::schedulers::{settle, spread, write_equal_windows};

pub use crate::model::LeaveEvent;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinEvent {
    pub flow: FlowSpec,
    pub at_frame: usize,
}

impl JoinEvent {
    pub fn new(flow: FlowSpec) -> Self {
        JoinEvent {
            at_frame: flow.join_frame,
            flow,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JoinOutcome {
    Accepted,
    Rejected(Decision),
}

/// A future cell that an earlier swap moved away from its initial value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PreAllocation {
    pub flow_id: FlowId,
    pub frame: usize,
    pub amount: Amount,
}

/// Which grid cells hold pre-allocations. Same shape as the grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreAllocations {
    flows: usize,
    marked: Vec<bool>,
}

impl PreAllocations {
    pub fn new(horizon: usize, flows: usize) -> Self {
        PreAllocations {
            flows,
            marked: vec![false; horizon * flows],
        }
    }

    pub fn mark(&mut self, t: usize, col: usize) {
        self.marked[t * self.flows + col] = true;
    }

    pub fn is_marked(&self, t: usize, col: usize) -> bool {
        self.marked.get(t * self.flows + col).copied().unwrap_or(false)
    }

    pub fn list(&self, grid: &AllocationGrid, from: usize) -> Vec<PreAllocation> {
        let mut out = Vec::new();
        for t in from..grid.horizon() {
            for (c, &id) in grid.flow_ids().iter().enumerate() {
                if self.is_marked(t, c) {
                    out.push(PreAllocation {
                        flow_id: id,
                        frame: t,
                        amount: grid.at(t, c),
                    });
                }
            }
        }
        out
    }
}

/// Admit `e.flow` at `e.at_frame` and re-initialize the grid from that
/// frame on. `active` lists the flows already being served. On rejection
/// the grid is left untouched.
///
/// The new flow must already have a column in `grid`; its cells from
/// `until` on are left empty.
pub fn apply_join(
    grid: &mut AllocationGrid,
    active: &[FlowSpec],
    pre: &PreAllocations,
    e: &JoinEvent,
    load: &mut LoadState,
    until: usize,
) -> Result<JoinOutcome> {
    e.flow.validate()?;
    if e.at_frame != e.flow.join_frame {
        return Err(Error::InvalidScenario(format!(
            "join event for flow {} at frame {} but the flow joins at {}",
            e.flow.id, e.at_frame, e.flow.join_frame
        )));
    }
    if e.at_frame >= grid.horizon() {
        return Err(Error::FrameOutOfRange {
            frame: e.at_frame,
            horizon: grid.horizon(),
        });
    }
    if grid.column(e.flow.id).is_none() {
        return Err(Error::UnknownFlow(e.flow.id));
    }
    if let d @ Decision::Rejected { .. } = load.admit(&e.flow) {
        return Ok(JoinOutcome::Rejected(d));
    }

    let t = e.at_frame;
    let horizon = grid.horizon();
    let mut spreads = Vec::new();
    for f in active.iter().filter(|f| f.id != e.flow.id) {
        let Some(c) = grid.column(f.id) else { continue };
        let Some(w) = f.window_at(t, horizon) else { continue };
        if w.arrival_frame == t || t > w.deadline_frame {
            continue;
        }
        let before: Amount = (w.arrival_frame..t).map(|s| grid.at(s, c)).sum();
        let kept: Amount = (t..=w.deadline_frame)
            .filter(|&s| s < horizon && pre.is_marked(s, c))
            .map(|s| grid.at(s, c))
            .sum();
        let free: Vec<usize> = (t..=w.deadline_frame)
            .filter(|&s| s >= horizon || !pre.is_marked(s, c))
            .collect();
        let remaining = w.demand.checked_sub(before + kept).ok_or_else(|| {
            Error::InvalidScenario(format!(
                "flow {} window at frame {} is over-allocated before the join at frame {t}",
                f.id, w.arrival_frame
            ))
        })?;
        if free.is_empty() {
            if !remaining.is_zero() {
                return Err(Error::InvalidScenario(format!(
                    "flow {} needs {remaining} after frame {t} but every remaining frame is pre-allocated",
                    f.id
                )));
            }
            continue;
        }
        spreads.push(spread(grid, c, remaining, &free, usize::MAX));
    }

    spreads.extend(write_equal_windows(grid, &e.flow, t, until));
    settle(grid, &spreads);

    for s in t..horizon {
        let sum = grid.frame_sum(s)?;
        if sum > grid.capacity() {
            return Err(Error::Infeasible {
                frame: s,
                demand: sum.to_string(),
                capacity: grid.capacity().to_string(),
            });
        }
    }
    Ok(JoinOutcome::Accepted)
}

/// Zero `flow_id`'s cells from `at_frame` on. The freed amount is returned
/// and left unallocated.
pub fn apply_leave(grid: &mut AllocationGrid, flow_id: FlowId, at_frame: usize) -> Result<Amount> {
    let c = grid.column(flow_id).ok_or(Error::UnknownFlow(flow_id))?;
    let mut freed = Amount::ZERO;
    for t in at_frame..grid.horizon() {
        freed += std::mem::take(grid.at_mut(t, c));
    }
    Ok(freed)
}
