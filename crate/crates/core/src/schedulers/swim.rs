//! Swapping min-max consolidation.
//!
//! The grid starts from equal allocation. Frames are then consolidated in
//! order. Within frame `t` the flow with the smallest allocation (the giver)
//! hands its cell to the flow with the largest allocation (the receiver),
//! and takes the same amount back from the receiver in a later frame of the
//! receiver's current window, no later than the giver's own deadline. Frame
//! sums and per-window totals never change.
//!
//! Selection order inside a frame:
//!
//! * receiver: largest cell, then larger next-frame cell, then later window
//!   deadline, then lower id;
//! * giver: smallest cell, then earlier window deadline, then smaller
//!   next-frame cell, then lower id.
//!
//! A flow never gives from its own deadline frame, and a receiver's
//! deadline-frame cell is never drained below `min_burst_size`. With a
//! positive floor every window therefore finishes exactly at its deadline.
//!
//! Each flow takes at most one giver turn per frame and tries receivers in
//! order, so a frame costs at most `n * (n - 1)` giver/receiver pairings.

use std::cmp::Reverse;

use crate::admission::{Decision, LoadState};
use crate::amount::Amount;
use crate::dynamics::{self, JoinEvent, JoinOutcome, PreAllocation, PreAllocations};
use crate::error::{Error, Result};
use crate::model::{leave_frame, AllocationGrid, FlowId, FlowSpec, LeaveEvent, SduWindow};

use super::{check_capacity, eqa_schedule, settle, sorted, write_equal_windows, SchedulerConfig};

/// Move `amount` of `giver`'s allocation in `frame` to `receiver`, and the
/// same amount of `receiver`'s allocation in `payback_frame` to `giver`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SwapMove {
    pub frame: usize,
    pub giver: FlowId,
    pub receiver: FlowId,
    pub payback_frame: usize,
    pub amount: Amount,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SwimStats {
    pub swaps: usize,
    pub pairings: usize,
    pub max_pairings_per_frame: usize,
    pub frames: usize,
}

/// SWIM starts from the equal-allocation grid.
pub fn swim_init(flows: &[FlowSpec], config: &SchedulerConfig) -> Result<AllocationGrid> {
    eqa_schedule(flows, config)
}

pub fn swim_schedule(flows: &[FlowSpec], config: &SchedulerConfig) -> Result<AllocationGrid> {
    Ok(SwimEngine::new(flows, &[], config)?.run()?.grid)
}

fn window(f: &FlowSpec, t: usize, horizon: usize) -> Option<SduWindow> {
    f.window_at(t, horizon).filter(|w| t <= w.end_frame)
}

fn next_cell(grid: &AllocationGrid, t: usize, c: usize) -> Amount {
    if t + 1 < grid.horizon() {
        grid.at(t + 1, c)
    } else {
        Amount::ZERO
    }
}

fn can_give(grid: &AllocationGrid, f: &FlowSpec, c: usize, t: usize) -> bool {
    !grid.at(t, c).is_zero()
        && t + 1 < grid.horizon()
        && window(f, t, grid.horizon()).is_some_and(|w| t < w.deadline_frame)
}

/// What `r` could hand back from frames after `t`, up to `limit`.
fn surrender(grid: &AllocationGrid, r: &FlowSpec, c: usize, t: usize, limit: usize, min_burst: Amount) -> Amount {
    let Some(w) = window(r, t, grid.horizon()) else {
        return Amount::ZERO;
    };
    let last = limit.min(w.deadline_frame).min(grid.horizon() - 1);
    ((t + 1)..=last)
        .map(|tp| payback_room(grid.at(tp, c), tp == w.deadline_frame, min_burst))
        .sum()
}

fn payback_room(cell: Amount, deadline_frame: bool, min_burst: Amount) -> Amount {
    if deadline_frame {
        cell.saturating_sub(min_burst)
    } else {
        cell
    }
}

type ReceiverKey = (Reverse<Amount>, Reverse<Amount>, Reverse<usize>, FlowId);
type GiverKey = (Amount, usize, Amount, FlowId);

fn receiver_key(grid: &AllocationGrid, f: &FlowSpec, c: usize, t: usize) -> ReceiverKey {
    let deadline = window(f, t, grid.horizon()).map_or(0, |w| w.deadline_frame);
    (Reverse(grid.at(t, c)), Reverse(next_cell(grid, t, c)), Reverse(deadline), f.id)
}

fn giver_key(grid: &AllocationGrid, f: &FlowSpec, c: usize, t: usize) -> GiverKey {
    let deadline = window(f, t, grid.horizon()).map_or(usize::MAX, |w| w.deadline_frame);
    (grid.at(t, c), deadline, next_cell(grid, t, c), f.id)
}

fn columns<'a>(grid: &'a AllocationGrid, flows: &'a [FlowSpec]) -> impl Iterator<Item = (&'a FlowSpec, usize)> + 'a {
    flows.iter().filter_map(move |f| grid.column(f.id).map(|c| (f, c)))
}

/// The max-res flow of frame `t`: the largest positive cell among flows that
/// still hold something later in their window to pay back with.
pub fn select_receiver(grid: &AllocationGrid, t: usize, flows: &[FlowSpec], min_burst: Amount) -> Option<FlowId> {
    if t >= grid.horizon() {
        return None;
    }
    columns(grid, flows)
        .filter(|&(f, c)| !grid.at(t, c).is_zero() && !surrender(grid, f, c, t, usize::MAX, min_burst).is_zero())
        .min_by_key(|&(f, c)| receiver_key(grid, f, c, t))
        .map(|(f, _)| f.id)
}

/// The min-res flow of frame `t`, excluding `receiver` and flows in their
/// deadline frame. `None` when the frame has fewer than two bursts.
pub fn select_giver(grid: &AllocationGrid, t: usize, flows: &[FlowSpec], receiver: Option<FlowId>) -> Option<FlowId> {
    if t >= grid.horizon() || grid.bursts_in_frame(t) < 2 {
        return None;
    }
    columns(grid, flows)
        .filter(|&(f, c)| Some(f.id) != receiver && can_give(grid, f, c, t))
        .min_by_key(|&(f, c)| giver_key(grid, f, c, t))
        .map(|(f, _)| f.id)
}

/// Apply one swap after checking every precondition. A zero amount is a
/// no-op.
pub fn apply_swap(grid: &mut AllocationGrid, flows: &[FlowSpec], m: &SwapMove, min_burst: Amount) -> Result<()> {
    let reject = |reason: &'static str| {
        Err(Error::InvalidSwap {
            frame: m.frame,
            giver: m.giver,
            receiver: m.receiver,
            reason,
        })
    };
    if m.amount.is_zero() {
        return Ok(());
    }
    if m.giver == m.receiver {
        return reject("giver and receiver are the same flow");
    }
    if !(m.frame < m.payback_frame && m.payback_frame < grid.horizon()) {
        return reject("payback frame must follow the swap frame inside the horizon");
    }
    let find = |id: FlowId| flows.iter().find(|f| f.id == id).zip(grid.column(id));
    let (Some((gf, gc)), Some((rf, rc))) = (find(m.giver), find(m.receiver)) else {
        return reject("unknown flow");
    };
    let horizon = grid.horizon();
    if grid.at(m.frame, gc) < m.amount {
        return reject("giver holds less than the swap amount");
    }
    if grid.at(m.payback_frame, rc) < m.amount {
        return reject("receiver holds less than the swap amount in the payback frame");
    }
    match window(gf, m.frame, horizon) {
        Some(w) if m.payback_frame <= w.deadline_frame => {}
        _ => return reject("payback frame is past the giver's deadline"),
    }
    let rw = match window(rf, m.frame, horizon) {
        Some(w) if m.payback_frame <= w.deadline_frame => w,
        _ => return reject("payback frame is outside the receiver's current window"),
    };
    if m.payback_frame == rw.deadline_frame && grid.at(m.payback_frame, rc) - m.amount < min_burst {
        return reject("receiver's deadline-frame burst would drop below the minimum");
    }
    *grid.at_mut(m.frame, gc) -= m.amount;
    *grid.at_mut(m.frame, rc) += m.amount;
    *grid.at_mut(m.payback_frame, gc) += m.amount;
    *grid.at_mut(m.payback_frame, rc) -= m.amount;
    Ok(())
}

/// Result of a full SWIM run.
#[derive(Debug, Clone)]
pub struct SwimRun {
    pub grid: AllocationGrid,
    pub stats: SwimStats,
    /// Every applied swap, in order, when logging was enabled.
    pub swap_log: Option<Vec<SwapMove>>,
    pub rejected: Vec<(FlowId, Decision)>,
}

/// Frame-by-frame SWIM state: the grid, the admission ledger and the record
/// of cells moved by earlier swaps.
#[derive(Debug, Clone)]
pub struct SwimEngine {
    flows: Vec<FlowSpec>,
    leave: Vec<usize>,
    joined: Vec<bool>,
    grid: AllocationGrid,
    min_burst: Amount,
    pre: PreAllocations,
    load: LoadState,
    next_frame: usize,
    stats: SwimStats,
    log: Option<Vec<SwapMove>>,
    rejected: Vec<(FlowId, Decision)>,
}

impl SwimEngine {
    /// Flows joining at frame 0 are initialized immediately; later joins are
    /// applied when their frame is reached.
    pub fn new(flows: &[FlowSpec], leaves: &[LeaveEvent], config: &SchedulerConfig) -> Result<Self> {
        config.validate(flows)?;
        let flows = sorted(flows);
        let horizon = config.horizon;
        let mut grid = AllocationGrid::for_flows(config.capacity, horizon, &flows);
        let mut load = LoadState::new(config.capacity);
        let leave: Vec<usize> = flows.iter().map(|f| leave_frame(leaves, f.id)).collect();
        let mut joined = vec![false; flows.len()];
        let mut spreads = Vec::new();
        for (c, f) in flows.iter().enumerate() {
            if f.join_frame == 0 {
                // Initial flows are admitted by the caller; the ledger only
                // tracks their load for later joins.
                let _ = load.admit(f);
                spreads.extend(write_equal_windows(&mut grid, f, 0, leave[c]));
                joined[c] = true;
            }
        }
        settle(&mut grid, &spreads);
        check_capacity(&grid)?;
        Ok(SwimEngine {
            pre: PreAllocations::new(horizon, flows.len()),
            flows,
            leave,
            joined,
            grid,
            min_burst: config.min_burst_size,
            load,
            next_frame: 0,
            stats: SwimStats::default(),
            log: None,
            rejected: Vec::new(),
        })
    }

    pub fn with_swap_log(mut self) -> Self {
        self.log = Some(Vec::new());
        self
    }

    pub fn grid(&self) -> &AllocationGrid {
        &self.grid
    }

    pub fn flows(&self) -> &[FlowSpec] {
        &self.flows
    }

    pub fn load(&self) -> &LoadState {
        &self.load
    }

    pub fn stats(&self) -> SwimStats {
        self.stats
    }

    /// Cells at or after `from` that earlier swaps moved away from their
    /// initial value.
    pub fn pre_allocations(&self, from: usize) -> Vec<PreAllocation> {
        self.pre.list(&self.grid, from)
    }

    /// Process events and consolidate every frame before `t`.
    pub fn advance_to(&mut self, t: usize) -> Result<()> {
        let t = t.min(self.grid.horizon());
        while self.next_frame < t {
            let f = self.next_frame;
            self.process_events(f)?;
            self.consolidate_frame(f)?;
            self.next_frame += 1;
        }
        Ok(())
    }

    pub fn run(mut self) -> Result<SwimRun> {
        self.advance_to(self.grid.horizon())?;
        Ok(SwimRun {
            grid: self.grid,
            stats: self.stats,
            swap_log: self.log,
            rejected: self.rejected,
        })
    }

    /// Apply the leaves, then the joins, scheduled for frame `t`.
    pub fn process_events(&mut self, t: usize) -> Result<()> {
        for c in 0..self.flows.len() {
            if self.leave[c] == t && self.joined[c] {
                let id = self.flows[c].id;
                dynamics::apply_leave(&mut self.grid, id, t)?;
                self.load.release(id);
            }
        }
        if t == 0 {
            return Ok(());
        }
        for c in 0..self.flows.len() {
            let f = &self.flows[c];
            if f.join_frame == t && !self.joined[c] && t < self.leave[c] {
                let event = JoinEvent {
                    flow: f.clone(),
                    at_frame: t,
                };
                let active: Vec<FlowSpec> = (0..self.flows.len())
                    .filter(|&o| self.joined[o] && t < self.leave[o])
                    .map(|o| self.flows[o].clone())
                    .collect();
                match dynamics::apply_join(&mut self.grid, &active, &self.pre, &event, &mut self.load, self.leave[c])? {
                    JoinOutcome::Accepted => self.joined[c] = true,
                    JoinOutcome::Rejected(d) => {
                        log::warn!("flow {} rejected at frame {t}", event.flow.id);
                        self.rejected.push((event.flow.id, d));
                    }
                }
            }
        }
        Ok(())
    }

    /// Consolidate frame `t`. Frames before `t` are assumed final.
    pub fn consolidate_frame(&mut self, t: usize) -> Result<()> {
        let n = self.flows.len();
        let mut took_turn = vec![false; n];
        let mut pairings = 0;
        while self.grid.bursts_in_frame(t) > 1 {
            let grid = &self.grid;
            let giver = (0..n)
                .filter(|&c| !took_turn[c] && can_give(grid, &self.flows[c], c, t))
                .min_by_key(|&c| giver_key(grid, &self.flows[c], c, t));
            let Some(g) = giver else { break };
            took_turn[g] = true;

            let g_cell = grid.at(t, g);
            let g_deadline = window(&self.flows[g], t, grid.horizon())
                .expect("giver has a window")
                .deadline_frame;
            let mut receivers: Vec<usize> = (0..n)
                .filter(|&r| r != g && !grid.at(t, r).is_zero() && grid.at(t, r) >= g_cell)
                .collect();
            receivers.sort_by_key(|&r| receiver_key(grid, &self.flows[r], r, t));

            for r in receivers {
                pairings += 1;
                self.transfer(g, r, t, g_deadline)?;
                if self.grid.at(t, g).is_zero() {
                    break;
                }
            }
        }
        self.stats.frames += 1;
        self.stats.pairings += pairings;
        self.stats.max_pairings_per_frame = self.stats.max_pairings_per_frame.max(pairings);
        Ok(())
    }

    /// Move as much of `g`'s cell at `t` to `r` as `r` can pay back,
    /// earliest payback frame first.
    fn transfer(&mut self, g: usize, r: usize, t: usize, g_deadline: usize) -> Result<Amount> {
        let horizon = self.grid.horizon();
        let Some(rw) = window(&self.flows[r], t, horizon) else {
            return Ok(Amount::ZERO);
        };
        let last = g_deadline.min(rw.deadline_frame).min(horizon - 1);
        let mut moved = Amount::ZERO;
        for tp in (t + 1)..=last {
            let want = self.grid.at(t, g);
            if want.is_zero() {
                break;
            }
            let room = payback_room(self.grid.at(tp, r), tp == rw.deadline_frame, self.min_burst);
            let x = want.min(room);
            if x.is_zero() {
                continue;
            }
            let m = SwapMove {
                frame: t,
                giver: self.flows[g].id,
                receiver: self.flows[r].id,
                payback_frame: tp,
                amount: x,
            };
            apply_swap(&mut self.grid, &self.flows, &m, self.min_burst)?;
            self.pre.mark(tp, g);
            self.pre.mark(tp, r);
            if let Some(log) = self.log.as_mut() {
                log.push(m);
            }
            self.stats.swaps += 1;
            moved += x;
        }
        Ok(moved)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedulers::Algorithm;

    fn example_one() -> Vec<FlowSpec> {
        vec![
            FlowSpec::units(1, 540, 3),
            FlowSpec::units(2, 80, 4),
            FlowSpec::units(3, 900, 6),
            FlowSpec::units(4, 120, 6),
            FlowSpec::units(5, 600, 12),
        ]
    }

    fn cfg(horizon: usize) -> SchedulerConfig {
        SchedulerConfig::new(Algorithm::Swim, Amount::from_units(420), horizon)
    }

    fn units(g: &AllocationGrid, t: usize) -> Vec<u64> {
        g.row(t).iter().map(|a| a.hundredths() / 100).collect()
    }

    fn u(x: u64) -> Amount {
        Amount::from_units(x)
    }

    #[test]
    fn first_selections_on_equal_grid() {
        let flows = example_one();
        let g = swim_init(&flows, &cfg(12)).unwrap();
        assert_eq!(select_receiver(&g, 0, &flows, u(1)), Some(FlowId(1)));
        // C2 and C4 both hold 20; C2's deadline (frame 3) comes first.
        assert_eq!(select_giver(&g, 0, &flows, Some(FlowId(1))), Some(FlowId(2)));
    }

    #[test]
    fn giver_after_first_is_eliminated() {
        let flows = example_one();
        let mut g = swim_init(&flows, &cfg(12)).unwrap();
        let m = SwapMove {
            frame: 0,
            giver: FlowId(2),
            receiver: FlowId(1),
            payback_frame: 1,
            amount: u(20),
        };
        apply_swap(&mut g, &flows, &m, u(1)).unwrap();
        assert_eq!(units(&g, 0), vec![200, 0, 150, 20, 50]);
        assert_eq!(units(&g, 1), vec![160, 40, 150, 20, 50]);
        assert_eq!(select_giver(&g, 0, &flows, Some(FlowId(1))), Some(FlowId(4)));
    }

    #[test]
    fn zero_swap_is_identity() {
        let flows = example_one();
        let mut g = swim_init(&flows, &cfg(12)).unwrap();
        let before = g.clone();
        let m = SwapMove {
            frame: 0,
            giver: FlowId(2),
            receiver: FlowId(1),
            payback_frame: 1,
            amount: Amount::ZERO,
        };
        apply_swap(&mut g, &flows, &m, u(1)).unwrap();
        assert_eq!(g, before);
    }

    #[test]
    fn swap_preconditions() {
        let flows = example_one();
        let g0 = swim_init(&flows, &cfg(12)).unwrap();
        let base = SwapMove {
            frame: 0,
            giver: FlowId(2),
            receiver: FlowId(1),
            payback_frame: 1,
            amount: u(20),
        };
        let cases = [
            SwapMove { amount: u(21), ..base },
            SwapMove { payback_frame: 0, ..base },
            SwapMove { receiver: FlowId(2), ..base },
            // C1's window 0..=2 ends before frame 3.
            SwapMove { payback_frame: 3, ..base },
            // C2's deadline is frame 3.
            SwapMove { giver: FlowId(2), receiver: FlowId(5), payback_frame: 4, ..base },
            SwapMove { giver: FlowId(9), ..base },
        ];
        for m in cases {
            let mut g = g0.clone();
            assert!(matches!(apply_swap(&mut g, &flows, &m, u(1)), Err(Error::InvalidSwap { .. })), "{m:?}");
            assert_eq!(g, g0);
        }
        // C1's deadline-frame cell may not drop below the floor.
        let mut g1 = g0.clone();
        g1.set(2, FlowId(1), u(80)).unwrap();
        let drain = SwapMove { giver: FlowId(3), payback_frame: 2, amount: u(80), ..base };
        let mut g = g1.clone();
        assert!(matches!(apply_swap(&mut g, &flows, &drain, u(1)), Err(Error::InvalidSwap { .. })));
        assert_eq!(g, g1);
        let ok = SwapMove { amount: u(79), ..drain };
        apply_swap(&mut g, &flows, &ok, u(1)).unwrap();
        assert_eq!(g.get(2, FlowId(1)), u(1));
    }

    #[test]
    fn opening_trace_matches_worked_steps() {
        let flows = example_one();
        let mut engine = SwimEngine::new(&flows, &[], &cfg(12)).unwrap().with_swap_log();
        engine.consolidate_frame(0).unwrap();
        let log = engine.log.clone().unwrap();
        let summary: Vec<_> = log.iter().map(|m| (m.giver.0, m.receiver.0, m.payback_frame, m.amount.hundredths() / 100)).collect();
        assert_eq!(summary, vec![(2, 1, 1, 20), (4, 1, 1, 20), (5, 1, 1, 50), (3, 1, 1, 90), (3, 1, 2, 60)]);
        let g = engine.grid();
        assert_eq!(units(g, 0), vec![420, 0, 0, 0, 0]);
        assert_eq!(units(g, 1), vec![0, 40, 240, 40, 100]);
        assert_eq!(units(g, 2), vec![120, 20, 210, 20, 50]);
        assert_eq!(select_receiver(g, 1, &flows, u(1)), Some(FlowId(3)));
    }

    #[test]
    fn single_flow_is_untouched() {
        let flows = vec![FlowSpec::units(1, 90, 3)];
        let c = SchedulerConfig::new(Algorithm::Swim, u(100), 9);
        assert_eq!(swim_schedule(&flows, &c).unwrap(), swim_init(&flows, &c).unwrap());
    }

    #[test]
    fn receiver_ties_use_next_frame_then_deadline() {
        let flows = vec![FlowSpec::units(1, 30, 3), FlowSpec::units(2, 30, 3), FlowSpec::units(3, 60, 6)];
        let c = SchedulerConfig::new(Algorithm::Swim, u(100), 6);
        let mut g = swim_init(&flows, &c).unwrap();
        // All three hold 10 in frame 0.
        assert_eq!(select_receiver(&g, 0, &flows, u(1)), Some(FlowId(3)));
        g.set(1, FlowId(2), u(15)).unwrap();
        assert_eq!(select_receiver(&g, 0, &flows, u(1)), Some(FlowId(2)));
    }

    #[test]
    fn giver_ties_fall_back_to_lower_id() {
        let mut flows = vec![FlowSpec::units(7, 30, 3), FlowSpec::units(4, 30, 3), FlowSpec::units(1, 300, 3)];
        let c = SchedulerConfig::new(Algorithm::Swim, u(200), 3);
        let g = swim_init(&flows, &c).unwrap();
        let first = select_giver(&g, 0, &flows, None);
        assert_eq!(first, Some(FlowId(4)));
        flows.reverse();
        assert_eq!(select_giver(&g, 0, &flows, None), first);
    }
}
