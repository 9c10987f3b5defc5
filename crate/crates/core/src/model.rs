//! Flows, periodic SDU windows, the allocation grid and the LCM cycle.

use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;

use crate::amount::Amount;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FlowId(pub u32);

impl fmt::Display for FlowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A UGS connection: `data_size` every `period` frames, due within
/// `deadline` frames of each period start.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowSpec {
    pub id: FlowId,
    pub data_size: Amount,
    pub period: usize,
    pub deadline: usize,
    pub join_frame: usize,
}

impl FlowSpec {
    /// Deadline equal to the period, joining at frame 0.
    pub fn new(id: u32, data_size: Amount, period: usize) -> Self {
        FlowSpec {
            id: FlowId(id),
            data_size,
            period,
            deadline: period,
            join_frame: 0,
        }
    }

    pub fn units(id: u32, data_size: u64, period: usize) -> Self {
        Self::new(id, Amount::from_units(data_size), period)
    }

    pub fn with_deadline(mut self, deadline: usize) -> Self {
        self.deadline = deadline;
        self
    }

    pub fn joining_at(mut self, frame: usize) -> Self {
        self.join_frame = frame;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: &str| {
            Err(Error::InvalidFlow {
                flow: self.id,
                reason: reason.to_string(),
            })
        };
        if self.data_size.is_zero() {
            return fail("data size must be positive");
        }
        if self.period == 0 {
            return fail("period must be at least one frame");
        }
        if self.deadline == 0 || self.deadline > self.period {
            return fail("deadline must satisfy 1 <= deadline <= period");
        }
        Ok(())
    }

    /// The window containing frame `t`, if the flow has joined by then.
    pub fn window_at(&self, t: usize, horizon: usize) -> Option<SduWindow> {
        if t < self.join_frame {
            return None;
        }
        let k = (t - self.join_frame) / self.period;
        Some(self.window(k, horizon))
    }

    fn window(&self, k: usize, horizon: usize) -> SduWindow {
        let arrival = self.join_frame + k * self.period;
        SduWindow {
            flow_id: self.id,
            arrival_frame: arrival,
            deadline_frame: arrival + self.deadline - 1,
            end_frame: arrival + self.period - 1,
            demand: self.data_size,
            complete: arrival + self.period <= horizon,
        }
    }
}

/// One periodic demand instance of a flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SduWindow {
    pub flow_id: FlowId,
    pub arrival_frame: usize,
    /// Last frame at which the SDU may still be served.
    pub deadline_frame: usize,
    /// Last frame of the period; the next window arrives at `end_frame + 1`.
    pub end_frame: usize,
    pub demand: Amount,
    /// The whole period lies inside the horizon.
    pub complete: bool,
}

impl SduWindow {
    pub fn contains(&self, t: usize) -> bool {
        self.arrival_frame <= t && t <= self.end_frame
    }

    /// Frames from arrival to deadline, clipped to the horizon.
    pub fn service_frames(&self, horizon: usize) -> std::ops::Range<usize> {
        self.arrival_frame..(self.deadline_frame + 1).min(horizon)
    }
}

/// Every window of `flow` that arrives before `horizon`, in order. Windows
/// running past the horizon are included with `complete == false`.
pub fn windows_of(flow: &FlowSpec, horizon: usize) -> Vec<SduWindow> {
    if flow.period == 0 || flow.join_frame >= horizon {
        return Vec::new();
    }
    let count = (horizon - flow.join_frame).div_ceil(flow.period);
    (0..count).map(|k| flow.window(k, horizon)).collect()
}

/// Least common multiple of all periods: the length of one schedule cycle.
pub fn lcm_cycle(flows: &[FlowSpec]) -> Result<usize> {
    if flows.is_empty() {
        return Err(Error::InvalidScenario("empty flow list".into()));
    }
    flows.iter().try_fold(1usize, |acc, f| {
        if f.period == 0 {
            return Err(Error::InvalidFlow {
                flow: f.id,
                reason: "period must be at least one frame".into(),
            });
        }
        let g = acc.gcd(&f.period);
        (acc / g)
            .checked_mul(f.period)
            .ok_or_else(|| Error::InvalidScenario("LCM cycle overflows".into()))
    })
}

/// Checks per-flow validity and id uniqueness.
pub fn validate_flows(flows: &[FlowSpec]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for f in flows {
        f.validate()?;
        if !seen.insert(f.id) {
            return Err(Error::DuplicateFlow(f.id));
        }
    }
    Ok(())
}

/// A flow stops being served from `at_frame` on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LeaveEvent {
    pub flow_id: FlowId,
    pub at_frame: usize,
}

/// Frames × flows matrix of allocations. Columns are ordered by flow id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllocationGrid {
    capacity: Amount,
    horizon: usize,
    flow_ids: Vec<FlowId>,
    cells: Vec<Amount>,
}

impl AllocationGrid {
    pub fn new(capacity: Amount, horizon: usize, mut flow_ids: Vec<FlowId>) -> Self {
        flow_ids.sort();
        flow_ids.dedup();
        let cells = vec![Amount::ZERO; horizon * flow_ids.len()];
        AllocationGrid {
            capacity,
            horizon,
            flow_ids,
            cells,
        }
    }

    pub fn for_flows(capacity: Amount, horizon: usize, flows: &[FlowSpec]) -> Self {
        Self::new(capacity, horizon, flows.iter().map(|f| f.id).collect())
    }

    pub fn capacity(&self) -> Amount {
        self.capacity
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn flow_ids(&self) -> &[FlowId] {
        &self.flow_ids
    }

    pub fn column(&self, id: FlowId) -> Option<usize> {
        self.flow_ids.binary_search(&id).ok()
    }

    fn idx(&self, t: usize, col: usize) -> usize {
        debug_assert!(t < self.horizon && col < self.flow_ids.len());
        t * self.flow_ids.len() + col
    }

    /// Cell by column index. Panics when out of range.
    pub fn at(&self, t: usize, col: usize) -> Amount {
        self.cells[self.idx(t, col)]
    }

    pub fn at_mut(&mut self, t: usize, col: usize) -> &mut Amount {
        let i = self.idx(t, col);
        &mut self.cells[i]
    }

    /// Cell by flow id; zero for frames past the horizon or unknown flows.
    pub fn get(&self, t: usize, id: FlowId) -> Amount {
        match self.column(id) {
            Some(c) if t < self.horizon => self.at(t, c),
            _ => Amount::ZERO,
        }
    }

    pub fn set(&mut self, t: usize, id: FlowId, value: Amount) -> Result<()> {
        self.check_frame(t)?;
        let c = self.column(id).ok_or(Error::UnknownFlow(id))?;
        *self.at_mut(t, c) = value;
        Ok(())
    }

    pub fn row(&self, t: usize) -> &[Amount] {
        let n = self.flow_ids.len();
        &self.cells[t * n..(t + 1) * n]
    }

    fn check_frame(&self, t: usize) -> Result<()> {
        if t >= self.horizon {
            return Err(Error::FrameOutOfRange {
                frame: t,
                horizon: self.horizon,
            });
        }
        Ok(())
    }

    pub fn frame_sum(&self, t: usize) -> Result<Amount> {
        self.check_frame(t)?;
        Ok(self.row(t).iter().sum())
    }

    /// Allocation to the window's flow over the window's frames inside the
    /// horizon.
    pub fn window_sum(&self, w: &SduWindow) -> Result<Amount> {
        self.check_frame(w.arrival_frame)?;
        let c = self.column(w.flow_id).ok_or(Error::UnknownFlow(w.flow_id))?;
        let end = (w.end_frame + 1).min(self.horizon);
        Ok((w.arrival_frame..end).map(|t| self.at(t, c)).sum())
    }

    /// Number of flows with a positive allocation in frame `t`.
    pub fn bursts_in_frame(&self, t: usize) -> usize {
        self.row(t).iter().filter(|a| !a.is_zero()).count()
    }

    pub fn total(&self) -> Amount {
        self.cells.iter().sum()
    }

    /// Check capacity, causality and window conservation against `flows`.
    ///
    /// Causality is checked against the service span (arrival to deadline);
    /// conservation only for complete windows that end before the flow
    /// leaves.
    pub fn verify(&self, flows: &[FlowSpec], leaves: &[LeaveEvent]) -> Result<(), Violation> {
        for t in 0..self.horizon {
            let sum: Amount = self.row(t).iter().sum();
            if sum > self.capacity {
                return Err(Violation::Capacity { frame: t, sum });
            }
        }
        for &id in &self.flow_ids {
            if !flows.iter().any(|f| f.id == id) {
                return Err(Violation::UnknownColumn(id));
            }
        }
        for f in flows {
            let Some(c) = self.column(f.id) else {
                return Err(Violation::UnknownColumn(f.id));
            };
            let leave = leave_frame(leaves, f.id);
            let mut servable = vec![false; self.horizon];
            for w in windows_of(f, self.horizon) {
                for t in w.service_frames(self.horizon) {
                    servable[t] = t < leave;
                }
                if w.complete && w.end_frame < leave {
                    let got: Amount = (w.arrival_frame..=w.end_frame).map(|t| self.at(t, c)).sum();
                    if got != w.demand {
                        return Err(Violation::Conservation {
                            flow: f.id,
                            arrival: w.arrival_frame,
                            allocated: got,
                            demand: w.demand,
                        });
                    }
                }
            }
            for (t, ok) in servable.iter().enumerate() {
                if !ok && !self.at(t, c).is_zero() {
                    return Err(Violation::Causality { flow: f.id, frame: t });
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn leave_frame(leaves: &[LeaveEvent], id: FlowId) -> usize {
    leaves
        .iter()
        .filter(|l| l.flow_id == id)
        .map(|l| l.at_frame)
        .min()
        .unwrap_or(usize::MAX)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Capacity { frame: usize, sum: Amount },
    Causality { flow: FlowId, frame: usize },
    Conservation {
        flow: FlowId,
        arrival: usize,
        allocated: Amount,
        demand: Amount,
    },
    UnknownColumn(FlowId),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Capacity { frame, sum } => write!(f, "frame {frame} allocates {sum}, over capacity"),
            Violation::Causality { flow, frame } => {
                write!(f, "flow {flow} allocated at frame {frame} outside any service span")
            }
            Violation::Conservation {
                flow,
                arrival,
                allocated,
                demand,
            } => write!(
                f,
                "flow {flow} window at frame {arrival} got {allocated}, demand {demand}"
            ),
            Violation::UnknownColumn(id) => write!(f, "grid column {id} does not match the flow set"),
        }
    }
}

impl std::error::Error for Violation {}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_lcm(periods: &[usize]) -> usize {
        (1..).find(|m| periods.iter().all(|p| m % p == 0)).unwrap()
    }

    fn flows_with_periods(periods: &[usize]) -> Vec<FlowSpec> {
        periods
            .iter()
            .enumerate()
            .map(|(i, &p)| FlowSpec::units(i as u32 + 1, 10, p))
            .collect()
    }

    #[test]
    fn lcm_examples() {
        assert_eq!(lcm_cycle(&flows_with_periods(&[3, 4, 6, 6, 12])).unwrap(), 12);
        assert_eq!(lcm_cycle(&flows_with_periods(&[1])).unwrap(), 1);
        let expected = brute_lcm(&[4, 6, 10]);
        assert_eq!(expected, 60);
        assert_eq!(lcm_cycle(&flows_with_periods(&[4, 6, 10])).unwrap(), expected);
        assert!(matches!(lcm_cycle(&[]), Err(Error::InvalidScenario(_))));
    }

    #[test]
    fn windows_tile_from_join() {
        let c1 = FlowSpec::units(1, 540, 3);
        let ws = windows_of(&c1, 12);
        assert_eq!(ws.iter().map(|w| w.arrival_frame).collect::<Vec<_>>(), vec![0, 3, 6, 9]);
        assert!(ws.iter().all(|w| w.complete));

        let long = FlowSpec::units(2, 10, 20);
        assert_eq!(windows_of(&long, 12).iter().filter(|w| w.complete).count(), 0);

        let c6 = FlowSpec::units(6, 500, 4).joining_at(15);
        let ws = windows_of(&c6, 24);
        let summary: Vec<_> = ws.iter().map(|w| (w.arrival_frame, w.complete)).collect();
        assert_eq!(summary, vec![(15, true), (19, true), (23, false)]);
    }

    #[test]
    fn deadline_shorter_than_period() {
        let f = FlowSpec::units(1, 540, 3).with_deadline(2);
        let w = f.window_at(4, 12).unwrap();
        assert_eq!((w.arrival_frame, w.deadline_frame, w.end_frame), (3, 4, 5));
        assert_eq!(w.service_frames(12), 3..5);
    }

    #[test]
    fn flow_validation() {
        assert!(FlowSpec::units(1, 0, 3).validate().is_err());
        assert!(FlowSpec::units(1, 5, 0).validate().is_err());
        assert!(FlowSpec::units(1, 5, 3).with_deadline(4).validate().is_err());
        assert!(FlowSpec::units(1, 5, 3).with_deadline(0).validate().is_err());
        let dup = vec![FlowSpec::units(1, 5, 3), FlowSpec::units(1, 6, 4)];
        assert_eq!(validate_flows(&dup), Err(Error::DuplicateFlow(FlowId(1))));
    }

    #[test]
    fn grid_sums() {
        let mut g = AllocationGrid::new(Amount::from_units(420), 3, vec![FlowId(2), FlowId(1)]);
        assert_eq!(g.flow_ids(), &[FlowId(1), FlowId(2)]);
        assert_eq!(g.frame_sum(0).unwrap(), Amount::ZERO);
        g.set(1, FlowId(1), Amount::from_units(180)).unwrap();
        g.set(1, FlowId(2), Amount::from_units(20)).unwrap();
        assert_eq!(g.frame_sum(1).unwrap(), Amount::from_units(200));
        assert!(matches!(g.frame_sum(3), Err(Error::FrameOutOfRange { frame: 3, .. })));
        assert!(g.set(0, FlowId(9), Amount::ZERO).is_err());
        assert_eq!(g.bursts_in_frame(1), 2);
        assert_eq!(g.get(99, FlowId(1)), Amount::ZERO);
    }

    proptest! {
        #[test]
        fn lcm_is_least_common_multiple(periods in proptest::collection::vec(1usize..13, 1..5)) {
            let l = lcm_cycle(&flows_with_periods(&periods)).unwrap();
            prop_assert!(periods.iter().all(|p| l.is_multiple_of(*p)));
            prop_assert_eq!(l, brute_lcm(&periods));
        }

        #[test]
        fn windows_have_no_gaps(period in 1usize..20, join in 0usize..30, horizon in 1usize..120) {
            let f = FlowSpec::units(1, 10, period).joining_at(join);
            let ws = windows_of(&f, horizon);
            if join >= horizon {
                prop_assert!(ws.is_empty());
            } else {
                prop_assert_eq!(ws[0].arrival_frame, join);
                for pair in ws.windows(2) {
                    prop_assert_eq!(pair[1].arrival_frame, pair[0].end_frame + 1);
                    prop_assert_eq!(pair[1].arrival_frame - pair[0].arrival_frame, period);
                }
                prop_assert!(ws.last().unwrap().arrival_frame < horizon);
                prop_assert!(ws.last().unwrap().end_frame + 1 >= horizon);
                for w in &ws {
                    prop_assert_eq!(w.complete, w.end_frame < horizon);
                }
            }
        }
    }
}
