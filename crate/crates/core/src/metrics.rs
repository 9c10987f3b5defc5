//! Throughput, per-SDU delay, delay jitter and burst counts of a grid.
//!
//! Delays and jitter are exact rationals in frames. An SDU's delay counts
//! its completion frame inclusively: served entirely in its arrival frame
//! means a delay of 1.

use num_rational::Ratio;

use crate::amount::Amount;
use crate::model::{leave_frame, windows_of, AllocationGrid, FlowId, FlowSpec, LeaveEvent};

pub type Frames = Ratio<u64>;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SduDelays {
    pub delays: Vec<u64>,
    /// Complete windows that never reached their demand.
    pub unfinished: usize,
}

/// Delay of every complete window of `flow` that ends before the flow
/// leaves (pass `usize::MAX` for no leave).
pub fn sdu_delays(grid: &AllocationGrid, flow: &FlowSpec, leave: usize) -> SduDelays {
    let mut out = SduDelays::default();
    let Some(c) = grid.column(flow.id) else {
        return out;
    };
    for w in windows_of(flow, grid.horizon()) {
        if !w.complete || w.end_frame >= leave {
            continue;
        }
        let mut got = Amount::ZERO;
        let done = (w.arrival_frame..=w.end_frame).find(|&t| {
            got += grid.at(t, c);
            got >= w.demand
        });
        match done {
            Some(t) => out.delays.push((t - w.arrival_frame + 1) as u64),
            None => {
                log::warn!("flow {} window at frame {} unfinished; excluded from delays", flow.id, w.arrival_frame);
                out.unfinished += 1;
            }
        }
    }
    out
}

pub fn mean_delay(delays: &[u64]) -> Option<Frames> {
    if delays.is_empty() {
        return None;
    }
    Some(Ratio::new(delays.iter().sum(), delays.len() as u64))
}

/// Mean absolute difference between consecutive delays. One delay gives
/// zero; no delays gives `None`.
pub fn jitter(delays: &[u64]) -> Option<Frames> {
    match delays.len() {
        0 => None,
        1 => Some(Ratio::from_integer(0)),
        n => {
            let total: u64 = delays.windows(2).map(|p| p[0].abs_diff(p[1])).sum();
            Some(Ratio::new(total, (n - 1) as u64))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BurstCounts {
    pub per_frame: Vec<usize>,
    pub total: usize,
}

/// One burst per flow with a positive cell in a frame.
pub fn burst_counts(grid: &AllocationGrid) -> BurstCounts {
    let per_frame: Vec<usize> = (0..grid.horizon()).map(|t| grid.bursts_in_frame(t)).collect();
    let total = per_frame.iter().sum();
    BurstCounts { per_frame, total }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Throughput {
    /// Everything allocated over the cycle.
    pub achieved: Amount,
    /// Demand offered over the cycle: `data_size × active frames / period`
    /// per flow.
    pub optimal: Amount,
    /// Capacity times the cycle length.
    pub capacity: Amount,
}

impl Throughput {
    /// Capacity left unallocated for other service classes.
    pub fn leftover(&self) -> Amount {
        self.capacity.saturating_sub(self.achieved)
    }
}

/// Throughput over the first `cycle` frames.
pub fn throughput(grid: &AllocationGrid, flows: &[FlowSpec], leaves: &[LeaveEvent], cycle: usize) -> Throughput {
    let cycle = cycle.min(grid.horizon());
    let achieved = (0..cycle).flat_map(|t| grid.row(t).iter()).sum();
    let optimal = flows
        .iter()
        .map(|f| {
            let end = cycle.min(leave_frame(leaves, f.id));
            let active = end.saturating_sub(f.join_frame) as u64;
            Amount::from_hundredths(f.data_size.hundredths() * active / f.period as u64)
        })
        .sum();
    Throughput {
        achieved,
        optimal,
        capacity: Amount::from_hundredths(grid.capacity().hundredths() * cycle as u64),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowMetrics {
    pub flow_id: FlowId,
    pub sdu_delays: Vec<u64>,
    pub mean_delay: Option<Frames>,
    pub jitter: Option<Frames>,
    pub unfinished: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleMetrics {
    pub per_flow: Vec<FlowMetrics>,
    pub bursts_per_frame: Vec<usize>,
    pub total_bursts: usize,
    pub throughput: Throughput,
}

impl ScheduleMetrics {
    pub fn flow(&self, id: FlowId) -> Option<&FlowMetrics> {
        self.per_flow.iter().find(|m| m.flow_id == id)
    }
}

/// All metrics over the whole grid horizon.
pub fn compute(grid: &AllocationGrid, flows: &[FlowSpec], leaves: &[LeaveEvent]) -> ScheduleMetrics {
    let mut flows = flows.to_vec();
    flows.sort_by_key(|f| f.id);
    let per_flow = flows
        .iter()
        .map(|f| {
            let d = sdu_delays(grid, f, leave_frame(leaves, f.id));
            FlowMetrics {
                flow_id: f.id,
                mean_delay: mean_delay(&d.delays),
                jitter: jitter(&d.delays),
                sdu_delays: d.delays,
                unfinished: d.unfinished,
            }
        })
        .collect();
    let bursts = burst_counts(grid);
    ScheduleMetrics {
        per_flow,
        bursts_per_frame: bursts.per_frame,
        total_bursts: bursts.total,
        throughput: throughput(grid, &flows, leaves, grid.horizon()),
    }
}
