//! Frame-based UGS schedulers.
//!
//! All three produce an [`AllocationGrid`] over `config.horizon` frames:
//!
//! * [`eqa_schedule`]: every window's demand spread evenly over its
//!   deadline span.
//! * [`edf_schedule`]: each frame's capacity handed out greedily by
//!   earliest window deadline.
//! * [`swim_schedule`]: equal allocation, then per-frame consolidation by
//!   swapping resources from the smallest allocation to the largest, with
//!   payback in later frames of the same windows.

mod edf;
mod eqa;
mod swim;

use std::fmt;
use std::str::FromStr;

pub use edf::edf_schedule;
pub use eqa::eqa_schedule;
pub use swim::{
    apply_swap, select_giver, select_receiver, swim_init, swim_schedule, SwapMove, SwimEngine, SwimRun,
    SwimStats,
};

pub(crate) use eqa::{settle, spread, write_equal_windows};

use crate::admission::{Decision, LoadState};
use crate::amount::Amount;
use crate::error::{Error, Result};
use crate::model::{validate_flows, AllocationGrid, FlowId, FlowSpec, LeaveEvent, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Eqa,
    Edf,
    Swim,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Eqa, Algorithm::Edf, Algorithm::Swim];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Eqa => "eqa",
            Algorithm::Edf => "edf",
            Algorithm::Swim => "swim",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "eqa" => Ok(Algorithm::Eqa),
            "edf" => Ok(Algorithm::Edf),
            "swim" => Ok(Algorithm::Swim),
            other => Err(Error::parse(0, format!("unknown algorithm {other:?} (expected eqa, edf or swim)"))),
        }
    }
}

/// Default floor for bursts: one resource unit.
pub const DEFAULT_MIN_BURST: Amount = Amount::from_units(1);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchedulerConfig {
    pub algorithm: Algorithm,
    pub min_burst_size: Amount,
    pub capacity: Amount,
    pub horizon: usize,
}

impl SchedulerConfig {
    pub fn new(algorithm: Algorithm, capacity: Amount, horizon: usize) -> Self {
        SchedulerConfig {
            algorithm,
            min_burst_size: DEFAULT_MIN_BURST,
            capacity,
            horizon,
        }
    }

    pub fn with_min_burst(mut self, m: Amount) -> Self {
        self.min_burst_size = m;
        self
    }

    pub(crate) fn validate(&self, flows: &[FlowSpec]) -> Result<()> {
        validate_flows(flows)?;
        if self.horizon == 0 {
            return Err(Error::InvalidScenario("horizon must be at least one frame".into()));
        }
        if let Some(smallest) = flows.iter().map(|f| f.data_size).min() {
            if self.min_burst_size > smallest {
                return Err(Error::InvalidScenario(format!(
                    "min burst size {} exceeds the smallest demand {smallest}",
                    self.min_burst_size
                )));
            }
        }
        Ok(())
    }
}

/// Flows sorted by id; the grid's column order.
pub(crate) fn sorted(flows: &[FlowSpec]) -> Vec<FlowSpec> {
    let mut v = flows.to_vec();
    v.sort_by_key(|f| f.id);
    v
}

pub(crate) fn check_capacity(grid: &AllocationGrid) -> Result<()> {
    for t in 0..grid.horizon() {
        let sum = grid.frame_sum(t)?;
        if sum > grid.capacity() {
            return Err(Error::Infeasible {
                frame: t,
                demand: sum.to_string(),
                capacity: grid.capacity().to_string(),
            });
        }
    }
    Ok(())
}

/// Outcome of replaying joins and leaves through admission control.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdmissionReport {
    pub admitted: Vec<FlowSpec>,
    pub rejected: Vec<(FlowId, Decision)>,
    /// Leave events of admitted flows.
    pub leaves: Vec<LeaveEvent>,
}

/// Replay joins and leaves in frame order (leaves first within a frame,
/// joins by id) against a fresh [`LoadState`].
pub fn admit_in_event_order(flows: &[FlowSpec], leaves: &[LeaveEvent], capacity: Amount) -> AdmissionReport {
    #[derive(PartialEq, Eq, PartialOrd, Ord)]
    enum Ev {
        Leave(FlowId),
        Join(FlowId),
    }
    let mut events: Vec<(usize, Ev)> = flows.iter().map(|f| (f.join_frame, Ev::Join(f.id))).collect();
    events.extend(leaves.iter().map(|l| (l.at_frame, Ev::Leave(l.flow_id))));
    events.sort();

    let mut load = LoadState::new(capacity);
    let mut report = AdmissionReport {
        admitted: Vec::new(),
        rejected: Vec::new(),
        leaves: Vec::new(),
    };
    for (frame, ev) in events {
        match ev {
            Ev::Leave(id) => {
                if load.release(id).is_some() {
                    report.leaves.push(LeaveEvent { flow_id: id, at_frame: frame });
                }
            }
            Ev::Join(id) => {
                let f = flows.iter().find(|f| f.id == id).expect("join event for listed flow");
                match load.admit(f) {
                    Decision::Accepted { .. } => report.admitted.push(f.clone()),
                    d @ Decision::Rejected { .. } => report.rejected.push((id, d)),
                }
            }
        }
    }
    report.admitted.sort_by_key(|f| f.id);
    report
}

/// A scheduled grid plus whatever the algorithm reports about the run.
#[derive(Debug, Clone)]
pub struct Schedule {
    pub grid: AllocationGrid,
    pub admission: AdmissionReport,
    pub swim: Option<SwimStats>,
}

impl Schedule {
    /// Check the full grid against every listed flow. A rejected flow counts
    /// as leaving at its join frame, so its column must stay empty.
    pub fn verify(&self, flows: &[FlowSpec]) -> std::result::Result<(), Violation> {
        let mut leaves = self.admission.leaves.clone();
        for (id, _) in &self.admission.rejected {
            if let Some(f) = flows.iter().find(|f| f.id == *id) {
                leaves.push(LeaveEvent {
                    flow_id: *id,
                    at_frame: f.join_frame,
                });
            }
        }
        self.grid.verify(flows, &leaves)
    }
}

/// Admit `flows` in event order, then run `config.algorithm` on the
/// admitted set. Rejections are reported, not treated as errors.
pub fn schedule(flows: &[FlowSpec], leaves: &[LeaveEvent], config: &SchedulerConfig) -> Result<Schedule> {
    validate_flows(flows)?;
    for l in leaves {
        if !flows.iter().any(|f| f.id == l.flow_id) {
            return Err(Error::UnknownFlow(l.flow_id));
        }
    }
    let admission = admit_in_event_order(flows, leaves, config.capacity);
    for (id, d) in &admission.rejected {
        log::warn!("flow {id} rejected by admission control: {d:?}");
    }
    // Columns for rejected flows stay in the grid, all zero.
    let mut grid = AllocationGrid::for_flows(config.capacity, config.horizon, flows);
    let mut swim_stats = None;
    let inner = match config.algorithm {
        Algorithm::Eqa => eqa::eqa_with_leaves(&admission.admitted, &admission.leaves, config)?,
        Algorithm::Edf => edf::edf_with_leaves(&admission.admitted, &admission.leaves, config)?,
        Algorithm::Swim => {
            let run = SwimEngine::new(&admission.admitted, &admission.leaves, config)?.run()?;
            swim_stats = Some(run.stats);
            run.grid
        }
    };
    for (c, &id) in inner.flow_ids().iter().enumerate() {
        for t in 0..config.horizon {
            grid.set(t, id, inner.at(t, c))?;
        }
    }
    Ok(Schedule {
        grid,
        admission,
        swim: swim_stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algorithm_names_roundtrip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert_eq!("SWIM".parse::<Algorithm>().unwrap(), Algorithm::Swim);
        assert!("wrr".parse::<Algorithm>().is_err());
    }

    #[test]
    fn min_burst_above_smallest_demand_is_rejected() {
        let flows = vec![FlowSpec::new(1, Amount::from_hundredths(50), 4)];
        let cfg = SchedulerConfig::new(Algorithm::Swim, Amount::from_units(10), 4);
        assert!(matches!(cfg.validate(&flows), Err(Error::InvalidScenario(_))));
    }

    #[test]
    fn event_order_admission_releases_before_joining() {
        let flows = vec![
            FlowSpec::units(1, 300, 1),
            FlowSpec::units(2, 300, 1).joining_at(5),
        ];
        let leaves = [LeaveEvent {
            flow_id: FlowId(1),
            at_frame: 5,
        }];
        let report = admit_in_event_order(&flows, &leaves, Amount::from_units(400));
        assert_eq!(report.admitted.len(), 2);
        assert!(report.rejected.is_empty());

        let report = admit_in_event_order(&flows, &[], Amount::from_units(400));
        assert_eq!(report.admitted.len(), 1);
        assert_eq!(report.rejected[0].0, FlowId(2));
    }

    #[test]
    fn leave_for_unknown_flow_is_an_error() {
        let flows = vec![FlowSpec::units(1, 10, 2)];
        let leaves = [LeaveEvent {
            flow_id: FlowId(7),
            at_frame: 1,
        }];
        let cfg = SchedulerConfig::new(Algorithm::Eqa, Amount::from_units(10), 4);
        assert_eq!(schedule(&flows, &leaves, &cfg).unwrap_err(), Error::UnknownFlow(FlowId(7)));
    }
}
