use std::cmp::Reverse;

use crate::amount::Amount;
use crate::error::{Error, Result};
use crate::model::{leave_frame, AllocationGrid, FlowSpec, LeaveEvent, SduWindow};

use super::{sorted, SchedulerConfig};

/// Earliest-deadline-first: each frame's capacity is granted to arrived,
/// unfinished windows in order of window deadline. Equal deadlines go to the
/// larger remaining demand first, then the lower flow id.
pub fn edf_schedule(flows: &[FlowSpec], config: &SchedulerConfig) -> Result<AllocationGrid> {
    edf_with_leaves(flows, &[], config)
}

pub(crate) fn edf_with_leaves(
    flows: &[FlowSpec],
    leaves: &[LeaveEvent],
    config: &SchedulerConfig,
) -> Result<AllocationGrid> {
    config.validate(flows)?;
    let flows = sorted(flows);
    let horizon = config.horizon;
    let mut grid = AllocationGrid::for_flows(config.capacity, horizon, &flows);
    let leave: Vec<usize> = flows.iter().map(|f| leave_frame(leaves, f.id)).collect();
    let mut current: Vec<Option<(SduWindow, Amount)>> = vec![None; flows.len()];

    for t in 0..horizon {
        for (c, f) in flows.iter().enumerate() {
            if t >= leave[c] {
                current[c] = None;
                continue;
            }
            if let Some(w) = f.window_at(t, horizon) {
                if w.arrival_frame == t {
                    current[c] = Some((w, w.demand));
                }
            }
        }

        let mut active: Vec<usize> = (0..flows.len())
            .filter(|&c| matches!(current[c], Some((w, rem)) if !rem.is_zero() && t <= w.deadline_frame))
            .collect();
        active.sort_by_key(|&c| {
            let (w, rem) = current[c].expect("active window");
            (w.deadline_frame, Reverse(rem), flows[c].id)
        });

        let mut free = config.capacity;
        for c in active {
            if free.is_zero() {
                break;
            }
            let (_, rem) = current[c].as_mut().expect("active window");
            let x = (*rem).min(free);
            *grid.at_mut(t, c) = x;
            *rem -= x;
            free -= x;
        }

        for (c, f) in flows.iter().enumerate() {
            if let Some((w, rem)) = current[c] {
                if w.deadline_frame == t && !rem.is_zero() {
                    return Err(Error::DeadlineMiss {
                        flow: f.id,
                        arrival: w.arrival_frame,
                        deadline: w.deadline_frame,
                    });
                }
            }
        }
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FlowId;
    use crate::schedulers::Algorithm;
    use proptest::prelude::*;

    fn example_one() -> Vec<FlowSpec> {
        vec![
            FlowSpec::units(1, 540, 3),
            FlowSpec::units(2, 80, 4),
            FlowSpec::units(3, 900, 6),
            FlowSpec::units(4, 120, 6),
            FlowSpec::units(5, 600, 12),
        ]
    }

    fn units_row(g: &AllocationGrid, t: usize) -> Vec<u64> {
        g.row(t).iter().map(|a| a.hundredths() / 100).collect()
    }

    #[test]
    fn opening_frames() {
        let cfg = SchedulerConfig::new(Algorithm::Edf, Amount::from_units(420), 12);
        let g = edf_schedule(&example_one(), &cfg).unwrap();
        assert_eq!(units_row(&g, 0), vec![420, 0, 0, 0, 0]);
        assert_eq!(units_row(&g, 1), vec![120, 80, 220, 0, 0]);
        assert_eq!(units_row(&g, 10), vec![0, 0, 80, 0, 340]);
    }

    #[test]
    fn overload_misses_deadline() {
        let cfg = SchedulerConfig::new(Algorithm::Edf, Amount::from_units(10), 4);
        let flows = vec![FlowSpec::units(1, 30, 2)];
        assert_eq!(
            edf_schedule(&flows, &cfg).unwrap_err(),
            Error::DeadlineMiss {
                flow: FlowId(1),
                arrival: 0,
                deadline: 1
            }
        );
    }

    #[test]
    fn leave_stops_service() {
        let cfg = SchedulerConfig::new(Algorithm::Edf, Amount::from_units(420), 12);
        let leaves = [LeaveEvent {
            flow_id: FlowId(5),
            at_frame: 6,
        }];
        let g = edf_with_leaves(&example_one(), &leaves, &cfg).unwrap();
        assert!((6..12).all(|t| g.get(t, FlowId(5)).is_zero()));
    }

    proptest! {
        // In every frame EDF hands out min(capacity, arrived unfinished demand).
        #[test]
        fn work_conserving(specs in proptest::collection::vec((1u64..50, 1usize..8), 1..6), horizon in 1usize..40) {
            let flows: Vec<_> = specs.iter().enumerate()
                .map(|(i, &(d, p))| FlowSpec::units(i as u32 + 1, d, p)).collect();
            let capacity = crate::admission::required_load(&flows);
            let cfg = SchedulerConfig::new(Algorithm::Edf, capacity, horizon).with_min_burst(Amount::ZERO);
            let g = edf_schedule(&flows, &cfg).unwrap();
            for t in 0..horizon {
                let mut pending = Amount::ZERO;
                for f in &flows {
                    let w = f.window_at(t, horizon).unwrap();
                    let served: Amount = (w.arrival_frame..t).map(|s| g.get(s, f.id)).sum();
                    pending += w.demand - served;
                }
                prop_assert_eq!(g.frame_sum(t).unwrap(), pending.min(capacity));
            }
        }
    }
}
