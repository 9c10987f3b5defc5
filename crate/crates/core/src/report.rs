//! Delimited-text outputs: allocation grids, per-run metrics, trial
//! summaries.

use std::fmt::Write as _;

use num_rational::Ratio;

use crate::amount::Amount;
use crate::error::{Error, Result};
use crate::metrics::{self, Frames, ScheduleMetrics};
use crate::model::{AllocationGrid, FlowId, FlowSpec, LeaveEvent};
use crate::trials::TrialSummary;

pub const ALLOCATION_HEADER: &str = "frame,flow_id,amount";
pub const METRICS_HEADER: &str =
    "flow_id,sdu_count,mean_delay,jitter,mean_delay_exact,jitter_exact,bursts,throughput,optimal_throughput";
pub const SUMMARY_HEADER: &str =
    "algorithm,seed,trials,failures,bursts_mean,bursts_std,jitter_mean,jitter_std,jitter_nonzero_trials";

/// Long form, one row per frame and flow, zeros included.
pub fn write_allocation(grid: &AllocationGrid) -> String {
    let mut out = String::from(ALLOCATION_HEADER);
    out.push('\n');
    for t in 0..grid.horizon() {
        for (c, id) in grid.flow_ids().iter().enumerate() {
            let _ = writeln!(out, "{t},{id},{}", grid.at(t, c));
        }
    }
    out
}

/// Read an allocation file back into a grid with the given capacity.
/// Missing cells are zero; the horizon is one past the largest frame.
pub fn parse_allocation(text: &str, capacity: Amount) -> Result<AllocationGrid> {
    let mut rows: Vec<(usize, FlowId, Amount)> = Vec::new();
    let mut header = false;
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if !header {
            if line != ALLOCATION_HEADER {
                return Err(Error::parse(n, format!("expected header {ALLOCATION_HEADER:?}")));
            }
            header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let [frame, id, amount] = fields[..] else {
            return Err(Error::parse(n, format!("expected 3 fields, got {}", fields.len())));
        };
        let frame: usize = frame
            .parse()
            .map_err(|_| Error::parse(n, format!("invalid frame {frame:?}")))?;
        let id: u32 = id.parse().map_err(|_| Error::parse(n, format!("invalid flow id {id:?}")))?;
        let amount: Amount = amount.parse().map_err(|e: Error| e.at_line(n))?;
        rows.push((frame, FlowId(id), amount));
    }
    if !header {
        return Err(Error::parse(1, "empty allocation file"));
    }
    const MAX_FRAMES: usize = 1 << 20;
    let horizon = rows.iter().map(|r| r.0 + 1).max().unwrap_or(0);
    let ids: Vec<FlowId> = rows.iter().map(|r| r.1).collect();
    let mut grid = AllocationGrid::new(capacity, horizon, ids);
    if horizon.saturating_mul(grid.flow_ids().len()) > MAX_FRAMES {
        return Err(Error::parse(0, "allocation grid too large"));
    }
    let mut seen = vec![false; horizon * grid.flow_ids().len()];
    for (frame, id, amount) in rows {
        let c = grid.column(id).expect("column exists");
        let k = frame * grid.flow_ids().len() + c;
        if std::mem::replace(&mut seen[k], true) {
            return Err(Error::parse(0, format!("duplicate cell for frame {frame}, flow {id}")));
        }
        *grid.at_mut(frame, c) = amount;
    }
    Ok(grid)
}

fn decimal(r: Frames) -> String {
    format!("{:.6}", *r.numer() as f64 / *r.denom() as f64)
}

fn exact(r: Frames) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// One row per flow plus a `total` row, all over the grid's horizon.
pub fn write_metrics(m: &ScheduleMetrics, grid: &AllocationGrid, flows: &[FlowSpec], leaves: &[LeaveEvent]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    let horizon = grid.horizon();
    for fm in &m.per_flow {
        let c = grid.column(fm.flow_id);
        let bursts = c.map_or(0, |c| (0..grid.horizon()).filter(|&t| !grid.at(t, c).is_zero()).count());
        let served: Amount = c.map_or(Amount::ZERO, |c| (0..horizon).map(|t| grid.at(t, c)).sum());
        let offered = flows
            .iter()
            .find(|f| f.id == fm.flow_id)
            .map_or(Amount::ZERO, |f| metrics::throughput(grid, std::slice::from_ref(f), leaves, horizon).optimal);
        let opt = |r: Option<Frames>, g: fn(Frames) -> String| r.map(g).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{bursts},{served},{offered}",
            fm.flow_id,
            fm.sdu_delays.len(),
            opt(fm.mean_delay, decimal),
            opt(fm.jitter, decimal),
            opt(fm.mean_delay, exact),
            opt(fm.jitter, exact),
        );
    }
    let _ = writeln!(
        out,
        "total,{},,,,,{},{},{}",
        m.per_flow.iter().map(|f| f.sdu_delays.len()).sum::<usize>(),
        m.total_bursts,
        m.throughput.achieved,
        m.throughput.optimal
    );
    out
}

/// A row of a metrics file, for reading results back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricsRow {
    /// `None` for the totals row.
    pub flow_id: Option<FlowId>,
    pub sdu_count: usize,
    pub mean_delay: Option<Frames>,
    pub jitter: Option<Frames>,
    pub bursts: usize,
    pub throughput: Amount,
    pub optimal_throughput: Amount,
}

pub fn parse_metrics(text: &str) -> Result<Vec<MetricsRow>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == METRICS_HEADER => {}
        _ => return Err(Error::parse(1, format!("expected header {METRICS_HEADER:?}"))),
    }
    let ratio = |s: &str, n: usize| -> Result<Option<Frames>> {
        if s.is_empty() {
            return Ok(None);
        }
        let bad = || Error::parse(n, format!("invalid fraction {s:?}"));
        let (num, den) = s.split_once('/').unwrap_or((s, "1"));
        let num: u64 = num.parse().map_err(|_| bad())?;
        let den: u64 = den.parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        Ok(Some(Ratio::new(num, den)))
    };
    let mut rows = Vec::new();
    for (i, line) in lines {
        let n = i + 1;
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 9 {
            return Err(Error::parse(n, format!("expected 9 fields, got {}", f.len())));
        }
        let int = |s: &str| -> Result<usize> { s.parse().map_err(|_| Error::parse(n, format!("invalid count {s:?}"))) };
        rows.push(MetricsRow {
            flow_id: if f[0] == "total" {
                None
            } else {
                Some(FlowId(f[0].parse().map_err(|_| Error::parse(n, "invalid flow id"))?))
            },
            sdu_count: int(f[1])?,
            mean_delay: ratio(f[4], n)?,
            jitter: ratio(f[5], n)?,
            bursts: int(f[6])?,
            throughput: f[7].parse().map_err(|e: Error| e.at_line(n))?,
            optimal_throughput: f[8].parse().map_err(|e: Error| e.at_line(n))?,
        });
    }
    Ok(rows)
}

pub fn write_summary(summaries: &[TrialSummary]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for s in summaries {
        let _ = writeln!(
            out,
            "{},{},{},{},{:.4},{:.4},{:.4},{:.4},{}",
            s.algorithm,
            s.seed,
            s.trials,
            s.failures,
            s.bursts_mean,
            s.bursts_std,
            s.jitter_mean,
            s.jitter_std,
            s.jitter_nonzero_trials
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn allocation_rejects_malformed_input() {
        let cap = Amount::from_units(10);
        assert!(parse_allocation("", cap).is_err());
        assert!(parse_allocation("frame,flow,amount\n", cap).is_err());
        assert!(parse_allocation("frame,flow_id,amount\n0,1\n", cap).is_err());
        assert!(parse_allocation("frame,flow_id,amount\n0,1,1.234\n", cap).is_err());
        assert!(parse_allocation("frame,flow_id,amount\n0,1,1\n0,1,2\n", cap).is_err());
        assert!(parse_allocation("frame,flow_id,amount\n99999999,1,1\n", cap).is_err());
        let g = parse_allocation("frame,flow_id,amount\n2,4,1.5\n", cap).unwrap();
        assert_eq!((g.horizon(), g.get(2, FlowId(4))), (3, Amount::from_hundredths(150)));
    }

    proptest! {
        #[test]
        fn allocation_roundtrip(cells in proptest::collection::vec(0u64..100_000, 1..60), flows in 1usize..5) {
            let horizon = cells.len().div_ceil(flows);
            let ids = (0..flows as u32).map(|i| FlowId(i * 2 + 1)).collect();
            let mut g = AllocationGrid::new(Amount::from_units(5000), horizon, ids);
            for (k, &h) in cells.iter().enumerate() {
                *g.at_mut(k / flows, k % flows) = Amount::from_hundredths(h);
            }
            let text = write_allocation(&g);
            prop_assert_eq!(parse_allocation(&text, g.capacity()).unwrap(), g);
        }
    }
}
