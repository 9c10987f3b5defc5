use crate::amount::Amount;
use crate::error::Result;
use crate::model::{leave_frame, windows_of, AllocationGrid, FlowSpec, LeaveEvent};

use super::{check_capacity, sorted, SchedulerConfig};

/// Equal allocation: each window's demand split evenly across the frames
/// from its arrival to its deadline, leftover hundredths on the least-loaded frames.
pub fn eqa_schedule(flows: &[FlowSpec], config: &SchedulerConfig) -> Result<AllocationGrid> {
    eqa_with_leaves(flows, &[], config)
}

pub(crate) fn eqa_with_leaves(
    flows: &[FlowSpec],
    leaves: &[LeaveEvent],
    config: &SchedulerConfig,
) -> Result<AllocationGrid> {
    config.validate(flows)?;
    let flows = sorted(flows);
    let mut grid = AllocationGrid::for_flows(config.capacity, config.horizon, &flows);
    let mut spreads = Vec::new();
    for f in &flows {
        spreads.extend(write_equal_windows(&mut grid, f, f.join_frame, leave_frame(leaves, f.id)));
    }
    settle(&mut grid, &spreads);
    check_capacity(&grid)?;
    Ok(grid)
}

/// One window's demand spread evenly over a set of frames.
#[derive(Debug, Clone)]
pub(crate) struct Spread {
    col: usize,
    base: Amount,
    /// Frames written, ascending.
    frames: Vec<usize>,
    /// Part of the spread falls outside the written frames.
    open: bool,
    /// Frame that must keep its leftover hundredth.
    pinned: Option<usize>,
}

/// Write the equal shares of every window of `f` arriving at or after
/// `from`, skipping frames at or after `until`.
pub(crate) fn write_equal_windows(grid: &mut AllocationGrid, f: &FlowSpec, from: usize, until: usize) -> Vec<Spread> {
    let Some(c) = grid.column(f.id) else { return Vec::new() };
    windows_of(f, grid.horizon())
        .into_iter()
        .filter(|w| w.arrival_frame >= from)
        .map(|w| {
            let frames: Vec<usize> = (w.arrival_frame..w.arrival_frame + f.deadline).collect();
            spread(grid, c, w.demand, &frames, until)
        })
        .collect()
}

/// Split `demand` over `frames` (ascending) in column `c` and write the
/// shares that fall inside the grid and before `until`. The leftover
/// hundredths go one each to the frames with the smallest current sum,
/// latest first among equals; frames past the horizon count as empty. A
/// split too small to cover every frame always keeps the last frame
/// non-empty.
pub(crate) fn spread(grid: &mut AllocationGrid, c: usize, demand: Amount, frames: &[usize], until: usize) -> Spread {
    let span = frames.len();
    let mut shares = demand.split_even(span);
    let base = shares.first().copied().unwrap_or(Amount::ZERO);
    let rem = shares.iter().filter(|&&s| s != base).count();
    let load = |t: usize| if t < grid.horizon() { grid.frame_sum(t).unwrap_or(Amount::ZERO) } else { Amount::ZERO };
    let mut order: Vec<usize> = (0..span).collect();
    order.sort_by_key(|&i| (base.is_zero() && i != span - 1, load(frames[i]), std::cmp::Reverse(i)));
    shares.fill(base);
    for &i in &order[..rem] {
        shares[i] += Amount::EPSILON;
    }
    let limit = until.min(grid.horizon());
    let mut written = Vec::with_capacity(span);
    for (&t, share) in frames.iter().zip(shares) {
        if t < limit {
            *grid.at_mut(t, c) = share;
            written.push(t);
        }
    }
    let last = frames.last().copied();
    Spread {
        col: c,
        base,
        open: written.len() < span,
        pinned: if base.is_zero() { last.filter(|&t| t < limit) } else { None },
        frames: written,
    }
}

enum Sink {
    Frame(usize),
    Outside(usize),
}

/// Move leftover hundredths between frames of the same spread until no
/// frame exceeds capacity, along shortest augmenting paths. Grids already
/// within capacity are left unchanged. Returns `false` if some frame stays
/// over capacity.
pub(crate) fn settle(grid: &mut AllocationGrid, spreads: &[Spread]) -> bool {
    let horizon = grid.horizon();
    let cap = grid.capacity();
    let mut by_frame: Vec<Vec<usize>> = vec![Vec::new(); horizon];
    for (k, s) in spreads.iter().enumerate() {
        for &t in &s.frames {
            by_frame[t].push(k);
        }
    }
    let extra = |g: &AllocationGrid, s: &Spread, t: usize| s.pinned != Some(t) && g.at(t, s.col) > s.base;
    loop {
        let Some(src) = (0..horizon).find(|&t| grid.frame_sum(t).is_ok_and(|x| x > cap)) else {
            return true;
        };
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; horizon];
        let mut seen = vec![false; horizon];
        seen[src] = true;
        let mut queue = std::collections::VecDeque::from([src]);
        let mut sink = None;
        'search: while let Some(t) = queue.pop_front() {
            for &k in &by_frame[t] {
                let s = &spreads[k];
                if !extra(grid, s, t) {
                    continue;
                }
                if s.open {
                    sink = Some((Sink::Outside(t), k));
                    break 'search;
                }
                for &u in &s.frames {
                    if seen[u] || grid.at(u, s.col) != s.base {
                        continue;
                    }
                    seen[u] = true;
                    prev[u] = Some((t, k));
                    if grid.frame_sum(u).is_ok_and(|x| x < cap) {
                        sink = Some((Sink::Frame(u), k));
                        break 'search;
                    }
                    queue.push_back(u);
                }
            }
        }
        let mut at = match sink {
            None => return false,
            Some((Sink::Outside(t), k)) => {
                *grid.at_mut(t, spreads[k].col) -= Amount::EPSILON;
                t
            }
            Some((Sink::Frame(u), _)) => u,
        };
        while let Some((t, k)) = prev[at] {
            let c = spreads[k].col;
            *grid.at_mut(at, c) += Amount::EPSILON;
            *grid.at_mut(t, c) -= Amount::EPSILON;
            at = t;
        }
    }
}
