//! Scenario files.
//!
//! ```text
//! # Example I
//! capacity=420
//! frames=12
//! id,data_size,period,deadline,join_frame
//! 1,540,3,,0
//! 2,80,4
//! [leave]
//! id,at_frame
//! 2,8
//! [phy]
//! dl_subchannels=30
//! ```
//!
//! The top section holds `key=value` settings and the flow table. A blank
//! deadline means the period; a missing join frame means 0. Without a
//! `capacity=` line the capacity is the downlink slot count of the `[phy]`
//! profile (or of the default profile).

use std::fmt;

use crate::amount::Amount;
use crate::capacity::{dl_slots_per_frame, PhyProfile};
use crate::error::{Error, Result};
use crate::model::{lcm_cycle, validate_flows, FlowId, FlowSpec, LeaveEvent};
use crate::schedulers::{Algorithm, SchedulerConfig, DEFAULT_MIN_BURST};

pub const FLOW_HEADER: &str = "id,data_size,period,deadline,join_frame";
pub const LEAVE_HEADER: &str = "id,at_frame";

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Scenario {
    /// Explicit per-frame capacity; overrides the PHY-derived value.
    pub capacity: Option<Amount>,
    pub phy: Option<PhyProfile>,
    pub horizon: Option<usize>,
    pub flows: Vec<FlowSpec>,
    pub leaves: Vec<LeaveEvent>,
    pub algorithm: Option<Algorithm>,
    pub min_burst_size: Option<Amount>,
    /// The flow set is expected to fail admission.
    pub expect_reject: bool,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Top,
    Leave,
    Phy,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        let mut sc = Scenario::default();
        let mut section = Section::Top;
        let mut flow_header = false;
        let mut leave_header = false;

        for (i, raw) in text.lines().enumerate() {
            let n = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                section = match line {
                    "[leave]" => Section::Leave,
                    "[phy]" => Section::Phy,
                    _ => return Err(Error::parse(n, format!("unknown section {line}"))),
                };
                continue;
            }
            match section {
                Section::Top => {
                    if let Some((k, v)) = line.split_once('=') {
                        sc.set(k.trim(), v.trim()).map_err(|e| e.at_line(n))?;
                    } else if !flow_header {
                        if normalize(line) != FLOW_HEADER {
                            return Err(Error::parse(n, format!("expected header {FLOW_HEADER:?}")));
                        }
                        flow_header = true;
                    } else {
                        sc.flows.push(parse_flow(line).map_err(|e| e.at_line(n))?);
                    }
                }
                Section::Leave => {
                    if !leave_header {
                        if normalize(line) != LEAVE_HEADER {
                            return Err(Error::parse(n, format!("expected header {LEAVE_HEADER:?}")));
                        }
                        leave_header = true;
                    } else {
                        sc.leaves.push(parse_leave(line).map_err(|e| e.at_line(n))?);
                    }
                }
                Section::Phy => {
                    let (k, v) = line
                        .split_once('=')
                        .ok_or_else(|| Error::parse(n, "expected key=value in [phy]"))?;
                    sc.phy
                        .get_or_insert_with(PhyProfile::default)
                        .set(k.trim(), v.trim())
                        .map_err(|e| e.at_line(n))?;
                }
            }
        }
        validate_flows(&sc.flows)?;
        for l in &sc.leaves {
            if !sc.flows.iter().any(|f| f.id == l.flow_id) {
                return Err(Error::UnknownFlow(l.flow_id));
            }
        }
        Ok(sc)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "capacity" => self.capacity = Some(value.parse()?),
            "frames" => self.horizon = Some(parse_usize(value, "frames")?),
            "algo" => self.algorithm = Some(value.parse()?),
            "min_burst_size" => self.min_burst_size = Some(value.parse()?),
            "expect" => match value {
                "reject" => self.expect_reject = true,
                "admit" => self.expect_reject = false,
                _ => return Err(Error::parse(0, format!("expect must be admit or reject, got {value:?}"))),
            },
            _ => return Err(Error::parse(0, format!("unknown setting {key:?}"))),
        }
        Ok(())
    }

    /// Per-frame capacity: the explicit value, else DL slots of the profile.
    pub fn capacity(&self) -> Result<Amount> {
        if let Some(c) = self.capacity {
            return Ok(c);
        }
        let phy = self.phy.clone().unwrap_or_default();
        Ok(Amount::from_units(dl_slots_per_frame(&phy)?))
    }

    /// The explicit horizon, else the smallest multiple of the LCM cycle
    /// that covers every flow's first full period.
    pub fn horizon(&self) -> Result<usize> {
        if let Some(h) = self.horizon {
            return Ok(h);
        }
        let cycle = lcm_cycle(&self.flows)?;
        let reach = self.flows.iter().map(|f| f.join_frame + f.period).max().unwrap_or(cycle);
        Ok(reach.div_ceil(cycle).max(1) * cycle)
    }

    /// Scheduler settings with the file's values, falling back to SWIM and
    /// the default minimum burst.
    pub fn config(&self) -> Result<SchedulerConfig> {
        Ok(SchedulerConfig {
            algorithm: self.algorithm.unwrap_or(Algorithm::Swim),
            min_burst_size: self.min_burst_size.unwrap_or(DEFAULT_MIN_BURST),
            capacity: self.capacity()?,
            horizon: self.horizon()?,
        })
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(c) = self.capacity {
            writeln!(out, "capacity={c}")?;
        }
        if let Some(h) = self.horizon {
            writeln!(out, "frames={h}")?;
        }
        if let Some(a) = self.algorithm {
            writeln!(out, "algo={a}")?;
        }
        if let Some(m) = self.min_burst_size {
            writeln!(out, "min_burst_size={m}")?;
        }
        if self.expect_reject {
            writeln!(out, "expect=reject")?;
        }
        writeln!(out, "{FLOW_HEADER}")?;
        for f in &self.flows {
            writeln!(out, "{},{},{},{},{}", f.id, f.data_size, f.period, f.deadline, f.join_frame)?;
        }
        if !self.leaves.is_empty() {
            writeln!(out, "[leave]\n{LEAVE_HEADER}")?;
            for l in &self.leaves {
                writeln!(out, "{},{}", l.flow_id, l.at_frame)?;
            }
        }
        if let Some(p) = &self.phy {
            write!(
                out,
                "[phy]\nframe_length_ms={}\nsystem_bandwidth_mhz={}\nfft_size={}\ncyclic_prefix={}/{}\n\
                 dl_symbol_columns={}\nul_symbol_columns={}\npreamble_columns={}\nmap_columns={}\n\
                 dl_subchannels={}\ndl_symbols_per_slot={}\nul_subchannels={}\nul_tile_symbols={}\n\
                 ul_overhead_columns={}\n",
                p.frame_length_ms,
                p.system_bandwidth_mhz,
                p.fft_size,
                p.cyclic_prefix.numer(),
                p.cyclic_prefix.denom(),
                p.dl_symbol_columns,
                p.ul_symbol_columns,
                p.preamble_columns,
                p.map_columns,
                p.dl_subchannels,
                p.dl_symbols_per_slot,
                p.ul_subchannels,
                p.ul_tile_symbols,
                p.ul_overhead_columns
            )?;
        }
        Ok(())
    }
}

fn normalize(line: &str) -> String {
    line.split(',').map(str::trim).collect::<Vec<_>>().join(",")
}

fn parse_usize(s: &str, what: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::parse(0, format!("{what}: expected a non-negative integer, got {s:?}")))
}

fn parse_id(s: &str) -> Result<FlowId> {
    s.trim()
        .parse()
        .map(FlowId)
        .map_err(|_| Error::parse(0, format!("invalid flow id {s:?}")))
}

fn parse_flow(line: &str) -> Result<FlowSpec> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if !(3..=5).contains(&fields.len()) {
        return Err(Error::parse(0, format!("expected 3 to 5 fields, got {}", fields.len())));
    }
    let period = parse_usize(fields[2], "period")?;
    let deadline = match fields.get(3) {
        Some(d) if !d.is_empty() => parse_usize(d, "deadline")?,
        _ => period,
    };
    let join_frame = match fields.get(4) {
        Some(j) if !j.is_empty() => parse_usize(j, "join_frame")?,
        _ => 0,
    };
    let f = FlowSpec {
        id: parse_id(fields[0])?,
        data_size: fields[1].parse()?,
        period,
        deadline,
        join_frame,
    };
    f.validate().map_err(|e| Error::parse(0, e.to_string()))?;
    Ok(f)
}

fn parse_leave(line: &str) -> Result<LeaveEvent> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != 2 {
        return Err(Error::parse(0, format!("expected 2 fields, got {}", fields.len())));
    }
    Ok(LeaveEvent {
        flow_id: parse_id(fields[0])?,
        at_frame: parse_usize(fields[1], "at_frame")?,
    })
}
