//! Per-frame slot capacity from OFDMA PHY parameters.

use num_rational::Ratio;

use crate::error::{Error, Result};

/// OFDMA TDD frame layout. Defaults are a 10 MHz, 5 ms, PUSC profile with a
/// 29:18 DL:UL symbol split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhyProfile {
    pub frame_length_ms: u32,
    pub system_bandwidth_mhz: u32,
    pub fft_size: u32,
    pub cyclic_prefix: Ratio<u32>,
    pub dl_symbol_columns: u32,
    pub ul_symbol_columns: u32,
    pub preamble_columns: u32,
    /// FCH plus DL/UL MAP columns.
    pub map_columns: u32,
    pub dl_subchannels: u32,
    pub dl_symbols_per_slot: u32,
    pub ul_subchannels: u32,
    /// Uplink slots per subchannel, taken as given rather than derived from
    /// the tile structure.
    pub ul_tile_symbols: u32,
    /// Ranging and acknowledgement columns.
    pub ul_overhead_columns: u32,
}

impl Default for PhyProfile {
    fn default() -> Self {
        PhyProfile {
            frame_length_ms: 5,
            system_bandwidth_mhz: 10,
            fft_size: 1024,
            cyclic_prefix: Ratio::new(1, 8),
            dl_symbol_columns: 29,
            ul_symbol_columns: 18,
            preamble_columns: 1,
            map_columns: 4,
            dl_subchannels: 30,
            dl_symbols_per_slot: 2,
            ul_subchannels: 35,
            ul_tile_symbols: 5,
            ul_overhead_columns: 3,
        }
    }
}

impl PhyProfile {
    /// Symbol columns left for DL data after preamble and MAPs.
    pub fn dl_data_columns(&self) -> Result<u32> {
        self.dl_symbol_columns
            .checked_sub(self.preamble_columns + self.map_columns)
            .ok_or_else(|| {
                Error::PhyConfig(format!(
                    "{} DL columns cannot hold {} preamble + {} MAP columns",
                    self.dl_symbol_columns, self.preamble_columns, self.map_columns
                ))
            })
    }

    /// Update a field by its scenario-file key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num = || -> Result<u32> {
            value
                .trim()
                .parse()
                .map_err(|_| Error::parse(0, format!("phy key {key}: expected a non-negative integer, got {value:?}")))
        };
        match key {
            "frame_length_ms" => self.frame_length_ms = num()?,
            "system_bandwidth_mhz" => self.system_bandwidth_mhz = num()?,
            "fft_size" => self.fft_size = num()?,
            "cyclic_prefix" => {
                let (n, d) = value
                    .trim()
                    .split_once('/')
                    .ok_or_else(|| Error::parse(0, format!("cyclic_prefix must look like 1/8, got {value:?}")))?;
                let n: u32 = n.trim().parse().map_err(|_| Error::parse(0, "bad cyclic_prefix numerator"))?;
                let d: u32 = d.trim().parse().map_err(|_| Error::parse(0, "bad cyclic_prefix denominator"))?;
                if d == 0 {
                    return Err(Error::parse(0, "cyclic_prefix denominator is zero"));
                }
                self.cyclic_prefix = Ratio::new(n, d);
            }
            "dl_symbol_columns" => self.dl_symbol_columns = num()?,
            "ul_symbol_columns" => self.ul_symbol_columns = num()?,
            "preamble_columns" => self.preamble_columns = num()?,
            "map_columns" => self.map_columns = num()?,
            "dl_subchannels" => self.dl_subchannels = num()?,
            "dl_symbols_per_slot" => self.dl_symbols_per_slot = num()?,
            "ul_subchannels" => self.ul_subchannels = num()?,
            "ul_tile_symbols" => self.ul_tile_symbols = num()?,
            "ul_overhead_columns" => self.ul_overhead_columns = num()?,
            _ => return Err(Error::parse(0, format!("unknown phy key {key:?}"))),
        }
        Ok(())
    }
}

/// `dl_subchannels × (data columns / symbols per slot)`.
pub fn dl_slots_per_frame(p: &PhyProfile) -> Result<u64> {
    let cols = p.dl_data_columns()?;
    if p.dl_symbols_per_slot == 0 {
        return Err(Error::PhyConfig("dl_symbols_per_slot must be positive".into()));
    }
    if cols % p.dl_symbols_per_slot != 0 {
        return Err(Error::PhyConfig(format!(
            "{cols} DL data columns are not a multiple of {} symbols per slot",
            p.dl_symbols_per_slot
        )));
    }
    Ok(u64::from(p.dl_subchannels) * u64::from(cols / p.dl_symbols_per_slot))
}

/// `ul_tile_symbols × ul_subchannels`.
pub fn ul_slots_per_frame(p: &PhyProfile) -> Result<u64> {
    if p.ul_overhead_columns > p.ul_symbol_columns {
        return Err(Error::PhyConfig(format!(
            "{} UL overhead columns exceed {} UL columns",
            p.ul_overhead_columns, p.ul_symbol_columns
        )));
    }
    Ok(u64::from(p.ul_tile_symbols) * u64::from(p.ul_subchannels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn defaults() {
        let p = PhyProfile::default();
        assert_eq!(dl_slots_per_frame(&p).unwrap(), 360);
        assert_eq!(ul_slots_per_frame(&p).unwrap(), 175);
    }

    #[test]
    fn zero_subchannels() {
        let p = PhyProfile {
            dl_subchannels: 0,
            ul_subchannels: 0,
            ..PhyProfile::default()
        };
        assert_eq!(dl_slots_per_frame(&p).unwrap(), 0);
        assert_eq!(ul_slots_per_frame(&p).unwrap(), 0);
    }

    #[test]
    fn hand_computed_variants() {
        // 15 × (24 / 2)
        let p = PhyProfile {
            dl_subchannels: 15,
            ..PhyProfile::default()
        };
        assert_eq!(dl_slots_per_frame(&p).unwrap(), 180);
        let p = PhyProfile {
            ul_tile_symbols: 10,
            ..PhyProfile::default()
        };
        assert_eq!(ul_slots_per_frame(&p).unwrap(), 350);
    }

    #[test]
    fn misconfigured_columns_are_errors() {
        let odd = PhyProfile {
            dl_symbol_columns: 28,
            ..PhyProfile::default()
        };
        assert!(matches!(dl_slots_per_frame(&odd), Err(Error::PhyConfig(_))));
        let short = PhyProfile {
            dl_symbol_columns: 4,
            ..PhyProfile::default()
        };
        assert!(dl_slots_per_frame(&short).is_err());
        let ul = PhyProfile {
            ul_overhead_columns: 19,
            ..PhyProfile::default()
        };
        assert!(ul_slots_per_frame(&ul).is_err());
    }

    #[test]
    fn set_by_key() {
        let mut p = PhyProfile::default();
        p.set("dl_subchannels", "15").unwrap();
        p.set("cyclic_prefix", "1/4").unwrap();
        assert_eq!(p.dl_subchannels, 15);
        assert_eq!(p.cyclic_prefix, Ratio::new(1, 4));
        assert!(p.set("bogus", "1").is_err());
        assert!(p.set("fft_size", "-1").is_err());
        assert!(p.set("cyclic_prefix", "1/0").is_err());
    }

    proptest! {
        #[test]
        fn slots_monotone_in_subchannels_and_columns(sub in 0u32..60, extra in 0u32..10, tiles in 0u32..12) {
            let base = PhyProfile { dl_subchannels: sub, ul_subchannels: sub, ul_tile_symbols: tiles, ..PhyProfile::default() };
            let more_sub = PhyProfile { dl_subchannels: sub + 1, ul_subchannels: sub + 1, ..base.clone() };
            let more_cols = PhyProfile { dl_symbol_columns: base.dl_symbol_columns + 2 * extra, ..base.clone() };
            let d0 = dl_slots_per_frame(&base).unwrap();
            prop_assert!(dl_slots_per_frame(&more_sub).unwrap() >= d0);
            prop_assert!(dl_slots_per_frame(&more_cols).unwrap() >= d0);
            prop_assert!(ul_slots_per_frame(&more_sub).unwrap() >= ul_slots_per_frame(&base).unwrap());
        }
    }
}
