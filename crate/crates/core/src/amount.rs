//! Fixed-point resource amounts.
//!
//! Every amount is an integer count of hundredths of a resource unit (a byte
//! or a slot, depending on the scenario). Scheduler state never touches
//! floating point.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Sub, SubAssign};
use std::str::FromStr;

use crate::error::Error;

/// Hundredths per resource unit.
pub const SCALE: u64 = 100;

/// A non-negative amount of resource, stored in hundredths of a unit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Amount(u64);

impl Amount {
    pub const ZERO: Amount = Amount(0);

    /// One hundredth of a unit, the smallest positive amount.
    pub const EPSILON: Amount = Amount(1);

    pub const fn from_hundredths(h: u64) -> Self {
        Amount(h)
    }

    pub const fn from_units(units: u64) -> Self {
        Amount(units * SCALE)
    }

    pub const fn hundredths(self) -> u64 {
        self.0
    }

    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn checked_sub(self, rhs: Amount) -> Option<Amount> {
        self.0.checked_sub(rhs.0).map(Amount)
    }

    pub fn saturating_sub(self, rhs: Amount) -> Amount {
        Amount(self.0.saturating_sub(rhs.0))
    }

    pub fn checked_add(self, rhs: Amount) -> Option<Amount> {
        self.0.checked_add(rhs.0).map(Amount)
    }

    /// Splits `self` into `parts` shares that differ by at most one
    /// hundredth. The remainder goes to the last shares, so the final share
    /// is never smaller than the first.
    pub fn split_even(self, parts: usize) -> Vec<Amount> {
        if parts == 0 {
            return Vec::new();
        }
        let n = parts as u64;
        let base = self.0 / n;
        let rem = (self.0 % n) as usize;
        (0..parts)
            .map(|i| {
                if i >= parts - rem {
                    Amount(base + 1)
                } else {
                    Amount(base)
                }
            })
            .collect()
    }

    /// `self / divisor`, rounded up to the next hundredth.
    pub fn div_ceil(self, divisor: u64) -> Amount {
        assert!(divisor > 0, "division by zero frames");
        Amount(self.0.div_ceil(divisor))
    }
}

impl Add for Amount {
    type Output = Amount;
    fn add(self, rhs: Amount) -> Amount {
        Amount(self.0 + rhs.0)
    }
}

impl AddAssign for Amount {
    fn add_assign(&mut self, rhs: Amount) {
        self.0 += rhs.0;
    }
}

impl Sub for Amount {
    type Output = Amount;
    fn sub(self, rhs: Amount) -> Amount {
        Amount(
            self.0
                .checked_sub(rhs.0)
                .expect("resource amount underflow"),
        )
    }
}

impl SubAssign for Amount {
    fn sub_assign(&mut self, rhs: Amount) {
        *self = *self - rhs;
    }
}

impl Sum for Amount {
    fn sum<I: Iterator<Item = Amount>>(iter: I) -> Amount {
        iter.fold(Amount::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a Amount> for Amount {
    fn sum<I: Iterator<Item = &'a Amount>>(iter: I) -> Amount {
        iter.copied().sum()
    }
}

/// Always exactly two fraction digits, e.g. `166.67`.
impl fmt::Display for Amount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:02}", self.0 / SCALE, self.0 % SCALE)
    }
}

impl FromStr for Amount {
    type Err = Error;

    /// Accepts `540`, `540.5` or `540.50`. More than two fraction digits,
    /// signs and exponents are rejected rather than rounded.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || Error::Parse {
            line: 0,
            message: format!("invalid resource amount {s:?}"),
        };
        let s = s.trim();
        let (int, frac) = match s.split_once('.') {
            Some((i, f)) => (i, f),
            None => (s, ""),
        };
        if int.is_empty() || !int.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        if frac.len() > 2 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        if s.contains('.') && frac.is_empty() {
            return Err(bad());
        }
        let units: u64 = int.parse().map_err(|_| bad())?;
        let mut hundredths: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        if frac.len() == 1 {
            hundredths *= 10;
        }
        units
            .checked_mul(SCALE)
            .and_then(|u| u.checked_add(hundredths))
            .map(Amount)
            .ok_or_else(bad)
    }
}
