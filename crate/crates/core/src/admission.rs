//! Admission control for UGS connections.
//!
//! A flow's per-frame share is `data_size / deadline`. A flow is admitted
//! iff the current load plus its share fits within the per-frame capacity
//! (equality admits). The comparison uses exact fractions; loads are
//! reported rounded up to the hundredth.

use std::collections::BTreeMap;

use num_rational::Ratio;
use num_traits::CheckedAdd;

use crate::amount::Amount;
use crate::model::{FlowId, FlowSpec};

/// Per-frame share a flow reserves, rounded up to the hundredth.
pub fn demand_share(f: &FlowSpec) -> Amount {
    f.data_size.div_ceil(f.deadline as u64)
}

/// Total per-frame load a flow set would need (sum of rounded-up shares),
/// without admitting anything.
pub fn required_load(flows: &[FlowSpec]) -> Amount {
    flows.iter().map(demand_share).sum()
}

type Exact = Ratio<u128>;

fn exact_share(f: &FlowSpec) -> Exact {
    Ratio::new(u128::from(f.data_size.hundredths()), f.deadline as u128)
}

fn round_up(x: &Exact) -> Amount {
    let h = x.ceil().to_integer();
    Amount::from_hundredths(u64::try_from(h).unwrap_or(u64::MAX))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Accepted { share: Amount },
    Rejected { share: Amount, would_be: Amount },
}

impl Decision {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Decision::Accepted { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadState {
    capacity: Amount,
    flows: BTreeMap<FlowId, FlowSpec>,
}

impl LoadState {
    pub fn new(capacity: Amount) -> Self {
        LoadState {
            capacity,
            flows: BTreeMap::new(),
        }
    }

    pub fn capacity(&self) -> Amount {
        self.capacity
    }

    /// Exact load of the admitted flows plus `extra`, or `None` if the
    /// fractions outgrow 128 bits.
    fn exact_load<'a>(&'a self, extra: impl IntoIterator<Item = &'a FlowSpec>) -> Option<Exact> {
        self.flows
            .values()
            .chain(extra)
            .try_fold(Ratio::from_integer(0), |acc: Exact, f| acc.checked_add(&exact_share(f)))
    }

    /// Current load, rounded up to the hundredth.
    pub fn per_frame_load(&self) -> Amount {
        match self.exact_load(None) {
            Some(x) => round_up(&x),
            None => self.flows.values().map(demand_share).sum(),
        }
    }

    pub fn is_admitted(&self, id: FlowId) -> bool {
        self.flows.contains_key(&id)
    }

    pub fn admit(&mut self, f: &FlowSpec) -> Decision {
        let share = demand_share(f);
        let cap = Ratio::from_integer(u128::from(self.capacity.hundredths()));
        let (fits, would_be) = match self.exact_load(Some(f)) {
            Some(x) => (x <= cap, round_up(&x)),
            None => {
                log::warn!("load fractions overflow; admitting flow {} on rounded-up shares", f.id);
                let sum: Amount = self.flows.values().map(demand_share).sum::<Amount>() + share;
                (sum <= self.capacity, sum)
            }
        };
        if !fits || self.flows.contains_key(&f.id) {
            return Decision::Rejected { share, would_be };
        }
        self.flows.insert(f.id, f.clone());
        Decision::Accepted { share }
    }

    /// Release a flow's share. Returns the released amount (rounded up), or
    /// `None` when the flow was never admitted.
    pub fn release(&mut self, id: FlowId) -> Option<Amount> {
        self.flows.remove(&id).map(|f| demand_share(&f))
    }
}
