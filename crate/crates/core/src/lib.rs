//! Frame-based scheduling of unsolicited grant service (UGS) flows.
//!
//! Flows deliver one SDU per period that must be served within its
//! deadline. Schedulers fill an [`AllocationGrid`] of frames by flows with
//! per-frame capacity limits:
//!
//! * equal allocation ([`Algorithm::Eqa`]),
//! * earliest deadline first ([`Algorithm::Edf`]),
//! * swapping min-max ([`Algorithm::Swim`]), which starts from equal
//!   allocation and consolidates each frame into fewer, larger bursts.
//!
//! ```
//! use ugs_sched::{schedule, Algorithm, Amount, FlowSpec, SchedulerConfig};
//!
//! let flows = vec![FlowSpec::units(1, 90, 3), FlowSpec::units(2, 60, 3)];
//! let cfg = SchedulerConfig::new(Algorithm::Swim, Amount::from_units(50), 3);
//! let run = schedule(&flows, &[], &cfg).unwrap();
//! assert!(run.grid.verify(&flows, &[]).is_ok());
//! ```

pub mod admission;
pub mod amount;
pub mod capacity;
pub mod dynamics;
pub mod error;
pub mod metrics;
pub mod model;
pub mod report;
pub mod scenario;
pub mod schedulers;
pub mod trials;

pub use admission::{Decision, LoadState};
pub use amount::Amount;
pub use capacity::{dl_slots_per_frame, ul_slots_per_frame, PhyProfile};
pub use error::{Error, Result};
pub use model::{lcm_cycle, AllocationGrid, FlowId, FlowSpec, LeaveEvent, SduWindow, Violation};
pub use scenario::Scenario;
pub use schedulers::{schedule, Algorithm, Schedule, SchedulerConfig};
