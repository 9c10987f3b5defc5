#![no_main]

use libfuzzer_sys::fuzz_target;
use ugs_sched::{schedule, Algorithm, SchedulerConfig, Scenario};

// Parsed scenarios small enough to run go through every scheduler; the
// result must pass the grid checker whenever scheduling succeeds.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(sc) = Scenario::parse(text) else { return };
    if sc.flows.len() > 12 || sc.flows.iter().any(|f| f.period > 64 || f.join_frame > 64) {
        return;
    }
    let Ok(mut cfg) = sc.config() else { return };
    if cfg.horizon > 256 {
        return;
    }
    for algorithm in Algorithm::ALL {
        cfg = SchedulerConfig { algorithm, ..cfg };
        if let Ok(run) = schedule(&sc.flows, &sc.leaves, &cfg) {
            assert_eq!(run.verify(&sc.flows), Ok(()));
        }
    }
});
