#![no_main]

use libfuzzer_sys::fuzz_target;
use ugs_sched::Scenario;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(sc) = Scenario::parse(text) {
        let again = Scenario::parse(&sc.to_string()).expect("printed scenario must parse");
        assert_eq!(again, sc);
    }
});
