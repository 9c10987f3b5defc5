#![no_main]

use libfuzzer_sys::fuzz_target;
use ugs_sched::Amount;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(a) = text.parse::<Amount>() {
        assert_eq!(a.to_string().parse::<Amount>().unwrap(), a);
    }
});
