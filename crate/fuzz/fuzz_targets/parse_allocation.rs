#![no_main]

use libfuzzer_sys::fuzz_target;
use ugs_sched::report::{parse_allocation, write_allocation};
use ugs_sched::Amount;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(grid) = parse_allocation(text, Amount::from_units(420)) {
        let again = parse_allocation(&write_allocation(&grid), grid.capacity()).unwrap();
        assert_eq!(again, grid);
    }
});
