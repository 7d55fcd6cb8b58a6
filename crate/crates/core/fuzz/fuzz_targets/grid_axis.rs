#![no_main]

use libfuzzer_sys::fuzz_target;
use soliton_profile::explorer::GridAxis;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(axis) = s.parse::<GridAxis>() else {
        return;
    };
    assert!(axis.n >= 2 && axis.lo <= axis.hi);
    assert_eq!(axis.value(0), axis.lo);
    assert_eq!(axis.value(axis.n - 1), axis.hi);
    let again: GridAxis = axis.to_string().parse().unwrap();
    assert_eq!(again, axis);
});
