#![no_main]

use libfuzzer_sys::fuzz_target;
use soliton_profile::io::{read_trajectory_csv, write_trajectory_csv};
use soliton_profile::Params;

fuzz_target!(|data: &[u8]| {
    let params = Params::new(3, 1).unwrap();
    let Ok(traj) = read_trajectory_csv(data, params) else {
        return;
    };
    // anything accepted must survive a write/read cycle unchanged
    let mut buf = Vec::new();
    write_trajectory_csv(&mut buf, &traj).unwrap();
    let back = read_trajectory_csv(&buf[..], params).unwrap();
    assert_eq!(back.len(), traj.len());
    for (a, b) in traj.samples().iter().zip(back.samples()) {
        assert_eq!(a.t.to_bits(), b.t.to_bits());
        for (u, v) in a.fields().iter().zip(b.fields()) {
            assert_eq!(u.to_bits(), v.to_bits());
        }
    }
});
