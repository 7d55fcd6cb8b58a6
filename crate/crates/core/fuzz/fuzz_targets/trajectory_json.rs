#![no_main]

use libfuzzer_sys::fuzz_target;
use soliton_profile::io::{read_trajectory_json, write_trajectory_json};

fuzz_target!(|data: &[u8]| {
    let Ok((traj, meta)) = read_trajectory_json(data) else {
        return;
    };
    let mut buf = Vec::new();
    write_trajectory_json(&mut buf, &traj, &meta).unwrap();
    let (back, meta_back) = read_trajectory_json(&buf[..]).unwrap();
    assert_eq!(back.len(), traj.len());
    assert_eq!(meta_back.m, meta.m);
    assert_eq!(meta_back.t_end.to_bits(), meta.t_end.to_bits());
});
