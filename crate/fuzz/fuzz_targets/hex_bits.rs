#![no_main]

use libfuzzer_sys::fuzz_target;
use otm_core::f2codes::{BitVector, F2Matrix};

// First two bytes pick the matrix shape; the rest is the hex payload.
fuzz_target!(|data: &[u8]| {
    if data.len() < 2 {
        return;
    }
    let (rows, cols) = (usize::from(data[0] % 64), usize::from(data[1] % 64));
    let Ok(s) = std::str::from_utf8(&data[2..]) else { return };
    if let Ok(m) = F2Matrix::from_hex(rows, cols, s) {
        assert_eq!(F2Matrix::from_hex(rows, cols, &m.to_hex()).expect("serialized matrix parses"), m);
    }
    if let Ok(v) = s.parse::<BitVector>() {
        assert_eq!(v.to_string().parse::<BitVector>().expect("serialized bits parse"), v);
    }
});
