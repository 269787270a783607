#![no_main]

use libfuzzer_sys::fuzz_target;
use otm_cli::{parse_scalar, parse_scalar_list};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(x) = parse_scalar(s) {
        assert!(x.is_finite());
    }
    if let Ok(xs) = parse_scalar_list(s) {
        assert!(xs.iter().all(|x| x.is_finite()));
    }
});
