#![no_main]

use libfuzzer_sys::fuzz_target;
use otm_core::f2codes::LinearCode;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(code) = LinearCode::from_json(s) {
        let again = LinearCode::from_json(&code.to_json()).expect("serialized code parses");
        assert_eq!(again, code);
    }
});
