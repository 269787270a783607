#![no_main]

use libfuzzer_sys::fuzz_target;
use otm_cli::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = RunConfig::from_json(s) {
        assert_eq!(RunConfig::from_json(&cfg.to_json()).expect("serialized config parses"), cfg);
    }
});
