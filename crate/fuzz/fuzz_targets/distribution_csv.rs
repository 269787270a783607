#![no_main]

use libfuzzer_sys::fuzz_target;
use otm_core::collinfo::JointDistribution;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(d) = JointDistribution::from_csv(s) {
        let total: f64 = d.probs().iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
        JointDistribution::from_csv(&d.to_csv()).expect("serialized distribution parses");
    }
});
