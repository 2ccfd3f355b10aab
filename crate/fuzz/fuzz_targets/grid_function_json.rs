#![no_main]

use graphon_core::GridFunction;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let s = String::from_utf8_lossy(data);
    if let Ok(f) = GridFunction::from_json(&s) {
        assert!(f.values().iter().all(|v| v.is_finite()));
        assert_eq!(GridFunction::from_json(&f.to_json().unwrap()).unwrap(), f);
    }
});
