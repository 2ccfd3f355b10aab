#![no_main]

use graphon_core::graphon::{Graphon, SpectralGraphon, StepGraphon};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(g) = StepGraphon::from_json(s) {
        let back = StepGraphon::from_json(&g.to_json().unwrap()).unwrap();
        assert_eq!(back, g);
    }
    if let Ok(g) = SpectralGraphon::from_json(s) {
        let back = SpectralGraphon::from_json(&g.to_json().unwrap()).unwrap();
        assert_eq!(back, g);
    }
    let _ = Graphon::from_json(s);
});
