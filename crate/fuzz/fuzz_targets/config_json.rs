#![no_main]

use graphon_core::config::{parse, GlqrConfig, GsscConfig, SampleConfig, SpectraConfig, SweepConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    let _ = parse::<SpectraConfig>(s);
    let _ = parse::<SampleConfig>(s);
    let _ = parse::<GsscConfig>(s);
    let _ = parse::<GlqrConfig>(s);
    let _ = parse::<SweepConfig>(s);
});
