#![no_main]

use graphon_core::graphon::Basis;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let s = String::from_utf8_lossy(data);
    if let Ok(b) = s.parse::<Basis>() {
        assert_eq!(b.to_string().parse::<Basis>().unwrap(), b);
    }
});
