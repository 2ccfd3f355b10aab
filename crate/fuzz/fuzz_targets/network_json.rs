#![no_main]

use graphon_core::sampling::WeightedNetwork;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let s = String::from_utf8_lossy(data);
    if let Ok(net) = WeightedNetwork::from_json(&s) {
        // positions and adjacency must agree on the node count
        assert_eq!(net.positions().len(), net.adjacency().n());
        let _ = net.to_json();
    }
});
