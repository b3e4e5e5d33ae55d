#![no_main]

use libfuzzer_sys::fuzz_target;
use streo::io::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(cfg) = ExperimentConfig::from_slice(data) {
        cfg.hash().expect("validated config hashes");
        let _ = cfg.target.build().expect("validated target builds");
    }
});
