#![no_main]

use libfuzzer_sys::fuzz_target;
use streo::io::parse_seed_list;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(seeds) = parse_seed_list(text) {
        let joined = seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
        assert_eq!(parse_seed_list(&joined).unwrap(), seeds);
    }
});
