#![no_main]

use libfuzzer_sys::fuzz_target;
use streo::io::{archive_from_slice, archive_to_vec};

fuzz_target!(|data: &[u8]| {
    if let Ok(archive) = archive_from_slice(data) {
        // anything accepted must survive a save and reload unchanged
        let bytes = archive_to_vec(&archive).expect("accepted archive serializes");
        let again = archive_from_slice(&bytes).expect("saved archive reloads");
        assert_eq!(archive, again);
    }
});
