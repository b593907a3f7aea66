#![no_main]

use libfuzzer_sys::fuzz_target;
use rankspec::csvio::read_data_csv;

fuzz_target!(|data: &[u8]| {
    if let Ok(parsed) = read_data_csv(data) {
        let m = &parsed.data;
        assert!(m.n() >= 1 && m.d() >= 1);
        for j in 0..m.d() {
            assert!(m.column(j).iter().all(|v| v.is_finite()));
        }
        if let Some(h) = &parsed.header {
            assert_eq!(h.len(), m.d());
        }
    }
});
