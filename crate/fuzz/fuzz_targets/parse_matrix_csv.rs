#![no_main]

use libfuzzer_sys::fuzz_target;
use rankspec::csvio::{read_matrix_csv, write_matrix_csv};

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = read_matrix_csv(data) {
        let mut out = Vec::new();
        write_matrix_csv(&m, None, &mut out).unwrap();
        assert_eq!(read_matrix_csv(&out[..]).unwrap(), m);
    }
});
