#![no_main]

use libfuzzer_sys::fuzz_target;
use rankspec::harness::ExperimentResult;

fuzz_target!(|data: &[u8]| {
    if let Ok(res) = ExperimentResult::read_records_csv(data) {
        let _ = res.summary();
        let mut out = Vec::new();
        res.write_records_csv(&mut out).unwrap();
        // written records read back to the same values
        let again = ExperimentResult::read_records_csv(&out[..]).unwrap();
        assert_eq!(again.records.len(), res.records.len());
    }
});
