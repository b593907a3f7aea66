#![no_main]

use libfuzzer_sys::fuzz_target;
use rankspec::harness::{Estimator, Functional};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Some(f) = Functional::parse(s) {
        assert_eq!(Functional::parse(&f.name()), Some(f));
    }
    if let Some(e) = Estimator::parse(s) {
        assert_eq!(Estimator::parse(e.name()), Some(e));
    }
});
