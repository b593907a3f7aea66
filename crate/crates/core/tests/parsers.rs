//! Parser entry points over the fuzz seeds and arbitrary bytes.

use std::fs;
use std::path::PathBuf;

use proptest::prelude::*;
use rankspec::csvio::{read_data_csv, read_matrix_csv, write_matrix_csv};
use rankspec::harness::{ExperimentResult, Functional};

fn seeds(target: &str) -> Vec<Vec<u8>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<Vec<u8>> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| fs::read(e.unwrap().path()).unwrap())
        .collect();
    assert!(!out.is_empty());
    out.sort();
    out
}

fn check_data(bytes: &[u8]) {
    if let Ok(p) = read_data_csv(bytes) {
        assert!(p.data.n() >= 1 && p.data.d() >= 1);
        if let Some(h) = &p.header {
            assert_eq!(h.len(), p.data.d());
        }
    }
}

fn check_results(bytes: &[u8]) {
    if let Ok(res) = ExperimentResult::read_records_csv(bytes) {
        let mut out = Vec::new();
        res.write_records_csv(&mut out).unwrap();
        let again = ExperimentResult::read_records_csv(&out[..]).unwrap();
        assert_eq!(again.records.len(), res.records.len());
    }
}

fn check_matrix(bytes: &[u8]) {
    if let Ok(m) = read_matrix_csv(bytes) {
        let mut out = Vec::new();
        write_matrix_csv(&m, None, &mut out).unwrap();
        assert_eq!(read_matrix_csv(&out[..]).unwrap(), m);
    }
}

#[test]
fn fuzz_seeds_hold_target_invariants() {
    seeds("parse_data_csv").iter().for_each(|s| check_data(s));
    seeds("parse_results_csv").iter().for_each(|s| check_results(s));
    seeds("parse_matrix_csv").iter().for_each(|s| check_matrix(s));
    let mut parsed = 0;
    for s in seeds("parse_functional") {
        if let Some(f) = Functional::parse(std::str::from_utf8(&s).unwrap()) {
            assert_eq!(Functional::parse(&f.name()), Some(f));
            parsed += 1;
        }
    }
    assert!(parsed >= 9);
}

#[test]
fn quoted_functional_with_comma_is_rejected() {
    let input = "n,d,estimator,functional,replicate,value\n1,2,tau,\"spec_err,x\",0,1\n";
    assert!(ExperimentResult::read_records_csv(input.as_bytes()).is_err());
}

proptest! {
    #[test]
    fn arbitrary_bytes_never_panic(bytes in proptest::collection::vec(any::<u8>(), 0..256)) {
        check_data(&bytes);
        check_results(&bytes);
        check_matrix(&bytes);
    }

    #[test]
    fn csv_shaped_text_never_panics(s in "([0-9a-z.,e+\\-\" ]{0,12}\n){0,6}") {
        check_data(s.as_bytes());
        check_matrix(s.as_bytes());
        let with_header = format!("n,d,estimator,functional,replicate,value\n{s}");
        check_results(with_header.as_bytes());
    }
}
