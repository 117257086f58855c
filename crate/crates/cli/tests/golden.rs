mod common;

use common::{check_golden, CASES};

#[test]
fn golden_reports_are_unchanged() {
    let failures: Vec<String> = CASES.iter().filter_map(|c| check_golden(c).err()).collect();
    assert!(failures.is_empty(), "{failures:#?}");
}
