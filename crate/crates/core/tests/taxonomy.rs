use eai_core::domain::builtin;
use eai_core::executor::{execute, ErrorCategory};
use eai_testkit::taxonomy::cases;

#[test]
fn every_plan_gets_its_category() {
    let d = builtin("behavior-symbolic").unwrap();
    let cases = cases();
    assert!(cases.len() >= 12);
    for c in &cases {
        let t = execute(&c.initial, &c.plan, &d);
        assert_eq!(t.category(), c.expected, "{}", c.name);
        if c.expected == ErrorCategory::None {
            assert!(t.is_completed(), "{}", c.name);
        } else {
            assert_eq!(t.failed_step().unwrap().index, c.stop, "{}", c.name);
        }
    }
    let mut seen: Vec<String> = cases.iter().filter_map(|c| c.expected.column()).map(String::from).collect();
    seen.sort();
    seen.dedup();
    assert_eq!(seen.len(), 7);
}
