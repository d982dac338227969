mod support;

#[test]
fn scalar_suite() {
    support::scalar_suite(64).unwrap();
}
