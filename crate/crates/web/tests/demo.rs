use bridgevec_web::{opening_json, solve_json};

#[test]
fn reference_deal_table_and_best_contract() {
    let out = solve_json("N:A.KQ9832.T94.AKT Q4.AT7.QJ872.732 KJ95.J65.K3.J654 T87632.4.A65.Q98").unwrap();
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["rows"][0]["declarer"], "N");
    assert_eq!(v["rows"][0]["tricks"], serde_json::json!([9, 6, 10, 7, 8]));
    assert_eq!(v["rows"][3]["tricks"], serde_json::json!([4, 7, 3, 6, 3]));
    assert_eq!(v["best_ns"]["contract"], "4H");
    assert_eq!(v["best_ns"]["score"], 420);
}

#[test]
fn bad_deals_and_hands_are_reported() {
    assert!(solve_json("N:A.KQ9832.T94.AKT").is_err());
    assert!(opening_json("AKQJT98765432.A..").is_err());
    let v: serde_json::Value = serde_json::from_str(&opening_json("J84.Q73.9652.K74").unwrap()).unwrap();
    assert_eq!(v["bid"], "PASS");
}
