//! WebAssembly bindings for the demo page: solve a deal double dummy,
//! score a contract, and analyse a hand's opening bid.

use bridgevec::cards::{parse_pbn, Bid, Deal, Seat, Strain};
use bridgevec::dds::Solver;
use bridgevec::opening::{expert_open, heuristic_features};
use bridgevec::scoring::{self, best_ns_contract, ContractResult, Vulnerability};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Trick table of a full deal as JSON:
/// `{"rows":[{"declarer":"N","tricks":[c,d,h,s,nt]},...],"par":{...}}`.
pub fn solve_json(deal: &str) -> Result<String, String> {
    let deal = Deal::parse(deal).map_err(|e| e.to_string())?;
    let table = Solver::default().solve_table(&deal);
    let rows: Vec<_> = [Seat::N, Seat::S, Seat::E, Seat::W]
        .into_iter()
        .map(|seat| {
            let tricks: Vec<u8> = Strain::ALL.into_iter().map(|s| table.get(seat, s)).collect();
            json!({ "declarer": seat.to_string(), "tricks": tricks })
        })
        .collect();
    let (best, score) = best_ns_contract(&table, Vulnerability::NotVulnerable);
    let par = match best {
        Some((bid, seat)) => json!({ "contract": bid.to_string(), "declarer": seat.to_string(), "score": score }),
        None => json!({ "contract": "PASS", "declarer": null, "score": 0 }),
    };
    Ok(json!({ "rows": rows, "best_ns": par }).to_string())
}

/// Score of an undoubled contract for declarer's side.
pub fn score_value(bid: &str, tricks: u8, vulnerable: bool) -> Result<i32, String> {
    let bid: Bid = bid.parse()?;
    let vul = if vulnerable { Vulnerability::Vulnerable } else { Vulnerability::NotVulnerable };
    scoring::contract_score(ContractResult { bid, declarer: Seat::N, tricks_taken: tricks, vul }).map_err(|e| e.to_string())
}

/// Rule-based opening bid and the hand-evaluation features behind it.
pub fn opening_json(hand: &str) -> Result<String, String> {
    let hand = parse_pbn(hand).map_err(|e| e.to_string())?;
    let f = heuristic_features(hand);
    Ok(json!({
        "hand": hand.to_string(),
        "bid": expert_open(hand).to_string(),
        "hcp": f[0],
        "lengths": { "spades": f[1], "hearts": f[2], "diamonds": f[3], "clubs": f[4] },
        "honours": { "aces": f[5], "kings": f[6], "queens": f[7], "jacks": f[8] },
        "balanced": hand.is_balanced(),
    })
    .to_string())
}

#[wasm_bindgen]
pub fn solve(deal: &str) -> Result<String, JsValue> {
    solve_json(deal).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn score(bid: &str, tricks: u8, vulnerable: bool) -> Result<i32, JsValue> {
    score_value(bid, tricks, vulnerable).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn opening(hand: &str) -> Result<String, JsValue> {
    opening_json(hand).map_err(|e| JsValue::from_str(&e))
}
