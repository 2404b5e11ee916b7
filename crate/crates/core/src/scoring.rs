//! Duplicate scoring of undoubled contracts.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::cards::{Bid, Seat, Strain};
use crate::dds::TrickTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Vulnerability {
    #[default]
    NotVulnerable,
    Vulnerable,
}

impl FromStr for Vulnerability {
    type Err = ScoringError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" | "nv" | "no" | "not-vulnerable" => Ok(Vulnerability::NotVulnerable),
            "vul" | "v" | "yes" | "vulnerable" | "both" => Ok(Vulnerability::Vulnerable),
            _ => Err(ScoringError::Vulnerability(s.to_string())),
        }
    }
}

impl fmt::Display for Vulnerability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Vulnerability::NotVulnerable => "none",
            Vulnerability::Vulnerable => "vul",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoringError {
    #[error("PASS is not a contract")]
    Pass,
    #[error("tricks must be in 0..=13, got {0}")]
    Tricks(u8),
    #[error("unknown vulnerability {0:?} (use none or vul)")]
    Vulnerability(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContractResult {
    pub bid: Bid,
    pub declarer: Seat,
    pub tricks_taken: u8,
    pub vul: Vulnerability,
}

/// Score for the declaring side.
pub fn contract_score(result: ContractResult) -> Result<i32, ScoringError> {
    let (level, strain) = match result.bid {
        Bid::Pass => return Err(ScoringError::Pass),
        Bid::Contract { level, strain } => (i32::from(level), strain),
    };
    if result.tricks_taken > 13 {
        return Err(ScoringError::Tricks(result.tricks_taken));
    }
    Ok(score(level, strain, i32::from(result.tricks_taken), result.vul))
}

fn score(level: i32, strain: Strain, tricks: i32, vul: Vulnerability) -> i32 {
    let vulnerable = vul == Vulnerability::Vulnerable;
    let needed = level + 6;
    if tricks < needed {
        return (tricks - needed) * if vulnerable { 100 } else { 50 };
    }
    let per_trick = match strain {
        Strain::Clubs | Strain::Diamonds => 20,
        _ => 30,
    };
    let first_extra = if strain == Strain::NoTrump { 10 } else { 0 };
    let contracted = level * per_trick + first_extra;
    let overtricks = (tricks - needed) * per_trick;
    let bonus = if contracted >= 100 {
        if vulnerable { 500 } else { 300 }
    } else {
        50
    };
    let slam = match level {
        6 => if vulnerable { 750 } else { 500 },
        7 => if vulnerable { 1500 } else { 1000 },
        _ => 0,
    };
    contracted + overtricks + bonus + slam
}

/// Best score North-South can reach by passing out or by any contract
/// declared by North or South, given the trick table's N and S rows.
pub fn best_ns_score(table: &TrickTable, vul: Vulnerability) -> i32 {
    best_ns_contract(table, vul).1
}

/// The contract achieving [`best_ns_score`], `None` when passing out is best.
/// Ties keep the lowest bid, North before South.
pub fn best_ns_contract(table: &TrickTable, vul: Vulnerability) -> (Option<(Bid, Seat)>, i32) {
    let mut best = (None, 0);
    for bid in Bid::all().skip(1) {
        let Bid::Contract { level, strain } = bid else { unreachable!() };
        for seat in [Seat::N, Seat::S] {
            let s = score(i32::from(level), strain, i32::from(table.get(seat, strain)), vul);
            if s > best.1 {
                best = (Some((bid, seat)), s);
            }
        }
    }
    best
}
