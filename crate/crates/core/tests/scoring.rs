use bridgevec::cards::{Bid, Seat, Strain};
use bridgevec::dds::TrickTable;
use bridgevec::scoring::{best_ns_contract, best_ns_score, contract_score, ContractResult, Vulnerability};

/// Duplicate schedule written out trick by trick.
fn schedule(level: u8, strain: Strain, tricks: u8, vul: bool) -> i32 {
    let need = 6 + level;
    if tricks < need {
        return -(i32::from(need - tricks)) * if vul { 100 } else { 50 };
    }
    let per_trick = |i: u8| match strain {
        Strain::Clubs | Strain::Diamonds => 20,
        Strain::NoTrump if i == 0 => 40,
        _ => 30,
    };
    let contracted: i32 = (0..level).map(per_trick).sum();
    let over: i32 = (level..tricks - 6).map(per_trick).sum();
    let mut total = contracted + over;
    total += match (contracted >= 100, vul) {
        (true, false) => 300,
        (true, true) => 500,
        (false, _) => 50,
    };
    total += match (level, vul) {
        (6, false) => 500,
        (6, true) => 750,
        (7, false) => 1000,
        (7, true) => 1500,
        _ => 0,
    };
    total
}

#[test]
fn golden_table_all_contracts_tricks_and_vulnerabilities() {
    let mut cases = 0;
    for bid in Bid::all().skip(1) {
        let Bid::Contract { level, strain } = bid else { unreachable!() };
        for tricks in 0..=13u8 {
            for (vul, is_vul) in [(Vulnerability::NotVulnerable, false), (Vulnerability::Vulnerable, true)] {
                let got = contract_score(ContractResult { bid, declarer: Seat::N, tricks_taken: tricks, vul }).unwrap();
                assert_eq!(got, schedule(level, strain, tricks, is_vul), "{bid} {tricks} {vul}");
                cases += 1;
            }
        }
    }
    assert_eq!(cases, 980);
}

#[test]
fn declarer_seat_does_not_change_the_score() {
    for seat in Seat::ALL {
        let r = ContractResult { bid: "4H".parse().unwrap(), declarer: seat, tricks_taken: 10, vul: Vulnerability::NotVulnerable };
        assert_eq!(contract_score(r).unwrap(), 420);
    }
}

fn table(n: [u8; 5], s: [u8; 5]) -> TrickTable {
    let mut t = TrickTable::default();
    for strain in Strain::ALL {
        t.set(Seat::N, strain, n[strain.index()]);
        t.set(Seat::S, strain, s[strain.index()]);
    }
    t
}

#[test]
fn best_score_of_the_reference_rows() {
    let t = table([9, 6, 10, 7, 8], [9, 6, 10, 7, 8]);
    assert_eq!(best_ns_score(&t, Vulnerability::NotVulnerable), 420);
    let (c, s) = best_ns_contract(&t, Vulnerability::NotVulnerable);
    assert_eq!(c, Some(("4H".parse().unwrap(), Seat::N)));
    assert_eq!(s, 420);
}

#[test]
fn best_score_enumerates_like_a_brute_force() {
    // Every contract/declarer pair scored with the schedule above.
    let t = table([8, 11, 5, 9, 7], [10, 6, 12, 3, 9]);
    for (vul, is_vul) in [(Vulnerability::NotVulnerable, false), (Vulnerability::Vulnerable, true)] {
        let mut best = 0;
        for bid in Bid::all().skip(1) {
            let Bid::Contract { level, strain } = bid else { unreachable!() };
            for seat in [Seat::N, Seat::S] {
                best = best.max(schedule(level, strain, t.get(seat, strain), is_vul));
            }
        }
        assert_eq!(best_ns_score(&t, vul), best);
    }
}

#[test]
fn pass_out_and_grand_slam_extremes() {
    assert_eq!(best_ns_score(&table([6; 5], [5; 5]), Vulnerability::NotVulnerable), 0);
    assert_eq!(best_ns_score(&table([0, 0, 0, 0, 13], [0; 5]), Vulnerability::NotVulnerable), 1520);
    assert_eq!(best_ns_score(&table([0, 0, 0, 0, 13], [0; 5]), Vulnerability::Vulnerable), 2220);
}
