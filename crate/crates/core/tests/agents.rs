use bridgevec::cards::{parse_pbn, Bid};
use bridgevec::dds::Solver;
use bridgevec::model::init_model;
use bridgevec::nn::Layer;
use bridgevec::rl::{self, build_bank, build_episode, Agent, AgentKind, BankOptions, CemConfig, EpisodeBank, RewardMode};

#[test]
fn small_bank_is_reproducible_and_non_positive() {
    let m = init_model(8, 2);
    let opts = BankOptions { n_episodes: 6, n_exact: 2, n_layouts: 1, seed: 3, jobs: 1 };
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let bank = build_bank(&opts, Some(&m), |_| {}).unwrap();
    bank.save(&a).unwrap();
    build_bank(&opts, Some(&m), |_| {}).unwrap().save(&b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(bank.n_exact(), 2);
    for e in &bank.episodes {
        assert!(e.rewards.iter().all(|&r| r <= 0.0));
        assert_eq!(e.score(Bid::Pass), 0.0);
    }
    assert_eq!(EpisodeBank::load(&a).unwrap(), bank);
}

#[test]
fn overlapping_hands_are_rejected() {
    let n = parse_pbn("A.KQ9832.T94.AKT").unwrap();
    let r = build_episode(&mut Solver::default(), n, n, 1, 0, RewardMode::Exact, None);
    assert!(matches!(r, Err(rl::RlError::Overlap)));
}

fn uniform_pass_bank() -> EpisodeBank {
    let m = init_model(8, 2);
    let opts = BankOptions { n_episodes: 40, n_exact: 0, n_layouts: 1, seed: 5, jobs: 1 };
    let mut bank = build_bank(&opts, Some(&m), |_| {}).unwrap();
    for e in &mut bank.episodes {
        e.rewards[0] = -120.0;
    }
    bank
}

#[test]
fn a_policy_that_always_passes_earns_the_pass_reward() {
    let bank = uniform_pass_bank();
    let x = AgentKind::Binary.inputs(&bank.hands(), None).unwrap();
    let mut agent = Agent::new(AgentKind::Binary, 52, 1);
    if let Some(Layer::Dense(d)) = agent.net.layers.last_mut() {
        d.b[0] = 1e4;
    }
    let cfg = CemConfig { population: 30, steps: 5, lr: 1e-9, ..CemConfig::default() };
    let run = rl::cem_train(&mut agent, &x, &bank, &cfg).unwrap();
    assert_eq!(run.curve, vec![-120.0; 5]);
}

#[test]
fn policies_start_flat_and_act_greedily_on_request() {
    let bank = uniform_pass_bank();
    let m = init_model(8, 2);
    let x = AgentKind::Hand2Vec.inputs(&bank.hands(), Some(&m)).unwrap();
    assert_eq!(x.ncols(), 8);
    let agent = Agent::new(AgentKind::Hand2Vec, 8, 4);
    let row = x.row(0).to_vec();
    let (p, greedy) = agent.act(&row, None).unwrap();
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    let hi = p.iter().cloned().fold(0.0, f64::max);
    let lo = p.iter().cloned().fold(1.0, f64::min);
    assert!(hi / lo < 3.0);
    assert_eq!(agent.act(&row, None).unwrap().1, greedy);
    assert!(AgentKind::Hand2Vec.inputs(&bank.hands(), None).is_err());
}

#[test]
fn curves_have_one_point_per_step_and_write_as_csv() {
    let bank = uniform_pass_bank();
    let m = init_model(8, 2);
    let cfg = CemConfig { population: 20, steps: 7, ..CemConfig::default() };
    let runs = rl::compare_agents([AgentKind::Binary, AgentKind::Hand2Vec], &bank, Some(&m), &cfg, &[1, 2]).unwrap();
    assert_eq!(runs.len(), 2);
    assert!(runs.iter().all(|r| r.first.curve.len() == 7 && r.second.curve.len() == 7));
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.csv");
    rl::write_curve(&p, &runs[0].first.curve).unwrap();
    let text = std::fs::read_to_string(&p).unwrap();
    assert!(text.starts_with("step,mean_reward\n1,"));
    assert_eq!(text.lines().count(), 8);
}
