mod common;

use common::*;
use faraday_ecp_core::analytics::{self, DetectionEfficiency};
use faraday_ecp_core::ecp::{self, Classification, CoefficientPair, FinalStatus};
use faraday_ecp_core::montecarlo::{self, LossModel, SimulationConfig, Verdict};
use faraday_ecp_core::state::{BasisConfig, PureState};

/// `|alpha_k|^2` after `k - 1` recycles, as `1 / (1 + (b2/a2)^(2^(k-1)))`.
fn weight_after(a2: f64, k: usize) -> f64 {
    let rho = (1.0 - a2) / a2;
    1.0 / (1.0 + rho.powf(2f64.powi(k as i32 - 1)))
}

#[test]
fn recycled_coefficients_square_each_round() {
    let a2 = 0.8;
    let mut p = CoefficientPair::from_alpha2(a2).unwrap();
    let n = 3;
    let mut state = ecp::prepare_initial(&p, n).unwrap();
    let mut reach = 1.0;
    for k in 1..=6 {
        assert!((p.alpha2() - weight_after(a2, k)).abs() < 1e-12, "round {k}");
        let want = PureState::from_terms([
            (BasisConfig::atoms(branch(GL, n)), c(p.alpha.re, p.alpha.im)),
            (BasisConfig::atoms(branch(GR, n)), c(p.beta.re, p.beta.im)),
        ])
        .unwrap();
        assert!(state.fidelity(&want).unwrap() > 1.0 - 1e-12);

        let branches = ecp::round_branches(&state, &p).unwrap();
        let success: f64 = branches.iter().filter(|r| r.classification.is_success()).map(|r| r.probability).sum();
        let p_k = analytics::round_probability(&CoefficientPair::from_alpha2(a2).unwrap(), k).unwrap();
        assert!((reach * success - p_k).abs() < 1e-12, "round {k}");
        reach *= 1.0 - success;

        let recycle = branches.into_iter().find(|r| r.classification == Classification::Recycle).unwrap();
        p = recycle.next_coefficients.unwrap();
        state = recycle.corrected_state;
    }
}

#[test]
fn second_round_probability_at_eighty_percent() {
    let p = CoefficientPair::from_alpha2(0.8).unwrap();
    let p2 = analytics::round_probability(&p, 2).unwrap();
    // 2 * 0.16^2 / (0.64 + 0.04)
    assert!((p2 - 0.0512 / 0.68).abs() < 1e-12);
}

#[test]
fn symmetric_pair_halves_each_round() {
    let p = CoefficientPair::from_alpha2(0.5).unwrap();
    for k in 1..=20 {
        let want = 0.5f64.powi(k as i32);
        assert!((analytics::round_probability(&p, k).unwrap() - want).abs() < 1e-15);
    }
    assert!((analytics::total_probability(&p, 5).unwrap() - 0.96875).abs() < 1e-12);
}

#[test]
fn transcripts_stop_at_first_success() {
    let p = CoefficientPair::from_alpha2(0.7).unwrap();
    for seed in 0..200 {
        let t = ecp::run_protocol_seeded(&p, 4, 5, seed).unwrap();
        assert_eq!(t.seed, Some(seed));
        match t.final_status {
            FinalStatus::Succeeded { round } => {
                assert_eq!(round, t.rounds.len());
                assert!(t.rounds[..round - 1].iter().all(|r| !r.classification.is_success()));
                let target = ecp::maximally_entangled(4).unwrap();
                assert!(t.final_state.fidelity(&target).unwrap() > 1.0 - 1e-12);
            }
            FinalStatus::Exhausted { rounds } => {
                assert_eq!(rounds, 5);
                assert!(t.rounds.iter().all(|r| !r.classification.is_success()));
            }
        }
        assert_eq!(t, ecp::run_protocol_seeded(&p, 4, 5, seed).unwrap());
    }
}

fn assert_agrees(config: &SimulationConfig) {
    let ledger = montecarlo::estimate(config).unwrap();
    for a in montecarlo::agreement(config, &ledger).unwrap() {
        assert_ne!(a.verdict, Verdict::Fail, "{a:?}");
        assert!(a.z < montecarlo::SOFT_SIGMA, "{a:?}");
    }
}

#[test]
fn sampled_rounds_match_closed_form_symmetric() {
    let p = CoefficientPair::from_alpha2(0.5).unwrap();
    assert_agrees(&SimulationConfig::ideal(p, 2, 3, 20_000, 11));
}

#[test]
fn sampled_rounds_match_closed_form_biased() {
    let p = CoefficientPair::from_alpha2(0.8).unwrap();
    assert_agrees(&SimulationConfig::ideal(p, 3, 2, 20_000, 12));
}

#[test]
fn loss_models_order_success_rates() {
    let p = CoefficientPair::from_alpha2(0.6).unwrap();
    let eff = DetectionEfficiency::new(0.9, 0.8).unwrap();
    let base = SimulationConfig::ideal(p, 2, 4, 20_000, 13);
    let global = base.with_loss(LossModel::PaperGlobal, eff);
    let cascaded = base.with_loss(LossModel::CascadedPerRound, eff);
    for config in [&base, &global, &cascaded] {
        assert_agrees(config);
    }
    let total = |c: &SimulationConfig| montecarlo::estimate(c).unwrap().empirical_total();
    assert!(total(&cascaded) < total(&global));
    assert!(total(&global) < total(&base));
    let expected_global: f64 = (1..=4).map(|k| montecarlo::expected_round_probability(&global, k).unwrap()).sum();
    assert!((expected_global - analytics::imperfect_total(&p, &eff, 4).unwrap()).abs() < 1e-12);
}
