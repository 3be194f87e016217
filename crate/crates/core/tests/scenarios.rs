//! End-to-end batch scenarios: fault localization, camera conditions,
//! wireless adversaries and report shape.

mod common;

use common::{check_fault_case, fault_case, CATEGORIES};
use oobsim_core::decoder::{FailureCause, Verdict};
use oobsim_core::harness::{run_scenario, BatchReport, FaultSpec, HarnessError, ScenarioConfig};
use oobsim_core::protocol::{
    Action, AdversaryPolicy, Decision, MatchStatus, Round, SessionId, Substitution,
};
use oobsim_core::BitString;

fn config(n: usize, seed: u64) -> ScenarioConfig {
    ScenarioConfig {
        n,
        seed,
        ..ScenarioConfig::default()
    }
}

/// A node passes only if the sink read exactly what it showed and bound it
/// to its own session.
fn assert_safe(report: &BatchReport) {
    for p in &report.per_node {
        if p.verdict.passed() {
            assert_eq!(p.extracted_sas, p.displayed_sas, "node {}", p.node);
            assert_eq!(p.matched_session, Some(p.session_id), "node {}", p.node);
            assert_eq!(p.sas_status, Some(MatchStatus::Used));
        }
        if p.bootstrap_delivered {
            assert!(p.sink_accepted && !p.admin_turnoff, "node {}", p.node);
        }
    }
}

#[test]
fn fault_categories_are_localized() {
    for cat in CATEGORIES {
        for seed in 0..10 {
            let case = fault_case(cat, 1000 + seed);
            check_fault_case(&case).unwrap_or_else(|e| panic!("{cat:?}: {e}"));
        }
    }
}

#[test]
fn small_displacement_tolerated() {
    let mut cfg = config(9, 4);
    cfg.faults = vec![FaultSpec::Displacement {
        dx: 1.0,
        dy: -1.0,
        from: 2,
        to: 13,
    }];
    let out = run_scenario(&cfg).unwrap();
    assert_eq!(out.report.batch.tallies.passed, 9);
}

#[test]
fn large_displacement_never_passes_wrong_values() {
    for seed in 0..5 {
        let mut cfg = config(9, seed);
        cfg.faults = vec![FaultSpec::Displacement {
            dx: 30.0,
            dy: 0.0,
            from: 4,
            to: 9,
        }];
        let out = run_scenario(&cfg).unwrap();
        assert_safe(&out.report);
        assert!(out.report.batch.tallies.passed < 9);
    }
}

#[test]
fn camera_distance() {
    let mut cfg = config(16, 8);
    cfg.faults = vec![FaultSpec::DistanceScale { factor: 0.6 }];
    assert_eq!(run_scenario(&cfg).unwrap().report.batch.tallies.passed, 16);

    cfg.faults = vec![FaultSpec::DistanceScale { factor: 0.2 }];
    match run_scenario(&cfg) {
        Err(HarnessError::BatchAborted { attempts, .. }) => assert_eq!(attempts, 2),
        other => panic!("expected abort, got {other:?}"),
    }

    cfg.faults = vec![FaultSpec::DistanceScale { factor: 3.0 }];
    assert!(matches!(run_scenario(&cfg), Err(HarnessError::Encoder(_))));
}

#[test]
fn challenge_substitution_fails_only_its_node() {
    let mut mask = BitString::zeros(20);
    mask.flip(7);
    let mut cfg = config(8, 21);
    cfg.adversary = AdversaryPolicy::pass_through().with(
        SessionId(3),
        Round::Two,
        Action::Substitute(Substitution::RbXor(mask)),
    );
    let out = run_scenario(&cfg).unwrap();
    assert_safe(&out.report);
    for p in &out.report.per_node {
        if p.node == 3 {
            assert_eq!(p.verdict, Verdict::Failed(FailureCause::SasMismatch));
            assert_eq!(p.node_decision, Some(Decision::Rejected));
            assert!(!p.sink_accepted && !p.bootstrap_delivered);
        } else {
            assert!(p.verdict.passed() && p.bootstrap_delivered);
        }
    }
}

#[test]
fn tampered_commitment_is_reported() {
    let mut cfg = config(5, 2);
    cfg.adversary = AdversaryPolicy::pass_through().with(
        SessionId(1),
        Round::One,
        Action::Substitute(Substitution::PkA(vec![9; 8])),
    );
    let out = run_scenario(&cfg).unwrap();
    let p = &out.report.per_node[1];
    assert!(p.displayed);
    assert!(p.wireless_failure.is_some());
    assert_eq!(p.verdict, Verdict::Failed(FailureCause::SasMismatch));
    assert!(!p.sink_accepted);
    assert_eq!(out.report.batch.tallies.passed, 4);
}

#[test]
fn admin_error_rate_only_changes_decisions() {
    let mut cfg = config(16, 17);
    let clean = run_scenario(&cfg).unwrap().report;
    cfg.admin_error_rate = 0.5;
    let noisy = run_scenario(&cfg).unwrap().report;
    let flipped = noisy.per_node.iter().filter(|p| p.admin_turnoff).count();
    assert!(flipped > 0 && flipped < 16);
    for (a, b) in clean.per_node.iter().zip(&noisy.per_node) {
        assert_eq!(a.verdict, b.verdict);
        assert_eq!(b.bootstrap_delivered, !b.admin_turnoff);
    }
}

#[test]
fn report_json_roundtrip() {
    let mut cfg = config(6, 30);
    cfg.faults = vec![
        FaultSpec::SyncMissing { node: 0 },
        FaultSpec::SasBitFlip {
            node: 5,
            bits: vec![0],
        },
    ];
    let report = run_scenario(&cfg).unwrap().report;
    let json = report.to_json();
    let back: BatchReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back.to_json(), json);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["per_node"][0]["verdict"], "failed");
    assert_eq!(v["per_node"][0]["cause"], "sync_error");
    assert_eq!(v["per_node"][1]["verdict"], "passed");
    assert_eq!(v["per_node"][5]["cause"], "sas_mismatch");
}
