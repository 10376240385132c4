mod common;

use common::*;
use ontorules::{generate_rules, simulate_cohort, CohortConfig, RuleKind};

/// |observed - n p| <= 3 sigma of Binomial(n, p).
fn within_three_sigma(observed: u64, trials: u64, p: f64) -> bool {
    let n = trials as f64;
    let sigma = (n * p * (1.0 - p)).sqrt();
    (observed as f64 - n * p).abs() <= 3.0 * sigma
}

#[test]
fn all_pass_rule_frequency_for_fixed_desired() {
    let tree = fixture("fig3_sql.json");
    let rules = generate_rules(&tree).unwrap();
    let config = CohortConfig {
        trials: 10_000,
        pass_probability: 0.5,
        seed: 2024,
        desired: Some(id("insert")),
    };
    let report = simulate_cohort(&tree, &rules, &config).unwrap();
    let fired = report.count("select#1").unwrap();
    assert!(
        within_three_sigma(fired, 10_000, 1.0 / 16.0),
        "select#1 fired {fired}"
    );
    assert_eq!(
        report.rule_counts.iter().map(|r| r.count).sum::<u64>(),
        10_000
    );
    // Only SELECT's 16 rules can fire for `insert`.
    assert!(report
        .rule_counts
        .iter()
        .filter(|r| r.count > 0)
        .all(|r| r.rule.starts_with("select#")));
}

#[test]
fn all_pass_rule_frequency_for_uniform_desired() {
    let tree = fixture("fig3_sql.json");
    let rules = generate_rules(&tree).unwrap();
    let config = CohortConfig {
        trials: 10_000,
        pass_probability: 0.5,
        seed: 7,
        desired: None,
    };
    let report = simulate_cohort(&tree, &rules, &config).unwrap();
    // Six drivable concepts (five prerequisite links plus the ground).
    let fired = report.count("select#1").unwrap();
    assert!(
        within_three_sigma(fired, 10_000, 1.0 / 6.0 / 16.0),
        "select#1 fired {fired}"
    );
    let defaults = report.count("default").unwrap();
    assert!(
        within_three_sigma(defaults, 10_000, 1.0 / 6.0),
        "default fired {defaults}"
    );
    assert_eq!(report.kinds.default, defaults);
}

#[test]
fn certain_outcomes() {
    let tree = fixture("fig3_sql.json");
    let rules = generate_rules(&tree).unwrap();
    let run = |p| {
        simulate_cohort(
            &tree,
            &rules,
            &CohortConfig {
                trials: 2_000,
                pass_probability: p,
                seed: 1,
                desired: None,
            },
        )
        .unwrap()
    };

    let pass = run(1.0);
    assert_eq!(pass.kinds.remediate, 0);
    assert_eq!(pass.kinds.advance + pass.kinds.default, 2_000);

    let fail = run(0.0);
    assert_eq!(fail.kinds.advance, 0);
    // The all-fail vector is the last combination of each parent.
    let all_fail: Vec<String> = rules
        .rules
        .iter()
        .filter(|r| r.kind != RuleKind::Default && r.conditions.iter().all(|c| !c.state.is_pass()))
        .map(|r| r.id.clone())
        .collect();
    assert_eq!(
        all_fail,
        ["select#16", "insert#4", "update#2", "delete#2", "join#4"]
    );
    let fired: u64 = all_fail.iter().map(|id| fail.count(id).unwrap()).sum();
    assert_eq!(fired + fail.kinds.default, 2_000);
}

#[test]
fn three_state_cohort_stays_consistent() {
    let tree = fixture("fig3_sql.json").with_states(3).unwrap();
    let rules = generate_rules(&tree).unwrap();
    let report = simulate_cohort(
        &tree,
        &rules,
        &CohortConfig {
            trials: 3_000,
            pass_probability: 0.3,
            seed: 99,
            desired: None,
        },
    )
    .unwrap();
    assert_eq!(report.rule_counts.len(), rules.rules.len());
    assert_eq!(
        report.rule_counts.iter().map(|r| r.count).sum::<u64>(),
        3_000
    );
    assert_eq!(
        report.kinds.advance + report.kinds.remediate + report.kinds.default,
        3_000
    );
}
