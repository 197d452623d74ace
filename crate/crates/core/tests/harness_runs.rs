//! End-to-end harness checks: protocol accounting, determinism, the starred
//! circuit's trace identity, backend comparison, and file outputs.

use photal::harness::{
    compare_to_analytic, cost_ratios, emit_outputs, read_trace_csv, run_suite, BackendChoice,
    ClassifierKind, ExperimentConfig, StrategyChoice,
};
use std::f64::consts::{FRAC_PI_2, PI};
use std::fs;

fn cfg(classifier: ClassifierKind, pattern: u8, strategy: StrategyChoice) -> ExperimentConfig {
    ExperimentConfig::new(classifier, pattern, strategy)
}

#[test]
fn evaluation_accounting_matches_closed_forms() {
    let suite = run_suite(&cfg(ClassifierKind::Vqc, 1, StrategyChoice::NoAl), 5).unwrap();
    for run in &suite.runs {
        assert_eq!(run.trace.total_evaluations(), 35 * 2 * 20);
        assert_eq!(run.trace.rows.last().unwrap().labeled_size, 20);
    }

    // USAMP: 10 rounds of 10 epochs at 2 evals/item on 2+r items, plus the
    // shrinking pool scans 18, 17, ..., 9.
    let expected_usamp: u64 = (1..=10u64).map(|r| 10 * 2 * (2 + r) + (19 - r)).sum();
    let suite = run_suite(&cfg(ClassifierKind::Vqc, 1, StrategyChoice::Usamp), 5).unwrap();
    for run in &suite.runs {
        assert_eq!(run.trace.total_evaluations(), expected_usamp);
        let sizes: Vec<usize> = run.selections.iter().map(|s| s.labeled_size_after).collect();
        assert_eq!(sizes, (3..=12).collect::<Vec<_>>());
        assert!(run.trace.rows.iter().all(|r| r.labeled_size <= 20));
    }

    // QBC: 3 seeded items, free selection.
    let expected_qbc: u64 = (1..=10u64).map(|r| 10 * 5 * (3 + r)).sum();
    let suite = run_suite(&cfg(ClassifierKind::Nevqc, 2, StrategyChoice::Qbc), 5).unwrap();
    for run in &suite.runs {
        assert_eq!(run.trace.total_evaluations(), expected_qbc);
    }
}

#[test]
fn rotation_accounting_matches_route_formula() {
    // Every VQC epoch on a fixed pool sweeps the same U-route.
    let mut config = cfg(ClassifierKind::Vqc, 1, StrategyChoice::NoAl);
    config.pool_scheme = photal::datasets::PoolScheme::EvenlySpaced;
    let suite = run_suite(&config, 5).unwrap();
    let span = PI * 19.0 / 20.0; // even 20-point grid spread
    let per_epoch = 2.0 * span + FRAC_PI_2;
    for run in &suite.runs {
        let total = run.trace.rows.last().unwrap().rotation_distance;
        assert!((total - 35.0 * per_epoch).abs() < 1e-9, "total {total}");
        assert!(run.chained_rotation > 0.0);
    }
}

#[test]
fn suites_are_deterministic_and_star_matches_plain_circuit() {
    for backend in [BackendChoice::Analytic, BackendChoice::Sampled] {
        let mut base = cfg(ClassifierKind::Nevqc, 2, StrategyChoice::Usamp);
        base.backend = backend;
        base.non_al_epochs = 10;
        base.al_rounds = 5;
        let a = run_suite(&base, 9).unwrap();
        let b = run_suite(&base, 9).unwrap();
        let mut star_cfg = base.clone();
        star_cfg.classifier = ClassifierKind::NevqcStar;
        let star = run_suite(&star_cfg, 9).unwrap();
        for ((ra, rb), rs) in a.runs.iter().zip(&b.runs).zip(&star.runs) {
            assert_eq!(ra.trace, rb.trace, "rerun must be bit-identical");
            assert_eq!(ra.trace, rs.trace, "starred circuit must reproduce the plain trace");
            assert_eq!(ra.final_params, rs.final_params);
        }
    }
}

#[test]
fn analytic_suite_compares_to_itself_with_zero_error() {
    let config = cfg(ClassifierKind::Vqc, 1, StrategyChoice::NoAl);
    let a = run_suite(&config, 3).unwrap();
    let b = run_suite(&config, 3).unwrap();
    let report = compare_to_analytic(&a, &b).unwrap();
    assert_eq!(report.loss_error, 0.0);
    assert_eq!(report.accuracy_error, 0.0);

    // Mismatched protocols are rejected.
    let other = run_suite(&cfg(ClassifierKind::Vqc, 2, StrategyChoice::NoAl), 3).unwrap();
    assert!(compare_to_analytic(&a, &other).is_err());
}

#[test]
fn backend_comparison_covers_selection_runs() {
    // Probe cadence differs between protocols (every five epochs without
    // selection, per round with it); the comparison pairs series of equal
    // length either way.
    let mut sampled_cfg = cfg(ClassifierKind::Nevqc, 3, StrategyChoice::Usamp);
    sampled_cfg.backend = BackendChoice::Sampled;
    sampled_cfg.shots = Some(800);
    sampled_cfg.al_rounds = 4;
    let mut analytic_cfg = sampled_cfg.clone();
    analytic_cfg.backend = BackendChoice::Analytic;
    analytic_cfg.shots = None;
    let sampled = run_suite(&sampled_cfg, 6).unwrap();
    let analytic = run_suite(&analytic_cfg, 6).unwrap();
    let report = compare_to_analytic(&sampled, &analytic).unwrap();
    assert!(report.loss_error.is_finite() && report.loss_error > 0.0);
    assert!((0.0..=1.0).contains(&report.accuracy_error));
    assert_eq!(report.per_run.len(), 4);
}

#[test]
fn cost_ratio_on_real_runs_is_well_formed() {
    let non_al = run_suite(&cfg(ClassifierKind::Vqc, 2, StrategyChoice::NoAl), 12).unwrap();
    let al = run_suite(&cfg(ClassifierKind::Vqc, 2, StrategyChoice::Usamp), 12).unwrap();
    let row = cost_ratios(&al, &non_al).unwrap();
    if row.matched {
        let lr = row.labeling_ratio.unwrap();
        let cr = row.computation_ratio.unwrap();
        assert!(lr > 0.0 && lr <= 0.65, "labeling ratio {lr}");
        assert!(cr >= 0.0, "computation ratio {cr}");
        assert!(row.labels_at_match.unwrap() <= 12);
    } else {
        assert!(row.labeling_ratio.is_none() && row.computation_ratio.is_none());
    }
}

/// Minimal XML well-formedness scan: quoted attributes, matched and properly
/// nested tags, a single root element.
fn assert_well_formed_xml(text: &str) {
    let mut stack: Vec<String> = Vec::new();
    let mut roots = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((i, ch)) = chars.next() {
        if ch != '<' {
            assert!(ch != '>', "stray '>' at byte {i}");
            continue;
        }
        let rest = &text[i + 1..];
        if rest.starts_with('?') {
            let end = rest.find("?>").expect("unterminated declaration");
            for _ in 0..end + 2 {
                chars.next();
            }
            continue;
        }
        let closing = rest.starts_with('/');
        if closing {
            chars.next();
        }
        let mut name = String::new();
        let mut self_closing = false;
        let mut in_quote = false;
        let mut name_done = false;
        let mut prev = ' ';
        for (_, c) in chars.by_ref() {
            match c {
                '"' => in_quote = !in_quote,
                '>' if !in_quote => {
                    self_closing = prev == '/';
                    break;
                }
                c if c.is_whitespace() && !in_quote => name_done = true,
                '/' if !in_quote => name_done = true,
                c if !name_done => name.push(c),
                _ => {}
            }
            prev = c;
        }
        assert!(!in_quote, "unterminated attribute quote");
        if closing {
            let open = stack.pop().unwrap_or_else(|| panic!("unmatched </{name}>"));
            assert_eq!(open, name, "mismatched close tag");
        } else if !self_closing {
            if stack.is_empty() {
                roots += 1;
            }
            stack.push(name);
        } else if stack.is_empty() {
            roots += 1;
        }
    }
    assert!(stack.is_empty(), "unclosed tags: {stack:?}");
    assert_eq!(roots, 1, "expected exactly one root element");
}

#[test]
fn emitted_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = cfg(ClassifierKind::Vqc, 3, StrategyChoice::Usamp);
    config.al_rounds = 4;
    let suite = run_suite(&config, 4).unwrap();
    let files = emit_outputs(&suite, dir.path()).unwrap();
    assert!(files.iter().all(|f| f.exists()));

    // Traces re-parse to the emitted values exactly.
    for run in &suite.runs {
        let path = dir.path().join(format!("trace_s{}.csv", run.seed_index));
        let back = read_trace_csv(&path).unwrap();
        assert_eq!(back, run.trace);
        let selections = dir.path().join(format!("selections_s{}.csv", run.seed_index));
        assert!(selections.exists());
        let text = fs::read_to_string(&selections).unwrap();
        assert_eq!(text.lines().count(), 1 + run.selections.len());
    }

    // Aggregate rows equal the probe-grid length.
    let agg = fs::read_to_string(dir.path().join("aggregate.csv")).unwrap();
    assert_eq!(agg.lines().count(), 1 + suite.curve.evaluations.len());

    // The chart is a standalone well-formed XML document.
    let svg = fs::read_to_string(dir.path().join("curves.svg")).unwrap();
    assert!(svg.starts_with("<?xml"));
    assert_well_formed_xml(&svg);

    // The config echo carries the resolved seeds and version.
    let echo = fs::read_to_string(dir.path().join("config.echo")).unwrap();
    for seed in suite.config.resolved_seeds(4) {
        assert!(echo.contains(&seed.to_string()));
    }
    assert!(echo.contains("artifact_version"));

    // Re-emitting produces byte-identical files.
    let dir2 = tempfile::tempdir().unwrap();
    let suite2 = run_suite(&config, 4).unwrap();
    emit_outputs(&suite2, dir2.path()).unwrap();
    for name in ["trace_s0.csv", "aggregate.csv", "curves.svg", "config.echo"] {
        assert_eq!(
            fs::read(dir.path().join(name)).unwrap(),
            fs::read(dir2.path().join(name)).unwrap(),
            "{name} differs between identical runs"
        );
    }
}
