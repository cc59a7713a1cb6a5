mod common;

use common::{random_dense, rng};
use proptest::prelude::*;
use ttmax_core::altproj::{alternating_projections, binary_search_epsilon_with_witness, project_ball};
use ttmax_core::config::KeyValues;
use ttmax_core::experiment::{
    fit_rates, fit_rates_csv, parse_csv, run_grid, to_csv, Aggregator, ExperimentGrid, ExperimentRow, RepLabel,
};
use ttmax_core::generators::{random_tt, random_tt_init};
use ttmax_core::plot::{emit_plots, group_series, render_svg, Series};
use ttmax_core::{binary_search_epsilon, identity_tensor, APConfig, Error, GeneratorKind};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ball_projection_is_the_entrywise_clamp(seed in any::<u64>(), eps in 0.0f64..2.0) {
        let mut g = rng(seed);
        let a = random_dense(&mut g, &[3, 4]);
        let x = random_dense(&mut g, &[3, 4]);
        let y = project_ball(&x, &a, eps).unwrap();
        // exact up to rounding of a + eps near the boundary
        let ulp = 4.0 * f64::EPSILON * (a.max_abs() + x.max_abs() + eps);
        for ((&yv, &xv), &av) in y.values().iter().zip(x.values()).zip(a.values()) {
            let want = if xv > av + eps { av + eps } else if xv < av - eps { av - eps } else { xv };
            prop_assert!((yv - want).abs() <= ulp, "{yv} vs {want}");
        }
        prop_assert!(y.max_abs_diff(&a).unwrap() <= eps + ulp);
        prop_assert!(project_ball(&y, &a, eps).unwrap().max_abs_diff(&y).unwrap() <= ulp);
        let dist = x.max_abs_diff(&y).unwrap();
        let excess = (x.max_abs_diff(&a).unwrap() - eps).max(0.0);
        prop_assert!((dist - excess).abs() <= 1e-12);
    }
}

#[test]
fn reported_epsilon_is_certified_by_the_witness() {
    for seed in 0..6 {
        let a = random_dense(&mut rng(seed), &[5, 4, 3]);
        let mut cfg = APConfig::new(2).with_seed(seed);
        cfg.max_iter = 60;
        let found = binary_search_epsilon_with_witness(&a, &cfg, 2).unwrap();
        assert!(found.witness.max_rank() <= 2);
        let residual = a.max_abs_diff(&found.witness.to_dense().unwrap()).unwrap();
        assert!((residual - found.report.epsilon_achieved).abs() <= 1e-12, "{residual}");
        assert!(found.report.epsilon_achieved <= a.max_abs());
    }
}

#[test]
fn more_restarts_never_hurt_and_runs_repeat() {
    let (a, _) = identity_tensor(5, 3).unwrap();
    let mut cfg = APConfig::new(2).with_seed(11);
    cfg.max_iter = 80;
    let one = binary_search_epsilon(&a, &cfg, 1).unwrap();
    let three = binary_search_epsilon(&a, &cfg, 3).unwrap();
    assert!(three.epsilon_achieved <= one.epsilon_achieved);
    assert_eq!(one, binary_search_epsilon(&a, &cfg, 1).unwrap());
}

#[test]
fn ap_history_ends_at_the_reported_residual() {
    let (a, _) = identity_tensor(6, 2).unwrap();
    let cfg = APConfig::new(2);
    let x0 = random_tt_init(&[6, 6], 2, 3).unwrap();
    let run = alternating_projections(&a, 0.4, &cfg, &x0).unwrap();
    assert_eq!(run.residual_history.len(), run.report.iterations_used);
    let best = run.residual_history.iter().copied().fold(f64::INFINITY, f64::min);
    assert_eq!(best, run.best_residual);
    let check = a.max_abs_diff(&run.best_witness.to_dense().unwrap()).unwrap();
    assert!((check - run.best_residual).abs() < 1e-12);
}

#[test]
fn exact_rank_is_found() {
    for seed in 0..4 {
        let a = random_tt(&[4, 3, 4], &[2, 2], seed).unwrap().to_dense().unwrap();
        for r in [2, 3] {
            let rep = binary_search_epsilon(&a, &APConfig::new(r).with_seed(seed), 1).unwrap();
            assert!(rep.epsilon_achieved <= 1e-6, "r={r}: {}", rep.epsilon_achieved);
        }
    }
}

fn small_grid(ranks: Vec<usize>) -> ExperimentGrid {
    let mut grid = ExperimentGrid::new(GeneratorKind::Identity, vec![2], vec![6], ranks);
    grid.repetitions = 2;
    grid.base_seed = 13;
    grid.ap.max_iter = 60;
    grid
}

#[test]
fn grid_rows_aggregate_and_subset_reproducibly() {
    let full = run_grid(&small_grid(vec![1, 2, 6])).unwrap();
    assert_eq!(full.len(), 3 * 2 + 3);
    for r in [1, 2, 6] {
        let reps: Vec<&ExperimentRow> = full.iter().filter(|x| x.r == r && !x.is_aggregate()).collect();
        let agg = full.iter().find(|x| x.r == r && x.is_aggregate()).unwrap();
        assert_eq!(agg.rep, RepLabel::Aggregate(Aggregator::Min));
        let min = reps.iter().map(|x| x.epsilon).fold(f64::INFINITY, f64::min);
        assert_eq!(agg.epsilon, min);
    }
    // r = n is exactly representable
    let exact = full.iter().find(|x| x.r == 6 && x.is_aggregate()).unwrap();
    assert!(exact.epsilon <= 1e-9);
    // per-cell seeds: a subgrid reproduces its rows bit for bit
    let sub = run_grid(&small_grid(vec![2])).unwrap();
    for row in sub.iter().filter(|x| !x.is_aggregate()) {
        let twin = full.iter().find(|x| x.r == 2 && x.rep == row.rep).unwrap();
        assert_eq!(twin, row);
    }
    let csv = to_csv(&full);
    assert_eq!(csv, to_csv(&run_grid(&small_grid(vec![1, 2, 6])).unwrap()));
    assert_eq!(parse_csv(&csv).unwrap(), full);
}

#[test]
fn grid_config_validation() {
    let kv = KeyValues::parse("kind = identity\norders = 2\nsizes = 4\nranks = 1,2\naggregator = median\n").unwrap();
    assert!(ExperimentGrid::from_config(&kv).is_err());
    let kv = KeyValues::parse("kind = uniform\norders = 3\nsizes = 200\nranks = 2\n").unwrap();
    assert!(matches!(ExperimentGrid::from_config(&kv), Err(Error::TooLarge { .. })));
    let kv = KeyValues::parse("kind = random_tt\norders = 2\nsizes = 4\nranks = 2\n").unwrap();
    assert!(ExperimentGrid::from_config(&kv).is_err());
    let kv = KeyValues::parse("kind = uniform\norders = 2\nsizes = 4\nranks = 2\ncolour = red\n").unwrap();
    assert!(ExperimentGrid::from_config(&kv).is_err());
    let kv = KeyValues::parse("kind = uniform\norders = 2, 3\nsizes = 4 8\nranks = 2\nrepetitions = 3\n").unwrap();
    let grid = ExperimentGrid::from_config(&kv).unwrap();
    assert_eq!((grid.orders, grid.sizes, grid.repetitions), (vec![2, 3], vec![4, 8], 3));
    assert_eq!(grid.aggregator, Aggregator::Median);
}

fn synthetic(n: usize, r: usize, eps: f64) -> ExperimentRow {
    ExperimentRow {
        kind: GeneratorKind::Uniform,
        d: 3,
        n,
        r,
        rep: RepLabel::Aggregate(Aggregator::Median),
        seed: 0,
        epsilon: eps,
        iterations: 1,
        converged: true,
        elapsed_ms: 0,
    }
}

#[test]
fn rate_fit_recovers_planted_exponents() {
    let (alpha, beta, c) = (0.7, 0.45, 0.3f64);
    let mut rows = Vec::new();
    for n in [20, 40, 80] {
        for r in [2, 4, 8, 16] {
            rows.push(synthetic(n, r, c * ((n - r) as f64).powf(alpha) * (r as f64).powf(-beta)));
        }
    }
    let fits = fit_rates(&rows).unwrap();
    assert_eq!(fits.len(), 1);
    assert!((fits[0].alpha.unwrap() - alpha).abs() < 1e-6);
    assert!((fits[0].beta.unwrap() - beta).abs() < 1e-6);
    assert!((fits[0].log_constant - c.ln()).abs() < 1e-6);
    assert!(fits[0].residual < 1e-9);
    assert_eq!(fit_rates_csv(&to_csv(&rows)).unwrap(), fits);

    let flat: Vec<ExperimentRow> = [2, 4, 8, 16].iter().map(|&r| synthetic(40, r, 0.25)).collect();
    let fit = &fit_rates(&flat).unwrap()[0];
    assert!(fit.beta.unwrap().abs() < 1e-9);
    assert!(fit_rates(&flat[..3]).is_err());
}

#[test]
fn plots_have_one_curve_and_legend_per_size() {
    let empty = render_svg("t", "x", "y", &[]);
    assert!(empty.contains("class=\"axes\"") && !empty.contains("<polyline"));
    let one = render_svg("t", "x", "y", &[Series { label: "n = 4".into(), points: vec![(1.0, 0.5), (2.0, 0.25)] }]);
    assert_eq!(one.matches("<polyline").count(), 1);

    let mut rows = Vec::new();
    for n in [20, 40, 80] {
        for r in [2, 4] {
            rows.push(synthetic(n, r, 1.0 / r as f64));
        }
    }
    let groups = group_series(&rows);
    assert_eq!(groups.len(), 1);
    let dir = tempfile::tempdir().unwrap();
    let files = emit_plots(&rows, dir.path()).unwrap();
    assert_eq!(files.len(), 1);
    let svg = std::fs::read_to_string(&files[0]).unwrap();
    assert_eq!(svg.matches("class=\"legend\"").count(), 3);
    assert_eq!(svg.matches("<polyline").count(), 3);
    let none = emit_plots(&[], &dir.path().join("none")).unwrap();
    assert!(none[0].ends_with("empty.svg"));
}
