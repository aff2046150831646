use super::*;

fn base_cfg() -> SimConfig {
    SimConfig {
        k: 3,
        seed: 11,
        snr_db_start: 0.0,
        snr_db_stop: 20.0,
        snr_db_step: 10.0,
        trials: 3,
        symbols: 100,
        strategy: StrategyKind::Cn,
        objective: Objective::MinMaxSnr,
        u: 5,
        schemes: SchemeScope::First,
        noise: true,
        force_exhaustive: false,
    }
}

#[test]
fn config_validation_rejects_bad_inputs() {
    let ok = base_cfg();
    assert!(ok.validate().is_ok());
    for bad in [
        SimConfig { k: 7, ..ok.clone() },
        SimConfig { snr_db_step: 0.0, ..ok.clone() },
        SimConfig { snr_db_stop: -5.0, ..ok.clone() },
        SimConfig { trials: 0, ..ok.clone() },
        SimConfig { symbols: 0, ..ok.clone() },
        SimConfig { u: 0, ..ok.clone() },
        SimConfig { schemes: SchemeScope::Count(3), ..ok.clone() },
    ] {
        assert!(matches!(bad.validate(), Err(SimError::Config(_))), "{bad:?}");
    }
    // optimal strategy does not need u
    let opt = SimConfig { strategy: StrategyKind::Optimal, u: 0, ..ok };
    assert!(opt.validate().is_ok());
}

#[test]
fn snr_grid_is_inclusive_and_fp_safe() {
    let cfg = base_cfg();
    assert_eq!(cfg.snr_points(), vec![0.0, 10.0, 20.0]);
    let fine = SimConfig {
        snr_db_start: 0.0,
        snr_db_stop: 1.0,
        snr_db_step: 0.1,
        ..base_cfg()
    };
    let pts = fine.snr_points();
    assert_eq!(pts.len(), 11);
    assert!((pts[10] - 1.0).abs() < 1e-12);
}

#[test]
fn canonical_config_line_is_stable() {
    let line = base_cfg().canonical();
    assert_eq!(
        line,
        "k=3 seed=11 snr_db=0:10:20 trials=3 symbols=100 mod=qpsk \
         strategy=cn objective=minmax u=5 schemes=first noise=on"
    );
}

#[test]
fn spearman_oracles() {
    let x = [1.0, 2.0, 3.0, 4.0, 5.0];
    let y_up = [2.0, 4.0, 8.0, 16.0, 32.0];
    let y_down = [5.0, 4.0, 3.0, 2.0, 1.0];
    assert!((spearman(&x, &y_up) - 1.0).abs() < 1e-12);
    assert!((spearman(&x, &y_down) + 1.0).abs() < 1e-12);
    assert_eq!(spearman(&x, &[7.0; 5]), 0.0);
    // tie handling: hand-computed average-rank correlation
    let a = [1.0, 1.0, 2.0, 3.0];
    let b = [10.0, 20.0, 30.0, 40.0];
    let ra = [1.5, 1.5, 3.0, 4.0];
    let rb = [1.0, 2.0, 3.0, 4.0];
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (ma, mb) = (mean(&ra), mean(&rb));
    let cov: f64 = ra.iter().zip(&rb).map(|(p, q)| (p - ma) * (q - mb)).sum();
    let va: f64 = ra.iter().map(|p| (p - ma) * (p - ma)).sum();
    let vb: f64 = rb.iter().map(|q| (q - mb) * (q - mb)).sum();
    let want = cov / (va * vb).sqrt();
    assert!((spearman(&a, &b) - want).abs() < 1e-12);
}

#[test]
fn ser_run_is_deterministic_and_noise_free_is_exact() {
    let cfg = base_cfg();
    let a = run_ser(&cfg).unwrap();
    let b = run_ser(&cfg).unwrap();
    for (ra, rb) in a.rows.iter().zip(&b.rows) {
        assert_eq!(ra.errors, rb.errors);
        assert_eq!(ra.symbols, rb.symbols);
    }
    assert_eq!(a.skipped_draws, 0);
    assert_eq!(a.rows[0].symbols, 3 * 100 * 9);

    let clean = SimConfig { noise: false, ..cfg };
    let out = run_ser(&clean).unwrap();
    for row in &out.rows {
        assert_eq!(row.errors, 0, "noise-free SER must be exactly zero");
    }
}

#[test]
fn ser_improves_with_snr() {
    let cfg = SimConfig {
        snr_db_start: -5.0,
        snr_db_stop: 25.0,
        snr_db_step: 30.0,
        trials: 5,
        symbols: 300,
        ..base_cfg()
    };
    let out = run_ser(&cfg).unwrap();
    assert_eq!(out.rows.len(), 2);
    assert!(
        out.rows[0].ser > out.rows[1].ser,
        "{} vs {}",
        out.rows[0].ser,
        out.rows[1].ser
    );
}

#[test]
fn sumrate_grows_with_snr_and_optimal_beats_random_one() {
    let cfg = SimConfig {
        trials: 6,
        objective: Objective::SumRate,
        strategy: StrategyKind::Optimal,
        u: 0,
        ..base_cfg()
    };
    let opt = run_sumrate(&cfg).unwrap();
    assert!(opt.rows.windows(2).all(|w| w[0].mean_sum_rate < w[1].mean_sum_rate));

    let rnd = run_sumrate(&SimConfig {
        strategy: StrategyKind::Random,
        u: 1,
        ..cfg
    })
    .unwrap();
    for (o, r) in opt.rows.iter().zip(&rnd.rows) {
        assert!(o.mean_sum_rate >= r.mean_sum_rate);
    }
}

#[test]
fn correlation_records_are_consistent() {
    let cfg = SimConfig { trials: 1, ..base_cfg() };
    let out = run_correlation(&cfg).unwrap();
    assert_eq!(out.records.len(), 216);
    // the true-metric column is sorted best-first
    assert!(out
        .records
        .windows(2)
        .all(|w| w[0].true_metric_desc >= w[1].true_metric_desc));
    // the surrogate column is sorted predicted-best-first
    assert!(out
        .records
        .windows(2)
        .all(|w| w[0].surrogate_value <= w[1].surrogate_value));
    assert!(out.spearman.abs() <= 1.0 + 1e-12);
    // both orderings cover the same multiset of true values
    let mut a: Vec<f64> = out.records.iter().map(|r| r.true_metric_desc).collect();
    let mut b: Vec<f64> = out.records.iter().map(|r| r.surrogate_ordered_true).collect();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    assert_eq!(a, b);
    // random strategy cannot drive a correlation run
    let bad = SimConfig { strategy: StrategyKind::Random, ..cfg };
    assert!(matches!(run_correlation(&bad), Err(SimError::Config(_))));
}

#[test]
fn validation_campaign_clean_and_corrupted() {
    let cfg = SimConfig { trials: 2, ..base_cfg() };
    let clean = run_validate(&cfg, false).unwrap();
    assert!(clean.pass(), "{clean:?}");
    assert_eq!(clean.sets_checked, 2 * 216);
    assert!(clean.max_residual < VALIDATION_TOL);

    let corrupted = run_validate(&cfg, true).unwrap();
    assert_eq!(corrupted.failures, 0, "corruption must always be flagged");
    assert_eq!(corrupted.sets_checked, 2 * 216);
}

#[test]
fn csv_layouts() {
    let cfg = SimConfig { trials: 2, symbols: 50, ..base_cfg() };
    let ser = run_ser(&cfg).unwrap();
    let text = ser_csv(&cfg, &ser);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        format!("# config: {}", cfg.canonical())
    );
    assert_eq!(
        lines.next().unwrap(),
        "snr_db,strategy,objective,surrogate,u,schemes,errors,symbols,ser"
    );
    let first = lines.next().unwrap();
    assert!(first.starts_with("0,cn,minmax,cn,5,first,"), "{first}");
    assert_eq!(text.lines().count(), 2 + ser.rows.len());

    let sr = run_sumrate(&cfg).unwrap();
    let text = sumrate_csv(&cfg, &sr);
    assert!(text
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("snr_db,strategy,objective,surrogate,u,schemes,mean_sum_rate,draws"));

    let corr_cfg = SimConfig { trials: 1, ..cfg };
    let corr = run_correlation(&corr_cfg).unwrap();
    let text = correlation_csv(&corr_cfg, &corr);
    assert!(text
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("rank,true_metric_desc,surrogate_ordered_true,surrogate_value"));
    assert!(text.lines().last().unwrap().starts_with("# spearman="));

    let ch = draw_channel(3, 9, 0);
    let dump = dump_channel_csv(&ch);
    assert_eq!(dump.matches("# H ").count(), 9);
    assert!(dump.contains("# H 1 1\n"));
    // each matrix contributes 6 rows of 12 numbers
    assert_eq!(dump.lines().count(), 9 * 7);
    let row = dump.lines().nth(1).unwrap();
    assert_eq!(row.split(',').count(), 12);
    for cell in row.split(',') {
        cell.parse::<f64>().unwrap();
    }
}
