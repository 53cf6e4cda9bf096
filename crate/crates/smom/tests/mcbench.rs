use proptest::prelude::*;
use smom::distributions::{estimate, sample, DistributionId, RecipeId};
use smom::mcbench::{
    compare_table, ma_q_cauchy, nakagami_rounding_study, parse_reference_csv, run_scenario,
    run_scenario_with_threads, PrintedValue, ReferenceCell, ScenarioConfig, SimulationTable,
    TolSpec, CSV_HEADER,
};
use smom::numeric::median;
use smom::rng::split_seed;

fn gamma_config(reps: usize, seed: u64) -> ScenarioConfig {
    ScenarioConfig::new(
        DistributionId::Gamma,
        vec![vec![1.0, 1.0], vec![2.0, 0.5], vec![0.5, 2.0]],
        vec!["MO".into(), "LOG".into(), "ST".into(), "ML".into()],
        50,
        reps,
        seed,
    )
}

fn exact_reference(table: &SimulationTable) -> Vec<ReferenceCell> {
    table
        .cells
        .iter()
        .map(|c| ReferenceCell {
            theta_index: c.theta_index,
            recipe: c.recipe.clone(),
            param_index: c.param_index,
            bias: Some(PrintedValue {
                value: c.bias,
                half_ulp: 0.0,
            }),
            mse: Some(PrintedValue {
                value: c.mse,
                half_ulp: 0.0,
            }),
            ne: Some(c.ne_percent),
        })
        .collect()
}

#[test]
fn single_replication_has_zero_spread() {
    let cfg = ScenarioConfig::new(
        DistributionId::Gaussian,
        vec![vec![1.0, 2.0]],
        vec!["MO".into()],
        30,
        1,
        9,
    );
    let table = run_scenario(&cfg).unwrap();
    let xs = sample(
        &DistributionId::Gaussian,
        &[1.0, 2.0],
        30,
        split_seed(9, 0, 0),
    )
    .unwrap();
    let est = estimate(&"gaussian:MO".parse::<RecipeId>().unwrap(), &xs).unwrap();
    for c in &table.cells {
        let err = est.ok_theta().unwrap()[c.param_index] - [1.0, 2.0][c.param_index];
        assert!((c.bias - err).abs() < 1e-14);
        assert!((c.mse - err * err).abs() < 1e-14);
        assert_eq!(c.ne_percent, 0);
        assert_eq!(c.ok_count, 1);
    }
}

#[test]
fn tables_are_identical_across_thread_counts() {
    let cfg = gamma_config(200, 77);
    let one = run_scenario_with_threads(&cfg, Some(1)).unwrap();
    let four = run_scenario_with_threads(&cfg, Some(4)).unwrap();
    let again = run_scenario_with_threads(&cfg, Some(3)).unwrap();
    assert_eq!(one.to_csv(), four.to_csv());
    assert_eq!(one.to_csv(), again.to_csv());
    assert_eq!(one.to_json().unwrap(), four.to_json().unwrap());
    assert!(one.to_csv().starts_with(CSV_HEADER));
    assert_eq!(one.cells.len(), 3 * 4 * 2);
}

#[test]
fn non_existence_is_counted() {
    let cfg = ScenarioConfig::new(
        DistributionId::Lomax,
        vec![vec![0.5, 1.0]],
        vec!["MO".into()],
        5,
        400,
        3,
    );
    let table = run_scenario(&cfg).unwrap();
    for c in &table.cells {
        assert!(c.ne_percent > 0);
        assert!(c.ok_count < 400);
        let expected = (100.0 * (400 - c.ok_count) as f64 / 400.0).round() as u8;
        assert_eq!(c.ne_percent, expected);
        let failed: usize = c
            .status_counts
            .iter()
            .filter(|(k, _)| k.as_str() != "OK")
            .map(|(_, v)| v)
            .sum();
        assert_eq!(failed, 400 - c.ok_count);
    }
    let mut sq = 0.0;
    let mut ok = 0;
    for r in 0..400 {
        let xs = sample(&DistributionId::Lomax, &[0.5, 1.0], 5, split_seed(3, 0, r)).unwrap();
        let est = estimate(&"lomax:MO".parse::<RecipeId>().unwrap(), &xs).unwrap();
        if let Some(t) = est.ok_theta() {
            sq += (t[0] - 0.5).powi(2);
            ok += 1;
        }
    }
    let c = table.cell(0, "lomax:MO", 0).unwrap();
    assert_eq!(c.ok_count, ok);
    assert!((c.mse - sq / ok as f64).abs() <= 1e-10 * c.mse);
}

#[test]
fn ma_zero_is_independent_cauchy() {
    let xs = ma_q_cauchy(1_000, 0, 2.0, 1.5, 4).unwrap();
    assert_eq!(xs.len(), 1_000);
    let ys = sample(&DistributionId::Cauchy, &[2.0, 1.5], 1_000, 4).unwrap();
    let (mx, my) = (median(&xs), median(&ys));
    assert!((mx - 2.0).abs() < 0.25 && (my - 2.0).abs() < 0.25);
}

#[test]
fn ma_marginal_and_dependence() {
    let q = 5;
    let xs = ma_q_cauchy(100_000, q, 0.0, 1.0, 8).unwrap();
    assert!(median(&xs).abs() < 0.02);
    let a: Vec<f64> = xs.iter().map(|x| x.atan()).collect();
    let n = a.len() as f64;
    let m = a.iter().sum::<f64>() / n;
    let var = a.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
    let acf = |lag: usize| {
        a.windows(lag + 1)
            .map(|w| (w[0] - m) * (w[lag] - m))
            .sum::<f64>()
            / (n * var)
    };
    assert!(acf(q + 1).abs() < 4.0 / n.sqrt(), "{}", acf(q + 1));
    assert!(acf(1) > 10.0 / n.sqrt());
}

#[test]
fn compare_table_behaviour() {
    let table = run_scenario(&gamma_config(100, 5)).unwrap();
    let reference = exact_reference(&table);
    let report = compare_table(&table, &reference, &TolSpec::default()).unwrap();
    assert_eq!(report.pass_fraction(), 1.0);

    let mut doubled = reference.clone();
    let target = doubled
        .iter_mut()
        .find(|c| c.mse.as_ref().unwrap().value > 0.0)
        .unwrap();
    let m = target.mse.as_mut().unwrap();
    m.value *= 2.0;
    let report = compare_table(&table, &doubled, &TolSpec::default()).unwrap();
    assert_eq!(report.checks.iter().filter(|c| !c.pass()).count(), 1);

    let mut missing = reference.clone();
    missing[0].theta_index = 17;
    assert!(compare_table(&table, &missing, &TolSpec::default()).is_err());
}

#[test]
fn printed_values() {
    let p = PrintedValue::parse("0.042").unwrap();
    assert_eq!(p.value, 0.042);
    assert!((p.half_ulp - 5e-4).abs() < 1e-18);
    let p = PrintedValue::parse("9.79e-4").unwrap();
    assert!((p.half_ulp - 5e-7).abs() < 1e-20);
    assert!(PrintedValue::parse("NaN").unwrap().value.is_nan());
    assert!(PrintedValue::parse("abc").is_err());
    let cells = parse_reference_csv(
        "# provenance\ntheta_index,recipe,param_index,bias,mse,ne\n0,LOG,0,0.051,0.044,\n",
    )
    .unwrap();
    assert_eq!(cells.len(), 1);
    assert_eq!(cells[0].ne, None);
    assert_eq!(cells[0].recipe, "LOG");
}

#[test]
fn scenario_validation() {
    let mut cfg = gamma_config(0, 1);
    assert!(cfg.validate().is_err());
    cfg.reps = 10;
    cfg.thetas.push(vec![-1.0, 1.0]);
    assert!(cfg.validate().is_err());
    let json =
        r#"{"distribution":"gamma","thetas":[[1,1]],"recipes":["LOG"],"n":20,"reps":3,"seed":1}"#;
    let parsed = ScenarioConfig::from_json(json).unwrap();
    assert_eq!(parsed.time_budget_seconds, 20.0);
    assert!(ScenarioConfig::from_json(r#"{"distribution":"gamma","bogus":1}"#).is_err());
}

#[test]
fn rounding_study_flags_log_of_zero() {
    let tables = nakagami_rounding_study(&[vec![0.7, 1.0]], &[100], Some(1), 50, 2).unwrap();
    let t = &tables[0];
    let mo3 = t.cell(0, "nakagami:MO3", 0).unwrap();
    assert!(mo3.ne_percent > 50);
    let st = t.cell(0, "nakagami:ST", 0).unwrap();
    assert_eq!(st.ne_percent, 0);

    let unrounded = nakagami_rounding_study(&[vec![0.7, 1.0]], &[100], None, 50, 2).unwrap();
    let direct = run_scenario(&ScenarioConfig::new(
        DistributionId::Nakagami,
        vec![vec![0.7, 1.0]],
        vec!["ST".into(), "MO2".into(), "MO3".into(), "ML".into()],
        100,
        50,
        2,
    ))
    .unwrap();
    assert_eq!(unrounded[0].cells, direct.cells);
}

#[test]
fn doubling_reps_is_self_consistent() {
    let small = run_scenario(&gamma_config(500, 11)).unwrap();
    let large = run_scenario(&gamma_config(1_000, 911)).unwrap();
    let mut agree = 0;
    for c in &small.cells {
        let d = large.cell(c.theta_index, &c.recipe, c.param_index).unwrap();
        let se = c.bias_se.hypot(d.bias_se);
        if (c.bias - d.bias).abs() <= 3.0 * se {
            agree += 1;
        }
    }
    assert!(
        agree as f64 >= 0.95 * small.cells.len() as f64,
        "{agree}/{}",
        small.cells.len()
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn mse_dominates_squared_bias(seed in 0u64..10_000, which in 0usize..3) {
        let (dist, theta, recipe) = [
            (DistributionId::Gamma, vec![1.0, 1.0], "LOG"),
            (DistributionId::Nakagami, vec![1.0, 2.0], "ST"),
            (DistributionId::Cauchy, vec![0.0, 1.0], "ST"),
        ][which].clone();
        let cfg = ScenarioConfig::new(dist, vec![theta], vec![recipe.into()], 20, 40, seed);
        let table = run_scenario(&cfg).unwrap();
        for c in &table.cells {
            prop_assert!(c.mse >= c.bias * c.bias - 1e-12 * c.mse.max(1.0));
        }
    }
}
