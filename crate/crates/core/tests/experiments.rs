mod common;

use colsel::experiments::{check_inf1_reduction, check_inf2_reduction, sample_projector, Model};
use colsel::matcore::{stable_rank, standardize};
use common::*;

#[test]
fn independent_model_cardinality() {
    let mut rng = rng(51);
    let draws = 200;
    let total: usize = (0..draws)
        .map(|_| sample_projector(Model::RDelta, 1000, 0.3, &mut rng).unwrap().len())
        .sum();
    let mean = total as f64 / draws as f64;
    let sigma = (1000.0 * 0.3 * 0.7 / draws as f64).sqrt();
    assert!((mean - 300.0).abs() <= 5.0 * sigma, "{mean}");
}

#[test]
fn inf2_bounds_on_double_identity() {
    let a = dense(&double_identity(8));
    let r = check_inf2_reduction(&a, 0.5, 500, 52).unwrap();
    let bound = 0.5f64.sqrt() * 4.0 + 0.5 * r.full_norm;
    assert!((r.independent.theoretical_bound - bound).abs() < 1e-12);
    assert!(r.independent.pass, "{:?}", r.independent);
    assert!(r.fixed_size.pass, "{:?}", r.fixed_size);
    assert_eq!(r.independent.trials, 500);
}

#[test]
fn inf2_small_sample_regime() {
    let mut rng = rng(53);
    let a = dense(&standardized_gaussian(6, 16, &mut rng));
    let st = stable_rank(&a).unwrap();
    let r = check_inf2_reduction(&a, 0.25, 300, 54).unwrap();
    assert_eq!(r.s, 4);
    assert_eq!(r.small_sample.is_some(), 4.0 <= (2.0 * st).ceil());
    if let Some(x) = r.small_sample {
        assert!(x.pass);
        assert!((x.theoretical_bound - 14.0).abs() < 1e-12);
    }
}

#[test]
fn inf1_report_on_random_matrix() {
    let mut rng = rng(55);
    let a = standardize(&dense(&gaussian(10, 16, &mut rng))).unwrap();
    let r = check_inf1_reduction(&a, 0.25, 500, 56, Some(1.0)).unwrap();
    assert_eq!(r.s, 4);
    assert!(r.fixed_size.pass);
    assert!(r.fitted_constant.unwrap() > 0.0);
    if let Some(x) = &r.small_sample {
        assert!((x.theoretical_bound - 4.0 / 9.0).abs() < 1e-12);
    }
    let none = check_inf1_reduction(&a, 0.25, 100, 56, None).unwrap();
    assert!(!none.in_regime && none.small_sample.is_none());
}

#[test]
fn experiments_repeat_under_a_seed() {
    let a = dense(&double_identity(5));
    let x = check_inf1_reduction(&a, 0.5, 150, 7, Some(2.0)).unwrap();
    let y = check_inf1_reduction(&a, 0.5, 150, 7, Some(2.0)).unwrap();
    assert_eq!(format!("{x:?}"), format!("{y:?}"));
}
