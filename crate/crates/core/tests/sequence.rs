use std::f64::consts::PI;

use mcd_core::fixtures::{ensemble_a, theta_pair};
use mcd_core::optimizer::{certify, SolverOptions, Tolerances};
use mcd_core::sequence::{
    dual_tensor_certificate, product_measurement, sequence_max_confidence, sequence_p_g, DIRECT_DIM_CAP,
};
use mcd_core::{random_ensemble, tensor, Ens, Error, Mode};

#[test]
fn single_step_sequence_is_the_ensemble() {
    let a: Ens = ensemble_a();
    let seq = tensor(std::slice::from_ref(&a)).unwrap();
    let r = sequence_max_confidence(&seq, &[0], Mode::Both, DIRECT_DIM_CAP).unwrap();
    assert!((r.product.unwrap() - 2.0 / 3.0).abs() <= 1e-9);
    assert!(r.deviation().unwrap() <= 1e-12);
    let p = sequence_p_g(&seq, Mode::Both, DIRECT_DIM_CAP, &SolverOptions::default(), &Tolerances::default()).unwrap();
    assert!((p.direct.unwrap() - 0.75).abs() <= 1e-6);
}

#[test]
fn mixed_pair_factorizes() {
    let seq = tensor::<f64>(&[theta_pair(PI / 3.0), ensemble_a()]).unwrap();
    let opts = SolverOptions::default();
    let tol = Tolerances::default();
    let r = sequence_p_g(&seq, Mode::Both, DIRECT_DIM_CAP, &opts, &tol).unwrap();
    assert!((r.product.unwrap() - 0.375).abs() <= 1e-6);
    assert!((r.direct.unwrap() - 0.375).abs() <= 1e-5);
    assert!(r.certified);

    let duals: Vec<_> = seq.steps().iter().map(|e| certify(e, &opts, &tol).unwrap().dual).collect();
    let joint = dual_tensor_certificate(&seq, &duals, 1e-8).unwrap();
    assert!(joint.feasible, "{:?}", joint.feasibility);
    assert!((joint.value - 0.375).abs() <= 1e-6);
}

#[test]
fn product_of_optimal_parts_attains_the_joint_optimum() {
    let steps: Vec<Ens> = vec![random_ensemble(2, 3, 1, 31).unwrap(), random_ensemble(2, 2, 2, 32).unwrap()];
    let seq = tensor(&steps).unwrap();
    let opts = SolverOptions::default();
    let tol = Tolerances::default();
    let parts: Vec<_> = steps.iter().map(|e| certify(e, &opts, &tol).unwrap().primal.measurement).collect();
    let m = product_measurement(&parts).unwrap();
    let joint = seq.joint().unwrap();
    let direct = certify(&joint, &opts, &tol).unwrap();
    assert!((m.joint.success_probability(&joint) - direct.dual.value).abs() <= 1e-5);
}

#[test]
fn three_qutrits_exceed_the_direct_cap() {
    let e: Ens = random_ensemble(3, 2, 1, 4).unwrap();
    let seq = tensor(&[e.clone(), e.clone(), e]).unwrap();
    let err = sequence_max_confidence(&seq, &[0, 0, 0], Mode::Direct, DIRECT_DIM_CAP).unwrap_err();
    assert!(matches!(err, Error::DimCapExceeded { dim: 27, cap: 16 }));
    let r = sequence_max_confidence(&seq, &[0, 1, 0], Mode::Product, DIRECT_DIM_CAP).unwrap();
    assert!(r.direct.is_none() && r.product.is_some());
}
