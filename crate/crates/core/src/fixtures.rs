//! Hand-solvable ensembles with their known values.

use crate::ensemble::Ensemble;
use crate::hermitian::HermitianOperator;
use crate::scalar::{cr, lit, Real};

/// Known values of a fixture. `None` marks a quantity with no closed form here.
#[derive(Clone, Debug, PartialEq)]
pub struct Expected {
    pub confidences: Vec<f64>,
    pub p_g: f64,
    pub lower_bound: f64,
    pub baseline_success: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub ensemble: Ensemble<f64>,
    pub expected: Expected,
}

/// `η = (½, ½)`, `ρ₁ = |0⟩⟨0|`, `ρ₂ = I/2`.
pub fn ensemble_a<T: Real>() -> Ensemble<T> {
    Ensemble::from_f64(
        &[0.5, 0.5],
        vec![
            HermitianOperator::basis_projector(2, 0),
            HermitianOperator::diag_f64(&[0.5, 0.5]),
        ],
    )
    .expect("fixture A is valid")
}

pub fn orthogonal_pair<T: Real>() -> Ensemble<T> {
    Ensemble::from_f64(
        &[0.5, 0.5],
        vec![
            HermitianOperator::basis_projector(2, 0),
            HermitianOperator::basis_projector(2, 1),
        ],
    )
    .expect("orthogonal pair is valid")
}

pub fn single_state<T: Real>() -> Ensemble<T> {
    Ensemble::from_f64(&[1.0], vec![HermitianOperator::diag_f64(&[0.6, 0.4])])
        .expect("single-state fixture is valid")
}

/// Equal-prior pure states `cos(θ/2)|0⟩ ± sin(θ/2)|1⟩`.
pub fn theta_pair<T: Real>(theta: f64) -> Ensemble<T> {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let plus = [cr(lit::<T>(c)), cr(lit(s))];
    let minus = [cr(lit::<T>(c)), cr(lit(-s))];
    Ensemble::from_f64(
        &[0.5, 0.5],
        vec![HermitianOperator::ket_bra(&plus), HermitianOperator::ket_bra(&minus)],
    )
    .expect("theta pair is valid")
}

/// Ensemble A padded with a zero row and column.
pub fn embedded_a<T: Real>() -> Ensemble<T> {
    ensemble_a::<T>().embed(3).expect("embedding into a larger space")
}

fn theta_fixture(name: &'static str, theta: f64) -> Fixture {
    let s2 = (theta / 2.0).sin().powi(2);
    Fixture {
        name,
        ensemble: theta_pair(theta),
        expected: Expected {
            confidences: vec![1.0, 1.0],
            p_g: 1.0 - theta.cos(),
            lower_bound: s2 / 2.0,
            baseline_success: Some(theta.sin().powi(2) / 2.0),
        },
    }
}

pub fn fixture_suite() -> Vec<Fixture> {
    use std::f64::consts::PI;
    vec![
        Fixture {
            name: "A",
            ensemble: ensemble_a(),
            expected: Expected {
                confidences: vec![2.0 / 3.0, 1.0],
                p_g: 0.75,
                lower_bound: 0.125,
                baseline_success: Some(5.0 / 16.0),
            },
        },
        Fixture {
            name: "orthogonal",
            ensemble: orthogonal_pair(),
            expected: Expected {
                confidences: vec![1.0, 1.0],
                p_g: 1.0,
                lower_bound: 0.25,
                baseline_success: Some(0.5),
            },
        },
        Fixture {
            name: "single",
            ensemble: single_state(),
            expected: Expected {
                confidences: vec![1.0],
                p_g: 1.0,
                lower_bound: 0.4,
                baseline_success: None,
            },
        },
        theta_fixture("theta=pi/6", PI / 6.0),
        theta_fixture("theta=pi/3", PI / 3.0),
        theta_fixture("theta=pi/2", PI / 2.0),
        Fixture {
            name: "A-embedded-3",
            ensemble: embedded_a(),
            expected: Expected {
                confidences: vec![2.0 / 3.0, 1.0],
                p_g: 0.75,
                lower_bound: 0.125,
                baseline_success: Some(5.0 / 16.0),
            },
        },
    ]
}

pub fn fixture(name: &str) -> Option<Fixture> {
    fixture_suite().into_iter().find(|f| f.name == name)
}
