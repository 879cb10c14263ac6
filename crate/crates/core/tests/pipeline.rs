//! Cross-module flows: physical inputs through geometry, spectrum, Berry
//! phases and the cycle experiment.

use std::f64::consts::{FRAC_PI_6, PI};

use anisotrap::berry::{berry_closed_form, wilson_loop_phase, Family, LoopSpec};
use anisotrap::experiment::{prepare_superposition, run_cycle_experiment};
use anisotrap::fockspace::FockBasis;
use anisotrap::hamiltonian::{analytic_spectrum, Branch, SpectrumLabel};
use anisotrap::numerics::{fidelity, wrap_phase};
use anisotrap::propagator::{evolve_adiabatic, evolve_cycle, Method};
use anisotrap::trap::{resolve_geometry, validity_report, LambdaConvention, LaserDirection, ModelParams, SecondMode, ValidityThresholds};
use anisotrap::ErrorClass;
use proptest::prelude::*;

const NU_A: f64 = 2.0 * PI * 1.0e6;
const K: f64 = 2.0 * PI / 729e-9;
const MASS: f64 = 40.0 * 1.660_539_066_60e-27;
const OMEGA: f64 = 2.0 * PI * 50e3;

fn geometry(ratio: f64, theta: f64) -> anisotrap::trap::CouplingGeometry {
    resolve_geometry(
        NU_A,
        SecondMode::DnuOverLambda(ratio),
        LaserDirection::Theta(theta),
        K,
        OMEGA,
        MASS,
        LambdaConvention::Standard,
    )
    .unwrap()
}

/// `λ = 1`, `ν̄ = 10`, `|Δν/λ|² = ratio`.
fn params(theta: f64, ratio: f64) -> ModelParams {
    let dnu = ratio.sqrt();
    ModelParams::new(theta, 1.0, 10.0 + dnu / 2.0, 10.0 - dnu / 2.0)
}

#[test]
fn physical_inputs_resolve_to_requested_ratio_and_angle() {
    let g = geometry(0.1, FRAC_PI_6);
    assert!((g.dnu / g.lambda - 0.1).abs() < 1e-12);
    assert!((g.theta - FRAC_PI_6).abs() < 1e-12);
    let v = validity_report(&g, &ValidityThresholds::default());
    assert!(v.lamb_dicke_ok && v.weak_drive_ok && v.small_anisotropy_ok && v.adiabatic_ok);
}

#[test]
fn experiment_in_si_units_matches_dimensionless_run() {
    // H scales with λ and T with 1/λ, so the protocol only sees θ and Δν/λ,
    // apart from the carrier ν̄T.
    let g = geometry(0.1, 0.4);
    let si = g.model();
    let scaled = ModelParams::new(si.theta, 1.0, si.nu_a / si.lambda, si.nu_b / si.lambda);
    let basis = FockBasis::new(5);
    let a = run_cycle_experiment(4, &si, &basis, Method::Closed).unwrap();
    let b = run_cycle_experiment(4, &scaled, &basis, Method::Closed).unwrap();
    assert!((a.sign_flip_ratio - b.sign_flip_ratio).abs() < 1e-6 * b.sign_flip_ratio.abs().max(1.0));
    assert!((a.final_state_overlap - b.final_state_overlap).abs() < 1e-6);
}

#[test]
fn closed_and_stepped_experiments_agree() {
    let p = params(0.4, 0.1);
    let basis = FockBasis::new(4);
    let closed = run_cycle_experiment(3, &p, &basis, Method::Closed).unwrap();
    let stepped = run_cycle_experiment(3, &p, &basis, Method::Stepped).unwrap();
    assert!((closed.expval_aniso - stepped.expval_aniso).abs() < 1e-5);
    assert!((closed.final_state_overlap - stepped.final_state_overlap).abs() < 1e-5);
}

#[test]
fn records_do_not_depend_on_truncation() {
    let p = params(FRAC_PI_6, 1e-3);
    let a = run_cycle_experiment(4, &p, &FockBasis::new(5), Method::Closed).unwrap();
    let b = run_cycle_experiment(4, &p, &FockBasis::new(9), Method::Closed).unwrap();
    assert!((a.expval_aniso - b.expval_aniso).abs() < 1e-12);
    assert!((a.expval_iso_ref - b.expval_iso_ref).abs() < 1e-12);
    assert!((a.final_state_overlap - b.final_state_overlap).abs() < 1e-12);
}

#[test]
fn wilson_phases_reproduce_closed_form_on_a_fine_loop() {
    // The discrete product carries a bias ∝ 1/M²; at M = 8192 it is below 3e-6.
    let p = params(0.4, 1e-3);
    let basis = FockBasis::new(6);
    for n in 2..=5 {
        let spec = LoopSpec::new(8192, SpectrumLabel::Singlet { n, branch: Branch::Plus }).unwrap();
        let w = wilson_loop_phase(&p, &basis, &spec).unwrap();
        let gamma = berry_closed_form(n, p.theta, Family::Singlet).unwrap();
        assert!(wrap_phase(w - gamma).abs() < 3e-6, "N = {n}");
    }
}

#[test]
fn adiabatic_error_envelope_scales_with_ratio() {
    // The error oscillates with Δν, but its envelope is linear in |Δν/λ|².
    let err = |ratio: f64| {
        let p = params(FRAC_PI_6, ratio);
        let basis = FockBasis::new(5);
        let psi0 = analytic_spectrum(&p, &basis, 0.0, &[4])
            .unwrap()
            .into_iter()
            .find(|e| e.label == SpectrumLabel::Singlet { n: 4, branch: Branch::Plus })
            .unwrap()
            .vector;
        let exact = evolve_cycle(&psi0, &p, &basis, Method::Closed).unwrap();
        let adiabatic = evolve_adiabatic(&psi0, &p, &basis).unwrap();
        1.0 - fidelity(&adiabatic.final_state, &exact.final_state).unwrap()
    };
    for decade in [1e-2, 1e-3, 1e-4] {
        let peak = (0..10)
            .map(|k| decade * 10f64.powf(-0.1 * k as f64))
            .map(|r| err(r) / r)
            .fold(0.0, f64::max);
        assert!(peak > 1.0 && peak < 3.0, "decade {decade:e}: peak err/r = {peak}");
    }
}

#[test]
fn errors_are_classified() {
    let isotropic = params(0.4, 0.0);
    let basis = FockBasis::new(5);
    let e = run_cycle_experiment(4, &isotropic, &basis, Method::Closed).unwrap_err();
    assert_eq!(e.class(), ErrorClass::Physics);
    let e = prepare_superposition(4, &params(0.4, 1e-3), &FockBasis::new(4)).unwrap_err();
    assert_eq!(e.class(), ErrorClass::Input);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exact_cycle_preserves_charge_weights(theta in 0.05f64..1.5, ratio in 1e-4f64..0.5, n in 2usize..6) {
        let p = params(theta, ratio);
        let basis = FockBasis::new(n + 1);
        let psi0 = prepare_superposition(n, &p, &basis).unwrap();
        let out = evolve_cycle(&psi0, &p, &basis, Method::Closed).unwrap().final_state;
        for ((c0, w0), (c1, w1)) in basis.charge_weights(&psi0).into_iter().zip(basis.charge_weights(&out)) {
            prop_assert_eq!(c0, c1);
            prop_assert!((w0 - w1).abs() < 1e-12);
        }
    }

    #[test]
    fn canonical_angle_phase_difference_is_pi(n in 2usize..8) {
        let dg = wrap_phase(
            berry_closed_form(n, FRAC_PI_6, Family::Singlet).unwrap()
                - berry_closed_form(n + 1, FRAC_PI_6, Family::Singlet).unwrap(),
        );
        prop_assert!((dg.abs() - PI).abs() < 1e-12);
    }
}
