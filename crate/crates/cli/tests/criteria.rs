//! Acceptance criteria 1–9. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_6, PI};
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use anisotrap::berry::{
    berry_closed_form, loop_eigenvectors, phase_difference, wilson_loop_phase, wilson_phase, Family, LoopSpec,
};
use anisotrap::experiment::prepare_superposition;
use anisotrap::fockspace::{charge_expectation, FockBasis};
use anisotrap::hamiltonian::{analytic_spectrum, block_spectrum, singlet_energy, Branch, SpectrumLabel};
use anisotrap::numerics::{fidelity, wrap_phase, ComplexVector, C64};
use anisotrap::propagator::{
    cycle_period, evolve_adiabatic, evolve_cycle, evolve_exact_closed, evolve_stepped, evolve_stepped_adaptive, Method,
    StepPolicy,
};
use anisotrap::trap::{validity_report, ModelParams, ValidityThresholds};
use anisotrap_cli::commands::run_experiment;
use anisotrap_cli::config::{RawConfig, RunConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `λ = 1`, `ν̄ = 10`, `Δν/λ = √ratio`.
fn params(theta: f64, ratio: f64) -> ModelParams {
    let dnu = ratio.sqrt();
    ModelParams::new(theta, 1.0, 10.0 + dnu / 2.0, 10.0 - dnu / 2.0)
}

fn canonical_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/canonical.conf")
}

/// Distance on the circle.
fn circ(a: f64, b: f64) -> f64 {
    wrap_phase(a - b).abs()
}

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn spectrum() -> Verdict {
    let start = Instant::now();
    let p = params(0.4, 1e-3);
    let basis = FockBasis::new(16);
    let (mut rel, mut zero) = (0.0f64, 0.0f64);
    for block in basis.blocks().iter().filter(|b| b.charge <= 15) {
        let numeric = block_spectrum(&p, &basis, 0.37, block).expect("block spectrum");
        for analytic in analytic_spectrum(&p, &basis, 0.37, &[block.charge]).expect("analytic spectrum") {
            let e = numeric.iter().find(|e| e.label == analytic.label).expect("level resolved").energy;
            match analytic.label {
                SpectrumLabel::Singlet { n, branch } => {
                    let exact = branch.sign() * singlet_energy(p.lambda, n);
                    rel = rel.max(((e - exact) / exact).abs());
                }
                _ => zero = zero.max(e.abs() / p.lambda),
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        rel <= 1e-9 && zero <= 1e-10 && secs < 5.0,
        format!("max rel err {rel:.2e} <= 1e-9, max |E0|/λ {zero:.2e} <= 1e-10, {secs:.2} s < 5 s"),
    )
}

fn wilson() -> Verdict {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for theta in [0.3, 0.4, 1.0] {
        let p = params(theta, 1e-3);
        let basis = FockBasis::new(9);
        for n in 2..=8 {
            let spec = LoopSpec::new(2048, SpectrumLabel::Singlet { n, branch: Branch::Plus }).unwrap();
            let w = wilson_loop_phase(&p, &basis, &spec).expect("wilson loop");
            worst = worst.max(circ(w, berry_closed_form(n, theta, Family::Singlet).unwrap()));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let p = params(0.4, 1e-3);
    let basis = FockBasis::new(5);
    let spec = LoopSpec::new(2048, SpectrumLabel::Singlet { n: 4, branch: Branch::Minus }).unwrap();
    let vectors = loop_eigenvectors(&p, &basis, &spec).expect("loop eigenvectors");
    let rephased: Vec<ComplexVector> = vectors
        .iter()
        .map(|v| v * C64::from_polar(1.0, rng.gen_range(-PI..PI)))
        .collect();
    let gauge = circ(wilson_phase(&vectors).unwrap(), wilson_phase(&rephased).unwrap());
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst <= 1e-6 && gauge <= 1e-12 && secs < 30.0,
        format!("max |W − γ| {worst:.2e} <= 1e-6, re-phasing {gauge:.2e} <= 1e-12, {secs:.2} s < 30 s"),
    )
}

fn sign_flip_difference() -> Verdict {
    let p = params(FRAC_PI_6, 1e-3);
    let basis = FockBasis::new(9);
    let (mut closed, mut numeric) = (0.0f64, 0.0f64);
    for n in 2..=8 {
        closed = closed.max(circ(phase_difference(n, FRAC_PI_6, Family::Singlet).unwrap(), PI));
        let w = |n| {
            let spec = LoopSpec::new(2048, SpectrumLabel::Singlet { n, branch: Branch::Plus }).unwrap();
            wilson_loop_phase(&p, &basis, &spec).expect("wilson loop")
        };
        numeric = numeric.max(circ(w(n) - w(n + 1), PI));
    }
    verdict(
        closed <= 1e-12 && numeric <= 1e-6,
        format!("closed form |Δγ − π| {closed:.2e}, Wilson loop |Δγ − π| {numeric:.2e} <= 1e-6"),
    )
}

fn propagator() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let p = params(0.4, 0.1);
    let basis = FockBasis::new(12);
    let t = cycle_period(&p).unwrap();
    let (mut infidelity, mut norm, mut charge) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..2 {
        let mut psi = ComplexVector::from_fn(basis.dim(), |i, _| {
            let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if basis.state(i).charge() <= 12 { z } else { C64::new(0.0, 0.0) }
        });
        psi.unscale_mut(psi.norm());
        let exact = evolve_exact_closed(&psi, &p, &basis, t).expect("closed evolution");
        let stepped = evolve_stepped_adaptive(&psi, &p, &basis, t, &StepPolicy::default()).expect("stepped evolution");
        infidelity = infidelity.max(1.0 - fidelity(&exact.final_state, &stepped.final_state).unwrap());
        norm = norm.max((stepped.final_state.norm() - 1.0).abs());
        charge = charge.max(
            (charge_expectation(&stepped.final_state, &basis) - charge_expectation(&psi, &basis)).abs(),
        );
    }
    verdict(
        infidelity <= 1e-8 && norm <= 1e-10 && charge <= 1e-10,
        format!("1 − F {infidelity:.2e} <= 1e-8, norm drift {norm:.2e}, ⟨C⟩ drift {charge:.2e} <= 1e-10"),
    )
}

fn adiabatic_error(ratio: f64) -> f64 {
    let p = params(FRAC_PI_6, ratio);
    let basis = FockBasis::new(5);
    let psi0 = analytic_spectrum(&p, &basis, 0.0, &[4])
        .unwrap()
        .into_iter()
        .find(|e| e.label == SpectrumLabel::Singlet { n: 4, branch: Branch::Plus })
        .unwrap()
        .vector;
    let exact = evolve_cycle(&psi0, &p, &basis, Method::Closed).expect("closed evolution");
    let adiabatic = evolve_adiabatic(&psi0, &p, &basis).expect("adiabatic evolution");
    1.0 - fidelity(&adiabatic.final_state, &exact.final_state).unwrap()
}

fn adiabatic() -> Verdict {
    // Halving Δν quarters |Δν/λ|².
    let errs: Vec<f64> = (0..4).map(|k| adiabatic_error(0.04 / 4f64.powi(k))).collect();
    let ratios: Vec<f64> = errs.windows(2).map(|w| w[1] / w[0]).collect();
    let pass = ratios.iter().all(|r| (0.15..=0.4).contains(r));
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.3}")).collect();
    verdict(pass, format!("err(Δν/2)/err(Δν) = [{}] in [0.15, 0.4]", shown.join(", ")))
}

fn experiment() -> Verdict {
    let start = Instant::now();
    let mut raw = RawConfig::load(&canonical_path()).expect("canonical config");
    let canonical = RunConfig::resolve(raw.clone()).expect("canonical config resolves");
    let (rec, _) = run_experiment(&canonical).expect("canonical experiment");
    raw.set("theta", &FRAC_PI_4.to_string()).unwrap();
    let (control, _) = run_experiment(&RunConfig::resolve(raw).unwrap()).expect("control experiment");
    let secs = start.elapsed().as_secs_f64();
    let pass = !rec.signal_null
        && (rec.sign_flip_ratio + 1.0).abs() <= 0.02
        && rec.final_state_overlap <= 0.05
        && (control.sign_flip_ratio - 1.0).abs() <= 0.02
        && secs < 10.0;
    verdict(
        pass,
        format!(
            "signal_null {}, ratio {:.4} (−1 ± 0.02), overlap {:.4} <= 0.05, control ratio {:.4} (+1 ± 0.02), {secs:.2} s < 10 s",
            rec.signal_null, rec.sign_flip_ratio, rec.final_state_overlap, control.sign_flip_ratio
        ),
    )
}

fn feasibility() -> Verdict {
    let cfg = RunConfig::resolve(RawConfig::load(&canonical_path()).unwrap()).unwrap();
    let g = cfg.physical.geometry().unwrap();
    let v = validity_report(&g, &ValidityThresholds::default());
    let dnu_max = g.lambda * 0.1f64.sqrt();
    let ratio = (4.0 * PI / g.dnu.abs()) / (10.0 / g.lambda);
    let ratio_err = ((v.cycle_vs_coherence - ratio) / ratio).abs();
    let third = (v.dnu_max / g.lambda - 1.0 / 3.0).abs();
    verdict(
        v.dnu_max == dnu_max && ratio_err <= 4.0 * f64::EPSILON && third < 0.02,
        format!(
            "Δν_max/λ {:.6} (≈ 1/3, exact match {}), T/τ {:.6e} rel err {ratio_err:.1e}",
            v.dnu_max / g.lambda,
            v.dnu_max == dnu_max,
            v.cycle_vs_coherence
        ),
    )
}

fn truncation() -> Verdict {
    let mut worst = 0.0f64;
    for (theta, ratio) in [(FRAC_PI_6, 1e-3), (0.4, 0.05), (1.0, 0.3)] {
        let p = params(theta, ratio);
        for n in [2usize, 4, 6] {
            let small = FockBasis::new(n + 1);
            let large = FockBasis::new(n + 5);
            let t = cycle_period(&p).unwrap();
            let run = |basis: &FockBasis, method: Option<Method>| {
                let psi = prepare_superposition(n, &p, basis).unwrap();
                match method {
                    Some(m) => evolve_cycle(&psi, &p, basis, m).unwrap().final_state,
                    None => evolve_stepped(&psi, &p, basis, t, 512).unwrap().final_state,
                }
            };
            for method in [Some(Method::Closed), Some(Method::Adiabatic), None] {
                if method == Some(Method::Adiabatic) && ratio >= 1.0 {
                    continue;
                }
                let a = small.transfer(&run(&small, method), &large).unwrap();
                worst = worst.max((a - run(&large, method)).camax());
            }
        }
    }
    verdict(worst <= 1e-12, format!("max |ψ(N+1) − ψ(N+5)| {worst:.2e} <= 1e-12"))
}

fn determinism() -> Verdict {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_anisotrap"))
            .args(["experiment", "--config"])
            .arg(canonical_path())
            .output()
            .expect("run anisotrap")
    };
    let (a, b) = (run(), run());
    let ok = a.status.success() && b.status.success() && !a.stdout.is_empty() && a.stdout == b.stdout;
    verdict(ok, format!("{} bytes, identical {}", a.stdout.len(), a.stdout == b.stdout))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 9] = [
        ("spectrum reproduction", spectrum),
        ("Wilson loop vs closed form", wilson),
        ("phase difference at θ = π/6", sign_flip_difference),
        ("stepped vs closed propagator", propagator),
        ("adiabatic error scaling", adiabatic),
        ("sign-flip experiment", experiment),
        ("feasibility arithmetic", feasibility),
        ("charge-block truncation", truncation),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        failed += usize::from(!v.pass);
        println!(
            "criterion {} {name}: {} ({}) [{:.1} s]",
            i + 1,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
