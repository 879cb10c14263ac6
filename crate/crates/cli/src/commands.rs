//! Subcommand bodies. Each returns a [`Table`] plus warnings for stderr.

use anisotrap::berry::{berry_closed_form, connection_integral, wilson_loop_phase, Family, LoopSpec};
use anisotrap::experiment::{prepare_superposition, run_cycle_experiment, ExperimentRecord};
use anisotrap::fockspace::FockBasis;
use anisotrap::hamiltonian::{analytic_spectrum, block_spectrum, Branch, SpectrumLabel};
use anisotrap::numerics::{fidelity, wrap_phase};
use anisotrap::propagator::{
    cycle_period, evolve_adiabatic, evolve_exact_closed, evolve_stepped_adaptive, EvolutionResult, Method,
};
use anisotrap::trap::{validity_report, CouplingGeometry, ValidityThresholds};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{Table, Value};

pub struct Outcome {
    pub table: Table,
    pub warnings: Vec<String>,
}

fn branch_name(label: SpectrumLabel) -> &'static str {
    match label {
        SpectrumLabel::Singlet { branch: Branch::Plus, .. } => "plus",
        SpectrumLabel::Singlet { branch: Branch::Minus, .. } => "minus",
        SpectrumLabel::ZeroDoublet { .. } => "zero",
        SpectrumLabel::Unlabeled => "unlabeled",
    }
}

/// Analytic singlet and doublet energies against the labeled numerical
/// eigenvalues of each charge block.
pub fn spectrum(cfg: &RunConfig) -> CliResult<Outcome> {
    let mut table = Table::new(vec!["n", "branch", "e_analytic", "e_numeric", "residual"]);
    if cfg.n_list.is_empty() {
        return Ok(Outcome { table, warnings: Vec::new() });
    }
    let p = cfg.physical.geometry()?.model();
    let basis = FockBasis::new(*cfg.n_list.iter().max().unwrap());
    for &n in &cfg.n_list {
        let block = basis.block(n).expect("block exists for every N <= n_max");
        let numeric = block_spectrum(&p, &basis, 0.0, block)?;
        for analytic in analytic_spectrum(&p, &basis, 0.0, &[n])? {
            let found = numeric
                .iter()
                .find(|e| e.label == analytic.label)
                .ok_or_else(|| anisotrap::Error::NoConvergence(format!("level {:?} not resolved numerically", analytic.label)))?;
            table.push(vec![
                n.into(),
                branch_name(analytic.label).into(),
                analytic.energy.into(),
                found.energy.into(),
                (found.energy - analytic.energy).abs().into(),
            ]);
        }
    }
    Ok(Outcome { table, warnings: Vec::new() })
}

/// Closed-form, connection-integral and Wilson-loop phases of the singlet
/// family, with the `γ_N − γ_{N+1}` differences.
pub fn berry(cfg: &RunConfig) -> CliResult<Outcome> {
    let mut table = Table::new(vec![
        "n",
        "theta",
        "gamma_closed",
        "gamma_closed_mod2pi",
        "gamma_connection",
        "gamma_wilson",
        "wilson_error",
        "diff_closed",
        "diff_wilson",
    ]);
    if cfg.n_list.is_empty() {
        return Ok(Outcome { table, warnings: Vec::new() });
    }
    if let Some(&n) = cfg.n_list.iter().find(|&&n| n < 2) {
        return Err(CliError::Config(format!("berry needs N >= 2 in n_list, got {n}")));
    }
    let p = cfg.physical.geometry()?.model();
    let basis = FockBasis::new(cfg.n_list.iter().max().unwrap() + 1);
    let wilson = |n: usize| -> CliResult<f64> {
        let spec = LoopSpec::new(cfg.loop_samples, SpectrumLabel::Singlet { n, branch: Branch::Plus })?;
        Ok(wilson_loop_phase(&p, &basis, &spec)?)
    };
    for &n in &cfg.n_list {
        let closed = berry_closed_form(n, p.theta, Family::Singlet)?;
        let closed_next = berry_closed_form(n + 1, p.theta, Family::Singlet)?;
        let (w, w_next) = (wilson(n)?, wilson(n + 1)?);
        table.push(vec![
            n.into(),
            p.theta.into(),
            closed.into(),
            wrap_phase(closed).into(),
            connection_integral(n, p.theta, Family::Singlet, cfg.loop_samples)?.into(),
            w.into(),
            wrap_phase(w - closed).abs().into(),
            wrap_phase(closed - closed_next).into(),
            wrap_phase(w - w_next).into(),
        ]);
    }
    Ok(Outcome { table, warnings: Vec::new() })
}

/// One cycle of the superposition state with each configured method,
/// compared against the exact rotating-frame result.
pub fn evolve(cfg: &RunConfig) -> CliResult<Outcome> {
    let p = cfg.physical.geometry()?.model();
    let basis = FockBasis::new(cfg.n_max);
    let psi0 = prepare_superposition(cfg.n, &p, &basis)?;
    let t = cycle_period(&p)?;
    let reference = evolve_exact_closed(&psi0, &p, &basis, t)?;
    let mut table = Table::new(vec!["method", "t_final", "steps", "norm_drift", "charge_drift", "fidelity_vs_closed"]);
    let mut warnings = Vec::new();
    for &method in &cfg.evolve_methods {
        let r: EvolutionResult = match method {
            Method::Closed => reference.clone(),
            Method::Stepped => evolve_stepped_adaptive(&psi0, &p, &basis, t, &cfg.steps)?,
            Method::Adiabatic => evolve_adiabatic(&psi0, &p, &basis)?,
        };
        warnings.extend(r.diagnostics.warnings.iter().cloned());
        table.push(vec![
            method.as_str().into(),
            r.t_final.into(),
            r.diagnostics.steps.into(),
            r.diagnostics.norm_drift.into(),
            r.diagnostics.charge_drift.into(),
            fidelity(&reference.final_state, &r.final_state)?.into(),
        ]);
    }
    Ok(Outcome { table, warnings })
}

pub const EXPERIMENT_COLUMNS: &[&str] = &[
    "n",
    "n_max",
    "method",
    "theta",
    "lambda",
    "nu_a",
    "nu_b",
    "t_cycle",
    "adiabatic_ratio",
    "gamma_n",
    "gamma_n1",
    "delta_gamma_mod2pi",
    "expval_aniso",
    "expval_predicted",
    "expval_iso_ref",
    "expval_iso_predicted",
    "sign_flip_ratio",
    "final_state_overlap",
    "carrier",
    "signal_null",
    "suggested_nu_bar",
    "canonical",
    "lamb_dicke_ok",
    "weak_drive_ok",
    "small_anisotropy_ok",
    "adiabatic_ok",
    "dnu_max",
    "coherence_time",
    "cycle_vs_coherence",
    "decoherence",
    "config",
];

pub fn experiment_row(rec: &ExperimentRecord, g: &CouplingGeometry, config: String) -> Vec<Value> {
    let v = validity_report(g, &ValidityThresholds::default());
    let p = &rec.params;
    vec![
        rec.n.into(),
        rec.n_max.into(),
        rec.method.as_str().into(),
        p.theta.into(),
        p.lambda.into(),
        p.nu_a.into(),
        p.nu_b.into(),
        rec.t_cycle.into(),
        rec.adiabatic_ratio.into(),
        rec.gamma_n.into(),
        rec.gamma_n1.into(),
        rec.delta_gamma_mod2pi.into(),
        rec.expval_aniso.into(),
        rec.expval_predicted.into(),
        rec.expval_iso_ref.into(),
        rec.expval_iso_predicted.into(),
        rec.sign_flip_ratio.into(),
        rec.final_state_overlap.into(),
        rec.carrier.into(),
        rec.signal_null.into(),
        rec.suggested_nu_bar.into(),
        rec.canonical.into(),
        v.lamb_dicke_ok.into(),
        v.weak_drive_ok.into(),
        v.small_anisotropy_ok.into(),
        v.adiabatic_ok.into(),
        v.dnu_max.into(),
        v.coherence_time.into(),
        v.cycle_vs_coherence.into(),
        v.decoherence.as_str().into(),
        config.into(),
    ]
}

/// The full protocol for the configured `N`, `n_max` and method.
pub fn run_experiment(cfg: &RunConfig) -> CliResult<(ExperimentRecord, CouplingGeometry)> {
    let g = cfg.physical.geometry()?;
    let basis = FockBasis::new(cfg.n_max);
    let rec = run_cycle_experiment(cfg.n, &g.model(), &basis, cfg.method)?;
    Ok((rec, g))
}

pub fn experiment(cfg: &RunConfig) -> CliResult<Outcome> {
    let (rec, g) = run_experiment(cfg)?;
    let mut table = Table::new(EXPERIMENT_COLUMNS.to_vec());
    table.push(experiment_row(&rec, &g, cfg.raw.fingerprint()));
    Ok(Outcome { table, warnings: rec.warnings })
}
