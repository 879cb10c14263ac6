//! Evolution over a cycle of `H(t)`.
//!
//! Three methods are available:
//! * exact, via the rotating frame `ψ(t) = U_G(φ(t)) e^{−iH_eff t} ψ0`;
//! * a stepped midpoint-exponential integrator of `H(t)`;
//! * the adiabatic approximation, which dresses each instantaneous eigenstate
//!   with its dynamical and geometric phase.
//!
//! All methods act block by block on the conserved charge.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::berry::{berry_closed_form, Family};
use crate::error::{Error, Result};
use crate::fockspace::{charge_expectation, mode_rotation, ChargeBlock, FockBasis};
use crate::hamiltonian::{analytic_spectrum, build_h_eff, h_eff_block, h_phi_block, phi_at};
use crate::numerics::{apply_unitary_exp, fidelity, unitary_exp, ComplexVector, C64};
use crate::trap::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Closed,
    Stepped,
    Adiabatic,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Closed => "closed",
            Method::Stepped => "stepped",
            Method::Adiabatic => "adiabatic",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed" => Ok(Method::Closed),
            "stepped" => Ok(Method::Stepped),
            "adiabatic" => Ok(Method::Adiabatic),
            other => Err(Error::InvalidArgument(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub norm_drift: f64,
    pub charge_drift: f64,
    pub steps: Option<usize>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub final_state: ComplexVector,
    pub t_final: f64,
    pub method: Method,
    pub diagnostics: Diagnostics,
}

/// Drift allowed in norm and `⟨C⟩` before a result is rejected.
pub const DRIFT_TOLERANCE: f64 = 1e-10;
/// Warn when `|Δν/λ|²` exceeds this.
pub const ADIABATIC_WARN_RATIO: f64 = 0.1;

/// `T = 4π/|Δν|`, the time for `φ` to sweep `2π`.
pub fn cycle_period(p: &ModelParams) -> Result<f64> {
    let dnu = p.dnu();
    if dnu == 0.0 {
        return Err(Error::IsotropicCycle);
    }
    Ok(4.0 * PI / dnu.abs())
}

/// `|Δν|²/|λ|²`.
pub fn adiabaticity_ratio(p: &ModelParams) -> Result<f64> {
    if p.lambda == 0.0 {
        return Err(Error::InvalidArgument("adiabaticity ratio undefined for λ = 0".into()));
    }
    Ok((p.dnu() / p.lambda).powi(2))
}

/// Apply `f` to every charge block carrying weight, concurrently.
fn map_blocks<F>(basis: &FockBasis, psi: &ComplexVector, f: F) -> Result<ComplexVector>
where
    F: Fn(&ChargeBlock, ComplexVector) -> Result<ComplexVector> + Sync,
{
    let pieces: Vec<(usize, ComplexVector)> = basis
        .blocks()
        .par_iter()
        .filter(|b| b.is_complete(basis.n_max()))
        .filter_map(|b| {
            let v = psi.rows(b.start, b.len).into_owned();
            (v.norm_squared() > 0.0).then_some((b, v))
        })
        .map(|(b, v)| Ok((b.start, f(b, v)?)))
        .collect::<Result<_>>()?;
    let mut out = ComplexVector::zeros(psi.len());
    for (start, v) in pieces {
        out.rows_mut(start, v.len()).copy_from(&v);
    }
    Ok(out)
}

fn finish(
    psi0: &ComplexVector,
    final_state: ComplexVector,
    t_final: f64,
    method: Method,
    basis: &FockBasis,
    steps: Option<usize>,
    warnings: Vec<String>,
) -> Result<EvolutionResult> {
    let norm_drift = (final_state.norm() - psi0.norm()).abs();
    let charge_drift = (charge_expectation(&final_state, basis) - charge_expectation(psi0, basis)).abs();
    if norm_drift > DRIFT_TOLERANCE || charge_drift > DRIFT_TOLERANCE {
        return Err(Error::NoConvergence(format!(
            "{} evolution drifted: norm {norm_drift:.3e}, charge {charge_drift:.3e}",
            method.as_str()
        )));
    }
    Ok(EvolutionResult {
        final_state,
        t_final,
        method,
        diagnostics: Diagnostics { norm_drift, charge_drift, steps, warnings },
    })
}

fn check_initial(psi0: &ComplexVector, basis: &FockBasis) -> Result<()> {
    basis.check_in_range(psi0)?;
    if (psi0.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidArgument(format!("initial state has norm {}", psi0.norm())));
    }
    Ok(())
}

/// Exact evolution to time `t` through the rotating frame, block by block.
pub fn evolve_exact_closed(psi0: &ComplexVector, p: &ModelParams, basis: &FockBasis, t: f64) -> Result<EvolutionResult> {
    check_initial(psi0, basis)?;
    let rotated = map_blocks(basis, psi0, |b, v| Ok(unitary_exp(&h_eff_block(p, basis, b), t)? * v))?;
    let out = rotated.component_mul(&mode_rotation(phi_at(p, t), basis));
    finish(psi0, out, t, Method::Closed, basis, None, Vec::new())
}

/// Same as [`evolve_exact_closed`] with a single full-space exponential.
pub fn evolve_exact_full(psi0: &ComplexVector, p: &ModelParams, basis: &FockBasis, t: f64) -> Result<EvolutionResult> {
    check_initial(psi0, basis)?;
    let out = (unitary_exp(&build_h_eff(p, basis), t)? * psi0).component_mul(&mode_rotation(phi_at(p, t), basis));
    finish(psi0, out, t, Method::Closed, basis, None, Vec::new())
}

/// Midpoint-exponential integration of `H(t)` over `[0, t]` in `steps` equal
/// steps. Second order in the step size.
pub fn evolve_stepped(
    psi0: &ComplexVector,
    p: &ModelParams,
    basis: &FockBasis,
    t: f64,
    steps: usize,
) -> Result<EvolutionResult> {
    check_initial(psi0, basis)?;
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    let dt = t / steps as f64;
    let out = map_blocks(basis, psi0, |b, mut v| {
        for k in 0..steps {
            let mid = (k as f64 + 0.5) * dt;
            v = apply_unitary_exp(&h_phi_block(p, basis, phi_at(p, mid), b), dt, &v)?;
        }
        Ok(v)
    })?;
    finish(psi0, out, t, Method::Stepped, basis, Some(steps), Vec::new())
}

/// Step-doubling policy for [`evolve_stepped_adaptive`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPolicy {
    /// Initial steps per unit of `t·(|λ| + |Δν|)`.
    pub density: f64,
    /// Required fidelity between successive refinements.
    pub tolerance: f64,
    pub max_steps: usize,
}

impl Default for StepPolicy {
    fn default() -> Self {
        Self { density: 64.0, tolerance: 1e-10, max_steps: 1 << 20 }
    }
}

impl StepPolicy {
    pub fn initial_steps(&self, p: &ModelParams, t: f64) -> usize {
        ((self.density * t.abs() * (p.lambda.abs() + p.dnu().abs())).ceil() as usize).max(1)
    }
}

/// Doubles the step count until two successive results agree to
/// `1 − tolerance` in fidelity, and returns the finer one.
pub fn evolve_stepped_adaptive(
    psi0: &ComplexVector,
    p: &ModelParams,
    basis: &FockBasis,
    t: f64,
    policy: &StepPolicy,
) -> Result<EvolutionResult> {
    let mut steps = policy.initial_steps(p, t).min(policy.max_steps);
    let mut coarse = evolve_stepped(psi0, p, basis, t, steps)?;
    while steps < policy.max_steps {
        steps = (steps * 2).min(policy.max_steps);
        let fine = evolve_stepped(psi0, p, basis, t, steps)?;
        if fidelity(&coarse.final_state, &fine.final_state)? >= 1.0 - policy.tolerance {
            return Ok(fine);
        }
        coarse = fine;
    }
    Err(Error::NoConvergence(format!(
        "stepped evolution did not reach refinement fidelity 1 - {:e} within {} steps",
        policy.tolerance, policy.max_steps
    )))
}

/// Residual norm above which `ψ0` is not considered spanned by the labeled
/// instantaneous eigenstates.
pub const DECOMPOSITION_TOLERANCE: f64 = 1e-10;

/// Adiabatic evolution over one cycle.
///
/// Each component along `Ψ_{N±}(0)` or a zero-doublet member picks up
/// `e^{−iET} e^{iγ}`. When `Δν < 0` the loop is traversed backwards and `γ`
/// changes sign.
pub fn evolve_adiabatic(psi0: &ComplexVector, p: &ModelParams, basis: &FockBasis) -> Result<EvolutionResult> {
    check_initial(psi0, basis)?;
    let ratio = adiabaticity_ratio(p)?;
    if ratio >= 1.0 {
        return Err(Error::Precondition(format!("adiabatic approximation requires |Δν/λ|² < 1, got {ratio}")));
    }
    let mut warnings = Vec::new();
    if ratio > ADIABATIC_WARN_RATIO {
        warnings.push(format!("|Δν/λ|² = {ratio:.3} exceeds {ADIABATIC_WARN_RATIO}; adiabatic error may be large"));
    }
    let t = cycle_period(p)?;
    let orientation = p.dnu().signum();

    let mut out = ComplexVector::zeros(psi0.len());
    let mut residual = psi0.clone();
    for block in basis.blocks().iter().filter(|b| b.is_complete(basis.n_max())) {
        if psi0.rows(block.start, block.len).norm_squared() == 0.0 {
            continue;
        }
        let family = if block.charge >= 2 { Family::Singlet } else { Family::Ket };
        let gamma = orientation * berry_closed_form(block.charge, p.theta, family)?;
        for entry in analytic_spectrum(p, basis, 0.0, &[block.charge])? {
            let c = entry.vector.dotc(psi0);
            residual -= &entry.vector * c;
            out += &entry.vector * (c * C64::from_polar(1.0, gamma - entry.energy * t));
        }
    }
    let residual = residual.norm();
    if residual > DECOMPOSITION_TOLERANCE {
        return Err(Error::UnlabeledComponent { residual });
    }
    finish(psi0, out, t, Method::Adiabatic, basis, None, warnings)
}

/// One cycle with the chosen method; the stepped method uses the default
/// adaptive policy.
pub fn evolve_cycle(psi0: &ComplexVector, p: &ModelParams, basis: &FockBasis, method: Method) -> Result<EvolutionResult> {
    match method {
        Method::Closed => evolve_exact_closed(psi0, p, basis, cycle_period(p)?),
        Method::Stepped => evolve_stepped_adaptive(psi0, p, basis, cycle_period(p)?, &StepPolicy::default()),
        Method::Adiabatic => evolve_adiabatic(psi0, p, basis),
    }
}
