//! Paul-trap drive parameters, secular frequencies, and the laser coupling
//! geometry that fixes the mixing angle, effective coupling and anisotropy.
//!
//! SI inputs enter here. Everything downstream uses `ħ = 1` with angular
//! frequencies in rad/s, so energies are expressed in rad/s as well.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Above this `|q_z|` the lowest-order pseudopotential picture degrades.
pub const Q_WARNING_THRESHOLD: f64 = 0.4;

/// Quadrupole drive `Φ₀(t) = U − V cos(Ω t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapDrive {
    /// Static voltage, V (any sign).
    pub u: f64,
    /// rf amplitude, V.
    pub v: f64,
    /// rf angular frequency, rad/s.
    pub omega_rf: f64,
    /// Trap radius, m.
    pub r0: f64,
    /// Ion mass, kg.
    pub mass: f64,
    /// Ion charge, C.
    pub charge: f64,
}

impl TrapDrive {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("omega_rf", self.omega_rf),
            ("r0", self.r0),
            ("mass", self.mass),
            ("charge", self.charge),
        ];
        for (name, x) in positive {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {x}")));
            }
        }
        if !(self.v >= 0.0 && self.v.is_finite()) || !self.u.is_finite() {
            return Err(Error::InvalidArgument("drive voltages must be finite with V >= 0".into()));
        }
        Ok(())
    }

    fn scale(&self) -> f64 {
        self.mass * self.r0 * self.r0 * self.omega_rf * self.omega_rf
    }

    pub fn with_u(self, u: f64) -> Self {
        Self { u, ..self }
    }
}

/// Dimensionless Mathieu parameters for the axial and radial directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityParams {
    pub a_z: f64,
    pub a_r: f64,
    pub q_z: f64,
    pub q_r: f64,
}

impl StabilityParams {
    fn radial_radicand(&self) -> f64 {
        self.a_r + self.q_r * self.q_r / 2.0
    }

    fn axial_radicand(&self) -> f64 {
        self.a_z + self.q_z * self.q_z / 2.0
    }
}

pub fn stability_params(d: &TrapDrive) -> StabilityParams {
    let k = d.scale();
    let a_z = -8.0 * d.charge * d.u / k;
    let q_z = -4.0 * d.charge * d.v / k;
    StabilityParams { a_z, a_r: -a_z / 2.0, q_z, q_r: -q_z / 2.0 }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecularFrequencies {
    pub omega_r: f64,
    pub omega_z: f64,
    /// `|q_z|` exceeds [`Q_WARNING_THRESHOLD`].
    pub q_warning: bool,
}

/// Lowest-order pseudopotential frequencies `ω² = (a + q²/2) Ω²/4`.
pub fn secular_frequencies(d: &TrapDrive) -> Result<SecularFrequencies> {
    d.validate()?;
    let p = stability_params(d);
    let freq = |axis: &'static str, radicand: f64| {
        if radicand > 0.0 {
            Ok((radicand * d.omega_rf * d.omega_rf / 4.0).sqrt())
        } else {
            Err(Error::NoSecularFrequency { axis, radicand })
        }
    };
    Ok(SecularFrequencies {
        omega_r: freq("radial", p.radial_radicand())?,
        omega_z: freq("axial", p.axial_radicand())?,
        q_warning: p.q_z.abs() > Q_WARNING_THRESHOLD,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotropyVoltage {
    /// `e V² / (m r0² Ω²)`, the closed-form isotropy condition as usually quoted.
    pub u_quoted: f64,
    /// Root of `ω_r(U) = ω_z(U)` found by bisection.
    pub u_numeric: f64,
    /// `|u_quoted − u_numeric| / |u_numeric|`, zero when both vanish.
    pub relative_gap: f64,
}

/// Static voltage that makes the secular frequencies equal, by bisection on
/// the radicand difference `(a_r + q_r²/2) − (a_z + q_z²/2)`, which shares
/// its root with `ω_r − ω_z` wherever both frequencies are real.
pub fn isotropy_voltage(d: &TrapDrive) -> Result<IsotropyVoltage> {
    d.validate()?;
    let u_quoted = d.charge * d.v * d.v / d.scale();
    let diff = |u: f64| {
        let p = stability_params(&d.with_u(u));
        p.radial_radicand() - p.axial_radicand()
    };

    let u_numeric = if diff(0.0) == 0.0 {
        0.0
    } else {
        let (mut lo, mut hi) = (0.0, u_quoted.max(f64::MIN_POSITIVE));
        let f_lo = diff(lo);
        let mut expansions = 0;
        while diff(hi).signum() == f_lo.signum() {
            hi *= 2.0;
            expansions += 1;
            if expansions > 200 || !hi.is_finite() {
                return Err(Error::Bracket("no crossing of the secular frequencies".into()));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if diff(mid).signum() == f_lo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if diff(lo).abs() < diff(hi).abs() {
            lo
        } else {
            hi
        }
    };

    let relative_gap = if u_numeric == 0.0 {
        if u_quoted == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        ((u_quoted - u_numeric) / u_numeric).abs()
    };
    Ok(IsotropyVoltage { u_quoted, u_numeric, relative_gap })
}

/// Which expression is used for the effective two-phonon coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LambdaConvention {
    /// `λ = (Ω/2) e^{−η²/2} η²` with `η² = η_x² + η_z²`.
    #[default]
    Standard,
    /// `λ = (Ω/2) e^{+k²L²} L²` with `L² = Δx²cos²α + Δz²sin²α` (units m²),
    /// kept only for comparison with the literature form.
    Literal,
}

/// Physical laser/trap inputs, SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingInputs {
    pub nu_a: f64,
    pub nu_b: f64,
    pub alpha: f64,
    pub k: f64,
    pub rabi_omega: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingGeometry {
    pub inputs: CouplingInputs,
    pub convention: LambdaConvention,
    pub dx: f64,
    pub dz: f64,
    pub eta_x: f64,
    pub eta_z: f64,
    pub theta: f64,
    pub lambda: f64,
    pub delta_res: f64,
    pub dnu: f64,
    pub nu_bar: f64,
}

/// The parameters the interaction-picture Hamiltonian actually depends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub theta: f64,
    pub lambda: f64,
    pub nu_a: f64,
    pub nu_b: f64,
}

impl ModelParams {
    pub fn new(theta: f64, lambda: f64, nu_a: f64, nu_b: f64) -> Self {
        Self { theta, lambda, nu_a, nu_b }
    }

    pub fn dnu(&self) -> f64 {
        self.nu_a - self.nu_b
    }

    pub fn nu_bar(&self) -> f64 {
        0.5 * (self.nu_a + self.nu_b)
    }

    /// Same coupling with both secular frequencies set to `nu_bar`.
    pub fn isotropic(&self) -> Self {
        let nu = self.nu_bar();
        Self { nu_a: nu, nu_b: nu, ..*self }
    }
}

impl CouplingGeometry {
    pub fn model(&self) -> ModelParams {
        ModelParams {
            theta: self.theta,
            lambda: self.lambda,
            nu_a: self.inputs.nu_a,
            nu_b: self.inputs.nu_b,
        }
    }
}

/// Ground-state width `√(ħ / 2mν)`.
pub fn ground_state_width(mass: f64, nu: f64) -> f64 {
    (HBAR / (2.0 * mass * nu)).sqrt()
}

pub fn coupling_geometry(inputs: CouplingInputs, convention: LambdaConvention) -> Result<CouplingGeometry> {
    let CouplingInputs { nu_a, nu_b, alpha, k, rabi_omega, mass } = inputs;
    for (name, x) in [("nu_a", nu_a), ("nu_b", nu_b), ("k", k), ("rabi_Omega", rabi_omega), ("mass", mass)] {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::InvalidArgument(format!("{name} must be positive, got {x}")));
        }
    }
    if !(alpha > 0.0 && alpha < FRAC_PI_2) {
        return Err(Error::InvalidArgument(format!(
            "laser angle alpha = {alpha} must lie strictly inside (0, pi/2); \
             an axis-aligned beam couples a single mode and closes no loop"
        )));
    }

    let dx = ground_state_width(mass, nu_a);
    let dz = ground_state_width(mass, nu_b);
    let (sa, ca) = alpha.sin_cos();
    let eta_x = k * dx * ca;
    let eta_z = k * dz * sa;
    let theta = eta_z.atan2(eta_x);
    let eta_sq = eta_x * eta_x + eta_z * eta_z;
    let lambda = match convention {
        LambdaConvention::Standard => 0.5 * rabi_omega * (-eta_sq / 2.0).exp() * eta_sq,
        LambdaConvention::Literal => {
            let l_sq = (dx * ca).powi(2) + (dz * sa).powi(2);
            0.5 * rabi_omega * (k * k * l_sq).exp() * l_sq
        }
    };
    Ok(CouplingGeometry {
        inputs,
        convention,
        dx,
        dz,
        eta_x,
        eta_z,
        theta,
        lambda,
        delta_res: nu_a + nu_b,
        dnu: nu_a - nu_b,
        nu_bar: 0.5 * (nu_a + nu_b),
    })
}

/// Laser angle that realizes a target mixing angle: `tan α = (Δx/Δz) tan θ`.
pub fn alpha_for_theta(theta: f64, nu_a: f64, nu_b: f64, mass: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < FRAC_PI_2) {
        return Err(Error::InvalidArgument(format!("theta = {theta} must lie strictly inside (0, pi/2)")));
    }
    let dx = ground_state_width(mass, nu_a);
    let dz = ground_state_width(mass, nu_b);
    Ok((dx / dz * theta.tan()).atan())
}

/// How the laser direction is specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LaserDirection {
    Alpha(f64),
    Theta(f64),
}

/// How the second secular frequency is specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SecondMode {
    NuB(f64),
    /// `Δν/λ`; `ν_b = ν_a − ratio·λ` solved self-consistently since λ
    /// depends on `ν_b` through the ground-state width.
    DnuOverLambda(f64),
}

/// Builds a geometry from mixed specifications by fixed-point iteration.
pub fn resolve_geometry(
    nu_a: f64,
    second: SecondMode,
    direction: LaserDirection,
    k: f64,
    rabi_omega: f64,
    mass: f64,
    convention: LambdaConvention,
) -> Result<CouplingGeometry> {
    let build = |nu_b: f64| -> Result<CouplingGeometry> {
        let alpha = match direction {
            LaserDirection::Alpha(a) => a,
            LaserDirection::Theta(t) => alpha_for_theta(t, nu_a, nu_b, mass)?,
        };
        coupling_geometry(CouplingInputs { nu_a, nu_b, alpha, k, rabi_omega, mass }, convention)
    };
    match second {
        SecondMode::NuB(nu_b) => build(nu_b),
        SecondMode::DnuOverLambda(ratio) => {
            let mut nu_b = nu_a;
            for _ in 0..200 {
                let g = build(nu_b)?;
                let next = nu_a - ratio * g.lambda;
                if !(next > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "dnu_over_lambda = {ratio} drives nu_b non-positive"
                    )));
                }
                if (next - nu_b).abs() <= 4.0 * f64::EPSILON * nu_a {
                    return build(next);
                }
                nu_b = next;
            }
            Err(Error::NoConvergence("self-consistent nu_b for dnu_over_lambda".into()))
        }
    }
}

/// Operational thresholds for the validity predicates. The underlying
/// conditions are all of the form "much less than"; these make them concrete.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityThresholds {
    pub lamb_dicke_max: f64,
    /// Required `min(ν)/Ω`.
    pub drive_separation: f64,
    /// Required `min(ν)/|Δν|`.
    pub anisotropy_separation: f64,
    /// Upper bound on `|Δν/λ|²`.
    pub adiabatic_max: f64,
    /// `τ = coherence_factor/λ`.
    pub coherence_factor: f64,
}

impl Default for ValidityThresholds {
    fn default() -> Self {
        Self {
            lamb_dicke_max: 0.3,
            drive_separation: 10.0,
            anisotropy_separation: 10.0,
            adiabatic_max: 0.1,
            coherence_factor: 10.0,
        }
    }
}

/// Decoherence outlook from the cycle-to-coherence ratio `T/τ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoherenceOutlook {
    /// `T/τ < 1`
    Negligible,
    /// `1 ≤ T/τ < 10`
    Marginal,
    /// `T/τ ≥ 10` or no finite cycle
    Dominant,
}

impl DecoherenceOutlook {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Negligible => "negligible",
            Self::Marginal => "marginal",
            Self::Dominant => "dominant",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityReport {
    pub eta_x: f64,
    pub eta_z: f64,
    pub lamb_dicke_ok: bool,
    pub weak_drive_ok: bool,
    pub small_anisotropy_ok: bool,
    pub resonance_detuning: f64,
    pub adiabatic_ratio: f64,
    pub adiabatic_ok: bool,
    pub dnu_max: f64,
    /// `4π/|Δν|`, infinite for an isotropic trap.
    pub cycle_period: f64,
    pub cycle_infinite: bool,
    pub coherence_time: f64,
    pub cycle_vs_coherence: f64,
    pub decoherence: DecoherenceOutlook,
}

pub fn validity_report(g: &CouplingGeometry, th: &ValidityThresholds) -> ValidityReport {
    let nu_min = g.inputs.nu_a.min(g.inputs.nu_b);
    let adiabatic_ratio = (g.dnu / g.lambda).powi(2);
    let cycle_infinite = g.dnu == 0.0;
    let cycle_period = if cycle_infinite { f64::INFINITY } else { 4.0 * PI / g.dnu.abs() };
    let coherence_time = th.coherence_factor / g.lambda;
    let cycle_vs_coherence = cycle_period / coherence_time;
    let decoherence = if cycle_vs_coherence < 1.0 {
        DecoherenceOutlook::Negligible
    } else if cycle_vs_coherence < 10.0 {
        DecoherenceOutlook::Marginal
    } else {
        DecoherenceOutlook::Dominant
    };
    ValidityReport {
        eta_x: g.eta_x,
        eta_z: g.eta_z,
        lamb_dicke_ok: g.eta_x < th.lamb_dicke_max && g.eta_z < th.lamb_dicke_max,
        weak_drive_ok: g.inputs.rabi_omega < nu_min / th.drive_separation,
        small_anisotropy_ok: g.dnu.abs() < nu_min / th.anisotropy_separation,
        resonance_detuning: g.delta_res,
        adiabatic_ratio,
        adiabatic_ok: adiabatic_ratio < th.adiabatic_max,
        dnu_max: g.lambda * th.adiabatic_max.sqrt(),
        cycle_period,
        cycle_infinite,
        coherence_time,
        cycle_vs_coherence,
        decoherence,
    }
}
