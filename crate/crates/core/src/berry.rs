//! Geometric phases accumulated over the loop `φ: 0 → 2π`.
//!
//! Three independent routes are provided: the closed form, quadrature of the
//! analytic Berry connection, and a gauge-invariant discrete Wilson loop over
//! numerically diagonalized charge blocks.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fockspace::{bimodal_fock_state, ChargeBlock, FockBasis, ModeAngle};
use crate::hamiltonian::{analytic_spectrum, h_phi_block, SpectrumLabel};
use crate::numerics::{hermitian_eig, wrap_phase, ComplexVector, Eigen, C64, I};
use crate::trap::ModelParams;

/// Which family of instantaneous eigenstates a phase refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Bimodal Fock states `|N⟩_φ`.
    Ket,
    /// Singlets `Ψ_{N±}`; both branches share the phase.
    Singlet,
}

/// `2 sin²θ − 1`, the per-quantum winding of the coupled mode.
pub fn anisotropy_factor(theta: f64) -> f64 {
    -(2.0 * theta).cos()
}

fn winding_number(n: usize, family: Family) -> Result<f64> {
    match family {
        Family::Ket => Ok(n as f64),
        Family::Singlet if n >= 2 => Ok(n as f64 - 1.0),
        Family::Singlet => Err(Error::InvalidArgument(format!("singlet family requires N >= 2, got {n}"))),
    }
}

/// Unreduced Berry phase over one loop: `−2π(2sin²θ − 1)·N` for `|N⟩_φ` and
/// `−2π(2sin²θ − 1)·(N − 1)` for `Ψ_{N±}`. The two conventions differ by an
/// `N`-independent offset.
pub fn berry_closed_form(n: usize, theta: f64, family: Family) -> Result<f64> {
    Ok(-2.0 * PI * anisotropy_factor(theta) * winding_number(n, family)?)
}

/// `⟨n(φ)|∂_φ n(φ)⟩`, which is purely imaginary and independent of `φ`.
pub fn berry_connection(n: usize, theta: f64, _phi: f64, family: Family) -> Result<C64> {
    Ok(I * anisotropy_factor(theta) * winding_number(n, family)?)
}

/// `i∮⟨n|∂_φ n⟩dφ` by the trapezoidal rule on `samples` panels.
pub fn connection_integral(n: usize, theta: f64, family: Family, samples: usize) -> Result<f64> {
    let h = 2.0 * PI / samples as f64;
    let mut sum = C64::new(0.0, 0.0);
    for k in 0..=samples {
        let w = if k == 0 || k == samples { 0.5 } else { 1.0 };
        sum += berry_connection(n, theta, k as f64 * h, family)? * w;
    }
    Ok((I * sum * h).re)
}

/// `γ_N − γ_{N+1}` reduced to `(−π, π]`.
pub fn phase_difference(n: usize, theta: f64, family: Family) -> Result<f64> {
    Ok(wrap_phase(berry_closed_form(n, theta, family)? - berry_closed_form(n + 1, theta, family)?))
}

/// Discretization of the loop and the level to follow around it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopSpec {
    pub samples: usize,
    pub selector: SpectrumLabel,
}

impl LoopSpec {
    pub fn new(samples: usize, selector: SpectrumLabel) -> Result<Self> {
        if samples < 3 {
            return Err(Error::InvalidArgument(format!("loop needs at least 3 samples, got {samples}")));
        }
        if selector == SpectrumLabel::Unlabeled {
            return Err(Error::InvalidArgument("loop selector must name a labeled level".into()));
        }
        Ok(Self { samples, selector })
    }

    fn charge(&self) -> usize {
        match self.selector {
            SpectrumLabel::Singlet { n, .. } => n,
            SpectrumLabel::ZeroDoublet { member } => member,
            SpectrumLabel::Unlabeled => unreachable!(),
        }
    }

    pub fn phi(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.samples as f64
    }
}

/// Minimum gap separating a tracked level from its neighbors, in units of λ.
pub const GAP_TOLERANCE: f64 = 1e-8;
/// Below this max overlap² adjacent samples cannot be matched.
pub const MATCH_THRESHOLD: f64 = 0.5;

struct Sample {
    eig: Eigen,
    /// Analytic family member at this φ, block-local.
    reference: ComplexVector,
    target_energy: f64,
}

fn loop_block<'a>(basis: &'a FockBasis, spec: &LoopSpec) -> Result<&'a ChargeBlock> {
    let charge = spec.charge();
    basis
        .block(charge)
        .filter(|b| b.is_complete(basis.n_max()))
        .ok_or_else(|| Error::InvalidArgument(format!("charge block {charge} is truncated by n_max = {}", basis.n_max())))
}

fn diagonalize_samples(p: &ModelParams, basis: &FockBasis, spec: &LoopSpec, block: &ChargeBlock) -> Result<Vec<Sample>> {
    (0..spec.samples)
        .into_par_iter()
        .map(|k| {
            let phi = spec.phi(k);
            let eig = hermitian_eig(&h_phi_block(p, basis, phi, block))?;
            let entry = analytic_spectrum(p, basis, phi, &[block.charge])?
                .into_iter()
                .find(|e| e.label == spec.selector)
                .ok_or_else(|| Error::InvalidArgument(format!("no level {:?} in block {}", spec.selector, block.charge)))?;
            Ok(Sample {
                eig,
                reference: entry.vector.rows(block.start, block.len).into_owned(),
                target_energy: entry.energy,
            })
        })
        .collect()
}

/// Indices of eigenvalues within `tol` of `energy`.
fn cluster_around(eig: &Eigen, energy: f64, tol: f64) -> Vec<usize> {
    (0..eig.dim()).filter(|&k| (eig.values[k] - energy).abs() <= tol).collect()
}

fn project(eig: &Eigen, cluster: &[usize], v: &ComplexVector) -> ComplexVector {
    let mut out = ComplexVector::zeros(v.len());
    for &k in cluster {
        let u = eig.vector(k);
        out += &u * u.dotc(v);
    }
    out
}

/// Eigenvectors of the selected level at each loop sample, block-local.
///
/// Non-degenerate levels are followed by maximal overlap with the previous
/// sample. A level inside a degenerate cluster (the zero doublet) is followed
/// by projecting the family member onto the numerical eigenspace.
pub fn loop_eigenvectors(p: &ModelParams, basis: &FockBasis, spec: &LoopSpec) -> Result<Vec<ComplexVector>> {
    let block = loop_block(basis, spec)?;
    let samples = diagonalize_samples(p, basis, spec, block)?;
    let gap_tol = GAP_TOLERANCE * p.lambda.abs();
    let degenerate_level = matches!(spec.selector, SpectrumLabel::ZeroDoublet { .. });

    let mut out: Vec<ComplexVector> = Vec::with_capacity(spec.samples);
    for (k, s) in samples.iter().enumerate() {
        let phi = spec.phi(k);
        let cluster = cluster_around(&s.eig, s.target_energy, gap_tol.max(1e-300));
        if cluster.len() > 1 || degenerate_level {
            if !degenerate_level {
                let gap = cluster
                    .iter()
                    .map(|&i| (s.eig.values[i] - s.target_energy).abs())
                    .fold(0.0, f64::max);
                return Err(Error::GapCollapse { phi, gap });
            }
            let projected = project(&s.eig, &cluster, &s.reference);
            let weight = projected.norm_squared();
            if weight < MATCH_THRESHOLD {
                return Err(Error::AmbiguousTracking { phi, max_overlap: weight });
            }
            out.push(projected / C64::new(weight.sqrt(), 0.0));
            continue;
        }

        let anchor = out.last().unwrap_or(&s.reference);
        let (best, weight) = (0..s.eig.dim())
            .map(|i| (i, s.eig.vectors.column(i).dotc(anchor).norm_sqr()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if weight < MATCH_THRESHOLD {
            return Err(Error::AmbiguousTracking { phi, max_overlap: weight });
        }
        let gap = (0..s.eig.dim())
            .filter(|&i| i != best)
            .map(|i| (s.eig.values[i] - s.eig.values[best]).abs())
            .fold(f64::INFINITY, f64::min);
        if gap <= gap_tol {
            return Err(Error::GapCollapse { phi, gap });
        }
        out.push(s.eig.vector(best));
    }
    Ok(out)
}

/// `−arg ∏⟨v_k|v_{k+1}⟩` around a closed loop (`v_M = v_0`), in `(−π, π]`.
pub fn wilson_phase(vectors: &[ComplexVector]) -> Result<f64> {
    let product = loop_overlaps(vectors)?.into_iter().fold(C64::new(1.0, 0.0), |acc, o| acc * o);
    if product.norm() == 0.0 {
        return Err(Error::AmbiguousTracking { phi: 0.0, max_overlap: 0.0 });
    }
    Ok(wrap_phase(-product.arg()))
}

fn loop_overlaps(vectors: &[ComplexVector]) -> Result<Vec<C64>> {
    if vectors.len() < 3 {
        return Err(Error::InvalidArgument("loop needs at least 3 vectors".into()));
    }
    let m = vectors.len();
    (0..m)
        .map(|k| {
            let (a, b) = (&vectors[k], &vectors[(k + 1) % m]);
            if a.len() != b.len() {
                return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
            }
            Ok(a.dotc(b))
        })
        .collect()
}

/// Wilson-loop Berry phase of the selected level, reduced to `(−π, π]`.
pub fn wilson_loop_phase(p: &ModelParams, basis: &FockBasis, spec: &LoopSpec) -> Result<f64> {
    wilson_phase(&loop_eigenvectors(p, basis, spec)?)
}

/// Unreduced Wilson-loop phase: each sample is first gauge-fixed to the
/// analytic family member, then per-segment arguments (each required to lie
/// strictly inside `(−π, π)`) are accumulated without reduction.
pub fn wilson_loop_phase_unwrapped(p: &ModelParams, basis: &FockBasis, spec: &LoopSpec) -> Result<f64> {
    let block = loop_block(basis, spec)?;
    let mut vectors = loop_eigenvectors(p, basis, spec)?;
    let angle = ModeAngle::new(p.theta, 0.0)?;
    for (k, v) in vectors.iter_mut().enumerate() {
        let phi = spec.phi(k);
        let reference = analytic_spectrum(p, basis, phi, &[block.charge])?
            .into_iter()
            .find(|e| e.label == spec.selector)
            .map(|e| e.vector.rows(block.start, block.len).into_owned())
            .unwrap_or_else(|| bimodal_fock_state(block.charge, angle.with_phi(phi), basis).unwrap());
        let o = v.dotc(&reference);
        if o.norm() > 0.0 {
            *v *= o / C64::new(o.norm(), 0.0);
        }
    }
    let mut total = 0.0;
    for (k, o) in loop_overlaps(&vectors)?.into_iter().enumerate() {
        let arg = o.arg();
        if arg.abs() >= PI * (1.0 - 1e-12) {
            return Err(Error::AmbiguousTracking { phi: spec.phi(k), max_overlap: o.norm_sqr() });
        }
        total += arg;
    }
    Ok(-total)
}

/// Accumulated 2×2 overlap holonomy of the zero doublet
/// `{|0⟩_φ|−⟩, |1⟩_φ|−⟩}`, with each member taken as the projection of the
/// family state onto the numerical zero eigenspace of its block.
pub fn doublet_holonomy(p: &ModelParams, basis: &FockBasis, samples: usize) -> Result<[[C64; 2]; 2]> {
    let specs = [
        LoopSpec::new(samples, SpectrumLabel::ZeroDoublet { member: 0 })?,
        LoopSpec::new(samples, SpectrumLabel::ZeroDoublet { member: 1 })?,
    ];
    let members: Vec<Vec<ComplexVector>> = specs
        .iter()
        .map(|spec| {
            let block = loop_block(basis, spec)?;
            let local = loop_eigenvectors(p, basis, spec)?;
            Ok(local
                .into_iter()
                .map(|v| {
                    let mut full = ComplexVector::zeros(basis.dim());
                    full.rows_mut(block.start, block.len).copy_from(&v);
                    full
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let mut w = [[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]];
    for k in 0..samples {
        let next = (k + 1) % samples;
        let mut m = [[C64::new(0.0, 0.0); 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = members[i][k].dotc(&members[j][next]);
            }
        }
        let mut prod = [[C64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                prod[i][j] = w[i][0] * m[0][j] + w[i][1] * m[1][j];
            }
        }
        w = prod;
    }
    Ok(w)
}
