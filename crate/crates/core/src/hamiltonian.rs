//! Interaction-picture Hamiltonian `H_φ = −λ[(A_φ†)² σ₋ + A_φ² σ₊]`, its
//! time parametrization `φ = Δν t/2`, the rotating-frame generator, and
//! instantaneous spectra.
//!
//! Every operator here commutes with the conserved charge, so matrices are
//! built block by block and the full-space matrix is their direct sum.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::fockspace::{
    bimodal_fock_state, raise_spin, ChargeBlock, FockBasis, FockState, ModeAngle, Spin,
};
use crate::numerics::{hermitian_eig, ComplexMatrix, ComplexVector, C64};
use crate::trap::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpectrumLabel {
    /// `Ψ_{N±}`, `N ≥ 2`.
    Singlet { n: usize, branch: Branch },
    /// `|member⟩_φ|−⟩` with `member ∈ {0, 1}`.
    ZeroDoublet { member: usize },
    Unlabeled,
}

#[derive(Debug, Clone)]
pub struct SpectrumEntry {
    pub energy: f64,
    pub vector: ComplexVector,
    pub label: SpectrumLabel,
    pub charge: usize,
}

/// `λ√(N(N−1))`.
pub fn singlet_energy(lambda: f64, n: usize) -> f64 {
    lambda * ((n * n.saturating_sub(1)) as f64).sqrt()
}

/// `H_φ` restricted to one charge block, in block-local indices.
pub fn h_phi_block(p: &ModelParams, basis: &FockBasis, phi: f64, block: &ChargeBlock) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(block.len, block.len);
    let (s, c) = p.theta.sin_cos();
    let e2 = C64::from_polar(1.0, -2.0 * phi);
    for j in block.range() {
        let st = basis.state(j);
        if st.spin != Spin::Plus {
            continue;
        }
        let (na, nb) = (st.na as f64, st.nb as f64);
        // (A_φ†)² = c² e^{−2iφ} a†² + 2cs a†b† + s² e^{2iφ} b†²
        let targets = [
            (FockState::new(st.na + 2, st.nb, Spin::Minus), e2 * (c * c * ((na + 1.0) * (na + 2.0)).sqrt())),
            (FockState::new(st.na + 1, st.nb + 1, Spin::Minus), C64::new(2.0 * c * s * ((na + 1.0) * (nb + 1.0)).sqrt(), 0.0)),
            (FockState::new(st.na, st.nb + 2, Spin::Minus), e2.conj() * (s * s * ((nb + 1.0) * (nb + 2.0)).sqrt())),
        ];
        for (target, coef) in targets {
            if let Some(i) = basis.index_of(target) {
                let value = coef * -p.lambda;
                h[(i - block.start, j - block.start)] = value;
                h[(j - block.start, i - block.start)] = value.conj();
            }
        }
    }
    h
}

/// Assemble a full-space matrix from per-block pieces.
pub fn assemble_blocks(basis: &FockBasis, mut piece: impl FnMut(&ChargeBlock) -> ComplexMatrix) -> ComplexMatrix {
    let mut full = ComplexMatrix::zeros(basis.dim(), basis.dim());
    for b in basis.blocks() {
        full.view_mut((b.start, b.start), (b.len, b.len)).copy_from(&piece(b));
    }
    full
}

pub fn build_h_phi(p: &ModelParams, basis: &FockBasis, phi: f64) -> ComplexMatrix {
    assemble_blocks(basis, |b| h_phi_block(p, basis, phi, b))
}

/// Loop parameter at time `t`.
pub fn phi_at(p: &ModelParams, t: f64) -> f64 {
    p.dnu() * t / 2.0
}

pub fn build_h_t(p: &ModelParams, basis: &FockBasis, t: f64) -> ComplexMatrix {
    build_h_phi(p, basis, phi_at(p, t))
}

/// Rotating-frame generator `H_{φ=0} + (Δν/2)(b†b − a†a)` on one block.
pub fn h_eff_block(p: &ModelParams, basis: &FockBasis, block: &ChargeBlock) -> ComplexMatrix {
    let mut h = h_phi_block(p, basis, 0.0, block);
    let half = p.dnu() / 2.0;
    for (k, i) in block.range().enumerate() {
        let st = basis.state(i);
        h[(k, k)] += C64::new(half * (st.nb as f64 - st.na as f64), 0.0);
    }
    h
}

pub fn build_h_eff(p: &ModelParams, basis: &FockBasis) -> ComplexMatrix {
    assemble_blocks(basis, |b| h_eff_block(p, basis, b))
}

/// Closed-form instantaneous eigenstates for the requested `N`.
///
/// `N ≥ 2` yields `Ψ_{N+}` then `Ψ_{N−}`; `N ∈ {0, 1}` yields the
/// zero-energy doublet member.
pub fn analytic_spectrum(
    p: &ModelParams,
    basis: &FockBasis,
    phi: f64,
    n_list: &[usize],
) -> Result<Vec<SpectrumEntry>> {
    let angle = ModeAngle::new(p.theta, phi)?;
    let mut out = Vec::new();
    for &n in n_list {
        if n > basis.n_max() {
            return Err(Error::InvalidArgument(format!("N = {n} exceeds n_max = {}", basis.n_max())));
        }
        let upper = bimodal_fock_state(n, angle, basis)?;
        if n < 2 {
            out.push(SpectrumEntry {
                energy: 0.0,
                vector: upper,
                label: SpectrumLabel::ZeroDoublet { member: n },
                charge: n,
            });
            continue;
        }
        let lower = raise_spin(&bimodal_fock_state(n - 2, angle, basis)?, basis);
        for branch in [Branch::Plus, Branch::Minus] {
            let vector = (&upper - &lower * C64::new(branch.sign(), 0.0)) * C64::new(FRAC_1_SQRT_2, 0.0);
            out.push(SpectrumEntry {
                energy: branch.sign() * singlet_energy(p.lambda, n),
                vector,
                label: SpectrumLabel::Singlet { n, branch },
                charge: n,
            });
        }
    }
    Ok(out)
}

/// Overlap² above which a numeric eigenvector inherits an analytic label.
pub const LABEL_THRESHOLD: f64 = 0.99;

/// Numerical instantaneous spectrum of every complete charge block
/// (`C ≤ n_max`), labeled against [`analytic_spectrum`].
///
/// Within a degenerate eigenspace the numeric basis is rotated so that an
/// analytic member, when present, appears as one of the returned vectors.
pub fn numeric_spectrum(p: &ModelParams, basis: &FockBasis, phi: f64) -> Result<Vec<SpectrumEntry>> {
    let mut out = Vec::new();
    for block in basis.blocks().iter().filter(|b| b.is_complete(basis.n_max())) {
        out.extend(block_spectrum(p, basis, phi, block)?);
    }
    Ok(out)
}

/// Labeled spectrum of a single complete block.
pub fn block_spectrum(
    p: &ModelParams,
    basis: &FockBasis,
    phi: f64,
    block: &ChargeBlock,
) -> Result<Vec<SpectrumEntry>> {
    let h = h_phi_block(p, basis, phi, block);
    let eig = hermitian_eig(&h)?;
    let candidates = analytic_spectrum(p, basis, phi, &[block.charge])?;
    let local: Vec<ComplexVector> = candidates
        .iter()
        .map(|c| c.vector.rows(block.start, block.len).into_owned())
        .collect();

    let mut vectors: Vec<ComplexVector> = (0..eig.dim()).map(|k| eig.vector(k)).collect();
    let mut labels = vec![SpectrumLabel::Unlabeled; eig.dim()];
    let tol = degeneracy_tolerance(p, block.charge);
    for (cand, target) in candidates.iter().zip(&local) {
        let cluster: Vec<usize> = (0..eig.dim())
            .filter(|&k| (eig.values[k] - cand.energy).abs() <= tol && labels[k] == SpectrumLabel::Unlabeled)
            .collect();
        if cluster.is_empty() {
            continue;
        }
        let weight: f64 = cluster.iter().map(|&k| vectors[k].dotc(target).norm_sqr()).sum();
        if weight <= LABEL_THRESHOLD {
            continue;
        }
        if cluster.len() > 1 {
            align_cluster(&mut vectors, &cluster, target);
        }
        labels[cluster[0]] = cand.label;
    }

    Ok((0..eig.dim())
        .map(|k| {
            let mut vector = ComplexVector::zeros(basis.dim());
            vector.rows_mut(block.start, block.len).copy_from(&vectors[k]);
            SpectrumEntry { energy: eig.values[k], vector, label: labels[k], charge: block.charge }
        })
        .collect())
}

fn degeneracy_tolerance(p: &ModelParams, charge: usize) -> f64 {
    1e-8 * p.lambda.abs().max(f64::MIN_POSITIVE) * (1.0 + singlet_energy(1.0, charge))
}

/// Replace the cluster's vectors by an orthonormal basis of the same span
/// whose first member is the normalized projection of `target`.
fn align_cluster(vectors: &mut [ComplexVector], cluster: &[usize], target: &ComplexVector) {
    let mut projected = ComplexVector::zeros(target.len());
    for &k in cluster {
        projected += &vectors[k] * vectors[k].dotc(target);
    }
    let mut new_basis = vec![projected.normalize()];
    for &k in cluster {
        let mut v = vectors[k].clone();
        for u in &new_basis {
            v -= u * u.dotc(&v);
        }
        if v.norm() > 1e-6 && new_basis.len() < cluster.len() {
            new_basis.push(v.normalize());
        }
    }
    for (&k, v) in cluster.iter().zip(new_basis) {
        vectors[k] = v;
    }
}
