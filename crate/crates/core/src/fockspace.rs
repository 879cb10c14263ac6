//! Truncated two-mode boson ⊗ two-level spin Hilbert space.
//!
//! States `|n_a, n_b, s⟩` are kept when `n_a + n_b ≤ n_max`. The basis is
//! ordered by the conserved charge `C = n_a + n_b + 2·[s = +]`, then by `n_a`,
//! then by spin (`−` before `+`), so every charge block occupies a contiguous
//! index range.
//!
//! Ladder matrices silently drop transitions that would leave the truncated
//! space. Because the model Hamiltonian commutes with `C`, this truncation is
//! exact for any state supported on blocks with `C ≤ n_max`.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, ComplexVector, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Spin {
    Minus,
    Plus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FockState {
    pub na: usize,
    pub nb: usize,
    pub spin: Spin,
}

impl FockState {
    pub const fn new(na: usize, nb: usize, spin: Spin) -> Self {
        Self { na, nb, spin }
    }

    pub fn charge(&self) -> usize {
        self.na + self.nb + if self.spin == Spin::Plus { 2 } else { 0 }
    }
}

/// Contiguous index range of one charge sector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChargeBlock {
    pub charge: usize,
    pub start: usize,
    pub len: usize,
}

impl ChargeBlock {
    pub fn range(&self) -> Range<usize> {
        self.start..self.start + self.len
    }

    /// A block is complete when truncation removed none of its states, i.e.
    /// `charge ≤ n_max`.
    pub fn is_complete(&self, n_max: usize) -> bool {
        self.charge <= n_max
    }
}

#[derive(Debug, Clone)]
pub struct FockBasis {
    n_max: usize,
    states: Vec<FockState>,
    index: HashMap<FockState, usize>,
    blocks: Vec<ChargeBlock>,
}

impl FockBasis {
    pub fn new(n_max: usize) -> Self {
        let mut states = Vec::with_capacity((n_max + 1) * (n_max + 2));
        let mut blocks = Vec::new();
        for charge in 0..=n_max + 2 {
            let start = states.len();
            for na in 0..=charge {
                for spin in [Spin::Minus, Spin::Plus] {
                    let bosons = charge as isize - if spin == Spin::Plus { 2 } else { 0 };
                    let nb = bosons - na as isize;
                    if nb < 0 || bosons as usize > n_max {
                        continue;
                    }
                    states.push(FockState::new(na, nb as usize, spin));
                }
            }
            if states.len() > start {
                blocks.push(ChargeBlock { charge, start, len: states.len() - start });
            }
        }
        let index = states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        Self { n_max, states, index, blocks }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[FockState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> FockState {
        self.states[i]
    }

    pub fn index_of(&self, s: FockState) -> Option<usize> {
        self.index.get(&s).copied()
    }

    pub fn blocks(&self) -> &[ChargeBlock] {
        &self.blocks
    }

    pub fn block(&self, charge: usize) -> Option<&ChargeBlock> {
        self.blocks.iter().find(|b| b.charge == charge)
    }

    /// Basis vector for a single product state.
    pub fn ket(&self, s: FockState) -> Result<ComplexVector> {
        let i = self
            .index_of(s)
            .ok_or_else(|| Error::InvalidArgument(format!("{s:?} is outside n_max = {}", self.n_max)))?;
        let mut v = ComplexVector::zeros(self.dim());
        v[i] = C64::new(1.0, 0.0);
        Ok(v)
    }

    /// Squared weight of `v` in each charge block, in block order.
    pub fn charge_weights(&self, v: &ComplexVector) -> Vec<(usize, f64)> {
        self.blocks
            .iter()
            .map(|b| (b.charge, v.rows(b.start, b.len).norm_squared()))
            .collect()
    }

    /// Norm of the part of `v` lying in blocks with `C > n_max`.
    pub fn norm_outside_complete_blocks(&self, v: &ComplexVector) -> f64 {
        self.blocks
            .iter()
            .filter(|b| !b.is_complete(self.n_max))
            .map(|b| v.rows(b.start, b.len).norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    /// Rejects vectors of the wrong dimension or with weight on truncated blocks.
    pub fn check_in_range(&self, v: &ComplexVector) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: v.len() });
        }
        let leak = self.norm_outside_complete_blocks(v);
        if leak > 1e-12 {
            return Err(Error::TruncationLeak { norm: leak, n_max: self.n_max });
        }
        Ok(())
    }

    /// Re-express `v` in a larger (or smaller) truncation. Amplitudes on states
    /// missing from `target` must vanish.
    pub fn transfer(&self, v: &ComplexVector, target: &FockBasis) -> Result<ComplexVector> {
        let mut out = ComplexVector::zeros(target.dim());
        for (i, s) in self.states.iter().enumerate() {
            match target.index_of(*s) {
                Some(j) => out[j] = v[i],
                None if v[i].norm() > 1e-14 => {
                    return Err(Error::TruncationLeak { norm: v[i].norm(), n_max: target.n_max })
                }
                None => {}
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Vibrational mode along x.
    A,
    /// Vibrational mode along z.
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinOp {
    Lower,
    Raise,
    Z,
}

/// Collective mode selector: the laser-coupled mode or its orthogonal partner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotatedMode {
    Coupled,
    Orthogonal,
}

/// Mixing angle `theta` of the coupled mode and loop parameter `phi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeAngle {
    pub theta: f64,
    pub phi: f64,
}

impl ModeAngle {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_2 + 1e-15).contains(&theta) || !phi.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "mode angle theta = {theta} must lie in [0, pi/2]"
            )));
        }
        Ok(Self { theta, phi })
    }

    pub fn with_phi(self, phi: f64) -> Self {
        Self { phi, ..self }
    }
}

/// Annihilation operator of a lab-frame mode.
pub fn ladder(mode: Mode, basis: &FockBasis) -> ComplexMatrix {
    let n = basis.dim();
    let mut m = ComplexMatrix::zeros(n, n);
    for (j, s) in basis.states().iter().enumerate() {
        let (count, lowered) = match mode {
            Mode::A if s.na > 0 => (s.na, FockState::new(s.na - 1, s.nb, s.spin)),
            Mode::B if s.nb > 0 => (s.nb, FockState::new(s.na, s.nb - 1, s.spin)),
            _ => continue,
        };
        if let Some(i) = basis.index_of(lowered) {
            m[(i, j)] = C64::new((count as f64).sqrt(), 0.0);
        }
    }
    m
}

/// Two-level operator tensored with the boson identity.
pub fn spin_op(kind: SpinOp, basis: &FockBasis) -> ComplexMatrix {
    let n = basis.dim();
    let mut m = ComplexMatrix::zeros(n, n);
    for (j, s) in basis.states().iter().enumerate() {
        match kind {
            SpinOp::Z => {
                m[(j, j)] = C64::new(if s.spin == Spin::Plus { 1.0 } else { -1.0 }, 0.0);
            }
            SpinOp::Lower if s.spin == Spin::Plus => {
                let i = basis.index_of(FockState::new(s.na, s.nb, Spin::Minus)).unwrap();
                m[(i, j)] = C64::new(1.0, 0.0);
            }
            SpinOp::Raise if s.spin == Spin::Minus => {
                if let Some(i) = basis.index_of(FockState::new(s.na, s.nb, Spin::Plus)) {
                    m[(i, j)] = C64::new(1.0, 0.0);
                }
            }
            _ => {}
        }
    }
    m
}

/// Annihilator of a rotated collective mode:
/// `A_φ = cosθ e^{iφ} a + sinθ e^{−iφ} b` and
/// `B_φ = −sinθ e^{iφ} a + cosθ e^{−iφ} b`.
pub fn rotated_mode(angle: ModeAngle, which: RotatedMode, basis: &FockBasis) -> ComplexMatrix {
    let (ca, cb) = rotated_coefficients(angle, which);
    ladder(Mode::A, basis) * ca + ladder(Mode::B, basis) * cb
}

/// Coefficients of `a` and `b` in the rotated annihilator.
pub fn rotated_coefficients(angle: ModeAngle, which: RotatedMode) -> (C64, C64) {
    let (s, c) = angle.theta.sin_cos();
    let plus = C64::from_polar(1.0, angle.phi);
    let minus = plus.conj();
    match which {
        RotatedMode::Coupled => (plus * c, minus * s),
        RotatedMode::Orthogonal => (-plus * s, minus * c),
    }
}

/// `|N⟩_φ = (A_φ†)^N / √N! |0,0⟩`, spin `−`.
pub fn bimodal_fock_state(n: usize, angle: ModeAngle, basis: &FockBasis) -> Result<ComplexVector> {
    if n > basis.n_max() {
        return Err(Error::InvalidArgument(format!(
            "bimodal Fock state N = {n} exceeds n_max = {}",
            basis.n_max()
        )));
    }
    // Binomial expansion: amplitude of |k, N−k⟩ is √C(N,k) ca^k cb^{N−k}.
    let (ca, cb) = rotated_coefficients(angle, RotatedMode::Coupled);
    let (ca, cb) = (ca.conj(), cb.conj());
    let mut v = ComplexVector::zeros(basis.dim());
    let mut binom = 1.0f64;
    for k in 0..=n {
        let i = basis
            .index_of(FockState::new(k, n - k, Spin::Minus))
            .expect("every state with na + nb <= n_max is in the basis");
        v[i] = ca.powu(k as u32) * cb.powu((n - k) as u32) * binom.sqrt();
        binom = binom * (n - k) as f64 / (k + 1) as f64;
    }
    Ok(v)
}

/// Move every spin-`−` amplitude onto the matching spin-`+` state (`σ₊ v`).
pub fn raise_spin(v: &ComplexVector, basis: &FockBasis) -> ComplexVector {
    let mut out = ComplexVector::zeros(basis.dim());
    for (i, s) in basis.states().iter().enumerate() {
        if s.spin == Spin::Minus && v[i] != C64::new(0.0, 0.0) {
            let j = basis.index_of(FockState::new(s.na, s.nb, Spin::Plus)).unwrap();
            out[j] = v[i];
        }
    }
    out
}

/// Diagonal of `C = a†a + b†b + 2σ₊σ₋`.
pub fn charge_diagonal(basis: &FockBasis) -> Vec<f64> {
    basis.states().iter().map(|s| s.charge() as f64).collect()
}

pub fn conserved_charge(basis: &FockBasis) -> ComplexMatrix {
    let d = ComplexVector::from_iterator(
        basis.dim(),
        charge_diagonal(basis).into_iter().map(|c| C64::new(c, 0.0)),
    );
    ComplexMatrix::from_diagonal(&d)
}

/// `⟨v|C|v⟩` evaluated from the diagonal.
pub fn charge_expectation(v: &ComplexVector, basis: &FockBasis) -> f64 {
    basis
        .states()
        .iter()
        .zip(v.iter())
        .map(|(s, a)| s.charge() as f64 * a.norm_sqr())
        .sum()
}

/// Eigenvalues `n_b − n_a` of the generator of `U_G(φ) = e^{iφ(b†b − a†a)}`.
pub fn number_difference(basis: &FockBasis) -> Vec<f64> {
    basis.states().iter().map(|s| s.nb as f64 - s.na as f64).collect()
}

/// Diagonal of `U_G(φ) = e^{iφ(b†b − a†a)}`.
pub fn mode_rotation(phi: f64, basis: &FockBasis) -> ComplexVector {
    ComplexVector::from_iterator(
        basis.dim(),
        number_difference(basis).into_iter().map(|g| C64::from_polar(1.0, phi * g)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::max_entry;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6, PI};

    /// `(A_φ†)^N/√N! |0,0,↓⟩` by repeated application of the operator.
    fn creation_oracle(n: usize, theta: f64, phi: f64, basis: &FockBasis) -> ComplexVector {
        let creation = rotated_mode(ModeAngle::new(theta, phi).unwrap(), RotatedMode::Coupled, basis).adjoint();
        let mut v = basis.ket(FockState::new(0, 0, Spin::Minus)).unwrap();
        for k in 1..=n {
            v = &creation * v / C64::new((k as f64).sqrt(), 0.0);
        }
        v
    }

    fn interior(basis: &FockBasis) -> Vec<usize> {
        (0..basis.dim())
            .filter(|&i| {
                let s = basis.state(i);
                s.na + s.nb < basis.n_max()
            })
            .collect()
    }

    fn max_on(m: &ComplexMatrix, idx: &[usize]) -> f64 {
        let mut worst = 0.0f64;
        for &i in idx {
            for &j in idx {
                worst = worst.max(m[(i, j)].norm());
            }
        }
        worst
    }

    #[test]
    fn dimension_and_ordering() {
        for n_max in 0..9 {
            let basis = FockBasis::new(n_max);
            assert_eq!(basis.dim(), (n_max + 1) * (n_max + 2));
            let keys: Vec<_> = basis
                .states()
                .iter()
                .map(|s| (s.charge(), s.na, s.spin))
                .collect();
            assert!(keys.windows(2).all(|w| w[0] < w[1]));
            for (i, s) in basis.states().iter().enumerate() {
                assert_eq!(basis.index_of(*s), Some(i));
            }
            let total: usize = basis.blocks().iter().map(|b| b.len).sum();
            assert_eq!(total, basis.dim());
        }
    }

    #[test]
    fn complete_blocks_have_2c_states() {
        let basis = FockBasis::new(7);
        for b in basis.blocks().iter().filter(|b| b.is_complete(7)) {
            let expected = if b.charge == 0 { 1 } else { 2 * b.charge };
            assert_eq!(b.len, expected, "charge {}", b.charge);
        }
    }

    #[test]
    fn ladder_matrix_elements() {
        let basis = FockBasis::new(4);
        let a = ladder(Mode::A, &basis);
        let at = |s0: FockState, s1: FockState| {
            a[(basis.index_of(s0).unwrap(), basis.index_of(s1).unwrap())]
        };
        assert_eq!(
            at(FockState::new(0, 0, Spin::Minus), FockState::new(1, 0, Spin::Minus)),
            C64::new(1.0, 0.0)
        );
        assert!(
            (at(FockState::new(2, 0, Spin::Minus), FockState::new(3, 0, Spin::Minus))
                - C64::new(3f64.sqrt(), 0.0))
            .norm()
                < 1e-15
        );
    }

    #[test]
    fn number_operators_are_diagonal_counts() {
        let basis = FockBasis::new(5);
        let a = ladder(Mode::A, &basis);
        let b = ladder(Mode::B, &basis);
        let na = a.adjoint() * &a;
        let nb = b.adjoint() * &b;
        for (i, s) in basis.states().iter().enumerate() {
            assert!((na[(i, i)].re - s.na as f64).abs() < 1e-14);
            assert!((nb[(i, i)].re - s.nb as f64).abs() < 1e-14);
        }
        let mut off = na.clone();
        off.fill_diagonal(C64::new(0.0, 0.0));
        assert_eq!(max_entry(&off), 0.0);
    }

    #[test]
    fn spin_operators() {
        let basis = FockBasis::new(3);
        let lower = spin_op(SpinOp::Lower, &basis);
        let up = basis.ket(FockState::new(1, 1, Spin::Plus)).unwrap();
        let down = basis.ket(FockState::new(1, 1, Spin::Minus)).unwrap();
        assert_eq!(&lower * &up, down);
        assert_eq!((&lower * &down).norm(), 0.0);
        let z = spin_op(SpinOp::Z, &basis);
        assert_eq!(up.dotc(&(&z * &up)), C64::new(1.0, 0.0));
        assert_eq!(spin_op(SpinOp::Raise, &basis), lower.adjoint());
    }

    #[test]
    fn rotated_mode_axis_aligned() {
        let basis = FockBasis::new(4);
        let a = rotated_mode(ModeAngle::new(0.0, 0.0).unwrap(), RotatedMode::Coupled, &basis);
        assert!(max_entry(&(a - ladder(Mode::A, &basis))) < 1e-15);
        let b = rotated_mode(ModeAngle::new(FRAC_PI_2, 0.0).unwrap(), RotatedMode::Coupled, &basis);
        assert!(max_entry(&(b - ladder(Mode::B, &basis))) < 1e-15);
    }

    #[test]
    fn rotated_mode_commutators() {
        let basis = FockBasis::new(6);
        let idx = interior(&basis);
        let id = ComplexMatrix::identity(basis.dim(), basis.dim());
        for (theta, phi) in [(0.3, 0.0), (FRAC_PI_6, 1.1), (1.2, -2.4), (FRAC_PI_4, PI / 3.0)] {
            let angle = ModeAngle::new(theta, phi).unwrap();
            let a = rotated_mode(angle, RotatedMode::Coupled, &basis);
            let b = rotated_mode(angle, RotatedMode::Orthogonal, &basis);
            let ad = a.adjoint();
            let bd = b.adjoint();
            assert!(max_on(&(&a * &ad - &ad * &a - &id), &idx) <= 1e-12);
            assert!(max_on(&(&b * &bd - &bd * &b - &id), &idx) <= 1e-12);
            assert!(max_on(&(&a * &bd - &bd * &a), &idx) <= 1e-12);
            assert!(max_on(&(&a * &b - &b * &a), &idx) <= 1e-12);

            // passive rotation preserves the total boson number
            let la = ladder(Mode::A, &basis);
            let lb = ladder(Mode::B, &basis);
            let total = la.adjoint() * &la + lb.adjoint() * &lb;
            assert!(max_on(&(&ad * &a + &bd * &b - total), &idx) <= 1e-12);
        }
    }

    #[test]
    fn vacuum_and_single_quantum() {
        let basis = FockBasis::new(5);
        let vac = bimodal_fock_state(0, ModeAngle::new(0.7, 0.4).unwrap(), &basis).unwrap();
        assert_eq!(vac, basis.ket(FockState::new(0, 0, Spin::Minus)).unwrap());

        let one = bimodal_fock_state(1, ModeAngle::new(FRAC_PI_6, 0.0).unwrap(), &basis).unwrap();
        let ia = basis.index_of(FockState::new(1, 0, Spin::Minus)).unwrap();
        let ib = basis.index_of(FockState::new(0, 1, Spin::Minus)).unwrap();
        assert!((one[ia] - C64::new(3f64.sqrt() / 2.0, 0.0)).norm() < 1e-15);
        assert!((one[ib] - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((one.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bimodal_states_match_creation_operator() {
        let basis = FockBasis::new(8);
        for n in 0..=8 {
            for (theta, phi) in [(0.3, 0.2), (FRAC_PI_6, -1.3), (1.4, 2.9)] {
                let v = bimodal_fock_state(n, ModeAngle::new(theta, phi).unwrap(), &basis).unwrap();
                let oracle = creation_oracle(n, theta, phi, &basis);
                assert!((&v - &oracle).norm() < 1e-12, "N = {n}");
                assert!((v.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bimodal_state_rejects_large_n() {
        let basis = FockBasis::new(3);
        assert!(bimodal_fock_state(4, ModeAngle::new(0.3, 0.0).unwrap(), &basis).is_err());
    }

    #[test]
    fn bimodal_state_is_charge_eigenvector() {
        let basis = FockBasis::new(6);
        let c = conserved_charge(&basis);
        for n in 0..=6 {
            let v = bimodal_fock_state(n, ModeAngle::new(0.9, 0.5).unwrap(), &basis).unwrap();
            assert!((&c * &v - &v * C64::new(n as f64, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn charge_values() {
        assert_eq!(FockState::new(3, 1, Spin::Minus).charge(), 4);
        assert_eq!(FockState::new(1, 1, Spin::Plus).charge(), 4);
        let basis = FockBasis::new(4);
        let c = conserved_charge(&basis);
        let i = basis.index_of(FockState::new(3, 1, Spin::Minus)).unwrap();
        assert_eq!(c[(i, i)].re, 4.0);
    }

    #[test]
    fn mode_rotation_full_turn_is_identity() {
        let basis = FockBasis::new(6);
        let u = mode_rotation(2.0 * PI, &basis);
        assert!(u.iter().all(|x| (x - C64::new(1.0, 0.0)).norm() < 1e-13));
    }

    #[test]
    fn raise_spin_matches_matrix() {
        let basis = FockBasis::new(4);
        let v = bimodal_fock_state(3, ModeAngle::new(0.4, 0.1).unwrap(), &basis).unwrap();
        let raised = spin_op(SpinOp::Raise, &basis) * &v;
        assert!((raise_spin(&v, &basis) - raised).norm() < 1e-15);
    }

    #[test]
    fn transfer_between_truncations() {
        let small = FockBasis::new(3);
        let large = FockBasis::new(6);
        let v = bimodal_fock_state(3, ModeAngle::new(0.4, 0.1).unwrap(), &small).unwrap();
        let w = small.transfer(&v, &large).unwrap();
        let direct = bimodal_fock_state(3, ModeAngle::new(0.4, 0.1).unwrap(), &large).unwrap();
        assert!((w - &direct).norm() < 1e-14);
        assert!(large.transfer(&direct, &FockBasis::new(2)).is_err());
    }
}
