//! Pure states in the conserved-excitation subspaces and the density
//! matrices derived from them.
//!
//! The interaction conserves `a†a + σ₁⁺σ₁⁻ + σ₂⁺σ₂⁻`, so a state with `N`
//! excitations never leaves a three-dimensional (`N = 1`) or
//! four-dimensional (`N ≥ 2`) block. Basis ordering is fixed:
//!
//! | N       | index 0          | index 1        | index 2        | index 3          |
//! |---------|------------------|----------------|----------------|------------------|
//! | 1       | `|e₁,g₂,0⟩`      | `|g₁,e₂,0⟩`    | `|g₁,g₂,1⟩`    |                  |
//! | n+1 ≥ 2 | `|e₁,e₂,n−1⟩`    | `|e₁,g₂,n⟩`    | `|g₁,e₂,n⟩`    | `|g₁,g₂,n+1⟩`    |

use core::fmt;

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::Error;

/// Complex amplitude type used throughout the crate.
pub type C64 = Complex<f64>;

/// Allowed deviation of `Σ|aᵢ|²` from one for a constructed state.
pub const NORM_TOL: f64 = 1e-9;
/// Allowed deviation of the norm before `pure_density` refuses a state.
pub const DENSITY_NORM_TOL: f64 = 1e-6;
/// Hermiticity tolerance for density matrices.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Trace tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-9;
/// Most negative eigenvalue a density matrix may carry.
pub const EIGEN_FLOOR: f64 = -1e-9;

/// Excitation state of a single two-level atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Excited,
    Ground,
}

impl Level {
    /// Local index used for reduced matrices: excited = 0, ground = 1.
    pub fn index(self) -> usize {
        match self {
            Level::Excited => 0,
            Level::Ground => 1,
        }
    }
}

/// Labels of one basis ket: atom 1, atom 2, photon number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisKet {
    pub atom1: Level,
    pub atom2: Level,
    pub photons: u32,
}

/// Eigenvalue `N` of the excitation-number operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExcitationSubspace(u32);

impl ExcitationSubspace {
    pub const fn new(excitations: u32) -> Self {
        Self(excitations)
    }

    /// The single-excitation block, where the field behaves as a qubit.
    pub const fn single() -> Self {
        Self(1)
    }

    pub const fn excitations(self) -> u32 {
        self.0
    }

    pub fn dim(self) -> usize {
        match self.0 {
            0 => 1,
            1 => 3,
            _ => 4,
        }
    }

    /// Number of distinct photon labels appearing in the block.
    pub fn field_dim(self) -> usize {
        match self.0 {
            0 => 1,
            1 => 2,
            _ => 3,
        }
    }

    /// Smallest photon number present; field-local index is `photons - offset`.
    pub fn photon_offset(self) -> u32 {
        self.0.saturating_sub(2)
    }

    pub(crate) fn require_dynamic(self) -> Result<(), Error> {
        if self.0 == 0 {
            Err(Error::EmptySubspace)
        } else {
            Ok(())
        }
    }

    /// Labels of basis vector `index`.
    ///
    /// Panics if `index >= self.dim()`.
    pub fn ket(self, index: usize) -> BasisKet {
        use Level::{Excited as E, Ground as G};
        let n = self.0;
        let (atom1, atom2, photons) = match (n, index) {
            (0, 0) => (G, G, 0),
            (1, 0) => (E, G, 0),
            (1, 1) => (G, E, 0),
            (1, 2) => (G, G, 1),
            (_, 0) if n >= 2 => (E, E, n - 2),
            (_, 1) if n >= 2 => (E, G, n - 1),
            (_, 2) if n >= 2 => (G, E, n - 1),
            (_, 3) if n >= 2 => (G, G, n),
            _ => panic!("basis index {index} out of range for N = {n}"),
        };
        BasisKet {
            atom1,
            atom2,
            photons,
        }
    }
}

impl fmt::Display for ExcitationSubspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N={}", self.0)
    }
}

/// Amplitude vector over an excitation subspace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState {
    subspace: ExcitationSubspace,
    amps: [C64; 4],
}

impl PureState {
    /// Builds a state, checking length and the `NORM_TOL` normalization.
    pub fn new(subspace: ExcitationSubspace, amplitudes: &[C64]) -> Result<Self, Error> {
        let state = Self::from_raw(subspace, amplitudes)?;
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(state)
    }

    /// Builds a state without the normalization check. Integrator output
    /// goes through here so that norm drift stays observable.
    pub fn from_raw(subspace: ExcitationSubspace, amplitudes: &[C64]) -> Result<Self, Error> {
        if amplitudes.len() != subspace.dim() {
            return Err(Error::DimensionMismatch {
                expected: subspace.dim(),
                found: amplitudes.len(),
            });
        }
        let mut amps = [C64::new(0.0, 0.0); 4];
        amps[..amplitudes.len()].copy_from_slice(amplitudes);
        Ok(Self { subspace, amps })
    }

    /// Unit amplitude on `|e₁,g₂,·⟩`: `(1,0,0)` for `N = 1`, `(0,1,0,0)` otherwise.
    pub fn initial(subspace: ExcitationSubspace) -> Result<Self, Error> {
        subspace.require_dynamic()?;
        let mut amps = [C64::new(0.0, 0.0); 4];
        let slot = if subspace.excitations() == 1 { 0 } else { 1 };
        amps[slot] = C64::new(1.0, 0.0);
        Ok(Self { subspace, amps })
    }

    pub fn subspace(&self) -> ExcitationSubspace {
        self.subspace
    }

    pub fn dim(&self) -> usize {
        self.subspace.dim()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps[..self.dim()]
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amplitudes()[index]
    }

    /// `Σ|aᵢ|²`.
    pub fn norm(&self) -> f64 {
        self.amplitudes().iter().map(|a| a.norm_sqr()).sum()
    }

    /// Populations `|aᵢ|²` in basis order.
    pub fn populations(&self) -> [f64; 4] {
        let mut p = [0.0; 4];
        for (dst, a) in p.iter_mut().zip(self.amplitudes()) {
            *dst = a.norm_sqr();
        }
        p
    }

    /// Largest amplitude-wise distance `max |aᵢ − bᵢ|`.
    pub fn max_distance(&self, other: &PureState) -> Result<f64, Error> {
        if self.subspace != other.subspace {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .amplitudes()
            .iter()
            .zip(other.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Largest modulus-wise distance `max ||aᵢ| − |bᵢ||`; ignores phases.
    pub fn max_modulus_distance(&self, other: &PureState) -> Result<f64, Error> {
        if self.subspace != other.subspace {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .amplitudes()
            .iter()
            .zip(other.amplitudes())
            .map(|(a, b)| (a.norm() - b.norm()).abs())
            .fold(0.0, f64::max))
    }

    /// Projector `|Ψ⟩⟨Ψ|` in the subspace basis.
    pub fn pure_density(&self) -> Result<DensityMatrix, Error> {
        let norm = self.norm();
        if (norm - 1.0).abs() > DENSITY_NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        let a = self.amplitudes();
        let d = a.len();
        Ok(DensityMatrix::from_raw(DMatrix::from_fn(d, d, |i, j| {
            a[i] * a[j].conj()
        })))
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix.
///
/// Dimensions that occur: 2 (an atom, or the field for `N = 1`), 3 (the
/// field for `N ≥ 2`, or a full `N = 1` projector), 4 (two qubits) and 6
/// (atom plus qutrit field for `N ≥ 2`).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and spectrum.
    pub fn new(entries: DMatrix<C64>) -> Result<Self, Error> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(Error::NotSquare);
        }
        let d = entries.nrows();
        let mut asym: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                asym = asym.max((entries[(i, j)] - entries[(j, i)].conj()).norm());
            }
        }
        if asym > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation: asym });
        }
        let trace = entries.trace().re;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::BadTrace { trace });
        }
        let rho = Self { entries };
        let min = rho
            .eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min < EIGEN_FLOOR {
            return Err(Error::NegativeEigenvalue { value: min });
        }
        Ok(rho)
    }

    pub(crate) fn from_raw(entries: DMatrix<C64>) -> Self {
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    /// `Tr ρ² = Σᵢⱼ |ρᵢⱼ|²`.
    pub fn purity(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Real eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> alloc::vec::Vec<f64> {
        let mut ev: alloc::vec::Vec<f64> = self
            .entries
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn initial_states() {
        let s = PureState::initial(ExcitationSubspace::new(1)).unwrap();
        assert_eq!(s.amplitudes(), &[c(1.0), c(0.0), c(0.0)]);
        let s = PureState::initial(ExcitationSubspace::new(2)).unwrap();
        assert_eq!(s.amplitudes(), &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        assert_eq!(
            PureState::initial(ExcitationSubspace::new(0)),
            Err(Error::EmptySubspace)
        );
    }

    #[test]
    fn initial_ket_is_e1_g2() {
        for n in 1..6 {
            let sub = ExcitationSubspace::new(n);
            let s = PureState::initial(sub).unwrap();
            let idx = s.amplitudes().iter().position(|a| a.re == 1.0).unwrap();
            let ket = sub.ket(idx);
            assert_eq!((ket.atom1, ket.atom2), (Level::Excited, Level::Ground));
            assert_eq!(ket.photons, n - 1);
        }
    }

    #[test]
    fn norms() {
        let sub = ExcitationSubspace::single();
        let s = PureState::from_raw(sub, &[c(1.0), c(0.0), c(0.0)]).unwrap();
        assert_eq!(s.norm(), 1.0);
        let s = PureState::from_raw(sub, &[c(FRAC_1_SQRT_2), c(-FRAC_1_SQRT_2), c(0.0)]).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-15);
        let s = PureState::from_raw(sub, &[c(0.5), c(0.5), c(0.5)]).unwrap();
        assert_eq!(s.norm(), 0.75);
    }

    #[test]
    fn constructor_rejects_bad_input() {
        let sub = ExcitationSubspace::single();
        assert!(matches!(
            PureState::new(sub, &[c(0.5), c(0.5), c(0.5)]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            PureState::new(sub, &[c(1.0), c(0.0)]),
            Err(Error::DimensionMismatch {
                expected: 3,
                found: 2
            })
        ));
    }

    #[test]
    fn pure_density_examples() {
        let sub = ExcitationSubspace::single();
        let rho = PureState::initial(sub).unwrap().pure_density().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == 0 && j == 0 { 1.0 } else { 0.0 };
                assert_eq!(rho.entries()[(i, j)], c(want));
            }
        }
        let s = PureState::new(sub, &[c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2), c(0.0)]).unwrap();
        let rho = s.pure_density().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i < 2 && j < 2 { 0.5 } else { 0.0 };
                assert!((rho.entries()[(i, j)] - c(want)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn pure_density_rejects_unnormalized() {
        let sub = ExcitationSubspace::single();
        let s = PureState::from_raw(sub, &[c(0.5), c(0.5), c(0.5)]).unwrap();
        assert!(matches!(s.pure_density(), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn density_validation() {
        let bad = DMatrix::from_row_slice(2, 2, &[c(0.5), c(0.1), c(0.2), c(0.5)]);
        assert!(matches!(
            DensityMatrix::new(bad),
            Err(Error::NotHermitian { .. })
        ));
        let bad = DMatrix::from_row_slice(2, 2, &[c(0.6), c(0.0), c(0.0), c(0.6)]);
        assert!(matches!(
            DensityMatrix::new(bad),
            Err(Error::BadTrace { .. })
        ));
        let bad = DMatrix::from_row_slice(2, 2, &[c(1.5), c(0.0), c(0.0), c(-0.5)]);
        assert!(matches!(
            DensityMatrix::new(bad),
            Err(Error::NegativeEigenvalue { .. })
        ));
        let ok = DMatrix::from_row_slice(2, 2, &[c(0.5), c(0.0), c(0.0), c(0.5)]);
        assert!(DensityMatrix::new(ok).is_ok());
    }
}
