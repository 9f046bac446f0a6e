//! Reduced states, linear entropies, concurrences and the intrinsic
//! entanglement `E_{A,B} = M_A + M_B − M_{A,B}`.
//!
//! Everything is computed from the partial trace of `|Ψ⟩⟨Ψ|` over the
//! three constituents (atom 1, atom 2, field). For `N = 1` the field holds
//! zero or one photon and is a qubit, so every pair is a two-qubit state
//! and has a Wootters concurrence. For `N ≥ 2` the field carries three
//! photon labels; only the atom pair is a two-qubit state there.

use core::ops::BitOr;

use nalgebra::{DMatrix, Matrix4};

// Needed for f64 math without std; shadowed by inherent methods when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::qstate::{DensityMatrix, ExcitationSubspace, PureState, C64};
use crate::Error;

/// Algebraic identities evaluated in floating point.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Closed-form entropies against the partial-trace path.
pub const ENTROPY_PATH_TOL: f64 = 1e-10;
/// Closed-form concurrences or `E` against the partial-trace path.
pub const CROSS_PATH_TOL: f64 = 1e-9;
/// Integrator against closed-form amplitudes.
pub const INTEGRATOR_TOL: f64 = 1e-7;

/// Eigenvalues of `ρ` below this are rejected by [`wootters_concurrence`].
const WOOTTERS_NEGATIVE_FLOOR: f64 = -1e-10;
/// Eigenvalues of `ρ` at or below this are treated as exact zeros when
/// building the Gram factor for the concurrence.
const WOOTTERS_RANK_CUTOFF: f64 = 1e-14;

/// One constituent of the atom-atom-field system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Subsystem {
    Atom1,
    Atom2,
    Field,
}

impl Subsystem {
    const ALL: [Subsystem; 3] = [Subsystem::Atom1, Subsystem::Atom2, Subsystem::Field];

    fn bit(self) -> u8 {
        match self {
            Subsystem::Atom1 => 1,
            Subsystem::Atom2 => 2,
            Subsystem::Field => 4,
        }
    }
}

/// A set of constituents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Subsystems(u8);

impl Subsystems {
    pub const EMPTY: Self = Self(0);
    pub const ATOM1: Self = Self(1);
    pub const ATOM2: Self = Self(2);
    pub const FIELD: Self = Self(4);
    pub const ATOMS: Self = Self(3);
    pub const ATOM1_FIELD: Self = Self(5);
    pub const ATOM2_FIELD: Self = Self(6);
    pub const ALL: Self = Self(7);

    pub fn contains(self, s: Subsystem) -> bool {
        self.0 & s.bit() != 0
    }

    pub fn complement(self) -> Self {
        Self(!self.0 & 7)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Subsystem> {
        Subsystem::ALL
            .into_iter()
            .filter(move |s| self.contains(*s))
    }
}

impl From<Subsystem> for Subsystems {
    fn from(s: Subsystem) -> Self {
        Self(s.bit())
    }
}

impl BitOr for Subsystems {
    type Output = Self;
    fn bitor(self, rhs: Self) -> Self {
        Self(self.0 | rhs.0)
    }
}

impl BitOr<Subsystem> for Subsystem {
    type Output = Subsystems;
    fn bitor(self, rhs: Subsystem) -> Subsystems {
        Subsystems(self.bit() | rhs.bit())
    }
}

/// Local dimension and label of `sub` for basis ket `index`.
fn local(subspace: ExcitationSubspace, index: usize, sub: Subsystem) -> (usize, usize) {
    let ket = subspace.ket(index);
    match sub {
        Subsystem::Atom1 => (2, ket.atom1.index()),
        Subsystem::Atom2 => (2, ket.atom2.index()),
        Subsystem::Field => (
            subspace.field_dim(),
            (ket.photons - subspace.photon_offset()) as usize,
        ),
    }
}

/// Mixed-radix index over `set`, atom 1 most significant. Returns `(dim, index)`.
fn joint_index(subspace: ExcitationSubspace, index: usize, set: Subsystems) -> (usize, usize) {
    set.iter().fold((1, 0), |(dim, idx), s| {
        let (d, l) = local(subspace, index, s);
        (dim * d, idx * d + l)
    })
}

/// Partial trace of `|Ψ⟩⟨Ψ|` over everything outside `keep`.
///
/// Local labels: excited = 0, ground = 1 for atoms; photon number minus the
/// smallest photon number present for the field. Kept factors are ordered
/// atom 1, atom 2, field, with the first one most significant.
pub fn reduce(state: &PureState, keep: Subsystems) -> Result<DensityMatrix, Error> {
    if keep.is_empty() || keep == Subsystems::ALL {
        return Err(Error::BadSubsystems);
    }
    let sub = state.subspace();
    let traced = keep.complement();
    let amps = state.amplitudes();
    let (dim, _) = joint_index(sub, 0, keep);
    let mut rho = DMatrix::<C64>::zeros(dim, dim);
    for (i, ai) in amps.iter().enumerate() {
        let (_, ki) = joint_index(sub, i, keep);
        let (_, ri) = joint_index(sub, i, traced);
        for (j, aj) in amps.iter().enumerate() {
            let (_, rj) = joint_index(sub, j, traced);
            if ri == rj {
                let (_, kj) = joint_index(sub, j, keep);
                rho[(ki, kj)] += ai * aj.conj();
            }
        }
    }
    Ok(DensityMatrix::from_raw(rho))
}

/// `M = 1 − Tr ρ²`.
pub fn linear_entropy(rho: &DensityMatrix) -> f64 {
    1.0 - rho.purity()
}

fn require_single(state: &PureState) -> Result<[f64; 4], Error> {
    if state.subspace().excitations() != 1 {
        return Err(Error::NoClosedForm(state.subspace()));
    }
    Ok(state.populations())
}

/// Single-excitation linear entropies `(M_a1, M_a2, M_f)` from populations.
pub fn closed_form_entropies(state: &PureState) -> Result<(f64, f64, f64), Error> {
    let [x1, x2, x3, _] = require_single(state)?;
    let m_f = 1.0 - ((x1 + x2).powi(2) + x3 * x3);
    let m_a1 = 1.0 - ((x2 + x3).powi(2) + x1 * x1);
    let m_a2 = 1.0 - ((x1 + x3).powi(2) + x2 * x2);
    Ok((m_a1, m_a2, m_f))
}

/// Single-excitation concurrences `(2|a₁a₂|, 2|a₁a₃|, 2|a₂a₃|)`.
pub fn closed_form_concurrences(state: &PureState) -> Result<(f64, f64, f64), Error> {
    require_single(state)?;
    let a = state.amplitudes();
    Ok((
        2.0 * (a[0] * a[1]).norm(),
        2.0 * (a[0] * a[2]).norm(),
        2.0 * (a[1] * a[2]).norm(),
    ))
}

/// `Y ⊗ Y` in the product basis.
fn spin_flip() -> Matrix4<C64> {
    let o = C64::new(0.0, 0.0);
    let p = C64::new(1.0, 0.0);
    let m = C64::new(-1.0, 0.0);
    Matrix4::new(o, o, o, m, o, o, p, o, o, p, o, o, m, o, o, o)
}

/// Wootters concurrence `max(0, λ₁ − λ₂ − λ₃ − λ₄)` of a two-qubit state.
///
/// The `λᵢ` (square roots of the eigenvalues of `ρ (Y⊗Y) ρ* (Y⊗Y)`) are
/// obtained as the singular values of the symmetric matrix `Xᵀ (Y⊗Y) X`,
/// where `ρ = X X†` and the columns of `X` are the eigenvectors of `ρ`
/// scaled by the square roots of their eigenvalues. This avoids taking
/// square roots of eigenvalues that are zero up to rounding. Eigenvalues of
/// `ρ` down to `−1e−10` are clamped to zero; anything more negative is an
/// error.
pub fn wootters_concurrence(rho: &DensityMatrix) -> Result<f64, Error> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: rho.dim(),
        });
    }
    let m: Matrix4<C64> = Matrix4::from_iterator(rho.entries().iter().copied());
    let eig = m.symmetric_eigen();
    let mut x = Matrix4::<C64>::zeros();
    for k in 0..4 {
        let d = eig.eigenvalues[k];
        if !d.is_finite() {
            return Err(Error::NegativeEigenvalue { value: d });
        }
        if d < WOOTTERS_NEGATIVE_FLOOR {
            return Err(Error::NegativeEigenvalue { value: d });
        }
        if d > WOOTTERS_RANK_CUTOFF {
            x.set_column(k, &(eig.eigenvectors.column(k) * C64::new(d.sqrt(), 0.0)));
        }
    }
    let tau = x.transpose() * spin_flip() * x;
    let mut lambda: [f64; 4] = tau.singular_values().into();
    lambda.sort_by(|a, b| b.total_cmp(a));
    Ok((lambda[0] - lambda[1] - lambda[2] - lambda[3]).max(0.0))
}

/// `E_{A,B} = M_A + M_B − M_{A,B}`. For a pure tripartite state pass the
/// entropy of the third constituent as `m_ab`.
pub fn intrinsic_entanglement(m_a: f64, m_b: f64, m_ab: f64) -> f64 {
    m_a + m_b - m_ab
}

fn require_multi(state: &PureState) -> Result<&[C64], Error> {
    if state.subspace().excitations() < 2 {
        return Err(Error::InvalidParameter {
            name: "excitations",
            reason: "formula applies to N >= 2 only",
        });
    }
    Ok(state.amplitudes())
}

/// Atom-atom `E = 4|b₁b₂|² + 2|b₀b₃|²` for `N ≥ 2`.
pub fn intrinsic_entanglement_n(state: &PureState) -> Result<f64, Error> {
    let b = require_multi(state)?;
    Ok(4.0 * (b[1] * b[2]).norm_sqr() + 2.0 * (b[0] * b[3]).norm_sqr())
}

/// Atom-atom concurrence for `N ≥ 2`, via Wootters on the reduced atom pair.
pub fn concurrence_aa_n(state: &PureState) -> Result<f64, Error> {
    require_multi(state)?;
    wootters_concurrence(&reduce(state, Subsystems::ATOMS)?)
}

/// All measures at one time sample.
///
/// Atom-field concurrences exist only when the field is a qubit (`N = 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationRecord {
    pub t: f64,
    pub m_a1: f64,
    pub m_a2: f64,
    pub m_f: f64,
    pub c_aa: f64,
    pub c_a1f: Option<f64>,
    pub c_a2f: Option<f64>,
    pub e_aa: f64,
    pub e_a1f: f64,
    pub e_a2f: f64,
}

fn cross_check(quantity: &'static str, a: f64, b: f64, tol: f64) -> Result<(), Error> {
    let deviation = (a - b).abs();
    if deviation > tol || deviation.is_nan() {
        Err(Error::ClosedFormMismatch {
            quantity,
            deviation,
        })
    } else {
        Ok(())
    }
}

/// Fills a [`CorrelationRecord`] from partial traces, cross-checking the
/// closed forms (`N = 1` entropies and concurrences, `N ≥ 2` atom-pair `E`).
pub fn record(state: &PureState, t: f64) -> Result<CorrelationRecord, Error> {
    let entropy = |keep| reduce(state, keep).map(|r| linear_entropy(&r));
    let m_a1 = entropy(Subsystems::ATOM1)?;
    let m_a2 = entropy(Subsystems::ATOM2)?;
    let m_f = entropy(Subsystems::FIELD)?;
    let e_aa = intrinsic_entanglement(m_a1, m_a2, entropy(Subsystems::ATOMS)?);
    let e_a1f = intrinsic_entanglement(m_a1, m_f, entropy(Subsystems::ATOM1_FIELD)?);
    let e_a2f = intrinsic_entanglement(m_a2, m_f, entropy(Subsystems::ATOM2_FIELD)?);
    let c_aa = wootters_concurrence(&reduce(state, Subsystems::ATOMS)?)?;

    let (c_a1f, c_a2f) = if state.subspace().excitations() == 1 {
        let c_a1f = wootters_concurrence(&reduce(state, Subsystems::ATOM1_FIELD)?)?;
        let c_a2f = wootters_concurrence(&reduce(state, Subsystems::ATOM2_FIELD)?)?;

        let (cm1, cm2, cmf) = closed_form_entropies(state)?;
        cross_check("M_a1", m_a1, cm1, ENTROPY_PATH_TOL)?;
        cross_check("M_a2", m_a2, cm2, ENTROPY_PATH_TOL)?;
        cross_check("M_f", m_f, cmf, ENTROPY_PATH_TOL)?;
        let (caa, ca1f, ca2f) = closed_form_concurrences(state)?;
        cross_check("C_aa", c_aa, caa, CROSS_PATH_TOL)?;
        cross_check("C_a1f", c_a1f, ca1f, CROSS_PATH_TOL)?;
        cross_check("C_a2f", c_a2f, ca2f, CROSS_PATH_TOL)?;
        (Some(c_a1f), Some(c_a2f))
    } else {
        cross_check(
            "E_aa",
            e_aa,
            intrinsic_entanglement_n(state)?,
            CROSS_PATH_TOL,
        )?;
        (None, None)
    };

    Ok(CorrelationRecord {
        t,
        m_a1,
        m_a2,
        m_f,
        c_aa,
        c_a1f,
        c_a2f,
        e_aa,
        e_a1f,
        e_a2f,
    })
}
