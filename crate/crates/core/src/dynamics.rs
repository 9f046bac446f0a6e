//! Block Hamiltonians of the two-atom interaction and state propagation.
//!
//! In the interaction picture (`ħ = 1`, resonance, rotating-wave
//! approximation) the Hamiltonian is
//! `H(t) = f₁(t)(a†σ₁⁻ + σ₁⁺a) + f₂(t)(a†σ₂⁻ + σ₂⁺a)`.
//! With real nonnegative couplings its matrix in each excitation block is
//! real symmetric, and `i dψ/dt = Hψ` produces the `−i` phases seen in the
//! closed forms below.
//!
//! Two evolution paths exist:
//!
//!  - a fixed-step RK4 integrator for any `N ≥ 1`, which splits the
//!    interval at every coupling breakpoint so that no step straddles a
//!    window edge;
//!  - closed-form amplitudes for `N = 1` from `|e₁,g₂,0⟩`, for the
//!    sequential and the fixed-ratio simultaneous schedules.

use alloc::vec::Vec;

use nalgebra::DMatrix;

// Needed for f64 math without std; shadowed by inherent methods when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::coupling::{CouplingSchedule, ScheduleMode};
use crate::qstate::{ExcitationSubspace, PureState, C64};
use crate::Error;

/// Largest tolerated norm drift before integration aborts.
pub const MAX_NORM_DRIFT: f64 = 1e-6;

/// Default step is `DEFAULT_STEP_SCALE / max coupling strength`.
pub const DEFAULT_STEP_SCALE: f64 = 1e-3;

/// Evolution path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    ClosedForm,
    Rk4,
}

/// Which atom is inside the cavity during a sequential run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DjcPhase {
    AtomOneInside,
    AtomTwoInside,
}

/// `H(t)` restricted to one excitation block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubspaceHamiltonian {
    schedule: CouplingSchedule,
    subspace: ExcitationSubspace,
}

/// Upper-triangle nonzero pattern `(row, col, value)`.
type Couplings = [(usize, usize, f64); 4];

impl SubspaceHamiltonian {
    pub fn new(schedule: CouplingSchedule, subspace: ExcitationSubspace) -> Result<Self, Error> {
        subspace.require_dynamic()?;
        Ok(Self { schedule, subspace })
    }

    pub fn schedule(&self) -> &CouplingSchedule {
        &self.schedule
    }

    pub fn subspace(&self) -> ExcitationSubspace {
        self.subspace
    }

    fn couplings_from(&self, (f1, f2): (f64, f64)) -> Couplings {
        let n = self.subspace.excitations();
        if n == 1 {
            [(0, 2, f1), (1, 2, f2), (0, 0, 0.0), (0, 0, 0.0)]
        } else {
            let lower = f64::from(n - 1).sqrt();
            let upper = f64::from(n).sqrt();
            [
                (0, 1, f2 * lower),
                (0, 2, f1 * lower),
                (1, 3, f1 * upper),
                (2, 3, f2 * upper),
            ]
        }
    }

    /// Dense `dim × dim` matrix at time `t`.
    pub fn matrix(&self, t: f64) -> DMatrix<f64> {
        let d = self.subspace.dim();
        let mut h = DMatrix::zeros(d, d);
        for (i, j, v) in self.couplings_from(self.schedule.evaluate(t)) {
            if i != j {
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        h
    }

    /// `−i H ψ` with the coupling pair supplied by the caller.
    fn derivative(&self, couplings: &Couplings, psi: &[C64; 4]) -> [C64; 4] {
        let mut h_psi = [C64::new(0.0, 0.0); 4];
        for &(i, j, v) in couplings {
            if i != j {
                h_psi[i] += psi[j] * v;
                h_psi[j] += psi[i] * v;
            }
        }
        h_psi.map(|z| C64::new(z.im, -z.re))
    }

    /// One classical RK4 step on `[t, t + h]`, with the active windows fixed by `probe`.
    fn rk4_step(&self, psi: &[C64; 4], t: f64, h: f64, probe: f64) -> [C64; 4] {
        let at = |s: f64| self.couplings_from(self.schedule.evaluate_with_active_set(s, probe));
        let axpy = |y: &[C64; 4], k: &[C64; 4], c: f64| {
            let mut out = *y;
            for (o, ki) in out.iter_mut().zip(k) {
                *o += ki * c;
            }
            out
        };
        let (c0, cm, c1) = (at(t), at(t + 0.5 * h), at(t + h));
        let k1 = self.derivative(&c0, psi);
        let k2 = self.derivative(&cm, &axpy(psi, &k1, 0.5 * h));
        let k3 = self.derivative(&cm, &axpy(psi, &k2, 0.5 * h));
        let k4 = self.derivative(&c1, &axpy(psi, &k3, h));
        let mut out = *psi;
        for i in 0..4 {
            out[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
        }
        out
    }

    /// Advances `psi` from `a` to `b`, which must not enclose a breakpoint.
    fn advance_segment(&self, psi: &mut [C64; 4], a: f64, b: f64, dt: f64) {
        let len = b - a;
        if len <= 0.0 {
            return;
        }
        let steps = (len / dt).ceil().max(1.0);
        let h = len / steps;
        let probe = a + 0.5 * len;
        for k in 0..steps as u64 {
            let t = a + k as f64 * h;
            *psi = self.rk4_step(psi, t, h, probe);
        }
    }

    /// Default step for this Hamiltonian's schedule.
    pub fn default_step(&self) -> f64 {
        default_step(&self.schedule)
    }

    /// Propagates `initial` from `t0` to `t1` with RK4 steps no longer than `dt`.
    ///
    /// The final state is not renormalized.
    pub fn integrate(
        &self,
        initial: &PureState,
        t0: f64,
        t1: f64,
        dt: f64,
    ) -> Result<PureState, Error> {
        let mut out = self.integrate_dense(initial, t0, &[t1], dt)?;
        Ok(out.pop().expect("one sample requested"))
    }

    /// Like [`integrate`](Self::integrate) but returns the state at every
    /// entry of `sample_times` (nondecreasing, none before `t0`).
    pub fn integrate_dense(
        &self,
        initial: &PureState,
        t0: f64,
        sample_times: &[f64],
        dt: f64,
    ) -> Result<Vec<PureState>, Error> {
        if initial.subspace() != self.subspace {
            return Err(Error::DimensionMismatch {
                expected: self.subspace.dim(),
                found: initial.dim(),
            });
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter {
                name: "dt",
                reason: "must be finite and positive",
            });
        }
        if !t0.is_finite() {
            return Err(Error::InvalidParameter {
                name: "t0",
                reason: "must be finite",
            });
        }
        check_sorted(sample_times, t0)?;

        let dim = self.subspace.dim();
        let norm0 = initial.norm();
        let breaks = self.schedule.breakpoints();
        let mut psi = [C64::new(0.0, 0.0); 4];
        psi[..dim].copy_from_slice(initial.amplitudes());
        let mut now = t0;
        let mut out = Vec::with_capacity(sample_times.len());
        for &target in sample_times {
            for &b in &breaks {
                if b > now && b < target {
                    self.advance_segment(&mut psi, now, b, dt);
                    now = b;
                }
            }
            self.advance_segment(&mut psi, now, target, dt);
            now = now.max(target);
            let state = PureState::from_raw(self.subspace, &psi[..dim])?;
            let drift = (state.norm() - norm0).abs();
            if drift > MAX_NORM_DRIFT {
                return Err(Error::StepSize { drift });
            }
            out.push(state);
        }
        Ok(out)
    }
}

fn check_sorted(times: &[f64], t0: f64) -> Result<(), Error> {
    let mut prev = t0;
    for &t in times {
        if !t.is_finite() || t < prev {
            return Err(Error::UnsortedSamples);
        }
        prev = t;
    }
    Ok(())
}

/// `DEFAULT_STEP_SCALE / max γ`, or `DEFAULT_STEP_SCALE` if every coupling vanishes.
pub fn default_step(schedule: &CouplingSchedule) -> f64 {
    let g = schedule.max_strength();
    if g > 0.0 {
        DEFAULT_STEP_SCALE / g
    } else {
        DEFAULT_STEP_SCALE
    }
}

/// Sequential-schedule amplitudes from `|e₁,g₂,0⟩`.
///
/// With atom 1 inside, `theta1` is its running angle and `theta2` is
/// ignored: `(cos θ₁, 0, −i sin θ₁)`. With atom 2 inside, `theta1` is the
/// angle atom 1 accumulated before leaving:
/// `(cos θ₁, −sin θ₁ sin θ₂, −i sin θ₁ cos θ₂)`.
pub fn closed_form_djc(theta1: f64, theta2: f64, phase: DjcPhase) -> PureState {
    let (s1, c1) = theta1.sin_cos();
    let amps = match phase {
        DjcPhase::AtomOneInside => [C64::new(c1, 0.0), C64::new(0.0, 0.0), C64::new(0.0, -s1)],
        DjcPhase::AtomTwoInside => {
            let (s2, c2) = theta2.sin_cos();
            [
                C64::new(c1, 0.0),
                C64::new(-s1 * s2, 0.0),
                C64::new(0.0, -s1 * c2),
            ]
        }
    };
    PureState::from_raw(ExcitationSubspace::single(), &amps).expect("three amplitudes")
}

/// Fixed-ratio simultaneous-schedule amplitudes from `|e₁,g₂,0⟩` at
/// collective angle `theta`: `a₂ = −2α sin²(θ/2)`, `a₁ = 1 + r a₂`,
/// `a₃ = −i √(rα) sin θ`, `α = r/(1 + r²)`.
pub fn closed_form_dd(ratio: f64, theta: f64) -> Result<PureState, Error> {
    if !(ratio.is_finite() && ratio > 0.0) {
        return Err(Error::InvalidParameter {
            name: "ratio",
            reason: "must be finite and positive",
        });
    }
    let alpha = crate::coupling::coupling_mean_for_ratio(ratio);
    let half = (0.5 * theta).sin();
    let a2 = -2.0 * alpha * half * half;
    let a1 = 1.0 + ratio * a2;
    let a3 = -(ratio * alpha).sqrt() * theta.sin();
    Ok(PureState::from_raw(
        ExcitationSubspace::single(),
        &[C64::new(a1, 0.0), C64::new(a2, 0.0), C64::new(0.0, a3)],
    )
    .expect("three amplitudes"))
}

/// Closed-form state at `t` for the schedule, starting from `|e₁,g₂,0⟩`
/// at the schedule start.
pub fn closed_form_at(schedule: &CouplingSchedule, t: f64) -> Result<PureState, Error> {
    match schedule.mode() {
        ScheduleMode::Sequential => {
            let (w1, w2) = (schedule.window(1), schedule.window(2));
            if t < w1.start() {
                Ok(closed_form_djc(0.0, 0.0, DjcPhase::AtomOneInside))
            } else if t < w2.start() {
                Ok(closed_form_djc(
                    w1.rabi_angle(t)?,
                    0.0,
                    DjcPhase::AtomOneInside,
                ))
            } else {
                Ok(closed_form_djc(
                    w1.total_angle(),
                    w2.rabi_angle(t)?,
                    DjcPhase::AtomTwoInside,
                ))
            }
        }
        ScheduleMode::Simultaneous { ratio: Some(r) } => {
            closed_form_dd(r, schedule.collective_angle(t)?)
        }
        ScheduleMode::Simultaneous { ratio: None } => Err(Error::VaryingRatio),
    }
}

/// States at each of `sample_times` (nondecreasing) for the initial state
/// `|e₁,g₂,N−1⟩` placed at the schedule start.
///
/// `dt` applies to RK4 only and defaults to [`default_step`].
pub fn evolve_scenario(
    schedule: &CouplingSchedule,
    subspace: ExcitationSubspace,
    method: Method,
    sample_times: &[f64],
    dt: Option<f64>,
) -> Result<Vec<(f64, PureState)>, Error> {
    let initial = PureState::initial(subspace)?;
    if sample_times.is_empty() {
        return Ok(Vec::new());
    }
    check_sorted(sample_times, f64::NEG_INFINITY)?;
    match method {
        Method::ClosedForm => {
            if subspace.excitations() != 1 {
                return Err(Error::NoClosedForm(subspace));
            }
            sample_times
                .iter()
                .map(|&t| closed_form_at(schedule, t).map(|s| (t, s)))
                .collect()
        }
        Method::Rk4 => {
            let h = SubspaceHamiltonian::new(*schedule, subspace)?;
            let dt = dt.unwrap_or_else(|| default_step(schedule));
            let t0 = schedule.start();
            let split = sample_times.partition_point(|&t| t < t0);
            let mut out: Vec<(f64, PureState)> = sample_times[..split]
                .iter()
                .map(|&t| (t, initial))
                .collect();
            let later = &sample_times[split..];
            let states = h.integrate_dense(&initial, t0, later, dt)?;
            out.extend(later.iter().copied().zip(states));
            Ok(out)
        }
    }
}
