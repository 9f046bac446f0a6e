//! Named preparation recipes and their correlation time series.
//!
//! | recipe       | schedule     | target                                   |
//! |--------------|--------------|------------------------------------------|
//! | singlet      | sequential   | `θ₁ = π/4`, `θ₂ = π/2`                   |
//! | W state      | sequential   | `θ₁ = arccos(1/√3)`, `θ₂ = π/4`          |
//! | triplet      | simultaneous | `r = √2 + 1`, collective `θ = π`         |
//!
//! Window durations are solved so that the integrated angles land on the
//! targets; strengths stay as given.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

// Needed for f64 math without std; shadowed by inherent methods when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::correlations::{self, CorrelationRecord};
use crate::coupling::{CouplingSchedule, CouplingWindow, Pulse, PulseShape};
use crate::dynamics::{self, Method};
use crate::numeric;
use crate::qstate::ExcitationSubspace;
use crate::Error;

/// Target tolerance when durations are found by root finding.
pub const ANGLE_TOL: f64 = 1e-10;

/// Default samples per coupling window.
pub const DEFAULT_SAMPLES: usize = 512;

/// Coupling ratio `γ₁/γ₂` that turns `|e₁,g₂,0⟩` into the atomic triplet.
pub const TRIPLET_RATIO: f64 = SQRT_2 + 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    SingletDjc,
    WStateDjc,
    TripletDd,
    Custom,
}

impl ScenarioKind {
    /// Target `(θ₁, θ₂)` for the sequential recipes.
    pub fn sequential_angles(self) -> Option<(f64, f64)> {
        match self {
            ScenarioKind::SingletDjc => Some((FRAC_PI_4, FRAC_PI_2)),
            ScenarioKind::WStateDjc => Some(((1.0 / 3.0).sqrt().acos(), FRAC_PI_4)),
            _ => None,
        }
    }
}

/// A schedule together with the block it runs in and its sampling density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    kind: ScenarioKind,
    schedule: CouplingSchedule,
    subspace: ExcitationSubspace,
    samples: usize,
}

/// Window length for which `pulse` integrates to `target`.
pub fn solve_duration(shape: PulseShape, strength: f64, target: f64) -> Result<f64, Error> {
    if !(strength.is_finite() && strength > 0.0) {
        return Err(Error::InvalidParameter {
            name: "strength",
            reason: "must be finite and positive",
        });
    }
    if !(target.is_finite() && target > 0.0) {
        return Err(Error::UnreachableTarget { target });
    }
    let pulse = Pulse { shape, strength };
    // Validate the shape once up front.
    CouplingWindow::new(0.0, 1.0, pulse)?;
    match shape {
        PulseShape::Constant => Ok(target / strength),
        PulseShape::SineSquaredRamp { .. } => {
            let angle =
                |tau: f64| CouplingWindow::new(0.0, tau, pulse).map_or(0.0, |w| w.total_angle());
            let guess = target / strength;
            numeric::solve_increasing(angle, target, guess, 1e9 * guess, ANGLE_TOL)
                .ok_or(Error::UnreachableTarget { target })
        }
    }
}

impl Scenario {
    /// One of the three named recipes, with both atoms (or atom 2 in the
    /// simultaneous case) driven by a pulse of the given shape and peak strength.
    pub fn build(kind: ScenarioKind, shape: PulseShape, strength: f64) -> Result<Self, Error> {
        let schedule = match kind {
            ScenarioKind::SingletDjc | ScenarioKind::WStateDjc => {
                let (theta1, theta2) = kind.sequential_angles().expect("sequential recipe");
                let tau1 = solve_duration(shape, strength, theta1)?;
                let tau2 = solve_duration(shape, strength, theta2)?;
                let pulse = Pulse { shape, strength };
                CouplingSchedule::sequential(
                    CouplingWindow::new(0.0, tau1, pulse)?,
                    CouplingWindow::new(tau1, tau2, pulse)?,
                )?
            }
            ScenarioKind::TripletDd => {
                return Self::simultaneous_pi(shape, strength, TRIPLET_RATIO)
            }
            ScenarioKind::Custom => {
                return Err(Error::InvalidParameter {
                    name: "scenario",
                    reason: "custom scenarios are built from an explicit schedule",
                })
            }
        };
        Ok(Self {
            kind,
            schedule,
            subspace: ExcitationSubspace::single(),
            samples: DEFAULT_SAMPLES,
        })
    }

    /// Simultaneous run with `γ₁ = r·γ₂` stopped at collective angle `π`.
    ///
    /// With `r = √2+1` this is the triplet recipe; `r = 1` returns the atoms to
    /// a product state.
    pub fn simultaneous_pi(shape: PulseShape, strength: f64, ratio: f64) -> Result<Self, Error> {
        if !(ratio.is_finite() && ratio > 0.0) {
            return Err(Error::InvalidParameter {
                name: "ratio",
                reason: "must be finite and positive",
            });
        }
        let tau = solve_duration(shape, strength, PI / (1.0 + ratio * ratio).sqrt())?;
        let schedule = CouplingSchedule::simultaneous_with_ratio(
            CouplingWindow::new(0.0, tau, Pulse { shape, strength })?,
            ratio,
        )?;
        Ok(Self {
            kind: ScenarioKind::TripletDd,
            schedule,
            subspace: ExcitationSubspace::single(),
            samples: DEFAULT_SAMPLES,
        })
    }

    /// Pass-through for an arbitrary schedule.
    pub fn custom(schedule: CouplingSchedule) -> Self {
        Self {
            kind: ScenarioKind::Custom,
            schedule,
            subspace: ExcitationSubspace::single(),
            samples: DEFAULT_SAMPLES,
        }
    }

    pub fn with_samples(mut self, samples: usize) -> Result<Self, Error> {
        if samples < 2 {
            return Err(Error::InvalidParameter {
                name: "samples",
                reason: "need at least 2 per window",
            });
        }
        self.samples = samples;
        Ok(self)
    }

    pub fn with_subspace(mut self, subspace: ExcitationSubspace) -> Result<Self, Error> {
        subspace.require_dynamic()?;
        self.subspace = subspace;
        Ok(self)
    }

    pub fn kind(&self) -> ScenarioKind {
        self.kind
    }

    pub fn schedule(&self) -> &CouplingSchedule {
        &self.schedule
    }

    pub fn subspace(&self) -> ExcitationSubspace {
        self.subspace
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    /// Uniform grid of `samples` points over each distinct window, merged.
    /// Window starts and ends are always on the grid.
    pub fn sample_times(&self) -> Vec<f64> {
        let mut windows = alloc::vec![*self.schedule.window(1)];
        let w2 = *self.schedule.window(2);
        if self.schedule.is_sequential() || w2.start() != windows[0].start() {
            windows.push(w2);
        }
        let n = self.samples;
        let mut times: Vec<f64> = windows
            .iter()
            .flat_map(|w| {
                (0..n).map(move |k| {
                    if k + 1 == n {
                        w.end()
                    } else {
                        w.start() + w.duration() * (k as f64 / (n - 1) as f64)
                    }
                })
            })
            .collect();
        times.sort_by(f64::total_cmp);
        times.dedup();
        times
    }

    /// Correlation records at every sample time.
    pub fn run(&self, method: Method, dt: Option<f64>) -> Result<Vec<CorrelationRecord>, Error> {
        let times = self.sample_times();
        dynamics::evolve_scenario(&self.schedule, self.subspace, method, &times, dt)?
            .iter()
            .map(|(t, psi)| correlations::record(psi, *t))
            .collect()
    }

    /// Instant where atom 2 has rotated by `π/4`, for constant-pulse sequential runs.
    pub fn crossing_time(&self) -> Result<f64, Error> {
        let w2 = self.schedule.window(2);
        if !self.schedule.is_sequential() || !w2.pulse().is_constant() || w2.pulse().strength <= 0.0
        {
            return Err(Error::SymmetryPrecondition);
        }
        let t = w2.start() + FRAC_PI_4 / w2.pulse().strength;
        if t > w2.end() {
            return Err(Error::SymmetryPrecondition);
        }
        Ok(t)
    }

    /// Compares `M_a2(t'+δ)` with `M_f(t'−δ)` and `E_aa(t'+δ)` with
    /// `E_a1f(t'−δ)` on `deltas` evenly spaced offsets, where `t'` is the
    /// [`crossing_time`](Self::crossing_time).
    pub fn symmetry_check(&self, method: Method, deltas: usize) -> Result<SymmetryReport, Error> {
        let both_constant = self.schedule.window(1).pulse().is_constant()
            && self.schedule.window(2).pulse().is_constant();
        if self.kind != ScenarioKind::SingletDjc || !both_constant || deltas < 2 {
            return Err(Error::SymmetryPrecondition);
        }
        let t_prime = self.crossing_time()?;
        let w2 = self.schedule.window(2);
        let reach = (w2.end() - t_prime).min(t_prime - w2.start());
        let offsets: Vec<f64> = (0..deltas)
            .map(|k| reach * k as f64 / (deltas - 1) as f64)
            .collect();

        let forward: Vec<f64> = offsets.iter().map(|d| t_prime + d).collect();
        let backward: Vec<f64> = offsets.iter().rev().map(|d| t_prime - d).collect();
        let eval = |times: &[f64]| -> Result<Vec<CorrelationRecord>, Error> {
            dynamics::evolve_scenario(&self.schedule, self.subspace, method, times, None)?
                .iter()
                .map(|(t, psi)| correlations::record(psi, *t))
                .collect()
        };
        let ahead = eval(&forward)?;
        let mut behind = eval(&backward)?;
        behind.reverse();

        let mut report = SymmetryReport {
            t_prime,
            reach,
            entropy_gap: 0.0,
            entanglement_gap: 0.0,
        };
        for (p, m) in ahead.iter().zip(&behind) {
            report.entropy_gap = report.entropy_gap.max((p.m_a2 - m.m_f).abs());
            report.entanglement_gap = report.entanglement_gap.max((p.e_aa - m.e_a1f).abs());
        }
        Ok(report)
    }
}

/// Outcome of [`Scenario::symmetry_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryReport {
    /// Crossing instant `t'`.
    pub t_prime: f64,
    /// Largest offset examined.
    pub reach: f64,
    /// `max |M_a2(t'+δ) − M_f(t'−δ)|`.
    pub entropy_gap: f64,
    /// `max |E_aa(t'+δ) − E_a1f(t'−δ)|`.
    pub entanglement_gap: f64,
}
