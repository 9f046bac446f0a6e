//! Time-windowed atom-field couplings and their integrated Rabi angles.
//!
//! Atom `i` enters the cavity at `t_i` and couples to the field for a time
//! `τ_i`: the coupling is `γ_i(t)` on the half-open interval `[t_i, t_i + τ_i)`
//! and zero elsewhere. Half-open windows let a sequential schedule with
//! `t₂ = t₁ + τ₁` partition time without overlap at the handoff.

use alloc::vec::Vec;
use core::f64::consts::PI;

// Needed for f64 math without std; shadowed by inherent methods when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::numeric;
use crate::Error;

/// Absolute error target for quadrature of non-constant pulses.
pub const QUADRATURE_TOL: f64 = 1e-10;

/// Relative slack when comparing window start/end instants.
const TIME_MATCH_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseShape {
    /// Flat top for the whole window.
    Constant,
    /// `sin²` turn-on and turn-off, each lasting `ramp_fraction · τ`, with a
    /// flat top in between. `ramp_fraction = 0.5` is a single `sin²` bump.
    SineSquaredRamp { ramp_fraction: f64 },
}

/// Pulse shape plus peak strength (angular frequency, `ħ = 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    pub shape: PulseShape,
    pub strength: f64,
}

impl Pulse {
    pub fn constant(strength: f64) -> Self {
        Self {
            shape: PulseShape::Constant,
            strength,
        }
    }

    pub fn sine_squared(strength: f64, ramp_fraction: f64) -> Self {
        Self {
            shape: PulseShape::SineSquaredRamp { ramp_fraction },
            strength,
        }
    }

    fn validate(&self) -> Result<(), Error> {
        if !(self.strength.is_finite() && self.strength >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "strength",
                reason: "must be finite and nonnegative",
            });
        }
        if let PulseShape::SineSquaredRamp { ramp_fraction } = self.shape {
            if !(ramp_fraction > 0.0 && ramp_fraction <= 0.5) {
                return Err(Error::InvalidParameter {
                    name: "ramp_fraction",
                    reason: "must lie in (0, 0.5]",
                });
            }
        }
        Ok(())
    }

    /// Coupling at offset `s` into a window of length `duration`.
    fn profile(&self, s: f64, duration: f64) -> f64 {
        match self.shape {
            PulseShape::Constant => self.strength,
            PulseShape::SineSquaredRamp { ramp_fraction } => {
                let ramp = ramp_fraction * duration;
                let edge = s.min(duration - s);
                if edge >= ramp {
                    self.strength
                } else {
                    let x = (0.5 * PI * edge / ramp).sin();
                    self.strength * x * x
                }
            }
        }
    }

    /// Offsets inside the window where the profile is not smooth.
    fn kinks(&self, duration: f64) -> [Option<f64>; 2] {
        match self.shape {
            PulseShape::Constant => [None, None],
            PulseShape::SineSquaredRamp { ramp_fraction } => {
                let ramp = ramp_fraction * duration;
                [Some(ramp), Some(duration - ramp)]
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.shape, PulseShape::Constant)
    }
}

/// One atom's passage through the cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingWindow {
    start: f64,
    duration: f64,
    pulse: Pulse,
}

impl CouplingWindow {
    pub fn new(start: f64, duration: f64, pulse: Pulse) -> Result<Self, Error> {
        if !start.is_finite() {
            return Err(Error::InvalidParameter {
                name: "inject_time",
                reason: "must be finite",
            });
        }
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::InvalidParameter {
                name: "duration",
                reason: "must be finite and positive",
            });
        }
        pulse.validate()?;
        Ok(Self {
            start,
            duration,
            pulse,
        })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn end(&self) -> f64 {
        self.start + self.duration
    }

    pub fn pulse(&self) -> Pulse {
        self.pulse
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t < self.end()
    }

    /// `f_i(t)`: the pulse inside `[start, end)`, zero outside.
    pub fn value(&self, t: f64) -> f64 {
        if self.contains(t) {
            self.pulse.profile(t - self.start, self.duration)
        } else {
            0.0
        }
    }

    /// The pulse continued onto the closed window `[start, end]` when `active`,
    /// zero otherwise. Lets a solver stage evaluate at a segment endpoint
    /// without picking up the jump at the window edge.
    fn value_if(&self, t: f64, active: bool) -> f64 {
        if active {
            let s = (t - self.start).clamp(0.0, self.duration);
            self.pulse.profile(s, self.duration)
        } else {
            0.0
        }
    }

    /// Absolute times at which `value` is not smooth, window edges included.
    pub fn breakpoints(&self) -> impl Iterator<Item = f64> + '_ {
        let kinks = self.pulse.kinks(self.duration);
        [Some(0.0), kinks[0], kinks[1], Some(self.duration)]
            .into_iter()
            .flatten()
            .map(move |s| self.start + s)
    }

    /// `θ_i(t) = ∫_{t_i}^{t} γ_i`, frozen at its final value once the window closes.
    pub fn rabi_angle(&self, t: f64) -> Result<f64, Error> {
        if t.is_nan() || t < self.start {
            return Err(Error::BeforeWindow {
                t,
                start: self.start,
            });
        }
        let s = (t - self.start).min(self.duration);
        Ok(self.angle_at_offset(s))
    }

    /// Angle reached when the window closes.
    pub fn total_angle(&self) -> f64 {
        self.angle_at_offset(self.duration)
    }

    fn angle_at_offset(&self, s: f64) -> f64 {
        match self.pulse.shape {
            PulseShape::Constant => self.pulse.strength * s,
            PulseShape::SineSquaredRamp { .. } => {
                let f = |x: f64| self.pulse.profile(x, self.duration);
                integrate_piecewise(&f, 0.0, s, &self.pulse.kinks(self.duration))
            }
        }
    }

    fn with_strength(&self, strength: f64) -> Self {
        let mut w = *self;
        w.pulse.strength = strength;
        w
    }
}

fn integrate_piecewise<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, kinks: &[Option<f64>]) -> f64 {
    let mut cuts: Vec<f64> = kinks
        .iter()
        .flatten()
        .copied()
        .filter(|&k| k > a && k < b)
        .collect();
    cuts.sort_by(f64::total_cmp);
    let mut total = 0.0;
    let mut lo = a;
    let pieces = cuts.len() + 1;
    for hi in cuts.into_iter().chain(core::iter::once(b)) {
        total += numeric::integrate(f, lo, hi, QUADRATURE_TOL / pieces as f64);
        lo = hi;
    }
    total
}

/// Sequential (DJC) or simultaneous (DD) interaction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleMode {
    /// Atom 2 enters exactly when atom 1 leaves.
    Sequential,
    /// Both atoms share the window. `ratio` is `γ₁/γ₂` when it is constant in time.
    Simultaneous { ratio: Option<f64> },
}

/// The pair of windows driving the two atoms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingSchedule {
    first: CouplingWindow,
    second: CouplingWindow,
    mode: ScheduleMode,
}

fn same_instant(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIME_MATCH_TOL * a.abs().max(b.abs()).max(1.0)
}

impl CouplingSchedule {
    /// DJC schedule; requires `t₂ = t₁ + τ₁`.
    pub fn sequential(first: CouplingWindow, second: CouplingWindow) -> Result<Self, Error> {
        if !same_instant(second.start, first.end()) {
            return Err(Error::InvalidParameter {
                name: "t2",
                reason: "sequential schedule needs t2 = t1 + tau1",
            });
        }
        // Pin the handoff exactly so the windows partition time.
        let second = CouplingWindow {
            start: first.end(),
            ..second
        };
        Ok(Self {
            first,
            second,
            mode: ScheduleMode::Sequential,
        })
    }

    /// DD schedule from two windows sharing `t₁ = t₂`, `τ₁ = τ₂`.
    ///
    /// The ratio is recorded as constant only when both pulses have the same
    /// shape and atom 2's strength is nonzero.
    pub fn simultaneous(first: CouplingWindow, second: CouplingWindow) -> Result<Self, Error> {
        if !same_instant(first.start, second.start)
            || !same_instant(first.duration, second.duration)
        {
            return Err(Error::InvalidParameter {
                name: "t2",
                reason: "simultaneous schedule needs t1 = t2 and tau1 = tau2",
            });
        }
        let second = CouplingWindow {
            start: first.start,
            duration: first.duration,
            ..second
        };
        let ratio = (first.pulse.shape == second.pulse.shape
            && second.pulse.strength > 0.0
            && first.pulse.strength > 0.0)
            .then(|| first.pulse.strength / second.pulse.strength);
        Ok(Self {
            first,
            second,
            mode: ScheduleMode::Simultaneous { ratio },
        })
    }

    /// DD schedule with `γ₁(t) = r·γ₂(t)`; `window` describes atom 2.
    pub fn simultaneous_with_ratio(window: CouplingWindow, ratio: f64) -> Result<Self, Error> {
        if !(ratio.is_finite() && ratio > 0.0) {
            return Err(Error::InvalidParameter {
                name: "ratio",
                reason: "must be finite and positive",
            });
        }
        let first = window.with_strength(ratio * window.pulse.strength);
        first.pulse.validate()?;
        Ok(Self {
            first,
            second: window,
            mode: ScheduleMode::Simultaneous { ratio: Some(ratio) },
        })
    }

    pub fn mode(&self) -> ScheduleMode {
        self.mode
    }

    pub fn is_sequential(&self) -> bool {
        matches!(self.mode, ScheduleMode::Sequential)
    }

    pub fn ratio(&self) -> Option<f64> {
        match self.mode {
            ScheduleMode::Simultaneous { ratio } => ratio,
            ScheduleMode::Sequential => None,
        }
    }

    pub fn window(&self, atom: usize) -> &CouplingWindow {
        match atom {
            1 => &self.first,
            2 => &self.second,
            _ => panic!("atoms are numbered 1 and 2, got {atom}"),
        }
    }

    pub fn start(&self) -> f64 {
        self.first.start.min(self.second.start)
    }

    pub fn end(&self) -> f64 {
        self.first.end().max(self.second.end())
    }

    pub fn max_strength(&self) -> f64 {
        self.first.pulse.strength.max(self.second.pulse.strength)
    }

    /// Instantaneous `(γ₁(t), γ₂(t))`.
    pub fn evaluate(&self, t: f64) -> (f64, f64) {
        let g2 = self.second.value(t);
        match self.mode {
            ScheduleMode::Simultaneous { ratio: Some(r) } => (r * g2, g2),
            _ => (self.first.value(t), g2),
        }
    }

    /// Couplings at `t` with the set of open windows decided at `probe`.
    ///
    /// Inside a segment that contains no breakpoint this is the smooth
    /// continuation of `evaluate(probe)` up to and including the endpoints.
    pub fn evaluate_with_active_set(&self, t: f64, probe: f64) -> (f64, f64) {
        let g2 = self.second.value_if(t, self.second.contains(probe));
        match self.mode {
            ScheduleMode::Simultaneous { ratio: Some(r) } => (r * g2, g2),
            _ => (self.first.value_if(t, self.first.contains(probe)), g2),
        }
    }

    /// Sorted, deduplicated instants where either coupling is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self
            .first
            .breakpoints()
            .chain(self.second.breakpoints())
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Effective vacuum Rabi angle `θ(t) = ∫ ω`, `ω² = γ₁² + γ₂²`, counted
    /// from the window start. Zero before the window.
    pub fn collective_angle(&self, t: f64) -> Result<f64, Error> {
        let ratio = match self.mode {
            ScheduleMode::Simultaneous { ratio } => ratio,
            ScheduleMode::Sequential => {
                return Err(Error::WrongMode {
                    required: "simultaneous",
                })
            }
        };
        if t.is_nan() {
            return Err(Error::BeforeWindow {
                t,
                start: self.start(),
            });
        }
        if t <= self.second.start {
            return Ok(0.0);
        }
        match ratio {
            Some(r) => Ok((1.0 + r * r).sqrt() * self.second.rabi_angle(t)?),
            None => {
                let f = |x: f64| {
                    let (g1, g2) = self.evaluate(x);
                    g1.hypot(g2)
                };
                let start = self.second.start;
                let stop = t.min(self.second.end());
                let kinks: Vec<Option<f64>> = self.breakpoints().into_iter().map(Some).collect();
                Ok(integrate_piecewise(&f, start, stop, &kinks))
            }
        }
    }

    /// `α = γ₁γ₂/ω² = r/(1 + r²)`.
    pub fn coupling_mean(&self) -> Result<f64, Error> {
        match self.mode {
            ScheduleMode::Sequential => Err(Error::WrongMode {
                required: "simultaneous",
            }),
            ScheduleMode::Simultaneous { ratio: None } => Err(Error::VaryingRatio),
            ScheduleMode::Simultaneous { ratio: Some(r) } => Ok(coupling_mean_for_ratio(r)),
        }
    }
}

/// `r/(1 + r²)`, symmetric under `r → 1/r`.
pub fn coupling_mean_for_ratio(r: f64) -> f64 {
    r / (1.0 + r * r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_4, SQRT_2};
    use proptest::prelude::*;

    fn window(start: f64, duration: f64, pulse: Pulse) -> CouplingWindow {
        CouplingWindow::new(start, duration, pulse).unwrap()
    }

    /// Composite trapezoid rule on a uniform grid; independent of the
    /// adaptive integrator under test.
    fn trapezoid<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let inner: f64 = (1..n).map(|k| f(a + k as f64 * h)).sum();
        h * (0.5 * f(a) + inner + 0.5 * f(b))
    }

    #[test]
    fn evaluate_inside_and_outside() {
        let w = window(0.0, 1.0, Pulse::constant(1.0));
        let s = CouplingSchedule::sequential(w, window(1.0, 1.0, Pulse::constant(2.0))).unwrap();
        assert_eq!(s.evaluate(0.5), (1.0, 0.0));
        assert_eq!(s.evaluate(-0.1), (0.0, 0.0));
        // Handoff instant belongs to the second window only.
        assert_eq!(s.evaluate(1.0), (0.0, 2.0));
        assert_eq!(s.evaluate(2.0), (0.0, 0.0));
    }

    #[test]
    fn evaluate_ratio_schedule() {
        let r = SQRT_2 + 1.0;
        let s =
            CouplingSchedule::simultaneous_with_ratio(window(0.0, 1.0, Pulse::constant(1.0)), r)
                .unwrap();
        assert_eq!(s.evaluate(0.3), (r, 1.0));
    }

    #[test]
    fn sequential_requires_handoff() {
        let a = window(0.0, 1.0, Pulse::constant(1.0));
        let b = window(1.5, 1.0, Pulse::constant(1.0));
        assert!(CouplingSchedule::sequential(a, b).is_err());
        assert!(CouplingSchedule::simultaneous(a, b).is_err());
    }

    #[test]
    fn rabi_angle_constant() {
        let w = window(0.0, 10.0, Pulse::constant(1.0));
        assert!((w.rabi_angle(FRAC_PI_4).unwrap() - FRAC_PI_4).abs() < 1e-15);
        assert_eq!(w.rabi_angle(0.0).unwrap(), 0.0);
        let w = window(2.0, 1.0, Pulse::constant(3.0));
        assert_eq!(w.rabi_angle(2.0).unwrap(), 0.0);
        assert_eq!(w.rabi_angle(7.0).unwrap(), 3.0);
        assert!(matches!(w.rabi_angle(1.0), Err(Error::BeforeWindow { .. })));
    }

    #[test]
    fn rabi_angle_ramp_matches_trapezoid() {
        for &frac in &[0.1, 0.25, 0.5] {
            let w = window(0.3, 2.0, Pulse::sine_squared(1.7, frac));
            for &t in &[0.3, 0.45, 0.9, 1.5, 2.2, 2.3, 4.0] {
                let stop = t.min(w.end());
                let oracle = trapezoid(
                    |x| w.value(x.min(w.end() - 1e-15)),
                    w.start(),
                    stop,
                    200_000,
                );
                let got = w.rabi_angle(t).unwrap();
                assert!(
                    (got - oracle).abs() < 1e-8,
                    "frac={frac} t={t}: {got} vs {oracle}"
                );
            }
        }
    }

    #[test]
    fn collective_angle_examples() {
        let sym = CouplingSchedule::simultaneous(
            window(0.0, 5.0, Pulse::constant(1.0)),
            window(0.0, 5.0, Pulse::constant(1.0)),
        )
        .unwrap();
        assert!((sym.collective_angle(1.0).unwrap() - SQRT_2).abs() < 1e-14);
        assert_eq!(sym.collective_angle(0.0).unwrap(), 0.0);

        let r = SQRT_2 + 1.0;
        let dd =
            CouplingSchedule::simultaneous_with_ratio(window(0.0, 5.0, Pulse::constant(1.0)), r)
                .unwrap();
        let oracle = trapezoid(
            |t| {
                let (a, b) = dd.evaluate(t);
                (a * a + b * b).sqrt()
            },
            0.0,
            1.0,
            10_000,
        );
        let got = dd.collective_angle(1.0).unwrap();
        assert!((got - oracle).abs() < 1e-12);
        assert!((got - (1.0 + r * r).sqrt()).abs() < 1e-14);

        let djc = CouplingSchedule::sequential(
            window(0.0, 1.0, Pulse::constant(1.0)),
            window(1.0, 1.0, Pulse::constant(1.0)),
        )
        .unwrap();
        assert!(matches!(
            djc.collective_angle(0.5),
            Err(Error::WrongMode { .. })
        ));
    }

    #[test]
    fn collective_angle_without_fixed_ratio() {
        let s = CouplingSchedule::simultaneous(
            window(0.0, 2.0, Pulse::sine_squared(1.0, 0.5)),
            window(0.0, 2.0, Pulse::constant(0.5)),
        )
        .unwrap();
        assert_eq!(s.ratio(), None);
        let oracle = trapezoid(
            |t| {
                let (a, b) = s.evaluate(t.min(2.0 - 1e-15));
                a.hypot(b)
            },
            0.0,
            1.3,
            200_000,
        );
        assert!((s.collective_angle(1.3).unwrap() - oracle).abs() < 1e-8);
        assert!(matches!(s.coupling_mean(), Err(Error::VaryingRatio)));
    }

    #[test]
    fn coupling_mean_examples() {
        let mk = |r: f64| {
            CouplingSchedule::simultaneous_with_ratio(window(0.0, 1.0, Pulse::constant(1.0)), r)
        };
        assert_eq!(mk(1.0).unwrap().coupling_mean().unwrap(), 0.5);
        let alpha = mk(SQRT_2 + 1.0).unwrap().coupling_mean().unwrap();
        assert!((alpha - 1.0 / (2.0 * SQRT_2)).abs() < 1e-15);
        assert!(mk(0.0).is_err());
        assert!(mk(-1.0).is_err());
        let djc = CouplingSchedule::sequential(
            window(0.0, 1.0, Pulse::constant(1.0)),
            window(1.0, 1.0, Pulse::constant(1.0)),
        )
        .unwrap();
        assert!(matches!(djc.coupling_mean(), Err(Error::WrongMode { .. })));
    }

    #[test]
    fn invalid_windows_rejected() {
        assert!(CouplingWindow::new(0.0, 0.0, Pulse::constant(1.0)).is_err());
        assert!(CouplingWindow::new(0.0, 1.0, Pulse::constant(-1.0)).is_err());
        assert!(CouplingWindow::new(0.0, 1.0, Pulse::sine_squared(1.0, 0.0)).is_err());
        assert!(CouplingWindow::new(0.0, 1.0, Pulse::sine_squared(1.0, 0.6)).is_err());
        assert!(CouplingWindow::new(f64::NAN, 1.0, Pulse::constant(1.0)).is_err());
    }

    fn any_pulse() -> impl Strategy<Value = Pulse> {
        prop_oneof![
            (0.0..5.0f64).prop_map(Pulse::constant),
            (0.0..5.0f64, 0.01..=0.5f64).prop_map(|(s, f)| Pulse::sine_squared(s, f)),
        ]
    }

    proptest! {
        #[test]
        fn zero_outside_windows(start in -5.0..5.0f64, dur in 0.01..5.0f64, p in any_pulse(), t in -20.0..20.0f64) {
            let w = window(start, dur, p);
            let v = w.value(t);
            prop_assert!(v >= 0.0);
            if t < start || t >= start + dur {
                prop_assert_eq!(v, 0.0);
            }
        }

        #[test]
        fn angles_nondecreasing(dur in 0.1..5.0f64, p in any_pulse(), a in 0.0..6.0f64, b in 0.0..6.0f64) {
            let w = window(0.0, dur, p);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(w.rabi_angle(lo).unwrap() <= w.rabi_angle(hi).unwrap() + 1e-10);
            let s = CouplingSchedule::simultaneous_with_ratio(w, 1.7).unwrap();
            prop_assert!(s.collective_angle(lo).unwrap() <= s.collective_angle(hi).unwrap() + 1e-10);
        }

        #[test]
        fn ratio_holds_exactly(r in 0.01..20.0f64, p in any_pulse(), t in -1.0..3.0f64) {
            let s = CouplingSchedule::simultaneous_with_ratio(window(0.0, 2.0, p), r).unwrap();
            let (g1, g2) = s.evaluate(t);
            prop_assert_eq!(g1, r * g2);
        }

        #[test]
        fn coupling_mean_inversion_symmetry(r in 1e-3..1e3f64) {
            let a = coupling_mean_for_ratio(r);
            let b = coupling_mean_for_ratio(1.0 / r);
            prop_assert!((a - b).abs() <= 1e-15 * a.max(1e-300).max(1.0));
        }
    }
}
