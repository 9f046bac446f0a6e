//! Seeded random-state populations and trajectory sweeps checked against
//! the entropy and concurrence identities.

use atomcav_core::correlations::{
    self, closed_form_concurrences, closed_form_entropies, concurrence_aa_n,
    intrinsic_entanglement, intrinsic_entanglement_n, linear_entropy, reduce, wootters_concurrence,
    Subsystems,
};
use atomcav_core::dynamics::Method;
use atomcav_core::{ExcitationSubspace, PulseShape, PureState, Scenario, ScenarioKind, C64};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const TRIALS: usize = 10_000;

fn random_state(rng: &mut ChaCha8Rng, sub: ExcitationSubspace) -> PureState {
    let mut amps: Vec<C64> = (0..sub.dim())
        .map(|_| C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect();
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|a| *a /= norm);
    PureState::new(sub, &amps).unwrap()
}

fn entropy(psi: &PureState, keep: Subsystems) -> f64 {
    linear_entropy(&reduce(psi, keep).unwrap())
}

#[test]
fn single_excitation_population() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_identity: f64 = 0.0;
    let mut worst_oracle: f64 = 0.0;
    let mut worst_entropy: f64 = 0.0;
    for _ in 0..TRIALS {
        let psi = random_state(&mut rng, ExcitationSubspace::single());
        let (m1, m2, mf) = (
            entropy(&psi, Subsystems::ATOM1),
            entropy(&psi, Subsystems::ATOM2),
            entropy(&psi, Subsystems::FIELD),
        );
        let (cm1, cm2, cmf) = closed_form_entropies(&psi).unwrap();
        worst_entropy = worst_entropy
            .max((m1 - cm1).abs())
            .max((m2 - cm2).abs())
            .max((mf - cmf).abs());

        let (caa, ca1f, ca2f) = closed_form_concurrences(&psi).unwrap();
        let pairs = [
            (Subsystems::ATOMS, caa, intrinsic_entanglement(m1, m2, mf)),
            (
                Subsystems::ATOM1_FIELD,
                ca1f,
                intrinsic_entanglement(m1, mf, m2),
            ),
            (
                Subsystems::ATOM2_FIELD,
                ca2f,
                intrinsic_entanglement(m2, mf, m1),
            ),
        ];
        for (keep, closed, e) in pairs {
            let w = wootters_concurrence(&reduce(&psi, keep).unwrap()).unwrap();
            worst_oracle = worst_oracle.max((w - closed).abs());
            worst_identity = worst_identity.max((e - closed * closed).abs());
        }
    }
    println!("entropy paths {worst_entropy:e}, E=C² {worst_identity:e}, Wootters {worst_oracle:e}");
    assert!(worst_entropy < 1e-10);
    assert!(worst_identity < 1e-9);
    assert!(worst_oracle < 1e-9);
}

#[test]
fn higher_block_population() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_paths: f64 = 0.0;
    let mut worst_gap = f64::INFINITY;
    for k in 0..TRIALS {
        let sub = ExcitationSubspace::new(2 + (k % 4) as u32);
        let psi = random_state(&mut rng, sub);
        let e_formula = intrinsic_entanglement_n(&psi).unwrap();
        let e_trace = intrinsic_entanglement(
            entropy(&psi, Subsystems::ATOM1),
            entropy(&psi, Subsystems::ATOM2),
            entropy(&psi, Subsystems::FIELD),
        );
        worst_paths = worst_paths.max((e_formula - e_trace).abs());
        let c = concurrence_aa_n(&psi).unwrap();
        worst_gap = worst_gap.min(e_formula - c * c);

        // Against the X-state expression 2 max(0, |b₁b₂| − |b₀b₃|).
        let b = psi.amplitudes();
        let x_state = 2.0 * ((b[1] * b[2]).norm() - (b[0] * b[3]).norm()).max(0.0);
        assert!(
            (c - x_state).abs() < 1e-9,
            "Wootters {c} vs X-state {x_state}"
        );
    }
    println!("E paths {worst_paths:e}, min(E − C²) {worst_gap:e}");
    assert!(worst_paths < 1e-9);
    assert!(worst_gap >= -1e-9);
}

#[test]
fn entropy_inequalities_on_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for k in 0..2000 {
        let sub = ExcitationSubspace::new(1 + (k % 3) as u32);
        let psi = random_state(&mut rng, sub);
        let m = |s| entropy(&psi, s);
        let singles = [Subsystems::ATOM1, Subsystems::ATOM2, Subsystems::FIELD];
        for (i, a) in singles.iter().enumerate() {
            // Purity complement: M of a pair equals M of the remaining single.
            let pair = a.complement();
            assert!((m(pair) - m(*a)).abs() < 1e-10);
            for b in &singles[i + 1..] {
                assert!(m(*a | *b) <= m(*a) + m(*b) + 1e-12);
                let e = m(*a) + m(*b) - m(*a | *b);
                assert!(e >= -1e-12);
            }
            // Strong subadditivity with B = a in the middle, pure total state.
            let others: Vec<_> = singles.iter().filter(|s| *s != a).collect();
            let lhs = 0.0 + m(*a);
            let rhs = m(*a | *others[0]) + m(*a | *others[1]);
            assert!(lhs <= rhs + 1e-12);
        }
    }
}

#[test]
fn scenario_trajectories_satisfy_identities() {
    for kind in [
        ScenarioKind::SingletDjc,
        ScenarioKind::WStateDjc,
        ScenarioKind::TripletDd,
    ] {
        for shape in [
            PulseShape::Constant,
            PulseShape::SineSquaredRamp {
                ramp_fraction: 0.25,
            },
        ] {
            let sc = Scenario::build(kind, shape, 1.0)
                .unwrap()
                .with_samples(128)
                .unwrap();
            for method in [Method::ClosedForm, Method::Rk4] {
                for r in sc.run(method, None).unwrap() {
                    for (e, c) in [
                        (r.e_aa, r.c_aa),
                        (r.e_a1f, r.c_a1f.unwrap()),
                        (r.e_a2f, r.c_a2f.unwrap()),
                    ] {
                        assert!((e - c * c).abs() < 1e-9, "{kind:?} t={}", r.t);
                        assert!((0.0..=1.0 + 1e-12).contains(&c));
                    }
                    for m in [r.m_a1, r.m_a2, r.m_f] {
                        assert!(
                            (-1e-12..=0.5 + 1e-12).contains(&m),
                            "{kind:?} {method:?} t={} m={m}",
                            r.t
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn record_rejects_nothing_on_valid_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for k in 0..500 {
        let psi = random_state(&mut rng, ExcitationSubspace::new(1 + (k % 5) as u32));
        correlations::record(&psi, 0.0).unwrap();
    }
}

fn amplitudes(dim: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), dim)
        .prop_filter("nonzero", |v| {
            v.iter().map(|(a, b)| a * a + b * b).sum::<f64>() > 1e-6
        })
        .prop_map(|v| {
            let n = v.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt();
            v.into_iter().map(|(a, b)| C64::new(a / n, b / n)).collect()
        })
}

proptest! {
    #[test]
    fn pure_density_is_idempotent(amps in amplitudes(4), n in 2u32..6) {
        let psi = PureState::new(ExcitationSubspace::new(n), &amps).unwrap();
        let rho = psi.pure_density().unwrap();
        let m = rho.entries();
        prop_assert!((m * m - m).norm() < 1e-9);
        prop_assert!((rho.purity() - 1.0).abs() < 1e-9);
        let diag: Vec<f64> = (0..4).map(|i| m[(i, i)].re).collect();
        for (d, p) in diag.iter().zip(psi.populations()) {
            prop_assert!((d - p).abs() < 1e-15);
        }
        prop_assert!(atomcav_core::DensityMatrix::new(m.clone()).is_ok());
    }

    #[test]
    fn reduced_states_are_valid(amps in amplitudes(3)) {
        let psi = PureState::new(ExcitationSubspace::single(), &amps).unwrap();
        for keep in [Subsystems::ATOM1, Subsystems::ATOMS, Subsystems::FIELD, Subsystems::ATOM2_FIELD] {
            let rho = reduce(&psi, keep).unwrap();
            prop_assert!(atomcav_core::DensityMatrix::new(rho.entries().clone()).is_ok());
            let m = linear_entropy(&rho);
            prop_assert!(m >= -1e-12 && m <= 1.0 - 1.0 / rho.dim() as f64 + 1e-12);
        }
    }

    #[test]
    fn local_phases_leave_measures_unchanged(amps in amplitudes(3), p in -3.0..3.0f64, q in -3.0..3.0f64) {
        // A local unitary diag(1, e^{ip}) on atom 1 and a field phase shift
        // map into phases on the basis amplitudes.
        let psi = PureState::new(ExcitationSubspace::single(), &amps).unwrap();
        let rotated: Vec<C64> = amps
            .iter()
            .zip([C64::from_polar(1.0, 0.0), C64::from_polar(1.0, p), C64::from_polar(1.0, p + q)])
            .map(|(a, ph)| a * ph)
            .collect();
        let phi = PureState::new(ExcitationSubspace::single(), &rotated).unwrap();
        let (a, b) = (correlations::record(&psi, 0.0).unwrap(), correlations::record(&phi, 0.0).unwrap());
        prop_assert!((a.e_aa - b.e_aa).abs() < 1e-12);
        prop_assert!((a.e_a1f - b.e_a1f).abs() < 1e-12);
        prop_assert!((a.e_a2f - b.e_a2f).abs() < 1e-12);
        prop_assert!((a.c_aa - b.c_aa).abs() < 1e-9);
    }
}
