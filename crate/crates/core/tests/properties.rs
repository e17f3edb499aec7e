use majorana::dynamics::{
    direct_velocities, energy, evolve, evolve_exact, star_velocities, EvolveOptions,
    HamiltonianSpec,
};
use majorana::multipoles::{multipoles, state_quantumness};
use majorana::state::fidelity;
use majorana::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn state_strategy(max_two_s: u32) -> impl Strategy<Value = SpinState> {
    (1..=max_two_s).prop_flat_map(|two_s| {
        let dim = two_s as usize + 1;
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), dim)
            .prop_filter("nonzero", |v| {
                v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3)
            })
            .prop_map(move |v| {
                let amps = v.into_iter().map(|(a, b)| C64::new(a, b)).collect();
                SpinState::new(SpinLabel::new(two_s), amps).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stars_determine_the_state(s in state_strategy(12)) {
        let c = constellation_from_state(&s, &StellarOptions::default()).unwrap();
        prop_assert_eq!(c.star_count(), s.label().two_s() as usize);
        let back = state_from_constellation(&c);
        prop_assert!(fidelity(&s, &back).unwrap() >= 1.0 - 1e-10);
    }

    #[test]
    fn multipole_weights_sum_to_one(s in state_strategy(10)) {
        let spec = multipoles(&s);
        let total: f64 = spec.lengths().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let n = s.label().two_s() as f64;
        prop_assert!((spec.cumulative().last().unwrap() - n / (n + 1.0)).abs() < 1e-12);
        for pair in spec.cumulative().windows(2) {
            prop_assert!(pair[1] >= pair[0]);
        }
    }

    #[test]
    fn lengths_survive_rotation(s in state_strategy(8), theta in 0.0..3.1f64, phi in 0.0..6.2f64) {
        let a = multipoles(&s);
        let b = multipoles(&rotate(&s, theta, phi));
        for (x, y) in a.lengths().iter().zip(b.lengths()) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn rotation_moves_stars_rigidly(s in state_strategy(6), theta in 0.0..3.1f64, phi in 0.0..6.2f64) {
        let opts = StellarOptions::default();
        let before = constellation_from_state(&s, &opts).unwrap().points();
        let after = constellation_from_state(&rotate(&s, theta, phi), &opts).unwrap().points();
        let pairwise = |pts: &[SpherePoint]| {
            let mut d = Vec::new();
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    d.push(pts[i].chordal_distance(&pts[j]));
                }
            }
            d.sort_by(f64::total_cmp);
            d
        };
        for (x, y) in pairwise(&before).iter().zip(&pairwise(&after)) {
            prop_assert!((x - y).abs() < 1e-7);
        }
    }

    #[test]
    fn coherent_states_have_one_star(two_s in 1u32..=10, re in -3.0..3.0f64, im in -3.0..3.0f64) {
        prop_assume!(re.abs() + im.abs() > 1e-3);
        let z0 = C64::new(re, im);
        let s = coherent_state(SpinLabel::new(two_s), z0.into());
        let c = constellation_from_state(&s, &StellarOptions::default()).unwrap();
        let target = stereo_to_sphere(-z0.inv());
        for p in c.points() {
            prop_assert!(p.chordal_distance(&target) < 1e-10);
        }
    }

    #[test]
    fn symbol_and_matrix_give_same_velocities(seed in 0u64..1000, two_s in 1u32..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = SpinLabel::new(two_s);
        let h = HamiltonianSpec::random(l, &mut rng);
        let s = random_state(l, &mut rng);
        let c = constellation_from_state(&s, &StellarOptions::default()).unwrap();
        let a = star_velocities(&c, &h).unwrap();
        let b = direct_velocities(&c, &h).unwrap();
        for ((va, vb), z) in a.iter().zip(&b).zip(c.finite_roots()) {
            prop_assert!((va - vb).norm() <= 1e-7 * h.spectral_norm() * (1.0 + z.norm_sqr()));
        }
    }

    #[test]
    fn exact_evolution_conserves_energy(seed in 0u64..1000, two_s in 1u32..=8, t in 0.0..5.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = SpinLabel::new(two_s);
        let h = HamiltonianSpec::random(l, &mut rng);
        let s = random_state(l, &mut rng);
        let e0 = energy(&s, &h).unwrap();
        let e1 = energy(&evolve_exact(&s, &h, t).unwrap(), &h).unwrap();
        prop_assert!((e0 - e1).abs() < 1e-9 * h.spectral_norm().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn eigenstates_do_not_move(seed in 0u64..1000, two_s in 1u32..=5, k in 0usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = SpinLabel::new(two_s);
        let h = HamiltonianSpec::random(l, &mut rng);
        let eig = h.matrix().clone().symmetric_eigen();
        let col = eig.eigenvectors.column(k % l.dim());
        let s = SpinState::new(l, col.iter().copied().collect()).unwrap();
        let start = constellation_from_state(&s, &StellarOptions::default()).unwrap();
        let traj = evolve(&s, &h, 0.5, &EvolveOptions { samples: 5, ..Default::default() }).unwrap();
        for snap in traj.snapshots() {
            prop_assert!(snap.distance(&start) < 1e-8);
        }
    }

    #[test]
    fn order_zero_quantumness_is_rejected(s in state_strategy(4)) {
        prop_assert!(state_quantumness(&s, 0).is_err());
    }
}
