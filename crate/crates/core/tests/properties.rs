use gaussnm_core::channels::{GaussianChannel, CPTP_TOL};
use gaussnm_core::evolutions::{
    noise_profile_oscillating, noise_profile_rational, noise_profile_rational_scaled, uniform_grid,
    Evolution, FnProfile, Setup, CP_TOL,
};
use gaussnm_core::symplectic::{symplectic_eigenvalues, symplectic_form};
use gaussnm_core::{
    entanglement_ppt, ghz_w_state, is_physical, steerability, two_mode_squeezed, Bipartition,
    CovarianceMatrix, Direction,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn symmetric(modes: usize, entries: &[f64]) -> DMatrix<f64> {
    let side = 2 * modes;
    let mut h = DMatrix::zeros(side, side);
    let mut k = 0;
    for i in 0..side {
        for j in i..side {
            h[(i, j)] = entries[k];
            h[(j, i)] = entries[k];
            k += 1;
        }
    }
    h
}

fn random_symplectic(modes: usize, entries: &[f64]) -> DMatrix<f64> {
    (symplectic_form(modes).unwrap() * symmetric(modes, entries)).exp()
}

/// Thermal state with symplectic spectrum `nus` conjugated by a random symplectic matrix.
fn random_state(modes: usize, entries: &[f64], nus: &[f64]) -> CovarianceMatrix {
    let s = random_symplectic(modes, entries);
    let d = DMatrix::from_fn(
        2 * modes,
        2 * modes,
        |i, j| if i == j { nus[i / 2] } else { 0.0 },
    );
    let m = &s * d * s.transpose();
    CovarianceMatrix::new((&m + m.transpose()) * 0.5).unwrap()
}

fn random_cptp(t: &[f64], extra: &[f64]) -> GaussianChannel {
    let t_m = DMatrix::from_row_slice(2, 2, t);
    let floor = (t_m.determinant() - 1.0).abs() + extra[0];
    let v = nalgebra::dvector![extra[1], extra[2]];
    let n = DMatrix::identity(2, 2) * floor + &v * v.transpose();
    GaussianChannel::new(t_m, n).unwrap()
}

fn sym_entries(modes: usize) -> impl Strategy<Value = Vec<f64>> {
    let side = 2 * modes;
    prop::collection::vec(-0.6..0.6f64, side * (side + 1) / 2)
}

fn nus(modes: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1.0..3.0f64, modes)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn symplectic_spectrum_is_invariant(
        base in sym_entries(3),
        conj in sym_entries(3),
        spectrum in nus(3),
    ) {
        let sigma = random_state(3, &base, &spectrum);
        let s = random_symplectic(3, &conj);
        let moved = &s * sigma.data() * s.transpose();
        let moved = (&moved + moved.transpose()) * 0.5;
        let before = symplectic_eigenvalues(sigma.data()).unwrap();
        let after = symplectic_eigenvalues(&moved).unwrap();
        let mut expected = spectrum.clone();
        expected.sort_by(f64::total_cmp);
        for k in 0..3 {
            prop_assert!((before[k] - after[k]).abs() <= 1e-8, "{before:?} vs {after:?}");
            prop_assert!((before[k] - expected[k]).abs() <= 1e-8);
        }
    }

    #[test]
    fn witnesses_never_grow_under_local_channels_two_mode(
        base in sym_entries(2),
        spectrum in nus(2),
        t in prop::collection::vec(-1.5..1.5f64, 4),
        extra in prop::collection::vec(0.0..1.0f64, 3),
    ) {
        let sigma = random_state(2, &base, &spectrum);
        let ch = random_cptp(&t, &extra).embed_local(2, 0).unwrap();
        prop_assert!(ch.is_cptp(CPTP_TOL));
        let out = ch.apply(&sigma).unwrap();
        let part = Bipartition::new(1, 1).unwrap();
        let g0 = steerability(&sigma, part, Direction::AToB).unwrap();
        let g1 = steerability(&out, part, Direction::AToB).unwrap();
        prop_assert!(g1 <= g0 + 1e-9, "steering {g0} -> {g1}");
        let e0 = entanglement_ppt(&sigma, part).unwrap();
        let e1 = entanglement_ppt(&out, part).unwrap();
        prop_assert!(e1 <= e0 + 1e-9, "entanglement {e0} -> {e1}");
    }

    #[test]
    fn witnesses_never_grow_under_local_channels_three_mode(
        base in sym_entries(3),
        spectrum in nus(3),
        t in prop::collection::vec(-1.5..1.5f64, 4),
        extra in prop::collection::vec(0.0..1.0f64, 3),
    ) {
        let sigma = random_state(3, &base, &spectrum);
        let part = Bipartition::new(2, 1).unwrap();
        let ch = random_cptp(&t, &extra).embed_local(3, 0).unwrap();
        prop_assert!(ch.is_cptp(CPTP_TOL));
        let out = ch.apply(&sigma).unwrap();
        let g0 = steerability(&sigma, part, Direction::AToB).unwrap();
        let g1 = steerability(&out, part, Direction::AToB).unwrap();
        prop_assert!(g1 <= g0 + 1e-9, "steering {g0} -> {g1}");

        // the eigenvalue-sum quantifier is only guaranteed to fall when T does not amplify
        let t_m = DMatrix::from_row_slice(2, 2, &t);
        let norm = t_m.singular_values().max();
        let t: Vec<f64> = t.iter().map(|x| x / norm.max(1.0)).collect();
        let ch = random_cptp(&t, &extra).embed_local(3, 0).unwrap();
        prop_assert!(ch.is_cptp(CPTP_TOL));
        let out = ch.apply(&sigma).unwrap();
        let e0 = entanglement_ppt(&sigma, part).unwrap();
        let e1 = entanglement_ppt(&out, part).unwrap();
        prop_assert!(e1 <= e0 + 1e-9, "entanglement {e0} -> {e1}");
    }

    #[test]
    fn entanglement_breaking_implies_incompatibility_breaking(
        tau in 0.0..2.0f64,
        eta in 0.0..8.0f64,
    ) {
        let ch = GaussianChannel::isotropic(tau, eta).unwrap();
        prop_assume!(ch.is_cptp(CPTP_TOL));
        if ch.is_eb().unwrap() {
            prop_assert!(ch.is_gib(CPTP_TOL));
        }
    }

    #[test]
    fn intermediate_map_round_trip(
        t_early in prop::collection::vec(-1.0..1.0f64, 16),
        t_late in prop::collection::vec(-1.0..1.0f64, 16),
        n_early in sym_entries(2),
        n_late in sym_entries(2),
    ) {
        let well_posed = |v: &[f64]| DMatrix::from_row_slice(4, 4, v) + DMatrix::identity(4, 4) * 2.5;
        let earlier = GaussianChannel::new(well_posed(&t_early), symmetric(2, &n_early)).unwrap();
        let later = GaussianChannel::new(well_posed(&t_late), symmetric(2, &n_late)).unwrap();
        let bridge = GaussianChannel::intermediate_map(&later, &earlier).unwrap();
        let back = GaussianChannel::compose(&bridge, &earlier).unwrap();
        prop_assert!((back.t() - later.t()).amax() <= 1e-10);
        prop_assert!((back.n() - later.n()).amax() <= 1e-10);
    }
}

#[test]
fn single_mode_cptp_forms_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    while checked < 10_000 {
        let t = DMatrix::from_fn(2, 2, |_, _| rng.random_range(-2.0..2.0));
        let a = rng.random_range(-1.0..3.0);
        let b = rng.random_range(-1.0..3.0);
        let c = rng.random_range(-1.5..1.5);
        let n = DMatrix::from_row_slice(2, 2, &[a, c, c, b]);
        let ch = GaussianChannel::new(t, n).unwrap();
        // samples too close to the boundary are decided by rounding, not by the criterion
        if ch.cptp_margin().abs() < 1e-6 {
            continue;
        }
        assert_eq!(
            ch.is_cptp(CPTP_TOL),
            ch.single_mode_cptp_conditions(CPTP_TOL).unwrap(),
            "{ch:?}"
        );
        checked += 1;
    }
}

#[test]
fn random_states_are_physical() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let entries: Vec<f64> = (0..21).map(|_| rng.random_range(-0.6..0.6)).collect();
        let spectrum: Vec<f64> = (0..3).map(|_| rng.random_range(1.0..3.0)).collect();
        assert!(is_physical(&random_state(3, &entries, &spectrum), 1e-9));
    }
}

fn lossy_family() -> Evolution {
    Evolution::lossy(
        FnProfile::new(
            |t| (-0.2 * t - 0.1 * (3.0 * t).sin()).exp(),
            |t| -(0.2 + 0.3 * (3.0 * t).cos()) * (-0.2 * t - 0.1 * (3.0 * t).sin()).exp(),
            |t| t * (1.0 + 0.5 * (2.0 * t).sin()),
            |t| 1.0 + 0.5 * (2.0 * t).sin() + t * (2.0 * t).cos(),
        ),
        10.0,
    )
    .unwrap()
}

fn scenario_grids() -> Vec<(Evolution, Vec<f64>)> {
    let mut out = vec![
        (noise_profile_rational(), uniform_grid(8.0, 600).unwrap()),
        (
            noise_profile_rational_scaled(),
            uniform_grid(8.0, 600).unwrap(),
        ),
        (lossy_family(), uniform_grid(10.0, 600).unwrap()),
    ];
    for eta0 in [0.8, 1.0, 2.0, 4.0, 30.0] {
        out.push((
            noise_profile_oscillating(eta0).unwrap(),
            uniform_grid(3.0, 600).unwrap(),
        ));
    }
    out
}

#[test]
fn general_criterion_matches_closed_form() {
    for (ev, grid) in scenario_grids() {
        for &t in &grid {
            let v = ev.is_markovian_at(t, CP_TOL).unwrap();
            let eig = ev.criterion_eigenvalues(t).unwrap();
            let mut pair = [v.lambda_minus, v.lambda_plus];
            pair.sort_by(f64::total_cmp);
            let scale = pair[1].abs().max(1.0);
            assert!((eig[0] - pair[0]).abs() <= 1e-10 * scale, "t={t}");
            assert!((eig[1] - pair[1]).abs() <= 1e-10 * scale, "t={t}");
            if (eig[0] + CP_TOL).abs() > 1e-10 * scale {
                assert_eq!(v.markovian, eig[0] >= -CP_TOL, "t={t}");
            }
        }
    }
}

#[test]
fn markovian_stretches_have_cptp_bridges() {
    let grid = uniform_grid(8.0, 161).unwrap();
    for ev in [noise_profile_rational(), lossy_family()] {
        let verdicts: Vec<bool> = grid
            .iter()
            .map(|&t| ev.is_markovian_at(t, CP_TOL).unwrap().markovian)
            .collect();
        for i in 0..grid.len() {
            for j in (i + 1)..grid.len() {
                if !verdicts[i..=j].iter().all(|&m| m) {
                    break;
                }
                let bridge = GaussianChannel::intermediate_map(
                    &ev.channel_at(grid[j]).unwrap(),
                    &ev.channel_at(grid[i]).unwrap(),
                )
                .unwrap();
                assert!(bridge.is_cptp(1e-9), "[{}, {}]", grid[i], grid[j]);
            }
        }
    }
}

#[test]
fn two_mode_steering_predicate_implies_three_mode() {
    for (ev, grid) in scenario_grids() {
        for &t in &grid {
            if ev.steering_backflow_predicate(t, Setup::TwoMode).unwrap() {
                assert!(ev.steering_backflow_predicate(t, Setup::ThreeMode).unwrap());
            }
        }
    }
}

#[test]
fn classical_noise_steerability_vanishes_exactly_from_unit_noise() {
    let part = Bipartition::new(1, 1).unwrap();
    for r in [0.1, 0.5, 1.0, 2.0, 3.0] {
        let state = two_mode_squeezed(r).unwrap();
        for k in 0..=40 {
            let eta = 0.05 * f64::from(k);
            let out = GaussianChannel::isotropic(1.0, eta)
                .unwrap()
                .embed_local(2, 0)
                .unwrap()
                .apply(&state)
                .unwrap();
            let g = steerability(&out, part, Direction::AToB).unwrap();
            if eta < 1.0 {
                assert!(g > 0.0, "r={r} eta={eta}");
            } else {
                assert!(g <= 1e-9, "r={r} eta={eta} g={g}");
            }
        }
    }
}

#[test]
fn gib_and_eb_channels_nullify_witnesses() {
    let pairs = [
        (
            two_mode_squeezed(2.0).unwrap(),
            Bipartition::new(1, 1).unwrap(),
        ),
        (ghz_w_state(2.0).unwrap(), Bipartition::new(1, 2).unwrap()),
    ];
    let channels = [
        (1.0, 1.0),
        (1.0, 1.7),
        (1.0, 2.0),
        (1.0, 3.5),
        (0.6, 0.36),
        (0.6, 1.36),
        (0.3, 2.0),
    ];
    for (state, part) in &pairs {
        for &(tau, eta) in &channels {
            let ch = GaussianChannel::isotropic(tau, eta).unwrap();
            let out = ch
                .embed_local(state.modes(), 0)
                .unwrap()
                .apply(state)
                .unwrap();
            if ch.is_gib(CPTP_TOL) {
                assert!(steerability(&out, *part, Direction::AToB).unwrap() <= 1e-9);
            }
            if ch.is_eb().unwrap() {
                assert!(entanglement_ppt(&out, *part).unwrap() <= 1e-9);
            }
        }
    }
}

fn log_negativity(sigma: &CovarianceMatrix, modes: usize) -> f64 {
    // partial transpose of the last mode flips its momentum
    let side = 2 * modes;
    let flip = DMatrix::from_fn(side, side, |i, j| match (i == j, i == side - 1) {
        (true, true) => -1.0,
        (true, false) => 1.0,
        _ => 0.0,
    });
    symplectic_eigenvalues(&(&flip * sigma.data() * &flip))
        .unwrap()
        .iter()
        .filter(|&&nu| nu < 1.0)
        .map(|nu| -nu.ln())
        .sum()
}

#[test]
fn ppt_eigenvalue_sum_can_grow_under_an_amplifying_channel() {
    let base = [
        0.0,
        -0.5377346509098035,
        0.43084185017616483,
        0.0,
        -0.14054049285788708,
        -0.5804630675705309,
        -0.36948287122126183,
        -0.5816959081264323,
        0.0,
        0.4572008453634328,
        0.0,
        0.0,
        0.0,
        -0.10237216638707691,
        0.0,
        0.0,
        -0.5844792329966187,
        0.25965497179619224,
        0.10815070396626858,
        0.35233909341065506,
        -0.2217368426641666,
    ];
    let sigma = random_state(3, &base, &[2.0244778819936284, 1.0, 1.0]);
    let t = [
        0.0,
        -1.251492657203441,
        0.7013162149972687,
        -1.0487985818344927,
    ];
    let ch = random_cptp(&t, &[0.0; 3]).embed_local(3, 0).unwrap();
    assert!(ch.is_cptp(CPTP_TOL));
    let out = ch.apply(&sigma).unwrap();
    let part = Bipartition::new(2, 1).unwrap();
    let (e0, e1) = (
        entanglement_ppt(&sigma, part).unwrap(),
        entanglement_ppt(&out, part).unwrap(),
    );
    assert!(e1 > e0 + 1e-3, "{e0} -> {e1}");
    // the state did lose entanglement: the negativity falls
    assert!(log_negativity(&out, 3) < log_negativity(&sigma, 3) - 1e-2);
    assert!(
        steerability(&out, part, Direction::AToB).unwrap()
            <= steerability(&sigma, part, Direction::AToB).unwrap()
    );
}
