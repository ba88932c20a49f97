#![allow(clippy::needless_range_loop)]

mod common;

use common::{c, damped_photon_wigner, gaussian_density, gaussian_scenario};
use lossy_cavity::io_weights::ModeWeights;
use lossy_cavity::par::Exec;
use lossy_cavity::phase_space::{
    characteristic_out, extraction_report, fidelity, gaussian_propagate, p_out_transform,
    read_grid_binary, read_grid_csv, to_grid, wigner_out_thermal, write_grid_binary,
    write_grid_csv, xi_s, xi_wigner, Gaussian, Grid, GridOptions, PhaseSpaceState, TransformInputs,
};
use lossy_cavity::CavityError;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use std::f64::consts::PI;

fn weights(eta: f64, zeta_in: f64, zeta_cav: f64, zeta_plus: f64, zeta_minus: f64) -> ModeWeights {
    ModeWeights {
        eta,
        zeta_in,
        zeta_cav,
        zeta_plus,
        zeta_minus,
        at: None,
    }
}

fn max_error(g: &Grid, f: impl Fn(lossy_cavity::Complex64) -> f64) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..g.n {
        for k in 0..g.n {
            worst = worst.max((g.value(r, k) - f(g.point(r, k))).abs());
        }
    }
    worst
}

#[test]
fn gaussian_grid_matches_closed_form() {
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..4 {
        let sc = gaussian_scenario(&mut rng);
        let inputs = TransformInputs::thermal(
            PhaseSpaceState::Gaussian(sc.cavity),
            PhaseSpaceState::Gaussian(sc.input),
            sc.n_bar,
        );
        let out = p_out_transform(&inputs, &sc.weights, 0.0, &GridOptions::default()).unwrap();
        let (mean, cov) = sc.expected();
        assert!(max_error(&out, |a| gaussian_density(mean, cov, a)) < 1e-4);
        assert!((out.mass() - 1.0).abs() < 1e-3);
        let closed = gaussian_propagate(&sc.cavity, &sc.input, sc.n_bar, &sc.weights);
        assert!((closed.mean - mean).norm() < 1e-12);
        for r in 0..2 {
            for k in 0..2 {
                assert!((closed.cov[r][k] - cov[r][k]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn tabulated_cavity_state_goes_through_the_grid_path() {
    let mut rng = StdRng::seed_from_u64(11);
    let sc = gaussian_scenario(&mut rng);
    let opts = GridOptions::default();
    let a = 5.0 * (1.0 + 3.0);
    let tab = to_grid(
        &PhaseSpaceState::Gaussian(sc.cavity),
        a,
        256,
        Exec::Parallel,
    )
    .unwrap();
    let inputs = TransformInputs::thermal(
        PhaseSpaceState::Grid(tab),
        PhaseSpaceState::Gaussian(sc.input),
        sc.n_bar,
    );
    let out = p_out_transform(
        &inputs,
        &sc.weights,
        0.0,
        &GridOptions {
            half_width: Some(a),
            ..opts
        },
    )
    .unwrap();
    let (mean, cov) = sc.expected();
    assert!(max_error(&out, |x| gaussian_density(mean, cov, x)) < 1e-4);
}

#[test]
fn thermal_wigner_path_equals_general_transform_with_thermal_grids() {
    let mut rng = StdRng::seed_from_u64(3);
    let sc = gaussian_scenario(&mut rng);
    let (cav, inp) = (
        PhaseSpaceState::Gaussian(sc.cavity),
        PhaseSpaceState::Gaussian(sc.input),
    );
    let opts = GridOptions {
        half_width: Some(12.0),
        n: 128,
        exec: Exec::Parallel,
    };
    let direct = wigner_out_thermal(&cav, &inp, sc.n_bar, &sc.weights, &opts).unwrap();
    let [tc, tp, tm] = sc.n_bar.map(|n| {
        PhaseSpaceState::Grid(
            to_grid(
                &PhaseSpaceState::Gaussian(Gaussian::thermal(n)),
                12.0,
                128,
                Exec::Parallel,
            )
            .unwrap(),
        )
    });
    let inputs = TransformInputs {
        cavity: cav,
        input: inp,
        cav: tc,
        plus: tp,
        minus: tm,
    };
    let general = p_out_transform(&inputs, &sc.weights, 0.0, &opts).unwrap();
    assert!(direct.sup_distance(&general).unwrap() < 1e-4);
}

#[test]
fn damped_single_photon() {
    let opts = GridOptions {
        half_width: Some(6.0),
        n: 128,
        exec: Exec::Parallel,
    };
    for eta in [0.25, 0.5, 0.9] {
        let inputs = TransformInputs::thermal(
            PhaseSpaceState::fock(1).unwrap(),
            PhaseSpaceState::vacuum(),
            [0.0; 3],
        );
        let w = weights(
            eta,
            0.4 * (1.0 - eta),
            0.3 * (1.0 - eta),
            0.2 * (1.0 - eta),
            0.1 * (1.0 - eta),
        );
        let out = p_out_transform(&inputs, &w, 0.0, &opts).unwrap();
        assert!(
            max_error(&out, |a| damped_photon_wigner(eta, a)) < 1e-4,
            "eta {eta}"
        );
        let mid = out.n / 2;
        assert_eq!(out.point(mid, mid), c(0.0, 0.0));
        assert!((out.value(mid, mid) - 2.0 / PI * (1.0 - 2.0 * eta)).abs() < 1e-4);
    }
}

#[test]
fn vacuum_is_a_fixed_point() {
    let inputs = TransformInputs::thermal(
        PhaseSpaceState::vacuum(),
        PhaseSpaceState::vacuum(),
        [0.0; 3],
    );
    let w = weights(0.6, 0.2, 0.1, 0.05, 0.05);
    let out = p_out_transform(&inputs, &w, 0.0, &GridOptions::default()).unwrap();
    assert!(
        max_error(&out, |a| gaussian_density(
            c(0.0, 0.0),
            [[0.25, 0.0], [0.0, 0.25]],
            a
        )) < 1e-10
    );
    for b in [c(0.3, 0.1), c(-1.0, 2.0)] {
        let co = characteristic_out(b, &inputs, &w, 0.0).unwrap();
        assert!((co.re - (-0.5 * b.norm_sqr()).exp()).abs() < 1e-14 && co.im.abs() < 1e-14);
    }
}

#[test]
fn coherent_amplitude_scales_with_root_eta() {
    let a0 = c(1.2, -0.7);
    let inputs = TransformInputs::thermal(
        PhaseSpaceState::Gaussian(Gaussian::coherent(a0)),
        PhaseSpaceState::vacuum(),
        [0.0; 3],
    );
    let w = weights(0.7, 0.1, 0.1, 0.05, 0.05);
    let out = p_out_transform(&inputs, &w, 0.0, &GridOptions::default()).unwrap();
    let (mean, cov) = out.moments();
    assert!((mean - a0 * 0.7f64.sqrt()).norm() < 1e-9);
    assert!((cov[0][0] - 0.25).abs() < 1e-9 && cov[0][1].abs() < 1e-9);
}

#[test]
fn q_function_output_from_wigner_inputs() {
    let inputs = TransformInputs::thermal(
        PhaseSpaceState::vacuum(),
        PhaseSpaceState::vacuum(),
        [0.0; 3],
    );
    let w = weights(0.8, 0.2, 0.0, 0.0, 0.0);
    let out = p_out_transform(&inputs, &w, -1.0, &GridOptions::default()).unwrap();
    // Vacuum Q function: (1/π) e^{−|α|²}.
    assert!(max_error(&out, |a| (-a.norm_sqr()).exp() / PI) < 1e-10);
    assert!(matches!(
        p_out_transform(&inputs, &w, 0.5, &GridOptions::default()),
        Err(CavityError::NegativeXi { .. })
    ));
}

#[test]
fn xi_examples() {
    let w = weights(0.8, 0.2, 0.0, 0.0, 0.0);
    let z = xi_s(&w, 0.0, 0.0, [0.0; 4]).unwrap();
    assert!(z.limiting && z.value == 0.0);
    assert_eq!(xi_s(&w, -1.0, 0.0, [0.0; 4]).unwrap().value, 1.0);
    assert!((xi_s(&w, 0.0, 1.0, [1.0, 0.0, 0.0, 0.0]).unwrap().value - 1.0).abs() < 1e-15);
    let w = weights(0.6, 0.3, 0.1, 0.0, 0.0);
    assert!((xi_wigner(&w, [2.0, 0.0, 0.0]).unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn extraction_figures() {
    let lossless = extraction_report(&ModeWeights::identity(), [0.0; 3]);
    assert!(lossless.vacuum_merit.is_infinite() && lossless.thermal_merit.is_infinite());
    assert_eq!(lossless.input_suppression, 1.0);
    let w = weights(0.9, 0.05, 0.03, 0.01, 0.01);
    let cold = extraction_report(&w, [0.0; 3]);
    let hot = extraction_report(&w, [0.0, 10.0, 10.0]);
    assert!((cold.vacuum_merit - 9.0).abs() < 1e-12);
    assert!((hot.thermal_merit - 0.9 / (0.1 + 2.0 * 10.0 * 0.02)).abs() < 1e-12);
    assert!(hot.thermal_merit < cold.thermal_merit);
    assert!((cold.input_weight + cold.cavity_weight - (0.05 + 0.9) / 0.05).abs() < 1e-12);
}

#[test]
fn fidelity_examples() {
    let opts = GridOptions::default();
    let sq = PhaseSpaceState::Gaussian(Gaussian::squeezed(0.5, 1.0));
    assert!((fidelity(&sq, &sq, &opts).unwrap() - 1.0).abs() < 1e-6);
    let coh = PhaseSpaceState::Gaussian(Gaussian::coherent(c(0.6, 0.8)));
    let vac = PhaseSpaceState::vacuum();
    assert!((fidelity(&vac, &coh, &opts).unwrap() - (-1.0f64).exp()).abs() < 1e-12);
    let one = PhaseSpaceState::fock(1).unwrap();
    assert!(fidelity(&one, &vac, &opts).unwrap().abs() < 1e-8);
    assert!((fidelity(&one, &one, &opts).unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn grid_files_round_trip() {
    let g = to_grid(
        &PhaseSpaceState::fock(3).unwrap(),
        6.0,
        32,
        Exec::Sequential,
    )
    .unwrap();
    let mut csv = Vec::new();
    write_grid_csv(&g, &mut csv).unwrap();
    let back = read_grid_csv(csv.as_slice()).unwrap();
    assert_eq!(back.n, g.n);
    assert!(back.sup_distance(&g).unwrap() < 1e-15);
    let mut bin = Vec::new();
    write_grid_binary(&g, &mut bin).unwrap();
    assert_eq!(read_grid_binary(bin.as_slice()).unwrap(), g);
    assert!(read_grid_binary(&bin[..20]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn closed_form_output_is_physical(seed in any::<u64>()) {
        let sc = gaussian_scenario(&mut StdRng::seed_from_u64(seed));
        let out = gaussian_propagate(&sc.cavity, &sc.input, sc.n_bar, &sc.weights);
        prop_assert!(out.validate().is_ok());
        let c = out.cov;
        prop_assert!(c[0][0] * c[1][1] - c[0][1] * c[1][0] >= 1.0 / 16.0 - 1e-12);
    }

    #[test]
    fn small_grid_transform_normalized(seed in any::<u64>()) {
        let sc = gaussian_scenario(&mut StdRng::seed_from_u64(seed));
        let inputs = TransformInputs::thermal(
            PhaseSpaceState::Gaussian(sc.cavity),
            PhaseSpaceState::Gaussian(sc.input),
            sc.n_bar,
        );
        let opts = GridOptions { half_width: None, n: 64, exec: Exec::Sequential };
        let out = p_out_transform(&inputs, &sc.weights, 0.0, &opts).unwrap();
        prop_assert!((out.mass() - 1.0).abs() < 1e-3);
    }
}
