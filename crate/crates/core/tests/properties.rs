use std::f64::consts::PI;

use cavity_discord::lindblad::{atomic_state, evolve, FockSpace, IntegratorConfig};
use cavity_discord::matrix::{hermitian_eigenvalues, kron, partial_trace, Subsystem};
use cavity_discord::measures::{
    concurrence_model, concurrence_xstate, discord_bell_diagonal, discord_numeric_with,
    MinimizerConfig,
};
use cavity_discord::model::{correlation_vector, decoherence_factor, magnitude_sq, two_atom_state};
use cavity_discord::scan::{
    detect_death_intervals, time_series, Quantity, SeriesOptions, TimeGrid,
};
use cavity_discord::{
    Complex64, ComplexMatrix, DensityMatrix, Family, PhysicalParams, SingleAtomInit, WernerSpec,
};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn hermitian_strategy(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n * n).prop_map(move |raw| {
        let m = ComplexMatrix::from_vec(n, n, raw.into_iter().map(|(a, b)| c(a, b)).collect());
        m.hermitian_part()
    })
}

fn density_strategy(n: usize) -> impl Strategy<Value = DensityMatrix> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n * n).prop_map(move |raw| {
        let a = ComplexMatrix::from_vec(n, n, raw.into_iter().map(|(x, y)| c(x, y)).collect());
        let g = a.matmul(&a.adjoint());
        let tr = g.trace().re.max(1e-12);
        DensityMatrix::try_new(g.scale_real(1.0 / tr).hermitian_part()).unwrap()
    })
}

/// Rotation in the `(i, j)` plane with a phase.
fn givens(n: usize, i: usize, j: usize, theta: f64, phi: f64) -> ComplexMatrix {
    let mut u = ComplexMatrix::identity(n);
    let (s, co) = theta.sin_cos();
    u[(i, i)] = c(co, 0.0);
    u[(j, j)] = c(co, 0.0);
    u[(i, j)] = -Complex64::from_polar(s, phi);
    u[(j, i)] = Complex64::from_polar(s, -phi);
    u
}

fn family_strategy() -> impl Strategy<Value = Family> {
    prop_oneof![Just(Family::Phi), Just(Family::Psi)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectrum_invariant_under_unitary(h in hermitian_strategy(4), rots in prop::collection::vec((0usize..4, 0usize..4, 0.0..PI, 0.0..2.0 * PI), 1..6)) {
        let mut u = ComplexMatrix::identity(4);
        for (i, j, theta, phi) in rots {
            if i != j {
                u = givens(4, i, j, theta, phi).matmul(&u);
            }
        }
        let before = hermitian_eigenvalues(&h).unwrap();
        let after = hermitian_eigenvalues(&h.conjugate_by(&u).hermitian_part()).unwrap();
        for (a, b) in before.iter().zip(&after) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn eigenvalues_sum_to_trace(h in hermitian_strategy(6)) {
        let sum: f64 = hermitian_eigenvalues(&h).unwrap().iter().sum();
        prop_assert!((sum - h.trace().re).abs() < 1e-10);
    }

    #[test]
    fn partial_trace_preserves_trace(rho in density_strategy(6)) {
        for keep in [Subsystem::A, Subsystem::B] {
            let reduced = partial_trace(&rho, (2, 3), keep).unwrap();
            prop_assert!((reduced.matrix().trace().re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn entropy_additive_on_products(a in density_strategy(2), b in density_strategy(3)) {
        let joint = a.tensor(&b).entropy().unwrap();
        prop_assert!((joint - a.entropy().unwrap() - b.entropy().unwrap()).abs() < 1e-9);
    }

    #[test]
    fn tensor_matches_kron(a in density_strategy(2), b in density_strategy(2)) {
        let t = a.tensor(&b);
        prop_assert!(t.matrix().max_abs_diff(&kron(a.matrix(), b.matrix())) < 1e-15);
    }

    #[test]
    fn revival_peaks_decrease(gamma in 1e-3..1.0f64, alpha in 0.1..2.0f64) {
        let params = PhysicalParams::scaled(gamma, c(alpha, 0.0)).unwrap();
        let peaks: Vec<f64> = (0..12).map(|k| magnitude_sq(&params, k as f64 * PI).unwrap()).collect();
        prop_assert!(peaks[1] < peaks[0]);
        for w in peaks.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn correlation_vector_structure(p in 0.0..=1.0f64, gamma in 0.0..1.0f64, alpha in 0.0..2.0f64, alpha_im in -1.0..1.0f64, t in 0.0..40.0f64, family in family_strategy()) {
        let params = PhysicalParams::scaled(gamma, c(alpha, alpha_im)).unwrap();
        let rho = two_atom_state(&WernerSpec::new(p, family).unwrap(), &params, t).unwrap();
        let d = correlation_vector(&rho).unwrap();
        let f_sq = decoherence_factor(&params, t).unwrap().norm_sqr();
        let x = p * f_sq;
        prop_assert!((d.d1 - x).abs() < 1e-12);
        match family {
            Family::Phi => prop_assert!((d.d2 - x).abs() < 1e-12 && (d.d3 + p).abs() < 1e-12),
            Family::Psi => prop_assert!((d.d2 + x).abs() < 1e-12 && (d.d3 - p).abs() < 1e-12),
        }
        let conc = concurrence_xstate(&rho).unwrap();
        prop_assert!((conc - concurrence_model(p, f_sq).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn families_share_discord(p in 0.0..=1.0f64, f_sq in 0.0..=1.0f64) {
        let phi = cavity_discord::scan::model_correlations(&WernerSpec::new(p, Family::Phi).unwrap(), f_sq);
        let psi = cavity_discord::scan::model_correlations(&WernerSpec::new(p, Family::Psi).unwrap(), f_sq);
        let gap = (discord_bell_diagonal(&phi).unwrap() - discord_bell_diagonal(&psi).unwrap()).abs();
        prop_assert!(gap < 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn death_events_bracket_zero_concurrence(p in 0.34..0.9f64, alpha in 0.4..1.5f64, gamma in 1e-3..0.2f64) {
        let spec = WernerSpec::new(p, Family::Phi).unwrap();
        let params = PhysicalParams::scaled(gamma, c(alpha, 0.0)).unwrap();
        let grid = TimeGrid::new(20.0, 400).unwrap();
        let series = time_series(&spec, &params, &grid, &SeriesOptions::default()).unwrap();
        let events = detect_death_intervals(&series, Quantity::Concurrence, 0.0).unwrap();
        let conc = |t: f64| concurrence_model(p, magnitude_sq(&params, t).unwrap()).unwrap();
        for e in &events {
            let end = e.t_end.unwrap_or(20.0);
            prop_assert!(e.t_start < end);
            prop_assert!(conc(0.5 * (e.t_start + end)) == 0.0);
            if e.t_start > 1e-6 {
                prop_assert!(conc(e.t_start - 1e-6) > 0.0);
            }
            if let Some(t_end) = e.t_end {
                prop_assert!(conc(t_end + 1e-6) > 0.0);
            }
        }
        for w in events.windows(2) {
            prop_assert!(w[0].t_end.unwrap() < w[1].t_start);
        }
    }
}

fn atomic_coherence(
    init: &SingleAtomInit,
    params: &PhysicalParams,
    fock: &FockSpace,
    t: f64,
    dt: f64,
) -> Complex64 {
    let snaps = evolve(init, params, fock, t, &IntegratorConfig::new(dt)).unwrap();
    atomic_state(&snaps.last().unwrap().state, fock)
        .unwrap()
        .matrix()[(0, 1)]
}

#[test]
fn integrator_is_fourth_order() {
    let init = SingleAtomInit::new(0.5, 0.5, c(0.5, 0.0)).unwrap();
    let params = PhysicalParams::scaled(0.05, c(1.0, 0.0)).unwrap();
    let fock = FockSpace::new(16).unwrap();
    let exact = init.zeta_c() * decoherence_factor(&params, 2.0).unwrap();
    let errs: Vec<f64> = [0.0025, 0.00125]
        .iter()
        .map(|&dt| (atomic_coherence(&init, &params, &fock, 2.0, dt) - exact).norm())
        .collect();
    let order = (errs[0] / errs[1]).log2();
    assert!(
        (3.7..4.3).contains(&order),
        "observed order {order}, errors {errs:?}"
    );
}

#[test]
fn truncation_insensitive_beyond_default() {
    let init = SingleAtomInit::new(0.5, 0.5, c(0.5, 0.0)).unwrap();
    let params = PhysicalParams::scaled(0.01, c(1.0, 0.0)).unwrap();
    let a = atomic_coherence(&init, &params, &FockSpace::new(16).unwrap(), 3.0, 0.002);
    let b = atomic_coherence(&init, &params, &FockSpace::new(24).unwrap(), 3.0, 0.002);
    assert!(
        (a - b).norm() < 1e-8,
        "n_max 16 vs 24 differ by {}",
        (a - b).norm()
    );
}

/// Brute-force grid over the measurement sphere, far finer than the default
/// minimizer. Slow; run with `--ignored`.
#[test]
#[ignore]
fn exhaustive_grid_agrees_with_closed_form() {
    let cfg = MinimizerConfig::grid_only(512, 1024);
    for family in [Family::Phi, Family::Psi] {
        for p in [0.2, 0.5, 0.9] {
            for f_sq in [0.1f64, 0.5, 0.95] {
                let spec = WernerSpec::new(p, family).unwrap();
                let rho = cavity_discord::model::two_atom_state_for_factor(
                    &spec,
                    Complex64::from_polar(f_sq.sqrt(), 1.1),
                );
                let closed = discord_bell_diagonal(&correlation_vector(&rho).unwrap()).unwrap();
                let brute = discord_numeric_with(&rho, &cfg).unwrap().discord;
                assert!(
                    (closed - brute).abs() < 1e-6,
                    "p={p} f_sq={f_sq}: {closed} vs {brute}"
                );
            }
        }
    }
}
