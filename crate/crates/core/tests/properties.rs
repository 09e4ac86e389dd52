use nullkink_core::diagnostics::{
    bondi_energy, classify_endstate, fit_power_law, power_index, ClassifierConfig, DiagnosticsRecord, Endstate,
};
use nullkink_core::effective::{
    integrate_trajectory, potential, speed_for_energy, EffectiveState, Outcome, TrajectoryOptions,
};
use nullkink_core::evolution::{initial_data_family, Control, EvolutionParams, Evolver, MassOperator, Mode};
use nullkink_core::qnm::{build_recurrence, cf_value, Problem};
use nullkink_core::roots::brent;
use nullkink_core::spectral::{DiffOps, Grid};
use num_complex::Complex64;
use proptest::prelude::*;

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

fn poly_dx(c: &[f64], x: f64) -> f64 {
    c.iter().enumerate().skip(1).rev().fold(0.0, |acc, (k, &a)| acc * x + k as f64 * a)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn collocation_derivative_is_exact_on_polynomials(
        k in 9usize..40,
        c in prop::collection::vec(-2.0f64..2.0, 1..9),
    ) {
        let g = Grid::new(k).unwrap();
        let ops = DiffOps::new(&g);
        let d = ops.dx().mul_vec(&g.sample(|x| poly(&c, x)));
        for (x, v) in g.x().iter().zip(&d) {
            prop_assert!((v - poly_dx(&c, *x)).abs() < 1e-10, "x = {x}");
        }
    }

    #[test]
    fn interpolation_and_quadrature_are_exact_on_polynomials(
        k in 9usize..40,
        c in prop::collection::vec(-2.0f64..2.0, 1..9),
        x in 0.0f64..1.0,
    ) {
        let g = Grid::new(k).unwrap();
        let ops = DiffOps::new(&g);
        let v = g.sample(|x| poly(&c, x));
        prop_assert!((g.interpolate(&v, x).unwrap() - poly(&c, x)).abs() < 1e-12);
        let exact: f64 = c.iter().enumerate().map(|(j, a)| a / (j as f64 + 1.0)).sum();
        prop_assert!((ops.integrate(&v) - exact).abs() < 1e-12);
    }

    #[test]
    fn mass_operator_solve_inverts_apply(k in 5usize..60, seed in prop::collection::vec(-1.0f64..1.0, 60)) {
        let g = Grid::new(k).unwrap();
        let m = MassOperator::new(&DiffOps::new(&g)).unwrap();
        let v = &seed[..k];
        let back = m.solve(&m.apply(v));
        for (a, b) in back.iter().zip(v) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn family_energy_respects_the_lower_bound(b in -60.0f64..60.0) {
        let g = Grid::new(129).unwrap();
        let ops = DiffOps::new(&g);
        let e = bondi_energy(initial_data_family(b, false, &g).f(), &g, &ops);
        prop_assert!(e >= 2.0 / 3.0 - 1e-9, "E = {e}");
    }

    #[test]
    fn power_law_fit_recovers_exponent(p in -6.0f64..2.0, a in 0.01f64..100.0, lo in 1.0f64..100.0) {
        let samples: Vec<(f64, f64)> = (0..60).map(|i| lo * 1.1f64.powi(i)).map(|u| (u, a * u.powf(p))).collect();
        let fit = fit_power_law(&samples, (lo, lo * 1e3)).unwrap();
        prop_assert!((fit.exponent - p).abs() < 1e-10);
        prop_assert!((fit.amplitude / a - 1.0).abs() < 1e-8);
        prop_assert!(fit.residual < 1e-10);
    }

    #[test]
    fn power_index_is_exact_on_power_laws(p in -6.0f64..2.0, ratio in 1.01f64..1.5) {
        let u: Vec<f64> = (0..40).map(|i| 10.0 * ratio.powf(i as f64 + 0.3 * (i % 3) as f64)).collect();
        let y: Vec<f64> = u.iter().map(|u| 3.0 * u.powf(p)).collect();
        for q in power_index(&u, &y).into_iter().flatten() {
            prop_assert!((q - p).abs() < 1e-6, "{q} vs {p}");
        }
    }

    #[test]
    fn brent_finds_bracketed_roots(r in -5.0f64..5.0, a in 0.1f64..3.0) {
        let f = |x: f64| a * (x - r) + (x - r).powi(3);
        let x = brent(f, r - 7.0, r + 3.0, 1e-14, 200).unwrap();
        prop_assert!((x - r).abs() < 1e-12);
    }

    #[test]
    fn classifier_n1_implies_energy_near_two(
        energies in prop::collection::vec(0.5f64..3.0, 30),
        zeros in prop::collection::vec(prop::option::of(0.01f64..0.9), 30),
    ) {
        let history: Vec<DiagnosticsRecord> = energies
            .iter()
            .zip(&zeros)
            .enumerate()
            .map(|(i, (&energy, &x0))| DiagnosticsRecord {
                u: 10.0 * (i + 1) as f64,
                energy,
                c1: 0.0,
                c1_dot: 0.0,
                c2: 0.0,
                x0,
                probes: Vec::new(),
            })
            .collect();
        let cfg = ClassifierConfig::default();
        match classify_endstate(&history, &cfg) {
            Endstate::N1 => prop_assert!(history.last().unwrap().energy >= 2.0 - cfg.delta),
            Endstate::N0 => prop_assert!((history.last().unwrap().energy - 2.0 / 3.0).abs() <= cfg.delta),
            Endstate::Undecided => {}
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn effective_energy_is_conserved_and_decides_escape(lambda0 in 3.0f64..40.0, de in 0.01f64..1.0, above in any::<bool>()) {
        // E below 2 but above the potential, or above 2
        let floor = potential(lambda0).max(1.0);
        let e = if above { 2.0 + de } else { floor + (2.0 - floor) * de.min(0.99) };
        let v = speed_for_energy(lambda0, e).unwrap();
        let traj = integrate_trajectory(
            EffectiveState { t: 0.0, lambda: lambda0, lambda_dot: v },
            1e5,
            // E - 2 >= 0.01 reaches lambda ~ 9e3 by t = 1e5, so 1e6 would be out of reach
            &TrajectoryOptions { escape_lambda: 1e3, ..Default::default() },
        ).unwrap();
        prop_assert!(traj.energy_drift <= 1e-9, "drift {}", traj.energy_drift);
        match traj.outcome {
            Outcome::Escape { .. } => prop_assert!(above, "escaped with E = {e}"),
            Outcome::Turning { .. } => prop_assert!(!above, "turned with E = {e}"),
            other => prop_assert!(false, "unexpected {other:?} for E = {e}"),
        }
    }

    #[test]
    fn continued_fraction_respects_conjugation(re in -1.5f64..-0.05, im in 0.05f64..1.5) {
        let sys = build_recurrence(Problem::HalfKink);
        let s = Complex64::new(re, im);
        let a = cf_value(&sys, s).unwrap();
        let b = cf_value(&sys, s.conj()).unwrap();
        prop_assert!((a.conj() - b).norm() <= 1e-10 * a.norm().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    /// Energy never increases, the Newman-Penrose constant is conserved and the
    /// energy stays above the half-kink value along short nonlinear runs.
    #[test]
    fn evolution_conserves_and_dissipates(b in -3.0f64..3.0, np_term in any::<bool>()) {
        let params = EvolutionParams {
            k: 33,
            mode: Mode::Nonlinear,
            u_end: 4.0,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            output_stride: 0.05,
            ..Default::default()
        };
        let ev = Evolver::new(params).unwrap();
        let mut rows: Vec<(f64, f64)> = Vec::new();
        let mut c2 = Vec::new();
        ev.evolve(initial_data_family(b, np_term, ev.grid()), &mut |out| {
            let r = DiagnosticsRecord::from_output(&ev, out);
            rows.push((r.energy, r.c2));
            c2.push(r.c2);
            Control::Continue
        }).unwrap();
        for w in rows.windows(2) {
            prop_assert!(w[1].0 <= w[0].0 + 1e-9, "energy rose from {} to {}", w[0].0, w[1].0);
            prop_assert!(w[1].0 >= 2.0 / 3.0 - 1e-9);
        }
        for v in &c2 {
            prop_assert!((v - c2[0]).abs() <= 1e-6 * (1.0 + c2[0].abs()));
        }
    }
}
