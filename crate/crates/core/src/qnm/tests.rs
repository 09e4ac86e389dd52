use super::*;
use std::vec::Vec;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const HALFKINK_S: (f64, f64) = (-0.364322, 0.476858);
const VACUUM_S: (f64, f64) = (-1.281373, 0.4294849);

#[test]
fn bandwidths() {
    assert_eq!(build_recurrence(Problem::HalfKink).bandwidth(), 7);
    assert_eq!(build_recurrence(Problem::Vacuum).bandwidth(), 3);
}

#[test]
fn vacuum_coefficients_are_exact() {
    // y^2 -> (1-t)^2, 2y -> 2 - 2t, V = 15/4
    let sys = build_recurrence(Problem::Vacuum);
    let [p2, p1a, p1b, p0] = sys.base_coefficients(0);
    assert_eq!((p2, p1a, p1b, p0), (Rational::ONE, Rational::ZERO, Rational::ZERO, Rational::ZERO));
    let [p2, p1a, p1b, _] = sys.base_coefficients(1);
    assert_eq!((p2, p1a, p1b), (Rational::int(-2), Rational::int(2), Rational::int(2)));
    let [p2, p1a, p1b, p0] = sys.base_coefficients(2);
    assert_eq!((p2, p1a, p1b, p0), (Rational::ONE, Rational::int(-2), Rational::ZERO, Rational::new(15, 4)));
}

/// Residual of `y^2 v'' + (2y + 2s) v' - V v` for the truncated series.
fn ode_residual(problem: Problem, s: Complex64, n: usize, y: f64) -> (f64, f64) {
    let sys = build_recurrence(problem);
    let a = forward_recurrence(&sys, s, n).unwrap();
    let t = 1.0 - y;
    let (mut v, mut vt, mut vtt) = (c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
    let mut amax: f64 = 0.0;
    for k in 1..=n {
        let ak = a.get(k);
        amax = amax.max(ak.norm());
        let kf = k as f64;
        v += ak * t.powi(k as i32);
        vt += ak * kf * t.powi(k as i32 - 1);
        if k >= 2 {
            vtt += ak * kf * (kf - 1.0) * t.powi(k as i32 - 2);
        }
    }
    let pot = match problem {
        Problem::Vacuum => 3.75,
        Problem::HalfKink => 3.75 - 24.0 * y * y / ((1.0 + y * y) * (1.0 + y * y)),
    };
    // d/dy = -d/dt
    let r = vtt * y * y - vt * (s * 2.0 + 2.0 * y) - v * pot;
    (r.norm(), amax)
}

#[test]
fn truncated_series_solves_the_ode() {
    for problem in [Problem::HalfKink, Problem::Vacuum] {
        for s in [c(-0.3, 0.5), c(1.0, 0.0), c(-1.2, 0.4)] {
            let (r, amax) = ode_residual(problem, s, 30, 0.9);
            assert!(r <= 1e-10 * amax, "{problem} {s}: {r:e} vs {amax:e}");
        }
        // spectral decrease with truncation order
        let (r10, _) = ode_residual(problem, c(-0.3, 0.5), 10, 0.7);
        let (r20, _) = ode_residual(problem, c(-0.3, 0.5), 20, 0.7);
        assert!(r20 < 1e-3 * r10);
    }
}

#[test]
fn vacuum_series_matches_bessel_solution() {
    // Taylor coefficients about y = 1 of the combination of
    // y^(-1/2) e^(1/y) K_2(1/y) and y^(-1/2) e^(1/y) I_2(1/y) with v(1) = 0,
    // v_t(1) = 1, from 50-digit arithmetic.
    let expected = [
        1.0,
        2.0,
        4.2916666666666666667,
        8.2083333333333333333,
        14.646354166666666667,
        24.846527777777777778,
        40.539084201388888889,
        64.107102554563492063,
        98.795216921313519621,
        148.97588107208305776,
    ];
    let a = forward_recurrence(&build_recurrence(Problem::Vacuum), c(1.0, 0.0), 10).unwrap();
    for (n, e) in expected.iter().enumerate() {
        let got = a.get(n + 1);
        assert!((got.re - e).abs() <= 1e-12 * e.abs().max(1.0) && got.im == 0.0, "a_{}: {got}", n + 1);
    }
}

#[test]
fn forward_recurrence_growth() {
    // ln|a_n| - Re sqrt(8 s n) + (3/4) ln n tends to a constant
    let s = c(1.0, 0.0);
    let a = forward_recurrence(&build_recurrence(Problem::Vacuum), s, 16000).unwrap();
    let g = |n: usize| a.ln_abs(n) - (s * 8.0 * n as f64).sqrt().re + 0.75 * (n as f64).ln();
    // successive differences shrink like n^(-1/2), the first correction
    let d: Vec<f64> = [1000, 2000, 4000, 8000, 16000].windows(2).map(|w| g(w[1]) - g(w[0])).collect();
    for w in d.windows(2) {
        assert!((w[1] / w[0] - 0.5f64.sqrt()).abs() < 0.02, "{d:?}");
    }
    assert_eq!(a.get(1), c(1.0, 0.0));
}

#[test]
fn subdominant_characteristic_roots() {
    // the n -> infinity limit of the recurrence is sum_j p2_j z^(-j) = 0
    let sys = build_recurrence(Problem::HalfKink);
    let p = |z: Complex64| -> Complex64 {
        (0..7).map(|j| z.powi(-(j as i32)) * sys.base_coefficients(j)[0].to_f64()).sum()
    };
    for z in [c(1.0, 0.0), c(0.5, 0.5), c(0.5, -0.5)] {
        assert!(p(z).norm() < 1e-12);
        // double roots
        let h = 1e-4;
        assert!(p(z + h).norm() < 1e-5 * 100.0);
        assert!((z.norm() - 1.0).abs() < 1e-15 || (z.norm() - 0.5f64.sqrt()).abs() < 1e-15);
    }
}

#[test]
fn reduction_keeps_three_term_systems() {
    let sys = build_recurrence(Problem::Vacuum);
    let s = c(-1.0, 0.3);
    let tt = reduce_to_three_term(&sys, s, 20).unwrap();
    for n in 2..=20 {
        let co = sys.coeff(n, s);
        assert_eq!(tt.at(n), (co[0], co[1], co[2]));
    }
    // half-kink equations 2 and 3 only involve a_1..a_3 and are only rescaled
    let sys = build_recurrence(Problem::HalfKink);
    let tt = reduce_to_three_term(&sys, s, 20).unwrap();
    for n in [2, 3] {
        let co = sys.coeff(n, s);
        let (a, b, g) = tt.at(n);
        assert!((b - co[1] / co[0]).norm() < 1e-15 && (a - 1.0).norm() < 1e-15);
        if n == 3 {
            assert!((g - co[2] / co[0]).norm() < 1e-15);
        }
    }
}

#[test]
fn minimal_ratio_matches_backward_recurrence() {
    let sys = build_recurrence(Problem::HalfKink);
    let s = c(-0.5, 0.7);
    let tt = reduce_to_three_term(&sys, s, 10_001).unwrap();
    let (a2, b2, _) = tt.at(2);
    let r2_cf = (cf_at_depth(&tt, s, 4000) * a2 - b2) / a2;
    // Miller's backward recurrence from n = 10^4
    let (mut hi, mut lo) = (c(0.0, 0.0), c(1.0, 0.0));
    for n in (3..=10_001).rev() {
        let (a, b, g) = tt.at(n);
        let next = -(a * hi + b * lo) / g;
        hi = lo;
        lo = next;
        let m = hi.norm().max(lo.norm());
        hi /= m;
        lo /= m;
    }
    let r2 = hi / lo;
    assert!((r2 - r2_cf).norm() < 1e-8 * r2.norm(), "{r2} vs {r2_cf}");
}

#[test]
fn cf_vanishes_at_reported_frequencies() {
    let hk = build_recurrence(Problem::HalfKink);
    let vac = build_recurrence(Problem::Vacuum);
    // |cf| / |cf'| is the distance to the root, independent of how cf is scaled
    for (sys, s) in [(&vac, c(VACUUM_S.0, VACUUM_S.1)), (&hk, c(HALFKINK_S.0, HALFKINK_S.1))] {
        let v = cf_value(sys, s).unwrap();
        let h = 1e-6;
        let d = (cf_value(sys, s + h).unwrap() - cf_value(sys, s - h).unwrap()) / (2.0 * h);
        assert!(v.norm() / d.norm() <= 1e-6, "{}", v.norm() / d.norm());
    }
    let s = c(-0.7, 1.3);
    for sys in [&hk, &vac] {
        let (a, b) = (cf_value(sys, s).unwrap(), cf_value(sys, s.conj()).unwrap());
        assert!((a.conj() - b).norm() <= 1e-13 * a.norm().max(1.0));
    }
}

#[test]
fn find_frequencies() {
    let hk = build_recurrence(Problem::HalfKink);
    let r = find_qnm(&hk, c(-0.3, 0.5)).unwrap();
    assert!((r.s.re - HALFKINK_S.0).abs() < 1e-4 && (r.s.im - HALFKINK_S.1).abs() < 1e-4, "{}", r.s);
    // collocation of the eigenvalue problem with 120 Chebyshev points
    assert!((r.s - c(-0.36432165, 0.47685782)).norm() < 1e-6, "{}", r.s);
    let rc = find_qnm(&hk, c(-0.3, -0.5)).unwrap();
    assert!((rc.s - r.s.conj()).norm() < 1e-10);
    let vac = build_recurrence(Problem::Vacuum);
    let v = find_qnm(&vac, c(-1.3, 0.4)).unwrap();
    assert!((v.s.re - VACUUM_S.0).abs() < 1e-5 && (v.s.im - VACUUM_S.1).abs() < 1e-5, "{}", v.s);
    assert!(find_qnm(&vac, c(0.3, 0.4)).is_err());
}

#[test]
fn bessel_values() {
    let k2 = |z| bessel_k(2, z).unwrap();
    assert!((k2(c(1.0, 0.0)) - c(1.6248388986351774828, 0.0)).norm() < 1e-14);
    // 50-digit reference values
    let table = [
        (
            c(3.0, 0.5),
            c(0.047840397067006333831, -0.036933982189400984904),
            c(0.032883023598122875257, -0.022405736196462753602),
        ),
        (
            c(-1.3, 0.43),
            c(-0.027396795677580585257, -0.045591382616948750431),
            c(-1.4150602254722200699, -2.5442558578581813349),
        ),
        (
            c(0.5, 2.0),
            c(-0.74590432745540989733, 0.20154138324859734473),
            c(-0.53736312546798977928, -0.18334815008505182016),
        ),
        (
            c(6.0, -1.0),
            c(0.00071847993673739774933, 0.0015067438630054196685),
            c(0.00061487356025756405466, 0.0011826348048341450918),
        ),
        (
            c(-0.2, -2.5),
            c(-0.64214588089691369098, -0.84892755608175733712),
            c(-0.92942471856185745329, -0.3167467615865137746),
        ),
    ];
    for (z, e2, e1) in table {
        let (g2, g1) = (k2(z), bessel_k(1, z).unwrap());
        assert!((g2 - e2).norm() < 1e-13 * e2.norm().max(1.0), "K2({z}) = {g2}");
        assert!((g1 - e1).norm() < 1e-13 * e1.norm().max(1.0), "K1({z}) = {g1}");
    }
    assert!(matches!(bessel_k(2, c(-2.0, 1e-3)), Err(crate::Error::BranchAmbiguity { .. })));
}

#[test]
fn bessel_zero() {
    let r = bessel_k2_zero(c(-1.3, 0.43)).unwrap();
    assert!((r.s - c(-1.2813737976560964761, 0.42948496520871969998)).norm() < 1e-12, "{}", r.s);
    assert!((r.s.re - VACUUM_S.0).abs() < 1e-6 && (r.s.im - VACUUM_S.1).abs() < 1e-6);
    let rc = bessel_k2_zero(c(-1.3, -0.43)).unwrap();
    assert!((rc.s - r.s.conj()).norm() < 1e-13);
    let cf = find_qnm(&build_recurrence(Problem::Vacuum), c(-1.3, 0.4)).unwrap();
    assert!((cf.s - r.s).norm() < 1e-6);
}

#[test]
fn asymptotic_branches_are_consistent() {
    for problem in [Problem::Vacuum, Problem::HalfKink] {
        let sys = build_recurrence(problem);
        for s in [c(1.0, 0.0), c(-0.4, 0.5)] {
            let b = asymptotic_coefficients(&sys, s, true, 3).unwrap();
            assert_eq!(b.coefficients.len(), 4);
            asymptotic_coefficients(&sys, s, false, 3).unwrap();
        }
    }
    // a_n / a_n^+ settles quickly once c_1..c_3 are included
    let sys = build_recurrence(Problem::Vacuum);
    let est = dominant_branch_estimate(&sys, c(1.0, 0.0), 2000, 1e-5).unwrap();
    assert!(est.change < 1e-5 * est.c_plus.norm());
}

#[test]
fn dominant_branch_vanishes_at_root() {
    for (problem, guess) in [(Problem::HalfKink, c(-0.3, 0.5)), (Problem::Vacuum, c(-1.3, 0.4))] {
        let sys = build_recurrence(problem);
        let root = find_qnm(&sys, guess).unwrap();
        let on = dominant_branch_estimate(&sys, root.s, 1000, 1e-3).unwrap();
        let off = dominant_branch_estimate(&sys, root.s + c(0.1, 0.0), 1000, 1e-3).unwrap();
        assert!(on.c_plus.norm() <= 1e-3 * off.c_plus.norm(), "{} vs {}", on.c_plus, off.c_plus);
        let dom = find_qnm_dominant(&sys, guess, 1000).unwrap();
        assert!((dom.s - root.s).norm() < 1e-4, "{} vs {}", dom.s, root.s);
    }
}

#[test]
fn ringdown_recovers_synthetic_frequency() {
    let s = c(-0.36, 0.48);
    let data: Vec<(f64, f64)> =
        (0..400).map(|i| 5.0 + i as f64 * 0.1).map(|u| (u, 2.0 * (s.re * u).exp() * (s.im * u + 0.3).cos())).collect();
    let fit = fit_ringdown(&data, (5.0, 45.0), &RingdownOptions::default()).unwrap();
    assert!((fit.s - s).norm() < 1e-6, "{}", fit.s);
    let bare = RingdownOptions { tail_terms: 0, ..Default::default() };
    let fit = fit_ringdown(&data, (5.0, 45.0), &bare).unwrap();
    assert!((fit.s - s).norm() < 1e-6, "{}", fit.s);
    assert!(fit.tail_amplitudes.is_empty());
    let with_tail: Vec<(f64, f64)> = data.iter().map(|&(u, y)| (u, y + 3.0 * u.powi(-5) - 40.0 * u.powi(-6))).collect();
    let fit = fit_ringdown(&with_tail, (5.0, 45.0), &RingdownOptions::default()).unwrap();
    assert!((fit.s - s).norm() < 1e-6, "{}", fit.s);
    assert!((fit.tail_amplitudes[0] - 3.0).abs() < 1e-4 * 3.0, "{:?}", fit.tail_amplitudes);
    assert!((fit.tail_amplitudes[1] + 40.0).abs() < 1e-4 * 40.0, "{:?}", fit.tail_amplitudes);
    let tail: Vec<(f64, f64)> = (0..200).map(|i| 200.0 + i as f64).map(|u| (u, u.powi(-5))).collect();
    match fit_ringdown(&tail, (200.0, 400.0), &RingdownOptions::default()) {
        Ok(f) => assert!(f.amplitude < 1e-6 * 200f64.powi(-5), "{}", f.amplitude),
        Err(e) => assert!(matches!(e, crate::Error::IllConditioned { .. })),
    }
}

#[test]
fn scan_finds_a_single_root() {
    for (problem, expected) in [(Problem::HalfKink, HALFKINK_S), (Problem::Vacuum, VACUUM_S)] {
        let sys = build_recurrence(problem);
        let scan = scan_cf(&sys, (-3.0, 0.0), (0.0, 3.0), 0.05, 2000).unwrap();
        assert_eq!(scan.roots.len(), 1, "{problem}: {:?}", scan.roots);
        assert!((scan.roots[0].s - c(expected.0, expected.1)).norm() < 1e-4);
    }
}
