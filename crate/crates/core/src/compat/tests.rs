use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::curvclass::{make_r_from_g, CurvatureForm};
use crate::exactlin::{q, qi, qvec, Matrix, Tensor};
use crate::polyintegrals::{vvar, ScreenIntegral};
use crate::screens::{QuarticScreen, Screen};
use crate::young::{im_as_basis, YoungTableau};

fn poly(n: usize, terms: &[(&[u32], i64)]) -> RadExpr {
    RadExpr::from_poly(Poly::from_terms(n, terms.iter().map(|(e, c)| (e.to_vec(), qi(*c)))))
}

#[test]
fn oscillator_energy_is_conserved() {
    let sys = ChartSystem::oscillator(2);
    // L = y0 y1 − x0 x1
    let l = poly(4, &[(&[0, 0, 1, 1], 1), (&[1, 1, 0, 0], -1)]);
    let e = energy_integral(&l, &sys).unwrap();
    assert_eq!(e, poly(4, &[(&[0, 0, 1, 1], 1), (&[1, 1, 0, 0], 1)]).normalize());
    let drift = conservation_drift(&sys, &e, &[0.3, -1.1], &[0.7, 0.4], 100.0, 1e-12).unwrap();
    assert!(drift < 1e-8, "drift {drift}");
}

#[test]
fn closed_one_form_lagrangian_has_zero_energy() {
    // η = d(x0² x1) = 2x0x1 dx0 + x0² dx1
    let sys = ChartSystem::oscillator(2);
    let l = poly(4, &[(&[1, 1, 1, 0], 2), (&[2, 0, 0, 1], 1)]);
    assert!(energy_integral(&l, &sys).unwrap().is_zero());
}

#[test]
fn free_kinetic_energy() {
    let sys = ChartSystem::free(2);
    let l = RadExpr::from_poly(Poly::from_terms(4, [(vec![0, 0, 2, 0], q(1, 2)), (vec![0, 0, 0, 2], q(1, 2))]));
    assert_eq!(energy_integral(&l, &sys).unwrap(), l.normalize());
}

#[test]
fn non_pre_lagrangian_is_rejected() {
    let sys = ChartSystem::oscillator(2);
    let l = poly(4, &[(&[0, 0, 2, 0], 1), (&[1, 1, 0, 0], -1)]);
    assert!(matches!(energy_integral(&l, &sys), Err(CompatError::NotPreLagrangian(0))));
}

#[test]
fn quadratic_integral_parts() {
    let sys = ChartSystem::oscillator(2);
    let g = QuadraticIntegral::oscillator(2, 0, 1);
    assert!(g.is_first_integral(&sys));
    assert_eq!(g.energy(&sys).unwrap(), g.g());
    assert_eq!(g.momenta()[0], poly(4, &[(&[0, 0, 0, 1], 1)]));
    let kep = QuadraticIntegral::kepler_energy(2, qi(3));
    assert!(kep.is_first_integral(&ChartSystem::kepler(2, qi(3))));
    assert!(!kep.is_first_integral(&ChartSystem::free(2)));
    let bad = QuadraticIntegral::new(2, poly(4, &[(&[0, 0, 1, 0], 1)]), RadExpr::zero(4));
    assert!(matches!(bad, Err(CompatError::NotQuadratic)));
}

#[test]
fn presymplectic_examples() {
    let free = ChartSystem::free(2);
    let t = poly(4, &[(&[0, 0, 2, 0], 1), (&[0, 0, 0, 2], 1)]);
    let res = presymplectic_check(&t, &free).unwrap();
    assert!(res.preserved());
    assert!(res.potential.unwrap().is_zero());

    let mu = q(5, 2);
    let kep = ChartSystem::kepler(2, mu.clone());
    let t = QuadraticIntegral::kepler_energy(2, mu.clone());
    let res = presymplectic_check(t.t(), &kep).unwrap();
    assert!(res.preserved());
    let r2 = Poly::from_terms(4, [(vec![2, 0, 0, 0], qi(1)), (vec![0, 2, 0, 0], qi(1))]);
    let expected = RadExpr::power(Poly::constant(4, mu), r2, q(-1, 2));
    assert!(res.potential.unwrap().sub(&expected).is_zero());

    // x₀y₀ = d(x₀²/2)/dt is a null Lagrangian: σ = 0
    let x0y0 = poly(4, &[(&[1, 0, 1, 0], 1)]);
    let res = presymplectic_check(&x0y0, &free).unwrap();
    assert!(res.sigma.iter().all(RadExpr::is_zero));
    assert!(res.preserved());

    // x₁y₀: σ = y₁dx₀ − y₀dx₁
    let x1y0 = poly(4, &[(&[0, 1, 1, 0], 1)]);
    let res = presymplectic_check(&x1y0, &free).unwrap();
    assert!(!res.velocity_independent);
    assert!(!res.preserved());
    assert!(res.potential.is_none());
}

#[test]
fn oscillator_pre_lagrangians_are_presymplectic() {
    for n in 1..=3 {
        let sys = ChartSystem::oscillator(n);
        for i in 0..n {
            for j in i..n {
                let t = QuadraticIntegral::oscillator(n, i, j);
                let res = presymplectic_check(t.t(), &sys).unwrap();
                assert!(res.preserved());
                // U = −x_i x_j recovers G + U = L
                assert!(t.t().add(res.potential.as_ref().unwrap()).sub(&t.lagrangian()).is_zero());
            }
        }
    }
}

fn euclidean(d: usize) -> CurvatureForm {
    CurvatureForm::from_metric(&Matrix::identity(d)).unwrap()
}

#[test]
fn compatibility_examples() {
    let r = euclidean(3);
    let sphere = compatibility_check(&r, &Screen::unit_sphere(3), None).unwrap();
    assert!(sphere.compatible() && sphere.formulations_agree());
    assert_eq!(sphere.method, CheckMethod::Exact);
    assert!(!compatibility_check(&r, &Screen::hyperboloid(3), None).unwrap().compatible());
    assert!(!compatibility_check(&r, &Screen::flat(3), None).unwrap().compatible());

    let quartic = Screen::custom(Arc::new(QuarticScreen { dim: 3 }));
    let rep = compatibility_check(&r, &quartic, None).unwrap();
    assert_eq!(rep.method, CheckMethod::Sampled);
    assert!(!rep.compatible());

    let phi = qvec(&[0, 0, 1]);
    let kb = vec![qvec(&[1, 0, 0]), qvec(&[0, 1, 0])];
    let g = Matrix::from_rows(&[qvec(&[1, 2]), qvec(&[2, -3])], 2).unwrap();
    let flat = CurvatureForm::from_flat(&phi, &kb, &g).unwrap();
    assert!(compatibility_check(&flat, &Screen::linear(phi).unwrap(), None).unwrap().compatible());
    assert!(!compatibility_check(&flat, &Screen::unit_sphere(3), None).unwrap().compatible());
}

#[test]
fn sphere_samples_on_and_off_screen() {
    let r = euclidean(3);
    let h = Screen::unit_sphere(3);
    let pts = sample_screen_points(&h, 8, 1).unwrap();
    assert!(compatibility_check(&r, &h, Some(&pts)).unwrap().compatible());
    let off = vec![vec![2.0, 0.0, 0.0]];
    assert!(matches!(compatibility_check(&r, &h, Some(&off)), Err(CompatError::OffScreen(_))));
}

#[test]
fn quotient_examples() {
    let r = euclidean(3);
    let qf = quotient_form(&r).unwrap();
    assert!(qf.kernel_basis.is_empty());
    assert_eq!(qf.projection, Matrix::identity(3));
    assert_eq!(qf.form, r);

    let deg = CurvatureForm::from_metric(&Matrix::diag(&qvec(&[1, 1, 0]))).unwrap();
    let qf = quotient_form(&deg).unwrap();
    assert_eq!(qf.kernel_basis, vec![qvec(&[0, 0, 1])]);
    assert_eq!(qf.form.dim(), 2);
    assert_eq!(qf.form, euclidean(2));

    let zero = CurvatureForm::new(Tensor::zero(3, 4)).unwrap();
    assert!(matches!(quotient_form(&zero), Err(CompatError::ZeroForm)));
}

fn random_sym(rng: &mut ChaCha8Rng, d: usize) -> Matrix {
    let m = Matrix::from_fn(d, d, |_, _| qi(rng.gen_range(-3..=3)));
    m.add(&m.transpose()).unwrap()
}

#[test]
fn cylindric_pullback_preserves_compatibility() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let forms = [
        CurvatureForm::from_metric(&Matrix::diag(&qvec(&[1, -1, 2, 0]))).unwrap(),
        CurvatureForm::from_flat(
            &qvec(&[0, 1, 0, 0]),
            &[qvec(&[1, 0, 0, 0]), qvec(&[0, 0, 1, 0]), qvec(&[0, 0, 0, 1])],
            &Matrix::diag(&qvec(&[1, 1, 0])),
        )
        .unwrap(),
    ];
    for r in &forms {
        let qf = quotient_form(r).unwrap();
        let m = qf.form.dim();
        let mut screens = vec![Screen::unit_sphere(m), Screen::flat(m)];
        for _ in 0..4 {
            screens.push(Screen::linear((0..m).map(|_| qi(rng.gen_range(-2..=2))).collect()).unwrap_or(Screen::flat(m)));
            screens.push(Screen::quadratic(random_sym(&mut rng, m)).unwrap_or(Screen::unit_sphere(m)));
        }
        if let Ok(report) = find_compatible_screen(&qf.form) {
            if let Some(s) = report.verdict.screen().unwrap() {
                screens.push(s);
            }
        }
        let mut seen_true = false;
        for h0 in &screens {
            let low = compatibility_check(&qf.form, h0, None).unwrap().compatible();
            let high = compatibility_check(r, &qf.pullback(h0).unwrap(), None).unwrap().compatible();
            assert_eq!(low, high, "{}", h0.describe());
            seen_true |= low;
        }
        assert!(seen_true);
    }
}

fn spherical_kinetic(d: usize) -> CurvatureForm {
    // R(q,v) = |q∧v|² = |q|²|v|² − (q·v)²
    euclidean(d)
}

#[test]
fn screen_finder_examples() {
    let rep = find_compatible_screen(&spherical_kinetic(3)).unwrap();
    assert_eq!(rep.verdict, ScreenVerdict::QuadricScreen { g: Matrix::identity(3).to_rows(), lambda: qi(1) });
    assert!(rep.log.iter().all(|c| c.passed && c.method == CheckMethod::Exact));

    // ½((q₃v₁−v₃q₁)² + (q₃v₂−v₃q₂)²) with q₃ the last coordinate
    let phi = qvec(&[0, 0, 1]);
    let kb = vec![qvec(&[1, 0, 0]), qvec(&[0, 1, 0])];
    let g = Matrix::identity(2).scale(&q(1, 2));
    let flat = CurvatureForm::from_flat(&phi, &kb, &g).unwrap();
    match find_compatible_screen(&flat).unwrap().verdict {
        ScreenVerdict::HyperplaneScreen { phi: p, g: gg, lambda, .. } => {
            assert_eq!(p, phi);
            assert_eq!(gg, g.to_rows());
            assert_eq!(lambda, qi(1));
        }
        other => panic!("{other:?}"),
    }

    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let basis = im_as_basis(&YoungTableau::vertical(&[2, 2]).unwrap(), 4).unwrap();
    let mut t = Tensor::zero(4, 4);
    for b in &basis {
        t.axpy(&qi(rng.gen_range(-3..=3)), b).unwrap();
    }
    let generic = CurvatureForm::new(t).unwrap();
    match find_compatible_screen(&generic).unwrap().verdict {
        ScreenVerdict::Incompatible { reason, .. } => assert_eq!(reason, IncompatibleReason::NonDecomposableImage),
        other => panic!("{other:?}"),
    }

    let d2 = find_compatible_screen(&euclidean(2)).unwrap();
    assert_eq!(d2.verdict, ScreenVerdict::Dim2);

    let deg = CurvatureForm::from_metric(&Matrix::diag(&qvec(&[1, 1, 0]))).unwrap();
    assert!(matches!(find_compatible_screen(&deg), Err(CompatError::NontrivialKernel(_))));
}

#[test]
fn hyperboloid_metric_gives_quadric() {
    let b = Matrix::diag(&qvec(&[-1, -1, 1]));
    let r = CurvatureForm::from_metric(&b).unwrap().tensor().scale(&qi(-2));
    let r = CurvatureForm::new(r).unwrap();
    let rep = find_compatible_screen(&r).unwrap();
    let ScreenVerdict::QuadricScreen { g, lambda } = &rep.verdict else { panic!("{:?}", rep.verdict) };
    let gm = Matrix::from_rows(g, 3).unwrap();
    assert!(gm == b || gm == b.scale(&qi(-1)));
    assert_eq!(*lambda, qi(-2));
    let s = rep.verdict.screen().unwrap().unwrap();
    let pts = sample_screen_points(&s, 8, 5).unwrap();
    assert!(compatibility_check(&r, &s, Some(&pts)).unwrap().compatible());
}

fn kinetic(dim: usize, coeffs: &[(usize, usize, Rational)]) -> ScreenIntegral {
    let n = 2 * dim;
    let p = coeffs.iter().fold(Poly::zero(n), |acc, (i, j, c)| {
        &acc + &(&Poly::var(n, vvar(dim, *i)) * &Poly::var(n, vvar(dim, *j))).scale(c)
    });
    ScreenIntegral::from_poly(dim, p).unwrap()
}

#[test]
fn hamiltonian_test_sphere_and_flat() {
    let sphere = Screen::unit_sphere(3);
    let t = kinetic(3, &[(0, 0, q(1, 2)), (1, 1, q(1, 2)), (2, 2, q(1, 2))]);
    let rep = hamiltonian_test(&t, &sphere).unwrap();
    assert_eq!(rep.verdict, ScreenVerdict::QuadricScreen { g: Matrix::identity(3).to_rows(), lambda: q(1, 2) });

    let flat = Screen::flat(3);
    let t = kinetic(3, &[(0, 0, q(1, 2)), (1, 1, q(1, 2))]);
    let rep = hamiltonian_test(&t, &flat).unwrap();
    match &rep.verdict {
        ScreenVerdict::HyperplaneScreen { phi, lambda, .. } => {
            assert_eq!(*phi, qvec(&[0, 0, 1]));
            assert_eq!(*lambda, qi(1));
        }
        other => panic!("{other:?}"),
    }
    assert!(rep.log.iter().all(|c| c.passed));
}

#[test]
fn hamiltonian_test_oscillator() {
    let t = QuadraticIntegral::oscillator(2, 0, 1).leading_term_flat().unwrap();
    let rep = hamiltonian_test(&t, &Screen::flat(3)).unwrap();
    match &rep.verdict {
        ScreenVerdict::HyperplaneScreen { phi, kernel_basis, g, lambda } => {
            assert_eq!(*phi, qvec(&[0, 0, 1]));
            assert_eq!(*kernel_basis, vec![qvec(&[1, 0, 0]), qvec(&[0, 1, 0])]);
            assert_eq!(*g, vec![vec![qi(0), q(1, 2)], vec![q(1, 2), qi(0)]]);
            assert_eq!(*lambda, qi(1));
        }
        other => panic!("{other:?}"),
    }
    let back = ScreenReport::from_json(&rep.to_json()).unwrap();
    assert_eq!(back, rep);

    // ambient dimension 4: x₃ does not occur, so the form has a kernel
    let t = QuadraticIntegral::oscillator(3, 0, 1).leading_term_flat().unwrap();
    let rep = hamiltonian_test(&t, &Screen::flat(4)).unwrap();
    match &rep.verdict {
        ScreenVerdict::CylindricReduction { kernel_basis, inner, .. } => {
            assert_eq!(*kernel_basis, vec![qvec(&[0, 0, 1, 0])]);
            assert_eq!(inner.tag(), "hyperplane_screen");
        }
        other => panic!("{other:?}"),
    }
    assert!(rep.log.iter().any(|c| c.method == CheckMethod::Sampled && c.passed));
    let s = rep.verdict.screen().unwrap().unwrap();
    assert_eq!(s.describe(), Screen::flat(4).describe());
}

#[test]
fn hamiltonian_test_leading_term_failures() {
    let flat = Screen::flat(3);
    let lz = ScreenIntegral::angular_momentum(3, 0, 1);
    let rep = hamiltonian_test(&lz, &flat).unwrap();
    assert!(matches!(rep.verdict, ScreenVerdict::Incompatible { reason: IncompatibleReason::LeadingTerm, .. }));
    // x₀ v₀ v₁ is not conserved by free motion
    let n = 6;
    let p = &(&Poly::var(n, 0) * &Poly::var(n, 3)) * &Poly::var(n, 4);
    let rep = hamiltonian_test(&ScreenIntegral::from_poly(3, p).unwrap(), &flat).unwrap();
    assert!(matches!(rep.verdict, ScreenVerdict::Incompatible { reason: IncompatibleReason::LeadingTerm, .. }));
}

#[test]
fn parallel_transport_preserves_r_on_compatible_screens() {
    let r = euclidean(3);
    let h = Screen::unit_sphere(3);
    let drift = parallel_transport_drift(&r, &h, &[0.6, 0.0, 0.8], &[0.0, 1.0, 0.0], &[0.8, 0.3, -0.6], 5.0, 1e-11).unwrap();
    assert!(drift < 1e-9, "{drift}");

    let phi = qvec(&[0, 0, 1]);
    let kb = vec![qvec(&[1, 0, 0]), qvec(&[0, 1, 0])];
    let flat = CurvatureForm::from_flat(&phi, &kb, &Matrix::identity(2)).unwrap();
    let drift =
        parallel_transport_drift(&flat, &Screen::flat(3), &[0.2, 0.1, 1.0], &[1.0, -0.5, 0.0], &[0.3, 0.7, 0.0], 5.0, 1e-11)
            .unwrap();
    assert!(drift < 1e-9, "{drift}");

    // an incompatible pair does drift
    let drift =
        parallel_transport_drift(&r, &Screen::flat(3), &[0.2, 0.1, 1.0], &[1.0, -0.5, 0.0], &[0.3, 0.7, 0.0], 2.0, 1e-11)
            .unwrap();
    assert!(drift > 1e-3, "{drift}");
}

#[test]
fn kernel_vectors_are_tangent_to_cylindric_screens() {
    let r = CurvatureForm::from_metric(&Matrix::diag(&qvec(&[1, 1, 0]))).unwrap();
    let qf = quotient_form(&r).unwrap();
    let h = qf.pullback(&Screen::unit_sphere(2)).unwrap();
    let pts = sample_screen_points(&h, DEFAULT_SAMPLES, 9).unwrap();
    assert!(kernel_orthogonality_defect(&qf.kernel_basis, &h, &pts) < 1e-12);
    assert!(compatibility_check(&r, &h, None).unwrap().compatible());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn formulations_agree_on_linear_and_quadric_screens(
        gs in prop::collection::vec(-3i64..=3, 6),
        hs in prop::collection::vec(-3i64..=3, 6),
        phis in prop::collection::vec(-2i64..=2, 3),
        quadric in any::<bool>(),
        metric in any::<bool>(),
    ) {
        let sym = |c: &[i64]| Matrix::from_rows(
            &[vec![qi(c[0]), qi(c[1]), qi(c[2])], vec![qi(c[1]), qi(c[3]), qi(c[4])], vec![qi(c[2]), qi(c[4]), qi(c[5])]],
            3,
        ).unwrap();
        let g = sym(&gs);
        prop_assume!(!g.is_zero());
        let r = if metric {
            CurvatureForm::from_metric(&g).unwrap()
        } else {
            match make_r_from_g(&g, &qi(1)) { Ok(r) => r, Err(_) => return Ok(()) }
        };
        prop_assume!(!r.tensor().is_zero());
        let h = if quadric {
            let m = sym(&hs);
            prop_assume!(!m.is_zero());
            Screen::quadratic(m).unwrap()
        } else {
            prop_assume!(phis.iter().any(|&x| x != 0));
            Screen::linear(phis.iter().map(|&x| qi(x)).collect()).unwrap()
        };
        // errors only if the three formulations disagree
        let rep = compatibility_check(&r, &h, None).unwrap();
        prop_assert!(rep.formulations_agree());
    }
}
