use proptest::prelude::*;

use super::*;
use crate::exactlin::{q, qi, qvec, Matrix, Tensor};
use crate::young::{young_dim, YoungTableau};

fn var(n: usize, i: usize) -> Poly {
    Poly::var(n, i)
}

fn flat(dim: usize) -> Screen {
    Screen::flat(dim)
}

#[test]
fn homogenize_examples() {
    // dim 2, h = q₂, G_H = v₁ → q₂v₁ − q₁v₂
    let g = ScreenIntegral::from_poly(2, var(4, 2)).unwrap();
    let h = homogenize_integral(&g, &flat(2)).unwrap();
    let want = &(&var(4, 1) * &var(4, 2)) - &(&var(4, 0) * &var(4, 3));
    assert_eq!(h.exact().unwrap().to_poly().unwrap(), want);

    // constants are unchanged
    let c = ScreenIntegral::from_poly(3, Poly::constant(6, q(7, 3))).unwrap();
    let hc = homogenize_integral(&c, &flat(3)).unwrap();
    assert_eq!(hc.exact().unwrap().to_poly().unwrap(), Poly::constant(6, q(7, 3)));

    // dim 3, h = q₃, ½(v₁² + v₂²)
    let n = 6;
    let kin = (&var(n, 3).pow(2) + &var(n, 4).pow(2)).scale(&q(1, 2));
    let g = ScreenIntegral::from_poly(3, kin).unwrap();
    let h = homogenize_integral(&g, &flat(3)).unwrap();
    let a = &(&var(n, 2) * &var(n, 3)) - &(&var(n, 5) * &var(n, 0));
    let b = &(&var(n, 2) * &var(n, 4)) - &(&var(n, 5) * &var(n, 1));
    let want = (&a.pow(2) + &b.pow(2)).scale(&q(1, 2));
    let got = h.exact().unwrap().to_poly().unwrap();
    assert_eq!(got, want);
    check_projective_invariance(h.exact().unwrap(), 3).unwrap();
}

#[test]
fn homogenized_matches_numeric_route() {
    let g = ScreenIntegral::kepler_energy_flat(3, qi(2));
    let h = homogenize_integral(&g, &flat(3)).unwrap();
    let ex = h.exact().unwrap();
    for (qq, vv) in [([0.3, -0.4, 1.7], [0.2, 0.9, -0.3]), ([1.1, 0.5, 0.6], [-0.7, 0.1, 0.4])] {
        let mut z = qq.to_vec();
        z.extend_from_slice(&vv);
        let a = ex.eval_f64(&z);
        let b = h.eval_f64(&qq, &vv).unwrap();
        assert!((a - b).abs() < 1e-12 * a.abs().max(1.0), "{a} {b}");
    }
    assert!(h.eval_f64(&[0.1, 0.2, -1.0], &[0.0; 3]).is_err());
}

#[test]
fn quadric_homogenization_is_invariant() {
    // a function on the unit sphere: v₀² + x₁·v₂
    let n = 6;
    let gh = &var(n, 3).pow(2) + &(&var(n, 1) * &var(n, 5));
    let g = ScreenIntegral::from_poly(3, gh).unwrap();
    let s = Screen::unit_sphere(3);
    let h = homogenize_integral(&g, &s).unwrap();
    let ex = h.exact().unwrap();
    check_projective_invariance(ex, 3).unwrap();
    let qq = [0.3, 0.4, 1.2];
    let vv = [0.5, -0.2, 0.7];
    let mut z = qq.to_vec();
    z.extend_from_slice(&vv);
    let a = ex.eval_f64(&z);
    let b = h.eval_f64(&qq, &vv).unwrap();
    assert!((a - b).abs() < 1e-12, "{a} {b}");
}

#[test]
fn custom_screens_evaluate_numerically() {
    let s = Screen::custom(std::sync::Arc::new(crate::screens::QuarticScreen { dim: 2 }));
    let g = ScreenIntegral::angular_momentum(2, 0, 1);
    let h = homogenize_integral(&g, &s).unwrap();
    assert!(h.exact().is_none());
    let qq = [0.6, 0.9];
    let vv = [0.3, -0.5];
    let base = h.eval_f64(&qq, &vv).unwrap();
    let lam = 1.7;
    let scaled = h.eval_f64(&[lam * qq[0], lam * qq[1]], &[vv[0] / lam, vv[1] / lam]).unwrap();
    let sheared = h.eval_f64(&qq, &[vv[0] + 0.4 * qq[0], vv[1] + 0.4 * qq[1]]).unwrap();
    assert!((base - scaled).abs() < 1e-12 && (base - sheared).abs() < 1e-12);
}

#[test]
fn gdot_examples() {
    let g = &(&var(4, 1) * &var(4, 2)) - &(&var(4, 0) * &var(4, 3));
    assert!(gdot(&RadExpr::from_poly(g), 2, &[]).unwrap().is_zero());

    let qv = &(&var(4, 0) * &var(4, 2)) + &(&var(4, 1) * &var(4, 3));
    assert!(matches!(gdot(&RadExpr::from_poly(qv), 2, &[]), Err(IntegralError::NotShearInvariant)));

    let f = ForceField::kepler_flat(3, qi(1));
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let l = homogenize_integral(&ScreenIntegral::angular_momentum(3, i, j), &flat(3)).unwrap();
        let gd = gdot_field(l.exact().unwrap(), 3, &f).unwrap();
        // only the impulsion component about the center's axis is conserved
        if (i, j) == (0, 1) {
            assert!(gd.is_zero(), "{i}{j}");
        }
    }
    let e = homogenize_integral(&ScreenIntegral::kepler_energy_flat(3, qi(1)), &flat(3)).unwrap();
    assert!(gdot_field(e.exact().unwrap(), 3, &f).unwrap().is_zero());
    // with the wrong strength the energy is not conserved
    let f2 = ForceField::kepler_flat(3, qi(2));
    assert!(!gdot_field(e.exact().unwrap(), 3, &f2).unwrap().is_zero());
}

#[test]
fn gdot_rejects_non_homogeneous_fields() {
    let g = &(&var(4, 1) * &var(4, 2)) - &(&var(4, 0) * &var(4, 3));
    let f = vec![RadExpr::from_poly(var(2, 0)), RadExpr::zero(2)];
    assert!(matches!(gdot(&RadExpr::from_poly(g), 2, &f), Err(IntegralError::ForceNotHomogeneous)));
}

#[test]
fn gdot_ignores_radial_terms() {
    let f = ForceField::kepler_flat(3, qi(1)).exact().unwrap();
    let l = Poly::linear(3, 0, &qvec(&[0, 0, 1]));
    // γ = 5·L⁻² has degree −2, so γq has degree −1... scale by L⁻⁴ instead
    let radial: Vec<RadExpr> = (0..3)
        .map(|i| f[i].add(&RadExpr::power(Poly::var(3, i).scale(&qi(5)), l.clone(), qi(-4))))
        .collect();
    check_force_homogeneity(&radial).unwrap();
    let e = homogenize_integral(&ScreenIntegral::kepler_energy_flat(3, qi(1)), &flat(3)).unwrap();
    let a = gdot(e.exact().unwrap(), 3, &f).unwrap();
    let b = gdot(e.exact().unwrap(), 3, &radial).unwrap();
    assert!(a.sub(&b).is_zero());
}

#[test]
fn parity_split() {
    let f = ForceField::kepler_flat(3, qi(1));
    let fx = f.exact().unwrap();
    let e = homogenize_integral(&ScreenIntegral::kepler_energy_flat(3, qi(1)), &flat(3)).unwrap();
    let l = homogenize_integral(&ScreenIntegral::angular_momentum(3, 0, 1), &flat(3)).unwrap();
    let e = e.exact().unwrap().clone();
    let l = l.exact().unwrap().clone();

    let d = decompose_by_parity(&e, 3, &fx).unwrap();
    assert_eq!(d.components.iter().map(|c| c.0).collect::<Vec<_>>(), vec![0, 2]);
    assert!(d.leading_parity.sub(&e).is_zero());
    assert!(d.other_parity.is_zero());

    let d = decompose_by_parity(&e.add(&l), 3, &fx).unwrap();
    assert!(d.leading_parity.sub(&e).is_zero());
    assert!(d.other_parity.sub(&l).is_zero());

    let d = decompose_by_parity(&l, 3, &fx).unwrap();
    assert_eq!(d.components.len(), 1);
    assert!(d.leading_parity.sub(&l).is_zero());

    let not_integral = homogenize_integral(&ScreenIntegral::angular_momentum(3, 0, 2), &flat(3)).unwrap();
    assert!(matches!(
        decompose_by_parity(not_integral.exact().unwrap(), 3, &fx),
        Err(IntegralError::NotFirstIntegral)
    ));
}

#[test]
fn polar_examples() {
    // q₂v₁ − q₁v₂ → e2*⊗e1* − e1*⊗e2*
    let r = &(&var(4, 1) * &var(4, 2)) - &(&var(4, 0) * &var(4, 3));
    let t = polar_form(&r, 2).unwrap();
    let want = Tensor::from_entries(2, 2, [(vec![1, 0], qi(1)), (vec![0, 1], qi(-1))]).unwrap();
    assert_eq!(t, want);
    let bh = BiHomogeneousPoly::from_poly(&r, 2).unwrap();
    assert_eq!(bh.to_poly(), r);

    let bad = &var(4, 0) * &var(4, 2);
    assert_eq!(polar_form(&bad, 2).unwrap(), Tensor::basis(2, &[0, 0]));
    assert!(matches!(BiHomogeneousPoly::from_poly(&bad, 2), Err(IntegralError::NotFreeMotionIntegral)));

    let sq = r.pow(2);
    let bh = BiHomogeneousPoly::from_poly(&sq, 2).unwrap();
    let p = bh.polar();
    assert_eq!(p, &p.swap_slots(0, 1));
    assert_eq!(p, &p.swap_slots(2, 3));
    assert_eq!(bh.to_poly(), sq);
    assert_eq!(bh.eval(&qvec(&[1, 2]), &qvec(&[3, 5])).unwrap(), qi(1));

    assert!(matches!(polar_form(&(&var(4, 0) * &var(4, 1)), 2), Err(IntegralError::NotBiHomogeneous(_))));
    assert!(matches!(polar_form(&Poly::zero(4), 2), Err(IntegralError::NotBiHomogeneous(_))));
}

#[test]
fn antisymmetric_examples() {
    let r = &(&var(4, 1) * &var(4, 2)) - &(&var(4, 0) * &var(4, 3));
    let ra = BiHomogeneousPoly::from_poly(&r, 2).unwrap().to_antisymmetric().unwrap();
    assert_eq!(ra.tensor(), &polar_form(&r, 2).unwrap());

    // metric b on a 3-space: R = b(q,q)b(v,v) − b(q,v)²
    let b = Matrix::from_rows(&[qvec(&[2, 1, 0]), qvec(&[1, 3, -1]), qvec(&[0, -1, 1])], 3).unwrap();
    let n = 6;
    let bqq = Poly::bilinear(n, &b, 0, 0);
    let bvv = Poly::bilinear(n, &b, 3, 3);
    let bqv = Poly::bilinear(n, &b, 0, 3);
    let r = &(&bqq * &bvv) - &bqv.pow(2);
    let ra = BiHomogeneousPoly::from_poly(&r, 3).unwrap().to_antisymmetric().unwrap();
    let want = Tensor::from_entries(
        3,
        4,
        crate::exactlin::all_words(3, 4).map(|w| {
            let v = &(&b[(w[0], w[2])] * &b[(w[1], w[3])]) - &(&b[(w[0], w[3])] * &b[(w[1], w[2])]);
            (w, v)
        }),
    )
    .unwrap();
    assert_eq!(ra.tensor(), &want);
    assert_eq!(ra.diagonal().unwrap(), r);

    // R_B(q∧v) = R(q,v)
    let (qq, vv) = (qvec(&[1, -2, 3]), qvec(&[4, 0, -1]));
    let pi = wedge_matrix(&qq, &vv);
    let mut z = qq.clone();
    z.extend_from_slice(&vv);
    assert_eq!(ra.eval_bivectors(&[pi.clone(), pi]).unwrap(), r.eval(&z));
}

#[test]
fn dimension_formula() {
    assert_eq!(dim_pbb(2, 2), 6u32.into());
    assert_eq!(dim_pbb(3, 2), 20u32.into());
    for n in 1..8u64 {
        assert_eq!(dim_pbb(n, 1), (n * (n + 1) / 2).into());
    }
    for d in 2..=4usize {
        for b in 1..=3u32 {
            let want: usize = dim_pbb(d as u64 - 1, b as u64).try_into().unwrap();
            assert_eq!(pbb_rank_polynomial(d, b), want, "poly d={d} b={b}");
            if d <= 3 || b <= 2 {
                assert_eq!(pbb_rank_tensor(d, b).unwrap(), want, "tensor d={d} b={b}");
            }
            let y = YoungTableau::vertical(&vec![2; b as usize]).unwrap();
            assert_eq!(young_dim(&y, d).unwrap(), want, "young d={d} b={b}");
        }
    }
}

#[test]
fn basis_elements_are_free_integrals() {
    for b in 1..=2 {
        for r in pbb_basis(3, b) {
            assert!(gdot(&RadExpr::from_poly(r.clone()), 3, &[]).unwrap().is_zero());
            assert!(shear_identities_hold(&r, 3));
            assert!(exchange_identities_hold(&r, 3).unwrap());
        }
    }
    let r = pbb_basis(3, 1).remove(0);
    let (a, b) = exchange_value(&r, &qvec(&[1, 2, 3]), &qvec(&[0, 5, -1]));
    assert_eq!(a, -b);
}

#[test]
fn reconstruction() {
    let one = SampleBox::new(qvec(&[0]), qvec(&[1])).unwrap();
    let p = reconstruct_polynomial(|x, y| Some(&x[0] * &y[0]), 1, 1, &one, &one).unwrap();
    assert_eq!(p, &var(2, 0) * &var(2, 1));
    let p = reconstruct_polynomial(|_, _| Some(q(3, 4)), 0, 0, &one, &one).unwrap();
    assert_eq!(p, Poly::constant(2, q(3, 4)));
    assert!(matches!(
        reconstruct_polynomial(|x, _| Some(Rational::one() / (&Rational::one() + &x[0])), 2, 0, &one, &one),
        Err(IntegralError::NotPolynomial)
    ));

    // homogenized free-motion integral sampled on a product of boxes inside the cone
    let n = 6;
    let mom = &(&var(n, 0) * &var(n, 4)) - &(&var(n, 1) * &var(n, 3));
    let kin = &(&var(n, 3).pow(2) + &var(n, 4).pow(2)) + &mom;
    let g = ScreenIntegral::from_poly(3, kin).unwrap();
    let h = homogenize_integral(&g, &flat(3)).unwrap();
    let ex = h.exact().unwrap().clone();
    let want = ex.to_poly().unwrap();
    let qbox = SampleBox::new(qvec(&[-1, -1, 1]), qvec(&[1, 1, 2])).unwrap();
    let vbox = SampleBox::new(qvec(&[-1, -1, -1]), qvec(&[1, 1, 1])).unwrap();
    let got = reconstruct_polynomial(
        |x, y| {
            let mut z = x.to_vec();
            z.extend_from_slice(y);
            ex.eval(&z)
        },
        2,
        2,
        &qbox,
        &vbox,
    )
    .unwrap();
    assert_eq!(got, want);
}

#[test]
fn polynomial_json_round_trip() {
    let r = &(&var(4, 1) * &var(4, 2)).scale(&q(3, 2)) - &(&var(4, 0) * &var(4, 3));
    let js = PolynomialJson::from_poly(&r, PolynomialJson::phase_vars(2));
    let text = serde_json::to_string(&js).unwrap();
    assert!(text.contains("\"3/2\""));
    let back: PolynomialJson = serde_json::from_str(&text).unwrap();
    assert_eq!(back.to_poly().unwrap(), r);
    let dup = r#"{"vars":["a"],"terms":[{"exps":[1],"coef":"1"},{"exps":[1],"coef":"2"}]}"#;
    let bad: PolynomialJson = serde_json::from_str(dup).unwrap();
    assert!(bad.to_poly().is_err());
}

fn random_pbb(dim: usize, b: u32, coeffs: &[i64]) -> Poly {
    let basis = pbb_basis(dim, b);
    let mut r = Poly::zero(2 * dim);
    for (p, c) in basis.iter().zip(coeffs.iter().cycle()) {
        r = &r + &p.scale(&qi(*c));
    }
    r
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pbb_elements_satisfy_exchange(b in 1u32..=2, dim in 2usize..=3, cs in prop::collection::vec(-5i64..=5, 1..12)) {
        prop_assume!(cs.iter().any(|&c| c != 0));
        let r = random_pbb(dim, b, &cs);
        prop_assume!(!r.is_zero());
        prop_assert!(exchange_identities_hold(&r, dim).unwrap());
        prop_assert!(shear_identities_hold(&r, dim));
        let bh = BiHomogeneousPoly::from_poly(&r, dim).unwrap();
        let ra = bh.to_antisymmetric().unwrap();
        prop_assert_eq!(ra.diagonal().unwrap(), r);
    }

    #[test]
    fn flat_homogenization_restricts_to_identity(
        cs in prop::collection::vec(-4i64..=4, 6),
        x in prop::collection::vec(-2.0f64..2.0, 2),
        v in prop::collection::vec(-2.0f64..2.0, 2),
    ) {
        let n = 6;
        let terms = [
            Poly::one(n), var(n, 0), &var(n, 1) * &var(n, 3), var(n, 4).pow(2),
            &(&var(n, 0) * &var(n, 0)) * &var(n, 3), &var(n, 3) * &var(n, 4),
        ];
        let gh = terms.iter().zip(&cs).fold(Poly::zero(n), |acc, (t, c)| &acc + &t.scale(&qi(*c)));
        let g = ScreenIntegral::from_poly(3, gh).unwrap();
        let h = homogenize_integral(&g, &flat(3)).unwrap();
        check_projective_invariance(h.exact().unwrap(), 3).unwrap();
        // on the screen with tangent velocity, G = G_H
        let qq = [x[0], x[1], 1.0];
        let vv = [v[0], v[1], 0.0];
        let a = h.eval_f64(&qq, &vv).unwrap();
        let b = g.eval_f64(&qq, &vv);
        prop_assert!((a - b).abs() < 1e-9 * b.abs().max(1.0));
    }
}
