use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::exactlin::{q, qi, qvec, Multivector, Tensor};

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Matrix {
    Matrix::from_fn(n, m, |_, _| qi(rng.gen_range(-4..=4)))
}

fn random_invertible(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    loop {
        let b = random_matrix(rng, n, n);
        if !b.det().is_zero() {
            return b;
        }
    }
}

fn scaled_to_first(m: &Matrix) -> Matrix {
    let t = first_entry(m).unwrap();
    m.scale(&t.recip().unwrap())
}

#[test]
fn decomposability_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 3..=5 {
        let b = random_matrix(&mut rng, n, n);
        assert!(preserves_decomposables(&BivectorMap::wedge_square(&b)));
    }
    // every map between 3-spaces passes: all bivectors are decomposable there
    for _ in 0..5 {
        let r = BivectorMap::new(3, 3, random_matrix(&mut rng, 3, 3)).unwrap();
        assert!(preserves_decomposables(&r));
        assert!(wedge_power_map(&r, 1).is_ok());
    }
    // e01 ↦ e01, e23 ↦ e01, e02 ↦ e23: R∧R = 2(π01+π23)π02·e0123 ≠ 0
    let e = |i, j| Multivector::basis(4, &[i, j]);
    let z = Multivector::zero(4, 2);
    // lexicographic pairs: 01 02 03 12 13 23
    let r = BivectorMap::from_images(4, &[e(0, 1), e(2, 3), z.clone(), z.clone(), z, e(0, 1)]).unwrap();
    assert!(!preserves_decomposables(&r));
    assert!(matches!(wedge_power_map(&r, 2), Err(CurvError::NotWellDefined(4))));
    assert!(matches!(classify_8_1(&r), Err(CurvError::NotDecomposablePreserving)));
}

#[test]
fn wedge_powers() {
    let id = BivectorMap::identity(5);
    assert_eq!(wedge_power_map(&id, 2).unwrap(), Matrix::identity(5));
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let b = random_matrix(&mut rng, 5, 5);
    let r = BivectorMap::wedge_square(&b);
    assert_eq!(wedge_power_map(&r, 2).unwrap(), b.exterior_power(4));
    assert!(wedge_power_map(&r, 3).is_err());
    // B of rank 3 on a 4-space: the top power vanishes
    let b = Matrix::diag(&qvec(&[1, 2, 3, 0]));
    assert!(wedge_power_map(&BivectorMap::wedge_square(&b), 2).unwrap().is_zero());
}

#[test]
fn generic_maps_fail_and_equivalence_holds() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 4..=5 {
        for _ in 0..4 {
            let r = BivectorMap::new(n, n, random_matrix(&mut rng, n * (n - 1) / 2, n * (n - 1) / 2)).unwrap();
            let pres = preserves_decomposables(&r);
            assert!(!pres);
            assert_eq!(pres, wedge_power_map(&r, 2).is_ok());
        }
    }
}

#[test]
fn inverse_of_wedge_square_preserves() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let b = random_invertible(&mut rng, 4);
    let r = BivectorMap::wedge_square(&b);
    let inv = r.inverse().unwrap();
    assert!(preserves_decomposables(&inv));
    assert_eq!(inv, BivectorMap::wedge_square(&b.inverse().unwrap()));
    let pi = Multivector::from_vector(&qvec(&[1, 2, 0, -1])).wedge(&Multivector::from_vector(&qvec(&[0, 3, 1, 1]))).unwrap();
    assert!(inv.apply(&r.apply(&pi).unwrap()).unwrap() == pi);
    assert!(r.apply(&pi).unwrap().is_decomposable().unwrap());
}

#[test]
fn maximal_subspaces_in_dim_four() {
    let v = qvec(&[1, 2, -1, 3]);
    let vw: Vec<Vec<Rational>> = (0..4)
        .map(|i| Multivector::from_vector(&v).wedge(&Multivector::from_vector(&unit(4, i))).unwrap().to_dense())
        .collect();
    let f = [qvec(&[1, 0, 2, 0]), qvec(&[0, 1, 1, 0]), qvec(&[1, 1, 0, 5])];
    let lf: Vec<Vec<Rational>> = [(0, 1), (0, 2), (1, 2)]
        .iter()
        .map(|&(i, j)| Multivector::from_vector(&f[i]).wedge(&Multivector::from_vector(&f[j])).unwrap().to_dense())
        .collect();
    assert_eq!(span_rank(&vw, 6), 3);
    assert_eq!(span_rank(&lf, 6), 3);
}

#[test]
fn classify_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for n in 4..=5 {
        for sign in [1i64, -1] {
            let b = random_invertible(&mut rng, n);
            let r = BivectorMap { src: n, dst: n, matrix: b.exterior_power(2).scale(&qi(sign)) };
            let rep = classify_8_1(&r).unwrap();
            let ClassificationReport::WedgeSquare { b: got, epsilon, .. } = &rep else {
                panic!("{rep:?}");
            };
            assert_eq!(*epsilon as i64, sign);
            assert_eq!(Matrix::from_rows(got, n).unwrap(), scaled_to_first(&b));
            assert!(rep.verify_map(&r).unwrap());
        }
    }
    let zero = BivectorMap::new(4, 4, Matrix::zeros(6, 6)).unwrap();
    assert!(matches!(classify_8_1(&zero).unwrap(), ClassificationReport::PhiDegenerate { .. }));

    for _ in 0..3 {
        let c = random_invertible(&mut rng, 4);
        let r = star_wedge_square(&c, &q(3, 2)).unwrap();
        assert!(preserves_decomposables(&r));
        let rep = classify_8_1(&r).unwrap();
        let ClassificationReport::StarWedgeSquare { c: got, .. } = &rep else {
            panic!("{rep:?}");
        };
        assert_eq!(Matrix::from_rows(got, 4).unwrap(), scaled_to_first(&c));
        assert!(rep.verify_map(&r).unwrap());
    }
}

#[test]
fn degenerate_cases() {
    // every image contains e0: R(π) = e0 ∧ (ξ⌟π)-type
    let e = |i, j| Multivector::basis(4, &[i, j]);
    let r = BivectorMap::from_images(4, &[e(0, 1), e(0, 2), e(0, 3), e(0, 1), Multivector::zero(4, 2), e(0, 3)]).unwrap();
    if preserves_decomposables(&r) {
        let rep = classify_8_1(&r).unwrap();
        assert_eq!(rep, ClassificationReport::PhiDegenerate { phi: unit(4, 0) });
        assert!(rep.verify_map(&r).unwrap());
    }
    // all images inside Λ² of a hyperplane {x_3 = 0}
    let b = Matrix::from_rows(&[qvec(&[1, 0, 0, 0]), qvec(&[0, 1, 0, 0]), qvec(&[0, 0, 1, 1]), qvec(&[0, 0, 0, 0])], 4).unwrap();
    let r = BivectorMap::wedge_square(&b);
    let rep = classify_8_1(&r).unwrap();
    assert_eq!(rep, ClassificationReport::ZetaDegenerate { zeta: unit(4, 3) });
    assert!(rep.verify_map(&r).unwrap());
}

#[test]
fn curvature_examples() {
    let id = Matrix::identity(3);
    let euclid = CurvatureForm::from_metric(&id).unwrap();
    assert!(kernel_of_form(&euclid).is_empty());
    assert_eq!(
        classify_9_2(&euclid).unwrap(),
        ClassificationReport::MetricCase { b: id.to_rows(), epsilon: 1, scale: qi(1) }
    );
    assert_eq!(make_r_from_g(&id, &qi(1)).unwrap(), euclid);

    let mink = Matrix::diag(&qvec(&[1, 1, -1]));
    let rep = classify_9_2(&CurvatureForm::from_metric(&mink).unwrap()).unwrap();
    assert_eq!(rep, ClassificationReport::MetricCase { b: mink.to_rows(), epsilon: 1, scale: qi(1) });

    // flat type: φ = e3*, g = diag(1,1)
    let phi = qvec(&[0, 0, 1]);
    let kb = vec![qvec(&[1, 0, 0]), qvec(&[0, 1, 0])];
    let flat = CurvatureForm::from_flat(&phi, &kb, &Matrix::identity(2)).unwrap();
    let rep = classify_9_2(&flat).unwrap();
    assert_eq!(rep, ClassificationReport::FlatCase { phi: phi.clone(), kernel_basis: kb.clone(), g: Matrix::identity(2).to_rows() });

    // degenerate metric: kernel e3
    let deg = CurvatureForm::from_metric(&Matrix::diag(&qvec(&[1, 1, 0]))).unwrap();
    assert_eq!(kernel_of_form(&deg), vec![qvec(&[0, 0, 1])]);
    assert!(matches!(classify_9_2(&deg), Err(CurvError::NontrivialKernel(_))));
    let zero = CurvatureForm::new(Tensor::zero(3, 4)).unwrap();
    assert_eq!(kernel_of_form(&zero).len(), 3);
}

#[test]
fn flat_and_metric_constructions() {
    let r = make_r_from_g(&Matrix::diag(&qvec(&[1, 1, 0])), &qi(1)).unwrap();
    assert!(kernel_of_form(&r).is_empty());
    match classify_9_2(&r).unwrap() {
        ClassificationReport::FlatCase { phi, .. } => assert_eq!(phi, qvec(&[0, 0, 1])),
        other => panic!("{other:?}"),
    }
    let g = Matrix::diag(&qvec(&[2, 3, 5, 7]));
    let r = make_r_from_g(&g, &qi(1)).unwrap();
    match classify_9_2(&r).unwrap() {
        ClassificationReport::MetricCase { b, .. } => {
            let b = Matrix::from_rows(&b, 4).unwrap();
            let bg = b.mul(&g).unwrap();
            assert_eq!(bg, Matrix::identity(4).scale(&bg[(0, 0)]));
        }
        other => panic!("{other:?}"),
    }
    assert!(matches!(make_r_from_g(&Matrix::from_rows(&[qvec(&[1, 1, 0]), qvec(&[0, 1, 0]), qvec(&[0, 0, 1])], 3).unwrap(), &qi(1)), Err(CurvError::NotSymmetric)));
}

#[test]
fn forms_are_checked() {
    let mut t = Tensor::zero(3, 4);
    t.add_entry(vec![0, 1, 0, 1], &qi(1));
    assert!(CurvatureForm::new(t).is_err());
    let r = CurvatureForm::from_metric(&Matrix::diag(&qvec(&[2, 1, 3]))).unwrap();
    let back = CurvatureForm::from_json(&r.to_json()).unwrap();
    assert_eq!(back, r);
    assert!(r.to_json().contains("\"riemann\""));
    assert!(CurvatureForm::from_json(&r.tensor().to_json()).is_err());
    let rep = classify_9_2(&r).unwrap();
    let js = serde_json::to_string(&rep).unwrap();
    assert!(js.contains("\"case\":\"metric_case\""));
    assert_eq!(serde_json::from_str::<ClassificationReport>(&js).unwrap(), rep);
}

#[test]
fn violation_of_the_quadratic_condition() {
    // a symmetric form on a 4-space whose bivector map is a generic symmetric matrix
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let y = crate::young::YoungTableau::vertical(&[2, 2]).unwrap();
    let basis = crate::young::im_as_basis(&y, 4).unwrap();
    let mut t = Tensor::zero(4, 4);
    for b in &basis {
        t.axpy(&qi(rng.gen_range(-3..=3)), b).unwrap();
    }
    let t = t.add(&t.swap_slots(0, 2).swap_slots(1, 3)).unwrap();
    let r = CurvatureForm::new(t).unwrap();
    assert!(matches!(classify_9_2(&r), Err(CurvError::ImageNotDecomposable)));
}

#[test]
fn bivector_map_json() {
    let map = BivectorMap::wedge_square(&Matrix::from_rows(&[qvec(&[1, 2, 0]), qvec(&[0, 1, 0]), qvec(&[3, 0, -1])], 3).unwrap());
    assert_eq!(BivectorMap::from_json(&map.to_json()).unwrap(), map);
    let bad = "{\n  \"src\": 3,\n  \"dst\": 3,\n  \"matrix\": [[\"1\"]],\n  \"extra\": 1\n}";
    assert!(BivectorMap::from_json(bad).is_err());
    let err = BivectorMap::from_json("{\n \"src\": 3,\n \"dst\": \"x\"\n}").unwrap_err().to_string();
    assert!(err.contains("line 3"), "{err}");
}
