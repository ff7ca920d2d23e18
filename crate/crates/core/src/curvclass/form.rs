use super::{
    normalize_vec, phi_kernel, preserves_decomposables, rows_of, try_wedge_square, BivectorMap, ClassificationReport,
    CurvError,
};
use crate::exactlin::{all_words, combinations, unit, Matrix, Multivector, Rational, Tensor, TensorJson};
use crate::polyintegrals::AntisymmetricForm;
use crate::young::{check_im_as, YoungTableau};

/// A quadrilinear form with the symmetries of a curvature tensor:
/// antisymmetric in each pair, algebraic Bianchi identity, pair exchange.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurvatureForm {
    tensor: Tensor,
}

impl CurvatureForm {
    pub fn new(tensor: Tensor) -> Result<Self, CurvError> {
        if tensor.order() != 4 {
            return Err(CurvError::NotCurvatureForm(format!("order {} is not 4", tensor.order())));
        }
        let y = YoungTableau::vertical(&[2, 2])?;
        if !check_im_as(&y, &tensor)? {
            return Err(CurvError::NotCurvatureForm("pair antisymmetry or Bianchi identity fails".into()));
        }
        if tensor.swap_slots(0, 2).swap_slots(1, 3) != tensor {
            return Err(CurvError::NotCurvatureForm("pair exchange fails".into()));
        }
        Ok(CurvatureForm { tensor })
    }

    pub fn from_antisymmetric(form: &AntisymmetricForm) -> Result<Self, CurvError> {
        Self::new(form.tensor().clone())
    }

    pub fn dim(&self) -> usize {
        self.tensor.dim()
    }

    pub fn tensor(&self) -> &Tensor {
        &self.tensor
    }

    /// `b(u,w)b(v,x) − b(u,x)b(v,w)` for a symmetric `b`.
    pub fn from_metric(b: &Matrix) -> Result<Self, CurvError> {
        if !b.is_symmetric() {
            return Err(CurvError::NotSymmetric);
        }
        let d = b.rows();
        let t = Tensor::from_entries(
            d,
            4,
            all_words(d, 4).map(|w| {
                let v = &(&b[(w[0], w[2])] * &b[(w[1], w[3])]) - &(&b[(w[0], w[3])] * &b[(w[1], w[2])]);
                (w, v)
            }),
        )?;
        Self::new(t)
    }

    /// `g̃(φ⌟(u∧v), φ⌟(w∧x))`, with `g` given on a basis of `ker φ`.
    pub fn from_flat(phi: &[Rational], kernel_basis: &[Vec<Rational>], g: &Matrix) -> Result<Self, CurvError> {
        let d = phi.len();
        let k = Matrix::from_cols(kernel_basis, d)?;
        let coords = contraction_coords(phi, &k)?;
        let t = Tensor::from_entries(
            d,
            4,
            all_words(d, 4).map(|w| {
                let a = &coords[w[0] * d + w[1]];
                let b = &coords[w[2] * d + w[3]];
                (w, bilinear(g, a, b))
            }),
        )?;
        Self::new(t)
    }

    /// The associated map `Λ²V → Λ²V*`, `u∧v ↦ R_A(u,v;·,·)`.
    pub fn bivector_map(&self) -> BivectorMap {
        let d = self.dim();
        let basis = combinations(d, 2);
        let m = Matrix::from_fn(basis.len(), basis.len(), |k, j| {
            self.tensor.get(&[basis[j][0], basis[j][1], basis[k][0], basis[k][1]])
        });
        BivectorMap::new(d, d, m).expect("square bivector matrix")
    }

    pub fn to_json(&self) -> String {
        let mut js = self.tensor.to_json_value();
        js.symmetry = Some("riemann".into());
        serde_json::to_string_pretty(&js).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, CurvError> {
        let js = TensorJson::parse(text)?;
        if js.symmetry.as_deref() != Some("riemann") {
            return Err(CurvError::NotCurvatureForm("expected \"symmetry\": \"riemann\"".into()));
        }
        Self::new(Tensor::from_json_value(&js, text)?)
    }
}

fn bilinear(g: &Matrix, a: &[Rational], b: &[Rational]) -> Rational {
    let mut acc = Rational::zero();
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            acc += &(ai * bj) * &g[(i, j)];
        }
    }
    acc
}

/// Coordinates of `φ⌟(e_i∧e_j) = φ_i e_j − φ_j e_i` in the columns of `k`,
/// indexed by `i·d + j`.
fn contraction_coords(phi: &[Rational], k: &Matrix) -> Result<Vec<Vec<Rational>>, CurvError> {
    let d = phi.len();
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let w: Vec<Rational> = (0..d)
                .map(|t| {
                    let a = if t == j { phi[i].clone() } else { Rational::zero() };
                    let b = if t == i { phi[j].clone() } else { Rational::zero() };
                    &a - &b
                })
                .collect();
            let c = k
                .solve(&w)?
                .ok_or_else(|| CurvError::Precondition("kernel basis does not span ker φ".into()))?;
            out.push(c);
        }
    }
    Ok(out)
}

/// Basis of `{u : R_A(u,·;·,·) = 0}`.
pub fn kernel_of_form(r: &CurvatureForm) -> Vec<Vec<Rational>> {
    let d = r.dim();
    let words: Vec<Vec<usize>> = all_words(d, 3).collect();
    let m = Matrix::from_fn(words.len(), d, |row, u| {
        let w = &words[row];
        r.tensor.get(&[u, w[0], w[1], w[2]])
    });
    m.kernel()
}

/// `R(π) = (G^{∧(d−2)}(π⌟vol))⌟vol` for a symmetric `G: V* → V` and the
/// volume form `vol·e^0∧…∧e^{d−1}`.
pub fn make_r_from_g(g: &Matrix, vol: &Rational) -> Result<CurvatureForm, CurvError> {
    if !g.is_symmetric() {
        return Err(CurvError::NotSymmetric);
    }
    let d = g.rows();
    if d < 3 {
        return Err(CurvError::Precondition("dimension must be at least 3".into()));
    }
    if vol.is_zero() {
        return Err(CurvError::Precondition("volume form must be nonzero".into()));
    }
    let volume = Multivector::basis(d, &(0..d).collect::<Vec<_>>()).scale(vol);
    let gp = g.exterior_power(d - 2);
    let basis = combinations(d, 2);
    let mut t = Tensor::zero(d, 4);
    for pj in &basis {
        let star = volume.interior(&Multivector::basis(d, pj))?;
        let mapped = Multivector::from_dense(d, d - 2, &gp.mul_vec(&star.to_dense())?)?;
        let img = volume.interior(&mapped)?;
        for pk in &basis {
            let v = img.get(pk);
            if v.is_zero() {
                continue;
            }
            let (a, b, c, e) = (pj[0], pj[1], pk[0], pk[1]);
            t.add_entry(vec![a, b, c, e], &v);
            t.add_entry(vec![b, a, c, e], &-&v);
            t.add_entry(vec![a, b, e, c], &-&v);
            t.add_entry(vec![b, a, e, c], &v);
        }
    }
    CurvatureForm::new(t)
}

impl ClassificationReport {
    /// Re-checks the witness of a curvature-form case against `r`.
    pub fn verify_form(&self, r: &CurvatureForm) -> Result<bool, CurvError> {
        let d = r.dim();
        Ok(match self {
            ClassificationReport::MetricCase { b, epsilon, scale } => {
                let bm = Matrix::from_rows(b, d)?;
                let c = scale * &Rational::from_int(*epsilon as i64);
                bm.is_symmetric()
                    && !bm.det().is_zero()
                    && CurvatureForm::from_metric(&bm)?.tensor.scale(&c) == r.tensor
            }
            ClassificationReport::FlatCase { phi, kernel_basis, g } => {
                let gm = Matrix::from_rows(g, d - 1)?;
                kernel_basis.len() + 1 == d
                    && kernel_basis.iter().all(|k| crate::exactlin::dot(phi, k).is_zero())
                    && !gm.det().is_zero()
                    && CurvatureForm::from_flat(phi, kernel_basis, &gm)?.tensor == r.tensor
            }
            ClassificationReport::Dim2 => d == 2,
            _ => false,
        })
    }
}

/// Classifies a curvature form with `R(u∧v)∧R(u∧v) = 0` and trivial kernel:
/// either `R = εB^{∧2}` for a symmetric invertible `B`, or the flat type
/// built from a covector `φ` and a nondegenerate `g` on `ker φ`.
pub fn classify_9_2(r: &CurvatureForm) -> Result<ClassificationReport, CurvError> {
    let map = r.bivector_map();
    if !preserves_decomposables(&map) {
        return Err(CurvError::ImageNotDecomposable);
    }
    let ker = kernel_of_form(r);
    if !ker.is_empty() {
        return Err(CurvError::NontrivialKernel(ker));
    }
    let d = r.dim();
    if d == 2 {
        return Ok(ClassificationReport::Dim2);
    }
    let report = if map.matrix().inverse().is_some() {
        let (b, epsilon, scale) =
            try_wedge_square(&map)?.ok_or_else(|| CurvError::NoCase("invertible form is not a wedge square".into()))?;
        if !b.is_symmetric() {
            return Err(CurvError::NoCase("recovered B is not symmetric".into()));
        }
        ClassificationReport::MetricCase { b: rows_of(&b), epsilon, scale }
    } else {
        let phis = phi_kernel(&map)?;
        if phis.len() != 1 {
            return Err(CurvError::NoCase(format!("expected a single φ, found {}", phis.len())));
        }
        let phi = normalize_vec(&phis[0]);
        let m = phi.iter().position(|x| !x.is_zero()).expect("nonzero φ");
        let p = unit(d, m);
        let kernel_basis = Matrix::from_rows(std::slice::from_ref(&phi), d)?.kernel();
        let g = Matrix::from_fn(d - 1, d - 1, |a, b| {
            r.tensor.eval(&[&p, &kernel_basis[a], &p, &kernel_basis[b]]).expect("dims agree")
        });
        if g.det().is_zero() {
            return Err(CurvError::NoCase("g is degenerate on ker φ".into()));
        }
        ClassificationReport::FlatCase { phi, kernel_basis, g: rows_of(&g) }
    };
    if !report.verify_form(r)? {
        return Err(CurvError::NoCase(format!("{} witness does not reproduce the form", report.tag())));
    }
    Ok(report)
}
