use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::CompatError;
use crate::curvclass::{classify_9_2, kernel_of_form, ClassificationReport, CurvError, CurvatureForm};
use crate::exactlin::{all_words, dot, unit, LinError, Matrix, Rational, Tensor};
use crate::polyintegrals::{gdot, homogenize_integral, BiHomogeneousPoly, ScreenIntegral};
use crate::screens::ode::{dopri5, OdeOptions};
use crate::screens::{Screen, ScreenKind, ON_SCREEN_TOL};
use crate::symbolic::Poly;

/// Number of screen points used when a check has to be sampled.
pub const DEFAULT_SAMPLES: usize = 32;
/// Relative tolerance of sampled checks.
pub const SAMPLE_TOL: f64 = 1e-9;

const SEED: u64 = 0x5eed_c0de;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMethod {
    Exact,
    Sampled,
}

/// One line of a verification log.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check: String,
    pub method: CheckMethod,
    pub passed: bool,
}

impl CheckRecord {
    fn exact(check: &str, passed: bool) -> Self {
        CheckRecord { check: check.into(), method: CheckMethod::Exact, passed }
    }

    fn sampled(check: &str, passed: bool) -> Self {
        CheckRecord { check: check.into(), method: CheckMethod::Sampled, passed }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IncompatibleReason {
    /// `R_A(u∧v)∧R_A(u∧v) ≠ 0` for some `u, v`.
    NonDecomposableImage,
    /// The leading term is not a free-motion integral of bi-degree (2,2).
    LeadingTerm,
    /// The candidate quadratic form is degenerate.
    DegenerateG,
    /// No case of the classification could be verified.
    NoCase,
}

/// Verdict of the screen finder, with exact witnesses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ScreenVerdict {
    /// Screen inside `g(q) = 1`, `R_A(q,v;q,v) = λ g(v)` on it.
    QuadricScreen { g: Vec<Vec<Rational>>, lambda: Rational },
    /// Screen inside `⟨φ,q⟩ = 1`, `R_A(q,v;q,v) = λ g(v)` for `v ∈ ker φ`,
    /// with `g` written in `kernel_basis`.
    HyperplaneScreen { phi: Vec<Rational>, kernel_basis: Vec<Vec<Rational>>, g: Vec<Vec<Rational>>, lambda: Rational },
    /// Reduction through the kernel: `inner` lives on `V/ker R_A`, whose
    /// coordinates are the rows of `projection` applied to `q`.
    CylindricReduction { kernel_basis: Vec<Vec<Rational>>, projection: Vec<Vec<Rational>>, inner: Box<ScreenVerdict> },
    Dim2,
    Incompatible { reason: IncompatibleReason, detail: String },
}

impl ScreenVerdict {
    pub fn tag(&self) -> &'static str {
        match self {
            ScreenVerdict::QuadricScreen { .. } => "quadric_screen",
            ScreenVerdict::HyperplaneScreen { .. } => "hyperplane_screen",
            ScreenVerdict::CylindricReduction { .. } => "cylindric_reduction",
            ScreenVerdict::Dim2 => "dim2",
            ScreenVerdict::Incompatible { .. } => "incompatible",
        }
    }

    pub fn is_screen(&self) -> bool {
        match self {
            ScreenVerdict::QuadricScreen { .. } | ScreenVerdict::HyperplaneScreen { .. } => true,
            ScreenVerdict::CylindricReduction { inner, .. } => inner.is_screen(),
            _ => false,
        }
    }

    /// The screen in the ambient space, when the verdict names one.
    pub fn screen(&self) -> Result<Option<Screen>, CompatError> {
        Ok(match self {
            ScreenVerdict::QuadricScreen { g, .. } => Some(Screen::quadratic(Matrix::from_rows(g, g.len())?)?),
            ScreenVerdict::HyperplaneScreen { phi, .. } => Some(Screen::linear(phi.clone())?),
            ScreenVerdict::CylindricReduction { projection, inner, .. } => match inner.screen()? {
                Some(s) => {
                    let dim = projection.first().map_or(0, Vec::len);
                    Some(pullback_screen(&s, &Matrix::from_rows(projection, dim)?)?)
                }
                None => None,
            },
            _ => None,
        })
    }
}

/// Verdict plus the log of every identity that was checked on the way.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScreenReport {
    #[serde(flatten)]
    pub verdict: ScreenVerdict,
    pub log: Vec<CheckRecord>,
}

impl ScreenReport {
    fn incompatible(reason: IncompatibleReason, detail: impl Into<String>, log: Vec<CheckRecord>) -> Self {
        ScreenReport { verdict: ScreenVerdict::Incompatible { reason, detail: detail.into() }, log }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, CompatError> {
        serde_json::from_str(text)
            .map_err(|e| LinError::Parse(format!("line {}: {}", e.line(), e)).into())
    }
}

/// The trilinear form `R_A(q,·;·,·)` with polynomial coefficients in `q`:
/// `s[j·d² + k·d + l] = Σ_a T[a,j,k,l] q_a`.
struct Trilinear {
    d: usize,
    s: Vec<Poly>,
}

impl Trilinear {
    fn new(t: &Tensor, nvars: usize) -> Self {
        let d = t.dim();
        let mut s = vec![Poly::zero(nvars); d * d * d];
        for (w, c) in t.entries() {
            let k = w[1] * d * d + w[2] * d + w[3];
            s[k] = &s[k] + &Poly::var(nvars, w[0]).scale(c);
        }
        Trilinear { d, s }
    }

    fn get(&self, j: usize, k: usize, l: usize) -> &Poly {
        &self.s[j * self.d * self.d + k * self.d + l]
    }

    /// Evaluates on sparse polynomial vectors.
    fn eval(&self, x: &[(usize, Poly)], y: &[(usize, Poly)], z: &[(usize, Poly)]) -> Poly {
        let nvars = self.s[0].nvars();
        let mut acc = Poly::zero(nvars);
        for (j, a) in x {
            for (k, b) in y {
                let ab = a * b;
                for (l, c) in z {
                    let s = self.get(*j, *k, *l);
                    if s.is_zero() {
                        continue;
                    }
                    acc = &acc + &(&(&ab * c) * s);
                }
            }
        }
        acc
    }
}

/// `β_b e_a − β_a e_b`: these span `ker β` wherever `β ≠ 0`.
fn tangent_spanners(beta: &[Poly]) -> Vec<Vec<(usize, Poly)>> {
    let d = beta.len();
    let mut out = Vec::new();
    for a in 0..d {
        for b in a + 1..d {
            let mut t = Vec::new();
            if !beta[b].is_zero() {
                t.push((a, beta[b].clone()));
            }
            if !beta[a].is_zero() {
                t.push((b, -&beta[a]));
            }
            if !t.is_empty() {
                out.push(t);
            }
        }
    }
    out
}

/// The three equivalent formulations of compatibility, each decided
/// separately.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityReport {
    pub method: CheckMethod,
    /// `dh|_q ∧ R_A(q,v;·,·) = 0` for all `q ∈ H`, `v ∈ V`.
    pub dh_wedge: bool,
    /// `R_A(q,v;u,w) = 0` for tangent `u, v, w`.
    pub tangent_trilinear: bool,
    /// `R_A(q,w;u,w) = 0` for tangent `u, w`.
    pub tangent_quadratic: bool,
    /// Largest normalized residual, for sampled checks.
    pub max_residual: Option<f64>,
}

impl CompatibilityReport {
    pub fn compatible(&self) -> bool {
        self.dh_wedge
    }

    pub fn formulations_agree(&self) -> bool {
        self.dh_wedge == self.tangent_trilinear && self.dh_wedge == self.tangent_quadratic
    }
}

/// Decides whether `(R_A, H)` is a compatible pair: exactly for hyperplane
/// and quadric screens, at sample points for custom ones. Supplied samples
/// must lie on `H`; custom screens without samples use
/// [`DEFAULT_SAMPLES`] generated points.
pub fn compatibility_check(
    r: &CurvatureForm,
    h: &Screen,
    samples: Option<&[Vec<f64>]>,
) -> Result<CompatibilityReport, CompatError> {
    let d = r.dim();
    if h.dim() != d {
        return Err(LinError::DimMismatch { expected: d, got: h.dim() }.into());
    }
    if let Some(pts) = samples {
        for q in pts {
            if q.len() != d {
                return Err(LinError::DimMismatch { expected: d, got: q.len() }.into());
            }
            let res = (h.value(q)? - 1.0).abs();
            if res > ON_SCREEN_TOL {
                return Err(CompatError::OffScreen(res));
            }
        }
    }
    match h.differential_direction(2 * d) {
        Some(beta) => {
            let report = exact_compatibility(r, &beta);
            if !report.formulations_agree() {
                return Err(CompatError::Verification("the compatibility formulations disagree".into()));
            }
            Ok(report)
        }
        None => {
            let pts = match samples {
                Some(p) => p.to_vec(),
                None => sample_screen_points(h, DEFAULT_SAMPLES, SEED)?,
            };
            Ok(sampled_compatibility(r, h, &pts))
        }
    }
}

fn exact_compatibility(r: &CurvatureForm, beta: &[Poly]) -> CompatibilityReport {
    let d = r.dim();
    let nvars = 2 * d;
    let tri = Trilinear::new(r.tensor(), nvars);
    // ω_jk(q, v) = R_A(q, v; e_j, e_k)
    let omega = |j: usize, k: usize| {
        (0..d).fold(Poly::zero(nvars), |acc, b| &acc + &(tri.get(b, j, k) * &Poly::var(nvars, d + b)))
    };
    let mut om = vec![Poly::zero(nvars); d * d];
    for j in 0..d {
        for k in 0..d {
            om[j * d + k] = omega(j, k);
        }
    }
    let mut dh_wedge = true;
    'wedge: for i in 0..d {
        for j in i + 1..d {
            for k in j + 1..d {
                let c = &(&(&beta[i] * &om[j * d + k]) - &(&beta[j] * &om[i * d + k])) + &(&beta[k] * &om[i * d + j]);
                if !c.is_zero() {
                    dh_wedge = false;
                    break 'wedge;
                }
            }
        }
    }
    let ts = tangent_spanners(beta);
    let mut tangent_trilinear = true;
    'tri: for x in &ts {
        for (m, y) in ts.iter().enumerate() {
            for z in &ts[m + 1..] {
                if !tri.eval(x, y, z).is_zero() {
                    tangent_trilinear = false;
                    break 'tri;
                }
            }
        }
    }
    // polarized in w: R(q,w;u,w') + R(q,w';u,w) = 0
    let mut tangent_quadratic = true;
    'quad: for (m, w) in ts.iter().enumerate() {
        for w2 in &ts[m..] {
            for u in &ts {
                if !(&tri.eval(w, u, w2) + &tri.eval(w2, u, w)).is_zero() {
                    tangent_quadratic = false;
                    break 'quad;
                }
            }
        }
    }
    CompatibilityReport { method: CheckMethod::Exact, dh_wedge, tangent_trilinear, tangent_quadratic, max_residual: None }
}

fn tensor_f64(t: &Tensor) -> Vec<([usize; 4], f64)> {
    t.entries().map(|(w, c)| ([w[0], w[1], w[2], w[3]], c.to_f64())).collect()
}

fn form_f64(t: &[([usize; 4], f64)], a: &[f64], b: &[f64], c: &[f64], e: &[f64]) -> f64 {
    t.iter().map(|(w, x)| x * a[w[0]] * b[w[1]] * c[w[2]] * e[w[3]]).sum()
}

fn sampled_compatibility(r: &CurvatureForm, h: &Screen, pts: &[Vec<f64>]) -> CompatibilityReport {
    let d = r.dim();
    let t = tensor_f64(r.tensor());
    let scale = t.iter().map(|(_, x)| x.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0xa5a5);
    let mut worst = [0.0f64; 3];
    for q in pts {
        let beta = h.gradient(q);
        let bn = beta.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        let qn = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        let beta: Vec<f64> = beta.iter().map(|x| x / bn).collect();
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = scale * qn.max(1.0);
        let mut om = vec![0.0; d * d];
        for j in 0..d {
            for k in 0..d {
                om[j * d + k] = form_f64(&t, q, &v, &unit_f64(d, j), &unit_f64(d, k));
            }
        }
        for i in 0..d {
            for j in i + 1..d {
                for k in j + 1..d {
                    let c = beta[i] * om[j * d + k] - beta[j] * om[i * d + k] + beta[k] * om[i * d + j];
                    worst[0] = worst[0].max(c.abs() / norm);
                }
            }
        }
        let basis = tangent_basis_f64(&beta);
        for x in &basis {
            for y in &basis {
                for z in &basis {
                    worst[1] = worst[1].max(form_f64(&t, q, x, y, z).abs() / norm);
                    let sym = form_f64(&t, q, x, y, z) + form_f64(&t, q, z, y, x);
                    worst[2] = worst[2].max(sym.abs() / norm);
                }
            }
        }
    }
    CompatibilityReport {
        method: CheckMethod::Sampled,
        dh_wedge: worst[0] <= SAMPLE_TOL,
        tangent_trilinear: worst[1] <= SAMPLE_TOL,
        tangent_quadratic: worst[2] <= SAMPLE_TOL,
        max_residual: Some(worst.iter().cloned().fold(0.0, f64::max)),
    }
}

fn unit_f64(d: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[i] = 1.0;
    v
}

/// Orthonormal basis of `β^⊥` by Gram–Schmidt on the coordinate vectors.
fn tangent_basis_f64(beta: &[f64]) -> Vec<Vec<f64>> {
    let d = beta.len();
    let mut basis: Vec<Vec<f64>> = vec![beta.to_vec()];
    for i in 0..d {
        let mut v = unit_f64(d, i);
        for b in &basis {
            let c: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            for (x, y) in v.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            basis.push(v.iter().map(|x| x / n).collect());
        }
        if basis.len() == d {
            break;
        }
    }
    basis.remove(0);
    basis
}

/// Deterministic pseudo-random points of `H`: random points of the domain
/// rescaled to `h = 1`.
pub fn sample_screen_points(h: &Screen, count: usize, seed: u64) -> Result<Vec<Vec<f64>>, CompatError> {
    let d = h.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut tries = 0usize;
    while out.len() < count {
        tries += 1;
        if tries > 1000 * count.max(1) {
            return Err(CompatError::Unsupported("could not sample points of the screen".into()));
        }
        let q: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        if !h.in_domain(&q) {
            continue;
        }
        let hv = h.value(&q)?;
        if !(hv > 1e-3) {
            continue;
        }
        out.push(q.iter().map(|x| x / hv).collect());
    }
    Ok(out)
}

/// Largest `|⟨dh|_q, k⟩| / |k|` over the kernel vectors and the points.
pub fn kernel_orthogonality_defect(kernel: &[Vec<Rational>], h: &Screen, points: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for k in kernel {
        let kf: Vec<f64> = k.iter().map(Rational::to_f64).collect();
        let kn = kf.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        for q in points {
            worst = worst.max(h.dh(q, &kf).abs() / kn);
        }
    }
    worst
}

/// `R_A` induced on `V/ker R_A`, with the quotient identified with the span
/// of `complement` and coordinates given by `projection`.
#[derive(Clone, Debug)]
pub struct QuotientForm {
    pub kernel_basis: Vec<Vec<Rational>>,
    pub complement: Vec<Vec<Rational>>,
    /// `m × d` matrix with `projection · complement = I` and
    /// `projection · kernel = 0`.
    pub projection: Matrix,
    pub form: CurvatureForm,
}

impl QuotientForm {
    pub fn pullback(&self, h0: &Screen) -> Result<Screen, CompatError> {
        pullback_screen(h0, &self.projection)
    }
}

/// The cylindric screen `h(q) = h0(Pq)`.
fn pullback_screen(h0: &Screen, p: &Matrix) -> Result<Screen, CompatError> {
    if h0.dim() != p.rows() {
        return Err(LinError::DimMismatch { expected: p.rows(), got: h0.dim() }.into());
    }
    Ok(match h0.kind() {
        ScreenKind::Linear(phi) => Screen::linear(p.transpose().mul_vec(phi)?)?,
        ScreenKind::QuadraticRoot(g) => Screen::quadratic(p.transpose().mul(g)?.mul(p)?)?,
        ScreenKind::Custom(_) => return Err(CompatError::Unsupported("pull-back of a custom screen".into())),
    })
}

pub fn quotient_form(r: &CurvatureForm) -> Result<QuotientForm, CompatError> {
    let d = r.dim();
    if r.tensor().is_zero() {
        return Err(CompatError::ZeroForm);
    }
    let kernel_basis = kernel_of_form(r);
    let mut cols = kernel_basis.clone();
    let mut complement = Vec::new();
    for i in 0..d {
        let mut trial = cols.clone();
        trial.push(unit(d, i));
        if Matrix::from_cols(&trial, d)?.rank() == trial.len() {
            cols = trial;
            complement.push(unit(d, i));
        }
    }
    let m = complement.len();
    let mut all = complement.clone();
    all.extend(kernel_basis.iter().cloned());
    let inv = Matrix::from_cols(&all, d)?
        .inverse()
        .ok_or_else(|| CompatError::Verification("kernel and complement do not span".into()))?;
    let projection = Matrix::from_fn(m, d, |i, j| inv[(i, j)].clone());
    let t = Tensor::from_entries(
        m,
        4,
        all_words(m, 4).map(|w| {
            let v = r
                .tensor()
                .eval(&[&complement[w[0]], &complement[w[1]], &complement[w[2]], &complement[w[3]]])
                .expect("dimensions agree");
            (w, v)
        }),
    )?;
    let form = CurvatureForm::new(t)?;
    // descends: R_A(x,·;·,·) depends on x only through Px
    let cp = Matrix::from_cols(&complement, d)?.mul(&projection)?;
    for i in 0..d {
        let x = unit(d, i);
        let y = cp.mul_vec(&x)?;
        let diff: Vec<Rational> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        if !r.tensor().contract_slot(0, &diff)?.is_zero() {
            return Err(CompatError::Verification("form does not descend to the quotient".into()));
        }
    }
    if !kernel_of_form(&form).is_empty() {
        return Err(CompatError::Verification("induced form has a nontrivial kernel".into()));
    }
    Ok(QuotientForm { kernel_basis, complement, projection, form })
}

fn quad(g: &Matrix, a: &[Rational], b: &[Rational]) -> Rational {
    dot(a, &g.mul_vec(b).expect("dimensions agree"))
}

fn rad(r: &CurvatureForm, q: &[Rational], v: &[Rational]) -> Rational {
    r.tensor().eval(&[q, v, q, v]).expect("dimensions agree")
}

/// Small rational vectors tried in turn when a generic point is needed.
fn probes(d: usize) -> Vec<Vec<Rational>> {
    let mut out: Vec<Vec<Rational>> = (0..d).map(|i| unit(d, i)).collect();
    for i in 0..d {
        for j in i + 1..d {
            for s in [1, -1] {
                let mut v = unit(d, i);
                v[j] = Rational::from_int(s);
                out.push(v);
            }
        }
    }
    out.push((0..d).map(|i| Rational::from_int(i as i64 + 1)).collect());
    out.push((0..d).map(|i| Rational::from_int((i * i) as i64 + 2 * (i % 2) as i64 - 1)).collect());
    out
}

fn quadric_witness(r: &CurvatureForm, b: &Matrix) -> Option<(Matrix, Rational)> {
    let d = r.dim();
    for sign in [1i64, -1] {
        let g = b.scale(&Rational::from_int(sign));
        let Some(q) = probes(d).into_iter().find(|q| quad(&g, q, q).is_positive()) else { continue };
        let gq = quad(&g, &q, &q);
        for w in probes(d) {
            let c = quad(&g, &q, &w);
            let v: Vec<Rational> = w.iter().zip(&q).map(|(wi, qi)| &(&gq * wi) - &(&c * qi)).collect();
            let gv = quad(&g, &v, &v);
            if gv.is_zero() {
                continue;
            }
            return Some((g, &rad(r, &q, &v) / &(&gq * &gv)));
        }
    }
    None
}

fn hyperplane_witness(r: &CurvatureForm, phi: &[Rational], kb: &[Vec<Rational>], g: &Matrix) -> Option<Rational> {
    let d = r.dim();
    let m = phi.iter().position(|x| !x.is_zero())?;
    let mut q = vec![Rational::zero(); d];
    q[m] = phi[m].recip()?;
    for c in probes(kb.len()) {
        let gv = quad(g, &c, &c);
        if gv.is_zero() {
            continue;
        }
        let mut v = vec![Rational::zero(); d];
        for (ci, k) in c.iter().zip(kb) {
            for (vi, ki) in v.iter_mut().zip(k) {
                *vi += ci * ki;
            }
        }
        return Some(&rad(r, &q, &v) / &gv);
    }
    None
}

/// Symbolic check of `R_A(q,v;q,v) = λ(g(q)g(v) − g(q,v)²)`.
fn metric_identity(r: &CurvatureForm, g: &Matrix, lambda: &Rational) -> bool {
    let d = r.dim();
    let n = 2 * d;
    let tri = Trilinear::new(r.tensor(), n);
    let q: Vec<(usize, Poly)> = (0..d).map(|i| (i, Poly::var(n, i))).collect();
    let v: Vec<(usize, Poly)> = (0..d).map(|i| (i, Poly::var(n, d + i))).collect();
    let lhs = tri.eval(&v, &q, &v);
    let gq = Poly::bilinear(n, g, 0, 0);
    let gv = Poly::bilinear(n, g, d, d);
    let gqv = Poly::bilinear(n, g, 0, d);
    let rhs = (&(&gq * &gv) - &gqv.pow(2)).scale(lambda);
    (&lhs - &rhs).is_zero()
}

/// Searches for a screen compatible with a curvature form with trivial
/// kernel. Screens are re-verified exactly before being reported.
pub fn find_compatible_screen(r: &CurvatureForm) -> Result<ScreenReport, CompatError> {
    let ker = kernel_of_form(r);
    if !ker.is_empty() {
        return Err(CompatError::NontrivialKernel(ker));
    }
    let mut log = vec![CheckRecord::exact("kernel of R_A is trivial", true)];
    let class = match classify_9_2(r) {
        Ok(c) => c,
        Err(CurvError::ImageNotDecomposable) => {
            log.push(CheckRecord::exact("R_A(u∧v) is decomposable for all u, v", false));
            return Ok(ScreenReport::incompatible(
                IncompatibleReason::NonDecomposableImage,
                "R_A(u∧v)∧R_A(u∧v) does not vanish identically",
                log,
            ));
        }
        Err(CurvError::NoCase(msg)) => {
            let reason = if msg.contains("degenerate") { IncompatibleReason::DegenerateG } else { IncompatibleReason::NoCase };
            return Ok(ScreenReport::incompatible(reason, msg, log));
        }
        Err(e) => return Err(e.into()),
    };
    log.push(CheckRecord::exact("R_A(u∧v) is decomposable for all u, v", true));
    log.push(CheckRecord::exact(&format!("{} witness reproduces R_A", class.tag()), true));
    let verdict = match class {
        ClassificationReport::Dim2 => return Ok(ScreenReport { verdict: ScreenVerdict::Dim2, log }),
        ClassificationReport::MetricCase { b, epsilon, scale } => {
            let bm = Matrix::from_rows(&b, r.dim())?;
            let (g, lambda) =
                quadric_witness(r, &bm).ok_or_else(|| CompatError::Verification("no point with g(q) > 0".into()))?;
            let expected = &scale * &Rational::from_int(epsilon as i64);
            log.push(CheckRecord::exact("λ agrees with the classification scale", lambda == expected));
            log.push(CheckRecord::exact("R_A(q,v;q,v) = λ(g(q)g(v) − g(q,v)²)", metric_identity(r, &g, &lambda)));
            ScreenVerdict::QuadricScreen { g: g.to_rows(), lambda }
        }
        ClassificationReport::FlatCase { phi, kernel_basis, g } => {
            let gm = Matrix::from_rows(&g, r.dim() - 1)?;
            let lambda = hyperplane_witness(r, &phi, &kernel_basis, &gm)
                .ok_or_else(|| CompatError::Verification("g vanishes on every probe".into()))?;
            ScreenVerdict::HyperplaneScreen { phi, kernel_basis, g, lambda }
        }
        other => return Err(CompatError::Verification(format!("unexpected case {}", other.tag()))),
    };
    let screen = verdict.screen()?.expect("screen verdict");
    let check = compatibility_check(r, &screen, None)?;
    log.push(CheckRecord::exact("dh ∧ R_A(q,v;·,·) = 0 on the screen", check.dh_wedge));
    log.push(CheckRecord::exact("R_A(q,v;u,w) = 0 for tangent u, v, w", check.tangent_trilinear));
    log.push(CheckRecord::exact("R_A(q,w;u,w) = 0 for tangent u, w", check.tangent_quadratic));
    if !log.iter().all(|c| c.passed) {
        return Err(CompatError::Verification(format!("{} failed re-verification", verdict.tag())));
    }
    Ok(ScreenReport { verdict, log })
}

/// Decides whether the quadratic leading term `t`, given on the screen `h`,
/// is the kinetic part of a Hamiltonian for some screen: homogenize,
/// antisymmetrize, reduce by the kernel and run the screen finder.
pub fn hamiltonian_test(t: &ScreenIntegral, h: &Screen) -> Result<ScreenReport, CompatError> {
    let dim = t.dim;
    let hom = homogenize_integral(t, h)?;
    let expr = hom
        .exact()
        .ok_or_else(|| CompatError::Unsupported("homogenization on a custom screen is not exact".into()))?;
    let mut log = Vec::new();
    let leading = |log: Vec<CheckRecord>, detail: &str| {
        Ok(ScreenReport::incompatible(IncompatibleReason::LeadingTerm, detail, log))
    };
    let free = gdot(expr, dim, &[])?.is_zero();
    log.push(CheckRecord::exact("homogenized T is a free-motion integral", free));
    if !free {
        return leading(log, "T is not conserved by free motion");
    }
    let Some(rpoly) = expr.to_poly() else {
        log.push(CheckRecord::exact("homogenized T is polynomial", false));
        return leading(log, "homogenized T is not polynomial");
    };
    log.push(CheckRecord::exact("homogenized T is polynomial", true));
    let bihom = match BiHomogeneousPoly::from_poly(&rpoly, dim) {
        Ok(b) if b.degree() == 2 => b,
        Ok(b) => return leading(log, &format!("homogenized T has bi-degree ({0}, {0})", b.degree())),
        Err(e) => return leading(log, &e.to_string()),
    };
    log.push(CheckRecord::exact("R lies in P^{2,2}", true));
    let r = CurvatureForm::from_antisymmetric(&bihom.to_antisymmetric()?)?;
    log.push(CheckRecord::exact("R_A(q,v;q,v) = R(q,v)", true));
    let ker = kernel_of_form(&r);
    if ker.is_empty() {
        let mut inner = find_compatible_screen(&r)?;
        log.append(&mut inner.log);
        return Ok(ScreenReport { verdict: inner.verdict, log });
    }
    let quotient = quotient_form(&r)?;
    log.push(CheckRecord::exact("R_A descends to V/ker R_A with trivial kernel", true));
    let mut inner = find_compatible_screen(&quotient.form)?;
    log.append(&mut inner.log);
    let verdict = ScreenVerdict::CylindricReduction {
        kernel_basis: quotient.kernel_basis.clone(),
        projection: quotient.projection.to_rows(),
        inner: Box::new(inner.verdict),
    };
    if let Some(screen) = verdict.screen()? {
        let check = compatibility_check(&r, &screen, None)?;
        log.push(CheckRecord::exact("dh ∧ R_A(q,v;·,·) = 0 on the cylindric screen", check.dh_wedge));
        let pts = sample_screen_points(&screen, DEFAULT_SAMPLES, SEED)?;
        let defect = kernel_orthogonality_defect(&quotient.kernel_basis, &screen, &pts);
        log.push(CheckRecord::sampled("⟨dh|_q, k⟩ = 0 for k in ker R_A", defect <= SAMPLE_TOL));
        if !check.dh_wedge || defect > SAMPLE_TOL {
            return Err(CompatError::Verification("cylindric screen failed re-verification".into()));
        }
    }
    Ok(ScreenReport { verdict, log })
}

/// Largest relative change of `R_A(q,w;q,w)` when `w` is parallel
/// transported (`ẇ ∈ ℝq`, `w` tangent) along the free motion on `h` from
/// `(q0, v0)` over `[0, t1]`.
pub fn parallel_transport_drift(
    r: &CurvatureForm,
    h: &Screen,
    q0: &[f64],
    v0: &[f64],
    w0: &[f64],
    t1: f64,
    tol: f64,
) -> Result<f64, CompatError> {
    let d = r.dim();
    if h.dim() != d || q0.len() != d || v0.len() != d || w0.len() != d {
        return Err(LinError::DimMismatch { expected: d, got: q0.len() }.into());
    }
    let t = tensor_f64(r.tensor());
    let (mut q, mut v, mut w) = (q0.to_vec(), v0.to_vec(), w0.to_vec());
    h.project_state(&mut q, &mut v)?;
    let mut q2 = q.clone();
    h.project_state(&mut q2, &mut w)?;
    let value = |z: &[f64]| form_f64(&t, &z[..d], &z[2 * d..], &z[..d], &z[2 * d..]);
    let mut z0 = q;
    z0.extend_from_slice(&v);
    z0.extend_from_slice(&w);
    let f0 = value(&z0);
    let denom = if f0.abs() < 1e-12 { 1.0 } else { f0.abs() };
    let mut worst: f64 = 0.0;
    let (_, stop) = dopri5(
        |_, z, out| {
            let (q, rest) = z.split_at(d);
            let (v, w) = rest.split_at(d);
            let Ok(hq) = h.value(q) else { return false };
            let lambda = -h.hessian_form(q, v, v) / hq;
            let mu = -h.hessian_form(q, v, w) / hq;
            for i in 0..d {
                out[i] = v[i];
                out[d + i] = lambda * q[i];
                out[2 * d + i] = mu * q[i];
            }
            out.iter().all(|x| x.is_finite())
        },
        &z0,
        0.0,
        t1,
        &OdeOptions::with_tol(tol),
        |_, z| {
            let (q, rest) = z.split_at_mut(d);
            let (v, w) = rest.split_at_mut(d);
            if h.project_state(q, v).is_err() {
                return false;
            }
            let c = h.dh(q, w) / h.dh(q, q);
            for (wi, qi) in w.iter_mut().zip(q.iter()) {
                *wi -= c * qi;
            }
            worst = worst.max((value(z) - f0).abs() / denom);
            true
        },
    );
    if let Some(s) = stop {
        return Err(CompatError::Integration(format!("{s:?}")));
    }
    Ok(worst)
}
