//! Named screens, forces and integrals, so that the standard examples run
//! without hand-written JSON.

use clap::ValueEnum;
use projdyn::compat::QuadraticIntegral;
use projdyn::curvclass::CurvatureForm;
use projdyn::exactlin::{qi, unit, Matrix, Rational};
use projdyn::polyintegrals::{vvar, ScreenIntegral};
use projdyn::screens::{central_project_state, ForceField, Screen};
use projdyn::symbolic::Poly;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BuiltinScreen {
    /// The hyperplane q_{d-1} = 1.
    Flat,
    /// The unit sphere |q| = 1.
    Sphere,
    /// The upper sheet q_{d-1}² − Σ q_i² = 1.
    Hyperboloid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum System {
    /// Kepler problem with μ = 1 centred at e_{d-1}.
    Kepler,
    /// Isotropic oscillator with k = 1 centred at e_{d-1}.
    Oscillator,
    /// Free motion.
    Free,
}

pub fn screen(s: BuiltinScreen, dim: usize) -> Screen {
    match s {
        BuiltinScreen::Flat => Screen::flat(dim),
        BuiltinScreen::Sphere => Screen::unit_sphere(dim),
        BuiltinScreen::Hyperboloid => Screen::hyperboloid(dim),
    }
}

pub fn force(s: System, dim: usize) -> ForceField {
    match s {
        System::Kepler => ForceField::kepler_flat(dim, qi(1)),
        System::Oscillator => ForceField::harmonic_flat(dim, qi(1)),
        System::Free => ForceField::zero(dim),
    }
}

/// Default initial state, chosen on the flat screen and carried to `h` by
/// central projection.
pub fn initial_state(s: System, h: &Screen) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let d = h.dim();
    let mut q = vec![0.0; d];
    let mut v = vec![0.0; d];
    q[d - 1] = 1.0;
    match s {
        System::Kepler => {
            q[0] = 1.0;
            v[1 % (d - 1)] = 0.8;
        }
        System::Oscillator => {
            q[0] = 1.0;
            v[1 % (d - 1)] = 1.0;
        }
        System::Free => {
            q[0] = 0.5;
            v[0] = 0.3;
            if d > 2 {
                v[1] = 0.2;
            }
        }
    }
    Ok(central_project_state(&Screen::flat(d), h, &q, &v)?)
}

fn square_sum(dim: usize, range: std::ops::Range<usize>, sign_last: i64) -> Poly {
    let n = 2 * dim;
    range.fold(Poly::zero(n), |acc, i| {
        let c = if i + 1 == dim { Rational::new(sign_last, 2) } else { Rational::new(1, 2) };
        &acc + &Poly::var(n, vvar(dim, i)).pow(2).scale(&c)
    })
}

/// Kinetic part of the builtin system's energy, written on the builtin
/// screen: `½|v|²` for the induced metric, or `ẋ₀ẋ₁` for the oscillator
/// pre-Lagrangian (flat screen only).
pub fn kinetic_term(s: System, h: BuiltinScreen, dim: usize) -> Result<ScreenIntegral, CliError> {
    if dim < 3 {
        return Err(CliError::input("builtin integrals need --dim ≥ 3"));
    }
    let poly = match (s, h) {
        (System::Oscillator, BuiltinScreen::Flat) => {
            return Ok(QuadraticIntegral::oscillator(dim - 1, 0, 1).leading_term_flat()?);
        }
        (System::Oscillator, _) => {
            return Err(CliError::input("the oscillator pre-Lagrangian is defined on the flat screen only"))
        }
        (_, BuiltinScreen::Flat) => square_sum(dim, 0..dim - 1, 1),
        (_, BuiltinScreen::Sphere) => square_sum(dim, 0..dim, 1),
        (_, BuiltinScreen::Hyperboloid) => square_sum(dim, 0..dim, -1),
    };
    Ok(ScreenIntegral::from_poly(dim, poly)?)
}

/// Curvature form of the builtin screen's kinetic energy.
pub fn curvature_form(h: BuiltinScreen, dim: usize) -> Result<CurvatureForm, CliError> {
    let form = match h {
        BuiltinScreen::Sphere => CurvatureForm::from_metric(&Matrix::identity(dim))?,
        BuiltinScreen::Hyperboloid => {
            let mut diag = vec![qi(-1); dim];
            diag[dim - 1] = qi(1);
            let t = CurvatureForm::from_metric(&Matrix::diag(&diag))?.tensor().scale(&qi(-1));
            CurvatureForm::new(t)?
        }
        BuiltinScreen::Flat => {
            let phi = unit(dim, dim - 1);
            let kb: Vec<Vec<Rational>> = (0..dim - 1).map(|i| unit(dim, i)).collect();
            CurvatureForm::from_flat(&phi, &kb, &Matrix::identity(dim - 1).scale(&Rational::new(1, 2)))?
        }
    };
    Ok(form)
}
