use std::process::ExitCode;

use projdyn::compat::CompatError;
use projdyn::curvclass::CurvError;
use projdyn::exactlin::LinError;
use projdyn::polyintegrals::IntegralError;
use projdyn::screens::ScreenError;
use projdyn::young::YoungError;
use thiserror::Error;

/// Failures of a command, split by exit code: malformed input (2) versus a
/// well-formed request the library rejects (1).
#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("{code}: {message}")]
    Domain { code: &'static str, message: String },
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn domain(code: &'static str, msg: impl ToString) -> Self {
        CliError::Domain { code, message: msg.to_string() }
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Input(_) => ExitCode::from(2),
            CliError::Domain { .. } => ExitCode::from(1),
        }
    }

    /// Prefixes input errors with the file they came from.
    pub fn in_file(self, path: &str) -> Self {
        match self {
            CliError::Input(m) => CliError::Input(format!("{path}: {m}")),
            other => other,
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(format!("line {}, column {}: {e}", e.line(), e.column()))
    }
}

impl From<LinError> for CliError {
    fn from(e: LinError) -> Self {
        match e {
            LinError::Degenerate(_) => CliError::domain("degenerate", e),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<YoungError> for CliError {
    fn from(e: YoungError) -> Self {
        match e {
            YoungError::Lin(l) => l.into(),
            YoungError::InvalidShape(_) | YoungError::OrderMismatch { .. } | YoungError::WrongNumbering(_) => {
                CliError::Input(e.to_string())
            }
            YoungError::InconsistentScalar => CliError::domain("inconsistent_scalar", e),
            _ => CliError::domain("precondition", e),
        }
    }
}

impl From<CurvError> for CliError {
    fn from(e: CurvError) -> Self {
        let code = match &e {
            CurvError::Lin(l) => return l.clone().into(),
            CurvError::Young(y) => return y.clone().into(),
            CurvError::NotSymmetric | CurvError::NotCurvatureForm(_) | CurvError::Precondition(_) => {
                return CliError::Input(e.to_string())
            }
            CurvError::NotDecomposablePreserving => "not_decomposable_preserving",
            CurvError::NotWellDefined(_) => "not_well_defined",
            CurvError::ImageNotDecomposable => "image_not_decomposable",
            CurvError::NontrivialKernel(_) => "nontrivial_kernel",
            CurvError::NoCase(_) => "no_case",
        };
        CliError::domain(code, e)
    }
}

impl From<ScreenError> for CliError {
    fn from(e: ScreenError) -> Self {
        let code = match &e {
            ScreenError::Input(_) | ScreenError::InvalidScreen(_) | ScreenError::InvalidForce(_) => {
                return CliError::Input(e.to_string())
            }
            ScreenError::NotOnScreen { .. } => "not_on_screen",
            ScreenError::NotVisible => "not_visible",
            ScreenError::Domain(_) => "domain",
            ScreenError::DomainExit { .. } => "domain_exit",
            ScreenError::StepUnderflow { .. } => "step_underflow",
        };
        CliError::domain(code, e)
    }
}

impl From<IntegralError> for CliError {
    fn from(e: IntegralError) -> Self {
        let code = match &e {
            IntegralError::Lin(l) => return l.clone().into(),
            IntegralError::Young(y) => return y.clone().into(),
            IntegralError::NotShearInvariant => "not_shear_invariant",
            IntegralError::NotScaleInvariant => "not_scale_invariant",
            IntegralError::ForceNotHomogeneous => "force_not_homogeneous",
            IntegralError::ForceNotExact => "force_not_exact",
            IntegralError::NotBiHomogeneous(_) => "not_bi_homogeneous",
            IntegralError::NotFreeMotionIntegral => "not_free_motion_integral",
            IntegralError::NotFirstIntegral => "not_first_integral",
            IntegralError::Domain(_) => "domain",
            IntegralError::Unsupported(_) => "unsupported",
            IntegralError::GeneralPosition(_) => "general_position",
            IntegralError::NotPolynomial => "not_polynomial",
            IntegralError::Verification(_) => "verification",
        };
        CliError::domain(code, e)
    }
}

impl From<CompatError> for CliError {
    fn from(e: CompatError) -> Self {
        let code = match &e {
            CompatError::Integral(i) => return i.clone().into(),
            CompatError::Curv(c) => return c.clone().into(),
            CompatError::Screen(s) => return s.clone().into(),
            CompatError::Lin(l) => return l.clone().into(),
            CompatError::NotPreLagrangian(_) => "not_pre_lagrangian",
            CompatError::NotQuadratic => "not_quadratic",
            CompatError::Verification(_) => "verification",
            CompatError::Unsupported(_) => "unsupported",
            CompatError::OffScreen(_) => "off_screen",
            CompatError::ZeroForm => "zero_form",
            CompatError::NontrivialKernel(_) => "nontrivial_kernel",
            CompatError::Integration(_) => "integration",
        };
        CliError::domain(code, e)
    }
}
