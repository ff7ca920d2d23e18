mod builtins;
mod error;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use projdyn::compat::{find_compatible_screen, hamiltonian_test, ScreenReport, ScreenVerdict};
use projdyn::curvclass::{classify_8_1, classify_9_2, BivectorMap, CurvatureForm};
use projdyn::exactlin::Tensor;
use projdyn::polyintegrals::{dim_pbb, PolynomialJson, ScreenIntegral};
use projdyn::screens::{
    integrate, project_trajectory, trajectory_from_csv, trajectory_to_csv, verify_projection, ForceField, ForceSpec,
    Scenario, Screen, ScreenError, ScreenSpec, TrajectorySample,
};
use projdyn::young::{check_im_as, check_im_sa, young_dim, Numbering, YoungTableau};
use serde::{Deserialize, Serialize};

use builtins::{BuiltinScreen, System};
use error::CliError;
use output::{emit, read_json, read_text, to_json};

const DEFAULT_TOL: f64 = 1e-10;

const FORMATS: &str = "\
FILE FORMATS
  Rationals are strings \"p/q\" (or \"p\"); floats are printed with 17 significant digits.

  Tableau       {\"rows\": [3, 1], \"numbering\": \"horizontal\" | \"vertical\"}
                rows are always row lengths, weakly decreasing.
  Tensor        {\"dim\": d, \"order\": N, \"entries\": [{\"idx\": [i1, ..., iN], \"val\": \"p/q\"}, ...]}
                absent entries are zero; a repeated idx is an error.
  Curvature     an order-4 Tensor plus \"symmetry\": \"riemann\".
  Bivector map  {\"src\": n, \"dst\": m, \"matrix\": [[\"p/q\", ...], ...]}
                C(m,2) rows, C(n,2) columns; column k is the image of the k-th
                basis bivector e_i^e_j (i < j, lexicographic).
  Polynomial    {\"vars\": [\"q0\", ..., \"v0\", ...], \"terms\": [{\"exps\": [...], \"coef\": \"p/q\"}]}
  Screen        {\"kind\": \"flat\" | \"sphere\" | \"hyperboloid\" | \"quartic\", \"dim\": d}
                {\"kind\": \"linear\", \"phi\": [...]}   {\"kind\": \"quadratic\", \"g\": [[...]]}
  Force         {\"kind\": \"zero\", \"dim\": d}
                {\"kind\": \"kepler\" | \"inverse_cube\" | \"harmonic\",
                 \"phi\": [...], \"center\": [...], \"strength\": \"p/q\"}
  Scenario      {\"screen\": Screen, \"force\": Force, \"q0\": [...], \"v0\": [...],
                 \"t_span\": [t0, t1], \"tol\": 1e-10}
  Integral      {\"screen\": Screen, \"t\": Polynomial}   (input of hamiltonian-test)
  Trajectory    CSV: a '# screen: <Screen JSON>' line, the header t,q_0..,v_0..,
                then one row per accepted step.

EXIT CODES
  0 success, 1 domain error or negative verdict, 2 input error.

ENVIRONMENT
  PROJDYN_TOL   integrator tolerance (default 1e-10), same as --tol.";

#[derive(Parser)]
#[command(name = "projdyn", version, about = "Projective dynamics: tableaux, curvature forms, screens and projections")]
#[command(after_long_help = FORMATS)]
struct Cli {
    /// Integrator tolerance.
    #[arg(long, global = true, env = "PROJDYN_TOL")]
    tol: Option<f64>,
    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dimension of the Young symmetry class of a tableau shape in dimension d.
    YoungDim {
        #[command(flatten)]
        tableau: TableauArgs,
        #[arg(long)]
        dim: usize,
    },
    /// Whether a tensor lies in Im AS (or Im SA) of a tableau.
    YoungCheck {
        #[command(flatten)]
        tableau: TableauArgs,
        /// Tensor JSON file.
        #[arg(long)]
        tensor: String,
        #[arg(long, value_enum, default_value = "as")]
        space: Space,
    },
    /// Dimension of the space of bi-homogeneous free-motion integrals P^(b,b) for dim V = n + 1.
    PbbDim {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        b: u64,
    },
    /// Classifies a decomposability-preserving bivector map.
    Classify {
        /// Bivector map JSON file.
        #[arg(long)]
        input: String,
    },
    /// Classifies a curvature form.
    ClassifyCurvature {
        #[command(flatten)]
        form: FormArgs,
    },
    /// Integrates the motion on a screen and prints the trajectory CSV.
    Integrate {
        #[command(flatten)]
        motion: MotionArgs,
    },
    /// Centrally projects a trajectory CSV to another screen.
    Project {
        /// Trajectory CSV file.
        #[arg(long)]
        input: String,
        #[command(flatten)]
        target: TargetArgs,
    },
    /// Finds the screens compatible with a curvature form.
    ScreenFind {
        #[command(flatten)]
        form: FormArgs,
    },
    /// Decides whether a quadratic integral is the kinetic part of a Hamiltonian for some screen.
    HamiltonianTest {
        /// Integral JSON file: {"screen": ..., "t": Polynomial}.
        #[arg(long, conflicts_with_all = ["system", "screen"])]
        input: Option<String>,
        #[arg(long, value_enum)]
        system: Option<System>,
        #[arg(long, value_enum, default_value = "flat")]
        screen: BuiltinScreen,
        #[arg(long, default_value_t = 3)]
        dim: usize,
    },
    /// Projects a motion to another screen and compares with a re-integration there.
    VerifyProjection {
        /// Trajectory CSV; needs --force or --system for the re-integration.
        #[arg(long, conflicts_with = "scenario")]
        input: Option<String>,
        /// Force JSON file used with --input.
        #[arg(long, conflicts_with = "system")]
        force: Option<String>,
        #[command(flatten)]
        motion: MotionArgs,
        #[command(flatten)]
        target: TargetArgs,
        /// Largest accepted distance between the two curves.
        #[arg(long, default_value_t = 1e-6)]
        max_deviation: f64,
    },
}

#[derive(Args)]
struct TableauArgs {
    /// Tableau JSON file.
    #[arg(long, conflicts_with_all = ["rows", "numbering"])]
    tableau: Option<String>,
    /// Row lengths, e.g. 2,2.
    #[arg(long, value_delimiter = ',')]
    rows: Vec<usize>,
    /// Defaults to the numbering the requested check works with.
    #[arg(long, value_enum)]
    numbering: Option<NumberingArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum NumberingArg {
    Horizontal,
    Vertical,
}

#[derive(Clone, Copy, ValueEnum)]
enum Space {
    /// Image of A∘S.
    As,
    /// Image of S∘A.
    Sa,
}

#[derive(Args)]
struct FormArgs {
    /// Curvature form JSON file.
    #[arg(long, conflicts_with = "screen")]
    input: Option<String>,
    /// Use the curvature form of the kinetic energy of a builtin screen.
    #[arg(long, value_enum)]
    screen: Option<BuiltinScreen>,
    #[arg(long, default_value_t = 3)]
    dim: usize,
}

#[derive(Args)]
struct MotionArgs {
    /// Scenario JSON file.
    #[arg(long, conflicts_with_all = ["system", "screen"])]
    scenario: Option<String>,
    #[arg(long, value_enum)]
    system: Option<System>,
    /// Screen carrying the motion.
    #[arg(long, value_enum, default_value = "flat")]
    screen: BuiltinScreen,
    #[arg(long, default_value_t = 3)]
    dim: usize,
    /// Initial position on the screen (defaults depend on the system).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    q0: Option<Vec<f64>>,
    /// Initial velocity, tangent to the screen.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    v0: Option<Vec<f64>>,
    #[arg(long, default_value_t = 6.0)]
    t1: f64,
}

#[derive(Args)]
struct TargetArgs {
    /// Builtin target screen.
    #[arg(long, value_enum, conflicts_with = "to_spec")]
    to: Option<BuiltinScreen>,
    /// Target screen JSON file.
    #[arg(long)]
    to_spec: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntegralInput {
    screen: ScreenSpec,
    t: PolynomialJson,
}

#[derive(Serialize)]
struct MembershipReport {
    space: &'static str,
    tableau: YoungTableau,
    member: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            match &err {
                CliError::Input(m) => eprintln!("error[input]: {m}"),
                CliError::Domain { code, message } => eprintln!("error[{code}]: {message}"),
            }
            err.exit_code()
        }
    }
}

fn tableau(args: &TableauArgs, default: Numbering) -> Result<YoungTableau, CliError> {
    if let Some(path) = &args.tableau {
        let (t, _) = read_json::<YoungTableau>(path)?;
        return Ok(t);
    }
    if args.rows.is_empty() {
        return Err(CliError::input("give --tableau or --rows"));
    }
    let numbering = match args.numbering {
        Some(NumberingArg::Horizontal) => Numbering::Horizontal,
        Some(NumberingArg::Vertical) => Numbering::Vertical,
        None => default,
    };
    Ok(YoungTableau::new(args.rows.clone(), numbering)?)
}

fn curvature_form(args: &FormArgs) -> Result<CurvatureForm, CliError> {
    match (&args.input, args.screen) {
        (Some(path), _) => CurvatureForm::from_json(&read_text(path)?).map_err(|e| CliError::from(e).in_file(path)),
        (None, Some(s)) => builtins::curvature_form(s, args.dim),
        (None, None) => Err(CliError::input("give --input or --screen")),
    }
}

fn target(args: &TargetArgs, dim: usize) -> Result<Screen, CliError> {
    match (args.to, &args.to_spec) {
        (Some(s), _) => Ok(builtins::screen(s, dim)),
        (None, Some(path)) => {
            let (spec, _) = read_json::<ScreenSpec>(path)?;
            Screen::from_spec(&spec).map_err(|e| CliError::from(e).in_file(path))
        }
        (None, None) => Err(CliError::input("give --to or --to-spec")),
    }
}

/// Screen, force and initial state described by a scenario file or the
/// builtin flags.
fn motion(args: &MotionArgs, tol: Option<f64>) -> Result<(Screen, ForceField, Scenario), CliError> {
    if let Some(path) = &args.scenario {
        let (mut sc, _) = read_json::<Scenario>(path)?;
        if let Some(t) = tol {
            sc.tol = t;
        }
        let h = Screen::from_spec(&sc.screen).map_err(|e| CliError::from(e).in_file(path))?;
        let f = ForceField::from_spec(&sc.force).map_err(|e| CliError::from(e).in_file(path))?;
        return Ok((h, f, sc));
    }
    let system = args.system.ok_or_else(|| CliError::input("give --scenario or --system"))?;
    if args.dim < 2 {
        return Err(CliError::input("--dim must be at least 2"));
    }
    let h = builtins::screen(args.screen, args.dim);
    let f = builtins::force(system, args.dim);
    let (q0, v0) = match (&args.q0, &args.v0) {
        (Some(q), Some(v)) => (q.clone(), v.clone()),
        (None, None) => builtins::initial_state(system, &h)?,
        _ => return Err(CliError::input("give both --q0 and --v0 or neither")),
    };
    let sc = Scenario {
        screen: h.to_spec().expect("builtin screens have specs"),
        force: f.to_spec().expect("builtin forces have specs"),
        q0,
        v0,
        t_span: [0.0, args.t1],
        tol: tol.unwrap_or(DEFAULT_TOL),
    };
    Ok((h, f, sc))
}

fn run_motion(h: &Screen, f: &ForceField, sc: &Scenario) -> Result<TrajectorySample, CliError> {
    Ok(integrate(h, f, &sc.q0, &sc.v0, (sc.t_span[0], sc.t_span[1]), sc.tol)?)
}

fn verdict_code(rep: &ScreenReport) -> ExitCode {
    match rep.verdict {
        ScreenVerdict::Incompatible { .. } => ExitCode::from(1),
        _ => ExitCode::SUCCESS,
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    if let Some(t) = cli.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::input(format!("tolerance must be positive, got {t}")));
        }
    }
    let out = cli.output.as_deref();
    match cli.command {
        Command::YoungDim { tableau: t, dim } => {
            let y = tableau(&t, Numbering::Vertical)?;
            emit(&young_dim(&y, dim)?.to_string(), out)?;
        }
        Command::YoungCheck { tableau: t, tensor, space } => {
            let default = match space {
                Space::As => Numbering::Vertical,
                Space::Sa => Numbering::Horizontal,
            };
            let y = tableau(&t, default)?;
            let x = Tensor::from_json(&read_text(&tensor)?).map_err(|e| CliError::from(e).in_file(&tensor))?;
            let (name, member) = match space {
                Space::As => ("im_as", check_im_as(&y, &x)?),
                Space::Sa => ("im_sa", check_im_sa(&y, &x)?),
            };
            emit(&to_json(&MembershipReport { space: name, tableau: y, member }), out)?;
            if !member {
                return Ok(ExitCode::from(1));
            }
        }
        Command::PbbDim { n, b } => emit(&dim_pbb(n, b).to_string(), out)?,
        Command::Classify { input } => {
            let map = BivectorMap::from_json(&read_text(&input)?).map_err(|e| CliError::from(e).in_file(&input))?;
            emit(&to_json(&classify_8_1(&map)?), out)?;
        }
        Command::ClassifyCurvature { form } => {
            let r = curvature_form(&form)?;
            emit(&to_json(&classify_9_2(&r)?), out)?;
        }
        Command::Integrate { motion: m } => {
            let (h, f, sc) = motion(&m, cli.tol)?;
            match integrate(&h, &f, &sc.q0, &sc.v0, (sc.t_span[0], sc.t_span[1]), sc.tol) {
                Ok(traj) => emit(&trajectory_to_csv(&traj), out)?,
                Err(err) => {
                    // keep what was computed before the failure
                    if let ScreenError::DomainExit { partial, .. } | ScreenError::StepUnderflow { partial, .. } = &err {
                        emit(&trajectory_to_csv(partial), out)?;
                    }
                    return Err(err.into());
                }
            }
        }
        Command::Project { input, target: t } => {
            let traj = trajectory_from_csv(&read_text(&input)?).map_err(|e| CliError::from(e).in_file(&input))?;
            let to = target(&t, traj.screen.dim())?;
            let proj = project_trajectory(&traj, &to)?;
            emit(&trajectory_to_csv(&proj.sample), out)?;
            if let Some(t) = proj.visibility_lost_at {
                return Err(CliError::domain("not_visible", format!("motion leaves the visible region at t = {t:.16e}")));
            }
        }
        Command::ScreenFind { form } => {
            let r = curvature_form(&form)?;
            let rep = find_compatible_screen(&r)?;
            emit(&rep.to_json(), out)?;
            return Ok(verdict_code(&rep));
        }
        Command::HamiltonianTest { input, system, screen, dim } => {
            let (t, h) = match (input, system) {
                (Some(path), _) => {
                    let (inp, _) = read_json::<IntegralInput>(&path)?;
                    let h = Screen::from_spec(&inp.screen).map_err(|e| CliError::from(e).in_file(&path))?;
                    let expected = PolynomialJson::phase_vars(h.dim());
                    if inp.t.vars != expected {
                        return Err(CliError::input(format!("{path}: \"vars\" must be {expected:?}")));
                    }
                    let p = inp.t.to_poly().map_err(|e| CliError::from(e).in_file(&path))?;
                    (ScreenIntegral::from_poly(h.dim(), p)?, h)
                }
                (None, Some(s)) => (builtins::kinetic_term(s, screen, dim)?, builtins::screen(screen, dim)),
                (None, None) => return Err(CliError::input("give --input or --system")),
            };
            let rep = hamiltonian_test(&t, &h)?;
            emit(&rep.to_json(), out)?;
            return Ok(verdict_code(&rep));
        }
        Command::VerifyProjection { input, force, motion: m, target: t, max_deviation } => {
            let (traj, f) = match input {
                Some(path) => {
                    let traj = trajectory_from_csv(&read_text(&path)?).map_err(|e| CliError::from(e).in_file(&path))?;
                    let f = match (force, m.system) {
                        (Some(fp), _) => {
                            let (spec, _) = read_json::<ForceSpec>(&fp)?;
                            ForceField::from_spec(&spec).map_err(|e| CliError::from(e).in_file(&fp))?
                        }
                        (None, Some(s)) => builtins::force(s, traj.screen.dim()),
                        (None, None) => return Err(CliError::input("--input needs --force or --system")),
                    };
                    (traj, f)
                }
                None => {
                    let (h, f, sc) = motion(&m, cli.tol)?;
                    (run_motion(&h, &f, &sc)?, f)
                }
            };
            let to = target(&t, traj.screen.dim())?;
            let rep = verify_projection(&traj, &to, &f, max_deviation)?;
            emit(&to_json(&rep), out)?;
            if !rep.passed {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
