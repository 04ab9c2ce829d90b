//! `momentumian` command-line front end.
//!
//! Every subcommand writes `<out>/<subcommand>/<run-id>.<csv|json>` plus a
//! manifest. Exit codes: 0 success, 1 solver or I/O failure (and failed
//! selftest properties), 2 usage error, 3 divergence.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use momentumian_core::classical::{self, ClassicalSetup};
use momentumian_core::ode::StepPolicy;
use momentumian_core::output::{write_artifacts, Artifact, Format, Table};
use momentumian_core::pide::{classify_time_direction, PidePair, SeparationConstants};
use momentumian_core::scenarios::{self, ScenarioConfig, ScenarioId};
use momentumian_core::selftest::{self, SelftestOptions};
use momentumian_core::specfun::{self, linspace, MlEvalPolicy};
use momentumian_core::tide::{self, CoupledSystem, HoRun, RunStatus, TideSolution};
use momentumian_core::{Branch, Complex64, Error, PhysicalScales, Potential};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

const OUT_ENV: &str = "MOMENTUMIAN_OUT";
const DEFAULT_OUT: &str = "momentumian-out";

#[derive(Parser, Debug)]
#[command(
    name = "momentumian",
    version,
    about = "Position-as-clock solvers: classical time of flight, fractional PIDE, coupled TIDE"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output root [env: MOMENTUMIAN_OUT; default: ./momentumian-out]
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Table encoding
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// JSON file with defaults for this subcommand; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Time of flight t(q) along a classical trajectory
    Classical(ClassicalArgs),
    /// Mittag-Leffler function E_alpha(x) on a real grid
    Specfun(SpecfunArgs),
    /// Closed-form solution of the position-independent equations
    Pide(PideArgs),
    /// Integrate the coupled time-independent equations chi+-(q)
    Tide(TideArgs),
    /// Run a figure-level scenario
    Scenario(ScenarioArgs),
    /// Run the property suite and report each check
    Selftest(SelftestArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum PotentialArg {
    Free,
    ConstantForce,
    Harmonic,
    InvertedHarmonic,
    Coulomb,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum BranchArg {
    Plus,
    Minus,
}

impl From<BranchArg> for Branch {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Plus => Branch::Plus,
            BranchArg::Minus => Branch::Minus,
        }
    }
}

/// Potential parameters shared by `classical` and `tide`.
#[derive(Args, Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PotentialFlags {
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    potential: Option<PotentialArg>,
    /// Harmonic frequency (default 1)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    omega: Option<f64>,
    /// Constant force F0 (default -1)
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    f0: Option<f64>,
    /// Reference point of the constant-force potential (default 0)
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    q0: Option<f64>,
    /// Coulomb strength e^2 (default 1)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    e2: Option<f64>,
    /// Coulomb core cut-off (default 1e-3)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    epsilon: Option<f64>,
}

#[derive(Args, Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFlags {
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    qmin: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    qmax: Option<f64>,
    /// Number of grid points
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    steps: Option<usize>,
}

#[derive(Args, Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassicalArgs {
    #[command(flatten)]
    #[serde(flatten)]
    potential: PotentialFlags,
    #[command(flatten)]
    #[serde(flatten)]
    grid: GridFlags,
    /// Energy H0 (default 0.5)
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    h0: Option<f64>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    branch: Option<BranchArg>,
}

#[derive(Args, Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecfunArgs {
    /// Order alpha (default 0.5)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    xmin: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    xmax: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    steps: Option<usize>,
}

/// Separation constants: either K0 or the pair (pair wins).
#[derive(Args, Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantFlags {
    /// Kinetic energy of time K0
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    k0: Option<f64>,
    /// P_t+ as a complex number, e.g. 1.2 or 0+1.4i
    #[arg(long, requires = "pt_minus", allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pt_plus: Option<String>,
    /// P_t- as a complex number
    #[arg(long, requires = "pt_plus", allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pt_minus: Option<String>,
}

#[derive(Args, Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PideArgs {
    #[command(flatten)]
    #[serde(flatten)]
    constants: ConstantFlags,
    /// Initial value psi+(0) (default 1)
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    psi_plus: Option<String>,
    /// Initial value psi-(0) (default 1)
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    psi_minus: Option<String>,
    /// End of the time grid (default 10)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    t_max: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    steps: Option<usize>,
}

#[derive(Args, Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TideArgs {
    #[command(flatten)]
    #[serde(flatten)]
    potential: PotentialFlags,
    #[command(flatten)]
    #[serde(flatten)]
    constants: ConstantFlags,
    #[command(flatten)]
    #[serde(flatten)]
    grid: GridFlags,
    /// Harmonic only: solve in the rotated frame q -> iq
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not", default)]
    rotated: bool,
    /// Ratio P_t+/P_t- used with a lone --k0 (harmonic default 1, Coulomb forward default 20)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    split_sq: Option<f64>,
}

#[derive(Args, Debug, Default, Clone, Serialize, Deserialize)]
struct ScenarioArgs {
    /// classical-demo | pide-fig2 | ho-fig3 | superposition-fig5 | hydrogen-fig6 | specfun-selftest
    name: Option<String>,
    /// Comma-separated K0 list
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    k0: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    qmin: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    qmax: Option<f64>,
    /// Sets the window to [0, t-max] (pide-fig2, superposition-fig5)
    #[arg(long, conflicts_with_all = ["qmin", "qmax"])]
    t_max: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, value_enum)]
    branch: Option<BranchArg>,
    #[arg(long, allow_negative_numbers = true)]
    probe_q: Option<f64>,
    #[arg(long)]
    rotated: bool,
    #[arg(long)]
    split_sq: Option<f64>,
    /// Worker threads for sweep scenarios
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args, Debug, Default, Clone, Serialize, Deserialize)]
struct SelftestArgs {
    /// Negative control: evaluate the series with a perturbed Gamma function
    #[arg(long, hide = true)]
    corrupt_gamma: bool,
}

enum Failure {
    Usage(String),
    Solver(String),
    Diverged,
    PropertiesFailed(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain { .. }
            | Error::InvalidParameter { .. }
            | Error::TurningPoint { .. }
            | Error::InteriorTurningPoint { .. }
            | Error::Unsupported(_)
            | Error::Grid(_)
            | Error::SingularShift { .. }
            | Error::Json(_) => Failure::Usage(e.to_string()),
            other => Failure::Solver(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(Failure::Usage(msg.into()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Diverged) => ExitCode::from(3),
        Err(Failure::PropertiesFailed(n)) => {
            eprintln!("{n} selftest properties failed");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Classical(a) => {
            let a: ClassicalArgs = resolve(a, cli.config.as_deref())?;
            emit(cli, "classical", &run_classical(&a)?, false)
        }
        Command::Specfun(a) => {
            let a: SpecfunArgs = resolve(a, cli.config.as_deref())?;
            emit(cli, "specfun", &run_specfun(&a)?, false)
        }
        Command::Pide(a) => {
            let a: PideArgs = resolve(a, cli.config.as_deref())?;
            emit(cli, "pide", &run_pide(&a)?, false)
        }
        Command::Tide(a) => {
            let a: TideArgs = resolve(a, cli.config.as_deref())?;
            let (artifact, diverged) = run_tide(&a)?;
            emit(cli, "tide", &[artifact], diverged)
        }
        Command::Scenario(a) => run_scenario(cli, a),
        Command::Selftest(a) => run_selftest(a),
    }
}

/// Overlays the explicitly given flags onto the config file.
fn resolve<T: Serialize + DeserializeOwned>(flags: &T, config: Option<&Path>) -> CliResult<T> {
    let Some(path) = config else {
        return Ok(
            serde_json::from_value(serde_json::to_value(flags).expect("flags serialize"))
                .expect("flags round-trip"),
        );
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut base: Value = serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("malformed config {}: {e}", path.display())))?;
    if let Err(e) = serde_json::from_value::<T>(base.clone()) {
        return usage(format!("invalid config {}: {e}", path.display()));
    }
    let Value::Object(over) = serde_json::to_value(flags).expect("flags serialize") else {
        unreachable!("flag structs serialize to objects")
    };
    let Value::Object(dst) = &mut base else {
        return usage(format!("config {} must hold a JSON object", path.display()));
    };
    dst.extend(over);
    serde_json::from_value(base)
        .map_err(|e| Failure::Usage(format!("invalid config {}: {e}", path.display())))
}

fn out_root(cli: &Cli, from_config: Option<&Path>) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| from_config.map(Path::to_path_buf))
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn emit(cli: &Cli, group: &str, artifacts: &[Artifact], diverged: bool) -> CliResult<()> {
    let format = cli.format.map(Format::from).unwrap_or_default();
    let written = write_artifacts(&out_root(cli, None), group, artifacts, format)
        .map_err(|e| Failure::Solver(e.to_string()))?;
    for p in written {
        println!("{}", p.display());
    }
    if diverged {
        for a in artifacts {
            if let Some(q) = a.manifest.get("diverged_at_q") {
                eprintln!("{}: solution diverged at q = {q}", a.run_id);
            }
        }
        return Err(Failure::Diverged);
    }
    Ok(())
}

fn parse_complex(name: &str, s: &str) -> CliResult<Complex64> {
    let z = Complex64::from_str(s.trim()).map_err(|_| {
        Failure::Usage(format!(
            "--{name}: cannot parse `{s}` as a complex number (e.g. 1.5, -2i, 0.3+1.2i)"
        ))
    })?;
    if !(z.re.is_finite() && z.im.is_finite()) {
        return usage(format!("--{name} must be finite"));
    }
    Ok(z)
}

fn steps(name: &str, v: Option<usize>, default: usize, min: usize) -> CliResult<usize> {
    let n = v.unwrap_or(default);
    if n < min {
        return usage(format!("--{name} must be >= {min}, got {n}"));
    }
    Ok(n)
}

fn build_potential(p: &PotentialFlags, default: PotentialArg) -> CliResult<Potential> {
    let kind = p.potential.unwrap_or(default);
    let allowed: &[(&str, bool)] = &[
        ("omega", p.omega.is_some()),
        ("f0", p.f0.is_some()),
        ("q0", p.q0.is_some()),
        ("e2", p.e2.is_some()),
        ("epsilon", p.epsilon.is_some()),
    ];
    let own: &[&str] = match kind {
        PotentialArg::Free => &[],
        PotentialArg::ConstantForce => &["f0", "q0"],
        PotentialArg::Harmonic | PotentialArg::InvertedHarmonic => &["omega"],
        PotentialArg::Coulomb => &["e2", "epsilon"],
    };
    for (name, given) in allowed {
        if *given && !own.contains(name) {
            return usage(format!(
                "--{name} does not apply to the {} potential",
                kind.to_possible_value().unwrap().get_name()
            ));
        }
    }
    let pot = match kind {
        PotentialArg::Free => Potential::Free,
        PotentialArg::ConstantForce => Potential::ConstantForce {
            f0: p.f0.unwrap_or(-1.0),
            q0: p.q0.unwrap_or(0.0),
        },
        PotentialArg::Harmonic => Potential::Harmonic {
            omega: p.omega.unwrap_or(1.0),
        },
        PotentialArg::InvertedHarmonic => Potential::InvertedHarmonic {
            omega: p.omega.unwrap_or(1.0),
        },
        PotentialArg::Coulomb => Potential::Coulomb1D {
            e2: p.e2.unwrap_or(1.0),
            epsilon: p.epsilon.unwrap_or(1e-3),
        },
    };
    Ok(pot.validated()?)
}

fn window(g: &GridFlags, default: (f64, f64)) -> CliResult<(f64, f64)> {
    let (lo, hi) = (g.qmin.unwrap_or(default.0), g.qmax.unwrap_or(default.1));
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return usage(format!("need finite --qmin < --qmax, got [{lo}, {hi}]"));
    }
    Ok((lo, hi))
}

fn manifest(
    command: &str,
    run_id: &str,
    params: &impl Serialize,
    table: &Table,
    extra: Value,
) -> Value {
    let mut m = json!({
        "command": command,
        "run_id": run_id,
        "params": params,
        "status": "converged",
        "columns": table.columns,
        "rows": table.rows.len(),
    });
    if let (Value::Object(dst), Value::Object(src)) = (&mut m, extra) {
        dst.extend(src);
    }
    m
}

fn run_classical(a: &ClassicalArgs) -> CliResult<Vec<Artifact>> {
    let pot = build_potential(&a.potential, PotentialArg::Harmonic)?;
    let h0 = a.h0.unwrap_or(0.5);
    let setup = ClassicalSetup::new(pot, h0, a.branch.map(Branch::from).unwrap_or(Branch::Minus))?;
    let default = match pot {
        Potential::Free | Potential::InvertedHarmonic { .. } => (-3.0, 3.0),
        Potential::Harmonic { .. } => match setup.amplitude() {
            Some(amp) => (-amp, amp),
            None => return usage("harmonic motion needs --h0 > 0 unless --qmin/--qmax are given"),
        },
        Potential::ConstantForce { f0, q0 } if f0 != 0.0 => {
            let qt = q0 - h0 / f0;
            if f0 < 0.0 {
                (qt - 3.0, qt)
            } else {
                (qt, qt + 3.0)
            }
        }
        Potential::ConstantForce { .. } => (-3.0, 3.0),
        Potential::Coulomb1D { e2, epsilon } => {
            let far = if h0 < 0.0 { e2 / -h0 } else { 10.0 };
            (-far, -epsilon)
        }
    };
    let (lo, hi) = window(&a.grid, default)?;
    let n = steps("steps", a.grid.steps, 201, 2)?;
    // t = 0 at the left end of the window
    let setup = setup.with_anchor(lo, Complex64::new(0.0, 0.0));
    let traj = classical::trajectory(&setup, lo, hi, n)?;
    let table = scenarios::trajectory_table(&traj);
    let extra = json!({"potential": pot, "h0": h0, "branch": setup.branch, "anchor_q": lo});
    let m = manifest("classical", "trajectory", a, &table, extra);
    Ok(vec![Artifact {
        run_id: "trajectory".into(),
        table,
        manifest: m,
    }])
}

fn run_specfun(a: &SpecfunArgs) -> CliResult<Vec<Artifact>> {
    let alpha = a.alpha.unwrap_or(0.5);
    let (lo, hi) = (a.xmin.unwrap_or(-5.0), a.xmax.unwrap_or(5.0));
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return usage(format!("need finite --xmin < --xmax, got [{lo}, {hi}]"));
    }
    let n = steps("steps", a.steps, 101, 2)?;
    let policy = MlEvalPolicy::default();
    let mut table = Table::new(&["x", "re_ml", "im_ml"]);
    for x in linspace(lo, hi, n) {
        let v = specfun::mittag_leffler(alpha, Complex64::new(x, 0.0), &policy)?;
        table.push_nums(&[x, v.re, v.im]);
    }
    let m = manifest(
        "specfun",
        "mittag-leffler",
        a,
        &table,
        json!({"alpha": alpha, "policy": policy}),
    );
    Ok(vec![Artifact {
        run_id: "mittag-leffler".into(),
        table,
        manifest: m,
    }])
}

fn constants(
    c: &ConstantFlags,
    default: impl FnOnce(f64) -> momentumian_core::Result<SeparationConstants>,
) -> CliResult<SeparationConstants> {
    match (&c.pt_plus, &c.pt_minus, c.k0) {
        (Some(p), Some(m), _) => Ok(SeparationConstants::new(
            parse_complex("pt-plus", p)?,
            parse_complex("pt-minus", m)?,
            1.0,
        )?),
        (None, None, Some(k0)) => Ok(default(k0)?),
        (None, None, None) => usage("give --k0 or the pair --pt-plus/--pt-minus"),
        _ => usage("--pt-plus and --pt-minus must be given together"),
    }
}

fn run_pide(a: &PideArgs) -> CliResult<Vec<Artifact>> {
    let c = constants(&a.constants, |k0| SeparationConstants::from_k0(k0, 1.0))?;
    let one = Complex64::new(1.0, 0.0);
    let p0 = a
        .psi_plus
        .as_deref()
        .map(|s| parse_complex("psi-plus", s))
        .transpose()?
        .unwrap_or(one);
    let m0 = a
        .psi_minus
        .as_deref()
        .map(|s| parse_complex("psi-minus", s))
        .transpose()?
        .unwrap_or(one);
    let t_max = a.t_max.unwrap_or(10.0);
    if !(t_max.is_finite() && t_max > 0.0) {
        return usage(format!("--t-max must be > 0, got {t_max}"));
    }
    let n = steps("steps", a.steps, 1001, 2)?;
    let pair = PidePair::from_initial(c, p0, m0, 1.0)?;
    let mut table = Table::new(&[
        "t",
        "re_psi_plus",
        "im_psi_plus",
        "abs2_psi_plus",
        "re_psi_minus",
        "im_psi_minus",
        "abs2_psi_minus",
    ]);
    for t in linspace(0.0, t_max, n) {
        let (p, m) = pair.psi(t)?;
        table.push_nums(&[t, p.re, p.im, p.norm_sqr(), m.re, m.im, m.norm_sqr()]);
    }
    let extra = json!({
        "constants": c,
        "k0": [c.k0().re, c.k0().im],
        "time_direction": classify_time_direction(&c).to_string(),
        "constant": pair.is_constant(),
    });
    let m = manifest("pide", "psi", a, &table, extra);
    Ok(vec![Artifact {
        run_id: "psi".into(),
        table,
        manifest: m,
    }])
}

fn run_tide(a: &TideArgs) -> CliResult<(Artifact, bool)> {
    let pot = build_potential(&a.potential, PotentialArg::Harmonic)?;
    let scales = PhysicalScales::default();
    if let Some(r) = a.split_sq {
        if !(r.is_finite() && r > 0.0) {
            return usage(format!("--split-sq must be > 0, got {r}"));
        }
        if a.constants.pt_plus.is_some() {
            return usage("--split-sq applies only with a lone --k0");
        }
    }
    if a.rotated && !matches!(pot, Potential::Harmonic { .. }) {
        return usage("--rotated applies only to the harmonic potential");
    }
    let policy = StepPolicy::for_potential(&pot);
    let sol = match pot {
        Potential::Harmonic { omega } => {
            let c = constants(&a.constants, |k0| {
                SeparationConstants::from_k0_split(k0, 1.0, a.split_sq.unwrap_or(1.0).sqrt())
            })?;
            let (lo, hi) = window(&a.grid, (-6.0, 6.0))?;
            if !(lo < 0.0 && hi > 0.0) {
                return usage("harmonic runs start at q = 0, so the window must contain it");
            }
            let n = steps("steps", a.grid.steps, 1201, 100)?;
            let mut sys = CoupledSystem::new(pot, scales, c)?;
            if a.rotated {
                sys = sys.rotate_q_imaginary()?;
            }
            let mut seed_run = HoRun::new(c.k0().re, hi, n);
            seed_run.omega = omega;
            seed_run.rotated = a.rotated;
            two_sided(&sys, lo, hi, n, seed_run.seed(), &policy)?
        }
        Potential::Coulomb1D { epsilon, .. } => {
            let c = constants(&a.constants, |k0| {
                if k0 < 0.0 {
                    SeparationConstants::from_k0(k0, 1.0)
                } else {
                    SeparationConstants::from_k0_split(k0, 1.0, a.split_sq.unwrap_or(20.0).sqrt())
                }
            })?;
            let (lo, hi) = window(&a.grid, (-130.0, -epsilon))?;
            if lo < epsilon && hi > -epsilon {
                return usage(format!(
                    "the window must stay on one side of the core |q| < {epsilon}"
                ));
            }
            let n = steps("steps", a.grid.steps, 20001, 100)?;
            let sys = CoupledSystem::new(pot, scales, c)?;
            let (near, far) = if hi < 0.0 { (hi, lo) } else { (lo, hi) };
            if c.k0().re < 0.0 {
                let w = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
                tide::integrate_coupled(&sys, far, near, n, (w, w), &policy)?
            } else {
                tide::integrate_coupled(
                    &sys,
                    near,
                    far,
                    n,
                    (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)),
                    &policy,
                )?
            }
        }
        _ => return usage("tide supports the harmonic and coulomb potentials"),
    };
    let diverged = sol.status.is_diverged();
    let out = if diverged {
        sol.clone()
    } else {
        sol.normalized()
    };
    let table = scenarios::tide_table(&out);
    let mut m = manifest(
        "tide",
        "chi",
        a,
        &table,
        json!({
            "potential": pot,
            "constants": sol.constants,
            "k0": [sol.constants.k0().re, sol.constants.k0().im],
            "rotated": a.rotated,
            "normalized": out.normalized,
            "status": sol.status.label(),
        }),
    );
    if let RunStatus::DivergedAtQ { q } = sol.status {
        m["diverged_at_q"] = json!(q);
    }
    Ok((
        Artifact {
            run_id: "chi".into(),
            table,
            manifest: m,
        },
        diverged,
    ))
}

/// Integrates outward from q = 0 to both window ends.
fn two_sided(
    sys: &CoupledSystem,
    lo: f64,
    hi: f64,
    n: usize,
    seed: (Complex64, Complex64),
    policy: &StepPolicy,
) -> CliResult<TideSolution> {
    let h = (hi - lo) / (n - 1) as f64;
    let n_right = ((hi / h).round() as usize).max(1) + 1;
    let n_left = ((-lo / h).round() as usize).max(1) + 1;
    let right = tide::integrate_coupled(sys, 0.0, hi, n_right, seed, policy)?;
    let left = tide::integrate_coupled(sys, 0.0, lo, n_left, seed, policy)?;
    let status = match (left.status, right.status) {
        (RunStatus::DivergedAtQ { q: a }, RunStatus::DivergedAtQ { q: b }) => {
            RunStatus::DivergedAtQ {
                q: if a.abs() <= b.abs() { a } else { b },
            }
        }
        (d @ RunStatus::DivergedAtQ { .. }, _) | (_, d @ RunStatus::DivergedAtQ { .. }) => d,
        _ => RunStatus::Converged,
    };
    // left is ascending and ends at q = 0, which right also starts with
    let k = left.q_grid.len() - 1;
    let q: Vec<f64> = left.q_grid[..k]
        .iter()
        .chain(&right.q_grid)
        .copied()
        .collect();
    let p: Vec<Complex64> = left.chi_plus[..k]
        .iter()
        .chain(&right.chi_plus)
        .copied()
        .collect();
    let m: Vec<Complex64> = left.chi_minus[..k]
        .iter()
        .chain(&right.chi_minus)
        .copied()
        .collect();
    let mut sol = TideSolution::from_samples(sys, q, p, m)?;
    sol.status = status;
    Ok(sol)
}

fn run_scenario(cli: &Cli, a: &ScenarioArgs) -> CliResult<()> {
    let mut cfg = match (&cli.config, &a.name) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Failure::Usage(format!("cannot read config {}: {e}", path.display()))
            })?;
            ScenarioConfig::from_json(&text)
                .map_err(|e| Failure::Usage(format!("invalid config {}: {e}", path.display())))?
        }
        (None, Some(name)) => ScenarioConfig::new(name.parse::<ScenarioId>()?),
        (None, None) => return usage("name a scenario or pass --config"),
    };
    if let Some(name) = &a.name {
        let id = name.parse::<ScenarioId>()?;
        if id != cfg.scenario {
            return usage(format!(
                "scenario `{id}` conflicts with `{}` in the config file",
                cfg.scenario
            ));
        }
    }
    if let Some(k) = &a.k0 {
        cfg.k0_list = Some(k.clone());
    }
    if a.qmin.is_some() || a.qmax.is_some() {
        let (lo, hi) = match (a.qmin, a.qmax, cfg.window) {
            (Some(lo), Some(hi), _) => (lo, hi),
            (lo, hi, Some([clo, chi])) => (lo.unwrap_or(clo), hi.unwrap_or(chi)),
            _ => return usage("give both --qmin and --qmax (no window in the config to complete)"),
        };
        cfg.window = Some([lo, hi]);
    }
    if let Some(t) = a.t_max {
        cfg.window = Some([0.0, t]);
    }
    if a.steps.is_some() {
        cfg.points = a.steps;
    }
    if let Some(b) = a.branch {
        cfg.branch = Some(b.into());
    }
    if a.probe_q.is_some() {
        cfg.probe_q = a.probe_q;
    }
    if a.rotated {
        cfg.rotated = true;
    }
    if a.split_sq.is_some() {
        cfg.split_sq = a.split_sq;
    }
    if let Some(j) = a.jobs {
        cfg.jobs = j;
    }
    if let Some(f) = cli.format {
        cfg.format = f.into();
    }
    cfg.validate()?;
    let outcome = scenarios::run_scenario(&cfg)?;
    let root = out_root(cli, cfg.out_dir.as_deref());
    let written = scenarios::write_outcome(&outcome, &root, cfg.format)
        .map_err(|e| Failure::Solver(e.to_string()))?;
    for p in written {
        println!("{}", p.display());
    }
    if outcome.diverged {
        eprintln!(
            "scenario {}: at least one run diverged (see manifests)",
            cfg.scenario
        );
        return Err(Failure::Diverged);
    }
    Ok(())
}

fn run_selftest(a: &SelftestArgs) -> CliResult<()> {
    let results = selftest::run(&SelftestOptions {
        corrupt_gamma: a.corrupt_gamma,
    });
    let mut failed = 0;
    for r in &results {
        if !r.passed {
            failed += 1;
        }
        println!(
            "[{}] {}  measured={:.3e} tolerance={:.3e} ({:.3}s)",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.measured,
            r.tolerance,
            r.seconds
        );
    }
    println!(
        "{} of {} properties passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        return Err(Failure::PropertiesFailed(failed));
    }
    Ok(())
}
