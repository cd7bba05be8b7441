use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tsvolterra::io::{fmt_f64, write_certificate_table, write_grid_function};
use tsvolterra::volterra::DEFAULT_TOL;
use tsvolterra::{
    certify_hyers_ulam, certify_rassias, instability_probe, march_solve, picard_solve, Error,
    FunctionSource, GridFunction, ProblemSpec, TimeScale, VolterraProblem,
};

#[derive(Parser)]
#[command(name = "tsvolterra", version, about = "Volterra integral equations on time scales")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem and write the solution as `t,value` CSV.
    Solve {
        problem: PathBuf,
        #[arg(long, value_enum, default_value_t = SolveMethod::March)]
        method: SolveMethod,
        #[arg(long)]
        out: PathBuf,
        /// Iteration report (picard only).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Check an approximate solution against a stability bound.
    Certify {
        problem: PathBuf,
        /// Expression in t or a `t,value` CSV; defaults to the problem's `psi`.
        #[arg(long, allow_hyphen_values = true)]
        psi: Option<String>,
        #[arg(long, value_enum)]
        mode: CertifyMode,
        /// Expression in t or CSV; defaults to the problem's `omega`.
        #[arg(long, allow_hyphen_values = true)]
        omega: Option<String>,
        #[arg(long)]
        out: PathBuf,
        /// Pointwise `t,deviation,bound,margin` table.
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Distance from zero to the solution on growing horizons.
    Instability {
        problem: PathBuf,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        horizons: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the exponential e_p(t, t0).
    Exp {
        #[arg(long)]
        timescale: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        p: f64,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        t0: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SolveMethod {
    Picard,
    March,
}

#[derive(Clone, Copy, ValueEnum)]
enum CertifyMode {
    Hu,
    Hur,
}

/// A failed run: exit status and message.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl ToString) -> Self {
        Failure {
            code: 2,
            message: message.to_string(),
        }
    }
}

/// Errors raised while reading inputs.
fn input(e: Error) -> Failure {
    Failure::input(e)
}

/// Errors raised while computing.
fn compute(e: Error) -> Failure {
    let code = match e {
        Error::NoConvergence { .. } | Error::SingularDiagonal { .. } | Error::NonFinite { .. } => 3,
        Error::HypothesisViolated { .. } | Error::ConditionFailed { .. } | Error::NonPositiveOmega { .. } => 5,
        _ => 2,
    };
    Failure {
        code,
        message: e.to_string(),
    }
}

/// Output files are only written once every result is in hand.
struct Outputs(Vec<(PathBuf, Vec<u8>)>);

impl Outputs {
    fn new() -> Self {
        Outputs(Vec::new())
    }

    fn add(&mut self, path: &Path, bytes: Vec<u8>) {
        self.0.push((path.to_path_buf(), bytes));
    }

    fn json(&mut self, path: &Path, value: &impl serde::Serialize) -> Result<(), Failure> {
        let mut text = serde_json::to_string_pretty(value).map_err(Failure::input)?;
        text.push('\n');
        self.add(path, text.into_bytes());
        Ok(())
    }

    fn write(self) -> Result<(), Failure> {
        for (path, bytes) in self.0 {
            fs::write(&path, bytes)
                .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))?;
        }
        Ok(())
    }
}

struct Loaded {
    spec: ProblemSpec,
    problem: VolterraProblem,
    dir: PathBuf,
}

fn load(path: &Path) -> Result<Loaded, Failure> {
    let spec = ProblemSpec::from_path(path).map_err(input)?;
    let problem = spec.build().map_err(input)?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(Loaded { spec, problem, dir })
}

fn sample(text: &str, dir: &Path, problem: &VolterraProblem) -> Result<GridFunction, Failure> {
    FunctionSource::parse(text, dir)
        .and_then(|src| src.sample(problem.grid().clone()))
        .map_err(input)
}

fn csv_bytes(g: &GridFunction) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    write_grid_function(&mut buf, g).map_err(input)?;
    Ok(buf)
}

fn solve(
    problem: &Path,
    method: SolveMethod,
    out: &Path,
    report: Option<&Path>,
) -> Result<(), Failure> {
    let loaded = load(problem)?;
    let p = &loaded.problem;
    let mut outputs = Outputs::new();
    match method {
        SolveMethod::March => {
            if report.is_some() {
                return Err(Failure::input("--report applies to --method picard only"));
            }
            let sol = march_solve(p).map_err(compute)?;
            outputs.add(out, csv_bytes(&sol.phi)?);
        }
        SolveMethod::Picard => {
            let psi0 = match &loaded.spec.psi {
                Some(text) => sample(text, &loaded.dir, p)?,
                None => GridFunction::zeros(p.grid().clone()),
            };
            let opts = loaded.spec.picard_options(p);
            let (sol, rep) = picard_solve(p, &psi0, opts).map_err(compute)?;
            outputs.add(out, csv_bytes(&sol.phi)?);
            if let Some(path) = report {
                outputs.json(path, &rep)?;
            }
        }
    }
    outputs.write()
}

fn certify(
    problem: &Path,
    psi: Option<&str>,
    mode: CertifyMode,
    omega: Option<&str>,
    out: &Path,
    table: Option<&Path>,
) -> Result<u8, Failure> {
    let loaded = load(problem)?;
    let p = &loaded.problem;
    let psi_text = psi
        .or(loaded.spec.psi.as_deref())
        .ok_or_else(|| Failure::input("no psi given on the command line or in the problem"))?;
    let psi = sample(psi_text, &loaded.dir, p)?;
    let omega = match mode {
        CertifyMode::Hu => None,
        CertifyMode::Hur => {
            let text = omega
                .or(loaded.spec.omega.as_deref())
                .ok_or_else(|| Failure::input("--mode hur needs an omega"))?;
            Some(sample(text, &loaded.dir, p)?)
        }
    };
    let tol = loaded.spec.solver.tol.unwrap_or(DEFAULT_TOL);
    let cert = match &omega {
        None => certify_hyers_ulam(p, &psi, tol),
        Some(w) => certify_rassias(p, &psi, w, tol),
    }
    .map_err(compute)?;

    let mut outputs = Outputs::new();
    outputs.json(out, &cert.summary())?;
    if let Some(path) = table {
        let mut buf = Vec::new();
        write_certificate_table(&mut buf, &cert).map_err(input)?;
        outputs.add(path, buf);
    }
    outputs.write()?;
    Ok(if cert.is_certified() { 0 } else { 4 })
}

fn instability(problem: &Path, horizons: &[f64], out: &Path) -> Result<u8, Failure> {
    let loaded = load(problem)?;
    let record = instability_probe(&loaded.problem, horizons).map_err(compute)?;
    let mut outputs = Outputs::new();
    outputs.json(out, &record)?;
    outputs.write()?;
    Ok(if record.bounds_hold() { 0 } else { 4 })
}

fn exp(timescale: &Path, p: f64, t: f64, t0: f64) -> Result<(), Failure> {
    let text = fs::read_to_string(timescale)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", timescale.display())))?;
    let ts: TimeScale = serde_json::from_str(&text).map_err(Failure::input)?;
    let value = ts.exp(p, t, t0).map_err(Failure::input)?;
    println!("{}", fmt_f64(value));
    Ok(())
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Solve {
            problem,
            method,
            out,
            report,
        } => solve(&problem, method, &out, report.as_deref()).map(|_| 0),
        Command::Certify {
            problem,
            psi,
            mode,
            omega,
            out,
            table,
        } => certify(
            &problem,
            psi.as_deref(),
            mode,
            omega.as_deref(),
            &out,
            table.as_deref(),
        ),
        Command::Instability {
            problem,
            horizons,
            out,
        } => instability(&problem, &horizons, &out),
        Command::Exp { timescale, p, t, t0 } => exp(&timescale, p, t, t0).map(|_| 0),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
