//! `crlab`: constant reports, certification suites, bisection studies and
//! adaptive runs from the command line.
//!
//! Exit codes: 0 everything passed, 2 a certification failed, 3 bad input
//! (usage, files, domain of the formulas), 4 numerical breakdown.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crlab_core::afem::{afem_run, AfemConfig, AfemHistory, Method};
use crlab_core::constants::{self, evaluate_constants, ConstantsDocument, ConstantsInput};
use crlab_core::fem::Load;
use crlab_core::mesh::{
    diameter_study, load_mesh, mesh_metrics, presets, reference_tetrahedron, DiameterRound, GeoSimplex,
    Triangulation,
};
use crlab_core::verify::suite::random_triangle;
use crlab_core::verify::{run_suite, SuiteConfig, MARGIN_TOL};
use crlab_core::Error;

const SCHEMA: &str = "crlab-report/1";

#[derive(Parser, Debug)]
#[command(name = "crlab", version, about = "Explicit constants and certified inequalities for P1 and Crouzeix-Raviart elements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate every constant from a mesh or from manual inputs.
    Constants(ConstantsArgs),
    /// Run the certification suite.
    Verify(VerifyArgs),
    /// Largest diameters under repeated uniform bisection.
    BisectStudy(StudyArgs),
    /// Adaptive finite element runs with axiom checks.
    Afem(AfemArgs),
}

#[derive(Args, Debug, Clone)]
struct MeshSource {
    /// Mesh file (JSON).
    #[arg(long, conflicts_with = "preset")]
    mesh: Option<PathBuf>,
    /// Built-in mesh: unit-square, right-isosceles-square, l-shape, triangle, square-with-hole.
    #[arg(long)]
    preset: Option<String>,
    /// Cells per unit length for the preset.
    #[arg(long, default_value_t = 1)]
    level: usize,
}

impl MeshSource {
    fn load(&self) -> Result<Option<Triangulation>, Error> {
        match (&self.mesh, &self.preset) {
            (Some(path), _) => load_mesh(path).map(Some),
            (None, Some(name)) => presets::preset(name, self.level).map(Some),
            (None, None) => Ok(None),
        }
    }
}

#[derive(Args, Debug)]
struct ConstantsArgs {
    #[command(flatten)]
    source: MeshSource,
    /// Minimal angle in radians (manual input).
    #[arg(long, conflicts_with = "omega0_deg")]
    omega0: Option<f64>,
    /// Minimal angle in degrees (manual input).
    #[arg(long)]
    omega0_deg: Option<f64>,
    #[arg(long, default_value_t = 8)]
    m_int: usize,
    #[arg(long, default_value_t = 4)]
    m_bd: usize,
    #[arg(long, default_value_t = 1.0)]
    h_max: f64,
    #[arg(long, default_value_t = 1.0)]
    width: f64,
    #[arg(long, default_value_t = 2.0)]
    c_quot: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value_t = MARGIN_TOL)]
    tol: f64,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct StudyArgs {
    #[arg(long, default_value_t = 3)]
    dim: usize,
    /// Bisection rounds; defaults to 3 for triangles and 7 for tetrahedra.
    #[arg(long)]
    rounds: Option<usize>,
    /// Random triangles for dim 2.
    #[arg(long, default_value_t = 50)]
    triangles: usize,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AfemArgs {
    #[command(flatten)]
    source: MeshSource,
    /// cfem or crfem.
    #[arg(long, default_value = "crfem")]
    method: String,
    /// Bulk parameters, comma separated; `theta0` uses the guaranteed value.
    #[arg(long, value_delimiter = ',', default_value = "0.3")]
    theta: Vec<String>,
    #[arg(long, default_value_t = 20_000)]
    max_ndof: usize,
    #[arg(long, default_value_t = 50)]
    max_iterations: usize,
    /// Refine every element instead of bulk marking.
    #[arg(long)]
    uniform: bool,
    /// Skip the axiom checks on consecutive pairs.
    #[arg(long)]
    no_axioms: bool,
    /// Constant right-hand side.
    #[arg(long, default_value_t = 1.0)]
    load: f64,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// CSV file for one θ, directory for several.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure that is not an error of the library.
#[derive(Debug)]
enum Outcome {
    Pass,
    CertificationFailed,
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(p, text)?;
            Ok(())
        }
        None => {
            // a closed pipe (e.g. `| head`) is not an error
            let _ = writeln!(io::stdout().lock(), "{text}");
            Ok(())
        }
    }
}

fn cmd_constants(args: &ConstantsArgs) -> Result<Outcome, Error> {
    let input = match args.source.load()? {
        Some(mesh) => ConstantsInput::from_metrics(&mesh_metrics(&mesh)?),
        None => {
            let omega0 = args
                .omega0
                .or(args.omega0_deg.map(f64::to_radians))
                .ok_or_else(|| Error::Precondition("give --mesh, --preset or --omega0/--omega0-deg".into()))?;
            ConstantsInput {
                n: 2,
                omega0,
                m_int: args.m_int,
                m_bd: args.m_bd,
                h_max: args.h_max,
                domain_width: args.width,
                c_quot: args.c_quot,
                max_abs_cos: None,
            }
        }
    };
    let doc = ConstantsDocument::new(&input)?;
    let mut value = serde_json::to_value(&doc)?;
    value["schema"] = json!(SCHEMA);
    write_or_print(args.out.as_deref(), &serde_json::to_string_pretty(&value)?)?;
    Ok(Outcome::Pass)
}

fn cmd_verify(args: &VerifyArgs) -> Result<Outcome, Error> {
    let report = run_suite(&SuiteConfig { seed: args.seed, tol: args.tol })?;
    let value = json!({
        "schema": SCHEMA,
        "seed": args.seed,
        "tol": args.tol,
        "passed": report.all_passed(),
        "results": report.results,
    });
    write_or_print(args.out.as_deref(), &serde_json::to_string_pretty(&value)?)?;
    let failures: Vec<_> = report.failures().collect();
    if failures.is_empty() {
        Ok(Outcome::Pass)
    } else {
        eprintln!("{}", serde_json::to_string(&json!({ "failures": failures }))?);
        Ok(Outcome::CertificationFailed)
    }
}

#[derive(Serialize)]
struct StudyCase {
    case: String,
    rounds: Vec<DiameterRound>,
    halved: bool,
}

fn cmd_bisect_study(args: &StudyArgs) -> Result<Outcome, Error> {
    let rounds = match args.rounds {
        Some(r) => r,
        None => constants::bisection_rounds(args.dim)?,
    };
    let mut cases = Vec::new();
    match args.dim {
        2 => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            for i in 0..args.triangles {
                let t = GeoSimplex::new(random_triangle(&mut rng), 0)?;
                cases.push((format!("triangle-{i:03}"), t));
            }
        }
        3 => {
            for tag in 0..3u8 {
                cases.push((format!("reference-tetrahedron-type-{tag}"), reference_tetrahedron(tag)?));
            }
        }
        d => return Err(Error::UnsupportedDimension { dim: d, operation: "bisection study" }),
    }
    let table: Vec<StudyCase> = cases
        .into_iter()
        .map(|(case, s)| {
            let rounds = diameter_study(&s, rounds)?;
            let halved = rounds.last().is_some_and(|r| r.ratio <= 0.5 + 1e-12);
            Ok(StudyCase { case, rounds, halved })
        })
        .collect::<Result<_, Error>>()?;
    let passed = table.iter().all(|c| c.halved);
    let value = json!({ "schema": SCHEMA, "dim": args.dim, "rounds": rounds, "passed": passed, "cases": table });
    write_or_print(args.out.as_deref(), &serde_json::to_string_pretty(&value)?)?;
    if passed {
        Ok(Outcome::Pass)
    } else {
        let failed: Vec<&str> = table.iter().filter(|c| !c.halved).map(|c| c.case.as_str()).collect();
        eprintln!("{}", serde_json::to_string(&json!({ "failures": failed }))?);
        Ok(Outcome::CertificationFailed)
    }
}

fn parse_theta(token: &str, theta0: f64) -> Result<f64, Error> {
    if token.eq_ignore_ascii_case("theta0") {
        return Ok(theta0);
    }
    token.trim().parse::<f64>().map_err(|_| Error::Precondition(format!("bad bulk parameter '{token}'")))
}

fn cmd_afem(args: &AfemArgs) -> Result<Outcome, Error> {
    let method: Method = args.method.parse()?;
    let mesh = match args.source.load()? {
        Some(m) => m,
        None => presets::l_shape(args.source.level)?,
    };
    let consts = evaluate_constants(&ConstantsInput::from_metrics(&mesh_metrics(&mesh)?))?;
    let theta0 = match method {
        Method::Cfem => consts.theta0_cfem,
        Method::Crfem => consts.theta0_crfem,
    };
    let thetas: Vec<f64> = args.theta.iter().map(|t| parse_theta(t, theta0)).collect::<Result<_, _>>()?;
    let mesh = Arc::new(mesh);
    let load = Load::Constant(args.load);
    let runs: Vec<(f64, AfemHistory)> = thetas
        .par_iter()
        .map(|&theta| {
            let config = AfemConfig {
                theta,
                max_ndof: args.max_ndof,
                max_iterations: args.max_iterations,
                check_axioms: !args.no_axioms,
                uniform: args.uniform,
            };
            afem_run(mesh.clone(), &load, method, &config).map(|h| (theta, h))
        })
        .collect::<Result<_, _>>()?;

    let mut failed = Vec::new();
    for (i, (theta, h)) in runs.iter().enumerate() {
        let csv = h.to_csv()?;
        let meta = json!({
            "schema": SCHEMA,
            "method": method,
            "theta": theta,
            "theta0": theta0,
            "mesh": mesh.label(),
            "initial_refinement_edges": "criss-cross cells bisect towards the cell centre; loaded meshes keep their stored tags",
            "rate_last5": h.rate(5),
            "axioms_hold": h.axioms_hold(args.tol),
        });
        match (&args.out, runs.len()) {
            (Some(p), 1) => {
                write_or_print(Some(p), &csv)?;
                write_or_print(Some(&p.with_extension("json")), &serde_json::to_string_pretty(&meta)?)?;
            }
            (Some(dir), _) => {
                let stem = format!("afem_{method}_{i}");
                write_or_print(Some(&dir.join(format!("{stem}.csv"))), &csv)?;
                write_or_print(Some(&dir.join(format!("{stem}.json"))), &serde_json::to_string_pretty(&meta)?)?;
            }
            (None, _) => {
                let _ = io::stdout().lock().write_all(csv.as_bytes());
            }
        }
        for (k, c) in h.checks.iter().enumerate() {
            if !c.a1_holds(args.tol) {
                failed.push(json!({ "theta": theta, "pair": k, "axiom": "estimator stability", "lhs": c.a1_lhs, "rhs": c.a1_rhs }));
            }
            if !c.a3_holds(args.tol) {
                failed.push(json!({ "theta": theta, "pair": k, "axiom": "discrete reliability", "lhs": c.a3_lhs, "rhs": c.a3_rhs }));
            }
        }
    }
    if failed.is_empty() {
        Ok(Outcome::Pass)
    } else {
        eprintln!("{}", serde_json::to_string(&json!({ "failures": failed }))?);
        Ok(Outcome::CertificationFailed)
    }
}

fn error_code(e: &Error) -> u8 {
    if e.is_numerical() {
        4
    } else {
        3
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Constants(a) => cmd_constants(a),
        Command::Verify(a) => cmd_verify(a),
        Command::BisectStudy(a) => cmd_bisect_study(a),
        Command::Afem(a) => cmd_afem(a),
    };
    match result {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::CertificationFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_code(&e))
        }
    }
}
