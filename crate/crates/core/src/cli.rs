//! Command-line front end.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::convex_scenes::{LocalVerdict, Scene};
use crate::error::{Error, Result};
use crate::local_global::{cat_check_intrinsic, convexity_verdict, ConnectVerdict, Connector, Verdict};
use crate::model_spaces::{diameter_bound, ModelPoint};
use crate::spherical_trig::{contraction_constant, max_sampled_ratio, SphericalTriangleData};

#[derive(Debug, Parser)]
#[command(name = "catkappa", version, about = "Convexity certificates for subsets of model spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Replace the curvature stored in the scene file
    #[arg(long, allow_negative_numbers = true)]
    pub kappa_override: Option<f64>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Sampling resolution of curves and cell intersections
    #[arg(long, default_value_t = 1e-2)]
    pub resolution: f64,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report file; stdout when absent
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Include wall-clock timings (reports are then no longer reproducible)
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SceneArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// Print the diameter D_k of the model space
    Dkappa {
        #[arg(long, allow_negative_numbers = true)]
        kappa: f64,
    },
    /// Tabulate K(C) and the sampled maximum of c'/c
    KTable {
        #[arg(long, default_value_t = 0.1)]
        cmin: f64,
        #[arg(long, default_value_t = 2.0)]
        cmax: f64,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        /// Grid size of the ratio maximization
        #[arg(long, default_value_t = 60)]
        grid: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Midpoint distance of a triangle on the unit sphere
    Trig {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[arg(long)]
        c: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Check the cells of a scene and its connectedness
    Validate {
        #[command(flatten)]
        scene: SceneArgs,
    },
    /// Test local convexity around sampled member points
    CheckLocal {
        #[command(flatten)]
        scene: SceneArgs,
        #[arg(long, default_value_t = 20)]
        points: usize,
        /// Ball radius; the scene's local radius when absent
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Certify geodesics between member pairs
    Connect {
        #[command(flatten)]
        scene: SceneArgs,
        #[arg(long, default_value_t = 20)]
        pairs: usize,
        /// Start point (comma-separated ambient coordinates)
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, requires = "y")]
        x: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, requires = "x")]
        y: Option<Vec<f64>>,
    },
    /// Decide convexity of the scene
    Verdict {
        #[command(flatten)]
        scene: SceneArgs,
        #[arg(long, default_value_t = 100)]
        pairs: usize,
    },
    /// Compare triangles of the scene with model triangles
    CatCheck {
        #[command(flatten)]
        scene: SceneArgs,
        #[arg(long, default_value_t = 200)]
        triangles: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Dkappa { .. } => "dkappa",
            Command::KTable { .. } => "k-table",
            Command::Trig { .. } => "trig",
            Command::Validate { .. } => "validate",
            Command::CheckLocal { .. } => "check-local",
            Command::Connect { .. } => "connect",
            Command::Verdict { .. } => "verdict",
            Command::CatCheck { .. } => "cat-check",
        }
    }
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_REFUTED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Outcome of one command before it is written out.
struct Outcome {
    passed: bool,
    verdict: Value,
    witnesses: Vec<Value>,
    certificates: Value,
    csv: String,
}

#[derive(Serialize)]
struct Report<'a> {
    command: &'a str,
    config: &'a Command,
    verdict: &'a Value,
    witnesses: &'a [Value],
    certificates: &'a Value,
    timings: Option<Value>,
}

fn check_common(c: &Common) -> Result<()> {
    if !(c.tol > 0.0) || !(c.resolution > 0.0) || c.samples == 0 {
        return Err(Error::InvalidInput("tol, resolution and samples must be positive".into()));
    }
    Ok(())
}

fn read_scene(args: &SceneArgs) -> Result<Scene> {
    let text = std::fs::read_to_string(&args.scene)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", args.scene.display())))?;
    let scene = Scene::from_json(&text)?;
    match args.common.kappa_override {
        Some(k) => scene.with_kappa(k),
        None => Ok(scene),
    }
}

/// Parses a scene file and validates every cell; errors name the cell.
pub fn load_scene(path: &Path, samples: usize, seed: u64) -> Result<Scene> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    let scene = Scene::from_json(&text)?;
    check_cells(&scene, samples, seed)?;
    Ok(scene)
}

fn check_cells(scene: &Scene, samples: usize, seed: u64) -> Result<()> {
    let report = scene.validate(samples, seed);
    for c in &report.cells {
        if !c.nonempty {
            return Err(Error::Scene(format!("cell {} is empty", c.index)));
        }
        if let Some(w) = &c.nonconvex_witness {
            return Err(Error::Scene(format!(
                "cell {} is not convex: midpoint margin {:.3e}",
                c.index, w.margin
            )));
        }
        if c.too_wide {
            return Err(Error::Scene(format!("cell {} spans the diameter bound", c.index)));
        }
    }
    Ok(())
}

fn load_checked(args: &SceneArgs) -> Result<Scene> {
    check_common(&args.common)?;
    let scene = read_scene(args)?;
    check_cells(&scene, args.common.samples, args.common.seed)?;
    Ok(scene)
}

fn point(scene: &Scene, coords: &[f64]) -> Result<ModelPoint> {
    let p = scene.space().point(coords.to_vec())?;
    if !scene.contains(&p)?.inside {
        return Err(Error::InvalidInput(format!("{coords:?} is not a member of the scene")));
    }
    Ok(p)
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("reports serialize")
}

fn k_table(cmin: f64, cmax: f64, steps: usize, grid: usize) -> Result<String> {
    if !(cmin > 0.0 && cmin <= cmax) || steps == 0 {
        return Err(Error::InvalidInput("need 0 < cmin <= cmax and steps > 0".into()));
    }
    let mut out = String::from("C,K,max_ratio\n");
    for i in 0..=steps {
        let c = cmin + (cmax - cmin) * i as f64 / steps as f64;
        let k = contraction_constant(c)?;
        let r = max_sampled_ratio(c, grid)?;
        writeln!(out, "{c},{k},{}", r.ratio).unwrap();
    }
    Ok(out)
}

fn execute(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Dkappa { .. } | Command::KTable { .. } => unreachable!("handled by run"),
        Command::Trig { a, b, c, common } => {
            check_common(common)?;
            let t = SphericalTriangleData::from_sides(*a, *b, *c)?;
            Ok(Outcome {
                passed: true,
                verdict: json!({ "c_prime": t.c_prime }),
                witnesses: Vec::new(),
                certificates: to_value(&t),
                csv: format!("a,b,c,theta,c_prime\n{a},{b},{c},{},{}\n", t.theta, t.c_prime),
            })
        }
        Command::Validate { scene: args } => {
            check_common(&args.common)?;
            let scene = read_scene(args)?;
            let report = scene.validate(args.common.samples, args.common.seed);
            let mut csv = String::from("cell,nonempty,samples,diameter_estimate,convex,too_wide\n");
            for c in &report.cells {
                writeln!(
                    csv,
                    "{},{},{},{},{},{}",
                    c.index,
                    c.nonempty,
                    c.samples,
                    c.diameter_estimate,
                    c.nonconvex_witness.is_none(),
                    c.too_wide
                )
                .unwrap();
            }
            Ok(Outcome {
                passed: report.valid,
                verdict: json!(if report.valid { "valid" } else { "invalid" }),
                witnesses: report.cells.iter().filter_map(|c| c.nonconvex_witness.as_ref()).map(to_value).collect(),
                certificates: to_value(&report),
                csv,
            })
        }
        Command::CheckLocal { scene: args, points, eps } => {
            let scene = load_checked(args)?;
            let radius = match eps {
                Some(e) => *e,
                None => scene.local_eps(args.common.seed).value(),
            };
            let per_point = (args.common.samples / (*points).max(1)).max(50);
            let mut checks = Vec::new();
            let mut csv = String::from("point,verdict,pairs_tested,witness_margin\n");
            for (i, p) in scene.sample_points(*points, args.common.seed).iter().enumerate() {
                let check = scene.local_convexity_check(p, radius, per_point, args.common.seed + i as u64)?;
                let margin = check.witness.as_ref().map_or(String::new(), |w| w.margin.to_string());
                writeln!(csv, "{i},{:?},{},{margin}", check.verdict, check.pairs_tested).unwrap();
                checks.push(check);
            }
            let passed = checks.iter().all(|c| c.verdict == LocalVerdict::Pass);
            Ok(Outcome {
                passed,
                verdict: json!(if passed { "pass" } else { "fail" }),
                witnesses: checks.iter().filter_map(|c| c.witness.as_ref()).map(to_value).collect(),
                certificates: to_value(&checks),
                csv,
            })
        }
        Command::Connect { scene: args, pairs, x, y } => {
            let scene = load_checked(args)?;
            let c = &args.common;
            let connector = Connector::new(&scene, c.resolution, c.tol, c.seed)?;
            let ends: Vec<(ModelPoint, ModelPoint)> = match (x, y) {
                (Some(x), Some(y)) => vec![(point(&scene, x)?, point(&scene, y)?)],
                _ => {
                    let pool = scene.sample_points(2 * *pairs, c.seed);
                    pool.chunks_exact(2).map(|w| (w[0].clone(), w[1].clone())).collect()
                }
            };
            let mut certs = Vec::new();
            let mut csv = String::from("pair,ell,distance,verdict\n");
            for (i, (p, q)) in ends.iter().enumerate() {
                let cert = connector.connect(p, q)?;
                writeln!(csv, "{i},{},{},{:?}", cert.ell, cert.distance, cert.verdict).unwrap();
                certs.push(cert);
            }
            let passed = certs.iter().all(|c| c.verdict == ConnectVerdict::GeodesicInC);
            Ok(Outcome {
                passed,
                verdict: json!(if passed { "geodesic_in_c" } else { "refuted" }),
                witnesses: certs.iter().filter_map(|c| c.witness.as_ref()).map(to_value).collect(),
                certificates: to_value(&certs),
                csv,
            })
        }
        Command::Verdict { scene: args, pairs } => {
            let scene = load_checked(args)?;
            let c = &args.common;
            let report = convexity_verdict(&scene, *pairs, c.resolution, c.tol, c.seed)?;
            let mut witnesses: Vec<Value> = report.witness.iter().map(to_value).collect();
            if let Some(pair) = &report.diameter_witness {
                witnesses.push(to_value(pair));
            }
            let csv = format!(
                "verdict,diameter_estimate,certificates,pair_checks\n{:?},{},{},{}\n",
                report.verdict,
                report.diameter_estimate.map_or(String::new(), |d| d.to_string()),
                report.certificates.len(),
                report.pair_checks.len()
            );
            Ok(Outcome {
                passed: report.verdict == Verdict::Convex,
                verdict: to_value(&report.verdict),
                witnesses,
                certificates: to_value(&report),
                csv,
            })
        }
        Command::CatCheck { scene: args, triangles } => {
            let scene = load_checked(args)?;
            let report = cat_check_intrinsic(&scene, *triangles, args.common.resolution, args.common.seed)?;
            let csv = format!(
                "triangles,comparisons,uncertified,max_excess,violations,passed\n{},{},{},{},{},{}\n",
                report.triangles,
                report.comparisons,
                report.uncertified,
                report.max_excess,
                report.violations.len(),
                report.passed
            );
            Ok(Outcome {
                passed: report.passed,
                verdict: json!(if report.passed { "pass" } else { "fail" }),
                witnesses: report.violations.iter().map(to_value).collect(),
                certificates: to_value(&report),
                csv,
            })
        }
    }
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn common(cmd: &Command) -> Option<&Common> {
    match cmd {
        Command::Trig { common, .. } => Some(common),
        Command::Validate { scene }
        | Command::CheckLocal { scene, .. }
        | Command::Connect { scene, .. }
        | Command::Verdict { scene, .. }
        | Command::CatCheck { scene, .. } => Some(&scene.common),
        _ => None,
    }
}

fn run_inner(cli: &Cli) -> Result<i32> {
    let cmd = &cli.command;
    match cmd {
        Command::Dkappa { kappa } => {
            if !kappa.is_finite() {
                return Err(Error::InvalidSpace(format!("curvature {kappa} must be finite")));
            }
            println!("{}", diameter_bound(*kappa));
            return Ok(EXIT_PASS);
        }
        Command::KTable { cmin, cmax, steps, grid, output } => {
            emit(output.as_deref(), &k_table(*cmin, *cmax, *steps, *grid)?)?;
            return Ok(EXIT_PASS);
        }
        _ => {}
    }
    let opts = common(cmd).expect("scene and trig commands carry common options");
    let start = Instant::now();
    let outcome = execute(cmd)?;
    let text = match opts.format {
        Format::Csv => outcome.csv,
        Format::Json => {
            let report = Report {
                command: cmd.name(),
                config: cmd,
                verdict: &outcome.verdict,
                witnesses: &outcome.witnesses,
                certificates: &outcome.certificates,
                timings: opts.timings.then(|| json!({ "total_ms": start.elapsed().as_secs_f64() * 1e3 })),
            };
            serde_json::to_string_pretty(&report).expect("reports serialize") + "\n"
        }
    };
    emit(opts.output.as_deref(), &text)?;
    Ok(if outcome.passed { EXIT_PASS } else { EXIT_REFUTED })
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match run_inner(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
