//! `jet-extend`: evaluate explicit C^{1,1} extensions of finite 1-jets
//! from the command line.
//!
//! Exit codes are a stable contract:
//! * 2 — parse or validation failure (input files, flags, probe config)
//! * 3 — `eval`/`grid` in convex mode on a field that is not convex-feasible
//! * 4 — `grid` on a field with more than two dimensions
//! * 5 — `certify` produced a failing report

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use jet_extend::convex::ConvexExtensionSpec;
use jet_extend::holder::{self, HolderProbeConfig, ProbeVerdict};
use jet_extend::whitney::{self, WhitneyExtension};
use jet_extend::{BoundingBox, Error, Modulus, TaylorField1};
use jet_extend_cli::{csv_header, csv_row, parse_points_csv, FieldDocument};

#[derive(Parser)]
#[command(name = "jet-extend", version, about = "C^{1,1} extensions of 1-jets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Lasry-Lions double convolution of the affine floor (feasible fields).
    Convex,
    /// Tilted construction: works for every valid field.
    General,
}

#[derive(Subcommand)]
enum Command {
    /// Print K1, K2, Gamma1, the smallest convexity modulus, and mu_bar.
    Constants { field: PathBuf },
    /// Report the smallest convexity modulus (or the infeasibility witness).
    CheckConvexity { field: PathBuf },
    /// Evaluate the extension at points read from a CSV file.
    Eval {
        field: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::General)]
        mode: Mode,
        /// Headerless CSV with one point per row, `dim` columns.
        #[arg(long)]
        points: PathBuf,
        #[arg(long, default_value_t = 0.999999)]
        eps_fraction: f64,
        /// Convexity modulus override (default: smallest admissible).
        #[arg(long)]
        modulus: Option<f64>,
        /// Output CSV path (default: standard output).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate on a lattice over a box (dimensions 1 and 2 only).
    Grid {
        field: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::General)]
        mode: Mode,
        /// Box corners: `dim` lower bounds followed by `dim` upper bounds.
        #[arg(long = "box", num_args = 2.., allow_negative_numbers = true, value_name = "LO.. HI..")]
        bounds: Vec<f64>,
        /// Lattice points per axis (endpoints included).
        #[arg(long, default_value_t = 101)]
        res: usize,
        #[arg(long, default_value_t = 0.999999)]
        eps_fraction: f64,
        #[arg(long)]
        modulus: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sampled certificate: interpolation, gradient Lipschitz constant,
    /// and the almost-minimality ratio.
    Certify {
        field: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sampling box (default: site bounding box with margin 1).
        #[arg(long = "box", num_args = 2.., allow_negative_numbers = true, value_name = "LO.. HI..")]
        bounds: Vec<f64>,
        #[arg(long, default_value_t = 0.999999)]
        eps_fraction: f64,
    },
    /// Grid probe of the sup-inf convolution of the model C^{1,theta}
    /// jet at the origin.
    ProbeHolder {
        #[arg(long)]
        theta: f64,
        #[arg(long, default_value_t = 1.0)]
        modulus: f64,
        /// Gradient of the probe jet at the origin.
        #[arg(long, default_value_t = 1.0)]
        v: f64,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        #[arg(long, default_value_t = 10_000)]
        grid_res: usize,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

fn invalid(err: impl std::fmt::Display) -> Failure {
    Failure::new(2, err.to_string())
}

fn load_field(path: &Path) -> Result<TaylorField1, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    let doc: FieldDocument = serde_json::from_str(&text)
        .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    doc.into_field().map_err(invalid)
}

fn modulus_json(modulus: &Modulus) -> serde_json::Value {
    match modulus.value() {
        Some(m) => json!(m),
        None => json!("infeasible"),
    }
}

fn write_output(out: Option<&Path>, body: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, body)
            .map_err(|e| invalid(format!("{}: {e}", path.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

/// Either evaluator, behind one call surface. Convex-mode construction on
/// an infeasible field is the exit-3 contract.
enum Evaluator {
    Convex(ConvexExtensionSpec),
    General(WhitneyExtension),
}

impl Evaluator {
    fn build(
        field: TaylorField1,
        mode: Mode,
        eps_fraction: f64,
        modulus: Option<f64>,
    ) -> Result<Self, Failure> {
        match mode {
            Mode::Convex => match ConvexExtensionSpec::new(field, modulus, eps_fraction) {
                Ok(spec) => Ok(Evaluator::Convex(spec)),
                Err(err @ Error::Infeasible { .. }) => Err(Failure::new(3, err.to_string())),
                Err(err) => Err(invalid(err)),
            },
            Mode::General => WhitneyExtension::build_with_modulus(field, eps_fraction, modulus)
                .map(Evaluator::General)
                .map_err(invalid),
        }
    }

    fn batch(&self, points: &[Vec<f64>]) -> Result<String, Failure> {
        let dim = match self {
            Evaluator::Convex(spec) => spec.field().dim(),
            Evaluator::General(ext) => ext.base_field().dim(),
        };
        let evals = match self {
            Evaluator::Convex(spec) => spec.extension_batch(points),
            Evaluator::General(ext) => ext.evaluate_batch(points),
        }
        .map_err(|e| Failure::new(1, e.to_string()))?;
        let mut body = csv_header(dim);
        body.push('\n');
        for (point, eval) in points.iter().zip(&evals) {
            body.push_str(&csv_row(point, eval.value, &eval.gradient));
            body.push('\n');
        }
        Ok(body)
    }
}

fn parse_box(bounds: &[f64], dim: usize) -> Result<BoundingBox, Failure> {
    if bounds.len() != 2 * dim {
        return Err(invalid(format!(
            "--box needs {} numbers for a {dim}-dimensional field, got {}",
            2 * dim,
            bounds.len()
        )));
    }
    BoundingBox::new(bounds[..dim].to_vec(), bounds[dim..].to_vec()).map_err(invalid)
}

fn lattice(bbox: &BoundingBox, res: usize) -> Result<Vec<Vec<f64>>, Failure> {
    if res < 2 {
        return Err(invalid(format!("--res must be at least 2, got {res}")));
    }
    let dim = bbox.dim();
    let axis = |k: usize| -> Vec<f64> {
        (0..res)
            .map(|i| {
                bbox.lo()[k] + (bbox.hi()[k] - bbox.lo()[k]) * i as f64 / (res - 1) as f64
            })
            .collect()
    };
    let points = match dim {
        1 => axis(0).into_iter().map(|x| vec![x]).collect(),
        2 => {
            let (xs, ys) = (axis(0), axis(1));
            let mut out = Vec::with_capacity(res * res);
            for &x in &xs {
                for &y in &ys {
                    out.push(vec![x, y]);
                }
            }
            out
        }
        _ => unreachable!("dimension checked before lattice construction"),
    };
    Ok(points)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Constants { field } => {
            let field = load_field(&field)?;
            let constants = field.constants();
            let report = json!({
                "K1": constants.k1,
                "K2": constants.k2,
                "gamma1": constants.gamma1,
                "m_star": modulus_json(&constants.modulus),
                "mu_bar": whitney::mu_bar(constants.k1, constants.k2),
            });
            println!("{report}");
            Ok(())
        }
        Command::CheckConvexity { field } => {
            let field = load_field(&field)?;
            let modulus = field.convexity_modulus();
            let report = match modulus {
                Modulus::Feasible(m) => json!({ "feasible": true, "m_star": m }),
                Modulus::Infeasible { s1, s2, defect } => json!({
                    "feasible": false,
                    "m_star": "infeasible",
                    "witness": { "s1": s1, "s2": s2, "defect": defect },
                }),
            };
            println!("{report}");
            Ok(())
        }
        Command::Eval {
            field,
            mode,
            points,
            eps_fraction,
            modulus,
            out,
        } => {
            let field = load_field(&field)?;
            let text = fs::read_to_string(&points)
                .map_err(|e| invalid(format!("{}: {e}", points.display())))?;
            let queries = parse_points_csv(&text, field.dim())
                .map_err(|e| invalid(format!("{}: {e}", points.display())))?;
            let evaluator = Evaluator::build(field, mode, eps_fraction, modulus)?;
            let body = evaluator.batch(&queries)?;
            write_output(out.as_deref(), &body)
        }
        Command::Grid {
            field,
            mode,
            bounds,
            res,
            eps_fraction,
            modulus,
            out,
        } => {
            let field = load_field(&field)?;
            if field.dim() > 2 {
                return Err(Failure::new(
                    4,
                    format!("grid supports dimensions 1 and 2, field has {}", field.dim()),
                ));
            }
            let bbox = parse_box(&bounds, field.dim())?;
            let points = lattice(&bbox, res)?;
            let evaluator = Evaluator::build(field, mode, eps_fraction, modulus)?;
            let body = evaluator.batch(&points)?;
            write_output(out.as_deref(), &body)
        }
        Command::Certify {
            field,
            samples,
            seed,
            bounds,
            eps_fraction,
        } => {
            let field = load_field(&field)?;
            if samples == 0 {
                return Err(invalid("--samples must be positive"));
            }
            let bbox = if bounds.is_empty() {
                BoundingBox::around_sites(&field, 1.0)
            } else {
                parse_box(&bounds, field.dim())?
            };
            let ext = WhitneyExtension::build(field, eps_fraction).map_err(invalid)?;
            let report = ext
                .certify(samples, seed, &bbox)
                .map_err(|e| Failure::new(1, e.to_string()))?;
            println!("{}", serde_json::to_string(&report).expect("report serializes"));
            if report.pass {
                Ok(())
            } else {
                Err(Failure::new(5, "certification failed".to_string()))
            }
        }
        Command::ProbeHolder {
            theta,
            modulus,
            v,
            eps,
            grid_res,
        } => {
            let cfg =
                HolderProbeConfig::new(theta, modulus, v, eps, grid_res).map_err(invalid)?;
            let result = holder::grid_sup_inf_conv(&cfg);
            let verdict = match holder::verdict(&cfg, &result) {
                ProbeVerdict::Positive => "positive",
                ProbeVerdict::Zero => "zero",
                ProbeVerdict::Inconclusive => "inconclusive",
            };
            let (lambda_star, psi_star) = if theta < 1.0 {
                match holder::find_positive_lambda(&cfg) {
                    Ok(probe) => (json!(probe.lambda_star), json!(probe.psi_star)),
                    Err(_) => (json!(null), json!(null)),
                }
            } else {
                (json!(null), json!(null))
            };
            let report = json!({
                "value": result.value,
                "error_estimate": result.error_estimate,
                "verdict": verdict,
                "lambda_star": lambda_star,
                "psi_star": psi_star,
            });
            println!("{report}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
