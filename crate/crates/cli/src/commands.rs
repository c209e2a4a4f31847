use std::path::PathBuf;
use std::sync::Arc;

use carnot_core::catalog::*;
use carnot_core::group::{CarnotGroup, GroupPoint};
use carnot_core::hypersurface::{GridAxis, GridSpec};
use carnot_core::liealg::{StratifiedAlgebra, Subalgebra};
use carnot_core::metrics::*;
use carnot_core::symbolic::{format_scalar, parse_scalar, parse_scalar_list, Scalar};
use carnot_core::{Error, Result};
use clap::{Args, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::checks::CheckRegistry;

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

/// Algebra given positionally or with --algebra: a family name such as
/// `g8`, `g_mu(1/2)`, `heis(2)`, `heisxR(1)`, inline JSON, or a JSON file.
#[derive(Args, Debug, Clone)]
pub struct AlgebraArg {
    #[arg(value_name = "ALGEBRA")]
    positional: Option<String>,
    #[arg(
        long = "algebra",
        value_name = "ALGEBRA",
        conflicts_with = "positional"
    )]
    flag: Option<String>,
}

impl AlgebraArg {
    pub fn load(&self) -> Result<StratifiedAlgebra> {
        let text = self
            .flag
            .as_deref()
            .or(self.positional.as_deref())
            .ok_or_else(|| Error::Invalid("no algebra given".into()))?;
        load_algebra(text)
    }

    fn group(&self) -> Result<Arc<CarnotGroup>> {
        Ok(Arc::new(CarnotGroup::new(Arc::new(self.load()?))?))
    }
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Jacobi identity, grading and generation report.
    Validate(AlgebraArg),
    /// Bracket of two vectors (comma-separated rationals or a basis label).
    Bracket {
        #[command(flatten)]
        algebra: AlgebraArg,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
    },
    /// Lie subalgebra generated by the given vectors.
    Closure {
        #[command(flatten)]
        algebra: AlgebraArg,
        #[arg(long = "gen", required = true, allow_hyphen_values = true)]
        generators: Vec<String>,
    },
    /// Closure of {X1, X2 + λX0, X3} in g8 with its isomorphism onto g_λ.
    LambdaFamily {
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
    },
    /// Homogeneous dimension.
    Hdim(AlgebraArg),
    /// Exact group product p·q in exponential coordinates.
    Product {
        #[command(flatten)]
        algebra: AlgebraArg,
        #[arg(long, allow_hyphen_values = true)]
        p: String,
        #[arg(long, allow_hyphen_values = true)]
        q: String,
    },
    /// Left-invariant vector fields as polynomial coefficients.
    Fields(AlgebraArg),
    /// Tangent group of a surface at a point.
    Tangent {
        #[arg(long)]
        surface: String,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Exhaustive search for characteristic points on a rational grid.
    ScanChar {
        #[arg(long)]
        surface: String,
        #[arg(long, default_value = "1/2")]
        grid_step: String,
        #[arg(long, default_value = "-1", allow_hyphen_values = true)]
        lo: String,
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        hi: String,
        /// Coordinates to vary (others held at 0); defaults to all but --solve-for.
        #[arg(long, value_delimiter = ',')]
        coords: Option<Vec<usize>>,
        #[arg(long)]
        solve_for: Option<usize>,
        #[arg(long, default_value = "0")]
        tolerance: String,
    },
    /// Growth vector of the induced horizontal distribution.
    Growth {
        #[arg(long)]
        surface: String,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, value_enum, default_value_t = FrameKind::Auto)]
        frame: FrameKind,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    /// Class invariant of g_μ.
    Invariant {
        #[arg(long, allow_hyphen_values = true)]
        mu: String,
    },
    /// Compare two members of the g_μ family through their invariants.
    Classify {
        #[arg(long, allow_hyphen_values = true)]
        mu1: String,
        #[arg(long, allow_hyphen_values = true)]
        mu2: String,
    },
    /// Isomorphism class of the tangent group of S (point as x1..x7, or all of x0..x7).
    #[command(name = "tangent-class-S")]
    TangentClassS {
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Split the kernel of a covector on V1 of heis(n) as heis(n-1) x R.
    DecomposeHyperplane {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        covector: String,
    },
    /// Homogeneous quasi-distance.
    QuasiDist {
        #[command(flatten)]
        algebra: AlgebraArg,
        #[arg(long, allow_hyphen_values = true)]
        p: String,
        #[arg(long, allow_hyphen_values = true)]
        q: String,
    },
    /// Length of an explicit horizontal path from p to q.
    CcUpper {
        #[command(flatten)]
        algebra: AlgebraArg,
        #[arg(long, allow_hyphen_values = true)]
        p: String,
        #[arg(long, allow_hyphen_values = true)]
        q: String,
        #[arg(long, default_value_t = 3)]
        budget: usize,
    },
    /// φ-length and lifted length of a controlled curve on the vertical subgroup.
    LiftLength {
        /// JSON object (inline or file).
        #[arg(long)]
        config: String,
        #[arg(long)]
        grid_step: Option<f64>,
    },
    /// Lifted length against φ-length over a random curve ensemble.
    CompareLength {
        #[arg(long)]
        config: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        grid_step: Option<f64>,
    },
    /// Graph distance against quasi-distance over random pairs in heis(n).
    CompareGraphDist {
        #[arg(long)]
        config: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        grid_step: Option<f64>,
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Run every registered check and report pass/fail.
    PaperSuite {
        /// Run only these check ids.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<String>>,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum FrameKind {
    Auto,
    /// {X1, X2 − x2²X0, X3}, for the surface S.
    S,
    /// The frame built from the horizontal gradient in heis(n).
    Y,
}

/// A report and whether the requested checks passed.
pub struct Outcome {
    pub report: Value,
    pub ok: bool,
}

impl Outcome {
    fn ok(report: Value) -> Self {
        Outcome { report, ok: true }
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn strings(v: &[Scalar]) -> Vec<String> {
    v.iter().map(format_scalar).collect()
}

/// Comma-separated rationals, or a basis label of the algebra.
fn parse_vector(alg: &StratifiedAlgebra, text: &str) -> Result<Vec<Scalar>> {
    if let Some(i) = alg.index_of(text.trim()) {
        return Ok(alg.basis_vector(i));
    }
    let v = parse_scalar_list(text)?;
    if v.len() != alg.dim() {
        return Err(Error::DimensionMismatch {
            expected: alg.dim(),
            found: v.len(),
        });
    }
    Ok(v)
}

fn parse_f64_vector(alg: &StratifiedAlgebra, text: &str) -> Result<Vec<f64>> {
    Ok(parse_vector(alg, text)?
        .iter()
        .map(carnot_core::symbolic::to_f64)
        .collect())
}

fn named_terms(alg: &StratifiedAlgebra, v: &[Scalar]) -> Vec<(String, String)> {
    v.iter()
        .enumerate()
        .filter(|(_, c)| !num_traits::Zero::is_zero(*c))
        .map(|(i, c)| (alg.label(i).to_string(), format_scalar(c)))
        .collect()
}

fn json_input(text: &str) -> Result<Value> {
    let t = text.trim();
    let body = if t.starts_with('{') {
        t.to_string()
    } else {
        std::fs::read_to_string(PathBuf::from(t))?
    };
    Ok(serde_json::from_str(&body)?)
}

fn grid_steps(lo: &Scalar, hi: &Scalar, step: &Scalar) -> Result<usize> {
    if step <= &Scalar::from_integer(0.into()) || hi < lo {
        return Err(Error::Invalid("need step > 0 and lo ≤ hi".into()));
    }
    let count = ((hi - lo) / step).floor().to_integer();
    usize::try_from(count)
        .map(|c| c + 1)
        .map_err(|_| Error::Invalid("grid too large".into()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LiftConfig {
    #[serde(default = "default_heis2")]
    algebra: String,
    phi: PhiSpec,
    #[serde(default = "default_lipschitz")]
    lipschitz: f64,
    start: Vec<f64>,
    controls: Vec<ControlSegment>,
    #[serde(default = "default_nodes")]
    nodes_per_unit: usize,
    #[serde(default = "default_step")]
    rk4_step: f64,
}

fn default_heis2() -> String {
    "heis(2)".into()
}
fn default_lipschitz() -> f64 {
    1.0
}
fn default_nodes() -> usize {
    64
}
fn default_step() -> f64 {
    1e-3
}

fn nodes_from_step(step: f64) -> Result<usize> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::Invalid("grid step must be positive".into()));
    }
    Ok(((1.0 / step).round() as usize).max(1))
}

pub fn run(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Validate(a) => {
            let alg = a.load()?;
            let report = alg.validate();
            Ok(Outcome {
                ok: report.is_valid(),
                report: to_value(&report)?,
            })
        }
        Command::Bracket { algebra, x, y } => {
            let alg = algebra.load()?;
            let (u, v) = (parse_vector(&alg, x)?, parse_vector(&alg, y)?);
            let b = alg.bracket(&u, &v)?;
            Ok(Outcome::ok(
                json!({ "x": strings(&u), "y": strings(&v), "bracket": strings(&b), "terms": named_terms(&alg, &b) }),
            ))
        }
        Command::Closure {
            algebra,
            generators,
        } => {
            let alg = Arc::new(algebra.load()?);
            let gens: Vec<Vec<Scalar>> = generators
                .iter()
                .map(|g| parse_vector(&alg, g))
                .collect::<Result<_>>()?;
            let sub = Subalgebra::closure(alg, &gens)?;
            Ok(Outcome::ok(to_value(&sub.report())?))
        }
        Command::LambdaFamily { lambda } => {
            let rep = lambda_family(&parse_scalar(lambda)?)?;
            Ok(Outcome::ok(to_value(&rep)?))
        }
        Command::Hdim(a) => {
            let alg = a.load()?;
            Ok(Outcome::ok(json!({
                "algebra": alg.name(),
                "strata": alg.strata(),
                "homogeneous_dimension": alg.homogeneous_dimension(),
            })))
        }
        Command::Product { algebra, p, q } => {
            let alg = Arc::new(algebra.load()?);
            let a = GroupPoint::new(alg.clone(), parse_vector(&alg, p)?)?;
            let b = GroupPoint::new(alg.clone(), parse_vector(&alg, q)?)?;
            let g = CarnotGroup::new(alg)?;
            let c = g.product(&a, &b)?;
            Ok(Outcome::ok(
                json!({ "p": strings(a.coords()), "q": strings(b.coords()), "product": strings(c.coords()) }),
            ))
        }
        Command::Fields(a) => {
            let g = a.group()?;
            let alg = g.algebra();
            let fields: Vec<Value> = g
                .left_invariant_fields()
                .iter()
                .enumerate()
                .map(|(i, f)| {
                    let comps: serde_json::Map<String, Value> = f
                        .coeffs()
                        .iter()
                        .enumerate()
                        .filter(|(_, c)| !c.is_zero())
                        .map(|(k, c)| (format!("d/d{}", alg.label(k)), json!(c.to_string())))
                        .collect();
                    json!({ "field": alg.label(i), "components": comps })
                })
                .collect();
            Ok(Outcome::ok(
                json!({ "algebra": alg.name(), "coordinates": alg.labels(), "fields": fields }),
            ))
        }
        Command::Tangent { surface, point } => {
            let s = load_surface(surface)?;
            let p = parse_vector(s.group().algebra(), point)?;
            if !s.contains(&p)? {
                return Err(Error::NotOnSurface(format_scalar(&s.value(&p)?)));
            }
            Ok(Outcome::ok(to_value(&s.tangent_group(&p)?)?))
        }
        Command::ScanChar {
            surface,
            grid_step,
            lo,
            hi,
            coords,
            solve_for,
            tolerance,
        } => {
            let s = load_surface(surface)?;
            let n = s.group().dim();
            let (lo, hi, step) = (
                parse_scalar(lo)?,
                parse_scalar(hi)?,
                parse_scalar(grid_step)?,
            );
            let steps = grid_steps(&lo, &hi, &step)?;
            let hi = &lo + &step * Scalar::from_integer((steps - 1).into());
            let coords: Vec<usize> = coords
                .clone()
                .unwrap_or_else(|| (0..n).filter(|&c| Some(c) != *solve_for).collect());
            if let Some(c) = coords.iter().chain(solve_for.iter()).find(|&&c| c >= n) {
                return Err(Error::IndexOutOfRange { index: *c, dim: n });
            }
            let total = (steps as f64).powi(coords.len() as i32);
            if total > 1e7 {
                return Err(Error::Invalid(format!(
                    "grid of {total:.0} points is too large"
                )));
            }
            let grid = GridSpec {
                axes: coords
                    .iter()
                    .map(|&c| GridAxis {
                        coord: c,
                        lo: lo.clone(),
                        hi: hi.clone(),
                        steps,
                    })
                    .collect(),
                tolerance: parse_scalar(tolerance)?,
                solve_for: *solve_for,
            };
            Ok(Outcome::ok(to_value(&s.scan_characteristic(&grid)?)?))
        }
        Command::Growth {
            surface,
            point,
            frame,
            depth,
        } => {
            let s = load_surface(surface)?;
            let p = parse_vector(s.group().algebra(), point)?;
            if !s.contains(&p)? {
                return Err(Error::NotOnSurface(format_scalar(&s.value(&p)?)));
            }
            let kind = match frame {
                FrameKind::Auto if surface.trim() == "S" => FrameKind::S,
                FrameKind::Auto => FrameKind::Y,
                k => *k,
            };
            let fields = match kind {
                FrameKind::S => {
                    if surface.trim() != "S" {
                        return Err(Error::Invalid(
                            "the S frame only applies to the surface S".into(),
                        ));
                    }
                    surface_s_frame(&s)
                }
                _ => s.y_frame(Some(&p))?,
            };
            let growth = s.growth_vector(&fields, &p, *depth)?;
            let full = s.group().dim() - 1;
            Ok(Outcome::ok(json!({
                "frame": format!("{kind:?}").to_lowercase(),
                "growth": growth,
                "bracket_generating": growth.last() == Some(&full),
            })))
        }
        Command::Invariant { mu } => Ok(Outcome::ok(to_value(&invariant_i(&parse_scalar(mu)?))?)),
        Command::Classify { mu1, mu2 } => {
            let (a, b) = (parse_scalar(mu1)?, parse_scalar(mu2)?);
            Ok(Outcome::ok(json!({
                "mu1": to_value(&invariant_i(&a))?,
                "mu2": to_value(&invariant_i(&b))?,
                "classification": classify_147e(&a, &b).to_string(),
            })))
        }
        Command::TangentClassS { point } => {
            let v = parse_scalar_list(point)?;
            let p = match v.len() {
                7 => surface_s_point(&v.try_into().expect("length checked")),
                8 => v,
                k => {
                    return Err(Error::DimensionMismatch {
                        expected: 7,
                        found: k,
                    })
                }
            };
            let rep = tangent_class_of_s(&p)?;
            Ok(Outcome {
                ok: rep.isomorphism_verified,
                report: to_value(&rep)?,
            })
        }
        Command::DecomposeHyperplane { n, covector } => {
            let d = vertical_hyperplane_decomposition(*n, &parse_scalar_list(covector)?)?;
            Ok(Outcome {
                ok: d.verified(),
                report: to_value(&d)?,
            })
        }
        Command::QuasiDist { algebra, p, q } => {
            let alg = Arc::new(algebra.load()?);
            let a = GroupPoint::new(alg.clone(), parse_vector(&alg, p)?)?;
            let b = GroupPoint::new(alg.clone(), parse_vector(&alg, q)?)?;
            let d = QuasiNorm::new(&alg).distance_exact(&a, &b)?;
            Ok(Outcome::ok(json!({ "algebra": alg.name(), "distance": d })))
        }
        Command::CcUpper {
            algebra,
            p,
            q,
            budget,
        } => {
            let g = algebra.group()?;
            let (a, b) = (
                parse_f64_vector(g.algebra(), p)?,
                parse_f64_vector(g.algebra(), q)?,
            );
            let path = cc_upper_bound(&g, &a, &b, *budget)?;
            let quasi = QuasiNorm::new(g.algebra()).distance(&g, &a, &b);
            Ok(Outcome::ok(
                json!({ "budget": budget, "quasi_distance": quasi, "path": to_value(&path)? }),
            ))
        }
        Command::LiftLength { config, grid_step } => {
            let mut cfg: LiftConfig = serde_json::from_value(json_input(config)?)?;
            if let Some(h) = grid_step {
                cfg.nodes_per_unit = nodes_from_step(*h)?;
            }
            let group = Arc::new(CarnotGroup::new(Arc::new(load_algebra(&cfg.algebra)?))?);
            let form = group
                .step2()
                .ok_or_else(|| Error::Unsupported("lift length needs a step-2 group".into()))?;
            let m = form.m();
            let setup =
                Step2GraphSetup::new(group, cfg.phi.build(m, form.vertical_dim())?, cfg.lipschitz)?;
            let curve = setup.integrate_horizontal(
                &cfg.start,
                &cfg.controls,
                cfg.nodes_per_unit,
                cfg.rk4_step,
            )?;
            Ok(Outcome::ok(json!({
                "phi_length": curve.phi_length(),
                "coordinate_length": curve.coordinate_length(m),
                "lift_length": setup.graph_lift_length(&curve, 1),
                "endpoint": curve.endpoint(),
                "nodes": curve.nodes.len(),
            })))
        }
        Command::CompareLength {
            config,
            seed,
            grid_step,
        } => {
            let mut cfg: LengthExperimentConfig = match config {
                Some(c) => serde_json::from_value(json_input(c)?)?,
                None => LengthExperimentConfig::default(),
            };
            if let Some(s) = seed {
                cfg.seed = *s;
            }
            if let Some(h) = grid_step {
                cfg.nodes_per_unit = nodes_from_step(*h)?;
            }
            let r = length_comparison_experiment(&cfg)?;
            Ok(Outcome {
                ok: r.pass,
                report: to_value(&r)?,
            })
        }
        Command::CompareGraphDist {
            config,
            seed,
            grid_step,
            budget,
        } => {
            let mut cfg: GraphDistanceConfig = match config {
                Some(c) => serde_json::from_value(json_input(c)?)?,
                None => GraphDistanceConfig::default(),
            };
            if let Some(s) = seed {
                cfg.seed = *s;
            }
            if let Some(h) = grid_step {
                cfg.nodes_per_unit = nodes_from_step(*h)?;
            }
            if let Some(b) = budget {
                cfg.budget = *b;
            }
            let r = graph_distance_experiment(&cfg)?;
            Ok(Outcome {
                ok: r.pass,
                report: to_value(&r)?,
            })
        }
        Command::PaperSuite { only } => {
            let registry = CheckRegistry::default();
            if let Some(ids) = only {
                if let Some(bad) = ids.iter().find(|id| registry.get(id).is_none()) {
                    return Err(Error::Invalid(format!("unknown check {bad:?}")));
                }
            }
            let mut rows = Vec::new();
            let mut all = true;
            for check in registry.iter() {
                if only
                    .as_ref()
                    .is_some_and(|ids| !ids.iter().any(|id| id == check.id()))
                {
                    continue;
                }
                let (pass, detail) = match check.run() {
                    Ok(o) => (o.pass, o.detail),
                    Err(e) => (false, json!({ "error": e.to_string() })),
                };
                all &= pass;
                rows.push(json!({ "id": check.id(), "title": check.title(), "pass": pass, "detail": detail }));
            }
            Ok(Outcome {
                ok: all,
                report: json!({ "checks": rows, "all_pass": all }),
            })
        }
    }
}
