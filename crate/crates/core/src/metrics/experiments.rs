//! Ensemble experiments on intrinsic graphs: lifted length against φ-length,
//! and graph distance against ambient quasi-distance in Heisenberg groups.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{load_algebra, make_heisenberg};
use crate::error::{Error, Result};
use crate::group::CarnotGroup;
use crate::metrics::cc::CcPlanner;
use crate::metrics::step2::{ControlSegment, HorizontalCurve, Step2GraphSetup};
use crate::symbolic::{parse_scalar, to_f64, MultiPoly, Scalar, TermSpec};

pub const THREADS_ENV: &str = "CARNOT_KIT_THREADS";

/// Runs `f` on a rayon pool capped by `CARNOT_KIT_THREADS` when set.
pub fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
    {
        if n > 0 {
            builder = builder.num_threads(n);
        }
    }
    match builder.build() {
        Ok(pool) => pool.install(f),
        Err(e) => {
            log::warn!("falling back to the global pool: {e}");
            f()
        }
    }
}

fn item_rng(seed: u64, idx: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(idx as u64);
    rng
}

/// Graph function on 𝕎, either linear in (x₂, …, x_m) or a general polynomial.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum PhiSpec {
    Linear(Vec<String>),
    Terms(Vec<TermSpec>),
}

impl PhiSpec {
    /// Polynomial in the m − 1 + r coordinates of 𝕎.
    pub fn build(&self, m: usize, r: usize) -> Result<MultiPoly> {
        let nw = m - 1 + r;
        match self {
            PhiSpec::Linear(c) => {
                if c.len() != m - 1 {
                    return Err(Error::DimensionMismatch {
                        expected: m - 1,
                        found: c.len(),
                    });
                }
                let mut p = MultiPoly::zero(nw);
                for (i, s) in c.iter().enumerate() {
                    p = &p + &MultiPoly::var(nw, i).scale(&parse_scalar(s)?);
                }
                Ok(p)
            }
            PhiSpec::Terms(t) => MultiPoly::from_terms(nw, t),
        }
    }

    pub fn linear_coefficients(&self) -> Option<Result<Vec<Scalar>>> {
        match self {
            PhiSpec::Linear(c) => Some(c.iter().map(|s| parse_scalar(s)).collect()),
            PhiSpec::Terms(_) => None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

pub fn histogram(values: &[f64], bins: usize) -> Vec<HistogramBin> {
    if values.is_empty() || bins == 0 {
        return vec![];
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo {
        (hi - lo) / bins as f64
    } else {
        1.0
    };
    let mut out: Vec<HistogramBin> = (0..bins)
        .map(|b| HistogramBin {
            lo: lo + b as f64 * width,
            hi: lo + (b + 1) as f64 * width,
            count: 0,
        })
        .collect();
    for &v in values {
        let b = (((v - lo) / width) as usize).min(bins - 1);
        out[b].count += 1;
    }
    out
}

fn relative_change(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn default_phi() -> PhiSpec {
    PhiSpec::Linear(vec!["1/2".into(), "-1/3".into(), "2/5".into()])
}

fn default_tolerance() -> f64 {
    0.05
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LengthExperimentConfig {
    #[serde(default = "LengthExperimentConfig::default_algebra")]
    pub algebra: String,
    #[serde(default = "default_phi")]
    pub phi: PhiSpec,
    #[serde(default = "LengthExperimentConfig::default_lipschitz")]
    pub lipschitz: f64,
    #[serde(default = "LengthExperimentConfig::default_curves")]
    pub curves: usize,
    #[serde(default = "LengthExperimentConfig::default_segments")]
    pub segments: usize,
    /// Bound K on the Euclidean norm of the controls.
    #[serde(default = "LengthExperimentConfig::default_max_control")]
    pub max_control: f64,
    #[serde(default = "LengthExperimentConfig::default_nodes")]
    pub nodes_per_unit: usize,
    #[serde(default = "LengthExperimentConfig::default_refine")]
    pub refine: usize,
    #[serde(default = "LengthExperimentConfig::default_step")]
    pub rk4_step: f64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub seed: u64,
}

impl LengthExperimentConfig {
    fn default_algebra() -> String {
        "heis(2)".into()
    }
    fn default_lipschitz() -> f64 {
        1.0
    }
    fn default_curves() -> usize {
        100
    }
    fn default_segments() -> usize {
        4
    }
    fn default_max_control() -> f64 {
        1.0
    }
    fn default_nodes() -> usize {
        32
    }
    fn default_refine() -> usize {
        4
    }
    fn default_step() -> f64 {
        1e-3
    }
}

impl Default for LengthExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LengthItem {
    pub index: usize,
    pub phi_length: f64,
    pub lift_base: f64,
    pub lift_refined: f64,
    pub ratio_base: f64,
    pub ratio_refined: f64,
    /// Largest difference quotient of s ↦ φ(γ̃(s)) at the refined resolution.
    pub lprime: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LengthExperimentResult {
    pub config: LengthExperimentConfig,
    pub items: Vec<LengthItem>,
    pub excluded: usize,
    pub lipschitz_violations: usize,
    pub empirical_lipschitz: f64,
    pub max_ratio_base: f64,
    pub max_ratio_refined: f64,
    pub relative_change: f64,
    pub histogram: Vec<HistogramBin>,
    pub lprime_empirical: f64,
    /// |c|·K, available when φ is linear in the first-stratum coordinates.
    pub lprime_bound: Option<f64>,
    pub bounded: bool,
    pub stable: bool,
    pub lprime_ok: bool,
    pub pass: bool,
}

fn random_controls(rng: &mut ChaCha8Rng, count: usize, dim: usize, k: f64) -> Vec<ControlSegment> {
    (0..count)
        .map(|_| {
            let dir: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
            let mag = k * rng.gen_range(0.2..1.0);
            ControlSegment {
                duration: rng.gen_range(0.1..1.0),
                a: dir.iter().map(|x| x / norm * mag).collect(),
            }
        })
        .collect()
}

fn lprime_along(setup: &Step2GraphSetup, curve: &HorizontalCurve) -> f64 {
    curve
        .nodes
        .windows(2)
        .zip(curve.times.windows(2))
        .filter(|(_, t)| t[1] > t[0])
        .map(|(w, t)| (setup.phi_at(&w[1]) - setup.phi_at(&w[0])).abs() / (t[1] - t[0]))
        .fold(0.0, f64::max)
}

/// Lifted length Φ(γ̃) against ℓ_φ(γ̃) over random bounded-control curves.
pub fn length_comparison_experiment(
    cfg: &LengthExperimentConfig,
) -> Result<LengthExperimentResult> {
    let group = Arc::new(CarnotGroup::new(Arc::new(load_algebra(&cfg.algebra)?))?);
    let form = group
        .step2()
        .ok_or_else(|| Error::Unsupported("length comparison needs a step-2 group".into()))?;
    let (m, r) = (form.m(), form.vertical_dim());
    let setup = Step2GraphSetup::new(group, cfg.phi.build(m, r)?, cfg.lipschitz)?;
    if cfg.refine == 0 || !(cfg.max_control > 0.0) {
        return Err(Error::Invalid(
            "refine and max_control must be positive".into(),
        ));
    }

    let curves: Vec<(Vec<f64>, Vec<ControlSegment>)> = (0..cfg.curves)
        .map(|i| {
            let mut rng = item_rng(cfg.seed, i);
            let start = setup.random_w(&mut rng, 1.0);
            (
                start,
                random_controls(&mut rng, cfg.segments, m - 1, cfg.max_control),
            )
        })
        .collect();

    let evaluated: Vec<Result<(LengthItem, Vec<Vec<f64>>)>> = with_thread_cap(|| {
        curves
            .par_iter()
            .enumerate()
            .map(|(i, (start, controls))| {
                let base = setup.integrate_horizontal(
                    start,
                    controls,
                    cfg.nodes_per_unit,
                    cfg.rk4_step,
                )?;
                let fine = setup.integrate_horizontal(
                    start,
                    controls,
                    cfg.nodes_per_unit * cfg.refine,
                    cfg.rk4_step,
                )?;
                let phi_length = base.phi_length();
                let lift_base = setup.graph_lift_length(&base, 1);
                let lift_refined = setup.graph_lift_length(&fine, 1);
                let stride = (base.nodes.len() / 8).max(1);
                let footprint = base.nodes.iter().step_by(stride).cloned().collect();
                Ok((
                    LengthItem {
                        index: i,
                        phi_length,
                        lift_base,
                        lift_refined,
                        ratio_base: lift_base / phi_length,
                        ratio_refined: lift_refined / phi_length,
                        lprime: lprime_along(&setup, &fine),
                    },
                    footprint,
                ))
            })
            .collect()
    });

    let mut items = Vec::new();
    let mut footprint = Vec::new();
    let mut excluded = 0;
    for e in evaluated {
        let (item, fp) = e?;
        footprint.extend(fp);
        if item.phi_length > 0.0 {
            items.push(item);
        } else {
            excluded += 1;
        }
    }
    // Cap the pairwise check at a few hundred points.
    let stride = (footprint.len() / 300).max(1);
    let footprint: Vec<Vec<f64>> = footprint.into_iter().step_by(stride).collect();
    let lip = setup.intrinsic_lipschitz_check(&footprint);

    let max_ratio_base = items.iter().map(|i| i.ratio_base).fold(0.0, f64::max);
    let max_ratio_refined = items.iter().map(|i| i.ratio_refined).fold(0.0, f64::max);
    let change = relative_change(max_ratio_base, max_ratio_refined);
    let lprime_empirical = items.iter().map(|i| i.lprime).fold(0.0, f64::max);
    let lprime_bound = match cfg.phi.linear_coefficients() {
        Some(c) => {
            let c = c?;
            Some(c.iter().map(|x| to_f64(x).powi(2)).sum::<f64>().sqrt() * cfg.max_control)
        }
        None => None,
    };
    let bounded = max_ratio_refined.is_finite() && !items.is_empty();
    let stable = change < cfg.tolerance;
    let lprime_ok = lprime_empirical.is_finite()
        && lprime_bound.map_or(true, |b| lprime_empirical <= b * (1.0 + 1e-9));
    let ratios: Vec<f64> = items.iter().map(|i| i.ratio_refined).collect();
    let pass = bounded && stable && lprime_ok && lip.violations.is_empty();
    Ok(LengthExperimentResult {
        config: cfg.clone(),
        histogram: histogram(&ratios, 10),
        items,
        excluded,
        lipschitz_violations: lip.violations.len(),
        empirical_lipschitz: lip.empirical_constant,
        max_ratio_base,
        max_ratio_refined,
        relative_change: change,
        lprime_empirical,
        lprime_bound,
        bounded,
        stable,
        lprime_ok,
        pass,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDistanceConfig {
    #[serde(default = "GraphDistanceConfig::default_n")]
    pub n: usize,
    /// Defaults to a fixed linear φ in 2n − 1 coefficients.
    #[serde(default)]
    pub phi: Option<PhiSpec>,
    #[serde(default = "LengthExperimentConfig::default_lipschitz")]
    pub lipschitz: f64,
    #[serde(default = "GraphDistanceConfig::default_pairs")]
    pub pairs: usize,
    #[serde(default = "GraphDistanceConfig::default_scales")]
    pub scales: Vec<f64>,
    #[serde(default = "LengthExperimentConfig::default_nodes")]
    pub nodes_per_unit: usize,
    #[serde(default = "LengthExperimentConfig::default_refine")]
    pub refine: usize,
    #[serde(default = "LengthExperimentConfig::default_step")]
    pub rk4_step: f64,
    #[serde(default = "GraphDistanceConfig::default_budget")]
    pub budget: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub seed: u64,
}

impl GraphDistanceConfig {
    fn default_n() -> usize {
        2
    }
    fn default_pairs() -> usize {
        50
    }
    fn default_scales() -> Vec<f64> {
        vec![0.1, 1.0, 4.0]
    }
    fn default_budget() -> usize {
        2
    }
}

impl Default for GraphDistanceConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PairItem {
    pub index: usize,
    pub scale: f64,
    pub quasi_distance: f64,
    pub phi_length: f64,
    pub upper_base: f64,
    pub upper_refined: f64,
    pub ratio_base: f64,
    pub ratio_refined: f64,
    /// max over the first leg of |τ(s) − τ(0) − φ(start)·s| − L′s²; nonpositive when the bound holds.
    pub tau_excess: f64,
    pub endpoint_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GraphDistanceResult {
    pub config: GraphDistanceConfig,
    pub items: Vec<PairItem>,
    pub excluded: usize,
    pub lprime: f64,
    pub max_ratio_base: f64,
    pub max_ratio_refined: f64,
    pub relative_change: f64,
    pub histogram: Vec<HistogramBin>,
    pub max_tau_excess: f64,
    pub max_endpoint_error: f64,
    pub bounded: bool,
    pub stable: bool,
    pub tau_ok: bool,
    pub pass: bool,
}

/// Two-leg connecting curve on 𝕎 ⊂ ℍⁿ: first along D_{n+1}^φ, then a horizontal
/// path in the copy of ℍⁿ⁻¹ spanned by the remaining coordinates, where D_j^φ = X_j.
pub struct GraphConnector {
    setup: Step2GraphSetup,
    n: usize,
    planner: CcPlanner,
    budget: usize,
}

impl GraphConnector {
    pub fn new(setup: Step2GraphSetup, budget: usize) -> Result<Self> {
        let n = setup
            .group()
            .algebra()
            .heisenberg_rank()
            .ok_or_else(|| Error::Unsupported("connector needs a Heisenberg group".into()))?;
        if n < 2 {
            return Err(Error::Unsupported("connector needs ℍⁿ with n ≥ 2".into()));
        }
        let sub = Arc::new(CarnotGroup::new(Arc::new(make_heisenberg(n - 1)?))?);
        Ok(GraphConnector {
            setup,
            n,
            planner: CcPlanner::new(sub)?,
            budget,
        })
    }

    pub fn setup(&self) -> &Step2GraphSetup {
        &self.setup
    }

    /// ℍⁿ⁻¹ coordinates of a 𝕎 point: drop x_{n+1}.
    fn project(&self, w: &[f64]) -> Vec<f64> {
        (0..w.len())
            .filter(|&i| i != self.n - 1)
            .map(|i| w[i])
            .collect()
    }

    /// Controls for both legs; the first leg is always the first segment.
    pub fn controls(&self, wa: &[f64], wb: &[f64]) -> Result<Vec<ControlSegment>> {
        let n = self.n;
        let k = n - 1;
        let mut a = vec![0.0; 2 * n - 1];
        let dx = wb[k] - wa[k];
        a[k] = if dx < 0.0 { -1.0 } else { 1.0 };
        let mut controls = vec![ControlSegment {
            duration: dx.abs(),
            a,
        }];
        let first = self.setup.integrate_horizontal(wa, &controls, 1, 1e-3)?;
        let path = self.planner.upper_bound(
            &self.project(first.endpoint()),
            &self.project(wb),
            self.budget,
        )?;
        for v in path.segments {
            let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if len == 0.0 {
                continue;
            }
            let mut a = vec![0.0; 2 * n - 1];
            for (t, vt) in v.iter().enumerate() {
                a[if t < k { t } else { t + 1 }] = vt / len;
            }
            controls.push(ControlSegment { duration: len, a });
        }
        Ok(controls)
    }
}

/// Graph distance proxy against ambient quasi-distance for random pairs on graph(φ).
pub fn graph_distance_experiment(cfg: &GraphDistanceConfig) -> Result<GraphDistanceResult> {
    let n = cfg.n;
    if n < 2 {
        return Err(Error::Unsupported(
            "graph distance comparison needs ℍⁿ with n ≥ 2".into(),
        ));
    }
    if cfg.scales.is_empty() || cfg.refine == 0 {
        return Err(Error::Invalid(
            "scales must be non-empty and refine positive".into(),
        ));
    }
    let group = Arc::new(CarnotGroup::new(Arc::new(make_heisenberg(n)?))?);
    let phi_spec = match &cfg.phi {
        Some(p) => p.clone(),
        None => PhiSpec::Linear(
            (0..2 * n - 1)
                .map(|i| ["1/2", "-1/3", "2/5", "1/4"][i % 4].to_string())
                .collect(),
        ),
    };
    let setup = Step2GraphSetup::new(group, phi_spec.build(2 * n, 1)?, cfg.lipschitz)?;
    let connector = GraphConnector::new(setup, cfg.budget)?;
    let setup = connector.setup();
    // L′ on the first leg, whose control is a unit vector along x_{n+1}.
    let linear_lprime = match phi_spec.linear_coefficients() {
        Some(c) => Some(to_f64(&c?[n - 1]).abs()),
        None => None,
    };
    let nw = setup.w_dim();

    let pairs: Vec<(f64, Vec<f64>, Vec<f64>)> = (0..cfg.pairs)
        .map(|i| {
            let mut rng = item_rng(cfg.seed, i);
            let scale = cfg.scales[i % cfg.scales.len()];
            let wa = setup.random_w(&mut rng, 1.0);
            let wb: Vec<f64> = (0..nw)
                .map(|c| {
                    let d = if c < nw - 1 { scale } else { scale * scale };
                    wa[c] + d * rng.gen_range(-1.0..1.0)
                })
                .collect();
            (scale, wa, wb)
        })
        .collect();

    let evaluated: Vec<Result<(PairItem, f64)>> = with_thread_cap(|| {
        pairs
            .par_iter()
            .enumerate()
            .map(|(i, (scale, wa, wb))| {
                let controls = connector.controls(wa, wb)?;
                let base =
                    setup.integrate_horizontal(wa, &controls, cfg.nodes_per_unit, cfg.rk4_step)?;
                let fine = setup.integrate_horizontal(
                    wa,
                    &controls,
                    cfg.nodes_per_unit * cfg.refine,
                    cfg.rk4_step,
                )?;
                let (p, q) = (setup.graph_point(wa), setup.graph_point(wb));
                let lower = setup.norm().distance(setup.group(), &p, &q);
                let upper_base = setup.graph_lift_length(&base, 1);
                let upper_refined = setup.graph_lift_length(&fine, 1);

                let leg1: Vec<usize> = (0..fine.nodes.len())
                    .filter(|&j| j == 0 || fine.segment_of_node[j] == 0)
                    .collect();
                let lprime = linear_lprime.unwrap_or_else(|| {
                    leg1.windows(2)
                        .map(|w| {
                            let dt = fine.times[w[1]] - fine.times[w[0]];
                            (setup.phi_at(&fine.nodes[w[1]]) - setup.phi_at(&fine.nodes[w[0]]))
                                .abs()
                                / dt
                        })
                        .fold(0.0, f64::max)
                });
                let sign = controls[0].a[n - 1];
                let phi_a = setup.phi_at(wa);
                let tau_excess = leg1
                    .iter()
                    .map(|&j| {
                        let t = fine.times[j];
                        let tau = fine.nodes[j][nw - 1] - wa[nw - 1];
                        (tau - sign * phi_a * t).abs() - lprime * t * t
                    })
                    .fold(f64::NEG_INFINITY, f64::max);
                let endpoint_error = fine
                    .endpoint()
                    .iter()
                    .zip(wb)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                Ok((
                    PairItem {
                        index: i,
                        scale: *scale,
                        quasi_distance: lower,
                        phi_length: fine.phi_length(),
                        upper_base,
                        upper_refined,
                        ratio_base: upper_base / lower,
                        ratio_refined: upper_refined / lower,
                        tau_excess,
                        endpoint_error: endpoint_error / scale.max(scale * scale),
                    },
                    lprime,
                ))
            })
            .collect()
    });

    let mut items = Vec::new();
    let mut excluded = 0;
    let mut lprime: f64 = 0.0;
    for e in evaluated {
        let (item, lp) = e?;
        lprime = lprime.max(lp);
        if item.quasi_distance > 0.0 {
            items.push(item);
        } else {
            excluded += 1;
        }
    }
    let max_ratio_base = items.iter().map(|i| i.ratio_base).fold(0.0, f64::max);
    let max_ratio_refined = items.iter().map(|i| i.ratio_refined).fold(0.0, f64::max);
    let change = relative_change(max_ratio_base, max_ratio_refined);
    let max_tau_excess = items
        .iter()
        .map(|i| i.tau_excess)
        .fold(f64::NEG_INFINITY, f64::max);
    let max_endpoint_error = items.iter().map(|i| i.endpoint_error).fold(0.0, f64::max);
    let bounded = max_ratio_refined.is_finite() && !items.is_empty();
    let stable = change < cfg.tolerance;
    let tau_ok = max_tau_excess <= 1e-9;
    let ratios: Vec<f64> = items.iter().map(|i| i.ratio_refined).collect();
    Ok(GraphDistanceResult {
        config: cfg.clone(),
        histogram: histogram(&ratios, 10),
        items,
        excluded,
        lprime,
        max_ratio_base,
        max_ratio_refined,
        relative_change: change,
        max_tau_excess,
        max_endpoint_error,
        bounded,
        stable,
        tau_ok,
        pass: bounded && stable && tau_ok && max_endpoint_error < 1e-6,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct HolonomyReport {
    pub n: usize,
    pub plane: (usize, usize),
    pub vertices: Vec<(f64, f64)>,
    pub integrated: f64,
    /// Shoelace area of the closed polygon.
    pub signed_area: f64,
    /// Endpoint from the closed-form group product.
    pub group_product: f64,
    pub relative_error: f64,
}

/// Drives φ ≡ 0 around a closed polygon in the (x_j, x_{j+n}) plane of ℍⁿ, 2 ≤ j ≤ n,
/// and compares the vertical endpoint with the enclosed signed area.
pub fn holonomy_check(
    n: usize,
    j: usize,
    vertices: &[(f64, f64)],
    rk4_step: f64,
) -> Result<HolonomyReport> {
    if n < 2 || j < 2 || j > n {
        return Err(Error::Invalid("need n ≥ 2 and 2 ≤ j ≤ n".into()));
    }
    if vertices.len() < 3 {
        return Err(Error::Invalid(
            "polygon needs at least three vertices".into(),
        ));
    }
    let group = Arc::new(CarnotGroup::new(Arc::new(make_heisenberg(n)?))?);
    let nw = 2 * n;
    let setup = Step2GraphSetup::new(group.clone(), MultiPoly::zero(nw), 1.0)?;
    let (u, v) = (j - 2, j + n - 2);
    let mut start = vec![0.0; nw];
    start[u] = vertices[0].0;
    start[v] = vertices[0].1;
    let mut controls = Vec::new();
    let mut product = setup.embed(&start);
    for k in 0..vertices.len() {
        let (p, q) = (vertices[k], vertices[(k + 1) % vertices.len()]);
        let (dx, dy) = (q.0 - p.0, q.1 - p.1);
        let len = dx.hypot(dy);
        if len == 0.0 {
            continue;
        }
        let mut a = vec![0.0; nw - 1];
        a[u] = dx / len;
        a[v] = dy / len;
        controls.push(ControlSegment { duration: len, a });
        let mut step = vec![0.0; nw + 1];
        step[j - 1] = dx;
        step[j + n - 1] = dy;
        product = group.product_f64(&product, &step);
    }
    let curve = setup.integrate_horizontal(&start, &controls, 1, rk4_step)?;
    let integrated = curve.endpoint()[nw - 1];
    let signed_area = 0.5
        * (0..vertices.len())
            .map(|k| {
                let (p, q) = (vertices[k], vertices[(k + 1) % vertices.len()]);
                p.0 * q.1 - q.0 * p.1
            })
            .sum::<f64>();
    let relative_error = relative_change(integrated, signed_area);
    Ok(HolonomyReport {
        n,
        plane: (j, j + n),
        vertices: vertices.to_vec(),
        integrated,
        signed_area,
        group_product: product[nw],
        relative_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_counts_everything() {
        let h = histogram(&[0.0, 0.5, 1.0, 1.0], 4);
        assert_eq!(h.iter().map(|b| b.count).sum::<usize>(), 4);
        assert_eq!(h[3].count, 2);
        assert_eq!(histogram(&[2.0, 2.0], 3)[0].count, 2);
    }

    #[test]
    fn unit_square_area() {
        let sq = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        let r = holonomy_check(2, 2, &sq, 1e-3).unwrap();
        assert!((r.integrated - 1.0).abs() < 1e-9);
        assert!((r.group_product - 1.0).abs() < 1e-12);
        let rev: Vec<_> = sq.iter().rev().copied().collect();
        assert!((holonomy_check(2, 2, &rev, 1e-3).unwrap().integrated + 1.0).abs() < 1e-9);
    }

    #[test]
    fn phi_spec_parses() {
        let spec: PhiSpec = serde_json::from_str(r#"{"linear": ["1/2", "0", "-1"]}"#).unwrap();
        let p = spec.build(4, 1).unwrap();
        assert_eq!(p.nvars(), 4);
        assert_eq!(p.eval_f64(&[2.0, 5.0, 1.0, 7.0]), 0.0);
        assert!(spec.build(3, 1).is_err());
    }

    #[test]
    fn n_one_is_refused() {
        let cfg = GraphDistanceConfig {
            n: 1,
            ..Default::default()
        };
        assert!(matches!(
            graph_distance_experiment(&cfg),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn small_length_run() {
        let cfg = LengthExperimentConfig {
            curves: 6,
            ..Default::default()
        };
        let r = length_comparison_experiment(&cfg).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.items.len(), 6);
    }

    #[test]
    fn small_distance_run() {
        let cfg = GraphDistanceConfig {
            pairs: 6,
            ..Default::default()
        };
        let r = graph_distance_experiment(&cfg).unwrap();
        assert!(r.pass, "{r:?}");
    }
}
