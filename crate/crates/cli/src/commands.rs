//! Execution of a [`RunConfig`]; every subcommand funnels through [`run`].

use anyhow::{anyhow, bail, Context, Result};
use crofton_core::constants::DimensionalConstants;
use crofton_core::convex::{check_alexandrov_fenchel, ConvexBody};
use crofton_core::geometry::{FunctionSpace, Manifold, QuadratureSizes};
use crofton_core::grassmann::{
    alesker_identity, cosine_transform, haar2_check, inverse_cosine_transform, verify_crofton_product,
    verify_product_identity, FourierSeries, Harmonic, Region, ShExpansion,
};
use crofton_core::linalg::matrix_from_rows;
use crofton_core::montecarlo::{estimate, EstimateOptions, ZeroCountEstimate};
use crofton_core::predictor::{hodge_report, predict};
use serde_json::{json, Value};

use crate::config::{Identity, Mode, Params, RunConfig};
use crate::parse::{parse_bodies, parse_region, parse_rows, parse_usize_list};
use crate::report::{report_compare, Report, DEFAULT_ABS_TOL};

pub const DEFAULT_SEED: u64 = 0;
const DEFAULT_MC_SAMPLES: u64 = 1000;
const DEFAULT_IDENTITY_SAMPLES: u64 = 1_000_000;

/// Executes the run, writes the configured output files and returns the report.
/// Errors are input errors; failed checks come back as a failing report.
pub fn run(config: &RunConfig) -> Result<Report> {
    let report = match config.mode {
        Mode::Predict => run_predict(config)?,
        Mode::Simulate => run_simulate(config)?.0,
        Mode::Compare => run_compare(config)?,
        Mode::Verify => run_verify(config)?,
    };
    if let Some(path) = &config.output.report {
        report.write(path)?;
    }
    Ok(report)
}

fn manifold(config: &RunConfig) -> Result<Manifold> {
    let desc = config.manifold.as_deref().ok_or_else(|| anyhow!("no manifold given"))?;
    let m = Manifold::parse(desc)?;
    let p = &config.params;
    let d = QuadratureSizes::default();
    Ok(m.with_quadrature(QuadratureSizes {
        circle: p.circle_nodes.unwrap_or(d.circle),
        sphere_z: p.sphere_z.unwrap_or(d.sphere_z),
        sphere_phi: p.sphere_phi.unwrap_or(d.sphere_phi),
    }))
}

fn spaces_from(manifold: &Manifold, descriptors: &[String]) -> Result<Vec<FunctionSpace>> {
    if descriptors.len() != manifold.dim() {
        bail!(
            "{} has dimension {} and needs {} function spaces, got {}",
            manifold.descriptor(),
            manifold.dim(),
            manifold.dim(),
            descriptors.len()
        );
    }
    descriptors
        .iter()
        .enumerate()
        .map(|(slot, d)| FunctionSpace::parse(manifold, d, slot).with_context(|| format!("space '{d}'")))
        .collect()
}

fn model_inputs(config: &RunConfig, manifold: &Manifold, spaces: &[String]) -> Value {
    let q = manifold.quadrature_sizes();
    json!({
        "manifold": manifold.descriptor(),
        "spaces": spaces,
        "quadrature": q,
        "samples": config.params.samples,
        "seed": config.params.seed,
    })
}

fn estimate_options(p: &Params) -> EstimateOptions {
    let d = EstimateOptions::default();
    EstimateOptions {
        grid_1d: p.grid_1d.unwrap_or(d.grid_1d),
        grid_torus: p.grid_torus.unwrap_or(d.grid_torus),
        grid_sphere: p.grid_sphere.map(|[r, c]| (r, c)).unwrap_or(d.grid_sphere),
        ..d
    }
}

fn run_predict(config: &RunConfig) -> Result<Report> {
    let m = manifold(config)?;
    let spaces = spaces_from(&m, &config.spaces)?;
    let prediction = predict(&spaces)?;
    Ok(Report::new("predict", true, model_inputs(config, &m, &config.spaces), serde_json::to_value(&prediction)?))
}

fn simulate_with(config: &RunConfig, m: &Manifold, descriptors: &[String]) -> Result<ZeroCountEstimate> {
    let spaces = spaces_from(m, descriptors)?;
    let samples = config.params.samples.unwrap_or(DEFAULT_MC_SAMPLES);
    let est = estimate(&spaces, samples as usize, config.params.seed.unwrap_or(DEFAULT_SEED), &estimate_options(&config.params))?;
    if let Some(path) = &config.output.csv {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, est.to_csv()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(est)
}

/// Also returns the estimate, for callers that want the per-sample records.
pub fn run_simulate(config: &RunConfig) -> Result<(Report, ZeroCountEstimate)> {
    let m = manifold(config)?;
    let est = simulate_with(config, &m, &config.spaces)?;
    let report = Report::new("simulate", true, model_inputs(config, &m, &config.spaces), serde_json::to_value(&est)?);
    Ok((report, est))
}

fn run_compare(config: &RunConfig) -> Result<Report> {
    let m = manifold(config)?;
    let spaces = spaces_from(&m, &config.spaces)?;
    let prediction = predict(&spaces)?;
    let est_desc = if config.estimate_spaces.is_empty() { &config.spaces } else { &config.estimate_spaces };
    let est = simulate_with(config, &m, est_desc)?;
    let verdict = report_compare(&prediction, &est, config.params.abs_tol.unwrap_or(DEFAULT_ABS_TOL));
    let mut inputs = model_inputs(config, &m, &config.spaces);
    inputs["estimate_spaces"] = json!(est_desc);
    let result = json!({ "prediction": prediction, "estimate": est, "verdict": verdict });
    Ok(Report::new("compare", verdict.pass, inputs, result))
}

fn required<'a>(field: &'a Option<String>, name: &str, identity: Identity) -> Result<&'a str> {
    field.as_deref().ok_or_else(|| anyhow!("verify {} needs --{name}", identity.name()))
}

fn default_bandwidth(dim: usize) -> usize {
    if dim <= 2 {
        32
    } else {
        16
    }
}

fn common_dim(bodies: &[ConvexBody]) -> Result<usize> {
    let n = bodies[0].dim();
    if bodies.iter().any(|b| b.dim() != n) {
        bail!("bodies live in different dimensions");
    }
    Ok(n)
}

fn run_verify(config: &RunConfig) -> Result<Report> {
    let v = &config.verify;
    let p = &config.params;
    let identity = v.identity.ok_or_else(|| {
        anyhow!("no identity given; supported: product, alesker, haar2, crofton-product, af, hodge, constants")
    })?;
    let samples = p.samples.unwrap_or(DEFAULT_IDENTITY_SAMPLES) as usize;
    let seed = p.seed.unwrap_or(DEFAULT_SEED);
    let (pass, inputs, result) = match identity {
        Identity::Product => {
            let region: Region = match &v.region {
                Some(r) => parse_region(r)?,
                None => Region::unit_square(),
            };
            let bodies = parse_bodies(required(&v.bodies, "bodies", identity)?, region.ambient())?;
            let tol = p.tol.unwrap_or(0.02);
            let bw = p.bandwidth.unwrap_or(default_bandwidth(region.ambient()));
            let r = verify_product_identity(&bodies, &region, samples, seed, tol, bw)?;
            let inputs = json!({ "bodies": v.bodies, "region": region, "samples": samples, "seed": seed, "tol": tol, "bandwidth": bw });
            (r.pass, inputs, serde_json::to_value(&r)?)
        }
        Identity::Alesker | Identity::Haar2 => {
            let subspace = v.subspace.as_deref().map(parse_rows).transpose()?;
            let dim_hint = subspace.as_ref().map(|rows| rows[0].len()).unwrap_or(2);
            let bodies = parse_bodies(required(&v.bodies, "bodies", identity)?, dim_hint)?;
            let n = common_dim(&bodies)?;
            let tol = p.tol.unwrap_or(if n <= 2 { 1e-6 } else { 1e-3 });
            let bw = p.bandwidth.unwrap_or(default_bandwidth(n));
            let mut checks = Vec::new();
            for (b, desc) in bodies.iter().zip(v.bodies.as_deref().unwrap_or("").split(',')) {
                let r = if identity == Identity::Alesker {
                    alesker_identity(b, bw)?
                } else {
                    let rows = subspace.as_ref().ok_or_else(|| anyhow!("verify haar2 needs --subspace"))?;
                    if rows[0].len() != n {
                        bail!("subspace vectors have length {}, bodies live in R^{n}", rows[0].len());
                    }
                    haar2_check(b, &matrix_from_rows(rows).transpose(), bw)?
                };
                checks.push(json!({ "body": desc.trim(), "lhs": r.lhs, "rhs": r.rhs, "residual": r.residual, "pass": r.residual <= tol }));
            }
            let pass = checks.iter().all(|c| c["pass"] == json!(true));
            let inputs = json!({ "bodies": v.bodies, "subspace": subspace, "tol": tol, "bandwidth": bw });
            (pass, inputs, json!({ "identity": identity.name(), "checks": checks }))
        }
        Identity::CroftonProduct => {
            let dims = parse_usize_list(required(&v.tangent_dims, "tangent-dims", identity)?)?;
            let edges = parse_rows(required(&v.edges, "edges", identity)?)?;
            let tol = p.tol.unwrap_or(0.02);
            let r = verify_crofton_product(&dims, &edges, samples, seed, tol)?;
            let inputs = json!({ "tangent_dims": dims, "edges": edges, "samples": samples, "seed": seed, "tol": tol });
            (r.pass, inputs, serde_json::to_value(&r)?)
        }
        Identity::Af => {
            let bodies = parse_bodies(required(&v.bodies, "bodies", identity)?, 2)?;
            common_dim(&bodies)?;
            let tol = p.tol.unwrap_or(1e-9);
            let r = check_alexandrov_fenchel(&bodies, tol)?;
            (r.holds, json!({ "bodies": v.bodies, "tol": tol }), serde_json::to_value(r)?)
        }
        Identity::Hodge => {
            let m = manifold(config)?;
            let spaces = spaces_from(&m, &config.spaces)?;
            let r = hodge_report(&spaces)?;
            (r.pass, model_inputs(config, &m, &config.spaces), serde_json::to_value(&r)?)
        }
        Identity::Constants => {
            let tol = p.tol.unwrap_or(1e-12);
            let rows: Vec<Value> = (1..=6)
                .map(|k| {
                    let c = DimensionalConstants::new(k);
                    let rel = c.identity_residual().abs() / (c.v_p * c.sigma_p);
                    json!({ "p": k, "v_p": c.v_p, "sigma_p": c.sigma_p, "relative_residual": rel, "pass": rel <= tol })
                })
                .collect();
            let pass = rows.iter().all(|r| r["pass"] == json!(true));
            (pass, json!({ "tol": tol }), json!({ "identity": "constants", "checks": rows }))
        }
    };
    let mut inputs = inputs;
    inputs["identity"] = json!(identity.name());
    Ok(Report::new("verify", pass, inputs, result))
}

/// Direction of a cosine-transform request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformDirection {
    Apply,
    Invert,
}

/// Applies `T_1` or its inverse to a coefficient list: Fourier `cos`/`sin` for
/// dimension 2, real spherical-harmonic coefficients for dimension 3.
pub fn transform(dim: usize, cos: &[f64], sin: &[f64], coeffs: &[f64], direction: TransformDirection) -> Result<Report> {
    let input = match dim {
        2 => {
            if cos.is_empty() {
                bail!("dimension 2 needs --cos (and optionally --sin)");
            }
            let n = cos.len().max(sin.len());
            let mut f = FourierSeries::zeros(n - 1);
            f.cos[..cos.len()].copy_from_slice(cos);
            f.sin[..sin.len()].copy_from_slice(sin);
            Harmonic::Circle(f)
        }
        3 => Harmonic::Sphere(ShExpansion::from_coeffs(coeffs.to_vec())?),
        d => bail!("cosine transform is implemented in dimensions 2 and 3, not {d}"),
    };
    let output = match direction {
        TransformDirection::Apply => cosine_transform(&input)?,
        TransformDirection::Invert => inverse_cosine_transform(&input)?,
    };
    let name = if direction == TransformDirection::Apply { "apply" } else { "invert" };
    Ok(Report::new(
        "transform",
        true,
        json!({ "dim": dim, "direction": name, "input": input }),
        json!({ "output": output }),
    ))
}
