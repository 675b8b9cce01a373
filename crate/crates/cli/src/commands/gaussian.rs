use christoffel::densities::BuiltinDensity;
use christoffel::density::estimate_density;
use christoffel::gram::GramSystem;
use christoffel::kernel::KernelSpec;
use christoffel::spectral::SpectralProfile;
use clap::Args;
use serde::Serialize;
use serde_json::json;

use super::{non_positive, record_kernel, record_system, OutArgs};
use crate::output::{num, opt_num, Artifacts, Check, Table};
use crate::options::{linspace, parse_positive, parse_sweep, Sweep};
use crate::CliError;

/// Gaussian tail masses use `ε = λ^GAUSSIAN_EPS_POWER`; there is no β to derive it from.
const GAUSSIAN_EPS_POWER: f64 = 0.05;

#[derive(Debug, Clone, Args, Serialize)]
pub struct GaussianArgs {
    /// Riemann grid size on [-1, 1].
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Gaussian kernel `exp(-‖x‖²/l)`.
    #[arg(long, default_value_t = 0.01)]
    pub gaussian_length: f64,
    #[arg(long, default_value_t = 0.5)]
    pub nu: f64,
    #[arg(long, default_value_t = 0.5)]
    pub matern_length: f64,
    #[arg(long, value_parser = parse_positive, default_value = "1e-4")]
    pub lambda: f64,
    /// Query grid `[-extent, extent]`.
    #[arg(long, default_value_t = 1.5)]
    pub extent: f64,
    #[arg(long, default_value_t = 201)]
    pub queries: usize,
    /// λ sweep for the tail-mass diagnostic.
    #[arg(long, value_parser = parse_sweep, default_value = "1e-2:1e-6:5")]
    pub tail_sweep: Sweep,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutArgs,
}

pub fn run(args: &GaussianArgs) -> Result<Artifacts, CliError> {
    if args.queries < 2 || !(args.extent > 0.0) {
        return Err(CliError::Usage("need two or more queries and a positive extent".into()));
    }
    let density = BuiltinDensity::Piecewise;
    let sample = density.riemann(args.n)?;
    let zs: Vec<Vec<f64>> = linspace(-args.extent, args.extent, args.queries)
        .into_iter()
        .map(|z| vec![z])
        .collect();
    let kernels = [
        ("gaussian", KernelSpec::gaussian(args.gaussian_length, 1)?),
        ("matern", KernelSpec::matern(args.nu, args.matern_length, 1)?),
    ];

    let mut art = Artifacts::default();
    let mut profiles = Table::new(&["kernel", "z", "p_true", "christoffel", "c_over_d", "p_hat"]);
    let mut tails = Table::new(&["kernel", "lambda", "epsilon", "ratio"]);
    let mut bad_values = 0;
    let mut tail_summary = Vec::new();
    let sweep = args.tail_sweep.values();

    for (name, kernel) in &kernels {
        let profile = SpectralProfile::new(kernel)?;
        record_kernel(&mut art, name, kernel, &profile);
        let sys = GramSystem::assemble(kernel, &sample, args.lambda)?;
        record_system(&mut art, name, &sys);
        let d = profile.compute_d(args.lambda)?;
        let values = sys.christoffel_at_points(&zs)?;
        bad_values += non_positive(&values);
        let algebraic = profile.sobolev().is_some();
        for (z, &c) in zs.iter().zip(&values) {
            let p_hat = if algebraic {
                Some(estimate_density(&profile, args.lambda, c)?)
            } else {
                None
            };
            profiles.row(vec![
                name.to_string(),
                num(z[0]),
                num(density.eval(z)),
                num(c),
                num(c / d),
                opt_num(p_hat),
            ]);
        }

        let mut ratios = Vec::with_capacity(sweep.len());
        for &lambda in &sweep {
            let eps = if algebraic {
                profile.default_epsilon(lambda)?
            } else {
                lambda.powf(GAUSSIAN_EPS_POWER)
            };
            let ratio = profile.tail_mass_ratio(lambda, eps)?;
            ratios.push((lambda, ratio));
            tails.row(vec![name.to_string(), num(lambda), num(eps), num(ratio)]);
        }
        let at = |pick: fn(f64, f64) -> bool| {
            ratios
                .iter()
                .copied()
                .reduce(|a, b| if pick(b.0, a.0) { b } else { a })
                .map(|r| r.1)
        };
        let (largest, smallest) = (at(|a, b| a > b), at(|a, b| a < b));
        tail_summary.push(json!({
            "kernel": name,
            "d_lambda": d,
            "ratio_at_largest_lambda": largest,
            "ratio_at_smallest_lambda": smallest,
            "decrease_factor": largest.zip(smallest).map(|(a, b)| a / b),
        }));
    }

    art.note("density", density.name());
    art.note("tail_mass", tail_summary);
    art.check(Check::new(
        "christoffel_positive_finite",
        bad_values == 0,
        format!("{bad_values} non-positive or non-finite values"),
    ));
    art.file("gaussian_compare.csv", profiles);
    art.file("tail_mass.csv", tails);
    Ok(art)
}
