use christoffel::densities::BuiltinDensity;
use christoffel::gram::GramSystem;
use christoffel::kernel::KernelSpec;
use christoffel::measure::WeightedSample;
use christoffel::spectral::SpectralProfile;
use clap::Args;
use serde::Serialize;

use super::{non_positive, record_kernel, record_system, OutArgs};
use crate::output::{num, Artifacts, Check, Table};
use crate::options::{linspace, parse_positive};
use crate::CliError;

#[derive(Debug, Clone, Args, Serialize)]
pub struct OverfitArgs {
    /// Number of equispaced sample points.
    #[arg(long, default_value_t = 15)]
    pub n: usize,
    /// Sample points span [-half_width, half_width].
    #[arg(long, default_value_t = 0.7)]
    pub half_width: f64,
    #[arg(long, default_value_t = 0.5)]
    pub nu: f64,
    #[arg(long, default_value_t = 0.01)]
    pub length: f64,
    #[arg(long, value_parser = parse_positive, default_value = "1e-3")]
    pub lambda: f64,
    /// Query points strictly inside each gap.
    #[arg(long, default_value_t = 20)]
    pub per_gap: usize,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutArgs,
}

/// Equispaced points weighted by the sinusoidal density, normalized to mass one.
pub fn sample(n: usize, half_width: f64) -> Result<WeightedSample, CliError> {
    if n < 2 || !(half_width > 0.0 && half_width < 1.0) {
        return Err(CliError::Usage("need n ≥ 2 and 0 < half_width < 1".into()));
    }
    let xs = linspace(-half_width, half_width, n);
    let p: Vec<f64> = xs.iter().map(|&x| BuiltinDensity::Sinusoidal.eval(&[x])).collect();
    let total: f64 = p.iter().sum();
    let points: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
    let weights: Vec<f64> = p.iter().map(|v| v / total).collect();
    Ok(WeightedSample::new(&points, &weights)?)
}

pub fn run(args: &OverfitArgs) -> Result<Artifacts, CliError> {
    let mut art = Artifacts::default();
    let sample = sample(args.n, args.half_width)?;
    let kernel = KernelSpec::matern(args.nu, args.length, 1)?;
    let profile = SpectralProfile::new(&kernel)?;
    record_kernel(&mut art, "kernel", &kernel, &profile);
    let sys = GramSystem::assemble(&kernel, &sample, args.lambda)?;
    record_system(&mut art, "kernel", &sys);

    let xs: Vec<f64> = sample.points().map(|p| p[0]).collect();
    let eta = sample.weights();
    let q0 = kernel.q_origin();

    let mut zs = Vec::new();
    for (i, &x) in xs.iter().enumerate() {
        zs.push(x);
        if let Some(&next) = xs.get(i + 1) {
            let h = (next - x) / (args.per_gap + 1) as f64;
            zs.extend((1..=args.per_gap).map(|k| x + h * k as f64));
        }
    }
    let queries: Vec<Vec<f64>> = zs.iter().map(|&z| vec![z]).collect();
    let values = sys.christoffel_at_points(&queries)?;

    let nearest = |z: f64| {
        let (i, _) = xs
            .iter()
            .enumerate()
            .map(|(i, x)| (i, (x - z).abs()))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        i
    };
    let mut table = Table::new(&["z", "christoffel", "eta_nearest"]);
    for (&z, &c) in zs.iter().zip(&values) {
        table.row(vec![num(z), num(c), num(eta[nearest(z)])]);
    }

    // C(xᵢ) ≥ ηᵢ always; k(·, xᵢ)/q(0) is feasible, which caps it from above.
    let mut lower_misses = 0;
    let mut upper_misses = 0;
    let mut worst_excess: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let c = sys.christoffel_at_support(i)?;
        let spill: f64 = xs
            .iter()
            .zip(eta)
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, (&y, &w))| {
                let k = kernel.eval_q(&[x - y]).unwrap_or(0.0) / q0;
                w * k * k
            })
            .sum();
        let tol = 1e-9 * c;
        if c < eta[i] - tol {
            lower_misses += 1;
        }
        if c > eta[i] + spill + args.lambda / q0 + tol {
            upper_misses += 1;
        }
        worst_excess = worst_excess.max((c - eta[i]) / (args.lambda / q0));
    }
    let gap_values: Vec<f64> = zs
        .iter()
        .zip(&values)
        .filter(|(z, _)| !xs.contains(z))
        .map(|(_, &c)| c)
        .collect();
    let min_eta = eta.iter().copied().fold(f64::INFINITY, f64::min);
    let max_gap = gap_values.iter().copied().fold(0.0, f64::max);

    art.note("min_eta", min_eta);
    art.note("max_between_samples", max_gap);
    art.note("between_over_min_eta", max_gap / min_eta);
    art.note("support_excess_over_lambda_floor", worst_excess);
    art.check(Check::new(
        "christoffel_positive_finite",
        non_positive(&values) == 0,
        format!("{} non-positive or non-finite values", non_positive(&values)),
    ));
    art.check(Check::new(
        "support_at_least_eta",
        lower_misses == 0,
        format!("{lower_misses} support values below their weight"),
    ));
    art.check(Check::new(
        "support_below_feasible_bound",
        upper_misses == 0,
        format!("{upper_misses} support values above the interpolant bound"),
    ));
    art.file("overfit.csv", table);
    Ok(art)
}
