use christoffel::spectral::{SpectralProfile, D_REL_TOL};
use clap::Args;
use serde::Serialize;

use super::{record_kernel, OutArgs};
use crate::output::{num, opt_num, Artifacts, Check, Table};
use crate::options::{parse_positive, parse_sweep, KernelArgs, Sweep};
use crate::CliError;

/// Below this λ the ratio column should approach one monotonically.
const ASYMPTOTIC_REGIME: f64 = 1e-4;

#[derive(Debug, Clone, Args, Serialize)]
pub struct SpectralArgs {
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    #[arg(long, value_parser = parse_sweep, default_value = "1e-8:1e-1:15")]
    pub lambda_sweep: Sweep,
    /// Density plugged into the inside predictors.
    #[arg(long, value_parser = parse_positive, default_value = "0.5")]
    pub p_z: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutArgs,
}

pub fn run(args: &SpectralArgs) -> Result<Artifacts, CliError> {
    let kernel = args.kernel.build(args.dim)?;
    let profile = SpectralProfile::new(&kernel)?;
    let mut art = Artifacts::default();
    record_kernel(&mut art, "kernel", &kernel, &profile);
    let q0_origin = kernel.q_origin();
    let algebraic = profile.sobolev().is_some();

    let mut table = Table::new(&[
        "lambda",
        "d_lambda",
        "asymptotic",
        "ratio",
        "predict_inside",
        "outside_i",
        "outside_ii",
        "lower_bound",
    ]);
    let mut bound_misses = 0;
    let mut regime = Vec::new();
    for lambda in args.lambda_sweep.values() {
        let d = profile.compute_d(lambda)?;
        let lower = lambda / q0_origin;
        if d < lower * (1.0 - D_REL_TOL) {
            bound_misses += 1;
        }
        let asymptotic = if algebraic {
            Some(lambda.powf(profile.exponent()?) / profile.q0()?)
        } else {
            None
        };
        let ratio = asymptotic.map(|a| d / a);
        if let Some(r) = ratio.filter(|_| lambda <= ASYMPTOTIC_REGIME) {
            regime.push((lambda, r));
        }
        let (outside_i, outside_ii) = profile.predict_outside(lambda)?;
        table.row(vec![
            num(lambda),
            num(d),
            opt_num(asymptotic),
            opt_num(ratio),
            num(profile.predict_inside(lambda, args.p_z)?),
            num(outside_i),
            num(outside_ii),
            num(lower),
        ]);
    }

    // walk from large λ to small: |ratio − 1| should shrink
    regime.sort_by(|a, b| b.0.total_cmp(&a.0));
    let monotone = regime
        .windows(2)
        .all(|w| (w[1].1 - 1.0).abs() <= (w[0].1 - 1.0).abs() * (1.0 + 1e-9));
    if algebraic {
        art.note("ratio_monotone_below_1e-4", monotone);
    }
    art.note("rows", table.rows());
    art.check(Check::new(
        "d_at_least_lambda_over_q_origin",
        bound_misses == 0,
        format!("{bound_misses} rows with D(λ) q(0)/λ < 1"),
    ));
    art.file("spectral.csv", table);
    Ok(art)
}
