use christoffel::density::annotate;
use christoffel::gram::GramSystem;
use christoffel::spectral::SpectralProfile;
use clap::Args;
use serde::Serialize;

use super::{non_positive, record_kernel, record_system, LambdaArgs, OutArgs, ThresholdArgs};
use crate::output::{num, opt_num, Artifacts, Check, Table};
use crate::options::{parse_measure, parse_queries, KernelArgs, MeasureSpec, QuerySpec};
use crate::CliError;

#[derive(Debug, Clone, Args, Serialize)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    pub lambda: LambdaArgs,
    /// `csv:PATH`, `riemann:DENSITY:n` or `iid:DENSITY:n:SEED`.
    #[arg(long, value_parser = parse_measure)]
    pub measure: MeasureSpec,
    /// `csv:PATH`, `grid:a:b:m` or `at-support`.
    #[arg(long, value_parser = parse_queries, default_value = "at-support")]
    pub queries: QuerySpec,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutArgs,
}

pub fn run(args: &EstimateArgs) -> Result<Artifacts, CliError> {
    let mut art = Artifacts::default();
    if let MeasureSpec::Iid { seed, .. } = args.measure {
        art.seed = Some(seed);
    }
    let thresholds = args.thresholds.build()?;
    let sample = args.measure.build()?;
    let dim = sample.dim();
    let kernel = args.kernel.build(dim)?;
    let profile = SpectralProfile::new(&kernel)?;
    record_kernel(&mut art, "kernel", &kernel, &profile);
    let queries = args.queries.build(dim)?;
    let points: Vec<Vec<f64>> = match &queries {
        Some(q) => q.clone(),
        None => sample.points().map(<[f64]>::to_vec).collect(),
    };

    let mut header: Vec<String> = (1..=dim).map(|j| format!("z{j}")).collect();
    header.extend(["lambda", "christoffel", "leverage", "p_hat", "label"].map(String::from));
    let mut table = Table::new(&header);

    let lambdas = args.lambda.values();
    let mut previous: Option<(f64, Vec<f64>)> = None;
    let mut bad_values = 0;
    let mut monotone_violations = 0;
    let mut sys: Option<GramSystem> = None;
    for &lambda in &lambdas {
        let next = match &sys {
            None => GramSystem::assemble(&kernel, &sample, lambda)?,
            Some(s) => s.refit_lambda(lambda)?,
        };
        record_system(&mut art, "kernel", &next);
        let values = match &queries {
            Some(q) => next.christoffel_at_points(q)?,
            None => next.christoffel_at_support_all(),
        };
        bad_values += non_positive(&values);
        if let Some((prev_lambda, prev)) = &previous {
            let rising = lambda > *prev_lambda;
            monotone_violations += prev
                .iter()
                .zip(&values)
                .filter(|(a, b)| {
                    let slack = 1e-9 * a.abs().max(b.abs());
                    if rising {
                        **b < **a - slack
                    } else {
                        **b > **a + slack
                    }
                })
                .count();
        }
        for (z, &c) in points.iter().zip(&values) {
            let est = annotate(&profile, lambda, z, c, thresholds)?;
            let mut row: Vec<String> = z.iter().map(|&v| num(v)).collect();
            row.extend([
                num(lambda),
                num(est.c_value),
                num(est.leverage),
                opt_num(est.p_hat),
                est.label.as_str().to_string(),
            ]);
            table.row(row);
        }
        previous = Some((lambda, values));
        sys = Some(next);
    }

    art.note("queries", points.len());
    art.note("lambdas", lambdas.len());
    art.note("sample_size", sample.len());
    art.check(Check::new(
        "christoffel_positive_finite",
        bad_values == 0,
        format!("{bad_values} non-positive or non-finite values"),
    ));
    art.check(Check::new(
        "monotone_in_lambda",
        monotone_violations == 0,
        format!("{monotone_violations} values moved against λ"),
    ));
    art.file("estimates.csv", table);
    Ok(art)
}
