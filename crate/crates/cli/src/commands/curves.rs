use christoffel::gram::GramSystem;
use clap::Args;
use serde::Serialize;

use super::{record_system, OutArgs};
use crate::output::{num, Artifacts, Check, Table};
use crate::options::{linspace, parse_measure, parse_positive, KernelArgs, MeasureSpec};
use crate::CliError;

#[derive(Debug, Clone, Args, Serialize)]
pub struct CurvesArgs {
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long, value_parser = parse_measure)]
    pub measure: MeasureSpec,
    #[arg(long, value_parser = parse_positive, default_value = "1e-3")]
    pub lambda: f64,
    /// Anchor points z, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub z: Vec<f64>,
    #[arg(long, default_value_t = -1.5, allow_hyphen_values = true)]
    pub from: f64,
    #[arg(long, default_value_t = 1.5, allow_hyphen_values = true)]
    pub to: f64,
    #[arg(long, default_value_t = 301)]
    pub points: usize,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutArgs,
}

pub fn run(args: &CurvesArgs) -> Result<Artifacts, CliError> {
    let mut art = Artifacts::default();
    if let MeasureSpec::Iid { seed, .. } = args.measure {
        art.seed = Some(seed);
    }
    let sample = args.measure.build()?;
    if sample.dim() != 1 {
        return Err(CliError::Usage("optimizer curves are one-dimensional".into()));
    }
    let kernel = args.kernel.build(1)?;
    let sys = GramSystem::assemble(&kernel, &sample, args.lambda)?;
    record_system(&mut art, "kernel", &sys);
    let ys: Vec<Vec<f64>> = linspace(args.from, args.to, args.points)
        .into_iter()
        .map(|y| vec![y])
        .collect();
    let mut table = Table::new(&["z", "y", "f"]);
    let mut worst: f64 = 0.0;
    for &z in &args.z {
        let f = sys.extremal_function(&[z], &ys)?;
        worst = worst.max((sys.extremal_function(&[z], &[vec![z]])?[0] - 1.0).abs());
        for (y, v) in ys.iter().zip(f) {
            table.row(vec![num(z), num(y[0]), num(v)]);
        }
    }
    art.check(Check::new(
        "unit_at_anchor",
        worst < 1e-8,
        format!("max |f(z) - 1| = {worst:e}"),
    ));
    art.file("curves.csv", table);
    Ok(art)
}
