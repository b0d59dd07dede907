use std::fs;

use anyhow::Result;
use npf_core::gram::estimate_gram_memory;
use npf_core::laplacian::Graph;
use npf_core::binomial;
use npf_core::oracle::study::{convergence_study, density_check, DensityCheck, DensitySource, EpsilonSchedule, StudyConfig};
use npf_core::oracle::Manifold;

use crate::args::{ConsistencyArgs, DensityCheckArgs, MemArgs};
use crate::echo::{hash_bytes, write_echo};
use crate::UsageError;

fn args_table(pairs: &[(&str, toml::Value)]) -> toml::Table {
    pairs.iter().map(|(k, v)| ((*k).to_string(), v.clone())).collect()
}

fn echo_inputs(config: &toml::Table) -> Result<toml::Table> {
    let mut inputs = toml::Table::new();
    inputs.insert("config_sha256".into(), hash_bytes(toml::to_string(config)?.as_bytes()).into());
    Ok(inputs)
}

pub fn run_consistency(args: &ConsistencyArgs) -> Result<()> {
    let manifold = Manifold::from_name(&args.manifold).map_err(|e| UsageError(e.to_string()))?;
    let mut cfg = StudyConfig::new(manifold);
    cfg.sizes = args.sizes.clone();
    cfg.seeds = (0..args.seeds).collect();
    cfg.degree = args.k;
    cfg.params.alpha = args.alpha;
    cfg.params.beta = args.beta;
    if let Some(k) = args.knn {
        cfg.params.graph = Graph::Knn(k);
    }
    cfg.epsilon = match args.theta {
        Some(theta) => EpsilonSchedule::Coupled { theta },
        None => EpsilonSchedule::Fixed(args.epsilon),
    };
    let report = convergence_study(&cfg)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let median = report.median_over_seeds("median_err");
    let max = report.median_over_seeds("max_err");
    println!("{:>6}  {:>12}  {:>12}", "n", "median_err", "max_err");
    for ((n, med), (_, mx)) in median.iter().zip(&max) {
        println!("{n:>6}  {med:>12.6}  {mx:>12.6}");
    }
    let values: Vec<f64> = median.iter().map(|(_, v)| *v).collect();
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    let ratio = values.last().unwrap_or(&f64::NAN) / values.first().unwrap_or(&f64::NAN);
    let verdict = if decreasing && ratio <= 0.5 { "PASS" } else { "FAIL" };
    println!("{verdict}: strictly decreasing {decreasing}, last/first {ratio:.3} (threshold 0.5)");

    if let Some(out) = &args.out {
        fs::create_dir_all(out)?;
        fs::write(out.join("consistency.csv"), report.to_csv())?;
        let config = args_table(&[
            ("manifold", manifold.name().into()),
            ("sizes", args.sizes.iter().map(|&n| n as i64).collect::<Vec<_>>().into()),
            ("seeds", (args.seeds as i64).into()),
            ("degree", (args.k as i64).into()),
            ("epsilon", format!("{:?}", cfg.epsilon).into()),
            ("laplacian", toml::Table::try_from(cfg.params)?.into()),
        ]);
        let inputs = echo_inputs(&config)?;
        write_echo(out, "consistency", config, inputs)?;
    }
    Ok(())
}

pub fn run_density_check(args: &DensityCheckArgs) -> Result<()> {
    let cfg = DensityCheck {
        kappas: args.kappas.clone(),
        n: args.n,
        seeds: (0..args.seeds).collect(),
        source: if args.estimated_density { DensitySource::Estimated } else { DensitySource::True },
        ..Default::default()
    };
    let report = density_check(&cfg)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    println!("{:>6}  {:>10}  {:>14}  {:>16}", "kappa", "target", "corrected_mae", "uncorrected_mae");
    for s in &report.summary {
        let mark = if s.corrected_mae < s.uncorrected_mae { "corrected wins" } else { "uncorrected wins" };
        println!("{:>6}  {:>10.6}  {:>14.6}  {:>16.6}  {mark}", s.kappa, s.target, s.corrected_mae, s.uncorrected_mae);
    }
    if let Some(out) = &args.out {
        fs::create_dir_all(out)?;
        fs::write(out.join("density_check.csv"), report.to_csv())?;
        let mut summary = String::from("kappa,target,corrected_mae,uncorrected_mae\n");
        for s in &report.summary {
            summary.push_str(&format!("{},{},{},{}\n", s.kappa, s.target, s.corrected_mae, s.uncorrected_mae));
        }
        fs::write(out.join("density_summary.csv"), summary)?;
        let config = args_table(&[
            ("kappas", args.kappas.clone().into()),
            ("n", (args.n as i64).into()),
            ("seeds", (args.seeds as i64).into()),
            ("density", if args.estimated_density { "estimated" } else { "true" }.into()),
            ("laplacian", toml::Table::try_from(cfg.params)?.into()),
        ]);
        let inputs = echo_inputs(&config)?;
        write_echo(out, "density-check", config, inputs)?;
    }
    Ok(())
}

pub fn run_mem(args: &MemArgs) -> Result<()> {
    let precision = args.precision.into();
    let est = estimate_gram_memory(args.m, args.dim, args.k, precision)?;
    let b = binomial(args.dim, args.k);
    let width = precision.width();
    match args.clouds {
        None => println!("{width}·{}·{b}² = {est}", args.m),
        Some(n) => println!("{width}·{}·{b}² × {n} = {}", args.m, est.times(n)),
    }
    Ok(())
}
