use std::fs;

use anyhow::{bail, Context, Result};
use npf_core::tasks::{gen_circles_lines, gen_density_shift, gen_rna_kinetics, CirclesLinesConfig, RnaConfig, TRAJECTORY_DIM};
use npf_core::write_dataset;
use serde::de::DeserializeOwned;

use crate::args::{GenArgs, Task};
use crate::echo::{hash_bytes, to_table, write_echo};
use crate::UsageError;

fn read_config<T: DeserializeOwned + Default>(args: &GenArgs) -> Result<T> {
    match &args.config {
        None => Ok(T::default()),
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            toml::from_str(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())).into())
        }
    }
}

pub fn run(args: &GenArgs) -> Result<()> {
    let (clouds, config) = match args.task {
        Task::CirclesLines => {
            let cfg: CirclesLinesConfig = read_config(args)?;
            (gen_circles_lines(&cfg, args.seed)?, to_table(&cfg)?)
        }
        Task::Rna => {
            let mut cfg: RnaConfig = read_config(args)?;
            cfg.control |= args.control;
            (gen_rna_kinetics(&cfg, args.seed)?, to_table(&cfg)?)
        }
        Task::DensityShift => {
            if args.config.is_some() {
                bail!(UsageError("density-shift takes --kappas, --points and --clouds, not --config".into()));
            }
            let mut cfg = toml::Table::new();
            cfg.insert("kappas".into(), args.kappas.clone().into());
            cfg.insert("points".into(), (args.points as i64).into());
            cfg.insert("clouds".into(), (args.clouds as i64).into());
            (gen_density_shift(&args.kappas, args.points, args.clouds, args.seed)?, cfg)
        }
    };

    let mut meta = toml::Table::new();
    meta.insert("task".into(), args.task.name().into());
    meta.insert("seed".into(), (args.seed as i64).into());
    meta.insert("intrinsic_dim".into(), (TRAJECTORY_DIM as i64).into());
    meta.insert("config".into(), config.clone().into());
    let manifest = write_dataset(&args.out, &clouds, meta.clone())?;

    let mut inputs = toml::Table::new();
    inputs.insert("config_sha256".into(), hash_bytes(toml::to_string(&meta)?.as_bytes()).into());
    write_echo(&args.out, "gen", meta, inputs)?;
    println!("wrote {} clouds to {}", clouds.len(), manifest.display());
    Ok(())
}
