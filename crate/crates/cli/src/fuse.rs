use std::path::PathBuf;

use clap::Args;
use cvs_core::fusion::{fuse_streams, FusionMode};
use cvs_core::label_io::{load_label_map, save_label_map};

use crate::error::{CliError, CliResult};

#[derive(Args, Debug)]
pub struct FuseArgs {
    /// Stream 1 label map (PGM with palette sidecar).
    #[arg(long)]
    p1: PathBuf,
    /// Stream 2 label map (background / fat).
    #[arg(long)]
    p2: PathBuf,
    /// Output path for the fused map.
    #[arg(long)]
    out: PathBuf,
    /// background-fill or fat-overwrite; overrides `fusion.mode` from the config.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
}

pub fn run(a: FuseArgs) -> CliResult<()> {
    let cfg = crate::load_config(a.config.as_ref())?;
    let mode = match a.mode {
        Some(m) => m.parse::<FusionMode>().map_err(|e| CliError::input("InvalidArgument", e))?,
        None => cfg.fusion_mode,
    };
    let p1 = load_label_map(&a.p1)?;
    let p2 = load_label_map(&a.p2)?;
    let fused = fuse_streams(&p1, &p2, mode)?;
    save_label_map(&fused, &a.out)?;
    Ok(())
}
