use std::path::PathBuf;

use clap::Args;
use cvs_core::synth::{corpus_scene, flip_pixels, frame_name, frame_seed, positive_flags, write_frame, TruthRecord};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{io_error, CliError, CliResult};

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Number of frames.
    #[arg(long)]
    n: usize,
    /// Base seed; frame i is generated from (seed, i) alone.
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
    /// Fraction of CVS-positive frames.
    #[arg(long, default_value_t = 0.25)]
    positive_fraction: f64,
    /// Probability of replacing each pixel with a random other class.
    /// Truth files always describe the clean scene.
    #[arg(long, default_value_t = 0.0)]
    flip_rate: f64,
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Serialize)]
struct Summary {
    frames: usize,
    positives: usize,
}

pub fn run(a: SynthArgs) -> CliResult<()> {
    if a.n == 0 {
        return Err(CliError::input("InvalidArgument", "--n must be at least 1"));
    }
    if !(0.0..=1.0).contains(&a.positive_fraction) || !(0.0..=1.0).contains(&a.flip_rate) {
        return Err(CliError::input("InvalidArgument", "--positive-fraction and --flip-rate must be in [0, 1]"));
    }
    std::fs::create_dir_all(&a.out_dir).map_err(|e| io_error(&a.out_dir, e))?;
    let flags = positive_flags(a.n, a.seed, a.positive_fraction);
    let pool = crate::thread_pool(a.jobs)?;
    let results: Vec<CliResult<bool>> = pool.install(|| {
        flags
            .par_iter()
            .enumerate()
            .map(|(i, &positive)| {
                let scene = corpus_scene(a.seed, i, positive)?;
                let truth = TruthRecord::new(scene.truth, &scene.reference_quad);
                let map = if a.flip_rate > 0.0 {
                    flip_pixels(&scene.map, a.flip_rate, frame_seed(a.seed, i as u64))
                } else {
                    scene.map
                };
                write_frame(&a.out_dir, &frame_name(i), &map, &truth)?;
                Ok(truth.cvs)
            })
            .collect()
    });
    let mut positives = 0;
    for r in results {
        positives += r? as usize;
    }
    println!("{}", serde_json::to_string(&Summary { frames: a.n, positives }).expect("summary serializes"));
    Ok(())
}
