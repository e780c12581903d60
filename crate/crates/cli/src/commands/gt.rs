use std::fs;
use std::path::PathBuf;

use clap::Args;
use starlap::arrayio::{mask_to_array, scalar_map_to_f32, star_map_to_f32};
use starlap::{make_ground_truth, GroundTruthMaps, RayConfig};

use super::{load_labels, with_path, write_array, CliResult};

#[derive(Args)]
pub struct GtArgs {
    /// Instance labels: 2D label image or 3D KxHxW mask stack (.npy).
    #[arg(long)]
    pub labels: PathBuf,
    /// Number of radial directions.
    #[arg(long, default_value_t = 32)]
    pub rays: usize,
    /// Directory receiving p_obj.npy, p_over.npy, dist.npy, valid.npy.
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn run(args: GtArgs) -> CliResult {
    let stack = load_labels(&args.labels)?;
    let rays = RayConfig::new(args.rays)?;
    let gt: GroundTruthMaps<f64> = make_ground_truth(&stack, &rays);

    fs::create_dir_all(&args.out_dir).map_err(|e| with_path(&args.out_dir, e.into()))?;
    write_array(
        &args.out_dir.join("p_obj.npy"),
        &scalar_map_to_f32(&gt.p_obj),
    )?;
    write_array(
        &args.out_dir.join("p_over.npy"),
        &scalar_map_to_f32(&gt.p_over),
    )?;
    write_array(
        &args.out_dir.join("dist.npy"),
        &star_map_to_f32(&gt.star_dists),
    )?;
    write_array(&args.out_dir.join("valid.npy"), &mask_to_array(&gt.valid))?;

    println!(
        "wrote ground-truth maps for {} instance(s) on a {}x{} grid to {}",
        stack.len(),
        stack.dims().height(),
        stack.dims().width(),
        args.out_dir.display()
    );
    Ok(())
}
