use std::fs;
use std::path::PathBuf;

use clap::Args;
use starlap::arrayio::{labels_to_array, scalar_map_from_array, ArrayData, ArrayFile, Dtype};
use starlap::grid::ScalarMap;
use starlap::synth::{overlap_fraction, synthesize, SynthConfig};

use super::{read_array, with_path, write_array, CliResult};

#[derive(Args)]
pub struct SynthArgs {
    /// Intensity image (.npy, u8/u16/f32).
    #[arg(long)]
    pub image: PathBuf,
    /// Disjoint instance labels (.npy, 2D label image or 3D stack).
    #[arg(long)]
    pub labels: PathBuf,
    /// Required overlap fraction of object pixels.
    #[arg(long, default_value_t = 0.15)]
    pub min_overlap: f64,
    /// Seed of the placement stream.
    #[arg(long)]
    pub seed: u64,
    /// Placement re-sampling budget.
    #[arg(long, default_value_t = 200)]
    pub max_attempts: usize,
    /// Add intensities without saturating at the dtype ceiling.
    #[arg(long)]
    pub no_clip: bool,
    /// Directory receiving image.npy and labels.npy.
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn run(args: SynthArgs) -> CliResult {
    let image_array = read_array(&args.image)?;
    let dtype = image_array.dtype();
    let image =
        scalar_map_from_array::<f64>(&image_array).map_err(|e| with_path(&args.image, e))?;
    let labels = super::load_labels(&args.labels)?;

    let clip_max = if args.no_clip {
        None
    } else {
        match dtype {
            Dtype::U8 => Some(255.0),
            Dtype::U16 => Some(65_535.0),
            Dtype::F32 => None,
        }
    };
    let cfg = SynthConfig::<f64> {
        min_overlap_fraction: args.min_overlap,
        max_attempts: args.max_attempts,
        clip_max,
        seed: args.seed,
        ..SynthConfig::default()
    };

    let (out_image, out_labels) = synthesize(&image, &labels, &cfg)?;

    fs::create_dir_all(&args.out_dir).map_err(|e| with_path(&args.out_dir, e.into()))?;
    write_array(
        &args.out_dir.join("image.npy"),
        &image_to_dtype(&out_image, dtype),
    )?;
    write_array(
        &args.out_dir.join("labels.npy"),
        &labels_to_array(&out_labels),
    )?;

    println!(
        "synthesized {} instance(s), overlap fraction {:.4} -> {}",
        out_labels.len(),
        overlap_fraction::<f64>(&out_labels),
        args.out_dir.display()
    );
    Ok(())
}

/// Writes the image back in its input dtype; saturated sums always fit the
/// integer ranges.
fn image_to_dtype(map: &ScalarMap<f64>, dtype: Dtype) -> ArrayFile {
    let shape = vec![map.dims().height(), map.dims().width()];
    let data = match dtype {
        Dtype::U8 => ArrayData::U8(
            map.data()
                .iter()
                .map(|&v| v.round().clamp(0.0, 255.0) as u8)
                .collect(),
        ),
        Dtype::U16 => ArrayData::U16(
            map.data()
                .iter()
                .map(|&v| v.round().clamp(0.0, 65_535.0) as u16)
                .collect(),
        ),
        Dtype::F32 => ArrayData::F32(map.data().iter().map(|&v| v as f32).collect()),
    };
    ArrayFile::new(shape, data).expect("shape matches payload")
}
