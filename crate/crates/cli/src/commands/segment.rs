use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use starlap::arrayio::{
    labels_to_array, scalar_map_from_array, star_map_from_array, SegmentationConfigEcho,
    SegmentationDocument,
};
use starlap::{segment, InferenceConfig, IouKind, PredictionMaps, RayConfig, ScoreSource};

use super::{read_array, with_path, write_array, CliResult};

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ScoreArg {
    /// Order candidates by the sampling weight p_obj * (1 - p_over).
    Weight,
    /// Order candidates by raw object probability.
    Obj,
}

#[derive(Args)]
pub struct SegmentArgs {
    /// Object probability map, 2D .npy.
    #[arg(long)]
    pub obj: PathBuf,
    /// Overlap probability map, 2D .npy.
    #[arg(long)]
    pub over: PathBuf,
    /// Star distance map, HxWxR .npy.
    #[arg(long)]
    pub dist: PathBuf,
    /// Proposal threshold on the sampling weight.
    #[arg(long)]
    pub rho: f64,
    /// NMS IoU threshold.
    #[arg(long)]
    pub nu: f64,
    /// Candidate list cap.
    #[arg(long, default_value_t = 10_000)]
    pub max_proposals: usize,
    /// Suppress with plain pixel IoU instead of overlap-aware IoU.
    #[arg(long)]
    pub plain_iou: bool,
    /// Confidence score source.
    #[arg(long, value_enum, default_value_t = ScoreArg::Weight)]
    pub score: ScoreArg,
    /// Output segmentation document (JSON).
    #[arg(long)]
    pub out: PathBuf,
    /// Optional KxHxW mask stack output (.npy).
    #[arg(long)]
    pub out_masks: Option<PathBuf>,
}

pub fn run(args: SegmentArgs) -> CliResult {
    let p_obj = scalar_map_from_array::<f64>(&read_array(&args.obj)?)
        .map_err(|e| with_path(&args.obj, e))?;
    let p_over = scalar_map_from_array::<f64>(&read_array(&args.over)?)
        .map_err(|e| with_path(&args.over, e))?;
    let dist = star_map_from_array::<f64>(&read_array(&args.dist)?)
        .map_err(|e| with_path(&args.dist, e))?;

    let rays = RayConfig::new(dist.n_rays())?;
    let maps = PredictionMaps::new(p_obj, p_over, dist)?;
    let cfg = InferenceConfig {
        rho: args.rho,
        nu: args.nu,
        rays,
        max_proposals: args.max_proposals,
        score: match args.score {
            ScoreArg::Weight => ScoreSource::ProposalWeight,
            ScoreArg::Obj => ScoreSource::ObjectProbability,
        },
        iou: if args.plain_iou {
            IouKind::Plain
        } else {
            IouKind::OverlapAware
        },
    };
    cfg.validate()?;

    let result = segment(&maps, &cfg)?;
    let doc = SegmentationDocument::from_result(&result, SegmentationConfigEcho::from_config(&cfg));
    let file = File::create(&args.out).map_err(|e| with_path(&args.out, e.into()))?;
    doc.to_writer(BufWriter::new(file))
        .map_err(|e| with_path(&args.out, e))?;

    if let Some(path) = &args.out_masks {
        write_array(path, &labels_to_array(&result.to_label_stack()))?;
    }

    println!(
        "accepted {} instance(s) on a {}x{} grid -> {}",
        result.len(),
        result.dims().height(),
        result.dims().width(),
        args.out.display()
    );
    Ok(())
}
