use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::Args;
use starlap::arrayio::{mask_from_array, scalar_map_from_array, star_map_from_array, LossDocument};
use starlap::groundtruth::GroundTruthMaps;
use starlap::losses::{loss_report, TaskUncertainties};
use starlap::PredictionMaps;

use super::{parse_real_list, read_array, usage, with_path, CliResult};

#[derive(Args)]
pub struct LossArgs {
    /// Directory with predicted p_obj.npy, p_over.npy, dist.npy.
    #[arg(long)]
    pub pred_dir: PathBuf,
    /// Directory with ground-truth p_obj.npy, p_over.npy, dist.npy, valid.npy.
    #[arg(long)]
    pub gt_dir: PathBuf,
    /// Task uncertainties sigma_over,sigma_obj,sigma_dist.
    #[arg(long, default_value = "1,1,1")]
    pub sigma: String,
    /// Output report (JSON).
    #[arg(long)]
    pub out: PathBuf,
}

fn scalar(dir: &Path, name: &str) -> CliResult<starlap::ScalarMap<f64>> {
    let path = dir.join(name);
    scalar_map_from_array(&read_array(&path)?).map_err(|e| with_path(&path, e))
}

pub fn run(args: LossArgs) -> CliResult {
    let sigma = parse_real_list(&args.sigma, "sigma")?;
    let [s_over, s_obj, s_dist]: [f64; 3] = sigma
        .try_into()
        .map_err(|_| usage("--sigma requires exactly three values"))?;
    let sig = TaskUncertainties::new(s_over, s_obj, s_dist)?;

    let dist_path = args.pred_dir.join("dist.npy");
    let maps = PredictionMaps::new(
        scalar(&args.pred_dir, "p_obj.npy")?,
        scalar(&args.pred_dir, "p_over.npy")?,
        star_map_from_array(&read_array(&dist_path)?).map_err(|e| with_path(&dist_path, e))?,
    )?;

    let gt_dist_path = args.gt_dir.join("dist.npy");
    let valid_path = args.gt_dir.join("valid.npy");
    let gt = GroundTruthMaps::<f64> {
        p_obj: scalar(&args.gt_dir, "p_obj.npy")?,
        p_over: scalar(&args.gt_dir, "p_over.npy")?,
        star_dists: star_map_from_array(&read_array(&gt_dist_path)?)
            .map_err(|e| with_path(&gt_dist_path, e))?,
        valid: mask_from_array(&read_array(&valid_path)?).map_err(|e| with_path(&valid_path, e))?,
    };

    let report = loss_report(&maps, &gt, &sig)?;
    let doc = LossDocument::from_report(&report, [s_over, s_obj, s_dist]);
    let file = File::create(&args.out).map_err(|e| with_path(&args.out, e.into()))?;
    doc.to_writer(BufWriter::new(file))
        .map_err(|e| with_path(&args.out, e))?;

    println!(
        "L_over {:.6}  L_obj {:.6}  L_dist {:.6}  combined {:.6}",
        doc.l_over, doc.l_obj, doc.l_dist, doc.combined
    );
    Ok(())
}
