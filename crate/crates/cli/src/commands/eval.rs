use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use clap::Args;
use starlap::arrayio::{MetricsDocument, SegmentationDocument};
use starlap::groundtruth::LabelStack;
use starlap::metrics::evaluate_images;

use super::{load_labels, parse_real_list, usage, with_path, CliResult};

#[derive(Args)]
pub struct EvalArgs {
    /// Predictions: segmentation document (.json) or label stack (.npy);
    /// with a directory here and at --gt, images are paired by file stem.
    #[arg(long)]
    pub pred: PathBuf,
    /// Ground truth labels (.npy), or a directory of them.
    #[arg(long)]
    pub gt: PathBuf,
    /// Matching thresholds for the AP sweep.
    #[arg(long, default_value = "0.4,0.5,0.6,0.7,0.8")]
    pub tau: String,
    /// Output report (JSON).
    #[arg(long)]
    pub out: PathBuf,
}

fn load_predictions(path: &Path) -> CliResult<LabelStack> {
    if path.extension().is_some_and(|e| e == "json") {
        let file = File::open(path).map_err(|e| with_path(path, e.into()))?;
        let doc = SegmentationDocument::from_reader(BufReader::new(file))
            .map_err(|e| with_path(path, e))?;
        doc.to_label_stack().map_err(|e| with_path(path, e))
    } else {
        load_labels(path)
    }
}

/// Pairs prediction files with ground-truth files by stem.
fn directory_pairs(pred_dir: &Path, gt_dir: &Path) -> CliResult<Vec<(PathBuf, PathBuf, String)>> {
    let mut gt_files: Vec<PathBuf> = std::fs::read_dir(gt_dir)
        .map_err(|e| with_path(gt_dir, e.into()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "npy"))
        .collect();
    gt_files.sort();
    if gt_files.is_empty() {
        return Err(usage(format!(
            "{}: no .npy ground truth files found",
            gt_dir.display()
        )));
    }
    let mut pairs = Vec::new();
    for gt_path in gt_files {
        let stem = gt_path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string();
        let pred_path = ["json", "npy"]
            .iter()
            .map(|ext| pred_dir.join(format!("{stem}.{ext}")))
            .find(|p| p.exists())
            .ok_or_else(|| {
                usage(format!(
                    "{}: no prediction ({stem}.json or {stem}.npy) for {}",
                    pred_dir.display(),
                    gt_path.display()
                ))
            })?;
        pairs.push((pred_path, gt_path, stem));
    }
    Ok(pairs)
}

pub fn run(args: EvalArgs) -> CliResult {
    let taus = parse_real_list(&args.tau, "tau")?;
    if taus.is_empty() {
        return Err(usage("at least one tau is required"));
    }

    let inputs: Vec<(PathBuf, PathBuf, String)> = if args.pred.is_dir() && args.gt.is_dir() {
        directory_pairs(&args.pred, &args.gt)?
    } else {
        let name = args
            .gt
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("image")
            .to_string();
        vec![(args.pred.clone(), args.gt.clone(), name)]
    };

    let mut stacks: Vec<(LabelStack, LabelStack)> = Vec::new();
    let mut names = Vec::new();
    for (pred_path, gt_path, name) in &inputs {
        let preds = load_predictions(pred_path)?;
        let gts = load_labels(gt_path)?;
        if preds.dims() != gts.dims() {
            return Err(usage(format!(
                "{} ({}x{}) and {} ({}x{}) have different grids",
                pred_path.display(),
                preds.dims().height(),
                preds.dims().width(),
                gt_path.display(),
                gts.dims().height(),
                gts.dims().width()
            )));
        }
        stacks.push((preds, gts));
        names.push(name.clone());
    }

    let pairs: Vec<(&LabelStack, &LabelStack)> = stacks.iter().map(|(p, g)| (p, g)).collect();
    let report = evaluate_images(&pairs, &taus)?;
    let doc = MetricsDocument::from_report(&report, &names, &taus);

    let file = File::create(&args.out).map_err(|e| with_path(&args.out, e.into()))?;
    doc.to_writer(BufWriter::new(file))
        .map_err(|e| with_path(&args.out, e))?;

    println!(
        "evaluated {} image(s): DC {:.4}  TP_p {:.4}  FP_p {:.4}  FN_o {:.4}",
        doc.per_image.len(),
        doc.mean.dc,
        doc.mean.tp_p,
        doc.mean.fp_p,
        doc.mean.fn_o
    );
    for entry in &doc.mean.ap {
        println!(
            "AP(tau={:.2}) = {:.4} +- {:.4}",
            entry.tau,
            entry.ap,
            lookup_std(&doc, entry.tau)
        );
    }
    Ok(())
}

fn lookup_std(doc: &MetricsDocument, tau: f64) -> f64 {
    doc.std_dev
        .ap
        .iter()
        .find(|e| e.tau == tau)
        .map(|e| e.ap)
        .unwrap_or(0.0)
}
