//! Evaluation suite: greedy one-to-one matching, the overlapping-cytology
//! challenge metrics (DC, TP_p, FP_p, FN_o at dice 0.7) and average precision
//! over IoU thresholds, per image and aggregated across images.

use crate::error::{Error, Result};
use crate::geometry::{dice, pixel_iou};
use crate::groundtruth::LabelStack;
use crate::real::Real;

/// Pairwise similarity used for matching.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatchValue {
    Dice,
    Iou,
}

/// Matched (prediction, ground truth) pair with its similarity value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatchPair<F> {
    pub pred: usize,
    pub gt: usize,
    pub value: F,
}

/// One-to-one matching: every index appears at most once and every pair's
/// value strictly exceeds the threshold the matching was built with.
#[derive(Clone, Debug, PartialEq)]
pub struct Matching<F> {
    pub pairs: Vec<MatchPair<F>>,
    pub unmatched_pred: Vec<usize>,
    pub unmatched_gt: Vec<usize>,
}

/// Greedy one-to-one matching: all cross pairs are evaluated, sorted by value
/// descending (ties by index pair ascending), and accepted while both
/// endpoints are unused and the value strictly exceeds `threshold`.
pub fn match_by<F: Real>(
    preds: &LabelStack,
    gts: &LabelStack,
    value: MatchValue,
    threshold: F,
) -> Result<Matching<F>> {
    preds.dims().check_matches(gts.dims(), "match_by")?;

    let mut scored: Vec<MatchPair<F>> = Vec::new();
    for (pi, pm) in preds.instances().iter().enumerate() {
        for (gi, gm) in gts.instances().iter().enumerate() {
            let v = match value {
                MatchValue::Dice => dice(pm, gm)?,
                MatchValue::Iou => pixel_iou(pm, gm)?,
            };
            if v > threshold {
                scored.push(MatchPair {
                    pred: pi,
                    gt: gi,
                    value: v,
                });
            }
        }
    }
    scored.sort_by(|a, b| {
        b.value
            .partial_cmp(&a.value)
            .expect("similarity values are finite")
            .then((a.pred, a.gt).cmp(&(b.pred, b.gt)))
    });

    let mut pred_used = vec![false; preds.len()];
    let mut gt_used = vec![false; gts.len()];
    let mut pairs = Vec::new();
    for pair in scored {
        if !pred_used[pair.pred] && !gt_used[pair.gt] {
            pred_used[pair.pred] = true;
            gt_used[pair.gt] = true;
            pairs.push(pair);
        }
    }
    Ok(Matching {
        pairs,
        unmatched_pred: (0..preds.len()).filter(|&i| !pred_used[i]).collect(),
        unmatched_gt: (0..gts.len()).filter(|&i| !gt_used[i]).collect(),
    })
}

/// Challenge-protocol rates over the dice-0.7 matching.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChallengeMetrics<F> {
    /// Mean dice over matched pairs (0 without matches).
    pub dc: F,
    /// Mean `|P ∩ G| / |G|` over matched pairs (0 without matches).
    pub tp_p: F,
    /// Mean `|P \ G| / |P|` over matched pairs (0 without matches).
    pub fp_p: F,
    /// Unmatched ground-truth fraction (0 when there are no ground truths).
    pub fn_o: F,
}

pub const CHALLENGE_DICE_THRESHOLD: f64 = 0.7;

pub fn challenge_metrics<F: Real>(
    preds: &LabelStack,
    gts: &LabelStack,
) -> Result<ChallengeMetrics<F>> {
    let matching = match_by(
        preds,
        gts,
        MatchValue::Dice,
        F::of_f64(CHALLENGE_DICE_THRESHOLD),
    )?;
    let n = matching.pairs.len();
    let (mut dc, mut tp_p, mut fp_p) = (F::zero(), F::zero(), F::zero());
    for pair in &matching.pairs {
        let pm = preds.get(pair.pred);
        let gm = gts.get(pair.gt);
        let inter = pm.intersection_count(gm);
        dc += pair.value;
        tp_p += F::of_usize(inter) / F::of_usize(gm.count());
        fp_p += F::of_usize(pm.count() - inter) / F::of_usize(pm.count());
    }
    if n > 0 {
        let nf = F::of_usize(n);
        dc /= nf;
        tp_p /= nf;
        fp_p /= nf;
    }
    let fn_o = if gts.is_empty() {
        F::zero()
    } else {
        F::of_usize(matching.unmatched_gt.len()) / F::of_usize(gts.len())
    };
    Ok(ChallengeMetrics {
        dc,
        tp_p,
        fp_p,
        fn_o,
    })
}

/// `AP = TP / (TP + FP + FN)` under one-to-one IoU matching at threshold
/// `tau` in (0, 1); 1 when prediction and ground truth are both empty.
pub fn average_precision<F: Real>(preds: &LabelStack, gts: &LabelStack, tau: F) -> Result<F> {
    if !(tau > F::zero() && tau < F::one()) {
        return Err(Error::InvalidTau {
            value: tau.as_f64(),
        });
    }
    let matching = match_by(preds, gts, MatchValue::Iou, tau)?;
    let tp = matching.pairs.len();
    let fp = matching.unmatched_pred.len();
    let fn_ = matching.unmatched_gt.len();
    if tp + fp + fn_ == 0 {
        return Ok(F::one());
    }
    Ok(F::of_usize(tp) / F::of_usize(tp + fp + fn_))
}

/// Average precision at each threshold, in the given order. Non-increasing
/// in tau for fixed inputs.
pub fn ap_sweep<F: Real>(preds: &LabelStack, gts: &LabelStack, taus: &[F]) -> Result<Vec<(F, F)>> {
    taus.iter()
        .map(|&tau| Ok((tau, average_precision(preds, gts, tau)?)))
        .collect()
}

/// All metrics of one image.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageMetrics<F> {
    pub dc: F,
    pub tp_p: F,
    pub fp_p: F,
    pub fn_o: F,
    pub ap: Vec<(F, F)>,
}

pub fn evaluate_image<F: Real>(
    preds: &LabelStack,
    gts: &LabelStack,
    taus: &[F],
) -> Result<ImageMetrics<F>> {
    let ch = challenge_metrics(preds, gts)?;
    let ap = ap_sweep(preds, gts, taus)?;
    Ok(ImageMetrics {
        dc: ch.dc,
        tp_p: ch.tp_p,
        fp_p: ch.fp_p,
        fn_o: ch.fn_o,
        ap,
    })
}

/// Per-image metrics plus the across-image unweighted mean and population
/// standard deviation.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport<F> {
    pub per_image: Vec<ImageMetrics<F>>,
    pub mean: ImageMetrics<F>,
    pub std_dev: ImageMetrics<F>,
}

pub fn evaluate_images<F: Real>(
    pairs: &[(&LabelStack, &LabelStack)],
    taus: &[F],
) -> Result<MetricsReport<F>> {
    if pairs.is_empty() {
        return Err(Error::InvalidConfig {
            message: "metrics require at least one (prediction, ground truth) pair".into(),
        });
    }
    let per_image: Vec<ImageMetrics<F>> = pairs
        .iter()
        .map(|(p, g)| evaluate_image(p, g, taus))
        .collect::<Result<_>>()?;

    let n = F::of_usize(per_image.len());
    let fields = |m: &ImageMetrics<F>| {
        let mut v = vec![m.dc, m.tp_p, m.fp_p, m.fn_o];
        v.extend(m.ap.iter().map(|&(_, ap)| ap));
        v
    };
    let k = 4 + taus.len();
    let mut mean = vec![F::zero(); k];
    for m in &per_image {
        for (acc, v) in mean.iter_mut().zip(fields(m)) {
            *acc += v;
        }
    }
    for acc in &mut mean {
        *acc /= n;
    }
    let mut var = vec![F::zero(); k];
    for m in &per_image {
        for ((acc, v), mu) in var.iter_mut().zip(fields(m)).zip(&mean) {
            let d = v - *mu;
            *acc += d * d;
        }
    }
    for acc in &mut var {
        *acc /= n;
    }

    let rebuild = |v: &[F]| ImageMetrics {
        dc: v[0],
        tp_p: v[1],
        fp_p: v[2],
        fn_o: v[3],
        ap: taus.iter().cloned().zip(v[4..].iter().cloned()).collect(),
    };
    let std_dev: Vec<F> = var.iter().map(|&x| x.sqrt()).collect();
    Ok(MetricsReport {
        mean: rebuild(&mean),
        std_dev: rebuild(&std_dev),
        per_image,
    })
}
