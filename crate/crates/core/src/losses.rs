//! Pure evaluation of the uncertainty-weighted multi-task objective over
//! prediction/target map pairs. No gradients or optimizer: these functions
//! report loss values for map pairs (useful as a quality report and to
//! validate external training code).

use crate::error::{Error, Result};
use crate::grid::{Mask, ScalarMap, StarDistanceMap};
use crate::groundtruth::GroundTruthMaps;
use crate::inference::PredictionMaps;
use crate::real::{in_unit_interval, Real};

/// Per-task homoscedastic uncertainties; all strictly positive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TaskUncertainties<F> {
    pub sigma_over: F,
    pub sigma_obj: F,
    pub sigma_dist: F,
}

impl<F: Real> TaskUncertainties<F> {
    pub fn new(sigma_over: F, sigma_obj: F, sigma_dist: F) -> Result<Self> {
        for s in [sigma_over, sigma_obj, sigma_dist] {
            if s.is_nan() || s <= F::zero() || !s.is_finite() {
                return Err(Error::NonPositiveSigma { value: s.as_f64() });
            }
        }
        Ok(TaskUncertainties {
            sigma_over,
            sigma_obj,
            sigma_dist,
        })
    }

    pub fn unit() -> Self {
        TaskUncertainties {
            sigma_over: F::one(),
            sigma_obj: F::one(),
            sigma_dist: F::one(),
        }
    }
}

/// Component losses, the combined objective, and the pixel counts each term
/// was averaged over.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossReport<F> {
    pub l_over: F,
    pub l_obj: F,
    pub l_dist: F,
    pub combined: F,
    pub n_over: usize,
    pub n_obj: usize,
    pub n_dist: usize,
}

const BCE_EPS: f64 = 1e-7;

/// Mean binary cross-entropy over the included pixels, with predictions
/// clamped to `[1e-7, 1 - 1e-7]` before the logs. Targets may be soft
/// (anywhere in [0, 1]); for binary targets a perfect prediction scores ~0.
pub fn bce<F: Real>(pred: &ScalarMap<F>, target: &ScalarMap<F>, include: &Mask) -> Result<F> {
    pred.dims().check_matches(target.dims(), "bce")?;
    pred.dims().check_matches(include.dims(), "bce")?;
    if include.is_empty() {
        return Err(Error::EmptyInclude);
    }
    let eps = F::of_f64(BCE_EPS);
    let lo = eps;
    let hi = F::one() - eps;
    let mut sum = F::zero();
    for i in include.iter_indices() {
        let p = pred.get_index(i);
        let t = target.get_index(i);
        if !in_unit_interval(p) {
            return Err(Error::ValueOutOfRange {
                what: "bce prediction",
                value: p.as_f64(),
            });
        }
        if !in_unit_interval(t) {
            return Err(Error::ValueOutOfRange {
                what: "bce target",
                value: t.as_f64(),
            });
        }
        let p = p.max(lo).min(hi);
        sum -= t * p.ln() + (F::one() - t) * (F::one() - p).ln();
    }
    Ok(sum / F::of_usize(include.count()))
}

/// Weighted mean absolute star-distance error: each included pixel
/// contributes the mean absolute per-ray difference, weighted by its true
/// object probability. Zero when the weights sum to zero.
pub fn dist_loss<F: Real>(
    pred: &StarDistanceMap<F>,
    truth: &StarDistanceMap<F>,
    weights: &ScalarMap<F>,
    include: &Mask,
) -> Result<F> {
    pred.dims().check_matches(truth.dims(), "dist_loss")?;
    pred.dims().check_matches(weights.dims(), "dist_loss")?;
    pred.dims().check_matches(include.dims(), "dist_loss")?;
    if pred.n_rays() != truth.n_rays() {
        return Err(Error::RayCountMismatch {
            expected: truth.n_rays(),
            actual: pred.n_rays(),
        });
    }
    let n_rays = F::of_usize(pred.n_rays());
    let mut num = F::zero();
    let mut den = F::zero();
    for i in include.iter_indices() {
        let p = pred.dims().pixel_at(i);
        let w = weights.get_index(i);
        let mut err = F::zero();
        for (a, b) in pred.at(p).iter().zip(truth.at(p)) {
            if *a < F::zero() || *b < F::zero() {
                return Err(Error::NegativeValue {
                    what: "star distance",
                    value: a.min(*b).as_f64(),
                });
            }
            err += (*a - *b).abs();
        }
        num += w * (err / n_rays);
        den += w;
    }
    if den == F::zero() {
        return Ok(F::zero());
    }
    Ok(num / den)
}

/// Uncertainty-weighted combination of the three component losses:
/// `sum_i L_i / sigma_i^2 + log(sigma_over * sigma_obj * sigma_dist)`.
///
/// For fixed positive components the minimizing uncertainties satisfy
/// `sigma_i = sqrt(2 L_i)`.
pub fn multitask_loss<F: Real>(
    l_over: F,
    l_obj: F,
    l_dist: F,
    sig: &TaskUncertainties<F>,
) -> Result<F> {
    for s in [sig.sigma_over, sig.sigma_obj, sig.sigma_dist] {
        if s.is_nan() || s <= F::zero() || !s.is_finite() {
            return Err(Error::NonPositiveSigma { value: s.as_f64() });
        }
    }
    for l in [l_over, l_obj, l_dist] {
        if l < F::zero() {
            return Err(Error::NegativeValue {
                what: "component loss",
                value: l.as_f64(),
            });
        }
    }
    Ok(l_over / (sig.sigma_over * sig.sigma_over)
        + l_obj / (sig.sigma_obj * sig.sigma_obj)
        + l_dist / (sig.sigma_dist * sig.sigma_dist)
        + (sig.sigma_over * sig.sigma_obj * sig.sigma_dist).ln())
}

/// Evaluates the full objective for a prediction against ground truth:
/// overlap BCE over all pixels, object BCE and distance loss over the valid
/// (non-overlap) pixels only, distance errors weighted by true object
/// probability.
pub fn loss_report<F: Real>(
    maps: &PredictionMaps<F>,
    gt: &GroundTruthMaps<F>,
    sig: &TaskUncertainties<F>,
) -> Result<LossReport<F>> {
    maps.dims().check_matches(gt.dims(), "loss_report")?;
    let all = Mask::full(maps.dims());
    let l_over = bce(&maps.p_over, &gt.p_over, &all)?;
    let l_obj = bce(&maps.p_obj, &gt.p_obj, &gt.valid)?;
    let l_dist = dist_loss(&maps.star_dists, &gt.star_dists, &gt.p_obj, &gt.valid)?;
    let combined = multitask_loss(l_over, l_obj, l_dist, sig)?;
    Ok(LossReport {
        l_over,
        l_obj,
        l_dist,
        combined,
        n_over: all.count(),
        n_obj: gt.valid.count(),
        n_dist: gt.valid.count(),
    })
}
