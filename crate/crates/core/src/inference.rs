//! Inference: overlap-weighted proposal selection and overlap-aware greedy
//! non-maximum suppression, turning prediction maps into an overlapping
//! instance segmentation.
//!
//! Proposals are sampled deterministically: one candidate per pixel whose
//! weight `P_obj * (1 - P_over)` exceeds the threshold rho, processed in
//! descending score order. The NMS discounts pairwise intersections by the
//! predicted overlap, so detections of truly overlapping objects do not
//! suppress each other; objects fully inside predicted overlap yield no
//! candidate at all (they are undetectable by construction).

use crate::error::{Error, Result};
use crate::geometry::{overlap_aware_iou, pixel_iou, RayConfig, StarPolygon};
use crate::grid::{GridDims, Mask, ScalarMap, StarDistanceMap};
use crate::groundtruth::{GroundTruthMaps, LabelStack};
use crate::real::{in_unit_interval, Real};

/// Per-pixel network (or ground-truth-derived) outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictionMaps<F> {
    pub p_obj: ScalarMap<F>,
    pub p_over: ScalarMap<F>,
    pub star_dists: StarDistanceMap<F>,
}

impl<F: Real> PredictionMaps<F> {
    pub fn new(
        p_obj: ScalarMap<F>,
        p_over: ScalarMap<F>,
        star_dists: StarDistanceMap<F>,
    ) -> Result<Self> {
        p_obj
            .dims()
            .check_matches(p_over.dims(), "prediction maps")?;
        p_obj
            .dims()
            .check_matches(star_dists.dims(), "prediction maps")?;
        p_obj.validate_probabilities("object probability")?;
        p_over.validate_probabilities("overlap probability")?;
        star_dists.validate_distances("star distance")?;
        Ok(PredictionMaps {
            p_obj,
            p_over,
            star_dists,
        })
    }

    /// Uses ground-truth maps as if they were perfect predictions; the
    /// standard way to exercise the inference path without a network.
    pub fn from_ground_truth(gt: &GroundTruthMaps<F>) -> Self {
        PredictionMaps {
            p_obj: gt.p_obj.clone(),
            p_over: gt.p_over.clone(),
            star_dists: gt.star_dists.clone(),
        }
    }

    pub fn dims(&self) -> GridDims {
        self.p_obj.dims()
    }
}

/// Which quantity orders candidates and acts as the confidence score.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ScoreSource {
    /// The proposal weight `P_obj * (1 - P_over)` (the default).
    #[default]
    ProposalWeight,
    /// Raw object probability.
    ObjectProbability,
}

/// Pairwise similarity used by the suppression test.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum IouKind {
    /// Overlap-discounted intersection over plain union (the default).
    #[default]
    OverlapAware,
    /// Plain pixel IoU, ignoring the overlap map.
    Plain,
}

/// Thresholds and switches for [`segment`].
#[derive(Clone, Debug, PartialEq)]
pub struct InferenceConfig<F> {
    /// Proposal threshold on the sampling weight.
    pub rho: F,
    /// NMS suppression threshold: a candidate is accepted iff its IoU with
    /// every already accepted mask is <= nu.
    pub nu: F,
    pub rays: RayConfig,
    /// Cap on the candidate list length (bounds the quadratic NMS cost).
    pub max_proposals: usize,
    pub score: ScoreSource,
    pub iou: IouKind,
}

impl<F: Real> InferenceConfig<F> {
    pub const DEFAULT_MAX_PROPOSALS: usize = 10_000;

    pub fn new(rho: F, nu: F) -> Result<Self> {
        let cfg = InferenceConfig {
            rho,
            nu,
            rays: RayConfig::default(),
            max_proposals: Self::DEFAULT_MAX_PROPOSALS,
            score: ScoreSource::default(),
            iou: IouKind::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !in_unit_interval(self.rho) {
            return Err(Error::ValueOutOfRange {
                what: "proposal threshold rho",
                value: self.rho.as_f64(),
            });
        }
        if !in_unit_interval(self.nu) {
            return Err(Error::ValueOutOfRange {
                what: "NMS threshold nu",
                value: self.nu.as_f64(),
            });
        }
        if self.max_proposals == 0 {
            return Err(Error::InvalidConfig {
                message: "max_proposals must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// One accepted detection.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentedInstance<F> {
    pub polygon: StarPolygon<F>,
    pub mask: Mask,
    pub score: F,
}

/// Accepted proposals in descending score order; pairwise overlap-aware IoU
/// under the prediction's overlap map is at most the nu they were run with.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentationResult<F> {
    dims: GridDims,
    pub instances: Vec<SegmentedInstance<F>>,
}

impl<F: Real> SegmentationResult<F> {
    pub fn dims(&self) -> GridDims {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Accepted masks as a label stack (for evaluation against ground truth).
    pub fn to_label_stack(&self) -> LabelStack {
        let mut stack = LabelStack::empty(self.dims);
        for inst in &self.instances {
            stack
                .push(inst.mask.clone())
                .expect("accepted masks are nonempty and on the result grid");
        }
        stack
    }
}

/// Sampling weight of a pixel: `P_obj * (1 - P_over)`. Zero wherever overlap
/// is certain, the plain object probability where overlap is excluded.
pub fn proposal_weight<F: Real>(p_obj: F, p_over: F) -> Result<F> {
    if !in_unit_interval(p_obj) {
        return Err(Error::ValueOutOfRange {
            what: "object probability",
            value: p_obj.as_f64(),
        });
    }
    if !in_unit_interval(p_over) {
        return Err(Error::ValueOutOfRange {
            what: "overlap probability",
            value: p_over.as_f64(),
        });
    }
    Ok(p_obj * (F::one() - p_over))
}

/// One proposal per pixel whose weight exceeds `cfg.rho`, with radii read
/// from the star distance map at that pixel. Sorted by descending score,
/// ties broken by (row, col) ascending; truncated to `cfg.max_proposals`.
pub fn candidate_proposals<F: Real>(
    maps: &PredictionMaps<F>,
    cfg: &InferenceConfig<F>,
) -> Result<Vec<StarPolygon<F>>> {
    cfg.validate()?;
    if maps.star_dists.n_rays() != cfg.rays.n_rays() {
        return Err(Error::RayCountMismatch {
            expected: cfg.rays.n_rays(),
            actual: maps.star_dists.n_rays(),
        });
    }
    let dims = maps.dims();
    let mut cands = Vec::new();
    for p in dims.pixels() {
        let weight = proposal_weight(maps.p_obj.get(p), maps.p_over.get(p))?;
        if weight > cfg.rho {
            let score = match cfg.score {
                ScoreSource::ProposalWeight => weight,
                ScoreSource::ObjectProbability => maps.p_obj.get(p),
            };
            cands.push(StarPolygon {
                center: p,
                radii: maps.star_dists.at(p).to_vec(),
                score,
            });
        }
    }
    cands.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .expect("scores are finite")
            .then(a.center.cmp(&b.center))
    });
    cands.truncate(cfg.max_proposals);
    Ok(cands)
}

/// Greedy NMS over a score-sorted candidate list: accept a candidate iff its
/// IoU with every already accepted mask is at most `nu`. Each candidate is
/// rasterized exactly once.
pub fn nms<F: Real>(
    candidates: &[StarPolygon<F>],
    p_over: &ScalarMap<F>,
    nu: F,
    rays: &RayConfig,
    dims: GridDims,
    iou: IouKind,
) -> Result<SegmentationResult<F>> {
    if !in_unit_interval(nu) {
        return Err(Error::ValueOutOfRange {
            what: "NMS threshold nu",
            value: nu.as_f64(),
        });
    }
    dims.check_matches(p_over.dims(), "nms overlap map")?;
    for (index, pair) in candidates.windows(2).enumerate() {
        if pair[1].score > pair[0].score {
            return Err(Error::UnsortedCandidates { index: index + 1 });
        }
    }

    let span = (dims.height() + dims.width()) as f64;
    let max_radius = candidates
        .iter()
        .flat_map(|c| c.radii.iter())
        .cloned()
        .fold(F::zero(), F::max)
        .ceil()
        .as_f64()
        .clamp(0.0, span) as usize;
    let tables = crate::geometry::RasterTables::new(rays, max_radius);

    let mut accepted: Vec<SegmentedInstance<F>> = Vec::new();
    'outer: for cand in candidates {
        let mask = tables.rasterize(cand, rays, dims)?;
        for kept in &accepted {
            let value = match iou {
                IouKind::OverlapAware => overlap_aware_iou(&mask, &kept.mask, p_over)?,
                IouKind::Plain => pixel_iou(&mask, &kept.mask)?,
            };
            if value > nu {
                continue 'outer;
            }
        }
        accepted.push(SegmentedInstance {
            polygon: cand.clone(),
            mask,
            score: cand.score,
        });
    }
    Ok(SegmentationResult {
        dims,
        instances: accepted,
    })
}

/// Full inference: proposal selection followed by NMS. Deterministic for
/// fixed inputs and configuration.
pub fn segment<F: Real>(
    maps: &PredictionMaps<F>,
    cfg: &InferenceConfig<F>,
) -> Result<SegmentationResult<F>> {
    let candidates = candidate_proposals(maps, cfg)?;
    nms(
        &candidates,
        &maps.p_over,
        cfg.nu,
        &cfg.rays,
        maps.dims(),
        cfg.iou,
    )
}
