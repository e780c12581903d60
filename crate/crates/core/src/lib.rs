//! Instance segmentation of overlapping objects with star-convex polygons.
//!
//! The crate implements the non-neural machinery of an overlap-aware
//! star-polygon segmentation pipeline:
//!
//! - [`geometry`] — polygon parameterization, rasterization, and the plain
//!   and overlap-discounted set overlap measures;
//! - [`groundtruth`] — object probability (normalized distance transform),
//!   overlap indicator and star distance targets from overlapping masks;
//! - [`inference`] — overlap-weighted proposal selection and overlap-aware
//!   greedy NMS;
//! - [`losses`] — the uncertainty-weighted multi-task objective as pure
//!   functions over map pairs;
//! - [`metrics`] — dice-based challenge metrics and average precision;
//! - [`synth`] — synthetic overlap generation from non-overlapping labels;
//! - [`arrayio`] — `.npy` arrays, RLE masks and JSON report documents.
//!
//! All numeric types are generic over the scalar (`f32` or `f64`) through
//! the [`Real`] trait; `*32`/`*64` aliases are provided for the common
//! instantiations. Everything is deterministic: there is no hidden
//! parallelism, and the only randomness (in [`synth`]) comes from a seeded
//! ChaCha8 stream.

pub mod arrayio;
pub mod edt;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod groundtruth;
pub mod inference;
pub mod losses;
pub mod metrics;
pub mod real;
pub mod synth;

pub use edt::euclidean_distance_transform;
pub use error::{Error, Result};
pub use geometry::{
    dice, overlap_aware_intersection, overlap_aware_iou, overlap_aware_iou_with, pixel_iou,
    rasterize, RayConfig, StarPolygon, UnionMode,
};
pub use grid::{GridDims, Mask, Pixel, ScalarMap, StarDistanceMap};
pub use groundtruth::{
    make_ground_truth, object_probability_map, overlap_probability_map, star_distances_at,
    star_distances_map, GroundTruthMaps, LabelStack,
};
pub use inference::{
    candidate_proposals, nms, proposal_weight, segment, InferenceConfig, IouKind, PredictionMaps,
    ScoreSource, SegmentationResult, SegmentedInstance,
};
pub use losses::{bce, dist_loss, loss_report, multitask_loss, LossReport, TaskUncertainties};
pub use metrics::{
    ap_sweep, average_precision, challenge_metrics, evaluate_image, evaluate_images, match_by,
    ChallengeMetrics, ImageMetrics, MatchPair, MatchValue, Matching, MetricsReport,
};
pub use real::Real;
pub use synth::{overlap_fraction, synthesize, SynthConfig};

pub type ScalarMap32 = ScalarMap<f32>;
pub type ScalarMap64 = ScalarMap<f64>;
pub type StarDistanceMap32 = StarDistanceMap<f32>;
pub type StarDistanceMap64 = StarDistanceMap<f64>;
pub type StarPolygon32 = StarPolygon<f32>;
pub type StarPolygon64 = StarPolygon<f64>;
pub type GroundTruthMaps32 = GroundTruthMaps<f32>;
pub type GroundTruthMaps64 = GroundTruthMaps<f64>;
pub type PredictionMaps32 = PredictionMaps<f32>;
pub type PredictionMaps64 = PredictionMaps<f64>;
pub type InferenceConfig32 = InferenceConfig<f32>;
pub type InferenceConfig64 = InferenceConfig<f64>;
pub type SegmentationResult32 = SegmentationResult<f32>;
pub type SegmentationResult64 = SegmentationResult<f64>;
pub type TaskUncertainties32 = TaskUncertainties<f32>;
pub type TaskUncertainties64 = TaskUncertainties<f64>;
pub type LossReport32 = LossReport<f32>;
pub type LossReport64 = LossReport<f64>;
pub type ChallengeMetrics32 = ChallengeMetrics<f32>;
pub type ChallengeMetrics64 = ChallengeMetrics<f64>;
pub type MetricsReport32 = MetricsReport<f32>;
pub type MetricsReport64 = MetricsReport<f64>;
pub type SynthConfig32 = SynthConfig<f32>;
pub type SynthConfig64 = SynthConfig<f64>;
