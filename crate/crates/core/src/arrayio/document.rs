//! JSON document schemas: segmentation results (with run-length-encoded
//! masks and a configuration echo) and metrics/loss reports.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::arrayio::rle;
use crate::error::{Error, Result};
use crate::grid::{GridDims, Pixel};
use crate::groundtruth::LabelStack;
use crate::inference::{InferenceConfig, IouKind, ScoreSource, SegmentationResult};
use crate::losses::LossReport;
use crate::metrics::MetricsReport;
use crate::real::Real;

/// Configuration echo embedded in every segmentation document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentationConfigEcho {
    pub rho: f64,
    pub nu: f64,
    pub rays: usize,
    pub score: String,
    pub iou: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl SegmentationConfigEcho {
    pub fn from_config<F: Real>(cfg: &InferenceConfig<F>) -> Self {
        SegmentationConfigEcho {
            rho: cfg.rho.as_f64(),
            nu: cfg.nu.as_f64(),
            rays: cfg.rays.n_rays(),
            score: match cfg.score {
                ScoreSource::ProposalWeight => "weight".into(),
                ScoreSource::ObjectProbability => "obj".into(),
            },
            iou: match cfg.iou {
                IouKind::OverlapAware => "overlap_aware".into(),
                IouKind::Plain => "plain".into(),
            },
            seed: None,
        }
    }
}

/// One accepted instance: score, anchor pixel, radii and RLE mask.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub score: f64,
    pub center: [usize; 2],
    pub radii: Vec<f64>,
    pub rle: Vec<[usize; 2]>,
}

/// Serialized segmentation: grid, tool version, config echo and instance
/// records sorted by descending score.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentationDocument {
    pub height: usize,
    pub width: usize,
    pub tool_version: String,
    pub config: SegmentationConfigEcho,
    pub instances: Vec<InstanceRecord>,
}

impl SegmentationDocument {
    pub fn from_result<F: Real>(
        result: &SegmentationResult<F>,
        config: SegmentationConfigEcho,
    ) -> Self {
        SegmentationDocument {
            height: result.dims().height(),
            width: result.dims().width(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            instances: result
                .instances
                .iter()
                .map(|inst| InstanceRecord {
                    score: inst.score.as_f64(),
                    center: [inst.polygon.center.row, inst.polygon.center.col],
                    radii: inst.polygon.radii.iter().map(|r| r.as_f64()).collect(),
                    rle: rle::encode(&inst.mask),
                })
                .collect(),
        }
    }

    pub fn dims(&self) -> Result<GridDims> {
        GridDims::new(self.height, self.width)
    }

    /// Checks the document invariants: in-bounds RLE, centers on the grid,
    /// records sorted by descending score.
    pub fn validate(&self) -> Result<()> {
        let dims = self.dims()?;
        for window in self.instances.windows(2) {
            if window[1].score > window[0].score {
                return Err(Error::InvalidDocument {
                    message: "instances are not sorted by descending score".into(),
                });
            }
        }
        for (i, rec) in self.instances.iter().enumerate() {
            if !dims.contains(Pixel::new(rec.center[0], rec.center[1])) {
                return Err(Error::InvalidDocument {
                    message: format!("instance {i} center {:?} outside grid", rec.center),
                });
            }
            rle::decode(&rec.rle, dims).map_err(|e| Error::InvalidDocument {
                message: format!("instance {i}: {e}"),
            })?;
        }
        Ok(())
    }

    /// Decodes the instance masks into a label stack (validating first).
    pub fn to_label_stack(&self) -> Result<LabelStack> {
        self.validate()?;
        let dims = self.dims()?;
        let mut stack = LabelStack::empty(dims);
        for rec in &self.instances {
            stack.push(rle::decode(&rec.rle, dims)?)?;
        }
        Ok(stack)
    }

    pub fn to_writer(&self, writer: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }

    pub fn from_reader(reader: impl Read) -> Result<Self> {
        let doc: SegmentationDocument = serde_json::from_reader(reader)?;
        doc.validate()?;
        Ok(doc)
    }
}

/// AP at one matching threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauAp {
    pub tau: f64,
    pub ap: f64,
}

/// Metric values of one image (or an aggregate row).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsValues {
    pub dc: f64,
    pub tp_p: f64,
    pub fp_p: f64,
    pub fn_o: f64,
    pub ap: Vec<TauAp>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerImageMetrics {
    pub name: String,
    #[serde(flatten)]
    pub values: MetricsValues,
}

/// Serialized metrics report: per-image rows plus mean and standard
/// deviation across images, with the evaluated thresholds echoed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsDocument {
    pub tool_version: String,
    pub taus: Vec<f64>,
    pub per_image: Vec<PerImageMetrics>,
    pub mean: MetricsValues,
    pub std_dev: MetricsValues,
}

fn values_from_image<F: Real>(m: &crate::metrics::ImageMetrics<F>) -> MetricsValues {
    MetricsValues {
        dc: m.dc.as_f64(),
        tp_p: m.tp_p.as_f64(),
        fp_p: m.fp_p.as_f64(),
        fn_o: m.fn_o.as_f64(),
        ap: m
            .ap
            .iter()
            .map(|&(tau, ap)| TauAp {
                tau: tau.as_f64(),
                ap: ap.as_f64(),
            })
            .collect(),
    }
}

impl MetricsDocument {
    pub fn from_report<F: Real>(report: &MetricsReport<F>, names: &[String], taus: &[F]) -> Self {
        MetricsDocument {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            taus: taus.iter().map(|t| t.as_f64()).collect(),
            per_image: report
                .per_image
                .iter()
                .zip(names)
                .map(|(m, name)| PerImageMetrics {
                    name: name.clone(),
                    values: values_from_image(m),
                })
                .collect(),
            mean: values_from_image(&report.mean),
            std_dev: values_from_image(&report.std_dev),
        }
    }

    pub fn to_writer(&self, writer: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }

    pub fn from_reader(reader: impl Read) -> Result<Self> {
        Ok(serde_json::from_reader(reader)?)
    }
}

/// Serialized loss report with the uncertainty echo.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossDocument {
    pub tool_version: String,
    pub sigma: [f64; 3],
    pub l_over: f64,
    pub l_obj: f64,
    pub l_dist: f64,
    pub combined: f64,
    pub n_over: usize,
    pub n_obj: usize,
    pub n_dist: usize,
}

impl LossDocument {
    pub fn from_report<F: Real>(report: &LossReport<F>, sigma: [f64; 3]) -> Self {
        LossDocument {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            sigma,
            l_over: report.l_over.as_f64(),
            l_obj: report.l_obj.as_f64(),
            l_dist: report.l_dist.as_f64(),
            combined: report.combined.as_f64(),
            n_over: report.n_over,
            n_obj: report.n_obj,
            n_dist: report.n_dist,
        }
    }

    pub fn to_writer(&self, writer: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }

    pub fn from_reader(reader: impl Read) -> Result<Self> {
        Ok(serde_json::from_reader(reader)?)
    }
}
