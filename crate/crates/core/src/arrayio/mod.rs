//! File interchange: `.npy` arrays, run-length-encoded masks, JSON documents,
//! and the conversions between on-disk arrays and the in-memory grid types.

pub mod document;
pub mod npy;
pub mod rle;

use crate::error::{Error, Result};
use crate::grid::{GridDims, Mask, ScalarMap, StarDistanceMap};
use crate::groundtruth::LabelStack;
use crate::real::Real;

pub use document::{
    InstanceRecord, LossDocument, MetricsDocument, MetricsValues, PerImageMetrics,
    SegmentationConfigEcho, SegmentationDocument, TauAp,
};
pub use npy::{read_array, write_array, ArrayData, ArrayFile, Dtype};

/// Label stack loaded from disk plus the indices (3D) of dropped empty
/// instances.
#[derive(Clone, Debug)]
pub struct LoadedLabels {
    pub stack: LabelStack,
    pub dropped: Vec<usize>,
}

/// Interprets a 2D array as a scalar map (values converted to `F`).
pub fn scalar_map_from_array<F: Real>(array: &ArrayFile) -> Result<ScalarMap<F>> {
    let [h, w] = require_rank_2(array, "scalar map")?;
    let dims = GridDims::new(h, w)?;
    let data = array.to_f64().into_iter().map(F::of_f64).collect();
    ScalarMap::from_vec(dims, data)
}

/// Serializes a scalar map as a 2D `<f4` array.
pub fn scalar_map_to_f32<F: Real>(map: &ScalarMap<F>) -> ArrayFile {
    let shape = vec![map.dims().height(), map.dims().width()];
    let data = map.data().iter().map(|v| v.as_f64() as f32).collect();
    ArrayFile::new(shape, ArrayData::F32(data)).expect("shape matches payload")
}

/// Interprets a 2D integer array as a boolean mask (nonzero = member).
pub fn mask_from_array(array: &ArrayFile) -> Result<Mask> {
    let [h, w] = require_rank_2(array, "mask")?;
    let dims = GridDims::new(h, w)?;
    match array.data() {
        ArrayData::U8(v) => Mask::from_nonzero(dims, v),
        ArrayData::U16(v) => Mask::from_nonzero(dims, v),
        ArrayData::F32(_) => Err(Error::UnsupportedArrayDtype {
            context: "mask",
            message: "expected an integer array, got <f4".into(),
        }),
    }
}

/// Serializes a mask as a 2D `|u1` array of 0/1.
pub fn mask_to_array(mask: &Mask) -> ArrayFile {
    let dims = mask.dims();
    let mut data = vec![0u8; dims.len()];
    for i in mask.iter_indices() {
        data[i] = 1;
    }
    ArrayFile::new(vec![dims.height(), dims.width()], ArrayData::U8(data))
        .expect("shape matches payload")
}

/// Interprets an HxWxR array as a star distance map.
pub fn star_map_from_array<F: Real>(array: &ArrayFile) -> Result<StarDistanceMap<F>> {
    let shape = array.shape();
    if shape.len() != 3 {
        return Err(Error::UnsupportedRank {
            rank: shape.len(),
            context: "star distance map",
            expected: "3 (HxWxR)",
        });
    }
    let dims = GridDims::new(shape[0], shape[1])?;
    let data = array.to_f64().into_iter().map(F::of_f64).collect();
    StarDistanceMap::from_vec(dims, shape[2], data)
}

/// Serializes a star distance map as an HxWxR `<f4` array.
pub fn star_map_to_f32<F: Real>(map: &StarDistanceMap<F>) -> ArrayFile {
    let shape = vec![map.dims().height(), map.dims().width(), map.n_rays()];
    let data = map.data().iter().map(|v| v.as_f64() as f32).collect();
    ArrayFile::new(shape, ArrayData::F32(data)).expect("shape matches payload")
}

/// Loads instance labels, accepting either representation:
///
/// - 3D KxHxW integer array: one binary mask per leading slice (nonzero =
///   member); empty slices are dropped and reported.
/// - 2D integer label image: one mask per distinct positive value, ascending
///   (legacy non-overlapping input).
pub fn labels_from_array(array: &ArrayFile) -> Result<LoadedLabels> {
    match array.shape().len() {
        3 => {
            let [k, h, w] = [array.shape()[0], array.shape()[1], array.shape()[2]];
            let dims = GridDims::new(h, w)?;
            let plane = dims.len();
            let flat = integer_values(array, "labels")?;
            let mut stack = LabelStack::empty(dims);
            let mut dropped = Vec::new();
            for i in 0..k {
                let slice = &flat[i * plane..(i + 1) * plane];
                let mask = Mask::from_nonzero(dims, slice)?;
                if mask.is_empty() {
                    dropped.push(i);
                } else {
                    stack.push(mask)?;
                }
            }
            Ok(LoadedLabels { stack, dropped })
        }
        2 => {
            let [h, w] = [array.shape()[0], array.shape()[1]];
            let dims = GridDims::new(h, w)?;
            let flat = integer_values(array, "labels")?;
            let mut values: Vec<u32> = flat.iter().copied().filter(|&v| v > 0).collect();
            values.sort_unstable();
            values.dedup();
            let mut stack = LabelStack::empty(dims);
            for value in values {
                let mask = Mask::from_fn(dims, |p| flat[dims.index(p)] == value);
                stack.push(mask)?;
            }
            Ok(LoadedLabels {
                stack,
                dropped: Vec::new(),
            })
        }
        rank => Err(Error::UnsupportedRank {
            rank,
            context: "labels",
            expected: "2 (HxW label image) or 3 (KxHxW stack)",
        }),
    }
}

/// Serializes a label stack as a KxHxW `|u1` array.
pub fn labels_to_array(stack: &LabelStack) -> ArrayFile {
    let dims = stack.dims();
    let plane = dims.len();
    let mut data = vec![0u8; stack.len() * plane];
    for (k, mask) in stack.instances().iter().enumerate() {
        for i in mask.iter_indices() {
            data[k * plane + i] = 1;
        }
    }
    ArrayFile::new(
        vec![stack.len(), dims.height(), dims.width()],
        ArrayData::U8(data),
    )
    .expect("shape matches payload")
}

fn integer_values(array: &ArrayFile, context: &'static str) -> Result<Vec<u32>> {
    match array.data() {
        ArrayData::U8(v) => Ok(v.iter().map(|&x| x as u32).collect()),
        ArrayData::U16(v) => Ok(v.iter().map(|&x| x as u32).collect()),
        ArrayData::F32(_) => Err(Error::UnsupportedArrayDtype {
            context,
            message: "expected an integer array, got <f4".into(),
        }),
    }
}

fn require_rank_2(array: &ArrayFile, context: &'static str) -> Result<[usize; 2]> {
    match array.shape() {
        [h, w] => Ok([*h, *w]),
        shape => Err(Error::UnsupportedRank {
            rank: shape.len(),
            context,
            expected: "2 (HxW)",
        }),
    }
}
