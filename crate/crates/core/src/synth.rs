//! Synthetic overlap generation: replicate, flip, rotate and shift objects of
//! a non-overlapping labeled image and add up the intensities, until a
//! required fraction of object pixels lies in the overlap of multiple
//! objects.
//!
//! Randomness comes from a ChaCha8 stream seeded with the configured 64-bit
//! seed, so outputs are bit-identical across runs and platforms. Rotations
//! are restricted to multiples of 90 degrees (no resampling).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{Mask, Pixel, ScalarMap};
use crate::groundtruth::LabelStack;
use crate::real::Real;

/// Knobs for [`synthesize`].
#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig<F> {
    /// Required fraction of object pixels covered by at least two objects.
    pub min_overlap_fraction: F,
    /// Placement re-sampling budget before giving up.
    pub max_attempts: usize,
    /// Inclusive range of extra copies drawn per input object.
    pub copies_per_object: (usize, usize),
    /// Maximum |shift| per axis as a fraction of the image side.
    pub shift_frac: F,
    /// Allow horizontal/vertical mirroring of copies.
    pub allow_flips: bool,
    /// Allow 90/180/270 degree rotation of copies.
    pub allow_rotations: bool,
    /// Saturation ceiling for added intensities; `None` adds unclipped.
    pub clip_max: Option<F>,
    /// Seed of the ChaCha8 stream driving all draws.
    pub seed: u64,
}

impl<F: Real> Default for SynthConfig<F> {
    fn default() -> Self {
        SynthConfig {
            min_overlap_fraction: F::of_f64(0.15),
            max_attempts: 200,
            copies_per_object: (1, 2),
            shift_frac: F::of_f64(0.25),
            allow_flips: true,
            allow_rotations: true,
            clip_max: None,
            seed: 0,
        }
    }
}

impl<F: Real> SynthConfig<F> {
    fn validate(&self) -> Result<()> {
        if !(self.min_overlap_fraction >= F::zero() && self.min_overlap_fraction < F::one()) {
            return Err(Error::InvalidConfig {
                message: format!(
                    "min_overlap_fraction must lie in [0, 1), got {}",
                    self.min_overlap_fraction
                ),
            });
        }
        if self.max_attempts == 0 {
            return Err(Error::InvalidConfig {
                message: "max_attempts must be at least 1".into(),
            });
        }
        if self.copies_per_object.0 > self.copies_per_object.1 {
            return Err(Error::InvalidConfig {
                message: format!(
                    "copies_per_object range ({}, {}) is empty",
                    self.copies_per_object.0, self.copies_per_object.1
                ),
            });
        }
        if self.shift_frac.is_nan() || self.shift_frac < F::zero() {
            return Err(Error::InvalidConfig {
                message: "shift_frac must be non-negative".into(),
            });
        }
        Ok(())
    }
}

/// Fraction of object pixels covered by at least two instances; 0 when no
/// pixel is covered at all.
pub fn overlap_fraction<F: Real>(labels: &LabelStack) -> F {
    let mut covered = 0usize;
    let mut overlapped = 0usize;
    for &c in &labels.coverage() {
        if c >= 1 {
            covered += 1;
        }
        if c >= 2 {
            overlapped += 1;
        }
    }
    if covered == 0 {
        return F::zero();
    }
    F::of_usize(overlapped) / F::of_usize(covered)
}

/// A transformed object copy: target pixels with the intensities they carry.
struct PlacedCopy<F> {
    mask: Mask,
    cells: Vec<(usize, F)>,
}

/// Replicates objects with random flips, right-angle rotations and shifts,
/// re-sampling placements until the overlap fraction of the combined stack
/// reaches `cfg.min_overlap_fraction` or the attempt budget runs out.
///
/// Input instances must be pairwise disjoint and are preserved verbatim at
/// the front of the output stack; copies clipped to emptiness are discarded.
/// Copy intensities are added into the image, saturating at `cfg.clip_max`
/// when set. Deterministic for a fixed seed and configuration.
pub fn synthesize<F: Real>(
    image: &ScalarMap<F>,
    labels: &LabelStack,
    cfg: &SynthConfig<F>,
) -> Result<(ScalarMap<F>, LabelStack)> {
    cfg.validate()?;
    image
        .dims()
        .check_matches(labels.dims(), "synthesize image vs labels")?;
    let dims = labels.dims();
    for (i, &c) in labels.coverage().iter().enumerate() {
        if c > 1 {
            let p = dims.pixel_at(i);
            return Err(Error::InstancesNotDisjoint {
                row: p.row,
                col: p.col,
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let shift_r = (cfg.shift_frac * F::of_usize(dims.height()))
        .floor()
        .as_f64() as i64;
    let shift_c = (cfg.shift_frac * F::of_usize(dims.width()))
        .floor()
        .as_f64() as i64;
    let mut best = F::zero();

    for _ in 0..cfg.max_attempts {
        let mut copies: Vec<PlacedCopy<F>> = Vec::new();
        for inst in labels.instances() {
            let n = rng.random_range(cfg.copies_per_object.0..=cfg.copies_per_object.1);
            for _ in 0..n {
                let flip_h = cfg.allow_flips && rng.random_bool(0.5);
                let flip_v = cfg.allow_flips && rng.random_bool(0.5);
                let quarter = if cfg.allow_rotations {
                    rng.random_range(0..4u8)
                } else {
                    0
                };
                let dr = rng.random_range(-shift_r..=shift_r);
                let dc = rng.random_range(-shift_c..=shift_c);
                if let Some(copy) = place_copy(image, inst, flip_h, flip_v, quarter, dr, dc) {
                    copies.push(copy);
                }
            }
        }

        let mut stack = labels.clone();
        for copy in &copies {
            stack.push(copy.mask.clone())?;
        }
        let fraction = overlap_fraction::<F>(&stack);
        best = best.max(fraction);
        if fraction >= cfg.min_overlap_fraction {
            let mut out = image.clone();
            for copy in &copies {
                for &(idx, v) in &copy.cells {
                    let mut sum = out.data()[idx] + v;
                    if let Some(cap) = cfg.clip_max {
                        sum = sum.min(cap);
                    }
                    out.data_mut()[idx] = sum;
                }
            }
            return Ok((out, stack));
        }
    }

    Err(Error::ConstraintUnreachable {
        achieved: best.as_f64(),
        required: cfg.min_overlap_fraction.as_f64(),
        attempts: cfg.max_attempts,
    })
}

/// Flips/rotates the bounding-box crop of `inst` and pastes it at the
/// original position plus (dr, dc), clipped to the grid. `None` if nothing
/// survives the clip.
fn place_copy<F: Real>(
    image: &ScalarMap<F>,
    inst: &Mask,
    flip_h: bool,
    flip_v: bool,
    quarter: u8,
    dr: i64,
    dc: i64,
) -> Option<PlacedCopy<F>> {
    let dims = inst.dims();
    let (lo, hi) = inst.bounding_box()?;
    let ch = hi.row - lo.row + 1;
    let cw = hi.col - lo.col + 1;

    let mut mask = Mask::empty(dims);
    let mut cells = Vec::new();
    for p in inst.iter_pixels() {
        let mut i = p.row - lo.row;
        let mut j = p.col - lo.col;
        let (mut th, mut tw) = (ch, cw);
        if flip_v {
            i = th - 1 - i;
        }
        if flip_h {
            j = tw - 1 - j;
        }
        for _ in 0..quarter {
            // rotate the crop a quarter turn clockwise
            let (ni, nj) = (j, th - 1 - i);
            i = ni;
            j = nj;
            std::mem::swap(&mut th, &mut tw);
        }
        let row = lo.row as i64 + dr + i as i64;
        let col = lo.col as i64 + dc + j as i64;
        if row < 0 || col < 0 || row >= dims.height() as i64 || col >= dims.width() as i64 {
            continue;
        }
        let q = Pixel::new(row as usize, col as usize);
        mask.insert(q);
        cells.push((dims.index(q), image.get(p)));
    }
    if mask.is_empty() {
        return None;
    }
    Some(PlacedCopy { mask, cells })
}
