//! Run-length encoding of binary masks: row-major (start, length) pairs over
//! the flattened grid, 0-based, covering exactly the member pixels.

use crate::error::{Error, Result};
use crate::grid::{GridDims, Mask};

/// Encodes the member pixels as maximal runs in flat row-major order.
pub fn encode(mask: &Mask) -> Vec<[usize; 2]> {
    let mut runs = Vec::new();
    let mut current: Option<[usize; 2]> = None;
    for i in mask.iter_indices() {
        match current.as_mut() {
            Some(run) if run[0] + run[1] == i => run[1] += 1,
            _ => {
                if let Some(run) = current.take() {
                    runs.push(run);
                }
                current = Some([i, 1]);
            }
        }
    }
    if let Some(run) = current {
        runs.push(run);
    }
    runs
}

/// Decodes (start, length) runs onto a grid. Runs must be strictly
/// increasing, non-overlapping, of positive length, and within bounds.
pub fn decode(runs: &[[usize; 2]], dims: GridDims) -> Result<Mask> {
    let mut mask = Mask::empty(dims);
    let mut cursor = 0usize;
    for &[start, len] in runs {
        if len == 0 {
            return Err(Error::InvalidRle {
                message: format!("zero-length run at start {start}"),
            });
        }
        if start < cursor {
            return Err(Error::InvalidRle {
                message: format!("run at {start} overlaps or precedes an earlier run"),
            });
        }
        let end = start.checked_add(len).ok_or_else(|| Error::InvalidRle {
            message: format!("run at {start} overflows"),
        })?;
        if end > dims.len() {
            return Err(Error::InvalidRle {
                message: format!(
                    "run {start}+{len} exceeds the {}x{} grid",
                    dims.height(),
                    dims.width()
                ),
            });
        }
        for i in start..end {
            mask.insert(dims.pixel_at(i));
        }
        cursor = end;
    }
    Ok(mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Pixel;
    use rand::{Rng, SeedableRng};

    fn dims(h: usize, w: usize) -> GridDims {
        GridDims::new(h, w).unwrap()
    }

    #[test]
    fn encodes_runs_across_row_boundaries() {
        let d = dims(2, 4);
        let mut m = Mask::empty(d);
        // Pixels 2..=5 flat: one run across the row boundary.
        for i in 2..=5 {
            m.insert(d.pixel_at(i));
        }
        assert_eq!(encode(&m), vec![[2, 4]]);
    }

    #[test]
    fn empty_and_full_masks() {
        let d = dims(3, 3);
        assert!(encode(&Mask::empty(d)).is_empty());
        assert_eq!(encode(&Mask::full(d)), vec![[0, 9]]);
    }

    #[test]
    fn decode_rejects_out_of_bounds_and_overlap() {
        let d = dims(2, 2);
        assert!(decode(&[[3, 2]], d).is_err());
        assert!(decode(&[[0, 2], [1, 1]], d).is_err());
        assert!(decode(&[[0, 0]], d).is_err());
    }

    #[test]
    fn random_masks_round_trip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for _ in 0..30 {
            let d = dims(rng.random_range(1..12), rng.random_range(1..12));
            let density = rng.random_range(0.0..1.0);
            let m = Mask::from_fn(d, |_| rng.random_bool(density));
            let decoded = decode(&encode(&m), d).unwrap();
            assert_eq!(decoded, m);
        }
    }

    #[test]
    fn single_pixel_round_trip() {
        let d = dims(5, 7);
        let mut m = Mask::empty(d);
        m.insert(Pixel::new(3, 2));
        assert_eq!(encode(&m), vec![[23, 1]]);
        assert_eq!(decode(&encode(&m), d).unwrap(), m);
    }
}
