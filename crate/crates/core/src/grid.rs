//! Pixel grids: bitset masks and dense scalar / multi-channel maps.
//!
//! Pixels are unit squares centered at integer (row, col) coordinates; the
//! flat index of pixel (r, c) on an HxW grid is `r * W + c` (row-major).

use crate::error::{Error, Result};
use crate::real::Real;

/// Pixel coordinate; `row` increases downwards, `col` to the right.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pixel {
    pub row: usize,
    pub col: usize,
}

impl Pixel {
    pub fn new(row: usize, col: usize) -> Self {
        Pixel { row, col }
    }
}

/// Validated grid dimensions (both strictly positive).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridDims {
    height: usize,
    width: usize,
}

impl GridDims {
    pub fn new(height: usize, width: usize) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::EmptyGrid { height, width });
        }
        Ok(GridDims { height, width })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Total pixel count (never zero; dimensions are validated positive).
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.height * self.width
    }

    pub fn contains(&self, p: Pixel) -> bool {
        p.row < self.height && p.col < self.width
    }

    pub fn index(&self, p: Pixel) -> usize {
        debug_assert!(self.contains(p));
        p.row * self.width + p.col
    }

    pub fn pixel_at(&self, index: usize) -> Pixel {
        debug_assert!(index < self.len());
        Pixel::new(index / self.width, index % self.width)
    }

    pub fn pixels(&self) -> impl Iterator<Item = Pixel> + '_ {
        let w = self.width;
        (0..self.len()).map(move |i| Pixel::new(i / w, i % w))
    }

    pub(crate) fn check_matches(&self, other: GridDims, context: &'static str) -> Result<()> {
        if *self != other {
            return Err(Error::dims(
                context,
                (self.height, self.width),
                (other.height, other.width),
            ));
        }
        Ok(())
    }
}

/// Binary pixel set stored as a word-packed bitset with a cached popcount.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mask {
    dims: GridDims,
    words: Vec<u64>,
    count: usize,
}

impl Mask {
    pub fn empty(dims: GridDims) -> Self {
        let n_words = dims.len().div_ceil(64);
        Mask {
            dims,
            words: vec![0; n_words],
            count: 0,
        }
    }

    pub fn full(dims: GridDims) -> Self {
        let mut m = Mask::empty(dims);
        for i in 0..dims.len() {
            m.words[i / 64] |= 1 << (i % 64);
        }
        m.count = dims.len();
        m
    }

    pub fn from_fn(dims: GridDims, mut membership: impl FnMut(Pixel) -> bool) -> Self {
        let mut m = Mask::empty(dims);
        for p in dims.pixels() {
            if membership(p) {
                m.insert(p);
            }
        }
        m
    }

    /// Builds a mask from a row-major slice, treating nonzero as member.
    pub fn from_nonzero<T: PartialEq + Default>(dims: GridDims, values: &[T]) -> Result<Self> {
        if values.len() != dims.len() {
            return Err(Error::InvalidConfig {
                message: format!(
                    "mask payload length {} does not match {}x{} grid",
                    values.len(),
                    dims.height(),
                    dims.width()
                ),
            });
        }
        let zero = T::default();
        let mut m = Mask::empty(dims);
        for (i, v) in values.iter().enumerate() {
            if *v != zero {
                m.words[i / 64] |= 1 << (i % 64);
                m.count += 1;
            }
        }
        Ok(m)
    }

    pub fn dims(&self) -> GridDims {
        self.dims
    }

    pub fn height(&self) -> usize {
        self.dims.height()
    }

    pub fn width(&self) -> usize {
        self.dims.width()
    }

    /// Number of member pixels.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn contains(&self, p: Pixel) -> bool {
        debug_assert!(self.dims.contains(p));
        let i = self.dims.index(p);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn contains_index(&self, i: usize) -> bool {
        debug_assert!(i < self.dims.len());
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn insert(&mut self, p: Pixel) {
        let i = self.dims.index(p);
        let w = &mut self.words[i / 64];
        let bit = 1 << (i % 64);
        if *w & bit == 0 {
            *w |= bit;
            self.count += 1;
        }
    }

    pub fn remove(&mut self, p: Pixel) {
        let i = self.dims.index(p);
        let w = &mut self.words[i / 64];
        let bit = 1 << (i % 64);
        if *w & bit != 0 {
            *w &= !bit;
            self.count -= 1;
        }
    }

    pub fn intersection_count(&self, other: &Mask) -> usize {
        debug_assert_eq!(self.dims, other.dims);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn union_count(&self, other: &Mask) -> usize {
        self.count + other.count - self.intersection_count(other)
    }

    pub fn symmetric_difference_count(&self, other: &Mask) -> usize {
        debug_assert_eq!(self.dims, other.dims);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// Iterates member pixels in row-major order.
    pub fn iter_pixels(&self) -> impl Iterator<Item = Pixel> + '_ {
        self.iter_indices().map(move |i| self.dims.pixel_at(i))
    }

    /// Iterates flat indices of member pixels in increasing order.
    pub fn iter_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let tz = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    Some(wi * 64 + tz)
                }
            })
        })
    }

    /// Inclusive (min, max) corners of the member pixels, if any.
    pub fn bounding_box(&self) -> Option<(Pixel, Pixel)> {
        let mut lo = Pixel::new(usize::MAX, usize::MAX);
        let mut hi = Pixel::new(0, 0);
        let mut any = false;
        for p in self.iter_pixels() {
            any = true;
            lo.row = lo.row.min(p.row);
            lo.col = lo.col.min(p.col);
            hi.row = hi.row.max(p.row);
            hi.col = hi.col.max(p.col);
        }
        any.then_some((lo, hi))
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }
}

/// Dense per-pixel scalar field (probabilities, distances, intensities).
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarMap<F> {
    dims: GridDims,
    data: Vec<F>,
}

impl<F: Real> ScalarMap<F> {
    pub fn zeros(dims: GridDims) -> Self {
        ScalarMap {
            dims,
            data: vec![F::zero(); dims.len()],
        }
    }

    pub fn filled(dims: GridDims, value: F) -> Self {
        ScalarMap {
            dims,
            data: vec![value; dims.len()],
        }
    }

    pub fn from_vec(dims: GridDims, data: Vec<F>) -> Result<Self> {
        if data.len() != dims.len() {
            return Err(Error::InvalidConfig {
                message: format!(
                    "scalar map payload length {} does not match {}x{} grid",
                    data.len(),
                    dims.height(),
                    dims.width()
                ),
            });
        }
        Ok(ScalarMap { dims, data })
    }

    pub fn dims(&self) -> GridDims {
        self.dims
    }

    pub fn get(&self, p: Pixel) -> F {
        self.data[self.dims.index(p)]
    }

    pub fn get_index(&self, i: usize) -> F {
        self.data[i]
    }

    pub fn set(&mut self, p: Pixel, value: F) {
        let i = self.dims.index(p);
        self.data[i] = value;
    }

    pub fn data(&self) -> &[F] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [F] {
        &mut self.data
    }

    /// Errors unless every value lies in [0, 1].
    pub fn validate_probabilities(&self, what: &'static str) -> Result<()> {
        for &v in &self.data {
            if !(v >= F::zero() && v <= F::one()) {
                return Err(Error::ValueOutOfRange {
                    what,
                    value: v.as_f64(),
                });
            }
        }
        Ok(())
    }
}

/// Per-pixel radial distance field with `n_rays` contiguous channels per
/// pixel (row-major pixels, matching an HxWxR array on disk).
#[derive(Clone, Debug, PartialEq)]
pub struct StarDistanceMap<F> {
    dims: GridDims,
    n_rays: usize,
    data: Vec<F>,
}

impl<F: Real> StarDistanceMap<F> {
    pub fn zeros(dims: GridDims, n_rays: usize) -> Self {
        StarDistanceMap {
            dims,
            n_rays,
            data: vec![F::zero(); dims.len() * n_rays],
        }
    }

    pub fn from_vec(dims: GridDims, n_rays: usize, data: Vec<F>) -> Result<Self> {
        if data.len() != dims.len() * n_rays {
            return Err(Error::InvalidConfig {
                message: format!(
                    "star distance payload length {} does not match {}x{}x{}",
                    data.len(),
                    dims.height(),
                    dims.width(),
                    n_rays
                ),
            });
        }
        Ok(StarDistanceMap { dims, n_rays, data })
    }

    pub fn dims(&self) -> GridDims {
        self.dims
    }

    pub fn n_rays(&self) -> usize {
        self.n_rays
    }

    pub fn at(&self, p: Pixel) -> &[F] {
        let i = self.dims.index(p) * self.n_rays;
        &self.data[i..i + self.n_rays]
    }

    pub fn set_at(&mut self, p: Pixel, radii: &[F]) {
        debug_assert_eq!(radii.len(), self.n_rays);
        let i = self.dims.index(p) * self.n_rays;
        self.data[i..i + self.n_rays].copy_from_slice(radii);
    }

    pub fn data(&self) -> &[F] {
        &self.data
    }

    /// Errors on any negative or non-finite distance.
    pub fn validate_distances(&self, what: &'static str) -> Result<()> {
        for &v in &self.data {
            if !v.is_finite() {
                return Err(Error::NonFinite { what });
            }
            if v < F::zero() {
                return Err(Error::NegativeValue {
                    what,
                    value: v.as_f64(),
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims(h: usize, w: usize) -> GridDims {
        GridDims::new(h, w).unwrap()
    }

    #[test]
    fn zero_dims_rejected() {
        assert!(GridDims::new(0, 5).is_err());
        assert!(GridDims::new(5, 0).is_err());
    }

    #[test]
    fn mask_count_tracks_membership() {
        let mut m = Mask::empty(dims(3, 70));
        assert!(m.is_empty());
        m.insert(Pixel::new(0, 0));
        m.insert(Pixel::new(2, 69));
        m.insert(Pixel::new(2, 69));
        assert_eq!(m.count(), 2);
        assert!(m.contains(Pixel::new(2, 69)));
        m.remove(Pixel::new(0, 0));
        assert_eq!(m.count(), 1);
        assert!(!m.contains(Pixel::new(0, 0)));
    }

    #[test]
    fn set_ops_match_naive_counts() {
        let d = dims(5, 13);
        let a = Mask::from_fn(d, |p| (p.row * 7 + p.col * 3) % 4 == 0);
        let b = Mask::from_fn(d, |p| (p.row + p.col) % 3 == 0);
        let mut inter = 0;
        let mut uni = 0;
        for p in d.pixels() {
            if a.contains(p) && b.contains(p) {
                inter += 1;
            }
            if a.contains(p) || b.contains(p) {
                uni += 1;
            }
        }
        assert_eq!(a.intersection_count(&b), inter);
        assert_eq!(a.union_count(&b), uni);
        assert_eq!(
            a.symmetric_difference_count(&b),
            uni - inter,
            "xor = union minus intersection"
        );
    }

    #[test]
    fn iter_pixels_round_trips() {
        let d = dims(4, 9);
        let m = Mask::from_fn(d, |p| p.row == p.col);
        let collected: Vec<Pixel> = m.iter_pixels().collect();
        assert_eq!(collected.len(), m.count());
        let rebuilt = Mask::from_fn(d, |p| collected.contains(&p));
        assert_eq!(rebuilt, m);
    }

    #[test]
    fn scalar_map_roundtrip_and_validation() {
        let d = dims(2, 2);
        let m = ScalarMap::from_vec(d, vec![0.0f64, 0.5, 1.0, 0.25]).unwrap();
        assert!(m.validate_probabilities("p").is_ok());
        let bad = ScalarMap::from_vec(d, vec![0.0f64, 1.5, 0.0, 0.0]).unwrap();
        assert!(bad.validate_probabilities("p").is_err());
        assert!(ScalarMap::<f64>::from_vec(d, vec![0.0; 3]).is_err());
    }

    #[test]
    fn star_distance_map_channels() {
        let d = dims(2, 3);
        let mut m = StarDistanceMap::zeros(d, 4);
        m.set_at(Pixel::new(1, 2), &[1.0f64, 2.0, 3.0, 4.0]);
        assert_eq!(m.at(Pixel::new(1, 2)), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.at(Pixel::new(0, 0)), &[0.0; 4]);
        assert!(m.validate_distances("d").is_ok());
        m.set_at(Pixel::new(0, 1), &[-1.0, 0.0, 0.0, 0.0]);
        assert!(m.validate_distances("d").is_err());
    }
}
