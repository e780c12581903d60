//! Star-convex polygons: ray parameterization, rasterization and the plain
//! and overlap-aware set overlap measures used by the NMS.
//!
//! Angle convention (fixed for file interchange): ray k points along
//! `theta_k = 2*pi*k / n_rays`, measured from the +col axis towards +row,
//! i.e. direction `(d_row, d_col) = (sin theta_k, cos theta_k)`. The angle of
//! a pixel offset is `atan2(d_row, d_col)` wrapped into `[0, 2*pi)`.

use crate::error::{Error, Result};
use crate::grid::{GridDims, Mask, Pixel, ScalarMap};
use crate::real::{in_unit_interval, Real};

/// Equiangular ray layout; `n_rays >= 3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RayConfig {
    n_rays: usize,
}

impl RayConfig {
    pub const DEFAULT_N_RAYS: usize = 32;

    pub fn new(n_rays: usize) -> Result<Self> {
        if n_rays < 3 {
            return Err(Error::TooFewRays { n_rays });
        }
        Ok(RayConfig { n_rays })
    }

    pub fn n_rays(&self) -> usize {
        self.n_rays
    }

    /// Angle of ray `k` in radians, in `[0, 2*pi)`.
    pub fn angle<F: Real>(&self, k: usize) -> F {
        debug_assert!(k < self.n_rays);
        F::TAU() * F::of_usize(k) / F::of_usize(self.n_rays)
    }

    /// Unit direction `(d_row, d_col)` of ray `k`.
    pub fn direction<F: Real>(&self, k: usize) -> (F, F) {
        let theta = self.angle::<F>(k);
        (theta.sin(), theta.cos())
    }

    pub fn directions<F: Real>(&self) -> Vec<(F, F)> {
        (0..self.n_rays).map(|k| self.direction(k)).collect()
    }

    /// Sector index and fractional position of angle `phi` (in `[0, 2*pi)`)
    /// between its two bracketing rays.
    pub fn sector<F: Real>(&self, phi: F) -> (usize, F) {
        let spacing = F::TAU() / F::of_usize(self.n_rays);
        let scaled = phi / spacing;
        let k = scaled.floor().as_f64() as usize;
        let k = k.min(self.n_rays - 1);
        let frac = scaled - F::of_usize(k);
        (k, frac)
    }
}

impl Default for RayConfig {
    fn default() -> Self {
        RayConfig {
            n_rays: Self::DEFAULT_N_RAYS,
        }
    }
}

/// Proposal: a star-convex polygon anchored at a pixel, with one radial
/// distance per ray and a confidence score in [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct StarPolygon<F> {
    pub center: Pixel,
    pub radii: Vec<F>,
    pub score: F,
}

impl<F: Real> StarPolygon<F> {
    pub fn new(center: Pixel, radii: Vec<F>, score: F) -> Result<Self> {
        if !in_unit_interval(score) {
            return Err(Error::ValueOutOfRange {
                what: "proposal score",
                value: score.as_f64(),
            });
        }
        for &r in &radii {
            if !r.is_finite() {
                return Err(Error::NonFinite { what: "radius" });
            }
            if r < F::zero() {
                return Err(Error::NegativeValue {
                    what: "radius",
                    value: r.as_f64(),
                });
            }
        }
        Ok(StarPolygon {
            center,
            radii,
            score,
        })
    }

    pub fn check_rays(&self, rays: &RayConfig) -> Result<()> {
        if self.radii.len() != rays.n_rays() {
            return Err(Error::RayCountMismatch {
                expected: rays.n_rays(),
                actual: self.radii.len(),
            });
        }
        Ok(())
    }

    /// Radius at angle `phi` (in `[0, 2*pi)`), interpolating linearly between
    /// the two bracketing rays. Exact (no rounding) where the radii agree.
    pub fn radius_at(&self, phi: F, rays: &RayConfig) -> F {
        let (k, frac) = rays.sector(phi);
        let a = self.radii[k];
        let b = self.radii[(k + 1) % self.radii.len()];
        a + (b - a) * frac
    }
}

/// Wraps `atan2(d_row, d_col)` into `[0, 2*pi)`.
fn offset_angle<F: Real>(d_row: F, d_col: F) -> F {
    let phi = d_row.atan2(d_col);
    if phi < F::zero() {
        phi + F::TAU()
    } else {
        phi
    }
}

/// Rasterizes a star polygon onto a grid: pixel q is a member iff
/// `|q - center| <= radius_at(angle(q - center))`, evaluated at pixel
/// centers; the center pixel is always a member. Constant radii therefore
/// produce exactly the discrete disk of that radius.
pub fn rasterize<F: Real>(poly: &StarPolygon<F>, rays: &RayConfig, dims: GridDims) -> Result<Mask> {
    poly.check_rays(rays)?;
    if !dims.contains(poly.center) {
        return Err(Error::CenterOutsideGrid {
            row: poly.center.row,
            col: poly.center.col,
            height: dims.height(),
            width: dims.width(),
        });
    }
    for &r in &poly.radii {
        if !r.is_finite() {
            return Err(Error::NonFinite { what: "radius" });
        }
    }

    let mut mask = Mask::empty(dims);
    let span = (dims.height() + dims.width()) as f64;
    let max_r = poly
        .radii
        .iter()
        .cloned()
        .fold(F::zero(), F::max)
        .ceil()
        .as_f64()
        .min(span) as usize;
    let r0 = poly.center.row.saturating_sub(max_r);
    let r1 = (poly.center.row + max_r).min(dims.height() - 1);
    let c0 = poly.center.col.saturating_sub(max_r);
    let c1 = (poly.center.col + max_r).min(dims.width() - 1);

    for row in r0..=r1 {
        let d_row = F::of_i64(row as i64 - poly.center.row as i64);
        for col in c0..=c1 {
            let p = Pixel::new(row, col);
            if p == poly.center {
                mask.insert(p);
                continue;
            }
            let d_col = F::of_i64(col as i64 - poly.center.col as i64);
            let dist = (d_row * d_row + d_col * d_col).sqrt();
            let phi = offset_angle(d_row, d_col);
            if dist <= poly.radius_at(phi, rays) {
                mask.insert(p);
            }
        }
    }
    Ok(mask)
}

/// Precomputed per-offset distance and interpolation sector, for repeated
/// rasterization of many polygons on one grid (the NMS hot path). Produces
/// exactly the same masks as [`rasterize`]: the tables cache the identical
/// expressions over the integer pixel offsets.
pub(crate) struct RasterTables<F> {
    max_radius: usize,
    side: usize,
    dist: Vec<F>,
    sector: Vec<(u32, F)>,
}

impl<F: Real> RasterTables<F> {
    pub(crate) fn new(rays: &RayConfig, max_radius: usize) -> Self {
        let side = 2 * max_radius + 1;
        let mut dist = Vec::with_capacity(side * side);
        let mut sector = Vec::with_capacity(side * side);
        let m = max_radius as i64;
        for dr in -m..=m {
            for dc in -m..=m {
                let d_row = F::of_i64(dr);
                let d_col = F::of_i64(dc);
                dist.push((d_row * d_row + d_col * d_col).sqrt());
                if dr == 0 && dc == 0 {
                    sector.push((0, F::zero()));
                } else {
                    let (k, frac) = rays.sector(offset_angle(d_row, d_col));
                    sector.push((k as u32, frac));
                }
            }
        }
        RasterTables {
            max_radius,
            side,
            dist,
            sector,
        }
    }

    pub(crate) fn rasterize(
        &self,
        poly: &StarPolygon<F>,
        rays: &RayConfig,
        dims: GridDims,
    ) -> Result<Mask> {
        poly.check_rays(rays)?;
        if !dims.contains(poly.center) {
            return Err(Error::CenterOutsideGrid {
                row: poly.center.row,
                col: poly.center.col,
                height: dims.height(),
                width: dims.width(),
            });
        }
        for &r in &poly.radii {
            if !r.is_finite() {
                return Err(Error::NonFinite { what: "radius" });
            }
        }
        let span = (dims.height() + dims.width()) as f64;
        let max_r = poly
            .radii
            .iter()
            .cloned()
            .fold(F::zero(), F::max)
            .ceil()
            .as_f64()
            .min(span) as usize;
        debug_assert!(max_r <= self.max_radius, "tables too small for polygon");

        let mut mask = Mask::empty(dims);
        let n = poly.radii.len();
        let r0 = poly.center.row.saturating_sub(max_r);
        let r1 = (poly.center.row + max_r).min(dims.height() - 1);
        let c0 = poly.center.col.saturating_sub(max_r);
        let c1 = (poly.center.col + max_r).min(dims.width() - 1);
        for row in r0..=r1 {
            let tr = row + self.max_radius - poly.center.row;
            for col in c0..=c1 {
                let p = Pixel::new(row, col);
                if p == poly.center {
                    mask.insert(p);
                    continue;
                }
                let idx = tr * self.side + (col + self.max_radius - poly.center.col);
                let (k, frac) = self.sector[idx];
                let a = poly.radii[k as usize];
                let b = poly.radii[(k as usize + 1) % n];
                if self.dist[idx] <= a + (b - a) * frac {
                    mask.insert(p);
                }
            }
        }
        Ok(mask)
    }
}

/// Intersection over union by plain pixel counts; 0 when both masks are empty.
pub fn pixel_iou<F: Real>(a: &Mask, b: &Mask) -> Result<F> {
    a.dims().check_matches(b.dims(), "pixel_iou")?;
    let union = a.union_count(b);
    if union == 0 {
        return Ok(F::zero());
    }
    Ok(F::of_usize(a.intersection_count(b)) / F::of_usize(union))
}

/// Dice coefficient `2|A ∩ B| / (|A| + |B|)`; 0 when both masks are empty.
pub fn dice<F: Real>(a: &Mask, b: &Mask) -> Result<F> {
    a.dims().check_matches(b.dims(), "dice")?;
    let total = a.count() + b.count();
    if total == 0 {
        return Ok(F::zero());
    }
    let inter = a.intersection_count(b);
    Ok(F::of_usize(2 * inter) / F::of_usize(total))
}

/// Overlap-discounted intersection: sum of `1 - P_over` over `A ∩ B`.
///
/// Values of `p_over` encountered on the intersection must lie in [0, 1].
pub fn overlap_aware_intersection<F: Real>(a: &Mask, b: &Mask, p_over: &ScalarMap<F>) -> Result<F> {
    a.dims()
        .check_matches(b.dims(), "overlap_aware_intersection")?;
    a.dims()
        .check_matches(p_over.dims(), "overlap_aware_intersection")?;
    let mut sum = F::zero();
    for (wi, (wa, wb)) in a.words().iter().zip(b.words()).enumerate() {
        let mut bits = wa & wb;
        while bits != 0 {
            let tz = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let v = p_over.get_index(wi * 64 + tz);
            if !in_unit_interval(v) {
                return Err(Error::ValueOutOfRange {
                    what: "overlap probability",
                    value: v.as_f64(),
                });
            }
            sum += F::one() - v;
        }
    }
    Ok(sum)
}

/// Denominator convention for [`overlap_aware_iou_with`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum UnionMode {
    /// Plain pixel count `|A ∪ B|` (the default).
    #[default]
    PixelCount,
    /// `|A| + |B| - I`, with `I` the overlap-discounted intersection.
    InclusionExclusion,
}

/// Overlap-aware IoU with the default `|A ∪ B|` denominator.
pub fn overlap_aware_iou<F: Real>(a: &Mask, b: &Mask, p_over: &ScalarMap<F>) -> Result<F> {
    overlap_aware_iou_with(a, b, p_over, UnionMode::PixelCount)
}

/// Overlap-aware IoU: the intersection term discounts pixels by predicted
/// overlap, so detections of truly overlapping objects score low against each
/// other. Returns 0 when both masks are empty.
pub fn overlap_aware_iou_with<F: Real>(
    a: &Mask,
    b: &Mask,
    p_over: &ScalarMap<F>,
    union: UnionMode,
) -> Result<F> {
    let inter = overlap_aware_intersection(a, b, p_over)?;
    let denom = match union {
        UnionMode::PixelCount => F::of_usize(a.union_count(b)),
        UnionMode::InclusionExclusion => F::of_usize(a.count() + b.count()) - inter,
    };
    if denom <= F::zero() {
        return Ok(F::zero());
    }
    Ok(inter / denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims(h: usize, w: usize) -> GridDims {
        GridDims::new(h, w).unwrap()
    }

    fn square(d: GridDims, top: usize, left: usize, side: usize) -> Mask {
        Mask::from_fn(d, |p| {
            p.row >= top && p.row < top + side && p.col >= left && p.col < left + side
        })
    }

    #[test]
    fn ray_config_rejects_degenerate_counts() {
        assert!(RayConfig::new(2).is_err());
        assert!(RayConfig::new(3).is_ok());
        assert_eq!(RayConfig::default().n_rays(), 32);
    }

    #[test]
    fn angles_uniform_and_increasing() {
        let rays = RayConfig::new(8).unwrap();
        let angles: Vec<f64> = (0..8).map(|k| rays.angle(k)).collect();
        for w in angles.windows(2) {
            assert!(w[1] > w[0]);
            assert!((w[1] - w[0] - std::f64::consts::TAU / 8.0).abs() < 1e-12);
        }
        assert!(angles[0] == 0.0 && angles[7] < std::f64::consts::TAU);
    }

    #[test]
    fn constant_radius_polygon_is_discrete_disk() {
        let d = dims(15, 15);
        let rays = RayConfig::default();
        let center = Pixel::new(7, 7);
        let poly = StarPolygon::new(center, vec![4.0f64; 32], 1.0).unwrap();
        let mask = rasterize(&poly, &rays, d).unwrap();
        let disk = Mask::from_fn(d, |p| {
            let dr = p.row as f64 - 7.0;
            let dc = p.col as f64 - 7.0;
            (dr * dr + dc * dc).sqrt() <= 4.0
        });
        assert_eq!(mask, disk);
    }

    #[test]
    fn zero_radii_rasterize_to_center_only() {
        let d = dims(9, 9);
        let poly = StarPolygon::new(Pixel::new(4, 4), vec![0.0f64; 32], 0.5).unwrap();
        let mask = rasterize(&poly, &RayConfig::default(), d).unwrap();
        assert_eq!(mask.count(), 1);
        assert!(mask.contains(Pixel::new(4, 4)));
    }

    #[test]
    fn four_ray_constant_polygon_matches_disk_area() {
        // Under the interpolated-radius predicate a constant-radius polygon is
        // a disk regardless of ray count; both areas sit near pi * r^2.
        let d = dims(15, 15);
        let r4 = rasterize(
            &StarPolygon::new(Pixel::new(7, 7), vec![5.0f64; 4], 1.0).unwrap(),
            &RayConfig::new(4).unwrap(),
            d,
        )
        .unwrap();
        let r32 = rasterize(
            &StarPolygon::new(Pixel::new(7, 7), vec![5.0f64; 32], 1.0).unwrap(),
            &RayConfig::default(),
            d,
        )
        .unwrap();
        let analytic = std::f64::consts::PI * 25.0;
        for area in [r4.count() as f64, r32.count() as f64] {
            assert!((area - analytic).abs() / analytic <= 0.15);
        }
        assert_eq!(r4, r32);
    }

    #[test]
    fn rasterize_rejects_center_outside_grid() {
        let poly = StarPolygon::new(Pixel::new(20, 2), vec![1.0f64; 32], 0.1).unwrap();
        let err = rasterize(&poly, &RayConfig::default(), dims(10, 10)).unwrap_err();
        assert!(matches!(err, Error::CenterOutsideGrid { .. }));
    }

    #[test]
    fn rasterize_clips_to_grid_bounds() {
        let d = dims(8, 8);
        let poly = StarPolygon::new(Pixel::new(0, 0), vec![20.0f64; 32], 1.0).unwrap();
        let mask = rasterize(&poly, &RayConfig::default(), d).unwrap();
        assert_eq!(mask.count(), 64, "radius covers the whole grid");
    }

    #[test]
    fn rasterized_mask_is_star_convex_about_center() {
        let d = dims(41, 41);
        let rays = RayConfig::default();
        let center = Pixel::new(20, 20);
        let radii: Vec<f64> = (0..32)
            .map(|k| 9.0 + 6.0 * ((k as f64) * 0.7).sin())
            .collect();
        let poly = StarPolygon::new(center, radii, 1.0).unwrap();
        let mask = rasterize(&poly, &rays, d).unwrap();
        for p in mask.iter_pixels() {
            // Walk the exact ray towards the center; every sample must stay
            // inside (same angle, smaller distance).
            let dr = p.row as f64 - 20.0;
            let dc = p.col as f64 - 20.0;
            let dist = (dr * dr + dc * dc).sqrt();
            if dist == 0.0 {
                continue;
            }
            let steps = 64;
            for s in 1..steps {
                let t = dist * (s as f64) / (steps as f64);
                let q = Pixel::new(
                    (20.0 + dr / dist * t).round() as usize,
                    (20.0 + dc / dist * t).round() as usize,
                );
                // Only samples whose rounded pixel lies exactly on the ray
                // angle are guaranteed members; check via the predicate.
                let qr = q.row as f64 - 20.0;
                let qc = q.col as f64 - 20.0;
                let qd = (qr * qr + qc * qc).sqrt();
                if qd == 0.0 {
                    continue;
                }
                let phi = {
                    let a = qr.atan2(qc);
                    if a < 0.0 {
                        a + std::f64::consts::TAU
                    } else {
                        a
                    }
                };
                if qd <= poly.radius_at(phi, &rays) {
                    assert!(mask.contains(q));
                }
            }
        }
    }

    #[test]
    fn iou_identity_and_disjoint() {
        let d = dims(10, 10);
        let a = square(d, 1, 1, 3);
        let b = square(d, 6, 6, 3);
        assert_eq!(pixel_iou::<f64>(&a, &a).unwrap(), 1.0);
        assert_eq!(pixel_iou::<f64>(&a, &b).unwrap(), 0.0);
        let empty = Mask::empty(d);
        assert_eq!(pixel_iou::<f64>(&empty, &empty).unwrap(), 0.0);
    }

    #[test]
    fn offset_squares_iou_and_dice() {
        let d = dims(10, 10);
        let a = square(d, 2, 2, 3);
        let b = square(d, 2, 3, 3);
        // Overlap is a 3x2 block: 6 pixels; union 12.
        assert_eq!(pixel_iou::<f64>(&a, &b).unwrap(), 0.5);
        assert!((dice::<f64>(&a, &b).unwrap() - 12.0 / 18.0).abs() < 1e-15);
        assert_eq!(
            dice::<f64>(&a, &b).unwrap(),
            dice::<f64>(&b, &a).unwrap(),
            "dice is symmetric"
        );
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = Mask::empty(dims(4, 4));
        let b = Mask::empty(dims(4, 5));
        assert!(pixel_iou::<f64>(&a, &b).is_err());
        assert!(dice::<f64>(&a, &b).is_err());
        let p = ScalarMap::<f64>::zeros(dims(4, 4));
        assert!(overlap_aware_intersection(&a, &b, &p).is_err());
    }

    #[test]
    fn overlap_aware_intersection_examples() {
        let d = dims(10, 10);
        let a = square(d, 2, 2, 3);
        let b = square(d, 2, 3, 3);
        let zeros = ScalarMap::<f64>::zeros(d);
        assert_eq!(overlap_aware_intersection(&a, &b, &zeros).unwrap(), 6.0);

        let ones = ScalarMap::<f64>::filled(d, 1.0);
        assert_eq!(overlap_aware_intersection(&a, &b, &ones).unwrap(), 0.0);

        let half = ScalarMap::<f64>::filled(d, 0.5);
        assert_eq!(overlap_aware_intersection(&a, &b, &half).unwrap(), 3.0);
    }

    #[test]
    fn overlap_aware_iou_examples() {
        let d = dims(10, 10);
        let a = square(d, 2, 2, 3);
        let b = square(d, 2, 3, 3);
        let zeros = ScalarMap::<f64>::zeros(d);
        assert_eq!(
            overlap_aware_iou(&a, &b, &zeros).unwrap(),
            pixel_iou::<f64>(&a, &b).unwrap()
        );
        let ones = ScalarMap::<f64>::filled(d, 1.0);
        assert_eq!(overlap_aware_iou(&a, &b, &ones).unwrap(), 0.0);
        let half = ScalarMap::<f64>::filled(d, 0.5);
        assert_eq!(overlap_aware_iou(&a, &b, &half).unwrap(), 0.25);
    }

    #[test]
    fn union_mode_switch() {
        let d = dims(10, 10);
        let a = square(d, 2, 2, 3);
        let b = square(d, 2, 3, 3);
        let half = ScalarMap::<f64>::filled(d, 0.5);
        // I = 3; |A|+|B|-I = 15 vs |A u B| = 12.
        let incl = overlap_aware_iou_with(&a, &b, &half, UnionMode::InclusionExclusion).unwrap();
        assert!((incl - 3.0 / 15.0).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_overlap_probability_is_an_error() {
        let d = dims(4, 4);
        let a = square(d, 0, 0, 2);
        let b = square(d, 0, 1, 2);
        let bad = ScalarMap::<f64>::filled(d, 1.5);
        assert!(matches!(
            overlap_aware_intersection(&a, &b, &bad).unwrap_err(),
            Error::ValueOutOfRange { .. }
        ));
    }

    #[test]
    fn raster_tables_match_direct_rasterization() {
        use rand::{Rng, SeedableRng};
        let d = dims(40, 48);
        let rays = RayConfig::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(29);
        let tables = RasterTables::new(&rays, 15);
        for _ in 0..40 {
            let center = Pixel::new(rng.random_range(0..40), rng.random_range(0..48));
            let radii: Vec<f64> = (0..32).map(|_| rng.random_range(0.0..15.0)).collect();
            let poly = StarPolygon::new(center, radii, 0.5).unwrap();
            let direct = rasterize(&poly, &rays, d).unwrap();
            let tabled = tables.rasterize(&poly, &rays, d).unwrap();
            assert_eq!(direct, tabled);
        }
    }

    #[test]
    fn monotone_exclusion_on_randomized_pairs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let d = dims(16, 16);
        for _ in 0..50 {
            let a = Mask::from_fn(d, |_| rng.random_bool(0.4));
            let b = Mask::from_fn(d, |_| rng.random_bool(0.4));
            let p = {
                let mut m = ScalarMap::<f64>::zeros(d);
                for v in m.data_mut() {
                    *v = rng.random_range(0.0..=1.0);
                }
                m
            };
            let oa = overlap_aware_iou(&a, &b, &p).unwrap();
            let plain = pixel_iou::<f64>(&a, &b).unwrap();
            assert!(0.0 <= oa && oa <= plain && plain <= 1.0);
            assert_eq!(plain, pixel_iou::<f64>(&b, &a).unwrap());
            assert_eq!(
                dice::<f64>(&a, &b).unwrap(),
                dice::<f64>(&b, &a).unwrap()
            );
        }
    }
}
