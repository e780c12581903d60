//! Ground-truth map derivation from stacks of possibly-overlapping instance
//! masks: object probability (per-instance normalized distance transform),
//! overlap indicator, and per-pixel star distances.
//!
//! Pixels covered by two or more instances are ambiguous for the object
//! probability and star distance targets; they are zeroed and flagged invalid
//! so downstream losses and samplers can exclude them.

use crate::edt::euclidean_distance_transform;
use crate::error::{Error, Result};
use crate::geometry::RayConfig;
use crate::grid::{GridDims, Mask, Pixel, ScalarMap, StarDistanceMap};
use crate::real::Real;

/// Set of instance masks over one grid; instances may overlap.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelStack {
    dims: GridDims,
    instances: Vec<Mask>,
}

impl LabelStack {
    pub fn new(dims: GridDims, instances: Vec<Mask>) -> Result<Self> {
        for (index, m) in instances.iter().enumerate() {
            dims.check_matches(m.dims(), "label stack instance")?;
            if m.is_empty() {
                return Err(Error::EmptyInstance { index });
            }
        }
        Ok(LabelStack { dims, instances })
    }

    pub fn empty(dims: GridDims) -> Self {
        LabelStack {
            dims,
            instances: Vec::new(),
        }
    }

    pub fn push(&mut self, mask: Mask) -> Result<()> {
        self.dims
            .check_matches(mask.dims(), "label stack instance")?;
        if mask.is_empty() {
            return Err(Error::EmptyInstance {
                index: self.instances.len(),
            });
        }
        self.instances.push(mask);
        Ok(())
    }

    pub fn dims(&self) -> GridDims {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn instances(&self) -> &[Mask] {
        &self.instances
    }

    pub fn get(&self, i: usize) -> &Mask {
        &self.instances[i]
    }

    /// Per-pixel number of covering instances.
    pub fn coverage(&self) -> Vec<u32> {
        let mut cov = vec![0u32; self.dims.len()];
        for m in &self.instances {
            for i in m.iter_indices() {
                cov[i] += 1;
            }
        }
        cov
    }
}

/// The three training/inference targets plus the exclusion mask.
///
/// `valid` is false exactly at pixels covered by two or more instances;
/// background pixels are valid.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruthMaps<F> {
    pub p_obj: ScalarMap<F>,
    pub p_over: ScalarMap<F>,
    pub star_dists: StarDistanceMap<F>,
    pub valid: Mask,
}

impl<F: Real> GroundTruthMaps<F> {
    pub fn dims(&self) -> GridDims {
        self.p_obj.dims()
    }
}

/// Indicator of coverage by at least two instances.
pub fn overlap_probability_map<F: Real>(labels: &LabelStack) -> ScalarMap<F> {
    let mut map = ScalarMap::zeros(labels.dims());
    for (i, &c) in labels.coverage().iter().enumerate() {
        if c >= 2 {
            map.data_mut()[i] = F::one();
        }
    }
    map
}

/// Per-instance normalized Euclidean distance transform: inside each
/// instance the distance transform divided by that instance's maximum, zero
/// on background. Overlap pixels are zeroed and reported invalid in the
/// returned mask (which is otherwise true everywhere, background included).
pub fn object_probability_map<F: Real>(labels: &LabelStack) -> (ScalarMap<F>, Mask) {
    let dims = labels.dims();
    let coverage = labels.coverage();
    let mut map = ScalarMap::zeros(dims);
    let mut valid = Mask::full(dims);
    for (i, &c) in coverage.iter().enumerate() {
        if c >= 2 {
            valid.remove(dims.pixel_at(i));
        }
    }

    for inst in labels.instances() {
        let edt: ScalarMap<f64> = euclidean_distance_transform(inst);
        let max = inst
            .iter_indices()
            .map(|i| edt.data()[i])
            .fold(0.0f64, f64::max);
        for i in inst.iter_indices() {
            if coverage[i] != 1 {
                continue;
            }
            // A mask with no background at all has an infinite transform;
            // treat its interior as uniformly deep.
            let v = if max.is_finite() {
                edt.data()[i] / max
            } else {
                1.0
            };
            map.data_mut()[i] = F::of_f64(v);
        }
    }
    (map, valid)
}

/// Distance along `dir` from the center of pixel `p` to the point where the
/// ray first enters a cell that is outside the grid or not a mask member
/// (exact cell-boundary crossing; cells are unit squares centered on integer
/// coordinates).
fn ray_exit_distance<F: Real>(mask: &Mask, p: Pixel, dir: (F, F)) -> F {
    let dims = mask.dims();
    let (d_row, d_col) = dir;
    let half = F::of_f64(0.5);

    let mut row = p.row as i64;
    let mut col = p.col as i64;
    let (step_row, mut t_row, dt_row) = axis_walk(d_row, half);
    let (step_col, mut t_col, dt_col) = axis_walk(d_col, half);
    // Crossings this close are a corner hit up to rounding noise in the ray
    // direction; step diagonally instead of grazing a side cell.
    let corner_tol = F::epsilon() * F::of_f64(16.0);

    loop {
        let t_next = t_row.min(t_col);
        let corner = (t_row - t_col).abs() <= corner_tol * t_next;
        if corner || t_row <= t_next {
            row += step_row;
            t_row += dt_row;
        }
        if corner || t_col <= t_next {
            col += step_col;
            t_col += dt_col;
        }
        if row < 0 || col < 0 || row >= dims.height() as i64 || col >= dims.width() as i64 {
            return t_next;
        }
        if !mask.contains(Pixel::new(row as usize, col as usize)) {
            return t_next;
        }
    }
}

fn axis_walk<F: Real>(d: F, half: F) -> (i64, F, F) {
    if d > F::zero() {
        (1, half / d, F::one() / d)
    } else if d < F::zero() {
        (-1, half / -d, F::one() / -d)
    } else {
        (0, F::infinity(), F::infinity())
    }
}

/// Star distances of mask `m` seen from member pixel `p`: for each ray, the
/// exact distance at which the ray leaves the mask (first crossing into a
/// non-member or out-of-grid cell). Always within one pixel of the distance
/// to the continuous boundary, and at least 0.5.
pub fn star_distances_at<F: Real>(mask: &Mask, p: Pixel, rays: &RayConfig) -> Result<Vec<F>> {
    if !mask.dims().contains(p) {
        return Err(Error::PixelOutsideGrid {
            row: p.row,
            col: p.col,
            height: mask.dims().height(),
            width: mask.dims().width(),
        });
    }
    if !mask.contains(p) {
        return Err(Error::PixelOutsideMask {
            row: p.row,
            col: p.col,
        });
    }
    Ok((0..rays.n_rays())
        .map(|k| ray_exit_distance(mask, p, rays.direction(k)))
        .collect())
}

/// Star distances at every pixel covered by exactly one instance (of that
/// instance); zero elsewhere. The returned mask is true exactly at the
/// single-coverage pixels.
pub fn star_distances_map<F: Real>(
    labels: &LabelStack,
    rays: &RayConfig,
) -> (StarDistanceMap<F>, Mask) {
    let dims = labels.dims();
    let mut map = StarDistanceMap::zeros(dims, rays.n_rays());
    let mut valid = Mask::empty(dims);

    // owner[i]: index of the unique covering instance, or usize::MAX.
    let mut owner = vec![usize::MAX; dims.len()];
    let coverage = labels.coverage();
    for (idx, inst) in labels.instances().iter().enumerate() {
        for i in inst.iter_indices() {
            if coverage[i] == 1 {
                owner[i] = idx;
            }
        }
    }

    let dirs: Vec<(F, F)> = rays.directions();
    let mut radii = vec![F::zero(); rays.n_rays()];
    for (i, &owner_idx) in owner.iter().enumerate() {
        if owner_idx == usize::MAX {
            continue;
        }
        let p = dims.pixel_at(i);
        let inst = labels.get(owner_idx);
        for (k, &dir) in dirs.iter().enumerate() {
            radii[k] = ray_exit_distance(inst, p, dir);
        }
        map.set_at(p, &radii);
        valid.insert(p);
    }
    (map, valid)
}

/// Composes the three map builders; `valid` excludes exactly the overlap
/// pixels (background stays valid).
pub fn make_ground_truth<F: Real>(labels: &LabelStack, rays: &RayConfig) -> GroundTruthMaps<F> {
    let (p_obj, valid) = object_probability_map(labels);
    let p_over = overlap_probability_map(labels);
    let (star_dists, _single) = star_distances_map(labels, rays);
    GroundTruthMaps {
        p_obj,
        p_over,
        star_dists,
        valid,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rasterize, StarPolygon};

    fn dims(h: usize, w: usize) -> GridDims {
        GridDims::new(h, w).unwrap()
    }

    fn disk(d: GridDims, center: Pixel, r: f64) -> Mask {
        Mask::from_fn(d, |p| {
            let dr = p.row as f64 - center.row as f64;
            let dc = p.col as f64 - center.col as f64;
            (dr * dr + dc * dc).sqrt() <= r
        })
    }

    fn square(d: GridDims, top: usize, left: usize, side: usize) -> Mask {
        Mask::from_fn(d, |p| {
            p.row >= top && p.row < top + side && p.col >= left && p.col < left + side
        })
    }

    #[test]
    fn stack_rejects_empty_instances_and_dim_mismatch() {
        let d = dims(5, 5);
        assert!(matches!(
            LabelStack::new(d, vec![Mask::empty(d)]),
            Err(Error::EmptyInstance { index: 0 })
        ));
        let other = Mask::full(dims(5, 6));
        assert!(LabelStack::new(d, vec![other]).is_err());
    }

    #[test]
    fn overlap_map_trivial_cases() {
        let d = dims(6, 6);
        assert!(overlap_probability_map::<f64>(&LabelStack::empty(d))
            .data()
            .iter()
            .all(|&v| v == 0.0));

        let single = LabelStack::new(d, vec![square(d, 0, 0, 3)]).unwrap();
        assert!(overlap_probability_map::<f64>(&single)
            .data()
            .iter()
            .all(|&v| v == 0.0));

        // Two masks sharing exactly one pixel.
        let mut a = Mask::empty(d);
        a.insert(Pixel::new(2, 2));
        a.insert(Pixel::new(2, 3));
        let mut b = Mask::empty(d);
        b.insert(Pixel::new(2, 3));
        b.insert(Pixel::new(2, 4));
        let stack = LabelStack::new(d, vec![a, b]).unwrap();
        let over = overlap_probability_map::<f64>(&stack);
        for p in d.pixels() {
            let expect = if p == Pixel::new(2, 3) { 1.0 } else { 0.0 };
            assert_eq!(over.get(p), expect);
        }
    }

    #[test]
    fn overlap_map_matches_coverage_oracle_for_three_instances() {
        let d = dims(8, 8);
        let s1 = square(d, 0, 0, 4);
        let s2 = square(d, 1, 1, 4);
        let s3 = square(d, 2, 2, 4);
        let stack = LabelStack::new(d, vec![s1.clone(), s2.clone(), s3.clone()]).unwrap();
        let over = overlap_probability_map::<f64>(&stack);
        for p in d.pixels() {
            let c = [&s1, &s2, &s3].iter().filter(|m| m.contains(p)).count();
            assert_eq!(over.get(p), if c >= 2 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn object_probability_single_pixel_object() {
        let d = dims(5, 5);
        let mut m = Mask::empty(d);
        m.insert(Pixel::new(2, 2));
        let stack = LabelStack::new(d, vec![m]).unwrap();
        let (p_obj, valid) = object_probability_map::<f64>(&stack);
        for p in d.pixels() {
            let expect = if p == Pixel::new(2, 2) { 1.0 } else { 0.0 };
            assert_eq!(p_obj.get(p), expect);
            assert!(valid.contains(p));
        }
    }

    #[test]
    fn object_probability_peaks_at_disk_center_and_decays_outward() {
        let d = dims(21, 21);
        let c = Pixel::new(10, 10);
        let stack = LabelStack::new(d, vec![disk(d, c, 7.0)]).unwrap();
        let (p_obj, _) = object_probability_map::<f64>(&stack);
        assert_eq!(p_obj.get(c), 1.0);
        // Non-increasing along the four axis rays.
        for (dr, dc) in [(0i64, 1i64), (0, -1), (1, 0), (-1, 0)] {
            let mut last = p_obj.get(c);
            for t in 1..=7 {
                let p = Pixel::new(
                    (c.row as i64 + dr * t) as usize,
                    (c.col as i64 + dc * t) as usize,
                );
                let v = p_obj.get(p);
                assert!(v <= last + 1e-12);
                last = v;
            }
        }
    }

    #[test]
    fn coincident_instances_are_fully_invalid() {
        let d = dims(6, 6);
        let m = square(d, 1, 1, 3);
        let stack = LabelStack::new(d, vec![m.clone(), m.clone()]).unwrap();
        let (p_obj, valid) = object_probability_map::<f64>(&stack);
        for p in d.pixels() {
            if m.contains(p) {
                assert!(!valid.contains(p));
                assert_eq!(p_obj.get(p), 0.0);
            } else {
                assert!(valid.contains(p));
            }
        }
    }

    #[test]
    fn star_distances_require_member_pixel() {
        let d = dims(5, 5);
        let m = square(d, 0, 0, 2);
        let rays = RayConfig::default();
        assert!(matches!(
            star_distances_at::<f64>(&m, Pixel::new(4, 4), &rays),
            Err(Error::PixelOutsideMask { .. })
        ));
    }

    #[test]
    fn single_pixel_star_distances_are_cell_exits() {
        let d = dims(7, 7);
        let mut m = Mask::empty(d);
        let p = Pixel::new(3, 3);
        m.insert(p);
        let rays = RayConfig::default();
        let ds = star_distances_at::<f64>(&m, p, &rays).unwrap();
        // The ray leaves the 1x1 center cell between half a pixel (axis) and
        // sqrt(2)/2 (diagonal).
        for (k, &dk) in ds.iter().enumerate() {
            assert!(
                (0.5..=std::f64::consts::SQRT_2 / 2.0 + 1e-12).contains(&dk),
                "ray {k}: {dk}"
            );
        }
        assert_eq!(ds[0], 0.5, "+col axis exits at the cell boundary");
        assert_eq!(ds[8], 0.5, "+row axis exits at the cell boundary");
    }

    #[test]
    fn boundary_adjacent_pixel_exits_within_first_cell() {
        let d = dims(5, 5);
        let m = square(d, 1, 1, 3); // rows/cols 1..=3
        let rays = RayConfig::new(4).unwrap(); // +col, +row, -col, -row
        let ds = star_distances_at::<f64>(&m, Pixel::new(2, 3), &rays).unwrap();
        assert_eq!(ds[0], 0.5, "right neighbor is background");
        assert_eq!(ds[1], 1.5, "one member below, then background");
        assert_eq!(ds[2], 2.5, "two members left, then background");
    }

    #[test]
    fn disk_star_distances_within_one_pixel_of_radius() {
        let d = dims(15, 15);
        let c = Pixel::new(7, 7);
        let m = disk(d, c, 4.0);
        let rays = RayConfig::default();
        let ds = star_distances_at::<f64>(&m, c, &rays).unwrap();
        for (k, &dk) in ds.iter().enumerate() {
            assert!((dk - 4.0).abs() < 1.0, "ray {k}: {dk}");
        }
    }

    #[test]
    fn dda_matches_fine_stepping_oracle() {
        // Independent check of the cell-walk: march the same ray in tiny
        // steps, classifying points by nearest pixel center.
        let d = dims(31, 31);
        let c = Pixel::new(15, 15);
        let radii: Vec<f64> = (0..32)
            .map(|k| 6.0 + 4.0 * ((k as f64) * 0.9).sin())
            .collect();
        let poly = StarPolygon::new(c, radii, 1.0).unwrap();
        let rays = RayConfig::default();
        let m = rasterize(&poly, &rays, d).unwrap();
        let ds = star_distances_at::<f64>(&m, c, &rays).unwrap();
        let h = 1.0 / 256.0;
        for (k, &dk) in ds.iter().enumerate() {
            let (dr, dc) = rays.direction::<f64>(k);
            let mut t = h;
            let fine = loop {
                let row = (c.row as f64 + t * dr).round() as i64;
                let col = (c.col as f64 + t * dc).round() as i64;
                let outside = row < 0
                    || col < 0
                    || row >= 31
                    || col >= 31
                    || !m.contains(Pixel::new(row as usize, col as usize));
                if outside {
                    break t;
                }
                t += h;
            };
            assert!(
                (fine - dk).abs() <= 2.0 * h,
                "ray {k}: dda {dk} vs fine {fine}"
            );
        }
    }

    #[test]
    fn star_map_matches_per_pixel_oracle_for_a_disk() {
        let d = dims(13, 13);
        let m = disk(d, Pixel::new(6, 6), 4.0);
        let stack = LabelStack::new(d, vec![m.clone()]).unwrap();
        let rays = RayConfig::new(8).unwrap();
        let (map, valid) = star_distances_map::<f64>(&stack, &rays);
        for p in d.pixels() {
            if m.contains(p) {
                assert!(valid.contains(p));
                let expect = star_distances_at::<f64>(&m, p, &rays).unwrap();
                assert_eq!(map.at(p), expect.as_slice());
            } else {
                assert!(!valid.contains(p));
                assert!(map.at(p).iter().all(|&v| v == 0.0));
            }
        }
    }

    #[test]
    fn star_map_excludes_overlap_and_uses_covering_instance() {
        let d = dims(10, 14);
        let a = square(d, 2, 1, 5); // cols 1..=5
        let b = square(d, 2, 4, 5); // cols 4..=8, overlap cols 4..=5
        let stack = LabelStack::new(d, vec![a.clone(), b.clone()]).unwrap();
        let rays = RayConfig::new(4).unwrap();
        let (map, valid) = star_distances_map::<f64>(&stack, &rays);
        for p in d.pixels() {
            let in_a = a.contains(p);
            let in_b = b.contains(p);
            if in_a && in_b {
                assert!(!valid.contains(p));
                assert!(map.at(p).iter().all(|&v| v == 0.0));
            } else if in_a {
                let expect = star_distances_at::<f64>(&a, p, &rays).unwrap();
                assert_eq!(map.at(p), expect.as_slice());
            } else if in_b {
                let expect = star_distances_at::<f64>(&b, p, &rays).unwrap();
                assert_eq!(map.at(p), expect.as_slice());
            }
        }
    }

    #[test]
    fn make_ground_truth_composes_consistently() {
        let d = dims(16, 16);
        let a = disk(d, Pixel::new(7, 5), 4.0);
        let b = disk(d, Pixel::new(7, 10), 4.0);
        let stack = LabelStack::new(d, vec![a.clone(), b.clone()]).unwrap();
        let gt: GroundTruthMaps<f64> = make_ground_truth(&stack, &RayConfig::default());
        for p in d.pixels() {
            let overlap = a.contains(p) && b.contains(p);
            assert_eq!(gt.p_over.get(p), if overlap { 1.0 } else { 0.0 });
            assert_eq!(gt.valid.contains(p), !overlap);
            if overlap {
                assert_eq!(gt.p_obj.get(p), 0.0);
            }
            if !a.contains(p) && !b.contains(p) {
                assert_eq!(gt.p_obj.get(p), 0.0);
            }
        }
        assert!(gt.p_obj.validate_probabilities("p_obj").is_ok());
    }

    #[test]
    fn empty_stack_ground_truth_is_all_zero() {
        let d = dims(8, 8);
        let gt: GroundTruthMaps<f64> =
            make_ground_truth(&LabelStack::empty(d), &RayConfig::default());
        assert!(gt.p_obj.data().iter().all(|&v| v == 0.0));
        assert!(gt.p_over.data().iter().all(|&v| v == 0.0));
        assert!(gt.star_dists.data().iter().all(|&v| v == 0.0));
        assert_eq!(gt.valid.count(), d.len());
    }
}
