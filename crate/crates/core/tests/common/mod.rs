//! Shared fixtures for the acceptance suite: deterministic random scenes of
//! star-convex objects with controlled overlap structure.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use starlap::edt::euclidean_distance_transform;
use starlap::geometry::{pixel_iou, rasterize, RayConfig, StarPolygon};
use starlap::grid::{GridDims, Mask, Pixel, ScalarMap};
use starlap::groundtruth::LabelStack;

pub const SCENE_SIDE: usize = 256;

pub fn scene_dims() -> GridDims {
    GridDims::new(SCENE_SIDE, SCENE_SIDE).unwrap()
}

/// Smooth star-convex radii: a base radius plus two low harmonics, clamped.
pub fn smooth_radii(
    rng: &mut ChaCha8Rng,
    n_rays: usize,
    base_range: (f64, f64),
    clamp: (f64, f64),
) -> Vec<f64> {
    let base = rng.random_range(base_range.0..base_range.1);
    let a1 = rng.random_range(0.0..0.35 * base);
    let a2 = rng.random_range(0.0..0.2 * base);
    let p1 = rng.random_range(0.0..std::f64::consts::TAU);
    let p2 = rng.random_range(0.0..std::f64::consts::TAU);
    (0..n_rays)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / n_rays as f64;
            let r = base + a1 * (theta + p1).sin() + a2 * (2.0 * theta + p2).sin();
            r.clamp(clamp.0, clamp.1)
        })
        .collect()
}

/// Radii of an ellipse with semi-axes (a, b), major axis rotated by `alpha`.
fn ellipse_radii(n_rays: usize, a: f64, b: f64, alpha: f64) -> Vec<f64> {
    (0..n_rays)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / n_rays as f64 - alpha;
            a * b / ((b * theta.cos()).powi(2) + (a * theta.sin()).powi(2)).sqrt()
        })
        .collect()
}

fn raster(center: Pixel, radii: Vec<f64>, dims: GridDims, rays: &RayConfig) -> Mask {
    let poly = StarPolygon::new(center, radii, 1.0).unwrap();
    rasterize(&poly, rays, dims).unwrap()
}

/// Deepest single-coverage point of each instance relative to its own depth;
/// proposals exist at threshold rho only where this exceeds rho.
fn min_exclusive_depth(stack: &LabelStack) -> f64 {
    let coverage = stack.coverage();
    let mut worst = f64::INFINITY;
    for inst in stack.instances() {
        let edt: ScalarMap<f64> = euclidean_distance_transform(inst);
        let mut max_all = 0.0f64;
        let mut max_single = 0.0f64;
        for i in inst.iter_indices() {
            max_all = max_all.max(edt.data()[i]);
            if coverage[i] == 1 {
                max_single = max_single.max(edt.data()[i]);
            }
        }
        worst = worst.min(max_single / max_all);
    }
    worst
}

fn pairwise_overlap_ok(stack: &LabelStack, candidate: &Mask, max_frac: f64) -> bool {
    stack.instances().iter().all(|inst| {
        let inter = inst.intersection_count(candidate);
        inter as f64 <= max_frac * inst.count().min(candidate.count()) as f64
    })
}

fn cumulative_cover_ok(stack: &LabelStack, candidate: &Mask, max_frac: f64) -> bool {
    // Fraction of each instance covered by the union of all the others.
    let mut masks: Vec<&Mask> = stack.instances().iter().collect();
    masks.push(candidate);
    for (i, inst) in masks.iter().enumerate() {
        let mut covered = Mask::empty(inst.dims());
        for (j, other) in masks.iter().enumerate() {
            if i == j {
                continue;
            }
            for p in other.iter_pixels() {
                if inst.contains(p) {
                    covered.insert(p);
                }
            }
        }
        if covered.count() as f64 > max_frac * inst.count() as f64 {
            return false;
        }
    }
    true
}

/// Scene for the recovery check: 5..=10 smooth stars, every pairwise overlap
/// at most 40% of the smaller object, every object keeping a deep
/// single-coverage core.
pub fn moderate_scene(seed: u64) -> LabelStack {
    let dims = scene_dims();
    let rays = RayConfig::default();
    for sub in 0..32u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1000) + sub);
        let n = rng.random_range(5..=10);
        let mut stack = LabelStack::empty(dims);
        let mut centers: Vec<Pixel> = Vec::new();
        let mut attempts = 0;
        while stack.len() < n && attempts < 400 {
            attempts += 1;
            let near_existing = !centers.is_empty() && rng.random_bool(0.5);
            let center = if near_existing {
                let anchor = centers[rng.random_range(0..centers.len())];
                let dr = rng.random_range(-34i64..=34);
                let dc = rng.random_range(-34i64..=34);
                let row = (anchor.row as i64 + dr).clamp(28, SCENE_SIDE as i64 - 29);
                let col = (anchor.col as i64 + dc).clamp(28, SCENE_SIDE as i64 - 29);
                Pixel::new(row as usize, col as usize)
            } else {
                Pixel::new(
                    rng.random_range(28..SCENE_SIDE - 28),
                    rng.random_range(28..SCENE_SIDE - 28),
                )
            };
            let radii = smooth_radii(&mut rng, rays.n_rays(), (10.0, 20.0), (4.0, 24.0));
            let mask = raster(center, radii, dims, &rays);
            if pairwise_overlap_ok(&stack, &mask, 0.40) && cumulative_cover_ok(&stack, &mask, 0.55)
            {
                stack.push(mask).unwrap();
                centers.push(center);
            }
        }
        if stack.len() >= 5 && min_exclusive_depth(&stack) > 0.45 {
            return stack;
        }
    }
    panic!("could not generate a moderate scene for seed {seed}");
}

/// Scene for the NMS-mechanism check: two heavily overlapping elongated
/// pairs (instance IoU above 0.5 with both members keeping a detectable
/// exclusive core), two moderate pairs, and singles. Overlap fraction is
/// at least 15% of the object pixels.
pub fn overlapping_scene(seed: u64) -> LabelStack {
    let dims = scene_dims();
    let rays = RayConfig::default();
    'outer: for sub in 0..32u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1000) + 500 + sub);
        let mut stack = LabelStack::empty(dims);
        let mut heavy_pair_count = 0;

        // Two heavy elongated pairs in opposite quadrants.
        for base in [(66usize, 66usize), (190, 190)] {
            let alpha = rng.random_range(0.0..std::f64::consts::PI);
            let a = rng.random_range(20.0..24.0);
            let b = rng.random_range(7.5..9.0);
            let c0 = Pixel::new(
                (base.0 as i64 + rng.random_range(-8i64..=8)) as usize,
                (base.1 as i64 + rng.random_range(-8i64..=8)) as usize,
            );
            let first = raster(c0, ellipse_radii(rays.n_rays(), a, b, alpha), dims, &rays);
            let mut accepted = false;
            for shift in 7..=13i64 {
                let dr = (alpha.sin() * shift as f64).round() as i64;
                let dc = (alpha.cos() * shift as f64).round() as i64;
                let c1 = Pixel::new(
                    (c0.row as i64 + dr).clamp(26, SCENE_SIDE as i64 - 27) as usize,
                    (c0.col as i64 + dc).clamp(26, SCENE_SIDE as i64 - 27) as usize,
                );
                let second = raster(c1, ellipse_radii(rays.n_rays(), a, b, alpha), dims, &rays);
                let iou: f64 = pixel_iou(&first, &second).unwrap();
                if iou <= 0.52 || iou >= 0.68 {
                    continue;
                }
                let pair = LabelStack::new(dims, vec![first.clone(), second.clone()]).unwrap();
                if min_exclusive_depth(&pair) <= 0.40 {
                    continue;
                }
                stack.push(first.clone()).unwrap();
                stack.push(second).unwrap();
                heavy_pair_count += 1;
                accepted = true;
                break;
            }
            if !accepted {
                continue 'outer;
            }
        }

        // Two moderate disk pairs.
        for base in [(66usize, 190usize), (190, 66)] {
            let r: f64 = rng.random_range(10.0..14.0);
            let c0 = Pixel::new(
                (base.0 as i64 + rng.random_range(-6i64..=6)) as usize,
                (base.1 as i64 + rng.random_range(-6i64..=6)) as usize,
            );
            let gap = (1.15 * r).round() as i64;
            let c1 = Pixel::new(c0.row, (c0.col as i64 + gap) as usize);
            stack
                .push(raster(c0, vec![r; rays.n_rays()], dims, &rays))
                .unwrap();
            stack
                .push(raster(c1, vec![r; rays.n_rays()], dims, &rays))
                .unwrap();
        }

        // A couple of isolated objects.
        for base in [(128usize, 36usize), (128, 220)] {
            let radii = smooth_radii(&mut rng, rays.n_rays(), (9.0, 13.0), (4.0, 16.0));
            let c = Pixel::new(
                (base.0 as i64 + rng.random_range(-6i64..=6)) as usize,
                (base.1 as i64 + rng.random_range(-6i64..=6)) as usize,
            );
            stack.push(raster(c, radii, dims, &rays)).unwrap();
        }

        let fraction: f64 = starlap::synth::overlap_fraction(&stack);
        if heavy_pair_count == 2 && fraction >= 0.15 && min_exclusive_depth(&stack) > 0.35 {
            return stack;
        }
    }
    panic!("could not generate an overlapping scene for seed {seed}");
}

pub fn criterion_line(number: usize, name: &str, ok: bool, details: &str) {
    println!(
        "criterion {number} ({name}): {} - {details}",
        if ok { "PASS" } else { "FAIL" }
    );
}
