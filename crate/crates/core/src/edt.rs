//! Exact Euclidean distance transform via the separable lower-envelope
//! (parabola) algorithm, linear in the number of pixels.
//!
//! For a member pixel the result is the exact Euclidean distance to the
//! nearest non-member pixel center; non-members map to 0. Squared distances
//! are computed in `f64` over exact integer inputs, so the output agrees with
//! a brute-force search to the last bit. A mask with no background pixels has
//! no nearest non-member; its members come out as positive infinity.

use crate::grid::{Mask, ScalarMap};
use crate::real::Real;

/// Squared-distance transform of one row/column: `d(q) = min_p (q-p)^2 + f(p)`.
fn transform_1d(f: &[f64], out: &mut [f64], hull: &mut [usize], bounds: &mut [f64]) {
    let n = f.len();
    debug_assert!(out.len() == n && hull.len() == n && bounds.len() == n + 1);

    let mut k = 0usize;
    hull[0] = 0;
    bounds[0] = f64::NEG_INFINITY;
    bounds[1] = f64::INFINITY;

    for q in 1..n {
        if f[q] == f64::INFINITY {
            continue;
        }
        if f[hull[k]] == f64::INFINITY {
            // No finite parabola seen yet; this one starts the envelope.
            debug_assert_eq!(k, 0);
            hull[0] = q;
            continue;
        }
        let mut s = intersect(f, hull[k], q);
        while s <= bounds[k] {
            k -= 1;
            s = intersect(f, hull[k], q);
        }
        k += 1;
        hull[k] = q;
        bounds[k] = s;
        bounds[k + 1] = f64::INFINITY;
    }

    let mut k = 0usize;
    for (q, slot) in out.iter_mut().enumerate() {
        while bounds[k + 1] < q as f64 {
            k += 1;
        }
        let v = hull[k];
        let d = q as f64 - v as f64;
        *slot = d * d + f[v];
    }
}

/// Abscissa where the parabolas rooted at `p` and `q` cross.
fn intersect(f: &[f64], p: usize, q: usize) -> f64 {
    let fp = f[p];
    let fq = f[q];
    let (p, q) = (p as f64, q as f64);
    ((fq + q * q) - (fp + p * p)) / (2.0 * (q - p))
}

/// Exact Euclidean distance from each member pixel to the nearest non-member
/// pixel center; 0 on non-members.
pub fn euclidean_distance_transform<F: Real>(mask: &Mask) -> ScalarMap<F> {
    let dims = mask.dims();
    let (h, w) = (dims.height(), dims.width());
    let mut dist2 = vec![0.0f64; h * w];
    for (i, v) in dist2.iter_mut().enumerate() {
        if mask.contains_index(i) {
            *v = f64::INFINITY;
        }
    }

    let side = h.max(w);
    let mut f = vec![0.0f64; side];
    let mut out = vec![0.0f64; side];
    let mut hull = vec![0usize; side];
    let mut bounds = vec![0.0f64; side + 1];

    // Columns, then rows.
    for c in 0..w {
        for r in 0..h {
            f[r] = dist2[r * w + c];
        }
        transform_1d(&f[..h], &mut out[..h], &mut hull[..h], &mut bounds[..h + 1]);
        for r in 0..h {
            dist2[r * w + c] = out[r];
        }
    }
    for r in 0..h {
        f[..w].copy_from_slice(&dist2[r * w..r * w + w]);
        transform_1d(&f[..w], &mut out[..w], &mut hull[..w], &mut bounds[..w + 1]);
        dist2[r * w..r * w + w].copy_from_slice(&out[..w]);
    }

    let data = dist2.into_iter().map(|d2| F::of_f64(d2.sqrt())).collect();
    ScalarMap::from_vec(dims, data).expect("dimensions preserved")
}
