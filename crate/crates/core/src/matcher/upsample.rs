//! Coarse-to-fine transfer of disparity and cost maps.

use crate::error::MatchError;
use crate::raster::{is_valid_disparity, CostMap, DisparityMap};

/// Keys cubic convolution kernel with `a = -0.5`.
fn cubic_weight(x: f64) -> f64 {
    const A: f64 = -0.5;
    let x = x.abs();
    if x < 1.0 {
        ((A + 2.0) * x - (A + 3.0)) * x * x + 1.0
    } else if x < 2.0 {
        ((A * x - 5.0 * A) * x + 8.0 * A) * x - 4.0 * A
    } else {
        0.0
    }
}

/// Taps and weights for sampling at coarse coordinate `pos`.
fn taps(pos: f64, len: usize) -> ([usize; 4], [f64; 4]) {
    let base = pos.floor();
    let t = pos - base;
    let mut idx = [0usize; 4];
    let mut w = [0.0; 4];
    for k in 0..4 {
        let offset = k as f64 - 1.0;
        idx[k] = (base as isize + k as isize - 1).clamp(0, len as isize - 1) as usize;
        w[k] = cubic_weight(t - offset);
    }
    (idx, w)
}

/// Nearest-neighbor disparity upsampling with the values doubled into
/// fine-level units, and bicubic cost upsampling clamped to `[-1, 1]`.
///
/// Fine pixel `(i, j)` sits at coarse coordinate `(i / 2, j / 2)`, which is
/// where even-coordinate decimation took its sample from.
pub fn upsample_prior(
    d_coarse: &DisparityMap,
    c_coarse: &CostMap,
    target: (usize, usize),
) -> Result<(DisparityMap, CostMap), MatchError> {
    let (tw, th) = target;
    let expected = (tw.div_ceil(2), th.div_ceil(2));
    if d_coarse.dims() != expected || tw == 0 || th == 0 {
        return Err(MatchError::DimensionMismatch {
            expected,
            got: d_coarse.dims(),
        });
    }
    if c_coarse.dims() != expected {
        return Err(MatchError::DimensionMismatch {
            expected,
            got: c_coarse.dims(),
        });
    }
    let (cw, ch) = expected;

    let mut d = Vec::with_capacity(tw * th);
    for i in 0..th {
        for j in 0..tw {
            let v = d_coarse.get(i / 2, j / 2);
            d.push(if is_valid_disparity(v) { 2.0 * v } else { v });
        }
    }

    let col_taps: Vec<_> = (0..tw).map(|j| taps(j as f64 / 2.0, cw)).collect();
    let mut c = Vec::with_capacity(tw * th);
    for i in 0..th {
        let (ri, rw) = taps(i as f64 / 2.0, ch);
        for (j, (ci, cwts)) in col_taps.iter().enumerate() {
            // accumulate deviations from the nearest sample so constant
            // regions come back exactly
            let anchor = c_coarse.get(i / 2, j / 2);
            let mut acc = 0.0;
            for (&r, &wy) in ri.iter().zip(&rw) {
                let mut row_acc = 0.0;
                for (&cc, &wx) in ci.iter().zip(cwts) {
                    row_acc += wx * (c_coarse.get(r, cc) - anchor);
                }
                acc += wy * row_acc;
            }
            c.push((anchor + acc).clamp(-1.0, 1.0));
        }
    }

    Ok((DisparityMap::new(tw, th, d)?, CostMap::new(tw, th, c)?))
}
