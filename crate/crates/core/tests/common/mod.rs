//! Naive oracles shared by the integration tests. Written from the
//! definitions with no reuse of library internals.

#![allow(dead_code)]

use msibm::{CostMap, DisparityMap, GrayImage, SignConvention};
use rand::Rng;

pub fn clamp_get(img: &GrayImage, r: isize, c: isize) -> f64 {
    let r = r.clamp(0, img.height() as isize - 1) as usize;
    let c = c.clamp(0, img.width() as isize - 1) as usize;
    img.get(r, c)
}

pub fn patch(img: &GrayImage, center: (usize, usize), half: usize) -> Vec<f64> {
    let n = half as isize;
    let mut out = Vec::new();
    for a in -n..=n {
        for b in -n..=n {
            out.push(clamp_get(img, center.0 as isize + a, center.1 as isize + b));
        }
    }
    out
}

/// Mean and population standard deviation.
pub fn moments(p: &[f64]) -> (f64, f64) {
    let n = p.len() as f64;
    let mean = p.iter().sum::<f64>() / n;
    let var = p.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn naive_zncc(
    left: &GrayImage,
    right: &GrayImage,
    cl: (usize, usize),
    cr: (usize, usize),
    half: usize,
    eps: f64,
) -> f64 {
    let lp = patch(left, cl, half);
    let rp = patch(right, cr, half);
    let (ml, sl) = moments(&lp);
    let (mr, sr) = moments(&rp);
    if sl < eps || sr < eps {
        return -1.0;
    }
    let cross: f64 = lp.iter().zip(&rp).map(|(a, b)| (a - ml) * (b - mr)).sum();
    (cross / (lp.len() as f64 * sl * sr)).clamp(-1.0, 1.0)
}

pub fn right_center(sign: SignConvention, col: usize, z: usize, width: usize) -> Option<usize> {
    match sign {
        SignConvention::MiddleburyMinus => col.checked_sub(z),
        SignConvention::PaperPlus => (col + z < width).then_some(col + z),
    }
}

/// Every candidate cost for one pixel.
pub fn naive_dsi(
    left: &GrayImage,
    right: &GrayImage,
    (i, j): (usize, usize),
    half: usize,
    d_max: usize,
    sign: SignConvention,
    eps: f64,
) -> Vec<f64> {
    (0..=d_max)
        .map(|z| match right_center(sign, j, z, left.width()) {
            None => -1.0,
            Some(rc) => naive_zncc(left, right, (i, j), (i, rc), half, eps),
        })
        .collect()
}

/// First index of the maximum.
pub fn first_argmax(v: &[f64]) -> (usize, f64) {
    let mut best = (0, v[0]);
    for (z, &c) in v.iter().enumerate().skip(1) {
        if c > best.1 {
            best = (z, c);
        }
    }
    best
}

/// Exhaustive winner-take-all over `[0, d_max]`.
pub fn naive_full_search(
    left: &GrayImage,
    right: &GrayImage,
    half: usize,
    d_max: usize,
    sign: SignConvention,
    eps: f64,
) -> (Vec<f32>, Vec<f64>) {
    let (w, h) = left.dims();
    let mut d = Vec::with_capacity(w * h);
    let mut c = Vec::with_capacity(w * h);
    for i in 0..h {
        for j in 0..w {
            let (z, best) = first_argmax(&naive_dsi(left, right, (i, j), half, d_max, sign, eps));
            d.push(z as f32);
            c.push(best);
        }
    }
    (d, c)
}

/// Filter-sort median over the confident members of each 5x5 window.
pub fn naive_selective_median(d: &DisparityMap, c: &CostMap, alpha: f64) -> Vec<f32> {
    let (w, h) = d.dims();
    let mut out = d.as_slice().to_vec();
    for i in 0..h {
        for j in 0..w {
            if c.get(i, j) > alpha {
                continue;
            }
            let mut pool = Vec::new();
            for m in i as isize - 2..=i as isize + 2 {
                for n in j as isize - 2..=j as isize + 2 {
                    if m < 0 || n < 0 || m >= h as isize || n >= w as isize {
                        continue;
                    }
                    let (m, n) = (m as usize, n as usize);
                    if c.get(m, n) > alpha && d.get(m, n).is_finite() {
                        pool.push(d.get(m, n));
                    }
                }
            }
            if !pool.is_empty() {
                pool.sort_by(|a, b| a.partial_cmp(b).unwrap());
                out[i * w + j] = pool[(pool.len() - 1) / 2];
            }
        }
    }
    out
}

/// Uniform noise with an optional flat rectangle, so degenerate patches occur.
pub fn random_image<R: Rng>(rng: &mut R, w: usize, h: usize, flat: bool) -> GrayImage {
    let (r0, r1, c0, c1) = if flat {
        let r0 = rng.gen_range(0..h);
        let c0 = rng.gen_range(0..w);
        (r0, (r0 + rng.gen_range(3..9)).min(h), c0, (c0 + rng.gen_range(3..9)).min(w))
    } else {
        (0, 0, 0, 0)
    };
    let level = rng.gen::<f64>();
    GrayImage::from_fn(w, h, |i, j| {
        if i >= r0 && i < r1 && j >= c0 && j < c1 {
            level
        } else {
            rng.gen::<f64>()
        }
    })
    .unwrap()
}

/// Right view of `left` under a constant shift, with fresh noise where the
/// shift uncovers columns.
pub fn shifted_right<R: Rng>(
    rng: &mut R,
    left: &GrayImage,
    shift: usize,
    sign: SignConvention,
    noise: f64,
) -> GrayImage {
    let w = left.width();
    GrayImage::from_fn(w, left.height(), |i, j| {
        let src = match sign {
            SignConvention::MiddleburyMinus => Some(j + shift).filter(|&c| c < w),
            SignConvention::PaperPlus => j.checked_sub(shift),
        };
        let base = src.map_or_else(|| rng.gen::<f64>(), |c| left.get(i, c));
        (base + noise * (rng.gen::<f64>() - 0.5)).clamp(0.0, 1.0)
    })
    .unwrap()
}

pub fn bits32(v: &[f32]) -> Vec<u32> {
    v.iter().map(|x| x.to_bits()).collect()
}

pub fn bits64(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}
