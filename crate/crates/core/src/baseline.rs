//! Single-resolution exhaustive block matching.
//!
//! A plain loop nest that gathers both patches, removes their means and
//! correlates them for every pixel and every candidate. It shares no code
//! with [`crate::cost::LevelCost`], so it doubles as an oracle for the
//! optimized kernel.

use rayon::prelude::*;

use crate::config::{validate_block, SignConvention};
use crate::error::{ConfigError, MatchError};
use crate::raster::{CostMap, DisparityMap, GrayImage};

#[derive(Clone, Debug)]
pub struct BaselineOutput {
    pub disparity: DisparityMap,
    pub cost: CostMap,
    /// Always `width * height * (d_max + 1)`.
    pub evaluations: u64,
}

fn gather(img: &GrayImage, row: usize, col: usize, half: usize, out: &mut Vec<f64>) {
    out.clear();
    let (w, h) = (img.width() as isize, img.height() as isize);
    let n = half as isize;
    for a in -n..=n {
        let r = (row as isize + a).clamp(0, h - 1) as usize;
        for b in -n..=n {
            let c = (col as isize + b).clamp(0, w - 1) as usize;
            out.push(img.get(r, c));
        }
    }
}

/// Removes the mean in place and returns the root mean squared deviation.
fn center(patch: &mut [f64]) -> f64 {
    let n = patch.len() as f64;
    let mean = patch.iter().sum::<f64>() / n;
    let mut sq = 0.0;
    for v in patch.iter_mut() {
        *v -= mean;
        sq += *v * *v;
    }
    (sq / n).sqrt()
}

pub fn baseline_bm(
    left: &GrayImage,
    right: &GrayImage,
    d_max: u32,
    block: u32,
    sign: SignConvention,
    sigma_eps: f64,
) -> Result<BaselineOutput, MatchError> {
    if left.dims() != right.dims() {
        return Err(MatchError::DimensionMismatch {
            expected: left.dims(),
            got: right.dims(),
        });
    }
    if d_max == 0 {
        return Err(ConfigError::ZeroDisparity.into());
    }
    validate_block(block)?;
    let (w, h) = left.dims();
    let half = (block / 2) as usize;
    let d_max = d_max as usize;

    let rows: Vec<(Vec<f32>, Vec<f64>, u64)> = (0..h)
        .into_par_iter()
        .map(|i| {
            let mut lp = Vec::new();
            let mut rp = Vec::new();
            let mut ds = Vec::with_capacity(w);
            let mut cs = Vec::with_capacity(w);
            let mut evals = 0u64;
            for j in 0..w {
                gather(left, i, j, half, &mut lp);
                let sl = center(&mut lp);
                let mut best_z = 0usize;
                let mut best = f64::NEG_INFINITY;
                for z in 0..=d_max {
                    evals += 1;
                    let rc = match sign {
                        SignConvention::MiddleburyMinus => j.checked_sub(z),
                        SignConvention::PaperPlus => Some(j + z).filter(|c| *c < w),
                    };
                    let score = match rc {
                        None => -1.0,
                        Some(rc) => {
                            gather(right, i, rc, half, &mut rp);
                            let sr = center(&mut rp);
                            if sl < sigma_eps || sr < sigma_eps {
                                -1.0
                            } else {
                                let dot: f64 = lp.iter().zip(&rp).map(|(a, b)| a * b).sum();
                                (dot / (lp.len() as f64 * sl * sr)).clamp(-1.0, 1.0)
                            }
                        }
                    };
                    if score > best {
                        best = score;
                        best_z = z;
                    }
                }
                ds.push(best_z as f32);
                cs.push(best);
            }
            (ds, cs, evals)
        })
        .collect();

    let mut d = Vec::with_capacity(w * h);
    let mut c = Vec::with_capacity(w * h);
    let mut evaluations = 0;
    for (rd, rc, e) in rows {
        d.extend(rd);
        c.extend(rc);
        evaluations += e;
    }
    Ok(BaselineOutput {
        disparity: DisparityMap::new(w, h, d)?,
        cost: CostMap::new(w, h, c)?,
        evaluations,
    })
}
