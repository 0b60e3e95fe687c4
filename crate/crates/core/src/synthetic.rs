//! Synthetic stereo pairs with known disparity, for tests and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::SignConvention;
use crate::raster::{DisparityMap, GrayImage};

fn noise_canvas(width: usize, height: usize, seed: u64, smoothing: u32) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buf: Vec<f64> = (0..width * height).map(|_| rng.gen()).collect();
    let mut tmp = vec![0.0; buf.len()];
    for _ in 0..smoothing {
        for i in 0..height {
            for j in 0..width {
                let l = buf[i * width + j.saturating_sub(1)];
                let r = buf[i * width + (j + 1).min(width - 1)];
                tmp[i * width + j] = 0.25 * l + 0.5 * buf[i * width + j] + 0.25 * r;
            }
        }
        for i in 0..height {
            for j in 0..width {
                let u = tmp[i.saturating_sub(1) * width + j];
                let d = tmp[(i + 1).min(height - 1) * width + j];
                buf[i * width + j] = 0.25 * u + 0.5 * tmp[i * width + j] + 0.25 * d;
            }
        }
    }
    let (lo, hi) = buf
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    buf.iter_mut().for_each(|v| *v = (*v - lo) / span);
    buf
}

/// Uniform noise smoothed by `smoothing` passes of a `(1, 2, 1) / 4`
/// binomial filter and stretched to `[0, 1]`.
pub fn textured_noise(width: usize, height: usize, seed: u64, smoothing: u32) -> GrayImage {
    GrayImage::new(width, height, noise_canvas(width, height, seed, smoothing))
        .expect("positive dimensions")
}

/// Pair with a constant disparity `shift`: `right(i, j) = left(i, j + shift)`,
/// both cut from one wider texture so no column is invented.
pub fn shifted_pair(
    width: usize,
    height: usize,
    shift: usize,
    seed: u64,
    smoothing: u32,
) -> (GrayImage, GrayImage) {
    shifted_pair_with(width, height, shift, seed, smoothing, SignConvention::MiddleburyMinus)
}

pub fn shifted_pair_with(
    width: usize,
    height: usize,
    shift: usize,
    seed: u64,
    smoothing: u32,
    sign: SignConvention,
) -> (GrayImage, GrayImage) {
    let wide = width + shift;
    let base = noise_canvas(wide, height, seed, smoothing);
    let at = |i: usize, j: usize| base[i * wide + j];
    let (l_off, r_off) = match sign {
        SignConvention::MiddleburyMinus => (0, shift),
        SignConvention::PaperPlus => (shift, 0),
    };
    let left = GrayImage::from_fn(width, height, |i, j| at(i, j + l_off)).expect("dims");
    let right = GrayImage::from_fn(width, height, |i, j| at(i, j + r_off)).expect("dims");
    (left, right)
}

/// Fronto-parallel rectangle at a fixed disparity, in left-image coordinates.
#[derive(Clone, Copy, Debug)]
pub struct Layer {
    pub top: usize,
    pub left: usize,
    pub bottom: usize,
    pub right: usize,
    pub disparity: usize,
}

pub struct Scene {
    pub left: GrayImage,
    pub right: GrayImage,
    /// Left-view ground truth.
    pub disparity: DisparityMap,
}

/// Background plane plus rectangles nearer the camera, each with its own
/// texture. Later layers occlude earlier ones. Rendered for the
/// `MiddleburyMinus` convention.
pub fn layered_scene(
    width: usize,
    height: usize,
    background: usize,
    layers: &[Layer],
    seed: u64,
    smoothing: u32,
) -> Scene {
    let max_d = layers
        .iter()
        .map(|l| l.disparity)
        .chain([background])
        .max()
        .unwrap_or(0);
    let wide = width + max_d + 1;
    let textures: Vec<Vec<f64>> = (0..=layers.len())
        .map(|k| noise_canvas(wide, height, seed.wrapping_add(k as u64 * 7919), smoothing))
        .collect();

    // surface visible at left column `j` of row `i`: (texture index, disparity)
    let surface_at_left = |i: usize, j: usize| {
        layers
            .iter()
            .enumerate()
            .rev()
            .find(|(_, l)| i >= l.top && i < l.bottom && j >= l.left && j < l.right)
            .map(|(k, l)| (k + 1, l.disparity))
            .unwrap_or((0, background))
    };

    let left = GrayImage::from_fn(width, height, |i, j| {
        let (t, _) = surface_at_left(i, j);
        textures[t][i * wide + j]
    })
    .expect("dims");

    let right = GrayImage::from_fn(width, height, |i, x| {
        // nearest surface whose projection covers x; the background covers all
        let hit = layers
            .iter()
            .enumerate()
            .filter(|(_, l)| {
                i >= l.top
                    && i < l.bottom
                    && x + l.disparity >= l.left
                    && x + l.disparity < l.right
            })
            .max_by_key(|(k, l)| (l.disparity, *k));
        let (t, d) = hit
            .map(|(k, l)| (k + 1, l.disparity))
            .unwrap_or((0, background));
        textures[t][i * wide + x + d]
    })
    .expect("dims");

    let truth: Vec<f32> = (0..height)
        .flat_map(|i| (0..width).map(move |j| (i, j)))
        .map(|(i, j)| surface_at_left(i, j).1 as f32)
        .collect();
    Scene {
        left,
        right,
        disparity: DisparityMap::new(width, height, truth).expect("dims"),
    }
}
