//! Row-major rasters shared by every stage: intensity images, disparity
//! maps and cost maps.

use crate::error::RasterError;

/// Marker stored in a [`DisparityMap`] for pixels without a disparity.
///
/// Matches the on-disk PFM convention for unknown disparities.
pub const INVALID_DISPARITY: f32 = f32::INFINITY;

/// Returns true when `d` holds a usable disparity.
#[inline]
pub fn is_valid_disparity(d: f32) -> bool {
    d.is_finite()
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<(), RasterError> {
    if width == 0 || height == 0 {
        return Err(RasterError::EmptyDimensions { width, height });
    }
    let needed = width
        .checked_mul(height)
        .ok_or(RasterError::EmptyDimensions { width, height })?;
    if needed != len {
        return Err(RasterError::LengthMismatch { needed, got: len });
    }
    Ok(())
}

/// Single-channel floating-point image with intensities nominally in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self, RasterError> {
        check_dims(width, height, data.len())?;
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(RasterError::NonFinite { index });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Builds an image by evaluating `f(row, col)` at every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self, RasterError> {
        let mut data = Vec::with_capacity(width.saturating_mul(height));
        for i in 0..height {
            for j in 0..width {
                data.push(f(i, j));
            }
        }
        Self::new(width, height, data)
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self, RasterError> {
        Self::new(width, height, vec![value; width.saturating_mul(height)])
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    /// Pixel access with replicate padding outside the image.
    #[inline]
    pub fn get_clamped(&self, row: isize, col: isize) -> f64 {
        let r = row.clamp(0, self.height as isize - 1) as usize;
        let c = col.clamp(0, self.width as isize - 1) as usize;
        self.data[r * self.width + c]
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.width..(row + 1) * self.width]
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }
}

/// Per-pixel integer disparities at one pyramid level, stored as `f32` so
/// the [`INVALID_DISPARITY`] marker and PFM round-trips need no conversion.
#[derive(Clone, Debug, PartialEq)]
pub struct DisparityMap {
    width: usize,
    height: usize,
    values: Vec<f32>,
}

impl DisparityMap {
    pub fn new(width: usize, height: usize, values: Vec<f32>) -> Result<Self, RasterError> {
        check_dims(width, height, values.len())?;
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn filled(width: usize, height: usize, value: f32) -> Result<Self, RasterError> {
        Self::new(width, height, vec![value; width.saturating_mul(height)])
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f32 {
        self.values[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f32) {
        self.values[row * self.width + col] = value;
    }

    #[inline]
    pub fn as_slice(&self) -> &[f32] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f32] {
        &mut self.values
    }

    pub fn invalid_count(&self) -> usize {
        self.values
            .iter()
            .filter(|d| !is_valid_disparity(**d))
            .count()
    }

    /// Largest valid disparity, if any pixel is valid.
    pub fn max_valid(&self) -> Option<f32> {
        self.values
            .iter()
            .copied()
            .filter(|d| is_valid_disparity(*d))
            .fold(None, |acc, d| Some(acc.map_or(d, |m: f32| m.max(d))))
    }
}

/// Matched ZNCC cost per pixel, in `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CostMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl CostMap {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self, RasterError> {
        check_dims(width, height, values.len())?;
        if let Some(index) = values
            .iter()
            .position(|v| !(v.is_finite() && (-1.0..=1.0).contains(v)))
        {
            return Err(RasterError::CostOutOfRange {
                index,
                value: values[index],
            });
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self, RasterError> {
        Self::new(width, height, vec![value; width.saturating_mul(height)])
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}
