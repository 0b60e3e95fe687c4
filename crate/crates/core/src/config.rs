use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Which way a left-image pixel moves in the right image.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConvention {
    /// Right patch centered at `(i, j - z)`; the usual rectified layout.
    #[default]
    MiddleburyMinus,
    /// Right patch centered at `(i, j + z)`.
    PaperPlus,
}

impl SignConvention {
    /// Column of the right-image patch center for left column `col` and
    /// candidate disparity `z`, or `None` when it leaves the image.
    #[inline]
    pub fn right_column(self, col: usize, z: usize, width: usize) -> Option<usize> {
        match self {
            SignConvention::MiddleburyMinus => col.checked_sub(z),
            SignConvention::PaperPlus => Some(col + z).filter(|c| *c < width),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Levels {
    #[default]
    Auto,
    Fixed(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchConfig {
    /// Maximum disparity at full resolution, in pixels.
    pub d_max: u32,
    pub levels: Levels,
    /// Block edge length at level 0; odd.
    pub base_block: u32,
    /// Cost threshold below which pixels are refined and median-filtered.
    pub alpha: f64,
    /// Upsampled-cost threshold above which the coarse disparity is trusted.
    pub beta: f64,
    /// Patches with standard deviation below this are degenerate.
    pub sigma_eps: f64,
    pub sign: SignConvention,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            d_max: 64,
            levels: Levels::Auto,
            base_block: 11,
            alpha: 0.9,
            beta: 0.9,
            sigma_eps: 1e-6,
            sign: SignConvention::MiddleburyMinus,
        }
    }
}

impl MatchConfig {
    pub fn with_d_max(mut self, d_max: u32) -> Self {
        self.d_max = d_max;
        self
    }

    pub fn with_levels(mut self, levels: Levels) -> Self {
        self.levels = levels;
        self
    }

    pub fn with_block(mut self, block: u32) -> Self {
        self.base_block = block;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.d_max == 0 {
            return Err(ConfigError::ZeroDisparity);
        }
        validate_block(self.base_block)?;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(ConfigError::BadAlpha(self.alpha));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(ConfigError::BadBeta(self.beta));
        }
        if !(self.sigma_eps > 0.0 && self.sigma_eps.is_finite()) {
            return Err(ConfigError::BadEpsilon(self.sigma_eps));
        }
        Ok(())
    }
}

pub fn validate_block(block: u32) -> Result<(), ConfigError> {
    if block < 3 || block.is_multiple_of(2) {
        return Err(ConfigError::BadBlock(block));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = MatchConfig::default();
        cfg.validate().unwrap();
        assert_eq!((cfg.alpha, cfg.beta, cfg.base_block), (0.9, 0.9, 11));
    }

    #[test]
    fn rejects_out_of_range() {
        let base = MatchConfig::default();
        assert_eq!(
            MatchConfig { alpha: 1.01, ..base }.validate(),
            Err(ConfigError::BadAlpha(1.01))
        );
        assert_eq!(
            MatchConfig { beta: 0.0, ..base }.validate(),
            Err(ConfigError::BadBeta(0.0))
        );
        assert_eq!(base.with_block(4).validate(), Err(ConfigError::BadBlock(4)));
        assert_eq!(base.with_block(1).validate(), Err(ConfigError::BadBlock(1)));
        assert_eq!(base.with_d_max(0).validate(), Err(ConfigError::ZeroDisparity));
        assert!(MatchConfig { alpha: f64::NAN, ..base }.validate().is_err());
    }

    #[test]
    fn right_column_rules() {
        let m = SignConvention::MiddleburyMinus;
        assert_eq!(m.right_column(5, 5, 10), Some(0));
        assert_eq!(m.right_column(5, 6, 10), None);
        let p = SignConvention::PaperPlus;
        assert_eq!(p.right_column(5, 4, 10), Some(9));
        assert_eq!(p.right_column(5, 5, 10), None);
    }
}
