use super::{php_with_mode, Beta1Mode, Filtration, PHProfile};
use crate::error::Result;
use crate::imaging::{GrayImage, RgbPatch, StainMatrix, Tile, DEFAULT_C_MAX};

/// Everything needed to turn a tile into its profile: stain basis, hematoxylin
/// saturation, thresholds and β1 convention.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileExtractor {
    pub stain: StainMatrix,
    pub c_max: f64,
    pub filtration: Filtration,
    pub beta1_mode: Beta1Mode,
}

impl Default for ProfileExtractor {
    fn default() -> Self {
        Self {
            stain: StainMatrix::default(),
            c_max: DEFAULT_C_MAX,
            filtration: Filtration::default(),
            beta1_mode: Beta1Mode::default(),
        }
    }
}

impl ProfileExtractor {
    pub fn with_filtration(filtration: Filtration) -> Self {
        Self {
            filtration,
            ..Self::default()
        }
    }

    pub fn substrate(&self, tile: &Tile) -> Result<GrayImage> {
        tile.substrate(&self.stain, self.c_max)
    }

    pub fn profile_gray(&self, img: &GrayImage) -> PHProfile {
        php_with_mode(img, &self.filtration, self.beta1_mode)
    }

    pub fn profile_rgb(&self, patch: &RgbPatch) -> Result<PHProfile> {
        let gray = crate::imaging::hematoxylin_channel(patch, &self.stain, self.c_max)?;
        Ok(self.profile_gray(&gray))
    }

    pub fn profile(&self, tile: &Tile) -> Result<PHProfile> {
        Ok(self.profile_gray(&self.substrate(tile)?))
    }
}
