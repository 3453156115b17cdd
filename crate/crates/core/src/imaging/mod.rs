//! Raster types, H&E stain deconvolution and tiling.

mod io;
mod raster;
mod stain;
mod tiling;

pub use io::{load_tile, save_gray, save_rgb, Tile};
pub use raster::{Dihedral, GrayImage, RgbPatch};
pub use stain::{hematoxylin_channel, stain_deconvolve, StainMatrix, StainPlanes, DEFAULT_C_MAX};
pub use tiling::{tile_image, tile_offsets, TileEntry, TileManifest};
