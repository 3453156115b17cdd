use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma, Rgb};

use super::raster::{GrayImage, RgbPatch};
use super::stain::{hematoxylin_channel, StainMatrix};
use crate::error::{Error, Result};

/// A decoded tile. Grayscale files are taken as an already-prepared filtration
/// substrate; colour files go through stain deconvolution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tile {
    Gray(GrayImage),
    Rgb(RgbPatch),
}

impl Tile {
    pub fn width(&self) -> usize {
        match self {
            Tile::Gray(g) => g.width(),
            Tile::Rgb(p) => p.width(),
        }
    }

    pub fn height(&self) -> usize {
        match self {
            Tile::Gray(g) => g.height(),
            Tile::Rgb(p) => p.height(),
        }
    }

    /// Grayscale substrate for the filtration.
    pub fn substrate(&self, stain: &StainMatrix, c_max: f64) -> Result<GrayImage> {
        match self {
            Tile::Gray(g) => Ok(g.clone()),
            Tile::Rgb(p) => hematoxylin_channel(p, stain, c_max),
        }
    }

    /// RGB view; grayscale tiles are replicated across channels.
    pub fn to_rgb(&self) -> RgbPatch {
        match self {
            Tile::Rgb(p) => p.clone(),
            Tile::Gray(g) => {
                let v = g.as_raw().to_vec();
                RgbPatch::new(g.width(), g.height(), v.clone(), v.clone(), v)
                    .expect("same dimensions")
            }
        }
    }
}

/// Reads a PNG/PGM/PPM tile (format by content).
pub fn load_tile(path: impl AsRef<Path>) -> Result<Tile> {
    let path = path.as_ref();
    let reader = image::ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    let img = reader.decode().map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img {
        DynamicImage::ImageLuma8(buf) => Ok(Tile::Gray(GrayImage::new(w, h, buf.into_raw())?)),
        DynamicImage::ImageLuma16(_)
        | DynamicImage::ImageLumaA8(_)
        | DynamicImage::ImageLumaA16(_) => {
            Ok(Tile::Gray(GrayImage::new(w, h, img.to_luma8().into_raw())?))
        }
        other => Ok(Tile::Rgb(RgbPatch::from_interleaved(
            w,
            h,
            other.to_rgb8().as_raw(),
        )?)),
    }
}

/// Writes an RGB patch; the format follows the extension (`.png`, `.ppm`).
pub fn save_rgb(patch: &RgbPatch, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let buf: ImageBuffer<Rgb<u8>, Vec<u8>> = ImageBuffer::from_raw(
        patch.width() as u32,
        patch.height() as u32,
        patch.to_interleaved(),
    )
    .expect("buffer matches dimensions");
    buf.save(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes a grayscale image; the format follows the extension (`.png`, `.pgm`).
pub fn save_gray(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let buf: ImageBuffer<Luma<u8>, Vec<u8>> = ImageBuffer::from_raw(
        img.width() as u32,
        img.height() as u32,
        img.as_raw().to_vec(),
    )
    .expect("buffer matches dimensions");
    buf.save(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })
}
