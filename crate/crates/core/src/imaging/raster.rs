use crate::error::{Error, Result};

/// 8-bit single-channel image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

/// The eight symmetries of the square.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dihedral {
    Identity,
    Rot90,
    Rot180,
    Rot270,
    FlipH,
    FlipV,
    Transpose,
    AntiTranspose,
}

impl Dihedral {
    pub const ALL: [Dihedral; 8] = [
        Dihedral::Identity,
        Dihedral::Rot90,
        Dihedral::Rot180,
        Dihedral::Rot270,
        Dihedral::FlipH,
        Dihedral::FlipV,
        Dihedral::Transpose,
        Dihedral::AntiTranspose,
    ];

    fn swaps_axes(self) -> bool {
        matches!(
            self,
            Dihedral::Rot90 | Dihedral::Rot270 | Dihedral::Transpose | Dihedral::AntiTranspose
        )
    }

    /// Source coordinate for output pixel `(x, y)` of an image with source size `(w, h)`.
    fn source(self, x: usize, y: usize, w: usize, h: usize) -> (usize, usize) {
        match self {
            Dihedral::Identity => (x, y),
            // clockwise: output is h wide, w tall
            Dihedral::Rot90 => (y, h - 1 - x),
            Dihedral::Rot180 => (w - 1 - x, h - 1 - y),
            Dihedral::Rot270 => (w - 1 - y, x),
            Dihedral::FlipH => (w - 1 - x, y),
            Dihedral::FlipV => (x, h - 1 - y),
            Dihedral::Transpose => (y, x),
            Dihedral::AntiTranspose => (w - 1 - y, h - 1 - x),
        }
    }
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Data(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::Data(format!(
                "expected {} intensities for {width}x{height}, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().map(|&v| f64::from(v)).sum::<f64>() / self.data.len() as f64
    }

    pub fn transform(&self, sym: Dihedral) -> GrayImage {
        let (w, h) = (self.width, self.height);
        let (ow, oh) = if sym.swaps_axes() { (h, w) } else { (w, h) };
        let mut data = Vec::with_capacity(w * h);
        for y in 0..oh {
            for x in 0..ow {
                let (sx, sy) = sym.source(x, y, w, h);
                data.push(self.data[sy * w + sx]);
            }
        }
        GrayImage {
            width: ow,
            height: oh,
            data,
        }
    }

    pub fn rotate90(&self) -> GrayImage {
        self.transform(Dihedral::Rot90)
    }

    pub fn flip_horizontal(&self) -> GrayImage {
        self.transform(Dihedral::FlipH)
    }
}

/// 8-bit RGB raster stored as three planes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbPatch {
    width: usize,
    height: usize,
    planes: [Vec<u8>; 3],
}

impl RgbPatch {
    pub fn new(width: usize, height: usize, r: Vec<u8>, g: Vec<u8>, b: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Data(format!(
                "patch dimensions must be positive, got {width}x{height}"
            )));
        }
        let n = width * height;
        if r.len() != n || g.len() != n || b.len() != n {
            return Err(Error::Data(format!(
                "RGB planes must each hold {n} values for {width}x{height}"
            )));
        }
        Ok(Self {
            width,
            height,
            planes: [r, g, b],
        })
    }

    /// Builds a patch from interleaved `RGBRGB...` bytes.
    pub fn from_interleaved(width: usize, height: usize, rgb: &[u8]) -> Result<Self> {
        if rgb.len() != width * height * 3 {
            return Err(Error::Data(format!(
                "expected {} interleaved bytes for {width}x{height}, got {}",
                width * height * 3,
                rgb.len()
            )));
        }
        let mut planes = [
            Vec::with_capacity(rgb.len() / 3),
            Vec::with_capacity(rgb.len() / 3),
            Vec::with_capacity(rgb.len() / 3),
        ];
        for px in rgb.chunks_exact(3) {
            planes[0].push(px[0]);
            planes[1].push(px[1]);
            planes[2].push(px[2]);
        }
        let [r, g, b] = planes;
        Self::new(width, height, r, g, b)
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self> {
        let n = width * height;
        Self::new(
            width,
            height,
            vec![rgb[0]; n],
            vec![rgb[1]; n],
            vec![rgb[2]; n],
        )
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = y * self.width + x;
        [self.planes[0][i], self.planes[1][i], self.planes[2][i]]
    }

    pub fn planes(&self) -> (&[u8], &[u8], &[u8]) {
        (&self.planes[0], &self.planes[1], &self.planes[2])
    }

    pub fn to_interleaved(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.len() * 3);
        for i in 0..self.len() {
            out.extend_from_slice(&[self.planes[0][i], self.planes[1][i], self.planes[2][i]]);
        }
        out
    }

    /// Per-channel mean intensity.
    pub fn mean_rgb(&self) -> [f64; 3] {
        let n = self.len() as f64;
        let mean = |p: &[u8]| p.iter().map(|&v| f64::from(v)).sum::<f64>() / n;
        [
            mean(&self.planes[0]),
            mean(&self.planes[1]),
            mean(&self.planes[2]),
        ]
    }

    /// Copies the `w`x`h` window at `(x, y)`; the window must lie inside the patch.
    pub fn crop(&self, x: usize, y: usize, w: usize, h: usize) -> Result<RgbPatch> {
        if x + w > self.width || y + h > self.height {
            return Err(Error::Contract(format!(
                "crop {w}x{h}+{x}+{y} exceeds {}x{}",
                self.width, self.height
            )));
        }
        let mut planes: [Vec<u8>; 3] = Default::default();
        for (dst, src) in planes.iter_mut().zip(self.planes.iter()) {
            dst.reserve(w * h);
            for row in y..y + h {
                let start = row * self.width + x;
                dst.extend_from_slice(&src[start..start + w]);
            }
        }
        let [r, g, b] = planes;
        RgbPatch::new(w, h, r, g, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> GrayImage {
        GrayImage::new(3, 2, vec![1, 2, 3, 4, 5, 6]).unwrap()
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(GrayImage::new(0, 3, vec![]).is_err());
        assert!(GrayImage::new(2, 2, vec![0; 3]).is_err());
        assert!(RgbPatch::new(1, 1, vec![0], vec![0], vec![]).is_err());
    }

    #[test]
    fn rotate_clockwise() {
        // 1 2 3      4 1
        // 4 5 6  ->  5 2
        //            6 3
        let r = sample().rotate90();
        assert_eq!((r.width(), r.height()), (2, 3));
        assert_eq!(r.as_raw(), &[4, 1, 5, 2, 6, 3]);
        let back = r.rotate90().rotate90().rotate90();
        assert_eq!(back, sample());
    }

    #[test]
    fn dihedral_group_is_closed_and_distinct() {
        let img = sample();
        let images: Vec<_> = Dihedral::ALL.iter().map(|&s| img.transform(s)).collect();
        for (i, a) in images.iter().enumerate() {
            for b in &images[i + 1..] {
                assert_ne!(a, b);
            }
        }
        assert_eq!(img.transform(Dihedral::Rot180), img.rotate90().rotate90());
        assert_eq!(
            img.transform(Dihedral::Transpose),
            img.rotate90().flip_horizontal()
        );
        assert_eq!(
            img.transform(Dihedral::AntiTranspose),
            img.transform(Dihedral::Rot270).flip_horizontal()
        );
    }

    #[test]
    fn crop_and_interleave() {
        let p = RgbPatch::from_interleaved(2, 2, &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12]).unwrap();
        assert_eq!(p.pixel(1, 1), [10, 11, 12]);
        let c = p.crop(1, 0, 1, 2).unwrap();
        assert_eq!(c.to_interleaved(), vec![4, 5, 6, 10, 11, 12]);
        assert!(p.crop(1, 1, 2, 1).is_err());
    }
}
