//! One-pass Betti curves: pixels are inserted in intensity order into a
//! union-find, and the component count is read off at each threshold.

use super::components::Connectivity;
use super::union_find::DisjointSets;
use super::{Beta1Mode, BettiCurves, Filtration};
use crate::imaging::GrayImage;

/// Pixels of an image bucketed by intensity (counting sort).
#[derive(Debug, Clone)]
pub struct PixelOrder {
    width: usize,
    height: usize,
    /// `order[start[v]..start[v + 1]]` holds the pixels of intensity `v`.
    start: [u32; 257],
    order: Vec<u32>,
}

impl PixelOrder {
    pub fn new(img: &GrayImage) -> Self {
        let mut counts = [0u32; 256];
        for &v in img.as_raw() {
            counts[v as usize] += 1;
        }
        let mut start = [0u32; 257];
        for v in 0..256 {
            start[v + 1] = start[v] + counts[v];
        }
        let mut next = start;
        let mut order = vec![0u32; img.len()];
        for (i, &v) in img.as_raw().iter().enumerate() {
            order[next[v as usize] as usize] = i as u32;
            next[v as usize] += 1;
        }
        Self {
            width: img.width(),
            height: img.height(),
            start,
            order,
        }
    }

    /// Pixels with intensity in `lo..hi` (`hi ≤ 256`).
    fn range(&self, lo: u16, hi: u16) -> &[u32] {
        let (lo, hi) = (lo.min(256) as usize, hi.min(256) as usize);
        if lo >= hi {
            return &[];
        }
        &self.order[self.start[lo] as usize..self.start[hi] as usize]
    }
}

struct Sweep {
    width: usize,
    height: usize,
    conn: Connectivity,
    sets: DisjointSets,
    active: Vec<bool>,
    on_border: Vec<bool>,
    components: usize,
    border_components: usize,
}

impl Sweep {
    fn new(order: &PixelOrder, conn: Connectivity) -> Self {
        let n = order.width * order.height;
        Self {
            width: order.width,
            height: order.height,
            conn,
            sets: DisjointSets::new(n),
            active: vec![false; n],
            on_border: vec![false; n],
            components: 0,
            border_components: 0,
        }
    }

    #[inline]
    fn insert(&mut self, p: u32) {
        let (w, h) = (self.width, self.height);
        let i = p as usize;
        let (x, y) = (i % w, i / w);
        self.active[i] = true;
        self.components += 1;
        if x == 0 || y == 0 || x + 1 == w || y + 1 == h {
            self.on_border[i] = true;
            self.border_components += 1;
        }
        for &(dx, dy) in self.conn.offsets() {
            let (nx, ny) = (x as isize + dx, y as isize + dy);
            if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                continue;
            }
            let j = ny as usize * w + nx as usize;
            if !self.active[j] {
                continue;
            }
            if let Some((keep, gone)) = self.sets.union(p, j as u32) {
                self.components -= 1;
                let (kb, gb) = (self.on_border[keep as usize], self.on_border[gone as usize]);
                if kb && gb {
                    self.border_components -= 1;
                } else if gb {
                    self.on_border[keep as usize] = true;
                }
            }
        }
    }
}

/// β0 (8-connected sublevel components) and β1 (4-connected components of the
/// complement, bounded ones only unless `mode` is literal) at every threshold.
pub fn betti_curves(order: &PixelOrder, filtration: &Filtration, mode: Beta1Mode) -> BettiCurves {
    let ts = filtration.thresholds();
    let mut beta0 = Vec::with_capacity(ts.len());
    let mut beta1 = vec![0u32; ts.len()];

    let mut fg = Sweep::new(order, Connectivity::Eight);
    let mut lo = 0u16;
    for &t in ts {
        for &p in order.range(lo, t) {
            fg.insert(p);
        }
        lo = t;
        beta0.push(fg.components as u32);
    }

    // The complement of {I < t} is {I ≥ t}: sweep thresholds downwards.
    let mut bg = Sweep::new(order, Connectivity::Four);
    let mut hi = 256u16;
    for (k, &t) in ts.iter().enumerate().rev() {
        for &p in order.range(t, hi) {
            bg.insert(p);
        }
        hi = t;
        beta1[k] = match mode {
            Beta1Mode::BoundedVoids => (bg.components - bg.border_components) as u32,
            Beta1Mode::LiteralComplement => bg.components as u32,
        };
    }

    BettiCurves { beta0, beta1 }
}
