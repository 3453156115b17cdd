use super::union_find::DisjointSets;

/// Pixel adjacency.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

impl Connectivity {
    /// Neighbour offsets; the first half precede the pixel in raster order.
    pub(crate) fn offsets(self) -> &'static [(isize, isize)] {
        match self {
            Connectivity::Four => &[(-1, 0), (0, -1), (1, 0), (0, 1)],
            Connectivity::Eight => &[
                (-1, 0),
                (-1, -1),
                (0, -1),
                (1, -1),
                (1, 0),
                (1, 1),
                (0, 1),
                (-1, 1),
            ],
        }
    }

    fn backward(self) -> &'static [(isize, isize)] {
        let all = self.offsets();
        &all[..all.len() / 2]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ComponentCount {
    pub total: usize,
    pub touching_border: usize,
}

/// Counts connected components of the pixels with `member[i] == true`.
pub(crate) fn count_components(
    width: usize,
    height: usize,
    member: impl Fn(usize) -> bool,
    conn: Connectivity,
) -> ComponentCount {
    let mut sets = DisjointSets::new(width * height);
    for y in 0..height {
        for x in 0..width {
            let i = y * width + x;
            if !member(i) {
                continue;
            }
            for &(dx, dy) in conn.backward() {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if nx < 0 || ny < 0 || nx >= width as isize {
                    continue;
                }
                let j = ny as usize * width + nx as usize;
                if member(j) {
                    sets.union(i as u32, j as u32);
                }
            }
        }
    }

    let mut count = ComponentCount::default();
    let mut border_root = vec![false; width * height];
    for i in 0..width * height {
        if !member(i) {
            continue;
        }
        let root = sets.find(i as u32) as usize;
        if root == i {
            count.total += 1;
        }
        let (x, y) = (i % width, i / width);
        let on_border = x == 0 || y == 0 || x + 1 == width || y + 1 == height;
        if on_border && !border_root[root] {
            border_root[root] = true;
            count.touching_border += 1;
        }
    }
    count
}
