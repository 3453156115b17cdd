use std::collections::HashSet;
use std::path::{Path, PathBuf};

use super::io::save_rgb;
use super::raster::RgbPatch;
use crate::error::{Error, Result};
use crate::label::Label;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TileEntry {
    pub id: String,
    pub path: PathBuf,
    pub x: u32,
    pub y: u32,
    pub label: Option<Label>,
}

/// Tiles of a larger image, in raster order. Ids are unique.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TileManifest {
    entries: Vec<TileEntry>,
}

impl TileManifest {
    pub fn new(entries: Vec<TileEntry>) -> Result<Self> {
        let mut seen = HashSet::new();
        for e in &entries {
            if !seen.insert(e.id.as_str()) {
                return Err(Error::Data(format!("duplicate tile id {:?}", e.id)));
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[TileEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&TileEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, TileEntry> {
        self.entries.iter()
    }

    /// Entries carrying the given ground-truth label.
    pub fn with_label(&self, label: Label) -> impl Iterator<Item = &TileEntry> {
        self.entries.iter().filter(move |e| e.label == Some(label))
    }

    /// Reads `tile_id,path,x,y[,label]`. Relative paths resolve against the
    /// manifest's directory.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let mut reader = csv::ReaderBuilder::new()
            .flexible(true)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::csv(path, e))?;
        let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
        let expected = ["tile_id", "path", "x", "y"];
        let header_ok = headers.len() >= 4
            && headers.len() <= 5
            && headers.iter().zip(expected).all(|(h, e)| h == e)
            && (headers.len() == 4 || &headers[4] == "label");
        if !header_ok {
            return Err(Error::parse(
                path,
                1,
                format!(
                    "expected header `tile_id,path,x,y[,label]`, got `{}`",
                    headers.iter().collect::<Vec<_>>().join(",")
                ),
            ));
        }

        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for record in reader.records() {
            let record = record.map_err(|e| Error::csv(path, e))?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() < 4 || record.len() > 5 {
                return Err(Error::parse(
                    path,
                    line,
                    format!("expected 4 or 5 fields, got {}", record.len()),
                ));
            }
            let id = record[0].to_string();
            if id.is_empty() {
                return Err(Error::parse(path, line, "empty tile_id"));
            }
            if !seen.insert(id.clone()) {
                return Err(Error::parse(
                    path,
                    line,
                    format!("duplicate tile_id {id:?}"),
                ));
            }
            let offset = |field: &str, name: &str| {
                field.parse::<u32>().map_err(|_| {
                    Error::parse(
                        path,
                        line,
                        format!("{name} must be a non-negative integer, got {field:?}"),
                    )
                })
            };
            let x = offset(&record[2], "x")?;
            let y = offset(&record[3], "y")?;
            let label = match record.get(4) {
                None | Some("") => None,
                Some(s) => Some(
                    s.parse::<Label>()
                        .map_err(|e| Error::parse(path, line, e.to_string()))?,
                ),
            };
            let tile_path = PathBuf::from(&record[1]);
            let tile_path = if tile_path.is_absolute() {
                tile_path
            } else {
                base.join(tile_path)
            };
            entries.push(TileEntry {
                id,
                path: tile_path,
                x,
                y,
                label,
            });
        }
        Ok(Self { entries })
    }

    /// Writes the manifest; paths under the manifest's directory are stored relative.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let with_labels = self.entries.iter().any(|e| e.label.is_some());
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        let mut header = vec!["tile_id", "path", "x", "y"];
        if with_labels {
            header.push("label");
        }
        w.write_record(&header).map_err(|e| Error::csv(path, e))?;
        for e in &self.entries {
            let rel = e.path.strip_prefix(&base).unwrap_or(&e.path);
            let mut row = vec![
                e.id.clone(),
                rel.to_string_lossy().into_owned(),
                e.x.to_string(),
                e.y.to_string(),
            ];
            if with_labels {
                row.push(e.label.map(|l| l.to_string()).unwrap_or_default());
            }
            w.write_record(&row).map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

impl<'a> IntoIterator for &'a TileManifest {
    type Item = &'a TileEntry;
    type IntoIter = std::slice::Iter<'a, TileEntry>;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.iter()
    }
}

/// Top-left offsets of all full tiles in raster order; partial edge tiles are dropped.
pub fn tile_offsets(
    width: usize,
    height: usize,
    tile_size: usize,
    stride: usize,
) -> Result<Vec<(u32, u32)>> {
    if tile_size == 0 || stride == 0 {
        return Err(Error::Config(format!(
            "tile size and stride must be at least 1 (got {tile_size}, {stride})"
        )));
    }
    if width < tile_size || height < tile_size {
        return Ok(Vec::new());
    }
    let nx = (width - tile_size) / stride + 1;
    let ny = (height - tile_size) / stride + 1;
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            out.push(((i * stride) as u32, (j * stride) as u32));
        }
    }
    Ok(out)
}

/// Cuts `image` into PNG tiles under `out_dir`, named `{prefix}_{x}_{y}.png`.
pub fn tile_image(
    image: &RgbPatch,
    tile_size: usize,
    stride: usize,
    out_dir: impl AsRef<Path>,
    prefix: &str,
) -> Result<TileManifest> {
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut entries = Vec::new();
    for (x, y) in tile_offsets(image.width(), image.height(), tile_size, stride)? {
        let id = format!("{prefix}_{x}_{y}");
        let path = out_dir.join(format!("{id}.png"));
        let tile = image.crop(x as usize, y as usize, tile_size, tile_size)?;
        save_rgb(&tile, &path)?;
        entries.push(TileEntry {
            id,
            path,
            x,
            y,
            label: None,
        });
    }
    TileManifest::new(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tile_counts() {
        assert_eq!(tile_offsets(512, 512, 256, 256).unwrap().len(), 4);
        assert_eq!(tile_offsets(300, 300, 256, 256).unwrap().len(), 1);
        assert_eq!(tile_offsets(512, 512, 256, 128).unwrap().len(), 9);
        assert!(tile_offsets(100, 512, 256, 256).unwrap().is_empty());
        assert!(tile_offsets(512, 512, 0, 1).is_err());
        assert!(tile_offsets(512, 512, 1, 0).is_err());
    }

    #[test]
    fn offsets_are_stride_multiples_inside_image() {
        for (w, h, t, s) in [(700, 333, 64, 50), (128, 128, 128, 7), (90, 200, 13, 13)] {
            let offs = tile_offsets(w, h, t, s).unwrap();
            let nx = (w - t) / s + 1;
            let ny = (h - t) / s + 1;
            assert_eq!(offs.len(), nx * ny);
            for (x, y) in offs {
                assert_eq!(x as usize % s, 0);
                assert_eq!(y as usize % s, 0);
                assert!(x as usize + t <= w && y as usize + t <= h);
            }
        }
    }

    #[test]
    fn manifest_rejects_duplicates() {
        let e = TileEntry {
            id: "a".into(),
            path: "a.png".into(),
            x: 0,
            y: 0,
            label: None,
        };
        assert!(TileManifest::new(vec![e.clone(), e]).is_err());
    }

    #[test]
    fn csv_round_trip_and_diagnostics() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let m = TileManifest::new(vec![
            TileEntry {
                id: "t0".into(),
                path: dir.path().join("tiles/t0.png"),
                x: 0,
                y: 256,
                label: Some(Label::Tumor),
            },
            TileEntry {
                id: "t1".into(),
                path: dir.path().join("tiles/t1.png"),
                x: 256,
                y: 256,
                label: None,
            },
        ])
        .unwrap();
        m.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("tile_id,path,x,y,label\n"));
        assert!(text.contains("t0,tiles/t0.png,0,256,tumor"));
        assert_eq!(TileManifest::read_csv(&path).unwrap(), m);

        std::fs::write(&path, "tile_id,path,x,y\na,a.png,0,0\nb,b.png,-3,0\n").unwrap();
        let err = TileManifest::read_csv(&path).unwrap_err().to_string();
        assert!(err.contains(":3:"), "{err}");

        std::fs::write(
            &path,
            "tile_id,path,x,y,label\na,a.png,0,0,tumor\na,b.png,0,0,normal\n",
        )
        .unwrap();
        let err = TileManifest::read_csv(&path).unwrap_err().to_string();
        assert!(err.contains(":3:") && err.contains("duplicate"), "{err}");

        std::fs::write(&path, "id,file,x,y\n").unwrap();
        let err = TileManifest::read_csv(&path).unwrap_err().to_string();
        assert!(err.contains(":1:"), "{err}");
    }
}
