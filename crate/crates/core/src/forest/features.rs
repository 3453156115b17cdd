use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::label::Label;

/// Feature vectors keyed by patch id: CSV `id,f0,…,f{p−1},label`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureTable {
    pub ids: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<Option<Label>>,
}

impl FeatureTable {
    pub fn dim(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn push(&mut self, id: String, row: Vec<f64>, label: Option<Label>) -> Result<()> {
        if !self.rows.is_empty() && row.len() != self.dim() {
            return Err(Error::Data(format!(
                "feature row {id:?} has {} values, expected {}",
                row.len(),
                self.dim()
            )));
        }
        self.ids.push(id);
        self.rows.push(row);
        self.labels.push(label);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&[f64]> {
        self.ids
            .iter()
            .position(|i| i == id)
            .map(|i| self.rows[i].as_slice())
    }

    pub fn index(&self) -> std::collections::HashMap<&str, usize> {
        self.ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect()
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut r = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::csv(path, e))?;
        let headers = r.headers().map_err(|e| Error::csv(path, e))?.clone();
        let p = headers.len().saturating_sub(2);
        let header_ok = headers.len() >= 3
            && &headers[0] == "id"
            && &headers[headers.len() - 1] == "label"
            && (0..p).all(|j| headers[j + 1] == format!("f{j}"));
        if !header_ok {
            return Err(Error::parse(
                path,
                1,
                "expected header `id,f0,…,f{p-1},label`",
            ));
        }
        let mut table = FeatureTable::default();
        let mut seen = HashSet::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| Error::csv(path, e))?;
            let line = rec.position().map_or(0, |p| p.line());
            let id = rec[0].to_string();
            if !seen.insert(id.clone()) {
                return Err(Error::parse(path, line, format!("duplicate id {id:?}")));
            }
            let row = (1..=p)
                .map(|j| {
                    rec[j]
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| {
                            Error::parse(
                                path,
                                line,
                                format!("f{} is not a finite number: {:?}", j - 1, &rec[j]),
                            )
                        })
                })
                .collect::<Result<Vec<_>>>()?;
            let label = match &rec[p + 1] {
                "" => None,
                s => Some(
                    s.parse::<Label>()
                        .map_err(|e| Error::parse(path, line, e.to_string()))?,
                ),
            };
            table.push(id, row, label)?;
        }
        Ok(table)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        let mut header = vec!["id".to_string()];
        header.extend((0..self.dim()).map(|j| format!("f{j}")));
        header.push("label".into());
        w.write_record(&header).map_err(|e| Error::csv(path, e))?;
        for ((id, row), label) in self.ids.iter().zip(&self.rows).zip(&self.labels) {
            let mut rec = vec![id.clone()];
            rec.extend(row.iter().map(|v| v.to_string()));
            rec.push(label.map(|l| l.to_string()).unwrap_or_default());
            w.write_record(&rec).map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        let mut t = FeatureTable::default();
        t.push("a".into(), vec![0.1, 2.0], Some(Label::Tumor))
            .unwrap();
        t.push("b".into(), vec![1.0 / 3.0, -4.5], None).unwrap();
        assert!(t.push("c".into(), vec![1.0], None).is_err());
        t.write_csv(&p).unwrap();
        assert!(std::fs::read_to_string(&p)
            .unwrap()
            .starts_with("id,f0,f1,label\n"));
        assert_eq!(FeatureTable::read_csv(&p).unwrap(), t);
        assert_eq!(t.get("b").unwrap()[1], -4.5);

        std::fs::write(&p, "id,f0,label\na,1,tumor\nb,x,normal\n").unwrap();
        let err = FeatureTable::read_csv(&p).unwrap_err().to_string();
        assert!(err.contains(":3:"), "{err}");
        std::fs::write(&p, "id,g0,label\n").unwrap();
        assert!(FeatureTable::read_csv(&p).is_err());
    }
}
