//! Line-delimited JSON label manifest.
//!
//! One object per line with exactly the fields `path`, `subject`, `class`,
//! `impression` and `material`. Paths are relative to the manifest's
//! directory.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{FingerClass, Material};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub path: String,
    pub subject: u64,
    pub class: FingerClass,
    pub impression: u32,
    pub material: Material,
}

impl Record {
    pub fn key(&self) -> (u64, FingerClass, u32, Material) {
        (self.subject, self.class, self.impression, self.material)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    path: String,
    subject: u64,
    class: u8,
    impression: u32,
    material: Material,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DatasetManifest {
    pub records: Vec<Record>,
}

impl DatasetManifest {
    pub fn new(records: Vec<Record>) -> Self {
        DatasetManifest { records }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Checks record-level invariants and key uniqueness.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::with_capacity(self.records.len());
        for (i, r) in self.records.iter().enumerate() {
            if r.impression < 1 {
                return Err(Error::Validation(format!("record {i}: impression must be >= 1")));
            }
            if !seen.insert(r.key()) {
                return Err(Error::Validation(format!(
                    "record {i}: duplicate (subject {}, class {}, impression {}, material {})",
                    r.subject, r.class, r.impression, r.material
                )));
            }
        }
        Ok(())
    }

    /// Checks that every referenced image exists under `base`.
    pub fn validate_paths(&self, base: &Path) -> Result<()> {
        for (i, r) in self.records.iter().enumerate() {
            let p = base.join(&r.path);
            if !p.is_file() {
                return Err(Error::Validation(format!(
                    "record {i}: missing file {}",
                    p.display()
                )));
            }
        }
        Ok(())
    }

    pub fn filter_material(&self, material: Material) -> DatasetManifest {
        DatasetManifest::new(
            self.records
                .iter()
                .filter(|r| r.material == material)
                .cloned()
                .collect(),
        )
    }

    pub fn to_writer<W: Write>(&self, mut w: W) -> Result<()> {
        self.validate()?;
        for r in &self.records {
            let raw = RawRecord {
                path: r.path.clone(),
                subject: r.subject,
                class: r.class.index(),
                impression: r.impression,
                material: r.material,
            };
            let line = serde_json::to_string(&raw).expect("record serializes");
            writeln!(w, "{line}").map_err(|e| Error::io("<manifest>", e))?;
        }
        Ok(())
    }

    pub fn from_reader<R: BufRead>(r: R) -> Result<Self> {
        let mut records = Vec::new();
        for (index, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<manifest>", e))?;
            if line.trim().is_empty() {
                continue;
            }
            let raw: RawRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
                index,
                message: e.to_string(),
            })?;
            let class = FingerClass::new(raw.class)
                .map_err(|_| Error::Validation(format!("record {index}: class {} outside 1..=10", raw.class)))?;
            records.push(Record {
                path: raw.path,
                subject: raw.subject,
                class,
                impression: raw.impression,
                material: raw.material,
            });
        }
        let m = DatasetManifest { records };
        m.validate()?;
        Ok(m)
    }
}

pub fn write_manifest(manifest: &DatasetManifest, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    manifest.to_writer(&mut w)?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_manifest(path: &Path) -> Result<DatasetManifest> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    DatasetManifest::from_reader(BufReader::new(f))
}

/// Directory that manifest-relative image paths resolve against.
pub fn manifest_base(path: &Path) -> PathBuf {
    path.parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn db_shaped(subjects: u64, classes: u8, impressions: u32) -> DatasetManifest {
        let mut records = Vec::new();
        for s in 0..subjects {
            for c in 1..=classes {
                for i in 1..=impressions {
                    records.push(Record {
                        path: format!("Live/{c}/{s}_{i}.png"),
                        subject: s,
                        class: FingerClass::new(c).unwrap(),
                        impression: i,
                        material: Material::Live,
                    });
                }
            }
        }
        DatasetManifest::new(records)
    }

    fn round_trip(m: &DatasetManifest) -> DatasetManifest {
        let mut buf = Vec::new();
        m.to_writer(&mut buf).unwrap();
        DatasetManifest::from_reader(buf.as_slice()).unwrap()
    }

    #[test]
    fn empty_round_trips() {
        let m = DatasetManifest::default();
        let mut buf = Vec::new();
        m.to_writer(&mut buf).unwrap();
        assert!(buf.is_empty());
        assert_eq!(round_trip(&m), m);
    }

    #[test]
    fn db2_shape_round_trips() {
        let m = db_shaped(50, 10, 3);
        assert_eq!(m.len(), 1500);
        let back = round_trip(&m);
        assert_eq!(back.len(), 1500);
        assert_eq!(back, m);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/manifest.jsonl");
        let m = db_shaped(2, 3, 2);
        write_manifest(&m, &path).unwrap();
        assert_eq!(read_manifest(&path).unwrap(), m);
        assert_eq!(manifest_base(&path), dir.path().join("sub"));
    }

    #[test]
    fn field_names_are_fixed() {
        let m = db_shaped(1, 1, 1);
        let mut buf = Vec::new();
        m.to_writer(&mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["class", "impression", "material", "path", "subject"]);
        assert_eq!(v["material"], "Live");
    }

    #[test]
    fn class_out_of_range_is_validation_error() {
        let line = r#"{"path":"a.png","subject":0,"class":11,"impression":1,"material":"Live"}"#;
        let err = DatasetManifest::from_reader(line.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Validation(ref m) if m.contains("record 0")), "{err}");
    }

    #[test]
    fn malformed_line_names_index() {
        let text = concat!(
            r#"{"path":"a.png","subject":0,"class":1,"impression":1,"material":"Live"}"#,
            "\n",
            r#"{"path":"b.png","subject":0,"class":1,"impression":2,"material":"Plastic"}"#,
            "\n"
        );
        match DatasetManifest::from_reader(text.as_bytes()).unwrap_err() {
            Error::Parse { index, .. } => assert_eq!(index, 1),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn duplicate_key_rejected() {
        let mut m = db_shaped(1, 1, 1);
        let mut dup = m.records[0].clone();
        dup.path = "other.png".into();
        m.records.push(dup);
        assert!(matches!(m.validate(), Err(Error::Validation(_))));
    }

    #[test]
    fn missing_paths_detected() {
        let dir = tempfile::tempdir().unwrap();
        let m = db_shaped(1, 1, 1);
        assert!(m.validate_paths(dir.path()).is_err());
    }
}
