//! JSON-lines manifest of labeled videos with pre-extracted frames.

use std::collections::HashSet;
use std::io::BufRead;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Normal,
    Abnormal,
}

/// One labeled video: frame paths are relative to the manifest's root
/// directory until [`Manifest::resolve_frames`] runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoRecord {
    pub video_id: String,
    pub label: Label,
    pub class_name: String,
    pub frames: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fps_native: Option<f64>,
}

impl VideoRecord {
    fn validate(&self, line: usize) -> Result<()> {
        if self.frames.is_empty() {
            return Err(Error::Manifest {
                line,
                msg: format!("video {:?} has no frames", self.video_id),
            });
        }
        let is_normal_class = self.class_name.eq_ignore_ascii_case("normal");
        match (self.label, is_normal_class) {
            (Label::Normal, false) => Err(Error::Manifest {
                line,
                msg: format!(
                    "video {:?} is labeled normal but has class {:?}",
                    self.video_id, self.class_name
                ),
            }),
            (Label::Abnormal, true) => Err(Error::Manifest {
                line,
                msg: format!("video {:?} is labeled abnormal but has class Normal", self.video_id),
            }),
            _ => Ok(()),
        }
    }
}

/// Ordered list of records; order defines evaluation order everywhere.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Manifest {
    pub records: Vec<VideoRecord>,
}

impl Manifest {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Parses JSONL text; enforces unique ids, non-empty frame lists and
    /// label/class consistency.
    pub fn parse(text: &str) -> Result<Manifest> {
        let mut records = Vec::new();
        let mut ids = HashSet::new();
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let record: VideoRecord = serde_json::from_str(line).map_err(|e| Error::Manifest {
                line: lineno,
                msg: e.to_string(),
            })?;
            record.validate(lineno)?;
            if !ids.insert(record.video_id.clone()) {
                return Err(Error::Manifest {
                    line: lineno,
                    msg: format!("duplicate video_id {:?}", record.video_id),
                });
            }
            records.push(record);
        }
        if records.is_empty() {
            return Err(Error::Manifest {
                line: 0,
                msg: "manifest has no records".into(),
            });
        }
        Ok(Manifest { records })
    }

    pub fn load(path: &Path) -> Result<Manifest> {
        let file = std::fs::File::open(path)
            .map_err(|e| Error::io(format!("open manifest {}", path.display()), e))?;
        let mut text = String::new();
        let mut reader = std::io::BufReader::new(file);
        loop {
            let mut line = String::new();
            let n = reader
                .read_line(&mut line)
                .map_err(|e| Error::io("read manifest", e))?;
            if n == 0 {
                break;
            }
            text.push_str(&line);
        }
        Manifest::parse(&text)
    }

    /// Rewrites frame paths as absolute under `root` and checks every file
    /// exists. Runs before any backend call so a broken manifest never
    /// spends model budget.
    pub fn resolve_frames(&mut self, root: &Path) -> Result<()> {
        for record in &mut self.records {
            for frame in &mut record.frames {
                let path = if Path::new(&frame).is_absolute() {
                    PathBuf::from(&frame)
                } else {
                    root.join(&frame)
                };
                if !path.is_file() {
                    return Err(Error::Manifest {
                        line: 0,
                        msg: format!(
                            "frame {} for video {:?} does not exist",
                            path.display(),
                            record.video_id
                        ),
                    });
                }
                *frame = path.to_string_lossy().into_owned();
            }
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for record in &self.records {
            out.push_str(&serde_json::to_string(record).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn abnormal_classes(&self) -> Vec<String> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for r in &self.records {
            if r.label == Label::Abnormal && seen.insert(crate::pool::class_key(&r.class_name)) {
                out.push(r.class_name.clone());
            }
        }
        out
    }
}
