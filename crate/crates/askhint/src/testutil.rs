//! Helpers backing the unit, integration and acceptance test suites.

use std::path::Path;

use crate::manifest::{Label, Manifest, VideoRecord};

/// Writes a balanced synthetic manifest under `dir`: tiny placeholder frame
/// files on disk, abnormal classes cycled from a small UCF-style list.
pub fn synthetic_manifest(dir: &Path, n_normal: usize, n_abnormal: usize) -> Manifest {
    synthetic_manifest_with_classes(
        dir,
        n_normal,
        n_abnormal,
        &["Arson", "Fighting", "Robbery", "Explosion"],
    )
}

/// As [`synthetic_manifest`] with an explicit abnormal class cycle.
pub fn synthetic_manifest_with_classes(
    dir: &Path,
    n_normal: usize,
    n_abnormal: usize,
    classes: &[&str],
) -> Manifest {
    assert!(!classes.is_empty());
    let mut records = Vec::new();
    for i in 0..(n_normal + n_abnormal) {
        let abnormal = i >= n_normal;
        let video_id = format!("v{i:04}");
        let frame_dir = dir.join(&video_id);
        std::fs::create_dir_all(&frame_dir).expect("create frame dir");
        let mut frames = Vec::new();
        for f in 0..3 {
            let path = frame_dir.join(format!("{f:03}.jpg"));
            std::fs::write(&path, format!("frame {video_id} {f}")).expect("write frame");
            frames.push(path.to_string_lossy().into_owned());
        }
        records.push(VideoRecord {
            video_id,
            label: if abnormal { Label::Abnormal } else { Label::Normal },
            class_name: if abnormal {
                classes[i % classes.len()].to_string()
            } else {
                "Normal".to_string()
            },
            frames,
            duration_s: Some(3.0),
            fps_native: Some(1.0),
        });
    }
    Manifest { records }
}
