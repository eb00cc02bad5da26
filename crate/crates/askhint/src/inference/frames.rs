//! Frame sampling: the 1-fps exhaustion rule for short videos, uniform
//! subsampling with endpoint inclusion otherwise, plus optional fixed-length
//! windowing.

use crate::manifest::VideoRecord;

/// Indices sampled from `n_frames` stored frames.
///
/// If the video, sampled at 1 fps, yields at most `max_frames` frames, all
/// of those are returned. Otherwise `max_frames` indices uniformly spaced
/// over `[0, n-1]` are returned, strictly increasing, first 0, last `n-1`.
/// The native frame rate comes from `fps_native`, falling back to
/// `n / duration_s`, falling back to treating the stored frames as 1 fps.
pub fn sample_frame_indices(
    n_frames: usize,
    fps_native: Option<f64>,
    duration_s: Option<f64>,
    max_frames: usize,
) -> Vec<usize> {
    assert!(max_frames >= 1, "max_frames must be at least 1");
    if n_frames == 0 {
        return Vec::new();
    }
    let fps = effective_fps(n_frames, fps_native, duration_s);
    let one_fps = one_fps_indices(n_frames, fps);
    if one_fps.len() <= max_frames {
        return one_fps;
    }
    uniform_indices(n_frames, max_frames)
}

fn effective_fps(n_frames: usize, fps_native: Option<f64>, duration_s: Option<f64>) -> f64 {
    match (fps_native, duration_s) {
        (Some(fps), _) if fps > 0.0 => fps,
        (_, Some(d)) if d > 0.0 => n_frames as f64 / d,
        _ => 1.0,
    }
}

/// Every stored frame closest to each whole second: round(k * fps) while in
/// range, deduplicated for fps < 1.
fn one_fps_indices(n_frames: usize, fps: f64) -> Vec<usize> {
    if fps <= 1.0 {
        return (0..n_frames).collect();
    }
    let mut out = Vec::new();
    let mut k = 0usize;
    loop {
        let idx = (k as f64 * fps).round() as usize;
        if idx >= n_frames {
            break;
        }
        if out.last() != Some(&idx) {
            out.push(idx);
        }
        k += 1;
    }
    if out.is_empty() {
        out.push(0);
    }
    out
}

/// `count` strictly increasing indices over `[0, n-1]` including both
/// endpoints (guaranteed distinct because count <= n).
fn uniform_indices(n_frames: usize, count: usize) -> Vec<usize> {
    debug_assert!(count <= n_frames);
    if count == 1 {
        return vec![0];
    }
    let last = (n_frames - 1) as f64;
    let step = last / (count - 1) as f64;
    (0..count).map(|i| (i as f64 * step).round() as usize).collect()
}

/// Frame paths for one record under the default whole-video policy.
pub fn sample_frames(record: &VideoRecord, max_frames: usize) -> Vec<String> {
    sample_frame_indices(
        record.frames.len(),
        record.fps_native,
        record.duration_s,
        max_frames,
    )
    .into_iter()
    .map(|i| record.frames[i].clone())
    .collect()
}

/// Fixed-length windowing: frame index ranges covering `window_s` seconds
/// every `stride_s` seconds. Scores are max-pooled over windows upstream.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WindowCfg {
    pub window_s: f64,
    pub stride_s: f64,
}

/// Splits a record into windows of stored-frame index ranges. Each window
/// is non-empty; the last window starts before the video ends.
pub fn window_frame_ranges(record: &VideoRecord, cfg: &WindowCfg) -> Vec<std::ops::Range<usize>> {
    assert!(cfg.window_s > 0.0 && cfg.stride_s > 0.0);
    let n = record.frames.len();
    let fps = effective_fps(n, record.fps_native, record.duration_s);
    let total_s = n as f64 / fps;
    let mut out = Vec::new();
    let mut start_s = 0.0f64;
    while start_s < total_s {
        let start = (start_s * fps).round() as usize;
        let end = (((start_s + cfg.window_s) * fps).round() as usize).min(n);
        if start >= n {
            break;
        }
        if end > start {
            out.push(start..end);
        }
        start_s += cfg.stride_s;
    }
    if out.is_empty() {
        out.push(0..n);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn long_video_subsamples_with_endpoints() {
        // 300 s at 30 fps: 9000 stored frames, 300 at 1 fps, budget 128.
        let indices = sample_frame_indices(9000, Some(30.0), Some(300.0), 128);
        assert_eq!(indices.len(), 128);
        assert_eq!(indices[0], 0);
        assert_eq!(*indices.last().unwrap(), 8999);
        assert!(indices.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn short_video_returns_all_one_fps_frames() {
        let indices = sample_frame_indices(50, Some(1.0), None, 128);
        assert_eq!(indices, (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn one_fps_rule_thins_dense_frames() {
        // 10 s at 10 fps: 100 stored frames but only 10 at 1 fps.
        let indices = sample_frame_indices(100, Some(10.0), None, 128);
        assert_eq!(indices, vec![0, 10, 20, 30, 40, 50, 60, 70, 80, 90]);
    }

    #[test]
    fn single_frame_video() {
        assert_eq!(sample_frame_indices(1, None, None, 128), vec![0]);
        assert_eq!(sample_frame_indices(1, Some(30.0), Some(10.0), 1), vec![0]);
    }

    #[test]
    fn fps_derived_from_duration_when_missing() {
        // 9000 frames over 300 s implies 30 fps.
        let a = sample_frame_indices(9000, None, Some(300.0), 128);
        let b = sample_frame_indices(9000, Some(30.0), None, 128);
        assert_eq!(a, b);
    }

    #[test]
    fn windows_cover_video() {
        let record = VideoRecord {
            video_id: "v".into(),
            label: crate::manifest::Label::Normal,
            class_name: "Normal".into(),
            frames: (0..100).map(|i| format!("f{i}.jpg")).collect(),
            duration_s: Some(10.0),
            fps_native: Some(10.0),
        };
        let ranges = window_frame_ranges(&record, &WindowCfg { window_s: 4.0, stride_s: 2.0 });
        assert_eq!(ranges[0], 0..40);
        assert_eq!(ranges[1], 20..60);
        assert!(ranges.iter().all(|r| !r.is_empty()));
        assert_eq!(ranges.last().unwrap().end.min(100), 100);
    }

    proptest! {
        #[test]
        fn sampling_properties(
            n in 1usize..4000,
            max in 1usize..300,
            fps in proptest::option::of(1u32..60),
            dur in proptest::option::of(1u32..400),
        ) {
            let fps_native = fps.map(f64::from);
            let duration = dur.map(f64::from);
            let indices = sample_frame_indices(n, fps_native, duration, max);

            // Strictly increasing and within range.
            prop_assert!(indices.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(*indices.last().unwrap() < n);

            // Length is min(effective budget, available frames).
            let fps_eff = effective_fps(n, fps_native, duration);
            let n1 = one_fps_indices(n, fps_eff).len();
            if n1 <= max {
                prop_assert_eq!(indices.len(), n1);
            } else {
                prop_assert_eq!(indices.len(), max);
                // Endpoint inclusion when subsampling.
                prop_assert_eq!(indices[0], 0);
                if max >= 2 {
                    prop_assert_eq!(*indices.last().unwrap(), n - 1);
                }
            }
        }
    }
}
