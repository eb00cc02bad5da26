//! Bundled prompt sets and dataset constants.
//!
//! The data files live in the repository's `presets/` directory and are
//! embedded here so the binary resolves preset names without a checkout.

use std::sync::OnceLock;

use crate::compression::CompactPromptSet;
use crate::error::{Error, Result};
use crate::pool::PromptPool;

pub const UCF_CRIME_Q_TEXT: &str = include_str!("../../../presets/ucf_crime_q.txt");
pub const UCF_CRIME_QSTAR_TEXT: &str = include_str!("../../../presets/ucf_crime_qstar.txt");
pub const XD_VIOLENCE_QSTAR_TEXT: &str = include_str!("../../../presets/xd_violence_qstar.txt");

/// The 14 UCF-Crime classes (13 anomaly classes plus the normal category),
/// in the order used by the bundled pool.
pub const UCF_CRIME_CLASSES: [&str; 14] = [
    "Abuse",
    "Arrest",
    "Arson",
    "Assault",
    "Burglary",
    "Explosion",
    "Fighting",
    "Road Accident",
    "Robbery",
    "Shooting",
    "Shoplifting",
    "Stealing",
    "Vandalism",
    "Normal Event",
];

/// Seen-class subset used by the cross-class transfer preset.
pub const UCF_SEEN_CLASSES: [&str; 7] = [
    "Arson",
    "Road Accident",
    "Explosion",
    "Robbery",
    "Arrest",
    "Assault",
    "Stealing",
];

/// Bundled UCF-Crime class-wise pool (42 questions).
pub fn ucf_crime_pool() -> PromptPool {
    static POOL: OnceLock<PromptPool> = OnceLock::new();
    POOL.get_or_init(|| {
        crate::pool::load_pool(UCF_CRIME_Q_TEXT).expect("bundled pool preset must parse")
    })
    .clone()
}

/// Bundled UCF-Crime compact set (3 groups x 2 questions).
pub fn ucf_crime_qstar() -> CompactPromptSet {
    static SET: OnceLock<CompactPromptSet> = OnceLock::new();
    SET.get_or_init(|| {
        crate::compression::load_compact_set(UCF_CRIME_QSTAR_TEXT)
            .expect("bundled compact preset must parse")
    })
    .clone()
}

/// Bundled XD-Violence compact set (1 group x 5 questions).
pub fn xd_violence_qstar() -> CompactPromptSet {
    static SET: OnceLock<CompactPromptSet> = OnceLock::new();
    SET.get_or_init(|| {
        crate::compression::load_compact_set(XD_VIOLENCE_QSTAR_TEXT)
            .expect("bundled compact preset must parse")
    })
    .clone()
}

/// Resolves a preset name to its compact set. Known names:
/// `ucf_crime_qstar` (alias `ucf`), `xd_violence_qstar` (alias `xd`).
pub fn compact_set_by_name(name: &str) -> Result<CompactPromptSet> {
    match name.to_lowercase().replace('-', "_").as_str() {
        "ucf" | "ucf_crime" | "ucf_crime_qstar" => Ok(ucf_crime_qstar()),
        "xd" | "xd_violence" | "xd_violence_qstar" => Ok(xd_violence_qstar()),
        other => Err(Error::Config(format!("unknown compact-set preset {other:?}"))),
    }
}

/// Resolves a preset name to its pool. Known names: `ucf_crime_q` (alias `ucf`).
pub fn pool_by_name(name: &str) -> Result<PromptPool> {
    match name.to_lowercase().replace('-', "_").as_str() {
        "ucf" | "ucf_crime" | "ucf_crime_q" => Ok(ucf_crime_pool()),
        other => Err(Error::Config(format!("unknown pool preset {other:?}"))),
    }
}
