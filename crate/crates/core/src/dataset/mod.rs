//! Gameplay-log records, the action catalog and per-game profiles.

mod catalog;
mod log;
mod profile;

pub use catalog::{
    default_catalog, ActionCatalog, ActionEntry, AnimOverride, Category, Device, PanDirection,
};
pub(crate) use log::check_id;
pub use log::{detect_discontinuities, parse_log, write_log, TimestepRecord};
pub use profile::{GameProfile, MouseMode, ProfileSet};

/// Default pause threshold: roughly eight missed frames at 16 Hz.
pub const DEFAULT_MAX_GAP_MS: u64 = 500;
