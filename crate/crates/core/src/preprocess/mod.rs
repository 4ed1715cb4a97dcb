//! Raw timesteps to captioned, category-labelled windows.
//!
//! The pipeline, per contiguous segment:
//!
//! 1. pointer deltas, with auto-centre resets suppressed ([`mouse_deltas`])
//! 2. deltas thresholded into four pan flags ([`discretize_pan`])
//! 3. every label shifted and spanned by its animation delay/length ([`propagate_labels`])
//! 4. sliding windows ([`make_windows`]) collapsed to one bit per action ([`collapse_window`])
//! 5. bits to caption ([`semantic_action_mapper`]) and category flags ([`categorize`])

mod manifest;

pub use manifest::{read_manifest, write_manifest};

use crate::dataset::{
    detect_discontinuities, ActionCatalog, Category, Device, GameProfile, MouseMode, PanDirection,
    TimestepRecord, DEFAULT_MAX_GAP_MS,
};
use crate::error::{invalid, Error, Result};

/// Caption of a window with no active action.
pub const IDLE_CAPTION: &str = "Idle";

pub const DEFAULT_WINDOW: usize = 16;
pub const DEFAULT_STRIDE: usize = 8;

/// Pan flags for one frame. Diagonals set two flags.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PanFlags {
    pub left: bool,
    pub right: bool,
    pub up: bool,
    pub down: bool,
}

impl PanFlags {
    pub fn get(&self, dir: PanDirection) -> bool {
        match dir {
            PanDirection::Left => self.left,
            PanDirection::Right => self.right,
            PanDirection::Up => self.up,
            PanDirection::Down => self.down,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct CategoryFlags {
    pub panning: bool,
    pub navigation: bool,
    pub weapon: bool,
}

impl CategoryFlags {
    pub fn get(&self, category: Category) -> bool {
        match category {
            Category::Panning => self.panning,
            Category::Navigation => self.navigation,
            Category::Weapon => self.weapon,
            Category::None => false,
        }
    }

    pub fn any(&self) -> bool {
        self.panning || self.navigation || self.weapon
    }
}

/// Per-frame animation labels after pan discretisation and propagation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameLabels {
    pub frame_index: u64,
    pub labels: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowSample {
    /// `<game>/<session>/<start_frame>`
    pub sample_id: String,
    pub game_id: String,
    pub session_id: String,
    pub start_frame: u64,
    pub window_size: usize,
    pub actions: Vec<bool>,
    pub caption: String,
    pub categories: CategoryFlags,
}

impl WindowSample {
    pub fn sample_id_for(game_id: &str, session_id: &str, start_frame: u64) -> String {
        format!("{game_id}/{session_id}/{start_frame}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipelineConfig {
    pub window_size: usize,
    pub stride: usize,
    pub max_gap_ms: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            window_size: DEFAULT_WINDOW,
            stride: DEFAULT_STRIDE,
            max_gap_ms: DEFAULT_MAX_GAP_MS,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self, catalog: &ActionCatalog) -> Result<()> {
        if self.window_size < 1 {
            return Err(invalid("window size must be >= 1"));
        }
        if self.stride < 1 || self.stride > self.window_size {
            return Err(invalid("stride must lie in [1, window size]"));
        }
        if self.max_gap_ms < 1 {
            return Err(invalid("max gap must be >= 1 ms"));
        }
        if let Some(e) = catalog.entries().iter().find(|e| e.cutoff as usize > self.window_size) {
            return Err(invalid(format!(
                "cutoff {} of `{}` exceeds the window size {}",
                e.cutoff, e.action_id, self.window_size
            )));
        }
        Ok(())
    }
}

/// Per-frame pointer deltas for one contiguous segment; the first frame is (0, 0).
///
/// For auto-centre games a delta whose endpoint lies within
/// `center_epsilon_px` of the screen centre (Chebyshev distance) is the game
/// snapping the pointer back, not the player, and is zeroed.
pub fn mouse_deltas(records: &[TimestepRecord], profile: &GameProfile) -> Vec<(i32, i32)> {
    let (cx, cy) = profile.center();
    let eps = profile.center_epsilon_px as i64;
    let mut out = Vec::with_capacity(records.len());
    for (i, r) in records.iter().enumerate() {
        if i == 0 {
            out.push((0, 0));
            continue;
        }
        let prev = &records[i - 1];
        let delta = (r.mouse_x - prev.mouse_x, r.mouse_y - prev.mouse_y);
        let is_reset = profile.mouse_mode == MouseMode::AutoCenter
            && (r.mouse_x as i64 - cx as i64).abs() <= eps
            && (r.mouse_y as i64 - cy as i64).abs() <= eps;
        out.push(if is_reset { (0, 0) } else { delta });
    }
    out
}

/// Thresholds one delta into pan flags. Screen y grows downward.
pub fn discretize_pan(dx: i32, dy: i32, threshold: u32) -> PanFlags {
    let t = threshold as i64;
    let (dx, dy) = (dx as i64, dy as i64);
    PanFlags {
        left: dx <= -t,
        right: dx >= t,
        up: dy <= -t,
        down: dy >= t,
    }
}

/// Shift-and-span: every active frame `f` labels `f + delay ..= f + delay + length - 1`.
///
/// Held inputs re-trigger on every frame, so the result is the union over all
/// active frames, truncated to the input length.
pub fn propagate_labels(raw: &[bool], delay: u32, length: u32) -> Vec<bool> {
    let n = raw.len();
    let mut out = vec![false; n];
    let (delay, length) = (delay as usize, length as usize);
    // `covered_to` is one past the last frame already labelled.
    let mut covered_to = 0usize;
    for (f, _) in raw.iter().enumerate().filter(|(_, &on)| on) {
        let lo = (f + delay).max(covered_to);
        let hi = (f + delay + length).min(n);
        for slot in out.iter_mut().take(hi).skip(lo) {
            *slot = true;
        }
        covered_to = covered_to.max(hi);
    }
    out
}

/// Window start offsets within a segment. Windows never run past the segment end.
pub fn make_windows(segment_length: usize, window_size: usize, stride: usize) -> Vec<usize> {
    assert!(window_size >= 1 && stride >= 1, "window size and stride must be positive");
    if segment_length < window_size {
        return Vec::new();
    }
    (0..=segment_length - window_size).step_by(stride).collect()
}

/// One bit per action: set when the action is labelled on at least `cutoff` frames.
pub fn collapse_window(frames: &[FrameLabels], catalog: &ActionCatalog) -> Vec<bool> {
    let mut counts = vec![0u32; catalog.len()];
    for f in frames {
        debug_assert_eq!(f.labels.len(), catalog.len());
        for (c, &on) in counts.iter_mut().zip(&f.labels) {
            *c += on as u32;
        }
    }
    counts
        .iter()
        .zip(catalog.entries())
        .map(|(&c, e)| c >= e.cutoff)
        .collect()
}

/// Active phrases in catalog order joined by `", "`, or [`IDLE_CAPTION`].
pub fn semantic_action_mapper(actions: &[bool], catalog: &ActionCatalog) -> String {
    debug_assert_eq!(actions.len(), catalog.len());
    let phrases: Vec<&str> = actions
        .iter()
        .zip(catalog.entries())
        .filter(|(&on, _)| on)
        .map(|(_, e)| e.phrase.as_str())
        .collect();
    if phrases.is_empty() {
        IDLE_CAPTION.to_string()
    } else {
        phrases.join(", ")
    }
}

pub fn categorize(actions: &[bool], catalog: &ActionCatalog) -> CategoryFlags {
    let any = |c: Category| catalog.category_positions(c).iter().any(|&p| actions[p]);
    CategoryFlags {
        panning: any(Category::Panning),
        navigation: any(Category::Navigation),
        weapon: any(Category::Weapon),
    }
}

/// Propagated per-frame labels for one contiguous segment.
pub fn frame_labels(
    segment: &[TimestepRecord],
    profile: &GameProfile,
    catalog: &ActionCatalog,
) -> Vec<FrameLabels> {
    let n = segment.len();
    let deltas = mouse_deltas(segment, profile);
    let pans: Vec<PanFlags> = deltas
        .iter()
        .map(|&(dx, dy)| discretize_pan(dx, dy, profile.delta_threshold_px))
        .collect();

    let mut per_action: Vec<Vec<bool>> = Vec::with_capacity(catalog.len());
    for (pos, entry) in catalog.entries().iter().enumerate() {
        let raw: Vec<bool> = match entry.device {
            Device::MouseMove(dir) => pans.iter().map(|p| p.get(dir)).collect(),
            Device::MouseButton | Device::Key => {
                let slots: Vec<usize> = catalog
                    .inputs()
                    .iter()
                    .enumerate()
                    .filter(|(_, (_, label))| *label == pos)
                    .map(|(slot, _)| slot)
                    .collect();
                segment
                    .iter()
                    .map(|r| slots.iter().any(|&s| r.keys[s]))
                    .collect()
            }
        };
        per_action.push(propagate_labels(&raw, entry.anim_delay, entry.anim_length));
    }

    (0..n)
        .map(|f| FrameLabels {
            frame_index: segment[f].frame_index,
            labels: per_action.iter().map(|series| series[f]).collect(),
        })
        .collect()
}

/// Full preprocessing of one game's records.
pub fn run_pipeline(
    records: &[TimestepRecord],
    profile: &GameProfile,
    catalog: &ActionCatalog,
    config: &PipelineConfig,
) -> Result<Vec<WindowSample>> {
    profile.validate()?;
    let catalog = profile.catalog(catalog)?;
    config.validate(&catalog)?;

    for r in records {
        if r.game_id != profile.game_id {
            return Err(Error::ProfileMismatch {
                expected: profile.game_id.clone(),
                found: r.game_id.clone(),
            });
        }
        if r.keys.len() != catalog.input_count() {
            return Err(Error::DimMismatch {
                what: "record keys",
                expected: catalog.input_count(),
                found: r.keys.len(),
            });
        }
        let in_bounds = (0..profile.screen_width as i64).contains(&(r.mouse_x as i64))
            && (0..profile.screen_height as i64).contains(&(r.mouse_y as i64));
        if profile.mouse_mode == MouseMode::FreeForm && !in_bounds {
            return Err(Error::MouseOutOfBounds {
                frame: r.frame_index,
                x: r.mouse_x,
                y: r.mouse_y,
                width: profile.screen_width,
                height: profile.screen_height,
            });
        }
    }

    let mut out = Vec::new();
    for seg in detect_discontinuities(records, config.max_gap_ms) {
        let segment = &records[seg];
        let labels = frame_labels(segment, profile, &catalog);
        for start in make_windows(segment.len(), config.window_size, config.stride) {
            let window = &labels[start..start + config.window_size];
            let actions = collapse_window(window, &catalog);
            let first = &segment[start];
            out.push(WindowSample {
                sample_id: WindowSample::sample_id_for(&first.game_id, &first.session_id, first.frame_index),
                game_id: first.game_id.clone(),
                session_id: first.session_id.clone(),
                start_frame: first.frame_index,
                window_size: config.window_size,
                caption: semantic_action_mapper(&actions, &catalog),
                categories: categorize(&actions, &catalog),
                actions,
            });
        }
    }
    Ok(out)
}
