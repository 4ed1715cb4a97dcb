//! The canonical FPS action set.
//!
//! Each [`ActionEntry`] is one action *label*: the thing a caption phrase
//! describes and the unit a window's action vector is indexed by. Keyboard and
//! mouse-button labels are bound to one or more raw log columns (`inputs`);
//! several keys may share a label (both crouch keys, the three weapon slots).
//! Mouse-move labels have no raw column and are derived from pointer deltas.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PanDirection {
    Left,
    Right,
    Up,
    Down,
}

impl PanDirection {
    pub const ALL: [PanDirection; 4] = [Self::Left, Self::Right, Self::Up, Self::Down];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Device {
    MouseMove(PanDirection),
    MouseButton,
    Key,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    Panning,
    Navigation,
    Weapon,
    None,
}

impl Category {
    /// The three behaviour categories, in report order.
    pub const BEHAVIOURS: [Category; 3] = [Self::Panning, Self::Navigation, Self::Weapon];

    pub fn name(self) -> &'static str {
        match self {
            Category::Panning => "panning",
            Category::Navigation => "navigation",
            Category::Weapon => "weapon",
            Category::None => "none",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionEntry {
    pub action_id: String,
    pub device: Device,
    pub phrase: String,
    pub category: Category,
    /// Frames between the input and the first animated frame.
    pub anim_delay: u32,
    /// Number of animated frames per input frame.
    pub anim_length: u32,
    /// Minimum animated frames for a window to count the action as present.
    pub cutoff: u32,
    /// Raw log columns bound to this label. Empty for mouse moves.
    pub inputs: Vec<String>,
}

/// Partial override of an entry's animation parameters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnimOverride {
    pub anim_delay: Option<u32>,
    pub anim_length: Option<u32>,
    pub cutoff: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionCatalog {
    entries: Vec<ActionEntry>,
    category_index: BTreeMap<Category, Vec<usize>>,
    /// (column name, label position), in column order.
    inputs: Vec<(String, usize)>,
}

impl ActionCatalog {
    pub fn new(entries: Vec<ActionEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(invalid("catalog has no entries"));
        }
        let mut phrases = HashSet::new();
        let mut ids = HashSet::new();
        let mut input_names = HashSet::new();
        let mut pan_seen = HashSet::new();
        let mut category_index: BTreeMap<Category, Vec<usize>> = BTreeMap::new();
        let mut inputs = Vec::new();

        for (pos, e) in entries.iter().enumerate() {
            if e.phrase.trim().is_empty() {
                return Err(invalid(format!("action `{}` has an empty phrase", e.action_id)));
            }
            if e.phrase.contains(',') || e.phrase == crate::preprocess::IDLE_CAPTION {
                return Err(invalid(format!("phrase `{}` is reserved or contains a comma", e.phrase)));
            }
            if !phrases.insert(e.phrase.as_str()) {
                return Err(invalid(format!("duplicate phrase `{}`", e.phrase)));
            }
            if !ids.insert(e.action_id.as_str()) {
                return Err(invalid(format!("duplicate action id `{}`", e.action_id)));
            }
            if e.anim_delay < 1 || e.anim_length < 1 || e.cutoff < 1 {
                return Err(invalid(format!(
                    "action `{}`: delay, length and cutoff must be >= 1",
                    e.action_id
                )));
            }
            match e.device {
                Device::MouseMove(dir) => {
                    if !e.inputs.is_empty() {
                        return Err(invalid(format!("mouse move `{}` cannot bind inputs", e.action_id)));
                    }
                    if !pan_seen.insert(dir) {
                        return Err(invalid(format!("pan direction {dir:?} bound twice")));
                    }
                }
                Device::MouseButton | Device::Key => {
                    if e.inputs.is_empty() {
                        return Err(invalid(format!("action `{}` binds no inputs", e.action_id)));
                    }
                }
            }
            for input in &e.inputs {
                if !input_names.insert(input.as_str()) {
                    return Err(invalid(format!("input `{input}` bound twice")));
                }
                inputs.push((input.clone(), pos));
            }
            category_index.entry(e.category).or_default().push(pos);
        }

        Ok(Self {
            entries,
            category_index,
            inputs,
        })
    }

    /// Number of action labels (the length of every action vector).
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[ActionEntry] {
        &self.entries
    }

    pub fn entry(&self, pos: usize) -> &ActionEntry {
        &self.entries[pos]
    }

    pub fn position(&self, action_id: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.action_id == action_id)
    }

    pub fn lookup(&self, phrase: &str) -> Option<&ActionEntry> {
        self.entries.iter().find(|e| e.phrase == phrase)
    }

    pub fn phrase_position(&self, phrase: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.phrase == phrase)
    }

    /// Raw log columns in canonical order, with the label each one feeds.
    pub fn inputs(&self) -> &[(String, usize)] {
        &self.inputs
    }

    pub fn input_count(&self) -> usize {
        self.inputs.len()
    }

    /// Mouse-move labels plus raw input columns: every distinct thing the
    /// recorder observes.
    pub fn raw_entry_count(&self) -> usize {
        self.pan_positions().count() + self.inputs.len()
    }

    pub fn pan_position(&self, dir: PanDirection) -> Option<usize> {
        self.entries
            .iter()
            .position(|e| e.device == Device::MouseMove(dir))
    }

    fn pan_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, e)| matches!(e.device, Device::MouseMove(_)))
            .map(|(i, _)| i)
    }

    pub fn category_positions(&self, category: Category) -> &[usize] {
        self.category_index
            .get(&category)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn phrases(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.phrase.as_str())
    }

    /// Applies per-action animation overrides keyed by action id.
    pub fn with_overrides(&self, overrides: &BTreeMap<String, AnimOverride>) -> Result<Self> {
        let mut entries = self.entries.clone();
        for (id, o) in overrides {
            let e = entries
                .iter_mut()
                .find(|e| &e.action_id == id)
                .ok_or_else(|| crate::Error::UnknownAction(id.clone()))?;
            if let Some(d) = o.anim_delay {
                e.anim_delay = d;
            }
            if let Some(l) = o.anim_length {
                e.anim_length = l;
            }
            if let Some(c) = o.cutoff {
                e.cutoff = c;
            }
        }
        Self::new(entries)
    }
}

impl Default for ActionCatalog {
    fn default() -> Self {
        default_catalog()
    }
}

/// The recorded FPS action set with its animation parameters.
///
/// Row order is canonical: the four mouse moves, the two mouse buttons, then
/// the keyboard. Captions list phrases in this order.
pub fn default_catalog() -> ActionCatalog {
    use Category::*;
    use Device::*;

    #[rustfmt::skip]
    let rows: [(&str, Device, &str, Category, u32, u32, u32, &[&str]); 16] = [
        ("pan_left",     MouseMove(PanDirection::Left),  "Pan Left",      Panning,    1, 2, 2, &[]),
        ("pan_right",    MouseMove(PanDirection::Right), "Pan Right",     Panning,    1, 2, 2, &[]),
        ("pan_up",       MouseMove(PanDirection::Up),    "Pan Up",        Panning,    1, 2, 2, &[]),
        ("pan_down",     MouseMove(PanDirection::Down),  "Pan Down",      Panning,    1, 2, 2, &[]),
        ("fire",         MouseButton,                    "Fire Gun",      Weapon,     1, 2, 2, &["lmb"]),
        ("aim",          MouseButton,                    "Aim Gun",       Weapon,     1, 2, 2, &["rmb"]),
        ("forward",      Key,                            "Move Forward",  Navigation, 1, 2, 2, &["w"]),
        ("strafe_left",  Key,                            "Strafe Left",   Navigation, 1, 2, 2, &["a"]),
        ("backward",     Key,                            "Move Backward", Navigation, 1, 2, 2, &["s"]),
        ("strafe_right", Key,                            "Strafe Right",  Navigation, 1, 2, 2, &["d"]),
        ("reload",       Key,                            "Reload Gun",    Weapon,     3, 16, 6, &["r"]),
        ("jump",         Key,                            "Jump",          Navigation, 1, 2, 2, &["space"]),
        ("sprint",       Key,                            "Sprint",        Navigation, 1, 2, 6, &["lshift"]),
        ("crouch",       Key,                            "Crouch",        Navigation, 1, 2, 2, &["lctrl", "c"]),
        ("change_gun",   Key,                            "Change Gun",    Weapon,     3, 8, 6, &["1", "2", "3"]),
        ("interact",     Key,                            "Interact",      None,       3, 5, 3, &["f"]),
    ];

    let entries = rows
        .into_iter()
        .map(|(id, device, phrase, category, delay, length, cutoff, inputs)| ActionEntry {
            action_id: id.to_string(),
            device,
            phrase: phrase.to_string(),
            category,
            anim_delay: delay,
            anim_length: length,
            cutoff,
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
        })
        .collect();
    ActionCatalog::new(entries).expect("default catalog is valid")
}
