use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::catalog::{ActionCatalog, AnimOverride};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MouseMode {
    /// The game snaps the pointer back to the screen centre after each move.
    AutoCenter,
    /// The pointer roams the screen; every delta is player-initiated.
    FreeForm,
}

/// Per-game recording metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameProfile {
    pub game_id: String,
    pub mouse_mode: MouseMode,
    /// Minimum per-frame pointer delta, in pixels, that counts as panning.
    pub delta_threshold_px: u32,
    #[serde(default = "default_width")]
    pub screen_width: u32,
    #[serde(default = "default_height")]
    pub screen_height: u32,
    /// Defaults to the middle of the screen.
    #[serde(default)]
    pub screen_center: Option<(i32, i32)>,
    #[serde(default = "default_epsilon")]
    pub center_epsilon_px: u32,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub action_overrides: BTreeMap<String, AnimOverride>,
}

fn default_width() -> u32 {
    1920
}

fn default_height() -> u32 {
    1080
}

fn default_epsilon() -> u32 {
    2
}

impl GameProfile {
    pub fn new(game_id: impl Into<String>, mouse_mode: MouseMode, delta_threshold_px: u32) -> Self {
        Self {
            game_id: game_id.into(),
            mouse_mode,
            delta_threshold_px,
            screen_width: default_width(),
            screen_height: default_height(),
            screen_center: None,
            center_epsilon_px: default_epsilon(),
            action_overrides: BTreeMap::new(),
        }
    }

    pub fn center(&self) -> (i32, i32) {
        self.screen_center
            .unwrap_or((self.screen_width as i32 / 2, self.screen_height as i32 / 2))
    }

    pub fn validate(&self) -> Result<()> {
        if self.game_id.is_empty() {
            return Err(invalid("profile with empty game_id"));
        }
        if self.delta_threshold_px < 1 {
            return Err(invalid(format!("{}: delta_threshold_px must be >= 1", self.game_id)));
        }
        if self.screen_width == 0 || self.screen_height == 0 {
            return Err(invalid(format!("{}: zero screen dimension", self.game_id)));
        }
        let min_dim = self.screen_width.min(self.screen_height);
        if self.center_epsilon_px * 4 >= min_dim {
            return Err(invalid(format!(
                "{}: center_epsilon_px must be below a quarter of the smaller screen dimension",
                self.game_id
            )));
        }
        Ok(())
    }

    /// The catalog with this game's animation overrides applied.
    pub fn catalog(&self, base: &ActionCatalog) -> Result<ActionCatalog> {
        if self.action_overrides.is_empty() {
            Ok(base.clone())
        } else {
            base.with_overrides(&self.action_overrides)
        }
    }
}

/// A set of game profiles, as stored in a profiles file:
///
/// ```toml
/// [[game]]
/// game_id = "pubg"
/// mouse_mode = "free-form"
/// delta_threshold_px = 20
///
/// [game.action_overrides.reload]
/// anim_length = 12
/// ```
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSet {
    #[serde(default, rename = "game")]
    pub games: Vec<GameProfile>,
}

impl ProfileSet {
    pub fn from_toml(text: &str) -> Result<Self> {
        let set: ProfileSet = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        let mut seen = std::collections::HashSet::new();
        for p in &set.games {
            p.validate()?;
            if !seen.insert(p.game_id.as_str()) {
                return Err(invalid(format!("duplicate profile `{}`", p.game_id)));
            }
        }
        Ok(set)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("profiles serialize")
    }

    pub fn get(&self, game_id: &str) -> Result<&GameProfile> {
        self.games
            .iter()
            .find(|p| p.game_id == game_id)
            .ok_or_else(|| Error::MissingProfile(game_id.to_string()))
    }
}
