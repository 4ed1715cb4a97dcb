//! Synthetic multi-game data with a controllable domain gap.
//!
//! Logs are built from 8-frame blocks aligned with the default window stride.
//! Each behaviour category runs a two-state Markov chain over blocks; its
//! transition rates are solved so that a 16-frame window (two blocks) sees the
//! category with the configured probability. Inputs are held only on the first
//! six frames of a block, so propagated labels stay inside it.
//!
//! Foundation embeddings are `normalize(B·b + u_g + ε)`: a fixed linear map of
//! the window's action bits, a per-game style offset of norm `game_gap`, and
//! isotropic noise of expected norm `noise`.

mod embed;
mod logs;

use std::collections::BTreeMap;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use embed::generate_foundation_embeddings;
pub use logs::{generate_logs, GameLog, BLOCK_FRAMES};

use crate::dataset::{Category, MouseMode};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BehaviourFrequencies {
    pub panning: f64,
    pub navigation: f64,
    pub weapon: f64,
}

impl BehaviourFrequencies {
    pub fn get(&self, category: Category) -> f64 {
        match category {
            Category::Panning => self.panning,
            Category::Navigation => self.navigation,
            Category::Weapon => self.weapon,
            Category::None => 0.0,
        }
    }
}

/// Look-and-feel of one synthetic game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameStyle {
    pub game_id: String,
    pub mouse_mode: MouseMode,
    pub delta_threshold_px: u32,
    /// Mean pan delta per frame, horizontal and vertical, in pixels.
    pub pan_speed_px: (f64, f64),
    /// Target share of windows showing each category.
    pub frequencies: BehaviourFrequencies,
    /// Chance an action is used in a block where its category is active,
    /// keyed by action id. Missing actions fall back to [`default_action_shares`].
    #[serde(default)]
    pub action_shares: BTreeMap<String, f64>,
}

impl GameStyle {
    fn preset(
        game_id: &str,
        mouse_mode: MouseMode,
        pan_speed_px: (f64, f64),
        delta_threshold_px: u32,
        [panning, navigation, weapon]: [f64; 3],
    ) -> Self {
        Self {
            game_id: game_id.into(),
            mouse_mode,
            delta_threshold_px,
            pan_speed_px,
            frequencies: BehaviourFrequencies {
                panning,
                navigation,
                weapon,
            },
            action_shares: BTreeMap::new(),
        }
    }

    pub fn share(&self, action_id: &str) -> f64 {
        self.action_shares
            .get(action_id)
            .copied()
            .or_else(|| default_action_shares().get(action_id).copied())
            .unwrap_or(0.0)
    }
}

pub fn default_action_shares() -> BTreeMap<String, f64> {
    [
        ("pan_left", 0.45),
        ("pan_right", 0.45),
        ("pan_up", 0.08),
        ("pan_down", 0.08),
        ("fire", 0.8),
        ("aim", 0.3),
        ("reload", 0.1),
        ("change_gun", 0.05),
        ("forward", 0.7),
        ("strafe_left", 0.15),
        ("strafe_right", 0.15),
        ("backward", 0.08),
        ("jump", 0.05),
        ("sprint", 0.1),
        ("crouch", 0.04),
        ("interact", 0.03),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

/// Six built-in styles spanning both mouse modes and a range of
/// behaviour mixes (battle royale, heist, death match, campaign, free roam).
pub fn preset_styles() -> Vec<GameStyle> {
    use MouseMode::*;
    vec![
        GameStyle::preset("pubg", FreeForm, (119.0, 28.0), 20, [0.82, 0.96, 0.24]),
        GameStyle::preset("payday3", FreeForm, (127.0, 32.0), 10, [0.96, 0.90, 0.43]),
        GameStyle::preset("insurgency", FreeForm, (75.0, 13.0), 20, [0.91, 0.92, 0.25]),
        GameStyle::preset("cod", AutoCenter, (13.0, 4.0), 2, [0.73, 0.84, 0.35]),
        GameStyle::preset("farcry5", AutoCenter, (22.0, 4.0), 2, [0.93, 0.80, 0.43]),
        GameStyle::preset("bioshock", FreeForm, (174.0, 40.0), 20, [0.90, 0.94, 0.35]),
    ]
}

/// Death-match shooter profile with action shares tuned so that six actions
/// clear a 30% window frequency and aim, sprint and interact never occur.
pub fn csgo_like_style() -> GameStyle {
    let mut style = GameStyle::preset("csgo", MouseMode::AutoCenter, (72.0, 18.0), 20, [0.88, 0.83, 0.36]);
    style.action_shares = [
        ("pan_left", 0.42),
        ("pan_right", 0.44),
        ("pan_up", 0.08),
        ("pan_down", 0.09),
        ("fire", 1.0),
        ("aim", 0.0),
        ("reload", 0.06),
        ("change_gun", 0.02),
        ("forward", 0.78),
        ("strafe_left", 0.38),
        ("strafe_right", 0.40),
        ("backward", 0.07),
        ("jump", 0.02),
        ("sprint", 0.0),
        ("crouch", 0.01),
        ("interact", 0.0),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    style
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingSynthConfig {
    pub dim: usize,
    /// Seed of the behaviour matrix `B`.
    pub behaviour_seed: u64,
    /// Norm of every game's style offset; each column of `B` has norm 1.
    pub game_gap: f64,
    /// Expected norm of the per-window noise.
    pub noise: f64,
    /// Dimension of the subspace style offsets live in; 0 means unrestricted.
    pub style_rank: usize,
}

impl Default for EmbeddingSynthConfig {
    fn default() -> Self {
        Self {
            dim: 64,
            behaviour_seed: 7,
            game_gap: 3.0,
            noise: 0.5,
            style_rank: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub games: Vec<GameStyle>,
    pub frames_per_game: usize,
    /// Sessions are cut at this length; the last one may be shorter.
    pub session_frames: usize,
    /// Mean length of an active run, in blocks.
    pub mean_run_blocks: f64,
    pub seed: u64,
    pub embedding: EmbeddingSynthConfig,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self::new(6, 0)
    }
}

impl SynthConfig {
    /// `n_games` styles taken from [`preset_styles`], cycling with a numeric
    /// suffix past the sixth.
    pub fn new(n_games: usize, seed: u64) -> Self {
        let presets = preset_styles();
        let games = (0..n_games)
            .map(|i| {
                let mut s = presets[i % presets.len()].clone();
                if i >= presets.len() {
                    s.game_id = format!("{}_{}", s.game_id, i / presets.len());
                }
                s
            })
            .collect();
        Self {
            games,
            frames_per_game: 4192,
            session_frames: 1048,
            mean_run_blocks: 3.0,
            seed,
            embedding: EmbeddingSynthConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.games.len() < 2 {
            return Err(invalid("synth needs at least two games"));
        }
        for (i, g) in self.games.iter().enumerate() {
            crate::dataset::check_id("game id", &g.game_id).map_err(invalid)?;
            if self.games[..i].iter().any(|o| o.game_id == g.game_id) {
                return Err(invalid(format!("duplicate game id `{}`", g.game_id)));
            }
            for c in Category::BEHAVIOURS {
                let f = g.frequencies.get(c);
                if !(f > 0.0 && f < 1.0) {
                    return Err(invalid(format!("{}: {} frequency must lie in (0, 1)", g.game_id, c.name())));
                }
            }
            if g.delta_threshold_px < 1 || !(g.pan_speed_px.0 >= 0.0 && g.pan_speed_px.1 >= 0.0) {
                return Err(invalid(format!("{}: bad mouse settings", g.game_id)));
            }
            if g.action_shares.values().any(|s| !(0.0..=1.0).contains(s)) {
                return Err(invalid(format!("{}: action shares must lie in [0, 1]", g.game_id)));
            }
        }
        if self.session_frames < 2 * BLOCK_FRAMES || self.session_frames % BLOCK_FRAMES != 0 {
            return Err(invalid(format!("session_frames must be a multiple of {BLOCK_FRAMES}, at least two blocks")));
        }
        if self.frames_per_game < self.session_frames {
            return Err(invalid("frames_per_game must cover at least one session"));
        }
        if !(self.mean_run_blocks >= 1.0) {
            return Err(invalid("mean_run_blocks must be >= 1"));
        }
        let e = &self.embedding;
        if e.dim < 1 || !(e.game_gap >= 0.0) || !(e.noise >= 0.0) || e.style_rank > e.dim {
            return Err(invalid("bad embedding settings"));
        }
        Ok(())
    }

    pub fn game(&self, game_id: &str) -> Option<&GameStyle> {
        self.games.iter().find(|g| g.game_id == game_id)
    }
}

/// Independent generator for one labelled stream.
pub(crate) fn sub_rng(seed: u64, label: &str) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(label.as_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}
