use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{sub_rng, GameStyle, SynthConfig};
use crate::dataset::{default_catalog, ActionCatalog, Category, Device, GameProfile, MouseMode, PanDirection, TimestepRecord};
use crate::error::{invalid, Result};

pub const BLOCK_FRAMES: usize = 8;
/// Inputs are held on frames `0..HOLD_FRAMES` of an active block.
const HOLD_FRAMES: usize = 6;
const FRAME_MS_NUM: u64 = 125;
const FRAME_MS_DEN: u64 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct GameLog {
    pub profile: GameProfile,
    pub records: Vec<TimestepRecord>,
}

/// Rate of switching off -> on that makes `1 - P(two consecutive blocks off)`
/// equal `target`, given the on -> off rate `alpha`.
fn solve_on_rate(target: f64, alpha: f64) -> f64 {
    let window_rate = |beta: f64| {
        let pi = beta / (alpha + beta);
        1.0 - (1.0 - pi) * (1.0 - beta)
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if window_rate(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn markov_blocks(rng: &mut ChaCha8Rng, n: usize, target: f64, mean_run: f64) -> Vec<bool> {
    let alpha = 1.0 / mean_run;
    let beta = solve_on_rate(target, alpha);
    let mut on = rng.random_bool(beta / (alpha + beta));
    (0..n)
        .map(|_| {
            let now = on;
            on = if on { !rng.random_bool(alpha) } else { rng.random_bool(beta) };
            now
        })
        .collect()
}

/// Actions of a category that fill their whole block when used, so any window
/// containing the block sees them.
fn fills_block(catalog: &ActionCatalog, pos: usize) -> bool {
    let e = catalog.entry(pos);
    e.anim_delay + HOLD_FRAMES as u32 + e.anim_length - 1 <= BLOCK_FRAMES as u32
        && HOLD_FRAMES as u32 + e.anim_length - 1 >= e.cutoff
        && !matches!(e.device, Device::MouseMove(_))
}

struct Layout {
    catalog: ActionCatalog,
    /// Input columns bound to each action.
    slots: Vec<Vec<usize>>,
}

impl Layout {
    fn new() -> Self {
        let catalog = default_catalog();
        let slots = (0..catalog.len())
            .map(|pos| {
                catalog
                    .inputs()
                    .iter()
                    .enumerate()
                    .filter(|(_, (_, p))| *p == pos)
                    .map(|(slot, _)| slot)
                    .collect()
            })
            .collect();
        Self { catalog, slots }
    }

    fn pos(&self, id: &str) -> usize {
        self.catalog.position(id).expect("default catalog action")
    }
}

pub fn generate_logs(config: &SynthConfig) -> Result<Vec<GameLog>> {
    config.validate()?;
    let layout = Layout::new();
    config.games.iter().map(|g| game_log(config, g, &layout)).collect()
}

fn game_log(config: &SynthConfig, style: &GameStyle, layout: &Layout) -> Result<GameLog> {
    let cat = &layout.catalog;
    for c in [Category::Navigation, Category::Weapon] {
        let usable = cat
            .category_positions(c)
            .iter()
            .any(|&p| fills_block(cat, p) && style.share(&cat.entry(p).action_id) > 0.0);
        if !usable {
            return Err(invalid(format!("{}: no held {} action has a positive share", style.game_id, c.name())));
        }
    }

    let profile = GameProfile::new(style.game_id.clone(), style.mouse_mode, style.delta_threshold_px);
    profile.validate()?;
    let mut rng = sub_rng(config.seed, &format!("logs/{}", style.game_id));
    let mut records = Vec::with_capacity(config.frames_per_game);
    let mut remaining = config.frames_per_game - config.frames_per_game % BLOCK_FRAMES;
    let mut session = 0usize;
    while remaining >= 2 * BLOCK_FRAMES {
        let frames = remaining.min(config.session_frames);
        remaining -= frames;
        session_records(config, style, layout, &profile, &mut rng, session, frames / BLOCK_FRAMES, &mut records);
        session += 1;
    }
    Ok(GameLog { profile, records })
}

#[allow(clippy::too_many_arguments)]
fn session_records(
    config: &SynthConfig,
    style: &GameStyle,
    layout: &Layout,
    profile: &GameProfile,
    rng: &mut ChaCha8Rng,
    session: usize,
    n_blocks: usize,
    out: &mut Vec<TimestepRecord>,
) {
    let cat = &layout.catalog;
    let share = |id: &str| style.share(id);
    let pan = markov_blocks(rng, n_blocks, style.frequencies.panning, config.mean_run_blocks);
    let nav = markov_blocks(rng, n_blocks, style.frequencies.navigation, config.mean_run_blocks);
    let weapon = markov_blocks(rng, n_blocks, style.frequencies.weapon, config.mean_run_blocks);

    let t = profile.delta_threshold_px as i32;
    let (cx, cy) = profile.center();
    let (w, h) = (profile.screen_width as i32, profile.screen_height as i32);
    let min_move = match profile.mouse_mode {
        MouseMode::AutoCenter => t.max(profile.center_epsilon_px as i32 + 1),
        MouseMode::FreeForm => t,
    };
    let (mut x, mut y) = (cx, cy);
    let session_id = format!("s{session:03}");

    for b in 0..n_blocks {
        let mut held: Vec<usize> = Vec::new();
        let mut tapped: Vec<usize> = Vec::new();

        if nav[b] {
            let ids = ["forward", "strafe_left", "strafe_right", "backward", "sprint", "crouch"];
            let mut chosen: Vec<&str> = ids.iter().copied().filter(|id| rng.random_bool(share(id))).collect();
            if chosen.is_empty() {
                chosen.push(pick_max(&ids, &share));
            }
            held.extend(chosen.iter().map(|id| layout.pos(id)));
            if rng.random_bool(share("jump")) {
                tapped.push(layout.pos("jump"));
            }
        }
        if weapon[b] {
            let ids = ["fire", "aim"];
            let mut chosen: Vec<&str> = ids.iter().copied().filter(|id| rng.random_bool(share(id))).collect();
            if chosen.is_empty() {
                chosen.push(pick_max(&ids, &share));
            }
            held.extend(chosen.iter().map(|id| layout.pos(id)));
            // the reload animation runs into the next block
            if b + 1 < n_blocks && weapon[b + 1] && rng.random_bool(share("reload")) {
                tapped.push(layout.pos("reload"));
            } else if rng.random_bool(share("change_gun")) {
                tapped.push(layout.pos("change_gun"));
            }
        }
        if rng.random_bool(share("interact")) {
            tapped.push(layout.pos("interact"));
        }

        let dirs = if pan[b] { pan_directions(rng, &share) } else { Vec::new() };
        let mut steps: Vec<(i32, i32)> = Vec::new();
        if !dirs.is_empty() {
            for _ in 0..HOLD_FRAMES {
                let mut d = (0, 0);
                for dir in &dirs {
                    let (speed, sign_x, sign_y) = match dir {
                        PanDirection::Left => (style.pan_speed_px.0, -1, 0),
                        PanDirection::Right => (style.pan_speed_px.0, 1, 0),
                        PanDirection::Up => (style.pan_speed_px.1, 0, -1),
                        PanDirection::Down => (style.pan_speed_px.1, 0, 1),
                    };
                    let m = ((speed * rng.random_range(0.5..1.5)).round() as i32).max(min_move);
                    d.0 += sign_x * m;
                    d.1 += sign_y * m;
                }
                let jitter = (t - 1).max(0);
                if d.0 == 0 && jitter > 0 {
                    d.0 = rng.random_range(-jitter..=jitter);
                }
                if d.1 == 0 && jitter > 0 {
                    d.1 = rng.random_range(-jitter..=jitter);
                }
                steps.push(d);
            }
        }

        for o in 0..BLOCK_FRAMES {
            let frame = b * BLOCK_FRAMES + o;
            let mut keys = vec![false; cat.input_count()];
            if o < HOLD_FRAMES {
                for &p in &held {
                    let slots = &layout.slots[p];
                    keys[slots[rng.random_range(0..slots.len())]] = true;
                }
            }
            if o == 0 {
                for &p in &tapped {
                    let slots = &layout.slots[p];
                    keys[slots[rng.random_range(0..slots.len())]] = true;
                }
            }

            match profile.mouse_mode {
                MouseMode::AutoCenter => {
                    (x, y) = if o < HOLD_FRAMES && o % 2 == 0 && !steps.is_empty() {
                        (cx + steps[o].0, cy + steps[o].1)
                    } else {
                        (cx, cy)
                    };
                }
                MouseMode::FreeForm => {
                    if o < HOLD_FRAMES && !steps.is_empty() {
                        let (dx, dy) = steps[o];
                        x = reflect(x, dx, w);
                        y = reflect(y, dy, h);
                    } else {
                        x = drift(rng, x, cx, t, w);
                        y = drift(rng, y, cy, t, h);
                    }
                }
            }

            out.push(TimestepRecord {
                game_id: style.game_id.clone(),
                session_id: session_id.clone(),
                frame_index: frame as u64,
                timestamp_ms: frame as u64 * FRAME_MS_NUM / FRAME_MS_DEN,
                mouse_x: x,
                mouse_y: y,
                keys,
            });
        }
    }
}

fn pick_max<'a>(ids: &[&'a str], share: &impl Fn(&str) -> f64) -> &'a str {
    ids.iter()
        .copied()
        .fold((ids[0], f64::NEG_INFINITY), |best, id| if share(id) > best.1 { (id, share(id)) } else { best })
        .0
}

/// One horizontal and/or one vertical direction; never empty.
fn pan_directions(rng: &mut ChaCha8Rng, share: &impl Fn(&str) -> f64) -> Vec<PanDirection> {
    let mut out = Vec::new();
    for [(a, da), (b, db)] in [
        [("pan_left", PanDirection::Left), ("pan_right", PanDirection::Right)],
        [("pan_up", PanDirection::Up), ("pan_down", PanDirection::Down)],
    ] {
        let (sa, sb) = (share(a), share(b));
        let scale = (sa + sb).max(1.0);
        let u: f64 = rng.random();
        if u < sa / scale {
            out.push(da);
        } else if u < (sa + sb) / scale {
            out.push(db);
        }
    }
    if out.is_empty() {
        let all = ["pan_left", "pan_right", "pan_up", "pan_down"];
        let i = all.iter().position(|id| *id == pick_max(&all, share)).unwrap();
        out.push(PanDirection::ALL[i]);
    }
    out
}

/// Moves by `d`, bouncing off the screen edge instead of leaving it.
fn reflect(pos: i32, d: i32, size: i32) -> i32 {
    let next = pos + d;
    if (0..size).contains(&next) {
        next
    } else {
        (pos - d).clamp(0, size - 1)
    }
}

/// Sub-threshold wander with a pull back towards the centre.
fn drift(rng: &mut ChaCha8Rng, pos: i32, center: i32, t: i32, size: i32) -> i32 {
    let reach = (t - 1).max(0);
    if reach == 0 {
        return pos;
    }
    let mut step = rng.random_range(-reach..=reach);
    if (pos - center) * step > 0 && rng.random_bool(0.5) {
        step = -step;
    }
    (pos + step).clamp(0, size - 1)
}
