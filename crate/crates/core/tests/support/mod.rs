//! Reference implementations shared by the integration and acceptance tests.
//! Each one is written for clarity, not speed, and shares no code with the
//! crate beyond the public types.
#![allow(dead_code)]

use behave_core::align::{Dense, Mode, Projector};
use behave_core::dataset::{default_catalog, ActionCatalog, Category, Device, GameProfile, MouseMode, PanDirection, TimestepRecord};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Mean silhouette straight from the definition, O(n²) per point.
pub fn brute_silhouette(points: &[Vec<f64>], labels: &[usize]) -> f64 {
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let n = points.len();
    let mut total = 0.0;
    for i in 0..n {
        let own: Vec<usize> = (0..n).filter(|&j| j != i && labels[j] == labels[i]).collect();
        if own.is_empty() {
            continue;
        }
        let a = own.iter().map(|&j| dist(&points[i], &points[j])).sum::<f64>() / own.len() as f64;
        let mut others: Vec<usize> = labels.iter().copied().filter(|&l| l != labels[i]).collect();
        others.sort_unstable();
        others.dedup();
        let b = others
            .iter()
            .map(|&l| {
                let members: Vec<usize> = (0..n).filter(|&j| labels[j] == l).collect();
                members.iter().map(|&j| dist(&points[i], &points[j])).sum::<f64>() / members.len() as f64
            })
            .fold(f64::INFINITY, f64::min);
        let m = a.max(b);
        if m > 0.0 {
            total += (b - a) / m;
        }
    }
    total / n as f64
}

/// Runs `cases` random labelled point sets through `score` and checks it
/// against [`brute_silhouette`] and under translation, rotation, positive
/// scaling, row permutation and label renaming. `score` sees f32-rounded
/// points, as an embedding table would store them.
pub fn silhouette_invariance(cases: usize, seed: u64, score: impl Fn(&[Vec<f64>], &[usize]) -> f64) -> Result<(), String> {
    let round = |p: &[Vec<f64>]| -> Vec<Vec<f64>> { p.iter().map(|r| r.iter().map(|&x| x as f32 as f64).collect()).collect() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..cases {
        let n = rng.random_range(6..30);
        let k = rng.random_range(2..=4);
        let mut labels: Vec<usize> = (0..n).map(|i| if i < k { i } else { rng.random_range(0..k) }).collect();
        labels.shuffle(&mut rng);
        let points: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..3)
                    .map(|d| if d == 0 { labels[i] as f64 } else { 0.0 } + rng.random_range(-1.0..1.0))
                    .collect()
            })
            .collect();
        let points = round(&points);
        let s = score(&points, &labels);
        let brute = brute_silhouette(&points, &labels);
        if (s - brute).abs() > 1e-9 {
            return Err(format!("case {case}: {s} vs brute force {brute}"));
        }

        let shift: Vec<f64> = (0..3).map(|_| rng.random_range(-5.0..5.0)).collect();
        let moved: Vec<Vec<f64>> = points.iter().map(|p| p.iter().zip(&shift).map(|(x, s)| x + s).collect()).collect();
        let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let (c, sn) = (theta.cos(), theta.sin());
        let turned: Vec<Vec<f64>> = points.iter().map(|p| vec![c * p[0] - sn * p[1], sn * p[0] + c * p[1], p[2]]).collect();
        let scaled: Vec<Vec<f64>> = points.iter().map(|p| p.iter().map(|x| x * 3.5).collect()).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let perm_points: Vec<Vec<f64>> = order.iter().map(|&i| points[i].clone()).collect();
        let perm_labels: Vec<usize> = order.iter().map(|&i| labels[i]).collect();
        let renamed: Vec<usize> = labels.iter().map(|l| 10 * l + 7).collect();
        for (what, other) in [
            ("translation", score(&round(&moved), &labels)),
            ("rotation", score(&round(&turned), &labels)),
            ("scaling", score(&round(&scaled), &labels)),
            ("permutation", score(&perm_points, &perm_labels)),
            ("relabelling", score(&points, &renamed)),
        ] {
            if (s - other).abs() > 1e-5 {
                return Err(format!("case {case} {what}: {s} vs {other}"));
            }
        }
    }
    Ok(())
}

fn cos_loss(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    1.0 - dot / (na * nb)
}

/// Loss used by the gradient check; `kind` cycles cosine, MSE, preference.
fn check_loss(kind: usize, zi: &[f64], zj: &[f64], c: &[f64]) -> f64 {
    match kind {
        0 => cos_loss(zi, c),
        1 => zi.iter().zip(c).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / zi.len() as f64,
        // the margin keeps the hinge active
        _ => (cos_loss(zi, c) - cos_loss(zj, c) + 2.5).max(0.0),
    }
}

/// Weights first, then biases.
fn param(d: &mut Dense<f64>, k: usize) -> &mut f64 {
    let n = d.weight.len();
    if k < n {
        &mut d.weight[k]
    } else {
        &mut d.bias[k - n]
    }
}

pub struct GradCheck {
    pub parameters: usize,
    pub max_relative_error: f64,
}

/// Backprop vs central differences on one random f64 projector.
pub fn gradient_check(seed: u64, h: f64) -> GradCheck {
    use behave_core::align::{cosine_loss_grad, mse_loss_grad, preference_loss_grad};

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let depth = rng.random_range(1..=3);
    let mut dims = vec![rng.random_range(2..=6)];
    for _ in 0..depth {
        dims.push(rng.random_range(2..=8));
    }
    dims.push(rng.random_range(2..=5));
    let mut p = Projector::<f64>::new(&dims, 0.0, seed).unwrap();
    // nonzero biases keep hidden units off the ReLU kink
    for layer in p.layers_mut() {
        for b in layer.bias.iter_mut() {
            *b = rng.random_range(-0.5..0.5);
        }
    }
    let vec = |rng: &mut ChaCha8Rng, n: usize| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>();
    let xi = vec(&mut rng, dims[0]);
    let xj = vec(&mut rng, dims[0]);
    let c = vec(&mut rng, *dims.last().unwrap());
    let kind = (seed % 3) as usize;

    let loss_at = |p: &Projector<f64>| {
        let (zi, _) = p.forward(&xi, Mode::Eval).unwrap();
        let (zj, _) = p.forward(&xj, Mode::Eval).unwrap();
        check_loss(kind, &zi, &zj, &c)
    };

    let (zi, ci) = p.forward(&xi, Mode::Eval).unwrap();
    let (zj, cj) = p.forward(&xj, Mode::Eval).unwrap();
    let mut grads = p.zero_grads();
    match kind {
        0 => p.backward(&ci, &cosine_loss_grad(&zi, &c).unwrap().1, &mut grads),
        1 => p.backward(&ci, &mse_loss_grad(&zi, &c).unwrap().1, &mut grads),
        _ => {
            let (_, gi, gj) = preference_loss_grad(&zi, &zj, &c, 2.5).unwrap();
            p.backward(&ci, &gi, &mut grads);
            p.backward(&cj, &gj, &mut grads);
        }
    }

    let mut worst = 0.0f64;
    let mut count = 0;
    for l in 0..grads.len() {
        for k in 0..grads[l].weight.len() + grads[l].bias.len() {
            let mut plus = p.clone();
            let mut minus = p.clone();
            *param(&mut plus.layers_mut()[l], k) += h;
            *param(&mut minus.layers_mut()[l], k) -= h;
            let numeric = (loss_at(&plus) - loss_at(&minus)) / (2.0 * h);
            let analytic = *param(&mut grads[l], k);
            let scale = analytic.abs().max(numeric.abs()).max(1e-7);
            worst = worst.max((analytic - numeric).abs() / scale);
            count += 1;
        }
    }
    GradCheck {
        parameters: count,
        max_relative_error: worst,
    }
}

pub struct FixtureWindow {
    pub start: usize,
    pub actions: Vec<bool>,
    pub caption: String,
    pub categories: [bool; 3],
}

/// A 48-frame free-form recording: reload pressed at frame 10, forward held
/// on 0..=5 and 30..=37, fire on 40..=41, jump at 33, a rightward pan on
/// 20..=21, an upward pan at 44 and interact at 2.
pub fn fixture_48() -> (Vec<TimestepRecord>, GameProfile) {
    let catalog = default_catalog();
    let profile = GameProfile::new("fixture", MouseMode::FreeForm, 20);
    let col = |name: &str| catalog.inputs().iter().position(|(n, _)| n == name).unwrap();
    let (mut x, mut y) = (900, 500);
    let records = (0..48u64)
        .map(|f| {
            let mut keys = vec![false; catalog.input_count()];
            let fi = f as usize;
            keys[col("r")] = fi == 10;
            keys[col("w")] = fi <= 5 || (30..=37).contains(&fi);
            keys[col("lmb")] = (40..=41).contains(&fi);
            keys[col("space")] = fi == 33;
            keys[col("f")] = fi == 2;
            match fi {
                20 | 21 => x += 30,
                44 => y -= 25,
                // sub-threshold wobble
                7 | 9 => x += 5,
                8 => x -= 19,
                _ => {}
            }
            TimestepRecord {
                game_id: "fixture".into(),
                session_id: "s0".into(),
                frame_index: f,
                timestamp_ms: f * 62,
                mouse_x: x,
                mouse_y: y,
                keys,
            }
        })
        .collect();
    (records, profile)
}

/// Raw per-frame activity of one label, read directly off the records.
fn raw_activity(records: &[TimestepRecord], profile: &GameProfile, catalog: &ActionCatalog, pos: usize) -> Vec<bool> {
    let entry = catalog.entry(pos);
    let t = profile.delta_threshold_px as i32;
    records
        .iter()
        .enumerate()
        .map(|(f, r)| match entry.device {
            Device::MouseMove(dir) => {
                if f == 0 {
                    return false;
                }
                let (dx, dy) = (r.mouse_x - records[f - 1].mouse_x, r.mouse_y - records[f - 1].mouse_y);
                match dir {
                    PanDirection::Left => dx <= -t,
                    PanDirection::Right => dx >= t,
                    PanDirection::Up => dy <= -t,
                    PanDirection::Down => dy >= t,
                }
            }
            _ => catalog
                .inputs()
                .iter()
                .enumerate()
                .any(|(slot, (_, p))| *p == pos && r.keys[slot]),
        })
        .collect()
}

/// Frame `f` is labelled when some active frame `g` has `g + delay <= f < g + delay + length`.
pub fn reference_labels(records: &[TimestepRecord], profile: &GameProfile, catalog: &ActionCatalog, pos: usize) -> Vec<bool> {
    let raw = raw_activity(records, profile, catalog, pos);
    let e = catalog.entry(pos);
    let (d, l) = (e.anim_delay as usize, e.anim_length as usize);
    (0..records.len())
        .map(|f| (0..records.len()).any(|g| raw[g] && g + d <= f && f < g + d + l))
        .collect()
}

/// Windows of 16 frames every 8, built the slow way.
pub fn reference_windows(records: &[TimestepRecord], profile: &GameProfile) -> Vec<FixtureWindow> {
    let catalog = default_catalog();
    let labels: Vec<Vec<bool>> = (0..catalog.len())
        .map(|p| reference_labels(records, profile, &catalog, p))
        .collect();
    let mut out = Vec::new();
    let mut start = 0;
    while start + 16 <= records.len() {
        let actions: Vec<bool> = (0..catalog.len())
            .map(|p| labels[p][start..start + 16].iter().filter(|b| **b).count() as u32 >= catalog.entry(p).cutoff)
            .collect();
        let phrases: Vec<&str> = (0..catalog.len())
            .filter(|&p| actions[p])
            .map(|p| catalog.entry(p).phrase.as_str())
            .collect();
        let caption = if phrases.is_empty() { "Idle".to_string() } else { phrases.join(", ") };
        let has = |c: Category| (0..catalog.len()).any(|p| actions[p] && catalog.entry(p).category == c);
        out.push(FixtureWindow {
            start,
            categories: [has(Category::Panning), has(Category::Navigation), has(Category::Weapon)],
            actions,
            caption,
        });
        start += 8;
    }
    out
}
