//! Alignment losses and their gradients with respect to the first argument.

use serde::{Deserialize, Serialize};

use super::mlp::{cast, Real};
use crate::embeddings::{dot, norm, NORM_EPS};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    Cosine,
    Mse,
    Preference,
}

impl std::str::FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cosine" => Ok(Self::Cosine),
            "mse" => Ok(Self::Mse),
            "preference" | "pref" => Ok(Self::Preference),
            other => Err(crate::error::invalid(format!("unknown loss `{other}`"))),
        }
    }
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimMismatch {
            what: "loss operands",
            expected: a,
            found: b,
        });
    }
    Ok(())
}

fn is_zero<T: Real>(n: T) -> bool {
    n.to_f64().is_none_or(|n| n <= NORM_EPS)
}

/// `1 - a·b / (|a| |b|)`, in `[0, 2]`.
pub fn cosine_loss<T: Real>(a: &[T], b: &[T]) -> Result<T> {
    check_dims(a.len(), b.len())?;
    let (na, nb) = (norm(a), norm(b));
    if is_zero(na) || is_zero(nb) {
        return Err(Error::ZeroVector);
    }
    Ok(T::one() - dot(a, b) / (na * nb))
}

/// Cosine loss and its gradient with respect to `a`.
pub fn cosine_loss_grad<T: Real>(a: &[T], b: &[T]) -> Result<(T, Vec<T>)> {
    check_dims(a.len(), b.len())?;
    let (na, nb) = (norm(a), norm(b));
    if is_zero(na) || is_zero(nb) {
        return Err(Error::ZeroVector);
    }
    let cos = dot(a, b) / (na * nb);
    // d cos / da = b / (|a||b|) - cos * a / |a|^2
    let grad = a
        .iter()
        .zip(b)
        .map(|(&ai, &bi)| -(bi / (na * nb) - cos * ai / (na * na)))
        .collect();
    Ok((T::one() - cos, grad))
}

/// Mean squared difference over components.
pub fn mse_loss<T: Real>(a: &[T], b: &[T]) -> Result<T> {
    check_dims(a.len(), b.len())?;
    if a.is_empty() {
        return Ok(T::zero());
    }
    let sum = a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y));
    Ok(sum / cast(a.len() as f64))
}

pub fn mse_loss_grad<T: Real>(a: &[T], b: &[T]) -> Result<(T, Vec<T>)> {
    let loss = mse_loss(a, b)?;
    let scale = cast::<T>(2.0 / a.len().max(1) as f64);
    Ok((loss, a.iter().zip(b).map(|(&x, &y)| scale * (x - y)).collect()))
}

/// `max(0, cos_loss(z_i, c_i) - cos_loss(z_j, c_i) + margin)`.
pub fn preference_loss<T: Real>(z_i: &[T], z_j: &[T], caption_i: &[T], margin: T) -> Result<T> {
    let li = cosine_loss(z_i, caption_i)?;
    let lj = cosine_loss(z_j, caption_i)?;
    Ok((li - lj + margin).max(T::zero()))
}

/// Preference loss and its gradients with respect to `z_i` and `z_j`.
pub fn preference_loss_grad<T: Real>(
    z_i: &[T],
    z_j: &[T],
    caption_i: &[T],
    margin: T,
) -> Result<(T, Vec<T>, Vec<T>)> {
    let (li, gi) = cosine_loss_grad(z_i, caption_i)?;
    let (lj, gj) = cosine_loss_grad(z_j, caption_i)?;
    let raw = li - lj + margin;
    if raw > T::zero() {
        Ok((raw, gi, gj.into_iter().map(|g| -g).collect()))
    } else {
        let zeros = vec![T::zero(); z_i.len()];
        Ok((T::zero(), zeros.clone(), zeros))
    }
}
