use super::mlp::{Dense, Mlp, MlpCache, Mode, Real};
use crate::embeddings::{dot, l2_normalize, norm, EmbeddingTable, NORM_EPS};
use crate::error::{Error, Result};

/// The alignment projector: an MLP whose output is L2-normalised.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector<T> {
    net: Mlp<T>,
    seed: u64,
}

pub type MlpProjector = Projector<f32>;

#[derive(Debug, Clone)]
pub struct ProjectorCache<T> {
    net: MlpCache<T>,
    unit: Vec<T>,
    norm: T,
}

impl<T: Real> Projector<T> {
    /// `dims` is `[input, hidden..., output]`; `seed` drives initialisation.
    pub fn new(dims: &[usize], dropout: f64, seed: u64) -> Result<Self> {
        Ok(Self {
            net: Mlp::init(dims, dropout, seed)?,
            seed,
        })
    }

    pub fn from_layers(layers: Vec<Dense<T>>, dropout: f64, seed: u64) -> Result<Self> {
        Ok(Self {
            net: Mlp::from_layers(layers, dropout)?,
            seed,
        })
    }

    pub fn net(&self) -> &Mlp<T> {
        &self.net
    }

    pub fn layers_mut(&mut self) -> &mut [Dense<T>] {
        self.net.layers_mut()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn input_dim(&self) -> usize {
        self.net.input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.net.output_dim()
    }

    pub fn forward(&self, x: &[T], mode: Mode<'_>) -> Result<(Vec<T>, ProjectorCache<T>)> {
        let (raw, net) = self.net.forward(x, mode)?;
        let n = norm(&raw);
        let unit = l2_normalize(&raw);
        Ok((unit.clone(), ProjectorCache { net, unit, norm: n }))
    }

    /// Accumulates parameter gradients given `dL/dz` for the normalised output.
    ///
    /// Through the normalisation `z = y/|y|` the gradient becomes
    /// `(g - z (z·g)) / |y|`; a degenerate zero output passes no gradient.
    pub fn backward(&self, cache: &ProjectorCache<T>, grad_unit: &[T], grads: &mut [Dense<T>]) {
        if cache.norm.to_f64().is_none_or(|n| n <= NORM_EPS) {
            return;
        }
        let along = dot(&cache.unit, grad_unit);
        let grad_raw: Vec<T> = grad_unit
            .iter()
            .zip(&cache.unit)
            .map(|(&g, &z)| (g - z * along) / cache.norm)
            .collect();
        self.net.backward(&cache.net, &grad_raw, grads);
    }

    pub fn zero_grads(&self) -> Vec<Dense<T>> {
        self.net.zero_grads()
    }
}

impl MlpProjector {
    /// Eval-mode projection of every row; ids are kept.
    pub fn project(&self, table: &EmbeddingTable) -> Result<EmbeddingTable> {
        if table.dim() != self.input_dim() {
            return Err(Error::DimMismatch {
                what: "projector input",
                expected: self.input_dim(),
                found: table.dim(),
            });
        }
        let mut data = Vec::with_capacity(table.len() * self.output_dim());
        for row in table.rows() {
            let (z, _) = self.forward(row, Mode::Eval)?;
            data.extend(z);
        }
        EmbeddingTable::new(self.output_dim(), table.ids().to_vec(), data)
    }
}
