//! Paired latent/attribute datasets and the planted-map generator.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{cholesky, orthonormalize_columns};
use crate::linmap::LinearMap;
use crate::matrix::Matrix;
use crate::rng::{seeded, standard_normal, Stream};

/// Scale applied to the unit-norm planted directions.
pub const PLANTED_SCALE: f64 = 0.1;
/// Intercept of every planted attribute.
pub const PLANTED_INTERCEPT: f64 = 0.5;
/// Steepness of the sigmoid link around 0.5.
const SIGMOID_GAIN: f64 = 4.0;

/// Ordered attribute names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeSchema {
    names: Vec<String>,
}

impl AttributeSchema {
    /// Names must be non-empty, unique, and free of commas and line breaks.
    pub fn new(names: Vec<String>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::Schema("at least one attribute is required".into()));
        }
        for (i, name) in names.iter().enumerate() {
            if name.is_empty() {
                return Err(Error::Schema(format!("attribute {i} has an empty name")));
            }
            if name.contains([',', '\n', '\r']) {
                return Err(Error::Schema(format!(
                    "attribute name {name:?} contains a comma or line break"
                )));
            }
            if names[..i].contains(name) {
                return Err(Error::Schema(format!("duplicate attribute name `{name}`")));
            }
        }
        Ok(AttributeSchema { names })
    }

    /// `attr_0`, …, `attr_{a-1}`.
    pub fn numbered(a: usize) -> Result<Self> {
        AttributeSchema::new((0..a).map(|i| format!("attr_{i}")).collect())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownAttribute {
                name: name.to_string(),
                valid: self.names.clone(),
            })
    }
}

/// `N` latent rows paired with `N` attribute-score rows.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedDataset {
    latents: Matrix,
    labels: Matrix,
    schema: AttributeSchema,
}

impl PairedDataset {
    pub fn new(latents: Matrix, labels: Matrix, schema: AttributeSchema) -> Result<Self> {
        if latents.rows() == 0 {
            return Err(Error::param("latents", "dataset needs at least one row"));
        }
        if latents.cols() == 0 {
            return Err(Error::param("latents", "latent dimension must be at least 1"));
        }
        if labels.rows() != latents.rows() {
            return Err(Error::Dimension {
                context: "label rows vs latent rows",
                expected: latents.rows(),
                actual: labels.rows(),
            });
        }
        if labels.cols() != schema.len() {
            return Err(Error::Dimension {
                context: "label columns vs attribute schema",
                expected: schema.len(),
                actual: labels.cols(),
            });
        }
        check_finite(&latents, "latent")?;
        for (row, r) in labels.row_iter().enumerate() {
            for (column, &value) in r.iter().enumerate() {
                let reason = if !value.is_finite() {
                    "not a finite number"
                } else if !(0.0..=1.0).contains(&value) {
                    "outside [0, 1]"
                } else {
                    continue;
                };
                return Err(Error::InvalidEntry {
                    matrix: "label",
                    row,
                    column,
                    value,
                    reason,
                });
            }
        }
        Ok(PairedDataset {
            latents,
            labels,
            schema,
        })
    }

    pub fn latents(&self) -> &Matrix {
        &self.latents
    }

    pub fn labels(&self) -> &Matrix {
        &self.labels
    }

    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    /// Sample count `N`.
    pub fn len(&self) -> usize {
        self.latents.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Latent dimension `D`.
    pub fn dim(&self) -> usize {
        self.latents.cols()
    }

    /// Attribute count `A`.
    pub fn attrs(&self) -> usize {
        self.schema.len()
    }
}

pub(crate) fn check_finite(m: &Matrix, matrix: &'static str) -> Result<()> {
    for (row, r) in m.row_iter().enumerate() {
        if let Some(column) = r.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidEntry {
                matrix,
                row,
                column,
                value: r[column],
                reason: "not a finite number",
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Link {
    /// Raw scores clamped to `[0, 1]`.
    Linear,
    /// `1 / (1 + exp(−4·(s − 0.5)))`, mimicking saturated classifier confidences.
    Sigmoid,
}

/// Parameters of a planted-map dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub d: usize,
    pub a: usize,
    pub n: usize,
    /// Cosine between every pair of planted directions, in `[0, 1)`.
    pub rho: f64,
    pub noise_sigma: f64,
    pub link: Link,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.a == 0 {
            return Err(Error::param("a", "need at least one attribute"));
        }
        if self.n == 0 {
            return Err(Error::param("n", "need at least one sample"));
        }
        if self.d < self.a {
            return Err(Error::param(
                "d",
                format!(
                    "latent dimension {} is smaller than attribute count {}; {} directions cannot have a prescribed Gram matrix",
                    self.d, self.a, self.a
                ),
            ));
        }
        if !(self.rho.is_finite() && (0.0..1.0).contains(&self.rho)) {
            return Err(Error::param("rho", format!("{} is not in [0, 1)", self.rho)));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::param(
                "noise_sigma",
                format!("{} is not a finite non-negative number", self.noise_sigma),
            ));
        }
        Ok(())
    }
}

/// `n × d` matrix of independent standard-normal draws, a pure function of
/// `(n, d, seed)`.
pub fn sample_latents(n: usize, d: usize, seed: u64) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::param("n", "need at least one sample"));
    }
    if d == 0 {
        return Err(Error::param("d", "latent dimension must be at least 1"));
    }
    let mut rng = seeded(seed, Stream::Latents);
    Ok(Matrix::from_fn(n, d, |_, _| standard_normal(&mut rng)))
}

/// Unit-norm directions (`d × a`) whose Gram matrix is exactly
/// `(1 − rho)·I + rho·J`: orthonormalize a Gaussian matrix into `Q`, then
/// `M = Q·Lᵀ` with `L·Lᵀ` the target Gram.
pub fn planted_directions(d: usize, a: usize, rho: f64, seed: u64) -> Result<Matrix> {
    let mut rng = seeded(seed, Stream::Directions);
    let raw = Matrix::from_fn(d, a, |_, _| standard_normal(&mut rng));
    let q = orthonormalize_columns(&raw)?;
    let target = Matrix::from_fn(a, a, |i, j| if i == j { 1.0 } else { rho });
    let l = cholesky(&target, 0.0)?;
    q.matmul(&l.transpose())
}

/// Synthesizes a dataset from a planted linear map and returns it together
/// with that map, `(PLANTED_SCALE·M*, PLANTED_INTERCEPT·1)`.
pub fn synth_ground_truth(spec: &SyntheticSpec) -> Result<(PairedDataset, LinearMap)> {
    spec.validate()?;
    let schema = AttributeSchema::numbered(spec.a)?;
    let directions = planted_directions(spec.d, spec.a, spec.rho, spec.seed)?.scaled(PLANTED_SCALE);
    let intercept = alloc::vec![PLANTED_INTERCEPT; spec.a];
    let truth = LinearMap::new(directions, intercept, schema.clone())?;

    let latents = sample_latents(spec.n, spec.d, spec.seed)?;
    let mut scores = crate::linmap::predict(&truth, &latents)?;
    if spec.noise_sigma > 0.0 {
        let mut rng = seeded(spec.seed, Stream::LabelNoise);
        for v in scores.as_mut_slice() {
            *v += spec.noise_sigma * standard_normal(&mut rng);
        }
    }
    for v in scores.as_mut_slice() {
        *v = match spec.link {
            Link::Linear => v.clamp(0.0, 1.0),
            Link::Sigmoid => 1.0 / (1.0 + libm::exp(-SIGMOID_GAIN * (*v - 0.5))),
        };
    }
    let ds = PairedDataset::new(latents, scores, schema)?;
    Ok((ds, truth))
}
