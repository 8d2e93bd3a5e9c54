//! The linear latent → attribute model.
//!
//! `M` is stored `D × A`: column `i` is the direction `mᵢ` of attribute `i`,
//! and a latent row `z` maps to `z·M + b`. The regularized objective is
//!
//! ```text
//! total = 1/(N·A) · ‖Z·M + 1·bᵀ − Y‖²_F  +  λ · ‖MᵀM − I‖²_F
//! ```
//!
//! The penalty is zero only when the directions are orthonormal, so it
//! constrains both their angles and their lengths. The intercept is not
//! penalized.

use alloc::string::String;
use alloc::vec::Vec;

use crate::dataset::{check_finite, AttributeSchema, PairedDataset};
use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_solve};
use crate::matrix::{dot, Matrix};

/// Columns with norm at or below this are treated as absent directions.
pub const DEGENERATE_NORM: f64 = 1e-12;

/// Default ridge added to the normal equations.
pub const DEFAULT_RIDGE_EPS: f64 = 1e-10;

/// How a map was produced.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainMeta {
    pub lambda: f64,
    pub iterations: usize,
    pub final_total_loss: f64,
    pub final_mse: f64,
    pub final_penalty: f64,
    pub seed: u64,
    /// `constant`, `one-cycle`, `closed-form` or `planted`.
    pub schedule: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    m: Matrix,
    b: Vec<f64>,
    schema: AttributeSchema,
    meta: Option<TrainMeta>,
}

impl LinearMap {
    pub fn new(m: Matrix, b: Vec<f64>, schema: AttributeSchema) -> Result<Self> {
        if m.rows() == 0 {
            return Err(Error::param("m", "latent dimension must be at least 1"));
        }
        if m.cols() != schema.len() {
            return Err(Error::Dimension {
                context: "direction columns vs attribute schema",
                expected: schema.len(),
                actual: m.cols(),
            });
        }
        if b.len() != schema.len() {
            return Err(Error::Dimension {
                context: "intercept length vs attribute schema",
                expected: schema.len(),
                actual: b.len(),
            });
        }
        check_finite(&m, "coefficient")?;
        if let Some(column) = b.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidEntry {
                matrix: "intercept",
                row: 0,
                column,
                value: b[column],
                reason: "not a finite number",
            });
        }
        Ok(LinearMap {
            m,
            b,
            schema,
            meta: None,
        })
    }

    pub fn with_meta(mut self, meta: TrainMeta) -> Self {
        self.meta = Some(meta);
        self
    }

    /// Coefficients, `D × A`.
    pub fn m(&self) -> &Matrix {
        &self.m
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    pub fn meta(&self) -> Option<&TrainMeta> {
        self.meta.as_ref()
    }

    /// Latent dimension `D`.
    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    /// Attribute count `A`.
    pub fn attrs(&self) -> usize {
        self.m.cols()
    }

    /// Direction of attribute `i` (column `i` of `M`).
    pub fn direction(&self, i: usize) -> Vec<f64> {
        self.m.column(i)
    }

    /// `MᵀM`.
    pub fn gram(&self) -> Matrix {
        self.m.gram()
    }

    /// `‖MᵀM − I‖²_F`.
    pub fn penalty(&self) -> f64 {
        orthogonality_penalty(&self.m.gram())
    }

    /// Prediction for a single latent row.
    pub fn predict_row(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.dim() {
            return Err(Error::Dimension {
                context: "latent vector length vs map dimension",
                expected: self.dim(),
                actual: z.len(),
            });
        }
        let mut out = self.b.clone();
        for (k, &zk) in z.iter().enumerate() {
            crate::matrix::axpy(&mut out, zk, self.m.row(k));
        }
        Ok(out)
    }
}

pub(crate) fn orthogonality_penalty(gram: &Matrix) -> f64 {
    let a = gram.rows();
    let mut s = 0.0;
    for i in 0..a {
        for j in 0..a {
            let d = gram[(i, j)] - if i == j { 1.0 } else { 0.0 };
            s += d * d;
        }
    }
    s
}

/// `z·M + b` for every row of `z`. Not clamped to `[0, 1]`.
pub fn predict(map: &LinearMap, z: &Matrix) -> Result<Matrix> {
    if z.cols() != map.dim() {
        return Err(Error::Dimension {
            context: "latent columns vs map dimension",
            expected: map.dim(),
            actual: z.cols(),
        });
    }
    let mut out = z.matmul(&map.m)?;
    for r in 0..out.rows() {
        for (v, b) in out.row_mut(r).iter_mut().zip(&map.b) {
            *v += b;
        }
    }
    Ok(out)
}

/// Components of the regularized objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown {
    pub total: f64,
    pub mse: f64,
    pub penalty: f64,
    pub lambda: f64,
}

impl LossBreakdown {
    pub(crate) fn new(mse: f64, penalty: f64, lambda: f64) -> Self {
        LossBreakdown {
            total: mse + lambda * penalty,
            mse,
            penalty,
            lambda,
        }
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda >= 0.0 {
        Ok(())
    } else {
        Err(Error::param(
            "lambda",
            alloc::format!("{lambda} is not a finite non-negative number"),
        ))
    }
}

fn check_compatible(map: &LinearMap, ds: &PairedDataset) -> Result<()> {
    if ds.dim() != map.dim() {
        return Err(Error::Dimension {
            context: "dataset latent dimension vs map dimension",
            expected: map.dim(),
            actual: ds.dim(),
        });
    }
    if ds.attrs() != map.attrs() {
        return Err(Error::Dimension {
            context: "dataset attribute count vs map attribute count",
            expected: map.attrs(),
            actual: ds.attrs(),
        });
    }
    Ok(())
}

fn residuals(map: &LinearMap, ds: &PairedDataset) -> Result<Matrix> {
    check_compatible(map, ds)?;
    let mut r = predict(map, ds.latents())?;
    for (v, y) in r.as_mut_slice().iter_mut().zip(ds.labels().as_slice()) {
        *v -= y;
    }
    Ok(r)
}

pub fn loss(map: &LinearMap, ds: &PairedDataset, lambda: f64) -> Result<LossBreakdown> {
    check_lambda(lambda)?;
    let r = residuals(map, ds)?;
    let mse = r.frobenius_sq() / (ds.len() * ds.attrs()) as f64;
    Ok(LossBreakdown::new(mse, map.penalty(), lambda))
}

/// Gradient of [`loss`]`.total` with respect to `M` and `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub dm: Matrix,
    pub db: Vec<f64>,
}

impl Gradient {
    pub fn max_abs(&self) -> f64 {
        self.db.iter().fold(self.dm.max_abs(), |m, v| m.max(v.abs()))
    }
}

/// `dM = 2/(N·A)·Zᵀ·R + 4λ·M·(MᵀM − I)` and `db = 2/(N·A)·Rᵀ·1`, with
/// `R = Z·M + 1·bᵀ − Y`.
pub fn gradient(map: &LinearMap, ds: &PairedDataset, lambda: f64) -> Result<Gradient> {
    check_lambda(lambda)?;
    let r = residuals(map, ds)?;
    let c = 2.0 / (ds.len() * ds.attrs()) as f64;
    let mut dm = ds.latents().t_matmul(&r)?.scaled(c);
    if lambda != 0.0 {
        add_penalty_gradient(&mut dm, &map.m, &map.m.gram(), lambda);
    }
    let db = r.column_sums().into_iter().map(|v| c * v).collect();
    Ok(Gradient { dm, db })
}

/// `dm += 4λ·M·(G − I)` where `G = MᵀM`.
pub(crate) fn add_penalty_gradient(dm: &mut Matrix, m: &Matrix, gram: &Matrix, lambda: f64) {
    let mut dev = gram.clone();
    for i in 0..dev.rows() {
        dev[(i, i)] -= 1.0;
    }
    let mut pen = m.matmul(&dev).expect("M·(MᵀM − I) shapes agree");
    for (g, p) in dm.as_mut_slice().iter_mut().zip(pen.as_mut_slice()) {
        *g += 4.0 * lambda * *p;
    }
}

/// Unregularized least squares via the normal equations of `[Z | 1]`, with
/// `ridge_eps·I` added to the Gram matrix.
///
/// With `ridge_eps = 0` a numerically rank-deficient system (for instance
/// `N < D + 1`) is reported as [`Error::Singular`].
pub fn fit_closed_form(ds: &PairedDataset, ridge_eps: f64) -> Result<LinearMap> {
    if !(ridge_eps.is_finite() && ridge_eps >= 0.0) {
        return Err(Error::param(
            "ridge_eps",
            alloc::format!("{ridge_eps} is not a finite non-negative number"),
        ));
    }
    let (n, d) = (ds.len(), ds.dim());
    let z = ds.latents();
    let y = ds.labels();

    let zz = z.gram();
    let zsum = z.column_sums();
    let mut h = Matrix::zeros(d + 1, d + 1);
    for i in 0..d {
        h.row_mut(i)[..d].copy_from_slice(zz.row(i));
        h[(i, d)] = zsum[i];
        h[(d, i)] = zsum[i];
    }
    h[(d, d)] = n as f64;
    let max_diag = (0..=d).fold(0.0f64, |m, i| m.max(h[(i, i)]));
    for i in 0..=d {
        h[(i, i)] += ridge_eps;
    }

    let zy = z.t_matmul(y)?;
    let mut rhs = Matrix::zeros(d + 1, ds.attrs());
    for i in 0..d {
        rhs.row_mut(i).copy_from_slice(zy.row(i));
    }
    rhs.row_mut(d).copy_from_slice(&y.column_sums());

    let min_pivot = if ridge_eps > 0.0 {
        0.0
    } else {
        (d + 1) as f64 * f64::EPSILON * max_diag
    };
    let l = cholesky(&h, min_pivot)?;
    let w = cholesky_solve(&l, &rhs)?;

    let m = Matrix::from_vec(d, ds.attrs(), w.as_slice()[..d * ds.attrs()].to_vec())?;
    let b = w.row(d).to_vec();
    let map = LinearMap::new(m, b, ds.schema().clone())?;
    let fit = loss(&map, ds, 0.0)?;
    Ok(map.with_meta(TrainMeta {
        lambda: 0.0,
        iterations: 0,
        final_total_loss: fit.total,
        final_mse: fit.mse,
        final_penalty: fit.penalty,
        seed: 0,
        schedule: "closed-form".into(),
    }))
}

/// Pairwise cosine similarity of direction columns.
///
/// These are similarities (1 for parallel directions), not distances.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineReport {
    c: Matrix,
    schema: AttributeSchema,
    degenerate: Vec<usize>,
}

impl CosineReport {
    /// The `A × A` similarity matrix.
    pub fn matrix(&self) -> &Matrix {
        &self.c
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.c[(i, j)]
    }

    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    /// Indices of columns with norm ≤ [`DEGENERATE_NORM`]; their rows and
    /// columns are zero apart from a unit diagonal.
    pub fn degenerate(&self) -> &[usize] {
        &self.degenerate
    }

    fn off_diagonal(&self) -> impl Iterator<Item = f64> + '_ {
        let a = self.c.rows();
        (0..a).flat_map(move |i| (0..a).filter(move |&j| j != i).map(move |j| self.c[(i, j)]))
    }

    /// Mean of `|c[i][j]|` over `i ≠ j`; zero when `A = 1`.
    pub fn mean_abs_off_diagonal(&self) -> f64 {
        let a = self.c.rows();
        if a < 2 {
            return 0.0;
        }
        self.off_diagonal().map(f64::abs).sum::<f64>() / (a * (a - 1)) as f64
    }

    pub fn max_abs_off_diagonal(&self) -> f64 {
        self.off_diagonal().fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub fn cosine_matrix(map: &LinearMap) -> CosineReport {
    let cols = map.m.columns();
    let norms: Vec<f64> = cols.iter().map(|c| libm::sqrt(dot(c, c))).collect();
    let degenerate: Vec<usize> = (0..cols.len()).filter(|&i| !(norms[i] > DEGENERATE_NORM)).collect();
    let a = cols.len();
    let mut c = Matrix::identity(a);
    for i in 0..a {
        for j in i + 1..a {
            let v = if degenerate.contains(&i) || degenerate.contains(&j) {
                0.0
            } else {
                (dot(&cols[i], &cols[j]) / (norms[i] * norms[j])).clamp(-1.0, 1.0)
            };
            c[(i, j)] = v;
            c[(j, i)] = v;
        }
    }
    CosineReport {
        c,
        schema: map.schema.clone(),
        degenerate,
    }
}

/// The `k` attributes whose directions are most aligned (by `|cosine|`) with
/// `attr`, excluding `attr` itself; ties keep schema order. At most `A − 1`
/// entries are returned.
pub fn top_correlated(map: &LinearMap, attr: &str, k: usize) -> Result<Vec<(String, f64)>> {
    let i = map.schema.index_of(attr)?;
    if k == 0 || k > map.attrs() {
        return Err(Error::param("k", alloc::format!("{k} is not in 1..={}", map.attrs())));
    }
    let report = cosine_matrix(map);
    let mut ranked: Vec<(usize, f64)> = (0..map.attrs())
        .filter(|&j| j != i)
        .map(|j| (j, report.get(i, j)))
        .collect();
    ranked.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()));
    Ok(ranked
        .into_iter()
        .take(k)
        .map(|(j, c)| (map.schema.name(j).into(), c))
        .collect())
}
