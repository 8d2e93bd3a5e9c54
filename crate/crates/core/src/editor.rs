//! Latent edits along attribute directions and how much they leak.
//!
//! Moving `z` to `z + α·mᵢ` changes every predicted attribute by
//! `Δyⱼ = α·mⱼᵀmᵢ`, so off-target changes vanish exactly when `mᵢ` is
//! orthogonal to the other directions. Nothing forces `Δy` to be positive.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linmap::{LinearMap, DEGENERATE_NORM};
use crate::matrix::{dot, Matrix};

#[derive(Debug, Clone, PartialEq)]
pub struct EditResult {
    pub z_prime: Vec<f64>,
    /// Predicted change of every attribute, `α·Mᵀmᵢ`.
    pub delta_y: Vec<f64>,
    pub attr_index: usize,
    pub alpha: f64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::param("alpha", alloc::format!("{alpha} is not finite")))
    }
}

/// `α·Mᵀmᵢ`: the predicted change of every attribute for a unit latent move.
fn predicted_delta(map: &LinearMap, i: usize, alpha: f64) -> Vec<f64> {
    let target = map.direction(i);
    (0..map.attrs())
        .map(|j| alpha * dot(&map.direction(j), &target))
        .collect()
}

/// `z' = z + α·mᵢ`, with the exact predicted change of every attribute.
pub fn edit_latent(map: &LinearMap, z: &[f64], attr: &str, alpha: f64) -> Result<EditResult> {
    let i = map.schema().index_of(attr)?;
    check_alpha(alpha)?;
    if z.len() != map.dim() {
        return Err(Error::Dimension {
            context: "latent vector length vs map dimension",
            expected: map.dim(),
            actual: z.len(),
        });
    }
    if let Some(column) = z.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidEntry {
            matrix: "latent",
            row: 0,
            column,
            value: z[column],
            reason: "not a finite number",
        });
    }
    let mut z_prime = z.to_vec();
    shift(&mut z_prime, map, i, alpha);
    Ok(EditResult {
        z_prime,
        delta_y: predicted_delta(map, i, alpha),
        attr_index: i,
        alpha,
    })
}

fn shift(z: &mut [f64], map: &LinearMap, i: usize, alpha: f64) {
    for (k, v) in z.iter_mut().enumerate() {
        *v += alpha * map.m()[(k, i)];
    }
}

/// [`edit_latent`] applied to every row of `z`.
pub fn edit_batch(map: &LinearMap, z: &Matrix, attr: &str, alpha: f64) -> Result<Matrix> {
    let i = map.schema().index_of(attr)?;
    check_alpha(alpha)?;
    if z.cols() != map.dim() {
        return Err(Error::Dimension {
            context: "latent columns vs map dimension",
            expected: map.dim(),
            actual: z.cols(),
        });
    }
    crate::dataset::check_finite(z, "latent")?;
    let mut out = z.clone();
    for r in 0..out.rows() {
        shift(out.row_mut(r), map, i, alpha);
    }
    Ok(out)
}

/// Worst off-target change per unit of on-target change:
/// `max_{j≠i} |mⱼᵀmᵢ| / mᵢᵀmᵢ`. Independent of the edit strength.
pub fn leakage(map: &LinearMap, attr: &str) -> Result<f64> {
    let i = map.schema().index_of(attr)?;
    let target = map.direction(i);
    let own = dot(&target, &target);
    if !(libm::sqrt(own) > DEGENERATE_NORM) {
        return Err(Error::DegenerateColumn { attribute: attr.into() });
    }
    Ok((0..map.attrs())
        .filter(|&j| j != i)
        .map(|j| libm::fabs(dot(&map.direction(j), &target)) / own)
        .fold(0.0, f64::max))
}

/// One attribute's scores before and after the two edits.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub attribute: String,
    pub original: f64,
    pub tfm_no_reg: f64,
    pub abs_diff_no_reg: f64,
    pub tfm_reg: f64,
    pub abs_diff_reg: f64,
}

/// Side-by-side effect of editing one attribute with an unregularized and a
/// regularized map, rows sorted by `abs_diff_no_reg` descending.
#[derive(Debug, Clone, PartialEq)]
pub struct DisentanglementReport {
    /// Edited attribute.
    pub attribute: String,
    /// Edit strength along the unregularized direction.
    pub alpha: f64,
    /// Edit strength along the regularized direction, chosen so both edits
    /// move the edited attribute by the same predicted amount.
    pub alpha_reg: f64,
    pub rows: Vec<ReportRow>,
}

impl DisentanglementReport {
    /// `Σ abs_diff_no_reg` over all attributes except the edited one.
    pub fn off_target_no_reg(&self) -> f64 {
        self.off_target(|r| r.abs_diff_no_reg)
    }

    /// `Σ abs_diff_reg` over all attributes except the edited one.
    pub fn off_target_reg(&self) -> f64 {
        self.off_target(|r| r.abs_diff_reg)
    }

    fn off_target(&self, f: impl Fn(&ReportRow) -> f64) -> f64 {
        self.rows.iter().filter(|r| r.attribute != self.attribute).map(f).sum()
    }

    /// Scores clamped to `[0, 1]` for display, with the differences
    /// recomputed from the clamped scores.
    pub fn clamped(&self) -> DisentanglementReport {
        let c = |v: f64| v.clamp(0.0, 1.0);
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let (o, n, g) = (c(r.original), c(r.tfm_no_reg), c(r.tfm_reg));
                ReportRow {
                    attribute: r.attribute.clone(),
                    original: o,
                    tfm_no_reg: n,
                    abs_diff_no_reg: libm::fabs(n - o),
                    tfm_reg: g,
                    abs_diff_reg: libm::fabs(g - o),
                }
            })
            .collect();
        DisentanglementReport { rows, ..self.clone() }
    }
}

/// Edits `z` along `attr` with both maps and tabulates every attribute.
///
/// `original` is the unregularized prediction at `z`. Each edited column is
/// `original` plus the change the respective map predicts for its own edit,
/// so the two columns differ only through the edit directions. The
/// regularized edit strength is rescaled so that both maps predict the same
/// change of `attr` itself.
pub fn compare_maps(
    map_no_reg: &LinearMap,
    map_reg: &LinearMap,
    z: &[f64],
    attr: &str,
    alpha: f64,
) -> Result<DisentanglementReport> {
    if map_no_reg.schema() != map_reg.schema() {
        return Err(Error::Schema("the two maps describe different attribute lists".into()));
    }
    if map_no_reg.dim() != map_reg.dim() {
        return Err(Error::Dimension {
            context: "latent dimension of the two maps",
            expected: map_no_reg.dim(),
            actual: map_reg.dim(),
        });
    }
    let i = map_no_reg.schema().index_of(attr)?;
    let on_target = |map: &LinearMap| {
        let w = map.direction(i);
        dot(&w, &w)
    };
    let reg_norm = on_target(map_reg);
    if !(libm::sqrt(reg_norm) > DEGENERATE_NORM) {
        return Err(Error::DegenerateColumn { attribute: attr.into() });
    }
    let alpha_reg = alpha * (on_target(map_no_reg) / reg_norm);

    let original = map_no_reg.predict_row(z)?;
    let shifted = |map: &LinearMap, a: f64| -> Result<Vec<f64>> {
        let edit = edit_latent(map, z, attr, a)?;
        let before = map.predict_row(z)?;
        let after = map.predict_row(&edit.z_prime)?;
        Ok(original
            .iter()
            .zip(after.iter().zip(&before))
            .map(|(o, (p1, p0))| o + (p1 - p0))
            .collect())
    };
    let tfm_no_reg = shifted(map_no_reg, alpha)?;
    let tfm_reg = shifted(map_reg, alpha_reg)?;

    let mut rows: Vec<ReportRow> = (0..map_no_reg.attrs())
        .map(|j| ReportRow {
            attribute: map_no_reg.schema().name(j).into(),
            original: original[j],
            tfm_no_reg: tfm_no_reg[j],
            abs_diff_no_reg: libm::fabs(tfm_no_reg[j] - original[j]),
            tfm_reg: tfm_reg[j],
            abs_diff_reg: libm::fabs(tfm_reg[j] - original[j]),
        })
        .collect();
    rows.sort_by(|a, b| b.abs_diff_no_reg.total_cmp(&a.abs_diff_no_reg));
    Ok(DisentanglementReport {
        attribute: attr.into(),
        alpha,
        alpha_reg,
        rows,
    })
}
