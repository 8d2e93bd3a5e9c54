//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Everything runs on seeded synthetic data. The benchmark `B` is
//! `synth(D=64, A=10, N=2000, rho=0.7, sigma=0.05, linear, seed=42)`.

// `!(x < tol)` so that NaN fails.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use latentmap::model::to_json;
use latentmap::{load_dataset, save_model};
use latentmap_core::dataset::{PLANTED_INTERCEPT, PLANTED_SCALE};
use latentmap_core::rng::{seeded, standard_normal, Stream};
use latentmap_core::{
    compare_maps, cosine_matrix, edit_latent, fit, fit_closed_form, grad_check, one_cycle, planted_directions,
    sample_latents, synth_ground_truth, AttributeSchema, LinearMap, Link, Matrix, PairedDataset, SyntheticSpec,
    TrainConfig,
};

const GRAD_TOL: f64 = 1e-5;
const OLS_TOL: f64 = 1e-5;
const EDIT_TOL: f64 = 1e-10;
const COSINE_RATIO: f64 = 0.5;
const LEAK_RATIO: f64 = 0.5;
const SCHEDULE_TOL: f64 = 1e-9;

type Outcome = Result<String, String>;

fn benchmark() -> PairedDataset {
    let spec = SyntheticSpec {
        d: 64,
        a: 10,
        n: 2000,
        rho: 0.7,
        noise_sigma: 0.05,
        link: Link::Linear,
        seed: 42,
    };
    synth_ground_truth(&spec).unwrap().0
}

/// Learning rate per penalty weight. A plain step is stable below roughly
/// `2/(8λ)`, so λ=8 needs less than the default 0.05.
fn lr_for(lambda: f64) -> f64 {
    if lambda > 4.0 {
        0.02
    } else {
        TrainConfig::default().lr_max
    }
}

fn fit_b(ds: &PairedDataset, lambda: f64) -> Result<LinearMap, String> {
    let cfg = TrainConfig {
        lambda,
        lr_max: lr_for(lambda),
        ..TrainConfig::default()
    };
    let (map, report) = fit(ds, &cfg).map_err(|e| format!("lambda {lambda}: {e}"))?;
    if !report.converged {
        return Err(format!(
            "lambda {lambda}: no convergence in {} iterations",
            report.iterations_run
        ));
    }
    Ok(map)
}

fn random_instance(seed: u64) -> (PairedDataset, LinearMap) {
    let d = 6 + (seed as usize * 7) % 15;
    let a = 1 + (seed as usize) % 6;
    let n = 20 + (seed as usize * 13) % 31;
    let spec = SyntheticSpec {
        d,
        a: a.min(d),
        n,
        rho: 0.3,
        noise_sigma: 0.05,
        link: Link::Sigmoid,
        seed,
    };
    let (ds, _) = synth_ground_truth(&spec).unwrap();
    let mut rng = seeded(seed, Stream::Init);
    let m = Matrix::from_fn(d, spec.a, |_, _| 0.5 * standard_normal(&mut rng));
    let b = (0..spec.a).map(|_| 0.5 + 0.1 * standard_normal(&mut rng)).collect();
    let map = LinearMap::new(m, b, AttributeSchema::numbered(spec.a).unwrap()).unwrap();
    (ds, map)
}

fn gradient_correctness() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..10 {
        let (ds, map) = random_instance(seed);
        for lambda in [0.0, 2.0] {
            let err = grad_check(&ds, &map, lambda, 1e-5).map_err(|e| e.to_string())?;
            if !(err < GRAD_TOL) {
                return Err(format!("seed {seed}, lambda {lambda}: relative error {err:.2e}"));
            }
            worst = worst.max(err);
        }
    }
    Ok(format!(
        "worst relative error {worst:.2e} over 10 instances x lambda {{0, 2}}"
    ))
}

fn oracle_equivalence(ds: &PairedDataset, noreg: &LinearMap) -> Outcome {
    let ols = fit_closed_form(ds, 1e-10).map_err(|e| e.to_string())?;
    let dm = noreg.m().max_abs_diff(ols.m());
    let db = noreg
        .b()
        .iter()
        .zip(ols.b())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let diff = dm.max(db);
    if diff < OLS_TOL {
        Ok(format!("max abs coefficient difference {diff:.2e}"))
    } else {
        Err(format!("max abs coefficient difference {diff:.2e} >= {OLS_TOL:e}"))
    }
}

fn edit_identity(map: &LinearMap) -> Outcome {
    let mut rng = seeded(7, Stream::Init);
    let z = sample_latents(100, map.dim(), 7).unwrap();
    let gram = map.gram();
    let mut worst: f64 = 0.0;
    for (k, row) in z.row_iter().enumerate() {
        let i = k % map.attrs();
        let alpha = 3.0 * standard_normal(&mut rng);
        let name = map.schema().name(i);
        let e = edit_latent(map, row, name, alpha).map_err(|e| e.to_string())?;
        let before = map.predict_row(row).unwrap();
        let after = map.predict_row(&e.z_prime).unwrap();
        for j in 0..map.attrs() {
            let err = ((after[j] - before[j]) - alpha * gram[(j, i)]).abs();
            if !(err < EDIT_TOL) {
                return Err(format!("edit {k} ({name}, alpha {alpha:.3}): error {err:.2e}"));
            }
            worst = worst.max(err);
        }
    }
    Ok(format!("worst error {worst:.2e} over 100 edits"))
}

fn disentanglement(noreg: &LinearMap, regs: &[(f64, LinearMap)]) -> Outcome {
    let base_cos = cosine_matrix(noreg).mean_abs_off_diagonal();
    let base_pen = noreg.penalty();
    let mut parts = vec![format!("lambda 0: mean|cos| {base_cos:.4}, penalty {base_pen:.4}")];
    let mut failed = false;
    for (lambda, map) in regs {
        let cos = cosine_matrix(map).mean_abs_off_diagonal();
        let pen = map.penalty();
        failed |= !(cos <= COSINE_RATIO * base_cos && pen < base_pen);
        parts.push(format!("lambda {lambda}: {cos:.4}, {pen:.4}"));
    }
    let text = parts.join("; ");
    if failed {
        Err(text)
    } else {
        Ok(text)
    }
}

/// Off-target |Δy| summed over attributes and edits, regularized over
/// unregularized, with alpha-matched edits.
fn leak_ratio(no_reg: &LinearMap, reg: &LinearMap, z: &[f64]) -> Result<f64, String> {
    let (mut a, mut b) = (0.0, 0.0);
    for name in no_reg.schema().names() {
        let r = compare_maps(no_reg, reg, z, name, 1.0).map_err(|e| e.to_string())?;
        a += r.off_target_no_reg();
        b += r.off_target_reg();
    }
    Ok(b / a)
}

fn leakage_reduction(ds: &PairedDataset, noreg: &LinearMap, reg: &LinearMap) -> Outcome {
    let z = ds.latents().row(0);
    let fitted = leak_ratio(noreg, reg, z)?;
    // Oracle: the planted correlated map against its orthogonalized twin.
    let (planted, orthogonal) = planted_pair(ds)?;
    let oracle = leak_ratio(&planted, &orthogonal, z)?;
    let text = format!("ratio {fitted:.4} (threshold {LEAK_RATIO}, planted oracle {oracle:.1e})");
    if fitted <= LEAK_RATIO && oracle <= LEAK_RATIO {
        Ok(text)
    } else {
        Err(text)
    }
}

fn planted_pair(ds: &PairedDataset) -> Result<(LinearMap, LinearMap), String> {
    let make = |rho| {
        let m = planted_directions(ds.dim(), ds.attrs(), rho, 42).map_err(|e| e.to_string())?;
        let b = vec![PLANTED_INTERCEPT; ds.attrs()];
        LinearMap::new(m.scaled(PLANTED_SCALE), b, ds.schema().clone()).map_err(|e| e.to_string())
    };
    Ok((make(0.7)?, make(0.0)?))
}

fn one_cycle_shape() -> Outcome {
    let (lr_max, div, pct) = (0.05, 25.0, 0.3);
    let mut worst: f64 = 0.0;
    for total in [10, 97, 1000, 50_000] {
        let peak = (pct * total as f64).floor() as usize;
        let checks = [(0, lr_max / div), (peak, lr_max), (total - 1, lr_max / (div * 100.0))];
        for (step, want) in checks {
            let got = one_cycle(step, total, lr_max, div, pct);
            if !((got - want).abs() < SCHEDULE_TOL) {
                return Err(format!("total {total}, step {step}: {got} != {want}"));
            }
        }
        let bound = 2.0 * lr_max / total as f64 + lr_max * std::f64::consts::PI / total as f64;
        for step in 1..total {
            let jump = (one_cycle(step, total, lr_max, div, pct) - one_cycle(step - 1, total, lr_max, div, pct)).abs();
            if jump > bound {
                return Err(format!("total {total}, step {step}: jump {jump:.3e} > {bound:.3e}"));
            }
            worst = worst.max(jump / bound);
        }
    }
    Ok(format!("endpoints exact; largest jump {:.0}% of bound", 100.0 * worst))
}

/// Synthesizes the full-scale dataset through the CLI, then fits the
/// regularized map. Returns the model file contents and the synthesized
/// files for the determinism check.
fn full_scale(dir: &Path) -> Result<(String, Vec<Vec<u8>>, String), String> {
    let start = Instant::now();
    let out = dir.to_str().unwrap();
    let args = [
        "latentmap",
        "--quiet",
        "--seed",
        "42",
        "synth",
        "--dim",
        "512",
        "--attrs",
        "40",
        "--n",
        "3000",
        "--rho",
        "0.6",
        "--sigma",
        "0.05",
        "--out",
        out,
    ];
    let (mut so, mut se) = (Vec::new(), Vec::new());
    let code = latentmap::cli::run(args, &mut so, &mut se);
    if code != 0 {
        return Err(format!("synth exited {code}: {}", String::from_utf8_lossy(&se)));
    }
    let ds = load_dataset(&dir.join("latents.csv"), &dir.join("labels.csv")).map_err(|e| e.to_string())?;
    let (reg, report) = fit(&ds, &TrainConfig::default()).map_err(|e| e.to_string())?;
    let path = dir.join("reg.json");
    save_model(&path, &reg).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();

    let (noreg, _) = fit(
        &ds,
        &TrainConfig {
            lambda: 0.0,
            ..TrainConfig::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let (c_reg, c_free) = (
        cosine_matrix(&reg).mean_abs_off_diagonal(),
        cosine_matrix(&noreg).mean_abs_off_diagonal(),
    );
    let summary = format!(
        "converged={} after {} iterations, {elapsed:.1}s; mean|cos| {c_reg:.5} vs {c_free:.4}, penalty {:.2e} vs {:.2}",
        report.converged,
        report.iterations_run,
        reg.penalty(),
        noreg.penalty()
    );
    let ok = report.converged && elapsed < 300.0 && c_reg <= COSINE_RATIO * c_free && reg.penalty() < noreg.penalty();
    if !ok {
        return Err(summary);
    }
    let files = ["latents.csv", "labels.csv", "truth_model.json"]
        .iter()
        .map(|f| std::fs::read(dir.join(f)).unwrap())
        .collect();
    Ok((std::fs::read_to_string(&path).unwrap(), files, summary))
}

/// Model files from the benchmark fits used by criteria 2, 4 and 5.
fn benchmark_models() -> Result<Vec<String>, String> {
    let ds = benchmark();
    let mut files = vec![to_json(&fit_b(&ds, 0.0)?)];
    for lambda in [0.5, 2.0, 8.0] {
        files.push(to_json(&fit_b(&ds, lambda)?));
    }
    Ok(files)
}

struct Line {
    id: u32,
    name: &'static str,
    limit: f64,
}

fn report(line: Line, start: Instant, outcome: Outcome) -> bool {
    let secs = start.elapsed().as_secs_f64();
    let (pass, detail) = match outcome {
        Ok(d) if secs < line.limit => (true, d),
        Ok(d) => (false, format!("{d}; took {secs:.1}s, limit {}s", line.limit)),
        Err(d) => (false, d),
    };
    println!(
        "criterion {} {:<24} {}  [{secs:.1}s] {detail}",
        line.id,
        line.name,
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}

fn main() -> ExitCode {
    let mut all = true;

    let t = Instant::now();
    all &= report(
        Line {
            id: 1,
            name: "gradient correctness",
            limit: 10.0,
        },
        t,
        gradient_correctness(),
    );

    let t = Instant::now();
    let ds = benchmark();
    let noreg = fit_b(&ds, 0.0);
    let c2 = noreg.clone().and_then(|m| oracle_equivalence(&ds, &m));
    all &= report(
        Line {
            id: 2,
            name: "oracle equivalence",
            limit: 60.0,
        },
        t,
        c2,
    );

    let t = Instant::now();
    let c3 = noreg.clone().and_then(|m| edit_identity(&m));
    all &= report(
        Line {
            id: 3,
            name: "edit identity",
            limit: 5.0,
        },
        t,
        c3,
    );

    let t = Instant::now();
    let regs: Result<Vec<(f64, LinearMap)>, String> = [0.5, 2.0, 8.0]
        .into_iter()
        .map(|l| fit_b(&ds, l).map(|m| (l, m)))
        .collect();
    let c4 = noreg
        .clone()
        .and_then(|n| regs.clone().and_then(|r| disentanglement(&n, &r)));
    all &= report(
        Line {
            id: 4,
            name: "disentanglement",
            limit: 180.0,
        },
        t,
        c4,
    );

    let t = Instant::now();
    let c5 = noreg.and_then(|n| {
        let regs = regs?;
        leakage_reduction(&ds, &n, &regs[1].1)
    });
    all &= report(
        Line {
            id: 5,
            name: "leakage reduction",
            limit: 60.0,
        },
        t,
        c5,
    );

    let t = Instant::now();
    all &= report(
        Line {
            id: 6,
            name: "one-cycle shape",
            limit: 10.0,
        },
        t,
        one_cycle_shape(),
    );

    let t = Instant::now();
    let first = tempfile::tempdir().unwrap();
    let c7 = full_scale(first.path());
    all &= report(
        Line {
            id: 7,
            name: "full-scale smoke run",
            limit: 300.0,
        },
        t,
        c7.as_ref().map(|(_, _, s)| s.clone()).map_err(Clone::clone),
    );

    let t = Instant::now();
    let second = tempfile::tempdir().unwrap();
    let c8 = (|| {
        let a = benchmark_models()?;
        let b = benchmark_models()?;
        if a != b {
            return Err("benchmark model files differ between runs".to_string());
        }
        let (m1, f1, _) = c7.clone()?;
        let (m2, f2, _) = full_scale(second.path())?;
        if m1 != m2 || f1 != f2 {
            return Err("full-scale files differ between runs".to_string());
        }
        Ok(format!(
            "{} benchmark models and 4 full-scale files byte-identical",
            a.len()
        ))
    })();
    all &= report(
        Line {
            id: 8,
            name: "determinism",
            limit: 600.0,
        },
        t,
        c8,
    );

    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
