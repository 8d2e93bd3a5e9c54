//! Full-batch gradient descent on the regularized objective.
//!
//! The objective only depends on the data through `ZᵀZ`, `Zᵀ1`, `ZᵀY`, `Yᵀ1`
//! and `‖Y‖²`, so those are accumulated once and every iteration costs
//! `O(D²·A)` instead of `O(N·D·A)`.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::dataset::PairedDataset;
use crate::error::{Error, Result};
use crate::linalg;
use crate::linmap::{
    self, add_penalty_gradient, check_lambda, orthogonality_penalty, Gradient, LinearMap, LossBreakdown, TrainMeta,
};
use crate::matrix::{dot, Matrix};
use crate::rng::{seeded, standard_normal, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    Constant,
    /// Linear warm-up to `lr_max`, then cosine annealing.
    OneCycle,
}

impl Schedule {
    pub fn as_str(self) -> &'static str {
        match self {
            Schedule::Constant => "constant",
            Schedule::OneCycle => "one-cycle",
        }
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(Schedule::Constant),
            "one-cycle" | "one_cycle" => Ok(Schedule::OneCycle),
            other => Err(Error::param(
                "schedule",
                format!("`{other}` is not one of constant, one-cycle"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Orthogonality weight.
    pub lambda: f64,
    pub max_iters: usize,
    /// Stop once the relative change of the total loss drops below this.
    pub tol: f64,
    pub schedule: Schedule,
    /// Constant learning rate, or the one-cycle peak.
    pub lr_max: f64,
    /// One-cycle start rate is `lr_max / div`.
    pub div: f64,
    /// Fraction of the run spent warming up.
    pub pct_warm: f64,
    pub seed: u64,
    /// Initial coefficients are `N(0, (init_scale/√D)²)`.
    pub init_scale: f64,
    /// Heavy-ball coefficient in `[0, 1)`; zero is plain gradient descent.
    pub momentum: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lambda: crate::DEFAULT_LAMBDA,
            max_iters: 50_000,
            tol: 1e-10,
            schedule: Schedule::Constant,
            lr_max: 0.05,
            div: 25.0,
            pct_warm: 0.3,
            seed: 0,
            init_scale: 0.01,
            momentum: 0.995,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        check_lambda(self.lambda)?;
        let positive = |name, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(name, format!("{v} is not a finite positive number")))
            }
        };
        positive("tol", self.tol)?;
        positive("lr_max", self.lr_max)?;
        positive("init_scale", self.init_scale)?;
        if !(self.div.is_finite() && self.div > 1.0) {
            return Err(Error::param(
                "div",
                format!("{} is not a finite number above 1", self.div),
            ));
        }
        if !(self.pct_warm > 0.0 && self.pct_warm < 1.0) {
            return Err(Error::param("pct_warm", format!("{} is not in (0, 1)", self.pct_warm)));
        }
        if !(self.momentum >= 0.0 && self.momentum < 1.0) {
            return Err(Error::param("momentum", format!("{} is not in [0, 1)", self.momentum)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub iterations_run: usize,
    pub converged: bool,
    /// Loss at the initialization followed by the loss after every step.
    pub loss_trajectory: Vec<LossBreakdown>,
    /// Seconds; zero without the `std` feature.
    pub wall_time: f64,
}

impl FitReport {
    pub fn final_loss(&self) -> &LossBreakdown {
        self.loss_trajectory.last().expect("trajectory is never empty")
    }
}

/// Learning rate at `step` of a `total`-step one-cycle run.
///
/// Rises linearly from `lr_max/div` at step 0 to `lr_max` at step
/// `⌊pct_warm·total⌋`, then follows a half cosine down to
/// `lr_max/(div·100)` at step `total − 1`.
///
/// # Panics
///
/// If `step >= total`.
pub fn one_cycle(step: usize, total: usize, lr_max: f64, div: f64, pct_warm: f64) -> f64 {
    assert!(step < total, "step {step} outside a {total}-step schedule");
    let start = lr_max / div;
    let end = lr_max / (div * 100.0);
    let peak = libm::floor(pct_warm * total as f64) as usize;
    if step < peak {
        return start + (lr_max - start) * step as f64 / peak as f64;
    }
    let span = (total - 1).saturating_sub(peak);
    if span == 0 {
        return lr_max;
    }
    let t = (step - peak) as f64 / span as f64;
    end + (lr_max - end) * 0.5 * (1.0 + libm::cos(core::f64::consts::PI * t))
}

/// Second moments of a dataset, enough to evaluate the objective and its
/// gradient for any `(M, b)`.
pub(crate) struct Moments {
    /// Orthogonal `V` diagonalizing `ZᵀZ`; iterates live in coordinates `VᵀM`.
    basis: Matrix,
    spectrum: Vec<f64>,
    zsum: Vec<f64>,
    zy: Matrix,
    ysum: Vec<f64>,
    yy: f64,
    n: f64,
    /// `1/(N·A)`
    scale: f64,
}

impl Moments {
    pub(crate) fn new(ds: &PairedDataset) -> Result<Self> {
        let z = ds.latents();
        let y = ds.labels();
        let (spectrum, basis) = linalg::symmetric_eigen(&z.gram())?;
        let zsum = z.column_sums();
        let zsum = (0..basis.cols())
            .map(|j| (0..basis.rows()).map(|k| basis[(k, j)] * zsum[k]).sum())
            .collect();
        let zy = basis.t_matmul(&z.t_matmul(y)?)?;
        Ok(Moments {
            basis,
            spectrum,
            zsum,
            zy,
            ysum: y.column_sums(),
            yy: y.frobenius_sq(),
            n: ds.len() as f64,
            scale: 1.0 / (ds.len() * ds.attrs()) as f64,
        })
    }

    pub(crate) fn rotate_in(&self, m: &Matrix) -> Matrix {
        self.basis.t_matmul(m).expect("moment shapes agree")
    }

    pub(crate) fn rotate_out(&self, m: &Matrix) -> Matrix {
        self.basis.matmul(m).expect("moment shapes agree")
    }

    /// Loss and gradient at `(V·m, b)`, with the `M` gradient in basis
    /// coordinates.
    pub(crate) fn evaluate(&self, m: &Matrix, b: &[f64], lambda: f64) -> (LossBreakdown, Gradient) {
        let mut gm = m.clone();
        for (row, &e) in gm.as_mut_slice().chunks_exact_mut(m.cols()).zip(&self.spectrum) {
            row.iter_mut().for_each(|v| *v *= e);
        }
        let mz: Vec<f64> = (0..m.cols())
            .map(|j| (0..m.rows()).map(|k| m[(k, j)] * self.zsum[k]).sum())
            .collect();

        let quad = dot(m.as_slice(), gm.as_slice());
        let cross = dot(m.as_slice(), self.zy.as_slice());
        let sse = quad + 2.0 * dot(b, &mz) - 2.0 * cross + self.n * dot(b, b) - 2.0 * dot(b, &self.ysum) + self.yy;
        let mse = (self.scale * sse).max(0.0);

        let gram = m.gram();
        let penalty = orthogonality_penalty(&gram);

        let c = 2.0 * self.scale;
        let mut dm = gm;
        for (k, row) in dm.as_mut_slice().chunks_exact_mut(m.cols()).enumerate() {
            let zk = self.zsum[k];
            for (j, g) in row.iter_mut().enumerate() {
                *g = c * (*g + zk * b[j] - self.zy[(k, j)]);
            }
        }
        if lambda != 0.0 {
            add_penalty_gradient(&mut dm, m, &gram, lambda);
        }
        let db = (0..b.len())
            .map(|j| c * (mz[j] + self.n * b[j] - self.ysum[j]))
            .collect();
        (LossBreakdown::new(mse, penalty, lambda), Gradient { dm, db })
    }
}

struct Stopwatch {
    #[cfg(feature = "std")]
    start: std::time::Instant,
}

impl Stopwatch {
    fn start() -> Self {
        Stopwatch {
            #[cfg(feature = "std")]
            start: std::time::Instant::now(),
        }
    }

    fn seconds(&self) -> f64 {
        #[cfg(feature = "std")]
        {
            self.start.elapsed().as_secs_f64()
        }
        #[cfg(not(feature = "std"))]
        {
            0.0
        }
    }
}

/// `w += v` with `v ← μ·v − lr·g`.
fn advance(w: &mut [f64], velocity: &mut [f64], g: &[f64], lr: f64, momentum: f64) {
    for ((w, v), g) in w.iter_mut().zip(velocity.iter_mut()).zip(g) {
        *v = momentum * *v - lr * g;
        *w += *v;
    }
}

/// Fits a map by full-batch gradient descent with heavy-ball momentum.
///
/// `M` starts as seeded Gaussian noise and `b` at the per-attribute label
/// means. Runs until `max_iters` steps or until the relative change of the
/// total loss falls below `tol`.
///
/// A momentum step that would raise the loss is replaced by a plain gradient
/// step from the same point, so with a stable learning rate the trajectory
/// never increases. Iterates are computed in the eigenbasis of `ZᵀZ`, which
/// leaves them unchanged (up to rounding) and makes a step `O(D·A²)`.
pub fn fit(ds: &PairedDataset, cfg: &TrainConfig) -> Result<(LinearMap, FitReport)> {
    cfg.validate()?;
    let clock = Stopwatch::start();
    let (d, a) = (ds.dim(), ds.attrs());

    let mut rng = seeded(cfg.seed, Stream::Init);
    let sd = cfg.init_scale / libm::sqrt(d as f64);
    let m = Matrix::from_fn(d, a, |_, _| sd * standard_normal(&mut rng));
    let mut b: Vec<f64> = ds
        .labels()
        .column_sums()
        .into_iter()
        .map(|s| s / ds.len() as f64)
        .collect();

    let moments = Moments::new(ds)?;
    let mut m = moments.rotate_in(&m);
    let (mut current, mut grad) = moments.evaluate(&m, &b, cfg.lambda);
    if !current.total.is_finite() {
        return Err(Error::Diverged { iteration: 0 });
    }
    let mut trajectory = alloc::vec![current];
    let mut iterations_run = 0;
    let mut converged = false;

    // Velocity of the heavy-ball update; stays zero for plain descent.
    let mut vm = Matrix::zeros(d, a);
    let mut vb = alloc::vec![0.0; a];
    for step in 0..cfg.max_iters {
        let lr = match cfg.schedule {
            Schedule::Constant => cfg.lr_max,
            Schedule::OneCycle => one_cycle(step, cfg.max_iters, cfg.lr_max, cfg.div, cfg.pct_warm),
        };
        let (mut next_m, mut next_b) = (m.clone(), b.clone());
        advance(
            next_m.as_mut_slice(),
            vm.as_mut_slice(),
            grad.dm.as_slice(),
            lr,
            cfg.momentum,
        );
        advance(&mut next_b, &mut vb, &grad.db, lr, cfg.momentum);
        let (mut next, mut next_grad) = moments.evaluate(&next_m, &next_b, cfg.lambda);
        if cfg.momentum > 0.0 && !(next.total <= current.total) {
            // Restart: drop the velocity and take a plain step instead.
            vm.as_mut_slice().iter_mut().for_each(|v| *v = 0.0);
            vb.iter_mut().for_each(|v| *v = 0.0);
            next_m.clone_from(&m);
            next_b.clone_from(&b);
            advance(next_m.as_mut_slice(), vm.as_mut_slice(), grad.dm.as_slice(), lr, 0.0);
            advance(&mut next_b, &mut vb, &grad.db, lr, 0.0);
            (next, next_grad) = moments.evaluate(&next_m, &next_b, cfg.lambda);
        }
        if !(next.total.is_finite() && next_m.is_finite()) {
            return Err(Error::Diverged { iteration: step + 1 });
        }
        m = next_m;
        b = next_b;
        trajectory.push(next);
        iterations_run = step + 1;
        let change = libm::fabs(next.total - current.total) / current.total.max(1e-15);
        current = next;
        grad = next_grad;
        if change < cfg.tol {
            converged = true;
            break;
        }
    }

    let map = LinearMap::new(moments.rotate_out(&m), b, ds.schema().clone())?;
    let final_loss = linmap::loss(&map, ds, cfg.lambda)?;
    let map = map.with_meta(TrainMeta {
        lambda: cfg.lambda,
        iterations: iterations_run,
        final_total_loss: final_loss.total,
        final_mse: final_loss.mse,
        final_penalty: final_loss.penalty,
        seed: cfg.seed,
        schedule: cfg.schedule.as_str().into(),
    });
    let report = FitReport {
        iterations_run,
        converged,
        loss_trajectory: trajectory,
        wall_time: clock.seconds(),
    };
    Ok((map, report))
}

/// Largest relative disagreement between [`linmap::gradient`] and central
/// finite differences of the total loss, over every entry of `M` and `b`.
///
/// Per entry the error is `|g − g_fd| / max(|g|, |g_fd|, 1e−8)`.
pub fn grad_check(ds: &PairedDataset, map: &LinearMap, lambda: f64, fd_step: f64) -> Result<f64> {
    if !(fd_step.is_finite() && fd_step > 0.0) {
        return Err(Error::param(
            "fd_step",
            format!("{fd_step} is not a finite positive number"),
        ));
    }
    let analytic = linmap::gradient(map, ds, lambda)?;
    let total_at = |m: &Matrix, b: &[f64]| -> Result<f64> {
        let probe = LinearMap::new(m.clone(), b.to_vec(), map.schema().clone())?;
        Ok(linmap::loss(&probe, ds, lambda)?.total)
    };
    let rel = |g: f64, fd: f64| libm::fabs(g - fd) / g.abs().max(fd.abs()).max(1e-8);

    let mut worst = 0.0f64;
    let mut m = map.m().clone();
    for idx in 0..m.as_slice().len() {
        let orig = m.as_slice()[idx];
        m.as_mut_slice()[idx] = orig + fd_step;
        let up = total_at(&m, map.b())?;
        m.as_mut_slice()[idx] = orig - fd_step;
        let down = total_at(&m, map.b())?;
        m.as_mut_slice()[idx] = orig;
        worst = worst.max(rel(analytic.dm.as_slice()[idx], (up - down) / (2.0 * fd_step)));
    }
    let mut b = map.b().to_vec();
    for j in 0..b.len() {
        let orig = b[j];
        b[j] = orig + fd_step;
        let up = total_at(map.m(), &b)?;
        b[j] = orig - fd_step;
        let down = total_at(map.m(), &b)?;
        b[j] = orig;
        worst = worst.max(rel(analytic.db[j], (up - down) / (2.0 * fd_step)));
    }
    Ok(worst)
}
