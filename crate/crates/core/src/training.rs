//! Regularized linear models over a random-feature map.
//!
//! The model is `f(x) = (1/√M) Σ_m θ_m φ(x, ωᵐ)`, i.e. `Zθ` with `Z` from
//! [`feature_matrix`]. The `‖θ‖∞ ≤ C/M` constraint of the constrained
//! formulation is replaced by the penalty `λ‖θ‖²`, so `C` has no runtime
//! counterpart.

use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Task};
use crate::error::{domain, Error, Result};
use crate::features::{feature_matrix, RandomFeature};
use crate::linalg::{cholesky, cholesky_solve};
use crate::RECORD_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    Squared,
    Logistic,
}

impl Loss {
    pub fn for_task(task: Task) -> Self {
        match task {
            Task::Regression => Loss::Squared,
            Task::Classification => Loss::Logistic,
        }
    }
}

/// `{10⁻⁵, 10⁻⁴, …, 10⁵}`.
pub fn default_reg_grid() -> Vec<f64> {
    (-5..=5).map(|e| 10f64.powi(e)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub loss: Loss,
    pub reg_grid: Vec<f64>,
    /// Gradient-norm tolerance for the logistic solver.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl TrainConfig {
    pub fn for_task(task: Task) -> Self {
        Self {
            loss: Loss::for_task(task),
            reg_grid: default_reg_grid(),
            tolerance: 1e-8,
            max_iterations: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reg_grid.is_empty() {
            return domain("regularization grid is empty");
        }
        if let Some(bad) = self.reg_grid.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return domain(format!("regularization values must be positive, got {bad}"));
        }
        if !(self.tolerance > 0.0) {
            return domain(format!("solver tolerance must be positive, got {}", self.tolerance));
        }
        if self.max_iterations == 0 {
            return domain("max_iterations must be at least 1");
        }
        Ok(())
    }
}

fn check_system(z: ArrayView2<f64>, y: ArrayView1<f64>, lambda: f64) -> Result<()> {
    if z.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: z.nrows(),
            found: y.len(),
        });
    }
    if z.nrows() == 0 || z.ncols() == 0 {
        return domain("empty design matrix");
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return domain(format!("regularization must be positive and finite, got {lambda}"));
    }
    if z.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return domain("non-finite value in design matrix or responses");
    }
    Ok(())
}

fn norm(v: ArrayView1<f64>) -> f64 {
    v.dot(&v).sqrt()
}

/// `argmin (1/N)‖Zθ - y‖² + λ‖θ‖²`, solving `(ZᵀZ + Nλ I) θ = Zᵀy` by
/// Cholesky with one step of iterative refinement.
pub fn fit_ridge(z: ArrayView2<f64>, y: ArrayView1<f64>, lambda: f64) -> Result<Array1<f64>> {
    check_system(z, y, lambda)?;
    let n = z.nrows() as f64;
    let mut a = z.t().dot(&z);
    a.diag_mut().mapv_inplace(|v| v + n * lambda);
    let rhs = z.t().dot(&y);
    let l = cholesky(&a)?;
    let mut theta = cholesky_solve(&l, rhs.view());
    let residual = &rhs - &a.dot(&theta);
    theta += &cholesky_solve(&l, residual.view());

    let residual = &rhs - &a.dot(&theta);
    let bound = 1e-8 * (1.0 + norm(rhs.view()));
    if norm(residual.view()) > bound {
        return domain(format!(
            "normal equations residual {:e} exceeds {:e}",
            norm(residual.view()),
            bound
        ));
    }
    Ok(theta)
}

/// `log(1 + e^{-m})` without overflow.
fn softplus_neg(m: f64) -> f64 {
    (-m).max(0.0) + (-m.abs()).exp().ln_1p()
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

fn logistic_objective(z: ArrayView2<f64>, y: ArrayView1<f64>, lambda: f64, theta: ArrayView1<f64>) -> f64 {
    let margins = &z.dot(&theta) * &y;
    margins.iter().map(|&m| softplus_neg(m)).sum::<f64>() / z.nrows() as f64 + lambda * theta.dot(&theta)
}

/// `f(θ + t·d) - f(θ)`, summed termwise so that it stays accurate when the
/// change is far below the rounding error of `f` itself.
fn logistic_change(
    margins: &Array1<f64>,
    step_margins: &Array1<f64>,
    lambda: f64,
    theta: ArrayView1<f64>,
    step: ArrayView1<f64>,
    t: f64,
) -> f64 {
    // log(1 + e^{-(m + dm)}) - log(1 + e^{-m}) = log1p(σ(-m) · expm1(-dm))
    let data: f64 = margins
        .iter()
        .zip(step_margins)
        .map(|(&mg, &dm)| (sigmoid(-mg) * (-t * dm).exp_m1()).ln_1p())
        .sum::<f64>()
        / margins.len() as f64;
    data + lambda * (2.0 * t * theta.dot(&step) + t * t * step.dot(&step))
}

/// Iterates of a logistic fit.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticFit {
    pub theta: Array1<f64>,
    /// Objective at the starting point and after each accepted step.
    pub objective_trace: Vec<f64>,
    pub grad_norm: f64,
}

/// Damped Newton on `(1/N) Σ log(1 + exp(-yⁿ zⁿᵀθ)) + λ‖θ‖²` from `θ = 0`.
/// Steps are accepted by Armijo backtracking, so the objective never
/// increases between iterates.
pub fn fit_logistic_traced(
    z: ArrayView2<f64>,
    y: ArrayView1<f64>,
    lambda: f64,
    cfg: &TrainConfig,
) -> Result<LogisticFit> {
    check_system(z, y, lambda)?;
    if let Some(i) = y.iter().position(|&v| v != 1.0 && v != -1.0) {
        return domain(format!("logistic labels must be ±1, got {} at row {i}", y[i]));
    }
    let n = z.nrows() as f64;
    let m = z.ncols();
    let mut theta = Array1::<f64>::zeros(m);
    let mut objective = logistic_objective(z, y, lambda, theta.view());
    let mut trace = vec![objective];

    for _ in 0..cfg.max_iterations {
        let margins = &z.dot(&theta) * &y;
        // d/dθ: -(1/N) Σ yⁿ σ(-mⁿ) zⁿ + 2λθ
        let weights: Array1<f64> = margins.iter().zip(y.iter()).map(|(&mg, &yn)| -yn * sigmoid(-mg)).collect();
        let grad = z.t().dot(&weights) / n + &(2.0 * lambda * &theta);
        let grad_norm = norm(grad.view());
        if grad_norm <= cfg.tolerance {
            return Ok(LogisticFit {
                theta,
                objective_trace: trace,
                grad_norm,
            });
        }

        let curvature: Array1<f64> = margins.mapv(|mg| {
            let s = sigmoid(mg);
            (s * (1.0 - s)).sqrt()
        });
        let scaled = &z * &curvature.insert_axis(Axis(1));
        let mut hessian = scaled.t().dot(&scaled) / n;
        hessian.diag_mut().mapv_inplace(|v| v + 2.0 * lambda);
        let l = cholesky(&hessian)?;
        let mut step = -cholesky_solve(&l, grad.view());
        let residual = -&grad - &hessian.dot(&step);
        step += &cholesky_solve(&l, residual.view());
        let slope = grad.dot(&step);

        let step_margins = &z.dot(&step) * &y;
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-12 {
            let change = logistic_change(&margins, &step_margins, lambda, theta.view(), step.view(), t);
            if change <= 1e-4 * t * slope {
                theta = &theta + &(t * &step);
                objective += change;
                trace.push(objective);
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // No representable decrease left along the Newton direction.
            return Err(Error::Convergence {
                iterations: trace.len() - 1,
                grad_norm,
            });
        }
    }

    let margins = &z.dot(&theta) * &y;
    let weights: Array1<f64> = margins.iter().zip(y.iter()).map(|(&mg, &yn)| -yn * sigmoid(-mg)).collect();
    let grad = z.t().dot(&weights) / n + &(2.0 * lambda * &theta);
    let grad_norm = norm(grad.view());
    if grad_norm <= cfg.tolerance {
        return Ok(LogisticFit {
            theta,
            objective_trace: trace,
            grad_norm,
        });
    }
    Err(Error::Convergence {
        iterations: cfg.max_iterations,
        grad_norm,
    })
}

pub fn fit_logistic(z: ArrayView2<f64>, y: ArrayView1<f64>, lambda: f64, cfg: &TrainConfig) -> Result<Array1<f64>> {
    Ok(fit_logistic_traced(z, y, lambda, cfg)?.theta)
}

/// Weights over a bound feature list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub theta: Vec<f64>,
    pub lambda_reg: f64,
    pub features: Vec<RandomFeature>,
    pub task: Task,
}

#[derive(Serialize, Deserialize)]
struct ModelRecord {
    version: u32,
    #[serde(flatten)]
    model: LinearModel,
}

impl LinearModel {
    pub fn new(theta: Vec<f64>, lambda_reg: f64, features: Vec<RandomFeature>, task: Task) -> Result<Self> {
        if theta.len() != features.len() {
            return Err(Error::DimensionMismatch {
                expected: features.len(),
                found: theta.len(),
            });
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return domain("model weights must be finite");
        }
        Ok(Self {
            theta,
            lambda_reg,
            features,
            task,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let rec = ModelRecord {
            version: RECORD_VERSION,
            model: self.clone(),
        };
        std::fs::write(path, serde_json::to_vec_pretty(&rec)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let rec: ModelRecord = serde_json::from_slice(&std::fs::read(path)?)?;
        if rec.version != RECORD_VERSION {
            return domain(format!("unsupported model record version {}", rec.version));
        }
        let m = rec.model;
        Self::new(m.theta, m.lambda_reg, m.features, m.task)
    }
}

/// Fits θ on a precomputed feature matrix.
pub fn fit_weights(z: ArrayView2<f64>, y: ArrayView1<f64>, lambda: f64, cfg: &TrainConfig) -> Result<Array1<f64>> {
    match cfg.loss {
        Loss::Squared => fit_ridge(z, y, lambda),
        Loss::Logistic => fit_logistic(z, y, lambda, cfg),
    }
}

pub fn fit_model(train: &Dataset, features: &[RandomFeature], lambda: f64, cfg: &TrainConfig) -> Result<LinearModel> {
    let z = feature_matrix(features, train.x())?;
    let theta = fit_weights(z.view(), train.y().view(), lambda, cfg)?;
    LinearModel::new(theta.to_vec(), lambda, features.to_vec(), train.task())
}

/// Raw scores `Zθ`.
pub fn decision_function(model: &LinearModel, x: &Array2<f64>) -> Result<Array1<f64>> {
    let z = feature_matrix(&model.features, x)?;
    Ok(z.dot(&Array1::from(model.theta.clone())))
}

pub(crate) fn to_labels(scores: Array1<f64>) -> Array1<f64> {
    scores.mapv(|s| if s >= 0.0 { 1.0 } else { -1.0 })
}

/// Regression: raw scores. Classification: `sign(score)` with `sign(0) = +1`.
pub fn predict(model: &LinearModel, x: &Array2<f64>) -> Result<Array1<f64>> {
    let scores = decision_function(model, x)?;
    Ok(match model.task {
        Task::Regression => scores,
        Task::Classification => to_labels(scores),
    })
}

/// Classification: `100 · misclassification rate`. Regression:
/// `100 · RMSE` (on whatever scale the responses are given, normally the
/// `[-1, 1]`-normalized one).
pub fn evaluate(pred: ArrayView1<f64>, y: ArrayView1<f64>, task: Task) -> Result<f64> {
    if pred.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            found: pred.len(),
        });
    }
    if y.is_empty() {
        return domain("cannot evaluate on zero rows");
    }
    let n = y.len() as f64;
    Ok(match task {
        Task::Classification => 100.0 * pred.iter().zip(y.iter()).filter(|(p, t)| p != t).count() as f64 / n,
        Task::Regression => 100.0 * (pred.iter().zip(y.iter()).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / n).sqrt(),
    })
}

/// Validation error of one grid value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub lambda_reg: f64,
    pub validation_error: f64,
}

/// Fits one model per grid value on `train` and returns the value with the
/// lowest validation error (ties: the smaller λ, then the earlier entry),
/// with its model and the full path.
pub fn tune_regularization_path(
    train: &Dataset,
    val: &Dataset,
    cfg: &TrainConfig,
    features: &[RandomFeature],
) -> Result<(f64, LinearModel, Vec<GridPoint>)> {
    cfg.validate()?;
    if train.task() != val.task() {
        return domain("train and validation sets have different tasks");
    }
    let z_train = feature_matrix(features, train.x())?;
    let z_val = feature_matrix(features, val.x())?;
    let fits: Vec<Result<(Array1<f64>, f64)>> = cfg
        .reg_grid
        .par_iter()
        .map(|&lambda| {
            let theta = fit_weights(z_train.view(), train.y().view(), lambda, cfg)?;
            let scores = z_val.dot(&theta);
            let pred = match train.task() {
                Task::Regression => scores,
                Task::Classification => to_labels(scores),
            };
            let err = evaluate(pred.view(), val.y().view(), val.task())?;
            Ok((theta, err))
        })
        .collect();

    let mut path = Vec::with_capacity(fits.len());
    let mut best: Option<(usize, f64)> = None;
    let mut thetas = Vec::with_capacity(fits.len());
    for (i, fit) in fits.into_iter().enumerate() {
        let (theta, err) = fit?;
        let lambda = cfg.reg_grid[i];
        path.push(GridPoint {
            lambda_reg: lambda,
            validation_error: err,
        });
        thetas.push(theta);
        let better = match best {
            None => true,
            Some((j, e)) => err < e || (err == e && lambda < cfg.reg_grid[j]),
        };
        if better {
            best = Some((i, err));
        }
    }
    let (i, _) = best.expect("grid is non-empty");
    let lambda = cfg.reg_grid[i];
    let model = LinearModel::new(thetas.swap_remove(i).to_vec(), lambda, features.to_vec(), train.task())?;
    Ok((lambda, model, path))
}

pub fn tune_regularization(
    train: &Dataset,
    val: &Dataset,
    cfg: &TrainConfig,
    features: &[RandomFeature],
) -> Result<(f64, LinearModel)> {
    let (lambda, model, _) = tune_regularization_path(train, val, cfg, features)?;
    Ok((lambda, model))
}
