//! Damped Gauss-Newton (Levenberg-Marquardt) for small models with analytic
//! Jacobians.

use nalgebra::{DMatrix, DVector};

pub(crate) trait CurveModel {
    fn n_params(&self) -> usize;
    fn value(&self, x: f64, p: &[f64]) -> f64;
    /// ∂f/∂p at `x`, written into `row`.
    fn gradient(&self, x: f64, p: &[f64], row: &mut [f64]);
}

pub(crate) const MAX_ITERATIONS: usize = 200;
const LAMBDA_START: f64 = 1e-3;
const LAMBDA_MAX: f64 = 1e16;
pub(crate) const GRADIENT_TOL: f64 = 1e-8;
const STEP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Stop {
    Gradient,
    SmallStep,
    NoDescent,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub params: Vec<f64>,
    /// `s² (JᵀJ)⁻¹`; `None` when JᵀJ is singular.
    pub covariance: Option<DMatrix<f64>>,
    /// ½ Σ r².
    pub objective: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub stop: Stop,
    /// Ratio of smallest to largest singular value of the column-scaled
    /// Jacobian at the optimum.
    pub inverse_condition: f64,
}

impl Outcome {
    pub fn converged(&self) -> bool {
        self.gradient_norm <= GRADIENT_TOL * (1.0 + self.objective)
    }
}

struct Linearisation {
    jtj: DMatrix<f64>,
    jtr: DVector<f64>,
    jac: DMatrix<f64>,
    objective: f64,
}

fn objective<M: CurveModel>(model: &M, xs: &[f64], ys: &[f64], p: &[f64]) -> f64 {
    0.5 * xs.iter().zip(ys).map(|(&x, &y)| (y - model.value(x, p)).powi(2)).sum::<f64>()
}

fn linearise<M: CurveModel>(model: &M, xs: &[f64], ys: &[f64], p: &[f64]) -> Linearisation {
    let n = xs.len();
    let k = model.n_params();
    let mut jac = DMatrix::zeros(n, k);
    let mut res = DVector::zeros(n);
    let mut row = vec![0.0; k];
    for (i, (&x, &y)) in xs.iter().zip(ys).enumerate() {
        model.gradient(x, p, &mut row);
        for (j, v) in row.iter().enumerate() {
            jac[(i, j)] = *v;
        }
        res[i] = y - model.value(x, p);
    }
    let jtj = jac.transpose() * &jac;
    let jtr = jac.transpose() * &res;
    Linearisation { jtj, jtr, jac, objective: 0.5 * res.norm_squared() }
}

fn inverse_condition(jac: &DMatrix<f64>) -> f64 {
    let mut scaled = jac.clone();
    for mut col in scaled.column_iter_mut() {
        let n = col.norm();
        if n > 0.0 {
            col /= n;
        }
    }
    let sv = scaled.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if max > 0.0 {
        min / max
    } else {
        0.0
    }
}

/// Minimises ½ Σ (y − f(x; p))² starting from `p0`.
pub(crate) fn minimise<M: CurveModel>(model: &M, xs: &[f64], ys: &[f64], p0: &[f64]) -> Outcome {
    let k = model.n_params();
    let mut p = p0.to_vec();
    let mut lambda = LAMBDA_START;
    let mut lin = linearise(model, xs, ys, &p);
    let mut iterations = 0;
    let mut stop = Stop::MaxIterations;

    while iterations < MAX_ITERATIONS {
        if lin.jtr.norm() <= GRADIENT_TOL * (1.0 + lin.objective) {
            stop = Stop::Gradient;
            break;
        }
        iterations += 1;
        let mut accepted = None;
        while lambda <= LAMBDA_MAX {
            let mut a = lin.jtj.clone();
            for j in 0..k {
                a[(j, j)] += lambda * lin.jtj[(j, j)].max(1e-300);
            }
            let step = match a.cholesky() {
                Some(ch) => ch.solve(&lin.jtr),
                None => {
                    lambda *= 10.0;
                    continue;
                }
            };
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let obj = objective(model, xs, ys, &trial);
            if obj.is_finite() && obj < lin.objective {
                lambda = (lambda / 10.0).max(1e-12);
                accepted = Some((trial, step.norm()));
                break;
            }
            // Near the optimum the decrease can drop below the resolution of
            // the objective; take the step if it still shrinks the gradient.
            if obj.is_finite() && obj <= lin.objective * (1.0 + 1e-12) {
                let next = linearise(model, xs, ys, &trial);
                if next.jtr.norm() < 0.5 * lin.jtr.norm() {
                    accepted = Some((trial, step.norm()));
                    break;
                }
            }
            lambda *= 10.0;
        }
        let Some((trial, step_norm)) = accepted else {
            stop = Stop::NoDescent;
            break;
        };
        let p_norm = trial.iter().map(|v| v * v).sum::<f64>().sqrt();
        p = trial;
        lin = linearise(model, xs, ys, &p);
        if step_norm < STEP_TOL * (1.0 + p_norm) {
            stop = Stop::SmallStep;
            break;
        }
    }

    let dof = xs.len() as f64 - k as f64;
    let s2 = if dof > 0.0 { 2.0 * lin.objective / dof } else { f64::NAN };
    let covariance = lin.jtj.clone().try_inverse().map(|inv| inv * s2);
    Outcome {
        params: p,
        covariance,
        objective: lin.objective,
        gradient_norm: lin.jtr.norm(),
        iterations,
        stop,
        inverse_condition: inverse_condition(&lin.jac),
    }
}
