//! Levenberg-Marquardt for small weighted least-squares problems.
//!
//! Positive parameters are optimised as logarithms so that they can never
//! cross zero; other parameters are optimised as is. The Jacobian is taken
//! by central differences in the internal coordinates.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 200;
pub const PARAM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Param {
    /// Strictly positive, optimised as ln p.
    Positive(f64),
    /// Unconstrained; `scale` is its typical magnitude for the convergence test.
    Free { value: f64, scale: f64 },
}

impl Param {
    fn to_internal(self) -> f64 {
        match self {
            Param::Positive(v) => v.ln(),
            Param::Free { value, .. } => value,
        }
    }

    fn to_external(self, theta: f64) -> f64 {
        match self {
            Param::Positive(_) => theta.exp(),
            Param::Free { .. } => theta,
        }
    }

    fn converged(self, theta: f64, step: f64) -> bool {
        match self {
            Param::Positive(_) => step.abs() < PARAM_TOLERANCE,
            Param::Free { scale, .. } => step.abs() < PARAM_TOLERANCE * theta.abs().max(scale),
        }
    }

    /// d(external)/d(internal) at `theta`.
    fn derivative(self, theta: f64) -> f64 {
        match self {
            Param::Positive(_) => theta.exp(),
            Param::Free { .. } => 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmResult {
    pub params: Vec<f64>,
    /// (JᵀJ)⁻¹ in external parameters, where J is the Jacobian of the
    /// weighted residuals. Not scaled by the reduced χ².
    pub covariance: DMatrix<f64>,
    pub chi2: f64,
    pub iterations: usize,
    /// JᵀJ was singular at the solution: some parameter combination is not
    /// constrained by the data, and the covariance is a pseudo-inverse.
    pub rank_deficient: bool,
}

/// Minimises Σ rᵢ(p)² where `residuals` returns the already weighted
/// residual vector.
pub fn minimize<F>(residuals: F, start: &[Param]) -> Result<LmResult>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let np = start.len();
    let external = |theta: &DVector<f64>| -> Vec<f64> { start.iter().zip(theta.iter()).map(|(p, t)| p.to_external(*t)).collect() };
    let eval = |theta: &DVector<f64>| -> DVector<f64> { DVector::from_vec(residuals(&external(theta))) };
    let jacobian = |theta: &DVector<f64>, r0: &DVector<f64>| -> DMatrix<f64> {
        let mut j = DMatrix::zeros(r0.len(), np);
        for k in 0..np {
            let h = 1e-6
                * match start[k] {
                    Param::Positive(_) => 1.0,
                    Param::Free { scale, .. } => theta[k].abs().max(scale),
                };
            let mut tp = theta.clone();
            tp[k] += h;
            let mut tm = theta.clone();
            tm[k] -= h;
            let d = (eval(&tp) - eval(&tm)) / (2.0 * h);
            j.set_column(k, &d);
        }
        j
    };

    let mut theta = DVector::from_iterator(np, start.iter().map(|p| p.to_internal()));
    let mut r = eval(&theta);
    let mut chi2 = r.norm_squared();
    if !chi2.is_finite() {
        return Err(Error::FitDidNotConverge {
            iterations: 0,
            residual_norm: chi2.sqrt(),
        });
    }
    let mut lambda = 1e-3;
    for it in 1..=MAX_ITERATIONS {
        let j = jacobian(&theta, &r);
        let jtj = j.transpose() * &j;
        let g = j.transpose() * &r;
        let mut accepted = None;
        let mut last_step = DVector::zeros(np);
        for _ in 0..40 {
            let mut a = jtj.clone();
            for k in 0..np {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&(-&g))) else {
                lambda *= 10.0;
                continue;
            };
            let trial = &theta + &step;
            let rt = eval(&trial);
            let ct = rt.norm_squared();
            last_step = step.clone();
            if ct.is_finite() && ct <= chi2 {
                accepted = Some((trial, rt, ct, step));
                lambda = (lambda * 0.3).max(1e-12);
                break;
            }
            lambda *= 10.0;
            if start
                .iter()
                .zip(theta.iter())
                .zip(step.iter())
                .all(|((p, t), s)| p.converged(*t, *s))
            {
                break;
            }
        }
        let step = match accepted {
            Some((t, rt, ct, step)) => {
                theta = t;
                r = rt;
                chi2 = ct;
                step
            }
            None => last_step,
        };
        if start
            .iter()
            .zip(theta.iter())
            .zip(step.iter())
            .all(|((p, t), s)| p.converged(*t, *s))
        {
            let j = jacobian(&theta, &r);
            let jtj = j.transpose() * &j;
            let (cov_int, rank_deficient) = match jtj.clone().try_inverse() {
                Some(c) if c.iter().all(|v| v.is_finite()) => (c, false),
                _ => {
                    let eps = 1e-12 * jtj.norm();
                    (
                        jtj.pseudo_inverse(eps).map_err(|_| Error::FitDidNotConverge {
                            iterations: it,
                            residual_norm: chi2.sqrt(),
                        })?,
                        true,
                    )
                }
            };
            let d = DVector::from_iterator(np, start.iter().zip(theta.iter()).map(|(p, t)| p.derivative(*t)));
            let covariance = DMatrix::from_fn(np, np, |a, b| cov_int[(a, b)] * d[a] * d[b]);
            return Ok(LmResult {
                params: external(&theta),
                covariance,
                chi2,
                iterations: it,
                rank_deficient,
            });
        }
    }
    Err(Error::FitDidNotConverge {
        iterations: MAX_ITERATIONS,
        residual_norm: chi2.sqrt(),
    })
}
