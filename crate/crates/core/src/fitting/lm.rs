//! Damped Gauss-Newton (Levenberg-Marquardt) for small smooth
//! least-squares problems.

use crate::error::{Error, Result};

/// Optimizer knobs. The defaults match the fitting models in this crate:
/// 200 iterations, relative step tolerance 1e-10.
#[derive(Debug, Clone, Copy)]
pub struct LmConfig {
    pub max_iterations: usize,
    pub rel_step_tol: f64,
    pub lambda_init: f64,
    pub lambda_up: f64,
    pub lambda_down: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            rel_step_tol: 1e-10,
            lambda_init: 1e-3,
            lambda_up: 10.0,
            lambda_down: 0.1,
        }
    }
}

/// A weighted least-squares problem: residuals r(p) (already weighted) and
/// optionally their analytic Jacobian.
pub trait LeastSquaresProblem {
    fn residuals(&self, params: &[f64]) -> Vec<f64>;

    /// Analytic Jacobian rows d r_i / d p_j; `None` falls back to central
    /// finite differences.
    fn jacobian(&self, _params: &[f64]) -> Option<Vec<Vec<f64>>> {
        None
    }

    /// Project parameters back into their admissible set after a step.
    fn constrain(&self, _params: &mut [f64]) {}

    /// Characteristic magnitude per parameter, used for finite-difference
    /// steps and the convergence test.
    fn scales(&self) -> Vec<f64>;
}

/// Central finite-difference Jacobian honoring the problem's constraints.
pub fn fd_jacobian<P: LeastSquaresProblem + ?Sized>(
    problem: &P,
    params: &[f64],
) -> Vec<Vec<f64>> {
    let scales = problem.scales();
    let m = problem.residuals(params).len();
    let n = params.len();
    let mut jac = vec![vec![0.0; n]; m];
    for j in 0..n {
        let h = 1e-6 * params[j].abs().max(1e-6 * scales[j]).max(f64::MIN_POSITIVE);
        let mut hi = params.to_vec();
        let mut lo = params.to_vec();
        hi[j] += h;
        lo[j] -= h;
        let rh = problem.residuals(&hi);
        let rl = problem.residuals(&lo);
        for i in 0..m {
            jac[i][j] = (rh[i] - rl[i]) / (2.0 * h);
        }
    }
    jac
}

fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let (pivot, max) = (col..n)
            .map(|r| (r, a[r][col].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))?;
        if max == 0.0 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in (col + 1)..n {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    Some(x)
}

fn normal_equations(jac: &[Vec<f64>], residuals: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = jac[0].len();
    let mut jtj = vec![vec![0.0; n]; n];
    let mut jtr = vec![0.0; n];
    for (row, &r) in jac.iter().zip(residuals) {
        for j in 0..n {
            jtr[j] += row[j] * r;
            for k in j..n {
                jtj[j][k] += row[j] * row[k];
            }
        }
    }
    for j in 1..n {
        for k in 0..j {
            jtj[j][k] = jtj[k][j];
        }
    }
    (jtj, jtr)
}

fn cost(residuals: &[f64]) -> f64 {
    residuals.iter().map(|r| r * r).sum()
}

/// Result of the optimization.
#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    /// Sum of squared (weighted) residuals at the optimum.
    pub cost: f64,
    pub converged: bool,
    pub iterations: usize,
    /// 1-sigma uncertainties from the linearized covariance at the
    /// optimum, same order as `params`.
    pub uncertainties: Vec<f64>,
}

/// Minimize the sum of squared residuals starting from `initial`.
/// Only cost-decreasing steps are accepted, so the returned cost never
/// exceeds the initial one.
pub fn levenberg_marquardt<P: LeastSquaresProblem + ?Sized>(
    problem: &P,
    initial: &[f64],
    config: &LmConfig,
) -> Result<LmOutcome> {
    let mut params = initial.to_vec();
    problem.constrain(&mut params);
    let scales = problem.scales();
    if scales.len() != params.len() {
        return Err(Error::FitFailed("scales/parameter length mismatch".into()));
    }
    let mut residuals = problem.residuals(&params);
    if residuals.len() <= params.len() {
        return Err(Error::FitFailed(format!(
            "{} data points cannot constrain {} parameters",
            residuals.len(),
            params.len()
        )));
    }
    if residuals.iter().any(|r| !r.is_finite()) {
        return Err(Error::FitFailed(
            "residuals are not finite at the initial guess".into(),
        ));
    }
    let mut current_cost = cost(&residuals);
    let mut lambda = config.lambda_init;
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..config.max_iterations {
        iterations += 1;
        let jac = problem
            .jacobian(&params)
            .unwrap_or_else(|| fd_jacobian(problem, &params));
        let (jtj, jtr) = normal_equations(&jac, &residuals);

        let mut improved = false;
        for _ in 0..32 {
            let mut damped = jtj.clone();
            for (j, row) in damped.iter_mut().enumerate() {
                row[j] += lambda * jtj[j][j].max(1e-300);
            }
            let rhs: Vec<f64> = jtr.iter().map(|v| -v).collect();
            let Some(step) = solve_linear(damped, rhs) else {
                lambda *= config.lambda_up;
                continue;
            };
            let mut trial = params.clone();
            for (p, s) in trial.iter_mut().zip(&step) {
                *p += s;
            }
            problem.constrain(&mut trial);
            let trial_residuals = problem.residuals(&trial);
            let trial_cost = cost(&trial_residuals);
            if trial_cost.is_finite() && trial_cost < current_cost {
                let small = params
                    .iter()
                    .zip(&trial)
                    .zip(&scales)
                    .all(|((old, new), scale)| {
                        (new - old).abs() <= config.rel_step_tol * old.abs().max(*scale)
                    });
                params = trial;
                residuals = trial_residuals;
                current_cost = trial_cost;
                lambda = (lambda * config.lambda_down).max(1e-14);
                improved = true;
                if small {
                    converged = true;
                }
                break;
            }
            lambda *= config.lambda_up;
        }
        if converged || !improved {
            // no improving step at any damping: the optimizer has stalled
            // at numerical precision, which counts as converged
            if !improved {
                converged = true;
            }
            break;
        }
    }

    let jac = problem
        .jacobian(&params)
        .unwrap_or_else(|| fd_jacobian(problem, &params));
    let (jtj, _) = normal_equations(&jac, &residuals);
    let uncertainties = covariance_diagonal(&jtj, current_cost, residuals.len(), params.len());

    Ok(LmOutcome {
        params,
        cost: current_cost,
        converged,
        iterations,
        uncertainties,
    })
}

fn covariance_diagonal(jtj: &[Vec<f64>], cost: f64, m: usize, n: usize) -> Vec<f64> {
    let dof = (m - n).max(1) as f64;
    let s2 = cost / dof;
    // invert (JtJ + tiny ridge) column by column; the ridge keeps
    // boundary-pinned parameters finite
    let ridge = 1e-14
        * jtj
            .iter()
            .enumerate()
            .map(|(j, row)| row[j])
            .fold(0.0f64, f64::max)
            .max(1e-300);
    let mut out = vec![0.0; n];
    for j in 0..n {
        let mut a = jtj.to_vec();
        for (k, row) in a.iter_mut().enumerate() {
            row[k] += ridge;
        }
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        match solve_linear(a, e) {
            Some(col) => out[j] = (s2 * col[j]).max(0.0).sqrt(),
            None => out[j] = f64::INFINITY,
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// y = a exp(-b x) sampled without noise.
    struct ExpProblem {
        x: Vec<f64>,
        y: Vec<f64>,
    }

    impl LeastSquaresProblem for ExpProblem {
        fn residuals(&self, p: &[f64]) -> Vec<f64> {
            self.x
                .iter()
                .zip(&self.y)
                .map(|(&x, &y)| p[0] * (-p[1] * x).exp() - y)
                .collect()
        }

        fn jacobian(&self, p: &[f64]) -> Option<Vec<Vec<f64>>> {
            Some(
                self.x
                    .iter()
                    .map(|&x| {
                        let e = (-p[1] * x).exp();
                        vec![e, -p[0] * x * e]
                    })
                    .collect(),
            )
        }

        fn scales(&self) -> Vec<f64> {
            vec![1.0, 1.0]
        }
    }

    #[test]
    fn recovers_exponential_parameters() {
        let x: Vec<f64> = (0..80).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|&x| 3.7 * (-0.8 * x).exp()).collect();
        let problem = ExpProblem { x, y };
        let out =
            levenberg_marquardt(&problem, &[1.0, 0.3], &LmConfig::default()).unwrap();
        assert!(out.converged);
        assert!((out.params[0] - 3.7).abs() < 1e-8);
        assert!((out.params[1] - 0.8).abs() < 1e-8);
        assert!(out.cost < 1e-16);
    }

    #[test]
    fn cost_never_exceeds_initial() {
        let x: Vec<f64> = (0..40).map(|i| i as f64 * 0.2).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|&x| 2.0 * (-0.5 * x).exp() + 0.01 * (x * 37.0).sin())
            .collect();
        let problem = ExpProblem { x, y };
        let initial = [1.3, 0.9];
        let start_cost = cost(&problem.residuals(&initial));
        let out = levenberg_marquardt(&problem, &initial, &LmConfig::default()).unwrap();
        assert!(out.cost <= start_cost);
    }

    #[test]
    fn fd_jacobian_matches_analytic() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.3).collect();
        let y = vec![0.0; 20];
        let problem = ExpProblem { x, y };
        let p = [2.0, 0.7];
        let analytic = problem.jacobian(&p).unwrap();
        let fd = fd_jacobian(&problem, &p);
        for (ra, rf) in analytic.iter().zip(&fd) {
            for (a, f) in ra.iter().zip(rf) {
                assert!((a - f).abs() <= 1e-6 * a.abs().max(1.0));
            }
        }
    }
}
