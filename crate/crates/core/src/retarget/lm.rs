//! Damped Gauss-Newton (Levenberg-Marquardt) for small dense problems.

use nalgebra::{DMatrix, DVector};

/// A least-squares problem `min ‖r(x)‖²`.
pub(crate) trait LeastSquares {
    /// Residuals and Jacobian at `x`.
    fn evaluate(&self, x: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>);

    /// Residuals only; the default reuses `evaluate`.
    fn residuals(&self, x: &DVector<f64>) -> DVector<f64> {
        self.evaluate(x).0
    }

    /// Maps a trial point back onto the parameter domain.
    fn project(&self, _x: &mut DVector<f64>) {}

    /// `(JᵀJ, Jᵀr)`; problems with sparse Jacobians override the dense
    /// products.
    fn normal_equations(&self, r: &DVector<f64>, jac: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>) {
        (jac.tr_mul(jac), jac.tr_mul(r))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LmSettings {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub damping_initial: f64,
    pub damping_up: f64,
    pub damping_down: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct LmOutcome {
    pub x: DVector<f64>,
    pub objective: f64,
    /// Accepted steps.
    pub iterations: usize,
    pub gradient_norm: f64,
    pub converged: bool,
    /// Objective after every accepted step, starting with the initial value.
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct Diverged {
    pub last_valid: DVector<f64>,
}

const MAX_DAMPING: f64 = 1e20;

pub(crate) fn minimize<P: LeastSquares>(
    problem: &P,
    x0: DVector<f64>,
    settings: &LmSettings,
) -> Result<LmOutcome, Diverged> {
    let mut x = x0;
    let (mut r, mut jac) = problem.evaluate(&x);
    let mut objective = r.norm_squared();
    if !objective.is_finite() {
        return Err(Diverged { last_valid: x });
    }
    let mut trace = vec![objective];
    let mut lambda = settings.damping_initial;
    let mut iterations = 0;
    let mut gradient_norm;
    let mut converged = false;

    loop {
        let (normal, jt_r) = problem.normal_equations(&r, &jac);
        gradient_norm = 2.0 * jt_r.norm();
        if gradient_norm < settings.gradient_tolerance {
            converged = true;
            break;
        }
        if iterations >= settings.max_iterations {
            break;
        }
        // Marquardt scaling: damp each parameter by its own curvature
        let floor = normal.diagonal().max().max(1e-300) * 1e-12;
        let diag: Vec<f64> = normal.diagonal().iter().map(|d| d.max(floor)).collect();
        let mut accepted = false;
        while lambda <= MAX_DAMPING {
            let mut damped = normal.clone();
            for (i, d) in diag.iter().enumerate() {
                damped[(i, i)] += lambda * d;
            }
            let step = match damped.cholesky() {
                Some(ch) => ch.solve(&(-&jt_r)),
                None => {
                    lambda *= settings.damping_up;
                    continue;
                }
            };
            let mut trial = &x + &step;
            problem.project(&mut trial);
            let trial_r = problem.residuals(&trial);
            let trial_objective = trial_r.norm_squared();
            if !trial_objective.is_finite() {
                return Err(Diverged { last_valid: x });
            }
            if trial_objective < objective {
                x = trial;
                let (nr, nj) = problem.evaluate(&x);
                r = nr;
                jac = nj;
                objective = r.norm_squared();
                trace.push(objective);
                lambda = (lambda * settings.damping_down).max(1e-15);
                accepted = true;
                break;
            }
            lambda *= settings.damping_up;
        }
        if !accepted {
            // no descent direction left at machine precision
            break;
        }
        iterations += 1;
    }
    Ok(LmOutcome { x, objective, iterations, gradient_norm, converged, trace })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Rosenbrock;

    impl LeastSquares for Rosenbrock {
        fn evaluate(&self, x: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
            let r = DVector::from_vec(vec![10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]]);
            let j = DMatrix::from_row_slice(2, 2, &[-20.0 * x[0], 10.0, -1.0, 0.0]);
            (r, j)
        }
    }

    fn settings() -> LmSettings {
        LmSettings {
            max_iterations: 200,
            gradient_tolerance: 1e-10,
            damping_initial: 1e-3,
            damping_up: 10.0,
            damping_down: 0.1,
        }
    }

    #[test]
    fn solves_rosenbrock_monotonically() {
        let out = minimize(&Rosenbrock, DVector::from_vec(vec![-1.2, 1.0]), &settings()).unwrap();
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-8 && (out.x[1] - 1.0).abs() < 1e-8);
        assert!(out.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    struct Blowup;

    impl LeastSquares for Blowup {
        fn evaluate(&self, x: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
            let v = if x[0] > 0.5 { f64::NAN } else { x[0] - 2.0 };
            (DVector::from_vec(vec![v]), DMatrix::from_element(1, 1, 1.0))
        }
    }

    #[test]
    fn non_finite_objective_reports_last_iterate() {
        let err = minimize(&Blowup, DVector::from_vec(vec![0.0]), &settings()).unwrap_err();
        assert_eq!(err.last_valid[0], 0.0);
    }
}
