use nalgebra::DMatrix;

use super::SolverConfig;
use crate::error::{Error, Result};

const MAX_BACKTRACKS: usize = 200;

/// Output of [`apg_solve`].
#[derive(Debug, Clone)]
pub struct ApgResult {
    pub w: DMatrix<f64>,
    /// Total objective after each iteration (one entry per iteration).
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Relative objective change at the last iteration, or the relative
    /// change of the iterate once objective differences fall below roundoff.
    pub final_rel_change: f64,
    /// Step size in use when the solver stopped.
    pub step: f64,
}

impl ApgResult {
    pub fn objective(&self) -> f64 {
        self.objective_trace.last().copied().unwrap_or(f64::NAN)
    }
}

fn non_finite(iteration: usize, what: &str) -> Error {
    Error::Numeric {
        iteration,
        message: format!("non-finite {what}"),
    }
}

/// Minimises `f(W) + g(W)` for convex `f` with Lipschitz gradient and a
/// convex `g` with exact proximal map.
///
/// FISTA momentum `t' = (1 + sqrt(1 + 4 t^2)) / 2` with a backtracking line
/// search on the step size. With `cfg.monotone` a candidate that raises the
/// objective is not accepted (the momentum still uses it), so the returned
/// `W` is the best iterate seen. `prox(v, step)` must return
/// `argmin_W g(W) * step + ||W - v||^2 / 2`.
///
/// Stops when the relative objective change drops below `cfg.tol`. Once
/// successive objectives agree to within roundoff, the relative change of
/// the iterate is used instead.
pub fn apg_solve<F, G, P, H>(
    smooth_value: F,
    smooth_grad: G,
    prox: P,
    nonsmooth_value: H,
    w0: DMatrix<f64>,
    cfg: &SolverConfig,
) -> Result<ApgResult>
where
    F: Fn(&DMatrix<f64>) -> f64,
    G: Fn(&DMatrix<f64>) -> DMatrix<f64>,
    P: Fn(&DMatrix<f64>, f64) -> Result<DMatrix<f64>>,
    H: Fn(&DMatrix<f64>) -> f64,
{
    cfg.validate()?;

    let mut x = w0;
    let mut x_prev = x.clone();
    let mut f_x = smooth_value(&x);
    let mut obj = f_x + nonsmooth_value(&x);
    if !obj.is_finite() {
        return Err(non_finite(0, "objective at the starting point"));
    }

    let mut y = x.clone();
    let mut y_is_x = true;
    let mut t = 1.0_f64;
    let mut step = cfg.step_init;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut rel = f64::INFINITY;

    for k in 1..=cfg.max_iters {
        let f_y = if y_is_x { f_x } else { smooth_value(&y) };
        let grad = smooth_grad(&y);
        if !f_y.is_finite() {
            return Err(non_finite(k, "smooth objective"));
        }
        if grad.iter().any(|v| !v.is_finite()) {
            return Err(non_finite(k, "gradient"));
        }

        let mut backtracks = 0;
        let (z, f_z) = loop {
            let z = prox(&(&y - &grad * step), step)?;
            let f_z = smooth_value(&z);
            let diff = &z - &y;
            let model = f_y + grad.dot(&diff) + diff.norm_squared() / (2.0 * step);
            let slack = 8.0 * f64::EPSILON * (f_y.abs() + f_z.abs());
            if f_z.is_finite() && f_z <= model + slack {
                debug_assert!(f_z <= model + slack, "sufficient decrease violated");
                break (z, f_z);
            }
            backtracks += 1;
            if backtracks > MAX_BACKTRACKS {
                return Err(Error::Numeric {
                    iteration: k,
                    message: format!("line search failed after {MAX_BACKTRACKS} backtracks"),
                });
            }
            step *= cfg.backtrack_factor;
        };
        let obj_z = f_z + nonsmooth_value(&z);
        if !obj_z.is_finite() {
            return Err(non_finite(k, "objective"));
        }

        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let from_rest = y_is_x;
        let noise = |a: f64, b: f64| 8.0 * f64::EPSILON * (a.abs() + b.abs());
        // A backtracked proximal step from the current iterate never raises
        // the objective in exact arithmetic, so a rise within roundoff is a tie.
        let improved = obj_z <= obj || (from_rest && obj_z - obj <= noise(obj, obj_z));
        let prev_obj = obj;
        let mut moved = 0.0;

        if cfg.monotone {
            if improved {
                moved = (&z - &x).norm() / x.norm().max(f64::MIN_POSITIVE);
                x_prev = std::mem::replace(&mut x, z.clone());
                f_x = f_z;
                obj = obj_z.min(obj);
            } else {
                x_prev.copy_from(&x);
            }
        } else {
            moved = (&z - &x).norm() / x.norm().max(f64::MIN_POSITIVE);
            x_prev = std::mem::replace(&mut x, z.clone());
            f_x = f_z;
            obj = obj_z;
        }

        if cfg.restart && !improved {
            t = 1.0;
            y.copy_from(&x);
            y_is_x = true;
        } else {
            // y = x + (t / t')(z - x) + ((t - 1) / t')(x - x_prev)
            y = &x + (&z - &x) * (t / t_next) + (&x - &x_prev) * ((t - 1.0) / t_next);
            y_is_x = false;
            t = t_next;
        }

        trace.push(obj);
        let stop = if cfg.monotone && !improved {
            rel = 0.0;
            from_rest
        } else if (obj - prev_obj).abs() <= noise(obj, prev_obj) {
            // The objective no longer resolves progress; judge by the iterate.
            rel = moved;
            moved < cfg.tol
        } else {
            rel = (obj - prev_obj).abs() / prev_obj.abs().max(f64::MIN_POSITIVE);
            rel < cfg.tol
        };
        if stop {
            converged = true;
            break;
        }
    }

    Ok(ApgResult {
        iterations: trace.len(),
        w: x,
        objective_trace: trace,
        converged,
        final_rel_change: rel,
        step,
    })
}
