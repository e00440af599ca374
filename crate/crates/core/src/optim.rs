//! Line search and a finite-difference Newton method for small smooth
//! convex problems.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;

/// Armijo backtracking parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineSearch {
    pub initial_step: f64,
    pub shrink: f64,
    /// Sufficient-decrease factor `c` in `f(x + td) ≤ f(x) + c t ⟨d, g⟩`.
    pub slope: f64,
    pub max_backtracks: usize,
}

impl Default for LineSearch {
    fn default() -> Self {
        LineSearch {
            initial_step: 1.0,
            shrink: 0.5,
            slope: 1e-4,
            max_backtracks: 80,
        }
    }
}

/// An accepted step.
#[derive(Clone, Debug)]
pub struct Step {
    pub size: f64,
    pub point: DVector<f64>,
    pub value: f64,
}

impl LineSearch {
    /// Backtracks along `direction` from `x`; `derivative` is the directional
    /// derivative `⟨d, ∇f(x)⟩`, which must be negative.
    ///
    /// Returns `None` when no step passes the test.
    pub fn search<F>(
        &self,
        f: &mut F,
        x: &DVector<f64>,
        fx: f64,
        direction: &DVector<f64>,
        derivative: f64,
    ) -> Result<Option<Step>>
    where
        F: FnMut(&DVector<f64>) -> Result<f64>,
    {
        if !(derivative < 0.0) {
            return Ok(None);
        }
        let mut t = self.initial_step;
        for _ in 0..self.max_backtracks {
            let bound = fx + self.slope * t * derivative;
            if bound >= fx {
                // The required decrease is below the resolution of `fx`.
                return Ok(None);
            }
            let trial = x + direction * t;
            let value = f(&trial)?;
            if value.is_finite() && value <= bound {
                return Ok(Some(Step {
                    size: t,
                    point: trial,
                    value,
                }));
            }
            t *= self.shrink;
        }
        Ok(None)
    }
}

/// Bisection on the sign of `φ'(t)` for a convex line function, used when
/// function values no longer resolve the decrease. Returns the largest probed
/// `t` with `φ'(t) < 0` once `|φ'(t)| ≤ |φ'(0)|/10`.
pub fn derivative_step<D>(dphi: &mut D, initial: f64) -> Result<Option<f64>>
where
    D: FnMut(f64) -> Result<f64>,
{
    let d0 = dphi(0.0)?;
    if !(d0 < 0.0) {
        return Ok(None);
    }
    let mut lo = 0.0;
    let mut hi = initial;
    let mut expansions = 0;
    loop {
        let d = dphi(hi)?;
        if !d.is_finite() || d >= 0.0 {
            break;
        }
        lo = hi;
        if d >= 0.1 * d0 {
            return Ok(Some(lo));
        }
        hi *= 2.0;
        expansions += 1;
        if expansions > 60 {
            return Ok(Some(lo));
        }
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let d = dphi(mid)?;
        if d.is_finite() && d < 0.0 {
            lo = mid;
            if d >= 0.1 * d0 {
                break;
            }
        } else {
            hi = mid;
        }
    }
    Ok((lo > 0.0).then_some(lo))
}

/// Central-difference Jacobian of `grad`, symmetrized.
pub fn fd_hessian<G>(grad: &mut G, x: &DVector<f64>) -> Result<DMatrix<f64>>
where
    G: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
{
    let n = x.len();
    let mut h = DMatrix::zeros(n, n);
    let mut probe = x.clone();
    for i in 0..n {
        let step = 1e-5 * x[i].abs().max(1e-3);
        probe[i] = x[i] + step;
        let gp = grad(&probe)?;
        probe[i] = x[i] - step;
        let gm = grad(&probe)?;
        probe[i] = x[i];
        h.set_column(i, &((gp - gm) / (2.0 * step)));
    }
    Ok((&h + h.transpose()) * 0.5)
}

/// Settings of [`newton_minimize`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub line_search: LineSearch,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            tol: 1e-10,
            max_iter: 200,
            line_search: LineSearch::default(),
        }
    }
}

/// Result of an unconstrained minimization.
#[derive(Clone, Debug)]
pub struct Minimum {
    pub x: DVector<f64>,
    pub value: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Damped Newton with a finite-difference Hessian.
///
/// `stat` measures stationarity at a point and its gradient; iteration stops
/// once it drops below `cfg.tol`. A step that fails the line search falls
/// back to steepest descent.
pub fn newton_minimize<F, G, S>(mut f: F, mut grad: G, stat: S, x0: DVector<f64>, cfg: &NewtonConfig) -> Result<Minimum>
where
    F: FnMut(&DVector<f64>) -> Result<f64>,
    G: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
    S: Fn(&DVector<f64>, &DVector<f64>) -> Result<f64>,
{
    let mut x = x0;
    let mut fx = f(&x)?;
    let mut g = grad(&x)?;
    let mut measure = stat(&x, &g)?;
    for it in 0..cfg.max_iter {
        if measure < cfg.tol {
            return Ok(Minimum {
                x,
                value: fx,
                gradient_norm: measure,
                iterations: it,
                converged: true,
            });
        }
        let h = fd_hessian(&mut grad, &x)?;
        let newton = damped_newton_direction(&h, &g);
        let mut step = None;
        for d in newton.into_iter().chain(std::iter::once(-&g)) {
            step = cfg.line_search.search(&mut f, &x, fx, &d, d.dot(&g))?;
            if step.is_none() {
                let mut dphi = |t: f64| Ok(grad(&(&x + &d * t))?.dot(&d));
                if let Some(t) = derivative_step(&mut dphi, 1.0)? {
                    let point = &x + &d * t;
                    step = Some(Step {
                        size: t,
                        value: f(&point)?,
                        point,
                    });
                }
            }
            if step.is_some() {
                break;
            }
        }
        let Some(step) = step else {
            return Ok(Minimum {
                x,
                value: fx,
                gradient_norm: measure,
                iterations: it,
                converged: false,
            });
        };
        x = step.point;
        fx = step.value;
        g = grad(&x)?;
        measure = stat(&x, &g)?;
    }
    Ok(Minimum {
        x,
        value: fx,
        gradient_norm: measure,
        iterations: cfg.max_iter,
        converged: measure < cfg.tol,
    })
}

/// `−(H + μI)⁻¹ g` for the smallest `μ` (from a geometric ladder) that makes
/// the shifted matrix positive definite.
fn damped_newton_direction(h: &DMatrix<f64>, g: &DVector<f64>) -> Option<DVector<f64>> {
    let scale = h.amax().max(1e-300);
    let mut mu = 0.0;
    for _ in 0..30 {
        let shifted = h + DMatrix::identity(h.nrows(), h.ncols()) * mu;
        if let Some(chol) = shifted.cholesky() {
            let d = -chol.solve(g);
            if d.iter().all(|v| v.is_finite()) && d.dot(g) < 0.0 {
                return Some(d);
            }
        }
        mu = if mu == 0.0 { 1e-12 * scale } else { mu * 10.0 };
    }
    None
}
