//! Translation-invariant spaces `Φ(x)u = S (uϕ)^(x)` over `L^p(ℝ^d, dϕ)`.
//!
//! The Fourier transform is `ĝ(ω) = (2π)^{−d/2} ∫ g(t) e^{−iω·t} dt` and
//! `ϕ` is a Gaussian density of total mass `M`:
//! `ϕ(t) = M (2π)^{−d/2} e^{−‖t‖²/2}`, so `ϕ̂(ω) = M (2π)^{−d/2} e^{−‖ω‖²/2}`.
//! The default mass `(2π)^d` makes the `p = 2` kernel exactly
//! `SSᵀ e^{−‖x−y‖²/2}`; [`TranslationInvariantSpace::with_density_mass`]
//! selects the unit-mass density instead.
//!
//! The infinite-dimensional feature space is replaced by a quadrature grid
//! `{t_k}` with weights `w_k`: the feature space becomes the weighted
//! `ℓ^p` with weights `w_k ϕ(t_k)`.

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kernel::FeatureMapSpec;
use crate::linalg::condition_number;
use crate::scalar::Scalar;
use crate::sip::{Exponent, LpSpace, ProductSpace};

/// Matrices with a larger condition number count as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// Tensor-product trapezoidal rule on a box `[lo, hi]^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureGrid {
    dim: usize,
    per_axis: usize,
    lo: f64,
    hi: f64,
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl QuadratureGrid {
    pub fn uniform(dim: usize, per_axis: usize, lo: f64, hi: f64) -> Result<Self> {
        if dim == 0 || per_axis == 0 {
            return Err(Error::EmptyGrid);
        }
        if per_axis < 2 || !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least two nodes on a finite interval, got {per_axis} on [{lo}, {hi}]"
            )));
        }
        let h = (hi - lo) / (per_axis - 1) as f64;
        let nodes: Vec<f64> = (0..per_axis).map(|k| lo + h * k as f64).collect();
        let axis_w: Vec<f64> = (0..per_axis)
            .map(|k| if k == 0 || k + 1 == per_axis { h / 2.0 } else { h })
            .collect();
        let total = per_axis
            .checked_pow(dim as u32)
            .ok_or_else(|| Error::InvalidParameter("grid too large".into()))?;
        let mut points = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rest = flat;
            let mut t = Vec::with_capacity(dim);
            let mut w = 1.0;
            for _ in 0..dim {
                let k = rest % per_axis;
                rest /= per_axis;
                t.push(nodes[k]);
                w *= axis_w[k];
            }
            points.push(t);
            weights.push(w);
        }
        Ok(QuadratureGrid {
            dim,
            per_axis,
            lo,
            hi,
            points,
            weights,
        })
    }

    /// 400 nodes per axis on `[−8, 8]`.
    pub fn standard(dim: usize) -> Result<Self> {
        Self::uniform(dim, 400, -8.0, 8.0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn per_axis(&self) -> usize {
        self.per_axis
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_symmetric(&self) -> bool {
        self.lo == -self.hi
    }

    /// Index of the node `−t_k` (requires a symmetric grid).
    pub fn mirror(&self, k: usize) -> usize {
        let mut rest = k;
        let mut out = 0;
        let mut stride = 1;
        for _ in 0..self.dim {
            let i = rest % self.per_axis;
            rest /= self.per_axis;
            out += (self.per_axis - 1 - i) * stride;
            stride *= self.per_axis;
        }
        out
    }
}

/// `n`-dimensional translation-invariant space on `ℝ^d`.
#[derive(Clone, Debug)]
pub struct TranslationInvariantSpace {
    d: usize,
    s: DMatrix<f64>,
    p: Exponent,
    gamma: Exponent,
    mass: f64,
}

impl TranslationInvariantSpace {
    /// Output norm `ℓ^n_q` with `q` conjugate to `p`; density mass `(2π)^d`.
    pub fn new(d: usize, s: DMatrix<f64>, p: Exponent) -> Result<Self> {
        if d == 0 || s.is_empty() {
            return Err(Error::Empty);
        }
        if !s.is_square() {
            return Err(Error::NotSquare {
                rows: s.nrows(),
                cols: s.ncols(),
            });
        }
        let condition = condition_number(&s);
        if !(condition <= MAX_CONDITION) {
            return Err(Error::SingularMatrix { condition });
        }
        Ok(TranslationInvariantSpace {
            d,
            s,
            p,
            gamma: p.conjugate(),
            mass: (2.0 * PI).powi(d as i32),
        })
    }

    pub fn with_output_exponent(mut self, gamma: Exponent) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_density_mass(mut self, mass: f64) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "density mass must be positive, got {mass}"
            )));
        }
        self.mass = mass;
        Ok(self)
    }

    pub fn input_dim(&self) -> usize {
        self.d
    }

    pub fn output_dim(&self) -> usize {
        self.s.nrows()
    }

    pub fn mixing(&self) -> &DMatrix<f64> {
        &self.s
    }

    pub fn exponent(&self) -> Exponent {
        self.p
    }

    pub fn density_mass(&self) -> f64 {
        self.mass
    }

    pub fn output_space(&self) -> LpSpace {
        LpSpace::new(self.output_dim(), self.gamma).expect("n > 0")
    }

    fn fourier_constant(&self) -> f64 {
        (2.0 * PI).powf(-(self.d as f64) / 2.0)
    }

    pub fn density(&self, t: &[f64]) -> f64 {
        let r2: f64 = t.iter().map(|v| v * v).sum();
        self.mass * self.fourier_constant() * (-r2 / 2.0).exp()
    }

    pub fn density_transform(&self, omega: &[f64]) -> f64 {
        self.density(omega)
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: x.len(),
            });
        }
        Ok(())
    }

    fn mixing_as<T: Scalar>(&self) -> DMatrix<T> {
        self.s.map(T::from_real)
    }

    /// `(K(x, ·)ξ)*` evaluated at `y`: `(2π)^{−d/2} SSᵀξ* ϕ̂(x − y)`.
    pub fn dual_section_value<T: Scalar>(&self, x: &[f64], y: &[f64], xi: &DVector<T>) -> Result<DVector<T>> {
        self.check_point(x)?;
        self.check_point(y)?;
        let xi_star = self.output_space().dualize(xi)?;
        let s = self.mixing_as::<T>();
        let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        let scale = self.fourier_constant() * self.density_transform(&diff);
        Ok((&s * (s.transpose() * xi_star)).map(|v| v.scale(scale)))
    }

    /// `K(x, y)ξ = M^{(p−2)/p} ‖a‖_q^{(p−2)/(p−1)} (2π)^{−d/2} S v ϕ̂(y − x)`
    /// with `a = Sᵀξ*` and `v_j = conj(a_j) / |a_j|^{(p−2)/(p−1)}`.
    pub fn kernel_apply<T: Scalar>(&self, x: &[f64], y: &[f64], xi: &DVector<T>) -> Result<DVector<T>> {
        self.check_point(x)?;
        self.check_point(y)?;
        let xi_star = self.output_space().dualize(xi)?;
        let s = self.mixing_as::<T>();
        let a = s.transpose() * xi_star;
        let p = self.p.value();
        let power = (p - 2.0) / (p - 1.0);
        let a_norm = LpSpace::new(a.len(), self.p.conjugate())?.norm(&a)?;
        if a_norm == 0.0 {
            return Ok(DVector::zeros(self.output_dim()));
        }
        // |a_j|^{−power} ‖a‖^{power} = (‖a‖ / |a_j|)^{power}.
        let v = a.map(|aj| {
            let m = aj.modulus();
            if m == 0.0 {
                T::zero()
            } else {
                aj.conjugate().scale((a_norm / m).powf(power))
            }
        });
        let diff: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
        let scale = self.mass.powf((p - 2.0) / p) * self.fourier_constant() * self.density_transform(&diff);
        Ok((s * v).map(|c| c.scale(scale)))
    }

    fn check_grid(&self, grid: &QuadratureGrid) -> Result<()> {
        if grid.is_empty() {
            return Err(Error::EmptyGrid);
        }
        if grid.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: grid.dim(),
            });
        }
        Ok(())
    }

    /// `w_k ϕ(t_k)`.
    pub fn quadrature_weights(&self, grid: &QuadratureGrid) -> Vec<f64> {
        grid.points()
            .iter()
            .zip(grid.weights())
            .map(|(t, w)| w * self.density(t))
            .collect()
    }

    /// Complex discretization: coordinate `j·G + k` holds `u_j(t_k)`, and
    /// `Φ(x)[i, j·G + k] = S_ij e^{−ix·t_k} w_k ϕ(t_k) (2π)^{−d/2}`.
    pub fn discretized_feature_map(&self, grid: &QuadratureGrid) -> Result<FeatureMapSpec<Complex<f64>>> {
        self.check_grid(grid)?;
        let n = self.output_dim();
        let g = grid.len();
        let qw = self.quadrature_weights(grid);
        let weights: Vec<f64> = (0..n).flat_map(|_| qw.iter().copied()).collect();
        let feature_space = LpSpace::weighted(self.p, weights)?;
        let nodes = grid.points().to_vec();
        let s = self.s.clone();
        let c = self.fourier_constant();
        Ok(FeatureMapSpec::new(
            self.d,
            feature_space,
            self.output_space(),
            move |x| {
                let mut phi = DMatrix::zeros(n, n * g);
                for (k, t) in nodes.iter().enumerate() {
                    let phase: f64 = x.iter().zip(t).map(|(a, b)| a * b).sum();
                    let e = Complex::from_polar(qw[k] * c, -phase);
                    for i in 0..n {
                        for j in 0..n {
                            phi[(i, j * g + k)] = e * s[(i, j)];
                        }
                    }
                }
                Ok(phi)
            },
        ))
    }

    /// The coefficient of `f(· + y)` when `u` is the coefficient of `f` in
    /// the complex discretization.
    pub fn shift_coefficient(
        &self,
        grid: &QuadratureGrid,
        u: &DVector<Complex<f64>>,
        y: &[f64],
    ) -> Result<DVector<Complex<f64>>> {
        self.check_point(y)?;
        let g = grid.len();
        if u.len() != g * self.output_dim() {
            return Err(Error::DimensionMismatch {
                expected: g * self.output_dim(),
                found: u.len(),
            });
        }
        Ok(DVector::from_fn(u.len(), |idx, _| {
            let t = &grid.points()[idx % g];
            let phase: f64 = y.iter().zip(t).map(|(a, b)| a * b).sum();
            u[idx] * Complex::from_polar(1.0, -phase)
        }))
    }

    /// Real discretization on the functions with `u(−t) = conj(u(t))`.
    ///
    /// Each pair `{t_k, −t_k}` carries `u(t_k) = α + iβ` as a two-entry block
    /// weighted so that its `p`-th power norm is `2 w_k ϕ(t_k) |α + iβ|^p`; a
    /// self-paired node carries a one-entry block. Restricted to real
    /// directions the kernel agrees with the complex discretization.
    pub fn real_feature_map(&self, grid: &QuadratureGrid) -> Result<FeatureMapSpec<f64>> {
        self.check_grid(grid)?;
        if !grid.is_symmetric() {
            return Err(Error::InvalidParameter(
                "real discretization needs a grid symmetric about the origin".into(),
            ));
        }
        let n = self.output_dim();
        let qw = self.quadrature_weights(grid);
        let p = self.p.value();
        // (node, multiplicity) for every block of one output component.
        let mut reps: Vec<(usize, bool)> = Vec::new();
        for k in 0..grid.len() {
            let m = grid.mirror(k);
            if k < m {
                reps.push((k, true));
            } else if k == m {
                reps.push((k, false));
            }
        }
        let mut blocks = Vec::with_capacity(n * reps.len());
        for _ in 0..n {
            for &(k, paired) in &reps {
                let block = if paired {
                    LpSpace::weighted(Exponent::TWO, vec![(2.0 * qw[k]).powf(2.0 / p); 2])?
                } else {
                    LpSpace::weighted(Exponent::TWO, vec![qw[k].powf(2.0 / p)])?
                };
                blocks.push(block);
            }
        }
        let feature_space = ProductSpace::new(blocks, self.p)?;
        let per_component: usize = reps.iter().map(|(_, paired)| if *paired { 2 } else { 1 }).sum();
        let nodes = grid.points().to_vec();
        let s = self.s.clone();
        let c = self.fourier_constant();
        Ok(FeatureMapSpec::new(
            self.d,
            feature_space,
            self.output_space(),
            move |x| {
                let mut phi = DMatrix::zeros(n, n * per_component);
                let mut col = 0;
                let mut row = vec![0.0; per_component];
                for &(k, paired) in &reps {
                    let phase: f64 = x.iter().zip(&nodes[k]).map(|(a, b)| a * b).sum();
                    if paired {
                        row[col] = 2.0 * qw[k] * c * phase.cos();
                        row[col + 1] = 2.0 * qw[k] * c * phase.sin();
                        col += 2;
                    } else {
                        row[col] = qw[k] * c * phase.cos();
                        col += 1;
                    }
                }
                for i in 0..n {
                    for j in 0..n {
                        for (q, v) in row.iter().enumerate() {
                            phi[(i, j * per_component + q)] = s[(i, j)] * v;
                        }
                    }
                }
                Ok(phi)
            },
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn trapezoid_integrates_gaussian() {
        let grid = QuadratureGrid::standard(1).unwrap();
        let space = TranslationInvariantSpace::new(1, DMatrix::identity(1, 1), Exponent::TWO)
            .unwrap()
            .with_density_mass(1.0)
            .unwrap();
        let total: f64 = space.quadrature_weights(&grid).iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mirror_is_involution() {
        let grid = QuadratureGrid::uniform(2, 5, -1.0, 1.0).unwrap();
        for k in 0..grid.len() {
            let m = grid.mirror(k);
            assert_eq!(grid.mirror(m), k);
            for (a, b) in grid.points()[k].iter().zip(&grid.points()[m]) {
                assert!((a + b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn singular_mixing_rejected() {
        let s = dmatrix![1.0, 2.0; 2.0, 4.0];
        assert!(matches!(
            TranslationInvariantSpace::new(1, s, Exponent::TWO),
            Err(Error::SingularMatrix { .. })
        ));
        assert!(matches!(
            TranslationInvariantSpace::new(1, DMatrix::zeros(2, 3), Exponent::TWO),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn diagonal_is_mixing_gram() {
        let s = dmatrix![1.0, 0.5; -0.3, 2.0];
        let space = TranslationInvariantSpace::new(2, s.clone(), Exponent::TWO).unwrap();
        let xi = dvector![0.7, -1.1];
        let k = space.kernel_apply(&[0.2, 0.4], &[0.2, 0.4], &xi).unwrap();
        assert!((k - &s * s.transpose() * &xi).norm() < 1e-13);
    }

    #[test]
    fn empty_grid_rejected() {
        assert_eq!(QuadratureGrid::uniform(1, 0, -1.0, 1.0), Err(Error::EmptyGrid));
    }
}
