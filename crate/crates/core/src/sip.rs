//! Semi-inner products and duality mappings on finite-dimensional spaces.
//!
//! Two kinds of spaces are provided:
//!
//! * [`LpSpace`]: `C^l` (or `R^l`) with the weighted norm
//!   `(sum_j w_j |u_j|^γ)^(1/γ)`. With unit weights this is plain `ℓ^γ`;
//!   with quadrature weights it discretizes `L^γ(dφ)`.
//! * [`ProductSpace`]: a list of `LpSpace` blocks glued together with an
//!   outer `ℓ^p` norm, `‖f‖ = (sum_j ‖f_j‖^p)^(1/p)`.
//!
//! Elements of the dual space are stored as coordinate vectors paired with
//! primal vectors through the weighted bilinear form
//! `(u, w) = sum_k weight_k u_k w_k`. Under this convention the dual element
//! of `u` is `u*_k = conj(u_k) |u_k|^(γ-2) / ‖u‖^(γ-2)` and the dual space is
//! the same kind of space with conjugate exponents and the same weights, so
//! the inverse duality map is just the duality map of the dual space.
//!
//! Any term of the form `0 · |0|^(γ-2)` is taken to be zero, including when
//! `γ < 2` and the power itself diverges.

use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// An exponent in `(1, ∞)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Exponent(f64);

impl Exponent {
    pub const TWO: Exponent = Exponent(2.0);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 1.0 {
            Ok(Exponent(value))
        } else {
            Err(Error::InvalidExponent(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// The Hölder conjugate `p / (p - 1)`.
    pub fn conjugate(self) -> Exponent {
        Exponent(self.0 / (self.0 - 1.0))
    }

    pub fn is_two(self) -> bool {
        self.0 == 2.0
    }
}

impl std::fmt::Display for Exponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `(|a| / norm)^(γ-2)` with the zero conventions applied.
#[inline]
fn relative_power(modulus: f64, norm: f64, gamma: f64) -> f64 {
    if modulus == 0.0 || norm == 0.0 {
        0.0
    } else {
        (modulus / norm).powf(gamma - 2.0)
    }
}

/// Weighted `ℓ^γ` norm of a slice, computed with rescaling to avoid overflow.
fn weighted_norm<T: Scalar>(u: &[T], weights: Option<&[f64]>, gamma: f64) -> f64 {
    let scale = u.iter().fold(0.0_f64, |m, x| m.max(x.modulus()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let sum: f64 = match weights {
        None => u.iter().map(|x| (x.modulus() / scale).powf(gamma)).sum(),
        Some(w) => u
            .iter()
            .zip(w)
            .map(|(x, wk)| wk * (x.modulus() / scale).powf(gamma))
            .sum(),
    };
    scale * sum.powf(1.0 / gamma)
}

/// A weighted `ℓ^γ` space of fixed dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct LpSpace {
    dim: usize,
    exponent: Exponent,
    weights: Option<Arc<[f64]>>,
}

impl LpSpace {
    pub fn new(dim: usize, exponent: Exponent) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Empty);
        }
        Ok(LpSpace {
            dim,
            exponent,
            weights: None,
        })
    }

    pub fn weighted(exponent: Exponent, weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty);
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::NonPositiveWeight);
        }
        Ok(LpSpace {
            dim: weights.len(),
            exponent,
            weights: Some(weights.into()),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn exponent(&self) -> Exponent {
        self.exponent
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    /// Weight of coordinate `k` (1 when unweighted).
    pub fn weight(&self, k: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[k])
    }

    /// The dual space: conjugate exponent, same weights.
    pub fn dual(&self) -> LpSpace {
        LpSpace {
            dim: self.dim,
            exponent: self.exponent.conjugate(),
            weights: self.weights.clone(),
        }
    }

    fn check<T>(&self, u: &[T]) -> Result<()> {
        if u.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: u.len(),
            });
        }
        Ok(())
    }

    pub fn norm<T: Scalar>(&self, u: &DVector<T>) -> Result<f64> {
        self.check(u.as_slice())?;
        Ok(self.norm_slice(u.as_slice()))
    }

    pub(crate) fn norm_slice<T: Scalar>(&self, u: &[T]) -> f64 {
        weighted_norm(u, self.weights(), self.exponent.0)
    }

    /// Norm of a dual-space coordinate vector.
    pub fn dual_norm<T: Scalar>(&self, w: &DVector<T>) -> Result<f64> {
        self.check(w.as_slice())?;
        Ok(weighted_norm(w.as_slice(), self.weights(), self.exponent.conjugate().0))
    }

    /// The compatible semi-inner product `[u, v]`.
    pub fn sip<T: Scalar>(&self, u: &DVector<T>, v: &DVector<T>) -> Result<T> {
        self.check(u.as_slice())?;
        self.check(v.as_slice())?;
        Ok(self.sip_slice(u.as_slice(), v.as_slice()))
    }

    pub(crate) fn sip_slice<T: Scalar>(&self, u: &[T], v: &[T]) -> T {
        let gamma = self.exponent.0;
        let nv = self.norm_slice(v);
        let mut acc = T::zero();
        for (k, (uk, vk)) in u.iter().zip(v).enumerate() {
            let r = relative_power(vk.modulus(), nv, gamma);
            if r != 0.0 {
                acc += (*uk * vk.conjugate()).scale(r * self.weight(k));
            }
        }
        acc
    }

    /// The duality map `u ↦ u*`.
    pub fn dualize<T: Scalar>(&self, u: &DVector<T>) -> Result<DVector<T>> {
        self.check(u.as_slice())?;
        let mut out = DVector::zeros(self.dim);
        self.dualize_into(u.as_slice(), out.as_mut_slice(), self.exponent.0);
        Ok(out)
    }

    pub(crate) fn dualize_into<T: Scalar>(&self, u: &[T], out: &mut [T], gamma: f64) {
        let nu = weighted_norm(u, self.weights(), gamma);
        for (o, uk) in out.iter_mut().zip(u) {
            let r = relative_power(uk.modulus(), nu, gamma);
            *o = if r == 0.0 { T::zero() } else { uk.conjugate().scale(r) };
        }
    }

    /// Inverse of [`LpSpace::dualize`]: the duality map of the dual space.
    pub fn undualize<T: Scalar>(&self, w: &DVector<T>) -> Result<DVector<T>> {
        self.dual().dualize(w)
    }

    /// The bilinear pairing `(u, w) = sum_k weight_k u_k w_k` between the
    /// space and its dual.
    pub fn pairing<T: Scalar>(&self, u: &DVector<T>, w: &DVector<T>) -> Result<T> {
        self.check(u.as_slice())?;
        self.check(w.as_slice())?;
        Ok(self.pairing_slice(u.as_slice(), w.as_slice()))
    }

    pub(crate) fn pairing_slice<T: Scalar>(&self, u: &[T], w: &[T]) -> T {
        let mut acc = T::zero();
        for (k, (uk, wk)) in u.iter().zip(w).enumerate() {
            acc += (*uk * *wk).scale(self.weight(k));
        }
        acc
    }
}

/// Blocks of [`LpSpace`]s joined with an outer `ℓ^p` norm.
///
/// Vectors are stored flat, block after block.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductSpace {
    blocks: Vec<LpSpace>,
    offsets: Vec<usize>,
    outer: Exponent,
}

impl ProductSpace {
    pub fn new(blocks: Vec<LpSpace>, outer: Exponent) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Empty);
        }
        let mut offsets = Vec::with_capacity(blocks.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for b in &blocks {
            acc += b.dim();
            offsets.push(acc);
        }
        Ok(ProductSpace { blocks, offsets, outer })
    }

    pub fn blocks(&self) -> &[LpSpace] {
        &self.blocks
    }

    pub fn outer_exponent(&self) -> Exponent {
        self.outer
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn block_range(&self, j: usize) -> std::ops::Range<usize> {
        self.offsets[j]..self.offsets[j + 1]
    }

    /// Pairing weight of flat coordinate `k`.
    pub fn coordinate_weights(&self) -> Vec<f64> {
        self.blocks
            .iter()
            .flat_map(|b| (0..b.dim()).map(move |k| b.weight(k)))
            .collect()
    }

    pub fn dual(&self) -> ProductSpace {
        ProductSpace {
            blocks: self.blocks.iter().map(LpSpace::dual).collect(),
            offsets: self.offsets.clone(),
            outer: self.outer.conjugate(),
        }
    }

    fn check<T>(&self, u: &[T]) -> Result<()> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.len(),
            });
        }
        Ok(())
    }

    fn block_norms<T: Scalar>(&self, u: &[T]) -> Vec<f64> {
        self.blocks
            .iter()
            .enumerate()
            .map(|(j, b)| b.norm_slice(&u[self.block_range(j)]))
            .collect()
    }

    fn combine(&self, norms: &[f64]) -> f64 {
        if norms.len() == 1 {
            return norms[0];
        }
        weighted_norm(norms, None, self.outer.0)
    }

    pub fn norm<T: Scalar>(&self, u: &DVector<T>) -> Result<f64> {
        self.check(u.as_slice())?;
        Ok(self.combine(&self.block_norms(u.as_slice())))
    }

    pub fn dual_norm<T: Scalar>(&self, w: &DVector<T>) -> Result<f64> {
        self.dual().norm(w)
    }

    pub fn sip<T: Scalar>(&self, f: &DVector<T>, g: &DVector<T>) -> Result<T> {
        self.check(f.as_slice())?;
        self.check(g.as_slice())?;
        let (f, g) = (f.as_slice(), g.as_slice());
        let norms = self.block_norms(g);
        let total = self.combine(&norms);
        let mut acc = T::zero();
        for (j, b) in self.blocks.iter().enumerate() {
            let factor = if self.blocks.len() == 1 {
                1.0
            } else {
                relative_power(norms[j], total, self.outer.0)
            };
            if factor != 0.0 {
                let r = self.block_range(j);
                acc += b.sip_slice(&f[r.clone()], &g[r]).scale(factor);
            }
        }
        Ok(acc)
    }

    pub fn dualize<T: Scalar>(&self, f: &DVector<T>) -> Result<DVector<T>> {
        self.check(f.as_slice())?;
        let f = f.as_slice();
        let norms = self.block_norms(f);
        let total = self.combine(&norms);
        let mut out = DVector::zeros(self.dim());
        for (j, b) in self.blocks.iter().enumerate() {
            let r = self.block_range(j);
            let factor = if self.blocks.len() == 1 {
                1.0
            } else {
                relative_power(norms[j], total, self.outer.0)
            };
            if factor == 0.0 {
                continue;
            }
            let slot = &mut out.as_mut_slice()[r.clone()];
            b.dualize_into(&f[r], slot, b.exponent().0);
            if factor != 1.0 {
                slot.iter_mut().for_each(|x| *x = x.scale(factor));
            }
        }
        Ok(out)
    }

    pub fn undualize<T: Scalar>(&self, w: &DVector<T>) -> Result<DVector<T>> {
        self.dual().dualize(w)
    }

    pub fn pairing<T: Scalar>(&self, u: &DVector<T>, w: &DVector<T>) -> Result<T> {
        self.check(u.as_slice())?;
        self.check(w.as_slice())?;
        let mut acc = T::zero();
        for (j, b) in self.blocks.iter().enumerate() {
            let r = self.block_range(j);
            acc += b.pairing_slice(&u.as_slice()[r.clone()], &w.as_slice()[r]);
        }
        Ok(acc)
    }

    /// Checks that `other` has the same block dimensions.
    pub fn same_shape(&self, other: &ProductSpace) -> bool {
        self.offsets == other.offsets
    }
}

impl From<LpSpace> for ProductSpace {
    fn from(space: LpSpace) -> Self {
        let outer = space.exponent();
        ProductSpace::new(vec![space], outer).expect("one block")
    }
}
