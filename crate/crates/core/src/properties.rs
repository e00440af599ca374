//! Kernel identities and inequalities evaluated on concrete instances.
//!
//! Every check returns a number that should be at most a tolerance: either a
//! residual of an identity or the amount by which an inequality is violated
//! (`lhs − rhs`, negative when it holds with room to spare).

use nalgebra::DVector;
use rand::Rng;

use crate::error::Result;
use crate::kernel::{estimate_operator_norm, FeatureMapSpec, RkbsFunction};
use crate::scalar::Scalar;

/// Random directions used by every operator-norm estimate.
pub const NORM_SAMPLES: usize = 200;

/// The outcome of [`kernel_property_report`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PropertyReport {
    /// `−Re[K(x, x)ξ, ξ]`.
    pub diagonal_negativity: f64,
    /// `|[K(x, x)ξ, ξ] − ‖K(x, ·)ξ‖²|`.
    pub diagonal_residual: f64,
    /// `|[K(x, y)ξ, η]| − [K(x, x)ξ, ξ]^{1/2} [K(y, y)η, η]^{1/2}`.
    pub cauchy_schwarz: f64,
    /// `‖K(x, y)‖ − ‖K(x, x)‖^{1/2} ‖K(y, y)‖^{1/2}`.
    pub operator_norm: f64,
    /// `‖K(x, ·)ξ‖ − ‖K(x, x)‖^{1/2} ‖ξ‖`.
    pub section_norm: f64,
    /// `‖K(x, y)(αξ) − αK(x, y)ξ‖`.
    pub homogeneity: f64,
    /// `‖(K(x, ·)ξ)* + (K(x, ·)η)* − (K(x, ·)τ)*‖` with `τ* = ξ* + η*`.
    pub dual_additivity: f64,
    /// `‖f(x) − g(x)‖ − ‖f − g‖ ‖K(x, x)‖^{1/2}`.
    pub pointwise: f64,
    /// `‖Φ(y)Φ†(x)ξ − J⁻¹(δ_x)*Jξ (y)‖`.
    pub two_path: f64,
    /// `|[f(x), ξ] − [f, K(x, ·)ξ]|`.
    pub reproducing: f64,
}

impl PropertyReport {
    /// Names and values, in declaration order.
    pub fn entries(&self) -> [(&'static str, f64); 10] {
        [
            ("diagonal_negativity", self.diagonal_negativity),
            ("diagonal_residual", self.diagonal_residual),
            ("cauchy_schwarz", self.cauchy_schwarz),
            ("operator_norm", self.operator_norm),
            ("section_norm", self.section_norm),
            ("homogeneity", self.homogeneity),
            ("dual_additivity", self.dual_additivity),
            ("pointwise", self.pointwise),
            ("two_path", self.two_path),
            ("reproducing", self.reproducing),
        ]
    }
}

/// Inputs of one property check.
#[derive(Clone, Debug)]
pub struct PropertyInstance<T: Scalar> {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub xi: DVector<T>,
    pub eta: DVector<T>,
    pub alpha: T,
    pub f: DVector<T>,
    pub g: DVector<T>,
}

/// `|[f(x), ξ]_Λ − [f, K(x, ·)ξ]_ℬ|`.
pub fn reproducing_residual<T: Scalar>(f: &RkbsFunction<T>, x: &[f64], xi: &DVector<T>) -> Result<f64> {
    let space = f.space();
    let lhs = space.output_space().sip(&f.evaluate(x)?, xi)?;
    let section = space.generalized_adjoint_apply(x, xi)?;
    let rhs = space.feature_space().sip(f.coefficient(), &section)?;
    Ok((lhs - rhs).modulus())
}

/// Evaluates every kernel identity and inequality at one instance.
///
/// Operator norms are estimated with [`estimate_operator_norm`], seeded with
/// the directions at which each inequality is tested so both sides are
/// estimated consistently.
pub fn kernel_property_report<T: Scalar, R: Rng + ?Sized>(
    space: &std::sync::Arc<FeatureMapSpec<T>>,
    inst: &PropertyInstance<T>,
    rng: &mut R,
) -> Result<PropertyReport> {
    let out = space.output_space();
    let (x, y) = (inst.x.as_slice(), inst.y.as_slice());
    let (xi, eta) = (&inst.xi, &inst.eta);

    let kxx_xi = space.kernel_apply(x, x, xi)?;
    let kyy_eta = space.kernel_apply(y, y, eta)?;
    let kxy_xi = space.kernel_apply(x, y, xi)?;
    let section_xi = space.generalized_adjoint_apply(x, xi)?;
    let section_norm = space.feature_space().norm(&section_xi)?;

    let diag_x = out.sip(&kxx_xi, xi)?;
    let diag_y = out.sip(&kyy_eta, eta)?;
    let diagonal_negativity = -diag_x.real();
    let diagonal_residual = (diag_x - T::from_real(section_norm * section_norm)).modulus();

    let cross = out.sip(&kxy_xi, eta)?.modulus();
    let cauchy_schwarz = cross - diag_x.real().max(0.0).sqrt() * diag_y.real().max(0.0).sqrt();

    let kxy = estimate_operator_norm(
        out,
        |v: &DVector<T>| space.kernel_apply(x, y, v),
        rng,
        NORM_SAMPLES,
        std::slice::from_ref(xi),
    )?;
    let eta_hat = space.kernel_apply(x, y, &kxy.argmax)?;
    let f = RkbsFunction::new(space, inst.f.clone())?;
    let g = RkbsFunction::new(space, inst.g.clone())?;
    let h = f.sub(&g)?;
    let hx = h.evaluate(x)?;
    let kxx = estimate_operator_norm(
        out,
        |v: &DVector<T>| space.kernel_apply(x, x, v),
        rng,
        NORM_SAMPLES,
        &[kxy.argmax.clone(), xi.clone(), hx.clone()],
    )?;
    let kyy = estimate_operator_norm(
        out,
        |v: &DVector<T>| space.kernel_apply(y, y, v),
        rng,
        NORM_SAMPLES,
        &[eta_hat, eta.clone()],
    )?;
    let operator_norm = kxy.value - kxx.value.sqrt() * kyy.value.sqrt();
    let section_bound = section_norm - kxx.value.sqrt() * out.norm(xi)?;

    let scaled = space.kernel_apply(x, y, &(xi * inst.alpha))?;
    let homogeneity = (scaled - &kxy_xi * inst.alpha).norm();

    let tau = out.undualize(&(out.dualize(xi)? + out.dualize(eta)?))?;
    let sum = space.dual_section(x, xi)? + space.dual_section(x, eta)?;
    let dual_additivity = (sum - space.dual_section(x, &tau)?).norm();

    let pointwise = out.norm(&hx)? - h.norm() * kxx.value.sqrt();

    let two_path = (space.kernel_apply_via_functional(x, y, xi)? - kxy_xi).norm();
    let reproducing = reproducing_residual(&f, x, xi)?;

    Ok(PropertyReport {
        diagonal_negativity,
        diagonal_residual,
        cauchy_schwarz,
        operator_norm,
        section_norm: section_bound,
        homogeneity,
        dual_additivity,
        pointwise,
        two_path,
        reproducing,
    })
}

/// A random instance for `space`, with points in `[−1.5, 1.5]^d`.
pub fn random_instance<T: Scalar, R: Rng + ?Sized>(space: &FeatureMapSpec<T>, rng: &mut R) -> PropertyInstance<T> {
    use crate::random::{random_point, random_scalar, random_vector};
    PropertyInstance {
        x: random_point(rng, space.input_dim()),
        y: random_point(rng, space.input_dim()),
        xi: random_vector(rng, space.output_dim()),
        eta: random_vector(rng, space.output_dim()),
        alpha: random_scalar(rng),
        f: random_vector(rng, space.feature_dim()),
        g: random_vector(rng, space.feature_dim()),
    }
}
