use crate::error::{Error, Result};

/// The outer loss `φ` applied to residual norms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LossSpec {
    /// `φ(t) = t^ρ` with `ρ ≥ 2`.
    Power { rho: f64 },
    /// `φ(t) = t²`.
    Square,
    /// `φ(t) = max(0, t − ε)`, optionally smoothed by a quadratic knee of
    /// width `μ`: `(t − ε)²/2μ` on `[ε, ε + μ]` and `t − ε − μ/2` beyond.
    EpsInsensitive { eps: f64, smoothing: Option<f64> },
}

impl LossSpec {
    pub fn power(rho: f64) -> Result<Self> {
        if !(rho.is_finite() && rho >= 2.0) {
            return Err(Error::InvalidParameter(format!(
                "loss exponent must be >= 2, got {rho}"
            )));
        }
        Ok(LossSpec::Power { rho })
    }

    pub fn eps_insensitive(eps: f64, smoothing: Option<f64>) -> Result<Self> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::InvalidParameter(format!("epsilon must be positive, got {eps}")));
        }
        if let Some(mu) = smoothing {
            if !(mu.is_finite() && mu > 0.0) {
                return Err(Error::InvalidParameter(format!("smoothing must be positive, got {mu}")));
            }
        }
        Ok(LossSpec::EpsInsensitive { eps, smoothing })
    }

    pub fn value(&self, t: f64) -> f64 {
        match *self {
            LossSpec::Square => t * t,
            LossSpec::Power { rho } => t.powf(rho),
            LossSpec::EpsInsensitive { eps, smoothing } => {
                let excess = t - eps;
                match smoothing {
                    _ if excess <= 0.0 => 0.0,
                    None => excess,
                    Some(mu) if excess <= mu => excess * excess / (2.0 * mu),
                    Some(mu) => excess - mu / 2.0,
                }
            }
        }
    }

    pub fn derivative(&self, t: f64) -> Result<f64> {
        Ok(match *self {
            LossSpec::Square => 2.0 * t,
            LossSpec::Power { rho } => rho * t.powf(rho - 1.0),
            LossSpec::EpsInsensitive { smoothing: None, .. } => return Err(Error::NonDifferentiableLoss),
            LossSpec::EpsInsensitive {
                eps,
                smoothing: Some(mu),
            } => ((t - eps) / mu).clamp(0.0, 1.0),
        })
    }

    /// `φ'(t)/t`, with `0/0 := 0`.
    pub fn ratio(&self, t: f64) -> Result<f64> {
        Ok(match *self {
            LossSpec::Square => 2.0,
            LossSpec::Power { rho: 2.0 } => 2.0,
            LossSpec::Power { rho } => {
                if t == 0.0 {
                    0.0
                } else {
                    rho * t.powf(rho - 2.0)
                }
            }
            LossSpec::EpsInsensitive { .. } => {
                let d = self.derivative(t)?;
                if d == 0.0 {
                    0.0
                } else {
                    d / t
                }
            }
        })
    }

    pub fn is_differentiable(&self) -> bool {
        !matches!(self, LossSpec::EpsInsensitive { smoothing: None, .. })
    }
}

/// `Ψ(t) = t^σ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularizerSpec {
    sigma: f64,
}

impl RegularizerSpec {
    /// `σ ≥ 1`; `σ = 1` is only meant for the zero-minimizer criterion.
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "regularizer exponent must be >= 1, got {sigma}"
            )));
        }
        Ok(RegularizerSpec { sigma })
    }

    pub fn squared() -> Self {
        RegularizerSpec { sigma: 2.0 }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn value(&self, t: f64) -> f64 {
        t.powf(self.sigma)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        if self.sigma == 1.0 {
            1.0
        } else {
            self.sigma * t.powf(self.sigma - 1.0)
        }
    }

    /// `Ψ'(t)/t`, with `0/0 := 0`.
    pub fn ratio(&self, t: f64) -> f64 {
        if t == 0.0 {
            0.0
        } else {
            self.derivative(t) / t
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothed_hinge_is_c1() {
        let l = LossSpec::eps_insensitive(0.5, Some(0.1)).unwrap();
        for knot in [0.5, 0.6] {
            let below = l.value(knot - 1e-9);
            let above = l.value(knot + 1e-9);
            assert!((below - above).abs() < 1e-8);
            let d1 = l.derivative(knot - 1e-9).unwrap();
            let d2 = l.derivative(knot + 1e-9).unwrap();
            assert!((d1 - d2).abs() < 1e-6);
        }
        assert_eq!(l.value(0.2), 0.0);
        assert!((l.value(1.0) - 0.45).abs() < 1e-15);
    }

    #[test]
    fn exact_hinge_refuses_gradient() {
        let l = LossSpec::eps_insensitive(0.5, None).unwrap();
        assert_eq!(l.value(2.0), 1.5);
        assert_eq!(l.derivative(2.0), Err(Error::NonDifferentiableLoss));
    }

    #[test]
    fn ratios_at_zero() {
        assert_eq!(LossSpec::Square.ratio(0.0).unwrap(), 2.0);
        assert_eq!(LossSpec::power(3.0).unwrap().ratio(0.0).unwrap(), 0.0);
        assert_eq!(RegularizerSpec::squared().ratio(0.0), 0.0);
        assert_eq!(RegularizerSpec::new(1.0).unwrap().derivative(0.0), 1.0);
        assert!(RegularizerSpec::new(0.5).is_err());
        assert!(LossSpec::power(1.5).is_err());
    }
}
