//! The decay weight: `e^{-2ωs}` up to the knot, then a linear ramp reaching
//! zero at `end = knot + 1/(2ω)`.
//!
//! The ramp slope `-2ω e^{-2ω·knot}` equals the left derivative of the
//! exponential at the knot, so the weight is C¹.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightProfile {
    omega: f64,
    knot: f64,
}

impl WeightProfile {
    pub fn new(omega: f64, knot: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "omega",
                value: omega,
                reason: "decay rate must be positive and finite",
            });
        }
        if !(knot > 0.0 && knot.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "knot",
                value: knot,
                reason: "knot must be positive and finite",
            });
        }
        Ok(Self { omega, knot })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn knot(&self) -> f64 {
        self.knot
    }

    pub fn end(&self) -> f64 {
        self.knot + 0.5 / self.omega
    }

    fn check_domain(&self, s: f64) -> Result<()> {
        // Allow a few ulps past `end` so that `end()` itself round-trips.
        let slack = 4.0 * f64::EPSILON * self.end();
        if s.is_nan() || s < 0.0 || s > self.end() + slack {
            return Err(Error::InvalidParameter {
                name: "s",
                value: s,
                reason: "outside the weight support [0, end]",
            });
        }
        Ok(())
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        self.check_domain(s)?;
        Ok(self.eval_unchecked(s))
    }

    /// Derivative; the value at the knot is the (common) one-sided limit.
    pub fn derivative(&self, s: f64) -> Result<f64> {
        self.check_domain(s)?;
        Ok(self.derivative_unchecked(s))
    }

    pub(crate) fn eval_unchecked(&self, s: f64) -> f64 {
        let w2 = 2.0 * self.omega;
        if s <= self.knot {
            (-w2 * s).exp()
        } else {
            (w2 * (-w2 * self.knot).exp() * (self.end() - s)).max(0.0)
        }
    }

    pub(crate) fn derivative_unchecked(&self, s: f64) -> f64 {
        let w2 = 2.0 * self.omega;
        if s <= self.knot {
            -w2 * (-w2 * s).exp()
        } else {
            -w2 * (-w2 * self.knot).exp()
        }
    }

    /// `∫₀^{end} e(s) ds = (2 − e^{−2ω·knot}) / (4ω)`.
    pub fn integral(&self) -> f64 {
        (2.0 - (-2.0 * self.omega * self.knot).exp()) / (4.0 * self.omega)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use gauss_quad::GaussLegendre;
    use proptest::prelude::*;

    fn w() -> WeightProfile {
        WeightProfile::new(0.5, 1.0).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(w().eval(0.0).unwrap(), 1.0);
        assert_eq!(w().end(), 2.0);
        assert_eq!(w().eval(2.0).unwrap(), 0.0);
        // both pieces at the knot
        let left = (-1.0_f64).exp();
        let right = 2.0 * 0.5 * (-1.0_f64).exp() * (2.0 - 1.0);
        assert_abs_diff_eq!(left, 0.3678794, epsilon = 1e-7);
        assert_abs_diff_eq!(left, right, epsilon = 1e-16);
        assert_abs_diff_eq!(w().eval(1.0).unwrap(), 0.3678794, epsilon = 1e-7);
        assert_abs_diff_eq!(w().eval(1.0 + 1e-12).unwrap(), left, epsilon = 1e-11);
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(w().derivative(0.0).unwrap(), -1.0);
        assert_abs_diff_eq!(w().derivative(1.5).unwrap(), -0.3678794, epsilon = 1e-7);
        assert_abs_diff_eq!(w().derivative(0.5).unwrap(), -0.6065307, epsilon = 1e-7);
    }

    #[test]
    fn derivative_is_continuous_at_knot() {
        let p = WeightProfile::new(0.8, 2.3).unwrap();
        let left = p.derivative(p.knot() - 1e-13).unwrap();
        let right = p.derivative(p.knot() + 1e-13).unwrap();
        assert_abs_diff_eq!(left, right, epsilon = 1e-11);
    }

    #[test]
    fn out_of_domain_is_rejected() {
        assert!(w().eval(-0.1).is_err());
        assert!(w().eval(2.1).is_err());
        assert!(w().derivative(f64::NAN).is_err());
        assert!(WeightProfile::new(0.0, 1.0).is_err());
        assert!(WeightProfile::new(1.0, -1.0).is_err());
    }

    #[test]
    fn quadrature_integral_matches_closed_form() {
        let rule = GaussLegendre::new(16).unwrap();
        for &(omega, knot) in &[(0.5, 1.0), (0.3, 3.0), (2.0, 0.4)] {
            let p = WeightProfile::new(omega, knot).unwrap();
            let panels = 40;
            let mut total = 0.0;
            for (lo, hi) in [(0.0, knot), (knot, p.end())] {
                let h = (hi - lo) / panels as f64;
                for k in 0..panels {
                    let a = lo + k as f64 * h;
                    total += rule.integrate(a, a + h, |s| p.eval(s).unwrap());
                }
            }
            assert_abs_diff_eq!(total, p.integral(), epsilon = 1e-10);
        }
    }

    proptest! {
        #[test]
        fn derivative_dominates_weight(omega in 0.05f64..5.0, knot in 0.1f64..10.0, frac in 0.0f64..=1.0) {
            let p = WeightProfile::new(omega, knot).unwrap();
            let s = frac * p.end();
            let e = p.eval(s).unwrap();
            let de = p.derivative(s).unwrap();
            prop_assert!(-de >= 2.0 * omega * e - 1e-12);
        }

        #[test]
        fn weight_is_nonnegative_and_nonincreasing(omega in 0.05f64..5.0, knot in 0.1f64..10.0,
                                                   f1 in 0.0f64..=1.0, f2 in 0.0f64..=1.0) {
            let p = WeightProfile::new(omega, knot).unwrap();
            let (lo, hi) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
            let a = p.eval(lo * p.end()).unwrap();
            let b = p.eval(hi * p.end()).unwrap();
            prop_assert!(b >= 0.0);
            prop_assert!(b <= a);
        }
    }
}
