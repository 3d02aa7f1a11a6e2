//! Feedback synthesis `F = −BᵀΛ⁻¹`, the closed-loop generator
//! `A_U = A + BF`, its conjugate `A_V = −Aᵀ − Λ⁻¹Λ'` and decay certificates.

use nalgebra::{Complex, DMatrix, DVector, Schur};

use crate::error::{Error, Result};
use crate::gramian::{
    infinite_horizon_gramian, truncated_gramian, weighted_gramian, GramianBundle, GramianVariant,
};
use crate::linalg::{ensure_finite, ensure_square};
use crate::lti::LtiSystem;
use crate::quadrature::QuadratureConfig;
use crate::weight::WeightProfile;

/// Eigenvalues of a real square matrix, in no particular order.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    ensure_square(m, "M")?;
    ensure_finite(m, "M")?;
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 100_000).ok_or(Error::EigenSolver)?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// `max Re λ` over the spectrum.
pub fn spectral_abscissa(m: &DMatrix<f64>) -> Result<f64> {
    Ok(eigenvalues(m)?
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Oscillation period `2π/|Im λ|` of the rightmost eigenvalue, when it is
/// not real.
pub fn dominant_period(m: &DMatrix<f64>) -> Result<Option<f64>> {
    let ev = eigenvalues(m)?;
    let abscissa = ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let scale = abscissa.abs().max(1.0);
    let freq = ev
        .iter()
        .filter(|z| (z.re - abscissa).abs() <= 1e-9 * scale)
        .map(|z| z.im.abs())
        .fold(0.0, f64::max);
    Ok((freq > 1e-12).then(|| 2.0 * std::f64::consts::PI / freq))
}

/// `(tr M)² − 4 det M`; negative means a complex-conjugate pair.
pub fn eigen_discriminant_2x2(m: &DMatrix<f64>) -> Result<f64> {
    if m.shape() != (2, 2) {
        return Err(Error::DimensionMismatch {
            what: "2x2 matrix rows",
            expected: 2,
            got: m.nrows(),
        });
    }
    let tr = m[(0, 0)] + m[(1, 1)];
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    Ok(tr * tr - 4.0 * det)
}

#[derive(Debug, Clone)]
pub struct FeedbackLaw {
    gain: DMatrix<f64>,
    closed_loop: DMatrix<f64>,
    variant: GramianVariant,
    omega: f64,
    knot: f64,
}

impl FeedbackLaw {
    pub fn from_gramian(sys: &LtiSystem, g: &GramianBundle) -> Result<Self> {
        if g.dim() != sys.n() {
            return Err(Error::DimensionMismatch {
                what: "Gramian",
                expected: sys.n(),
                got: g.dim(),
            });
        }
        // Λ symmetric: (Λ⁻¹B)ᵀ = BᵀΛ⁻¹.
        let gain = -g.solve(sys.b()).transpose();
        let closed_loop = sys.a() + sys.b() * &gain;
        Ok(Self {
            gain,
            closed_loop,
            variant: g.variant(),
            omega: g.omega(),
            knot: g.knot(),
        })
    }

    /// `F`, an `m × n` matrix.
    pub fn gain(&self) -> &DMatrix<f64> {
        &self.gain
    }

    /// `A_U = A + BF`.
    pub fn closed_loop(&self) -> &DMatrix<f64> {
        &self.closed_loop
    }

    pub fn variant(&self) -> GramianVariant {
        self.variant
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn knot(&self) -> f64 {
        self.knot
    }

    pub fn control(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.gain * x
    }
}

#[derive(Debug, Clone)]
pub struct Synthesis {
    pub law: FeedbackLaw,
    pub gramian: GramianBundle,
}

/// Builds the Gramian selected by `variant` and the feedback derived from it.
///
/// * `Standard`: weight with knot `t` (`t ≥ t0`; `t = t0` is the basic
///   construction).
/// * `Truncated`: exponential weight on `[0, t0]` only.
/// * `InfiniteHorizon`: exponential weight on `[0, ∞)`; `t0`, `t` unused.
pub fn synthesize(
    sys: &LtiSystem,
    omega: f64,
    t0: f64,
    t: f64,
    variant: GramianVariant,
    quad: &QuadratureConfig,
) -> Result<Synthesis> {
    let gramian = match variant {
        GramianVariant::Standard => {
            check_plateau(t0, t)?;
            weighted_gramian(sys, &WeightProfile::new(omega, t)?, quad)?
        }
        GramianVariant::Truncated => truncated_gramian(sys, omega, t0, quad)?,
        GramianVariant::InfiniteHorizon => infinite_horizon_gramian(sys, omega)?,
    };
    let law = FeedbackLaw::from_gramian(sys, &gramian)?;
    Ok(Synthesis { law, gramian })
}

fn check_plateau(t0: f64, t: f64) -> Result<()> {
    if !(t0 > 0.0 && t0.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "T0",
            value: t0,
            reason: "must be positive and finite",
        });
    }
    if !(t >= t0 && t.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "T",
            value: t,
            reason: "plateau length must satisfy T >= T0",
        });
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Conjugation {
    /// `A_V = −Aᵀ − Λ⁻¹Λ'`
    pub generator: DMatrix<f64>,
    /// `‖Λ⁻¹A_UΛ − A_V‖_F / ‖A_V‖_F`
    pub similarity_error: f64,
}

pub fn conjugate_generator(sys: &LtiSystem, g: &GramianBundle) -> Result<Conjugation> {
    sys.require_controllable()?;
    let lp = g.lambda_prime()?;
    let generator = -sys.a().transpose() - g.solve(lp);
    let law = FeedbackLaw::from_gramian(sys, g)?;
    let conjugated = g.solve(&(law.closed_loop() * g.lambda()));
    let denom = generator.norm();
    let similarity_error = if denom == 0.0 {
        (conjugated - &generator).norm()
    } else {
        (conjugated - &generator).norm() / denom
    };
    Ok(Conjugation {
        generator,
        similarity_error,
    })
}

/// Constants of the plateau-length decay estimate
/// `‖U_T(t)‖ ≤ c' exp((−2ω + γ + αφ(T)) t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayBound {
    pub c: f64,
    pub gamma: f64,
    /// `c₁(1/(2ω))`, largest eigenvalue of `M(1/(2ω))`.
    pub c1_half_omega: f64,
    /// `c₂(T₀)`, smallest eigenvalue of `M(T₀)`.
    pub c2_t0: f64,
    /// `α = 2ω c² c₁(1/(2ω)) / c₂(T₀)`
    pub alpha: f64,
    /// `φ(T) = exp(γT − 2ω(T − T₀))`
    pub phi_t: f64,
    /// `−2ω + γ + αφ(T)`
    pub exponent: f64,
    /// `c ‖Λ_{ω,T}‖ ‖Λ_{ω,T}⁻¹‖`
    pub c_prime: f64,
}

pub fn decay_bound(
    sys: &LtiSystem,
    omega: f64,
    t0: f64,
    t: f64,
    quad: &QuadratureConfig,
) -> Result<DecayBound> {
    check_plateau(t0, t)?;
    let weight = WeightProfile::new(omega, t)?;
    let gramian = weighted_gramian(sys, &weight, quad)?;
    decay_bound_with(sys, omega, t0, t, &gramian, quad)
}

/// [`decay_bound`] reusing an already computed `Λ_{ω,T}`.
pub fn decay_bound_with(
    sys: &LtiSystem,
    omega: f64,
    t0: f64,
    t: f64,
    gramian: &GramianBundle,
    quad: &QuadratureConfig,
) -> Result<DecayBound> {
    check_plateau(t0, t)?;
    let growth = sys.growth_bound();
    let c1_half_omega = sys.direct_constant(0.5 / omega, quad)?;
    let c2_t0 = sys.observability_constants(t0, quad)?.c2;
    let alpha = 2.0 * omega * growth.c * growth.c * c1_half_omega / c2_t0;
    let phi_t = (growth.gamma * t - 2.0 * omega * (t - t0)).exp();
    let exponent = -2.0 * omega + growth.gamma + alpha * phi_t;
    // ‖Λ‖‖Λ⁻¹‖ is the spectral condition number for SPD Λ.
    let c_prime = growth.c * gramian.condition_number();
    Ok(DecayBound {
        c: growth.c,
        gamma: growth.gamma,
        c1_half_omega,
        c2_t0,
        alpha,
        phi_t,
        exponent,
        c_prime,
    })
}
