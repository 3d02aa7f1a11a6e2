//! Explicit rapid-stabilization feedback for finite-dimensional linear
//! time-reversible systems.
//!
//! Given `x' = Ax + Bu` with `(A, B)` controllable, a weighted Gramian `Λ` of
//! the adjoint group yields the feedback `u = −BᵀΛ⁻¹x`, whose closed loop
//! decays at least like `e^{−ωt}`. The crate computes the Gramian variants,
//! the feedback, and a set of numerical certificates: the Riccati identity
//! `AΛ + ΛAᵀ + Λ' − BBᵀ = 0`, coercivity `Λ' ⪰ 2ωΛ`, the similarity between
//! the closed loop and its conjugate generator, Lyapunov decay along
//! trajectories and the plateau-length decay estimate.

pub mod error;
pub mod feedback;
pub mod gramian;
pub mod linalg;
pub mod lti;
mod ode;
pub mod quadrature;
pub mod sim;
pub mod weight;

pub use error::{Error, Result};
pub use feedback::{
    conjugate_generator, decay_bound, decay_bound_with, dominant_period, eigen_discriminant_2x2,
    eigenvalues, spectral_abscissa, synthesize, Conjugation, DecayBound, FeedbackLaw, Synthesis,
};
pub use gramian::{
    apply_gramian_via_odes, apply_gramian_via_odes_many, coercivity_margin, damping_operator,
    damping_root, infinite_horizon_gramian, riccati_residual, truncated_gramian, weighted_gramian,
    Coercivity, GramianBundle, GramianVariant,
};
pub use lti::{expm, Direction, GrowthBound, LtiSystem, ObservabilityConstants};
pub use quadrature::QuadratureConfig;
pub use sim::{
    fit_decay_rate, integrate, lyapunov_profile, sweep_t, LyapunovProfile, SweepRow, Trajectory,
};
pub use weight::WeightProfile;
