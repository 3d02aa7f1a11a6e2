//! Weighted Gramians and the certificates built on them.
//!
//! In matrix form every Gramian here is an integral of the kernel
//! `K(s) = e^{-sA} B Bᵀ e^{-sAᵀ}`:
//!
//! * standard: `Λ = ∫₀^{end} e(s) K(s) ds` together with
//!   `Λ' = −∫₀^{end} e'(s) K(s) ds`, both by quadrature;
//! * truncated: `Λ̃ = ∫₀^{T₀} e^{-2ωs} K(s) ds`;
//! * infinite-horizon: `Λ∞ = ∫₀^∞ e^{-2ωs} K(s) ds`, obtained from the
//!   Lyapunov equation `(A + ωI)Λ∞ + Λ∞(A + ωI)ᵀ = BBᵀ`.
//!
//! The standard pair satisfies `AΛ + ΛAᵀ + Λ' − BBᵀ = 0`; since `Λ'` is
//! integrated separately rather than derived from that identity, its residual
//! is an independent check on the quadrature.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::linalg::{cholesky, spectral_norm, symmetric_eigenvalues, symmetrize};
use crate::lti::LtiSystem;
use crate::ode::{rk4_step, step_count};
use crate::quadrature::{integrate_kernel, QuadratureConfig};
use crate::weight::WeightProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GramianVariant {
    Standard,
    Truncated,
    InfiniteHorizon,
}

impl GramianVariant {
    pub fn name(&self) -> &'static str {
        match self {
            GramianVariant::Standard => "standard",
            GramianVariant::Truncated => "truncated",
            GramianVariant::InfiniteHorizon => "infinite",
        }
    }
}

impl fmt::Display for GramianVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GramianVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "standard" => Ok(GramianVariant::Standard),
            "truncated" => Ok(GramianVariant::Truncated),
            "infinite" | "infinite-horizon" => Ok(GramianVariant::InfiniteHorizon),
            other => Err(format!(
                "unknown Gramian variant `{other}` (expected standard, truncated or infinite)"
            )),
        }
    }
}

/// A positive definite Gramian with its factorization and metadata.
#[derive(Debug, Clone)]
pub struct GramianBundle {
    lambda: DMatrix<f64>,
    lambda_prime: Option<DMatrix<f64>>,
    factor: Cholesky<f64, Dyn>,
    condition_number: f64,
    quad_nodes: usize,
    variant: GramianVariant,
    omega: f64,
    knot: f64,
}

impl GramianBundle {
    fn new(
        lambda: DMatrix<f64>,
        lambda_prime: Option<DMatrix<f64>>,
        quad_nodes: usize,
        variant: GramianVariant,
        omega: f64,
        knot: f64,
    ) -> Result<Self> {
        let lambda = symmetrize(&lambda);
        let factor = cholesky(&lambda, "Lambda")?;
        let ev = symmetric_eigenvalues(&lambda);
        let (lo, hi) = (ev[0], ev[ev.len() - 1]);
        if lo <= 0.0 {
            return Err(Error::NotPositiveDefinite("Lambda"));
        }
        Ok(Self {
            lambda,
            lambda_prime: lambda_prime.map(|m| symmetrize(&m)),
            factor,
            condition_number: hi / lo,
            quad_nodes,
            variant,
            omega,
            knot,
        })
    }

    pub fn lambda(&self) -> &DMatrix<f64> {
        &self.lambda
    }

    /// `Λ'`; only the standard variant carries one.
    pub fn lambda_prime(&self) -> Result<&DMatrix<f64>> {
        self.lambda_prime.as_ref().ok_or(Error::VariantMismatch {
            expected: "standard",
            got: self.variant.name(),
        })
    }

    pub fn condition_number(&self) -> f64 {
        self.condition_number
    }

    /// Number of kernel evaluations used (0 for the Lyapunov solve).
    pub fn quad_nodes(&self) -> usize {
        self.quad_nodes
    }

    pub fn variant(&self) -> GramianVariant {
        self.variant
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Knot of the weight (standard), horizon `T₀` (truncated) or `+∞`.
    pub fn knot(&self) -> f64 {
        self.knot
    }

    pub fn dim(&self) -> usize {
        self.lambda.nrows()
    }

    /// `Λ⁻¹ · rhs` through the Cholesky factor.
    pub fn solve(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        self.factor.solve(rhs)
    }

    pub fn solve_vec(&self, rhs: &DVector<f64>) -> DVector<f64> {
        self.factor.solve(rhs)
    }

    fn require_standard(&self) -> Result<()> {
        if self.variant == GramianVariant::Standard {
            Ok(())
        } else {
            Err(Error::VariantMismatch {
                expected: "standard",
                got: self.variant.name(),
            })
        }
    }
}

fn validate_omega(omega: f64) -> Result<()> {
    if omega > 0.0 && omega.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "omega",
            value: omega,
            reason: "decay rate must be positive and finite",
        })
    }
}

/// Standard weighted Gramian `Λ` and its derivative companion `Λ'`.
pub fn weighted_gramian(
    sys: &LtiSystem,
    weight: &WeightProfile,
    quad: &QuadratureConfig,
) -> Result<GramianBundle> {
    sys.require_controllable()?;
    let width = quad.panel_width(spectral_norm(sys.a()), 0.5 / weight.omega());
    let e = |s: f64| weight.eval_unchecked(s);
    let neg_de = |s: f64| -weight.derivative_unchecked(s);
    let out = integrate_kernel(
        sys.a(),
        sys.b(),
        &[0.0, weight.knot(), weight.end()],
        width,
        quad,
        &[&e, &neg_de],
    )?;
    let mut mats = out.matrices.into_iter();
    let lambda = mats.next().expect("two weights");
    let lambda_prime = mats.next().expect("two weights");
    GramianBundle::new(
        lambda,
        Some(lambda_prime),
        out.nodes,
        GramianVariant::Standard,
        weight.omega(),
        weight.knot(),
    )
}

/// `Λ̃ = ∫₀^{T₀} e^{-2ωt} e^{-tA} B Bᵀ e^{-tAᵀ} dt` (no ramp, no `Λ'`).
pub fn truncated_gramian(
    sys: &LtiSystem,
    omega: f64,
    horizon: f64,
    quad: &QuadratureConfig,
) -> Result<GramianBundle> {
    validate_omega(omega)?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "T0",
            value: horizon,
            reason: "horizon must be positive and finite",
        });
    }
    sys.require_controllable()?;
    let width = quad.panel_width(spectral_norm(sys.a()), 0.5 / omega);
    let decay = |s: f64| (-2.0 * omega * s).exp();
    let mut out = integrate_kernel(sys.a(), sys.b(), &[0.0, horizon], width, quad, &[&decay])?;
    GramianBundle::new(
        out.matrices.swap_remove(0),
        None,
        out.nodes,
        GramianVariant::Truncated,
        omega,
        horizon,
    )
}

/// `Λ∞` from `(A + ωI)Λ + Λ(A + ωI)ᵀ = BBᵀ`, solved in the `n(n+1)/2`
/// independent entries of the symmetric unknown.
pub fn infinite_horizon_gramian(sys: &LtiSystem, omega: f64) -> Result<GramianBundle> {
    validate_omega(omega)?;
    sys.require_controllable()?;
    let n = sys.n();
    let min_real_part = crate::feedback::eigenvalues(sys.a())?
        .iter()
        .map(|z| z.re)
        .fold(f64::INFINITY, f64::min);
    if min_real_part <= -omega {
        return Err(Error::NotIntegrable {
            min_real_part,
            neg_omega: -omega,
        });
    }

    let shifted = sys.a() + DMatrix::identity(n, n) * omega;
    let rhs_full = sys.b() * sys.b().transpose();
    let idx = |i: usize, j: usize| {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        // row-major upper triangle
        i * n - i * (i + 1) / 2 + j
    };
    let unknowns = n * (n + 1) / 2;
    let mut op = DMatrix::<f64>::zeros(unknowns, unknowns);
    let mut rhs = DVector::<f64>::zeros(unknowns);
    for i in 0..n {
        for j in i..n {
            let row = idx(i, j);
            rhs[row] = rhs_full[(i, j)];
            for k in 0..n {
                op[(row, idx(k, j))] += shifted[(i, k)];
                op[(row, idx(i, k))] += shifted[(j, k)];
            }
        }
    }
    let sol = op
        .lu()
        .solve(&rhs)
        .ok_or(Error::Singular("Lyapunov operator"))?;
    let lambda = DMatrix::from_fn(n, n, |i, j| sol[idx(i, j)]);
    GramianBundle::new(
        lambda,
        None,
        0,
        GramianVariant::InfiniteHorizon,
        omega,
        f64::INFINITY,
    )
}

/// `Λ ξ₀` without forming `Λ`: solve `ξ' = −Aᵀξ` from `ξ₀`, drive
/// `y' = Ay + Bu` with `u = e(t)Bᵀξ(t)` backwards from `y(end) = 0`, and
/// return `−y(0)`.
pub fn apply_gramian_via_odes(
    sys: &LtiSystem,
    weight: &WeightProfile,
    xi0: &DVector<f64>,
) -> Result<DVector<f64>> {
    let cols = DMatrix::from_column_slice(xi0.len(), 1, xi0.as_slice());
    let out = apply_gramian_via_odes_many(sys, weight, &cols)?;
    Ok(out.column(0).into_owned())
}

/// Column-wise [`apply_gramian_via_odes`] for several initial adjoint states.
pub fn apply_gramian_via_odes_many(
    sys: &LtiSystem,
    weight: &WeightProfile,
    xi0: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let n = sys.n();
    if xi0.nrows() != n {
        return Err(Error::DimensionMismatch {
            what: "adjoint initial state",
            expected: n,
            got: xi0.nrows(),
        });
    }
    let end = weight.end();
    // RK4 global error scales like (dt‖A‖)^4, so stiff systems get smaller steps.
    let a_norm = spectral_norm(sys.a());
    let mut dt_max = (1e-3f64).min(end / 2000.0);
    if a_norm > 0.0 {
        dt_max = dt_max.min(0.03 / a_norm);
    }
    let steps = step_count(end, dt_max);
    let dt = end / steps as f64;
    if dt.is_nan() || dt <= 0.0 || end + dt == end {
        return Err(Error::StepUnderflow(dt));
    }
    let a = sys.a();
    let at = a.transpose();
    let bbt = sys.b() * sys.b().transpose();
    let k = xi0.ncols();

    // Adjoint trajectory forward to t = end.
    let adjoint = |_t: f64, x: &DMatrix<f64>| -(&at * x);
    let mut xi = xi0.clone();
    for step in 0..steps {
        xi = rk4_step(&adjoint, step as f64 * dt, &xi, dt);
    }

    // Reversed time τ = end − t: ξ̃' = Aᵀξ̃, ỹ' = −Aỹ − e(end−τ) BBᵀ ξ̃.
    let reversed = |tau: f64, z: &DMatrix<f64>| {
        let xi_r = z.rows(0, n);
        let y_r = z.rows(n, n);
        let e = weight.eval_unchecked((end - tau).max(0.0));
        let mut dz = DMatrix::<f64>::zeros(2 * n, k);
        dz.rows_mut(0, n).copy_from(&(&at * xi_r));
        dz.rows_mut(n, n)
            .copy_from(&(-(a * y_r) - (&bbt * xi_r) * e));
        dz
    };
    let mut z = DMatrix::<f64>::zeros(2 * n, k);
    z.rows_mut(0, n).copy_from(&xi);
    for step in 0..steps {
        z = rk4_step(&reversed, step as f64 * dt, &z, dt);
    }
    Ok(-z.rows(n, n).into_owned())
}

/// `‖AΛ + ΛAᵀ + Λ' − BBᵀ‖_F / ‖BBᵀ‖_F` for a standard bundle.
pub fn riccati_residual(sys: &LtiSystem, g: &GramianBundle) -> Result<f64> {
    g.require_standard()?;
    if g.dim() != sys.n() {
        return Err(Error::DimensionMismatch {
            what: "Gramian",
            expected: sys.n(),
            got: g.dim(),
        });
    }
    let lam = g.lambda();
    let bbt = sys.b() * sys.b().transpose();
    let residual = sys.a() * lam + lam * sys.a().transpose() + g.lambda_prime()? - &bbt;
    Ok(residual.norm() / bbt.norm())
}

/// `Λ⁻¹ Λ' Λ⁻¹`.
pub fn damping_operator(g: &GramianBundle) -> Result<DMatrix<f64>> {
    let lp = g.lambda_prime()?;
    let left = g.solve(lp);
    Ok(symmetrize(&g.solve(&left.transpose())))
}

/// Symmetric positive semidefinite square root of `Λ⁻¹ Λ' Λ⁻¹`.
pub fn damping_root(g: &GramianBundle) -> Result<DMatrix<f64>> {
    let lp = g.lambda_prime()?;
    let lp_min = symmetric_eigenvalues(lp)[0];
    if lp_min < -1e-10 * spectral_norm(lp).max(1.0) {
        return Err(Error::Indefinite(lp_min));
    }
    let l = damping_operator(g)?;
    let eig = nalgebra::SymmetricEigen::new(l);
    let roots = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    let v = &eig.eigenvectors;
    Ok(symmetrize(
        &(v * DMatrix::from_diagonal(&roots) * v.transpose()),
    ))
}

#[derive(Debug, Clone)]
pub struct Coercivity {
    /// `R = Λ' − 2ωΛ`
    pub margin: DMatrix<f64>,
    pub min_eigenvalue: f64,
}

/// `R = Λ' − 2ωΛ`; `Λ' ⪰ 2ωΛ` is the congruent form of `L ⪰ 2ωΛ⁻¹`.
pub fn coercivity_margin(g: &GramianBundle, omega: f64) -> Result<Coercivity> {
    let margin = g.lambda_prime()? - g.lambda() * (2.0 * omega);
    let min_eigenvalue = symmetric_eigenvalues(&margin)[0];
    Ok(Coercivity {
        margin,
        min_eigenvalue,
    })
}
