//! The certificate suite behind `rapidstab verify`.

use nalgebra::DVector;
use rapidstab::{
    coercivity_margin, conjugate_generator, decay_bound_with, integrate, linalg, lyapunov_profile,
    riccati_residual, spectral_abscissa, synthesize, GramianVariant, LtiSystem, QuadratureConfig,
    Synthesis,
};

use crate::table::{fmt_f64, Table};

pub const RICCATI_TOL: f64 = 1e-9;
pub const COERCIVITY_TOL: f64 = -1e-10;
pub const SIMILARITY_TOL: f64 = 1e-8;
pub const ABSCISSA_SLACK: f64 = 1e-9;
pub const LYAPUNOV_TOL: f64 = 1e-6;
pub const DOMINANCE_SLACK: f64 = 1e-9;
pub const LYAPUNOV_T_FINAL: f64 = 20.0;
pub const LYAPUNOV_DT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    pub value: f64,
    /// Upper bound on `value`, except for `rank` and `coercivity` where it
    /// is a lower bound.
    pub tolerance: f64,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status == Status::Pass)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.checks
            .iter()
            .filter(|c| c.status == Status::Fail)
            .map(|c| c.name)
            .collect()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["check", "status", "value", "tolerance", "note"]);
        for c in &self.checks {
            t.push(vec![
                c.name.to_string(),
                c.status.as_str().to_string(),
                fmt_f64(c.value),
                fmt_f64(c.tolerance),
                c.note.clone(),
            ]);
        }
        t
    }
}

const LATER_CHECKS: [&str; 6] = [
    "riccati_residual",
    "coercivity",
    "similarity",
    "spectral_abscissa",
    "lyapunov",
    "bound_dominance",
];

fn upper(name: &'static str, value: f64, tolerance: f64) -> Check {
    Check {
        name,
        status: if value <= tolerance {
            Status::Pass
        } else {
            Status::Fail
        },
        value,
        tolerance,
        note: String::new(),
    }
}

fn errored(name: &'static str, tolerance: f64, err: impl std::fmt::Display) -> Check {
    Check {
        name,
        status: Status::Fail,
        value: f64::NAN,
        tolerance,
        note: err.to_string(),
    }
}

/// Standard synthesis with knot `t` followed by every certificate. A failed
/// rank check skips the rest.
pub fn run_verify(
    sys: &LtiSystem,
    omega: f64,
    t0: f64,
    t: f64,
    quad: &QuadratureConfig,
) -> VerifyReport {
    let mut checks = Vec::new();
    let rank = sys.controllability_rank();
    let n = sys.n();
    checks.push(Check {
        name: "rank",
        status: if rank == n {
            Status::Pass
        } else {
            Status::Fail
        },
        value: rank as f64,
        tolerance: n as f64,
        note: String::new(),
    });
    if rank < n {
        for name in LATER_CHECKS {
            checks.push(Check {
                name,
                status: Status::Skipped,
                value: f64::NAN,
                tolerance: f64::NAN,
                note: "system is not controllable".into(),
            });
        }
        return VerifyReport { checks };
    }

    let abscissa_tol = -omega + ABSCISSA_SLACK;
    let synthesis = match synthesize(sys, omega, t0, t, GramianVariant::Standard, quad) {
        Ok(s) => s,
        Err(e) => {
            let tolerances = [
                RICCATI_TOL,
                COERCIVITY_TOL,
                SIMILARITY_TOL,
                abscissa_tol,
                LYAPUNOV_TOL,
                DOMINANCE_SLACK,
            ];
            for (name, tol) in LATER_CHECKS.into_iter().zip(tolerances) {
                checks.push(errored(name, tol, &e));
            }
            return VerifyReport { checks };
        }
    };
    let Synthesis { law, gramian } = &synthesis;

    checks.push(match riccati_residual(sys, gramian) {
        Ok(r) => upper("riccati_residual", r, RICCATI_TOL),
        Err(e) => errored("riccati_residual", RICCATI_TOL, e),
    });

    checks.push(match coercivity_margin(gramian, omega) {
        Ok(c) => Check {
            name: "coercivity",
            status: if c.min_eigenvalue >= COERCIVITY_TOL {
                Status::Pass
            } else {
                Status::Fail
            },
            value: c.min_eigenvalue,
            tolerance: COERCIVITY_TOL,
            note: String::new(),
        },
        Err(e) => errored("coercivity", COERCIVITY_TOL, e),
    });

    checks.push(match conjugate_generator(sys, gramian) {
        Ok(c) => upper("similarity", c.similarity_error, SIMILARITY_TOL),
        Err(e) => errored("similarity", SIMILARITY_TOL, e),
    });

    let abscissa = spectral_abscissa(law.closed_loop());
    checks.push(match &abscissa {
        Ok(a) => upper("spectral_abscissa", *a, abscissa_tol),
        Err(e) => errored("spectral_abscissa", abscissa_tol, e),
    });

    // Keep the explicit RK4 step well inside its stability region.
    let norm = linalg::spectral_norm(law.closed_loop());
    let dt = if norm > 0.0 {
        LYAPUNOV_DT.min(0.5 / norm)
    } else {
        LYAPUNOV_DT
    };
    let x0 = DVector::from_element(n, 1.0);
    let lyap = integrate(law.closed_loop(), &x0, LYAPUNOV_T_FINAL, dt)
        .and_then(|traj| lyapunov_profile(&traj, gramian, omega));
    checks.push(match lyap {
        Ok(p) => upper("lyapunov", p.max_violation, LYAPUNOV_TOL),
        Err(e) => errored("lyapunov", LYAPUNOV_TOL, e),
    });

    checks.push(
        match (abscissa, decay_bound_with(sys, omega, t0, t, gramian, quad)) {
            (Ok(a), Ok(bound)) => {
                let mut c = upper("bound_dominance", a - bound.exponent, DOMINANCE_SLACK);
                c.note = format!("exponent {}", fmt_f64(bound.exponent));
                c
            }
            (Err(e), _) | (_, Err(e)) => errored("bound_dominance", DOMINANCE_SLACK, e),
        },
    );

    VerifyReport { checks }
}
