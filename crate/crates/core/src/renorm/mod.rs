//! Self-similarity of the spectrum: arithmetic structure, the scaling and
//! interlacing audits, and extraction of the periodic counting profile.

pub mod arithmetic;
pub mod fj;
pub mod interlace;
pub mod lemma1;
pub mod renormalization;
pub mod sigma;
pub mod th51;

pub use arithmetic::{detect_arithmetic, solve_exponent, ArithmeticStructure, Arithmeticity};
pub use fj::{fj_coefficients, fj_difference_audit, FjCoefficients, FjReport};
pub use interlace::{interlacing_audit, InterlaceEvent, InterlaceReport, Source};
pub use lemma1::{lemma1_audit, Lemma1Report};
pub use renormalization::{renormalization_check, RenormReport};
pub use sigma::{sigma_estimate, SigmaTable};
pub use th51::{th51_logsum, Th51Report};

use crate::error::Result;
use crate::measure::{discretize_with_budget, AtomicMeasure, LadderSpec, Placement, DEFAULT_ATOM_BUDGET};
use crate::string_solver::{StringProblem, DEFAULT_REL_TOL};

/// Discretization and solver settings shared by the audits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditConfig {
    pub placement: Placement,
    pub rel_tol: f64,
    pub atom_budget: usize,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig { placement: Placement::Midpoint, rel_tol: DEFAULT_REL_TOL, atom_budget: DEFAULT_ATOM_BUDGET }
    }
}

impl AuditConfig {
    pub fn discretize(&self, spec: &LadderSpec, depth: usize) -> Result<AtomicMeasure> {
        discretize_with_budget(spec, depth, self.placement, self.atom_budget)
    }
}

/// Highest eigenvalue index a discretization with `atoms` atoms is trusted for.
pub fn trusted_index(atoms: usize) -> usize {
    atoms / 4
}

/// `lambda` at index [`trusted_index`]; counts below it are taken as
/// faithful to the continuous measure.
pub fn trusted_limit(problem: &StringProblem, rel_tol: f64) -> Result<f64> {
    let n = trusted_index(problem.dimension()).min(problem.dimension().saturating_sub(1));
    problem.eigenvalue(n, rel_tol)
}
