use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("polarizability is singular at the {line} resonance (omega = {omega:e} rad/s)")]
    Resonance { line: &'static str, omega: f64 },

    #[error("polarizability ratio undefined: scalar polarizability vanishes at omega = {0:e} rad/s")]
    ZeroScalarPolarizability(f64),

    #[error("fictitious field has a non-negligible imaginary part ({residue:e} relative) at ({x}, {y})")]
    ImaginaryResidue { x: f64, y: f64, residue: f64 },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    EigenConvergence { iterations: usize, residual: f64 },

    #[error("energy term `{term}` is not finite")]
    Divergence { term: &'static str },

    #[error("energy rose by {rise:e} (relative) at step {step}; reduce dtau (currently {dtau:e})")]
    StepSize { step: usize, rise: f64, dtau: f64 },

    #[error("no candidate ground state converged: {0}")]
    NoConvergence(String),

    #[error("winding undefined: amplitude {amplitude:e} below threshold {threshold:e} on the loop")]
    UndefinedWinding { amplitude: f64, threshold: f64 },

    #[error("no transition in range [{lo}, {hi}] mG")]
    NoTransition { lo: f64, hi: f64 },

    #[error("malformed dump: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
