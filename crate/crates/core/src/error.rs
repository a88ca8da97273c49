use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },

    #[error("Q = {q} is not a finite positive number; regime is undefined")]
    UnclassifiableRegime { q: f64 },

    #[error("matrix is not Hermitian (max |H_ij - conj(H_ji)| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("time step violates the advection guard: beta*dtau/dz = {ratio} > 1")]
    StepGuard { ratio: f64 },

    #[error("singular cyclic-tridiagonal system at step {step}")]
    SingularSystem { step: usize },

    #[error("grid domain is not a whole number of doubled field periods ({periods} field periods)")]
    NonPeriodicDomain { periods: f64 },

    #[error("photon distribution tail {tail:e} exceeds tolerance with nu_max = {nu_max}")]
    TruncationTail { tail: f64, nu_max: usize },

    #[error("photon state is mixed; no amplitudes are available")]
    MixedPhotonState,

    #[error("excitation block of dimension {dim} exceeds the cap of {cap}; reduce n_max or nu_max")]
    BlockTooLarge { dim: usize, cap: usize },

    #[error("integrator lost normalization at step {step} (norm error {norm_error:e})")]
    IntegratorFailure { step: usize, norm_error: f64 },

    #[error("visibility undefined: both populations are zero")]
    UndefinedVisibility,

    #[error("signal window {duration} s is shorter than the required {required} s")]
    WindowTooShort { duration: f64, required: f64 },

    #[error("design matrix is ill-conditioned (condition estimate {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("spectrum has no positive weight to normalize")]
    EmptySpectrum,

    #[error("time series is malformed: {0}")]
    BadSeries(&'static str),
}
