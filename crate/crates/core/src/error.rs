use alloc::string::String;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("point {0} lies outside the carrier")]
    OutsideCarrier(f64),
    #[error("distance to an empty set is undefined")]
    EmptySet,
    #[error("invalid metric-space model: {0}")]
    InvalidModel(String),
    #[error("invalid set description: {0}")]
    InvalidSet(String),
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("seed {0} does not lie in the net domain")]
    SeedOutsideDomain(f64),
    #[error("seeds {0} and {1} are closer than epsilon")]
    SeedSeparation(f64, f64),
    #[error("parameter regime violated: {0}")]
    Regime(String),
    #[error("center set contains the isolated point {0}")]
    IsolatedCenter(f64),
    #[error("center set is empty")]
    EmptyCenter,
    #[error("level {level} would hold more than {cap} net points")]
    NetTooLarge { level: u32, cap: usize },
    #[error("level {level} exceeds chain depth {depth}")]
    LevelOutOfRange { level: u32, depth: u32 },
    #[error("profile has {len} radii, at least {min} are required")]
    ProfileTooShort { len: usize, min: usize },
    #[error("radius grid is not aligned to the level scale (use a geometric grid with ratio 1/{a} or a root of it)")]
    Misaligned { a: f64 },
    #[error("operation requires a one-dimensional continuum model")]
    NotContinuum,
}

pub type Result<T> = core::result::Result<T, Error>;
