use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid signal: {0}")]
    InvalidSignal(&'static str),

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("sample rate {fs} Hz is too low, need at least {required} Hz")]
    SampleRateTooLow { fs: f64, required: f64 },

    #[error("sample rate mismatch: filter designed for {expected} Hz, signal is {found} Hz")]
    RateMismatch { expected: f64, found: f64 },

    #[error("invalid NZDF order M={m}, N={n}: need 2 <= M <= 2N-1")]
    InvalidOrder { m: u32, n: u32 },

    #[error("domain error: {0}")]
    Domain(&'static str),

    #[error("no root in search bracket [{lo}, {hi}]")]
    NoRoot { lo: f64, hi: f64 },

    #[error("reference has no energy at fc = {fc} Hz")]
    NoEnergyAtCenter { fc: f64 },

    #[error("{0} peak is zero")]
    ZeroPeak(&'static str),
}

impl Error {
    pub(crate) fn arg(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument { name, reason: reason.into() }
    }
}
