use core::fmt;

/// Errors raised by the core routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Every coefficient of a raw state was zero.
    DegenerateState,
    /// Two objects that must share a Hilbert-space dimension do not.
    DimensionMismatch { expected: usize, found: usize },
    /// Dimension below 2, or otherwise unusable.
    InvalidDimension(usize),
    /// MUB construction is only available for prime dimensions.
    UnsupportedDimension(usize),
    /// A scalar parameter fell outside its admissible range.
    OutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
    /// A matrix failed the density-matrix checks (Hermitian, unit trace, PSD).
    NotADensityMatrix(&'static str),
    /// Grating parameters that cannot describe a mask.
    InvalidGrating(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DegenerateState => write!(f, "degenerate state: all coefficients are zero"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::InvalidDimension(d) => write!(f, "invalid dimension {d} (need D >= 2)"),
            Error::UnsupportedDimension(d) => {
                write!(
                    f,
                    "unsupported dimension {d}: MUB tomography needs a prime D"
                )
            }
            Error::OutOfRange {
                name,
                value,
                min,
                max,
            } => write!(f, "{name} = {value} outside [{min}, {max}]"),
            Error::NotADensityMatrix(why) => write!(f, "not a density matrix: {why}"),
            Error::InvalidGrating(why) => write!(f, "invalid grating: {why}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn check_range(name: &'static str, value: f64, min: f64, max: f64) -> Result<()> {
    if value.is_nan() || value < min || value > max {
        return Err(Error::OutOfRange {
            name,
            value,
            min,
            max,
        });
    }
    Ok(())
}
