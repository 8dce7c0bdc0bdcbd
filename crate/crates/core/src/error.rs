use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Only `n ∈ {1, 2}` is modelled.
    UnsupportedDimension(usize),
    UnsupportedLevel { dim: usize, level: u32 },
    LengthMismatch { expected: usize, found: usize },
    /// Two objects built on different grids were combined.
    GeometryMismatch,
    CubeOutOfRange,
    /// Dilation factors must be odd and positive.
    InvalidDilation(usize),
    /// Wrap-around dilation requested on a non-periodic grid.
    WrapOnOpenGrid,
    NotDyadic,
    InvalidParameter { name: &'static str, value: f64 },
    NonPositiveWeight { cell: usize, value: f64 },
    NonSquareMatrix { len: usize, cells: usize },
    NonFinite(&'static str),
    EmptySet,
    FullSet,
    /// Certificate of the given cube leaves the cube or overlaps another.
    InvalidCertificate(usize),
    /// Stopping constant diverged (a threshold base vanished).
    StoppingDiverged,
}

impl Error {
    pub(crate) fn param(name: &'static str, value: f64) -> Self {
        Error::InvalidParameter { name, value }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::UnsupportedDimension(n) => write!(f, "unsupported dimension {n} (expected 1 or 2)"),
            Error::UnsupportedLevel { dim, level } => {
                write!(f, "unsupported level {level} for dimension {dim}")
            }
            Error::LengthMismatch { expected, found } => {
                write!(f, "expected {expected} values, found {found}")
            }
            Error::GeometryMismatch => f.write_str("operands live on different grids"),
            Error::CubeOutOfRange => f.write_str("cube leaves the domain of a non-periodic grid"),
            Error::InvalidDilation(l) => write!(f, "dilation factor {l} is not an odd positive integer"),
            Error::WrapOnOpenGrid => f.write_str("wrap-around dilation needs a periodic grid"),
            Error::NotDyadic => f.write_str("operation requires a dyadic cube"),
            Error::InvalidParameter { name, value } => write!(f, "invalid {name} = {value}"),
            Error::NonPositiveWeight { cell, value } => {
                write!(f, "weight must be strictly positive (cell {cell} has {value})")
            }
            Error::NonSquareMatrix { len, cells } => {
                write!(f, "matrix with {len} entries is not {cells}x{cells}")
            }
            Error::NonFinite(what) => write!(f, "non-finite value in {what}"),
            Error::EmptySet => f.write_str("set is empty"),
            Error::FullSet => f.write_str("set covers the whole domain"),
            Error::InvalidCertificate(i) => write!(f, "certificate of cube {i} is not a disjoint subset of it"),
            Error::StoppingDiverged => f.write_str("stopping constant failed to shrink the exceptional set"),
        }
    }
}

impl core::error::Error for Error {}
