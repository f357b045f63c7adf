use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degree {degree} exceeds the supported bound {bound}")]
    DegreeLimit { degree: u32, bound: u32 },

    #[error("K16 upper parameter {0} is not a non-positive integer")]
    K16Parameter(i64),

    #[error("K16 denominator pole: (beta)_{index} = 0 for beta = {beta}")]
    K16Pole { beta: f64, index: u32 },

    #[error("degenerate frequencies: |omega_{i}^2 - omega_{j}^2| is below the resolution threshold")]
    DegenerateFrequencies { i: usize, j: usize },

    #[error("vanishing denominator in {0}")]
    VanishingDenominator(&'static str),

    #[error("quadrature order {0} outside the supported range 1..=128")]
    QuadratureOrder(usize),

    #[error("quadrature order {order} too low for total degree {degree} (need at least {required})")]
    QuadratureTooCoarse {
        order: usize,
        degree: u32,
        required: usize,
    },

    #[error("mixing matrix is not orthogonal (defect {0:e})")]
    NotOrthogonal(f64),

    #[error("closed-form purity requires exactly one excited oscillator with n >= 1")]
    NotSingleAxis,

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
