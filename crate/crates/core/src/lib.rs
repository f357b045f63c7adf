//! Schmidt decompositions of the energy eigenstates of three coupled quantum
//! harmonic oscillators.
//!
//! The crate is layered bottom-up:
//!
//! - [`specfun`]: Hermite, Legendre and Jacobi polynomials, Pochhammer
//!   symbols and the truncated Exton K16 series.
//! - [`oscillator`]: mixing angles, the orthogonal mixing matrix, the map
//!   between normal-mode frequencies and physical couplings, energies.
//! - [`schmidt`]: Schmidt amplitudes `A^{k,l}` of an eigenstate, computed by
//!   a nine-index contingency-table sum and by the K16 closed form.
//! - [`entanglement`]: mode spectra, purities, bipartite factorizations and
//!   the two-oscillator (Jacobi) reduction.
//! - [`quadrature`]: Gauss-Hermite overlap integrals used as an independent
//!   oracle for the closed forms.
//! - [`report`], [`surface`], [`verify`]: output documents, purity surfaces
//!   and the self-verification suite behind the command-line tool.
//!
//! All quantities are dimensionless (`hbar = m = varpi = 1`) unless a function
//! explicitly takes masses or physical scales.

pub mod entanglement;
pub mod error;
pub mod oscillator;
pub mod quadrature;
pub mod report;
pub mod schmidt;
pub mod specfun;
pub mod surface;
pub mod verify;

pub use entanglement::{
    bipartite_factorization, closed_form_purity, jacobi_coefficients, makarov_lambda,
    mode_spectrum, purity, Axis, BipartiteFactorization, Bipartition, ModeSpectrum,
};
pub use error::{Error, Result};
pub use oscillator::{
    coupling_matrix, coupling_ratios, coupling_ratios_degenerate, energy, frequency_geometry,
    mixing_matrix, normal_coordinates, Angles, CouplingMatrix, Excitation, FrequencyGeometry,
    Masses, MixingMatrix, NormalFrequenciesSq, PhysicalScales,
};
pub use quadrature::{
    coefficient_overlap, coefficient_overlap_2d, gauss_hermite_rule, QuadratureRule,
};
pub use schmidt::{
    coefficients_k16, coefficients_sum, selection_rule, wavefunction_eval, K16Coefficients,
    SchmidtMatrix,
};

/// Largest polynomial degree / total excitation accepted anywhere in the crate.
pub const MAX_DEGREE: u32 = 40;
