//! Exact exponent arithmetic and desk-scale numerical experiments for
//! weighted Fourier restriction estimates.

pub mod error;
pub mod exponents;
pub mod extension;
pub mod fit;
pub mod fractal;
pub mod grid;
pub mod quadrature;
pub mod rng;
pub mod wavepackets;
pub mod weights;

pub use error::{Error, Result};
pub use exponents::{PiecewiseExponent, Rational};
pub use extension::{FieldSample, FrequencyProfile, Profile, RuleSpec};
pub use fractal::FractalMeasure;
pub use grid::Grid;
pub use rng::SplitMix64;
pub use wavepackets::{Decomposition, Tile, Tube, Variety, Verdict};
pub use weights::{FrostmanCertificate, SampledWeight, WeightRecipe};
