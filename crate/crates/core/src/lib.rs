//! Exact piecewise-affine maps of the unit interval that preserve Lebesgue
//! measure: construction, window perturbations, structure and mixing
//! classification, Markov partitions, entropy, and correlation statistics.
//!
//! All coordinates are exact rationals. Floats appear only as logarithms.

pub mod desk;
pub mod entropy;
pub mod error;
pub mod format;
pub mod interval;
pub mod map;
pub mod markov;
pub mod orbit;
pub mod perturb;
pub mod rational;
pub mod stats;
pub mod structure;
pub mod svg;

pub use error::{Error, Result};
pub use interval::{Interval, IntervalSet};
pub use map::{LapSign, PwaMap};
pub use rational::Rational;
