//! Classification of compositional data through the alpha-transformation.
//!
//! Compositions are mapped to real coordinates by a power transformation
//! indexed by `alpha`, which moves continuously between log-ratio analysis
//! (`alpha = 0`) and plain Euclidean analysis of the raw proportions
//! (`alpha = 1`). Regularised discriminant analysis and k-nearest-neighbour
//! classifiers are built on top, with a repeated stratified hold-out protocol
//! to choose `alpha` and the remaining tuning parameters.
//!
//! ```
//! use simplex_clf::simplex::{closure, Alpha, ContrastMatrix};
//!
//! let x = closure(&[1.0, 2.0, 7.0]).unwrap();
//! let h = ContrastMatrix::helmert(3).unwrap();
//! let z = h.transform(&x, Alpha::new(0.5).unwrap()).unwrap();
//! let back = z.invert().unwrap();
//! assert!((back.parts()[2] - 0.7).abs() < 1e-12);
//! ```

pub mod classifiers;
pub mod dataio;
pub mod error;
pub mod evaluation;
pub mod metrics;
pub mod simplex;

pub use error::{Error, Result};
