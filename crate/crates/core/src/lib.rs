//! Data-dependent random features for supervised learning.
//!
//! The pipeline samples `M0` candidate random features from a
//! data-independent distribution, scores each one against the training
//! responses with `Ŝ(ω) = (1/N) Σ yⁿ φ(xⁿ, ω)`, keeps the `M` features with
//! the largest `|Ŝ|`, and fits a regularized linear model over the resulting
//! feature map. Random kitchen sinks (the first `M` draws, unscored) is the
//! baseline.
//!
//! Modules:
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`data`] | CSV/libsvm loading, standardization, splits, the k-NN bandwidth rule |
//! | [`features`] | Feature families, samplers, feature matrices, closed-form kernels |
//! | [`selection`] | Empirical scores, top-`|Ŝ|` selection, the RKS prefix baseline |
//! | [`training`] | Ridge and logistic fits, prediction, error metrics, λ tuning |
//! | [`theory`] | Analytic scores, orthogonality closed forms, recovery and concentration checks |
//! | [`experiment`] | Config-driven runner, CSV/SVG output, the theory suite |
//!
//! ```
//! use eerf::data::{Dataset, Task};
//! use eerf::features::{sample_features, CosineSampler, FeatureSpec};
//! use eerf::selection::{eerf_select, empirical_score};
//! use ndarray::array;
//!
//! let ds = Dataset::new(array![[0.0, 1.0], [1.0, 0.0], [0.5, 0.5]], array![1.0, -1.0, 0.0], Task::Regression)?;
//! let spec = FeatureSpec::cosine(CosineSampler::Gaussian, 1.0, 2)?;
//! let candidates = sample_features(&spec, 20, 7)?;
//! let table = empirical_score(&candidates, &ds)?;
//! let chosen = eerf_select(&table, 5)?;
//! assert_eq!(chosen.len(), 5);
//! # Ok::<(), eerf::Error>(())
//! ```

pub mod data;
pub mod error;
pub mod experiment;
pub mod features;
mod linalg;
pub mod rng;
pub mod selection;
pub mod theory;
pub mod training;

pub use error::{Error, Result};

/// Version tag written into every serialized feature list, score table and model.
pub const RECORD_VERSION: u32 = 1;
