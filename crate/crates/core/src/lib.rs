//! Truncated Tucker decompositions of dense tensors.
//!
//! The drivers in [`hosvd`] compute t-HOSVD and st-HOSVD approximations
//! with one of three factor engines: a dense SVD of the unfolding, an
//! eigendecomposition of its Gram matrix, or alternating least squares
//! ([`als`]) that only touches the tensor through streamed contractions.
//! [`hooi`] refines a result, [`synth`] builds test problems and checks
//! error bounds, and [`io`] reads and writes the binary file formats.
//!
//! Modes are 1-based throughout the public API.

// `!(x > 0.0)` rejects NaN on purpose; dense kernels index by loop counter.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod als;
pub mod error;
pub mod hooi;
pub mod hosvd;
pub mod io;
pub mod linalg;
pub mod matrix;
pub mod parallel;
pub mod synth;
pub mod tensor;

pub use als::{
    als_init, als_low_rank, als_sweep, AlsConfig, AlsInit, AlsReport, AlsStatus, FactorPair,
};
pub use error::{Error, Result};
pub use hooi::{hooi, HooiConfig, HooiResult};
pub use hosvd::{
    recover_singular_vectors, select_order, st_hosvd, t_hosvd, DecompositionReport, FactorEngine,
    ModeOrder, ModeReport, OrderChoice,
};
pub use matrix::Matrix;
pub use synth::{
    check_bounds, cost_model, gammas, gen_cp, gen_tucker, BoundCheck, CostFlavor, CpSpec,
    GammaReport, Synthetic, TuckerSpec,
};
pub use tensor::{relative_error, DenseTensor, Shape, Truncation, TuckerTensor};
