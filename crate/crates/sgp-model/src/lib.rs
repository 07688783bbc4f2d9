//! Gaussian process and variational sparse GP regression over a periodic
//! azimuth-elevation surface, with a rational quadratic kernel.
//!
//! The exact GP ([`gp_predict`], [`log_marginal_likelihood`]) doubles as the
//! oracle for the sparse model: with the inducing set equal to the training
//! inputs the collapsed bound coincides with the marginal likelihood and the
//! variational posterior with the exact posterior.

mod data;
mod error;
mod factor;
mod fit;
mod gp;
mod kernel;
mod sgp;

pub use data::{TrainingSet, NOISE_FLOOR};
pub use error::SgpError;
pub use fit::{fit, stratified_inducing, FitReport, OptConfig};
pub use gp::{gp_predict, log_marginal_likelihood, Prediction};
pub use kernel::{
    kernel_matrix, rq_kernel, rq_kernel_parts, squared_distance, wrapped_azimuth_diff, InputPoint,
    KernelParams,
};
pub use sgp::{elbo, elbo_with_grad, fit_cache_and_elbo, sgp_predict, trace_correction, SgpModel};
