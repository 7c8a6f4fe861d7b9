//! Weighted soft-margin kernel SVM trained by SMO, and the one-vs-rest
//! barrier ensemble built on it.

mod binary;
mod kernel;
mod ovr;
pub mod smo;

pub use binary::{
    class_weights, decision_value, train_binary, train_binary_detailed, BinarySvmModel,
    ClassWeights,
};
pub use kernel::{kernel_eval, KernelMatrix, KernelSpec};
pub(crate) use ovr::train_barriers;
pub use ovr::{
    rank_barriers, ranked, train_ovr, train_ovr_dataset, OvrConfig, OvrModel, OVR_FORMAT_VERSION,
};
pub use smo::{check_kkt, SmoSettings, SmoSolution};
