//! Minimal f64 neural-network micro-framework and the convolutional-
//! recurrent window classifier built from it. Layers live in [`layers`],
//! the optimizer in [`adam`], finite-difference verification in [`check`],
//! and the assembled network in [`crnn`].

pub mod adam;
pub mod check;
pub mod crnn;
pub mod layers;

pub use adam::{adam_step, AdamParams, AdamState};
pub use crnn::{
    crnn_predict, crnn_train, init_params, loss_and_gradients, param_count, plan_shapes,
    CrnnConfig, CrnnModel, EpochStats, ParamLayout, ShapePlan,
};
