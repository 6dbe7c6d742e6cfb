//! Max-Cut and VQE problems, losses through knit programs, shift-rule gradients and the
//! fragment-local optimizer with its full-gradient baseline.

mod problem;
mod train;

pub use problem::{
    approximation_ratio, maxcut_observable, optimal_cut, MaxCutCost, ProblemInstance, ProblemKind,
    MAX_EXHAUSTIVE_CUT_NODES,
};
pub use train::{
    loss, param_fragment_index, parameter_shift_grad, train_full, train_subcircuit, GradientMode,
    LossEngine, ParamIndex, TrainConfig, TrainReport,
};
