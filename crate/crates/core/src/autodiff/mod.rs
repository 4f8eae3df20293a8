//! Dense reverse-mode differentiation for the sequence model.

mod optim;
mod tape;
mod tensor;

pub use optim::{Adam, LrSchedule};
pub use tape::{lstm_cell_step, Gradients, LstmVars, Tape, Var, BCE_EPSILON};
pub use tensor::{one_hot, Real, Tensor};
