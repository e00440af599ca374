//! Concrete vector-valued spaces with closed-form kernels.

pub mod sensing;
pub mod tensor;
pub mod translation;

pub use sensing::{schatten_norm, SensingMatrixSpace};
pub use tensor::{ScalarKernel, TensorProductSpace};
pub use translation::{QuadratureGrid, TranslationInvariantSpace};
