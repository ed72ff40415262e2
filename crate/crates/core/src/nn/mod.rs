//! A small CPU neural-network kit: convolution, batch normalisation,
//! pooling, dense and dropout layers with exact backward passes, Adam,
//! multi-branch networks with feature concatenation, training loops,
//! metrics and a closed-form ridge baseline.

mod gemm;
pub mod gradcheck;
pub mod layers;
pub mod loss;
pub mod metrics;
pub mod network;
pub mod optim;
pub mod ridge;
pub mod tensor;
pub mod train;

pub use gemm::gemm;
pub use layers::Activation;
pub use loss::LossKind;
pub use network::{LayerSpec, Network, NetworkSpec, ParamCounts, ParamRow};
pub use optim::Adam;
pub use tensor::Tensor;
