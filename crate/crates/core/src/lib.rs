pub mod ansatz;
pub mod error;
pub mod heatmap;
pub mod linalg;
pub mod lorenz;
pub mod matrix_file;
pub mod oracle;
pub mod proxy;
pub mod spectrum;
pub mod vqe;
pub use error::{Error, Result};
