pub mod error;
pub mod indlimit;
pub mod linalg;
pub mod nuclearity;
pub mod opsys;
pub mod sampling;
pub mod tensor;
pub mod ucp;
pub mod uhf;

pub use error::{Error, Result};
