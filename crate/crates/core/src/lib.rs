pub mod cantor;
pub mod cli;
pub mod decomposition;
pub mod density;
pub mod error;
pub mod interval;
pub mod lab;
pub mod output;
pub mod projection;

pub use error::{Error, Result};
