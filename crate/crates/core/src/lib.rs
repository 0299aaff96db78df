pub mod complex;
pub mod error;
pub mod oracles;
pub mod qilab;
pub mod rational;
pub mod stallings;
pub mod words;

pub use error::{Error, Result};
pub use oracles::{BsMap, Rational};
