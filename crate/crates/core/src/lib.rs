pub mod cli;
pub mod error;
pub mod gaussian;
pub mod grid;
pub mod io;
pub mod jet;
pub mod models;
pub mod oracle;
pub mod orbit;
pub mod series;
pub mod special;
pub mod td;

pub use error::{Error, Result};
