//! Finite positive-pair graphs, the spectral contrastive loss, and
//! function-class analysis of contrastive representations.

pub mod error;
pub mod funclass;
pub mod objective;
pub mod par;
pub mod posgraph;
pub mod probe;
pub mod septest;
pub mod spectral;
pub mod synthdata;

pub use error::{Error, Result};
