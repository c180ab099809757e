//! Library side of the `knpoly` command.

pub mod cache;
pub mod checkpoint;
pub mod commands;
pub mod report;
pub mod scan;

pub use commands::run;
