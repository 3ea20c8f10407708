//! Library surface of the command-line front end, split out so
//! integration tests can drive the commands directly.

pub mod commands;
pub mod config_file;
pub mod summary;
