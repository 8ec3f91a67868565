//! Configuration, experiment runner and verification suites behind the
//! `cremona` command.

pub mod config;
pub mod experiment;
pub mod verify;
