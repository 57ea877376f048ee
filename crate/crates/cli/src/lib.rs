//! Command-line front end for the multihop relaying simulator.
//!
//! A run is described by a [`manifest::RunManifest`]: the fully resolved
//! configuration, the command with its arguments, and the seed. Replaying a
//! manifest reproduces every CSV body bit for bit.

pub mod cli;
pub mod commands;
pub mod config;
pub mod manifest;
pub mod output;
