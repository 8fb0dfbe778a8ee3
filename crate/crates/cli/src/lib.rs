//! Command implementations behind the `netrepr` binary.

pub mod commands;
pub mod server;
