//! Library half of the `rtm` command-line tool.

pub mod commands;
pub mod config;
pub mod exit;
pub mod selftest;
