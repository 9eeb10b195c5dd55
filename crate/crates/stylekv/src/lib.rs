//! File formats, experiment runners and command implementations for the
//! `stylekv` command-line tool.

pub mod commands;
pub mod experiments;
pub mod output;
pub mod record;
pub mod weights_file;
