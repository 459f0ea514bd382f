//! Discovery, rewriting and measured selection of offloadable function
//! blocks in C-like sources.

pub mod detector;
pub mod frontend;
pub mod harness;
pub mod interface;
pub mod par;
pub mod pattern_db;
pub mod pipeline;
pub mod search;
pub mod similarity;
pub mod template;
pub mod transform;
pub mod types;
