//! Module pipeline for the terrain generator: token grammar, settings,
//! depth-first engine and the built-in modules.

pub mod cli;
pub mod corpus;
pub mod engine;
pub mod error;
pub mod modules;
pub mod parse;
pub mod registry;
pub mod settings;
pub mod value;

pub use engine::{Ctx, Engine, Module, Pipe, Program, RunOutcome};
pub use error::{PipelineError, Result};
pub use registry::Registry;
pub use value::Value;
