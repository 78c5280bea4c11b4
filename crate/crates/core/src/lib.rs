pub mod assembly;
pub mod error;
pub mod evalkit;
pub mod fixtures;
pub mod fragment;
pub mod grammar;
pub mod isomorph;
pub mod molgraph;
pub mod motifgraph;
pub mod pipeline;
pub mod walks;
