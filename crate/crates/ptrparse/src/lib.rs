//! Treebank files, checkpoints, comparison reports and the `ptrparse`
//! command line on top of `ptrparse_core`.

pub mod checkpoint;
pub mod cli;
pub mod compare;
pub mod conllu;
pub mod pipeline;
