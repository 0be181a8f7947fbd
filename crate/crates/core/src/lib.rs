#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod config;
pub mod decode;
pub mod eval;
pub mod forest;
pub mod gradcheck;
pub mod l2r;
pub mod math;
pub mod sample;
pub mod scorer;
pub mod sentence;
pub mod topdown;
pub mod transition;
pub mod train;
pub mod tree;
pub mod vocab;
