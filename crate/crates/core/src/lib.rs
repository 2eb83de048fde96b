pub mod config;
pub mod expr;
pub mod flow;
pub mod homology;
pub mod local_models;
pub mod mho;
pub mod omega;
pub mod pipeline;
pub mod simplicial_norm;
pub mod stratification;
pub mod union_find;
mod poly;
