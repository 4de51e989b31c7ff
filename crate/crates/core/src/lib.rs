pub mod cli;
pub mod contagion;
pub mod graph;
pub mod ingest;
pub mod learn;
pub mod propagation;
pub mod rng;
pub mod scenarios;
pub mod sentiment;
