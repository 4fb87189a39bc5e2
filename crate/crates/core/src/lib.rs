//! Footprint-aware gradient-boosted regression trees for air-quality
//! sensor data.
//!
//! The pipeline reads AirQualityUCI-style exports ([`ingest`]), cleans and
//! scales them ([`preprocess`]), trains "full" and "tiny" ensembles
//! ([`gbrt`]), stores them in a compact binary format ([`model_store`]) and
//! scores both accuracy ([`metrics`]) and deployment cost ([`profile`]).
//! The [`cli`] module drives the whole experiment.

pub mod cli;
pub mod dataset_file;
pub mod gbrt;
pub mod ingest;
pub mod metrics;
pub mod model_store;
pub mod pipeline;
pub mod preprocess;
pub mod profile;

#[cfg(test)]
#[global_allocator]
static TEST_ALLOCATOR: profile::CountingAllocator = profile::CountingAllocator::new();
