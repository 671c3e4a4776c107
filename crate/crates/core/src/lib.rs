pub mod assets;
pub mod inversion;
pub mod metrics;
pub mod rtm;
pub mod pipeline;
pub mod spectral;
pub mod scene_ingest;
