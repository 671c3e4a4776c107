//! Scene ingestion: metadata XML, solar geometry factors and the TOA radiance cube.

mod metadata;
mod raster;
mod solar;

pub use metadata::{
    parse_scene_metadata, BandDefinition, BoundingBox, Geometry, LinearScale, SceneMetadata,
};
pub use raster::{
    apply_radiometric_scaling, parse_envi_header, read_radiance_cube, write_cube, DataType,
    EnviHeader, Interleave, RadianceCube,
};
pub use solar::{compute_julian_day, day_of_year, earth_sun_distance, SolarDistanceFactor};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error("malformed XML: {0}")]
    MalformedXml(String),
    #[error("missing mandatory field <{0}>")]
    MissingField(String),
    #[error("{field} = {value} out of range ({constraint})")]
    OutOfRange {
        field: String,
        value: f64,
        constraint: &'static str,
    },
    #[error("invalid date: {0}")]
    InvalidDate(String),
    #[error("invalid value for <{field}>: {value:?}")]
    InvalidValue { field: String, value: String },
    #[error("invalid header: {0}")]
    InvalidHeader(String),
    #[error("header declares {expected} payload bytes but {actual} were supplied")]
    HeaderPayloadMismatch { expected: usize, actual: usize },
    #[error("unsupported data type {0}")]
    UnsupportedDataType(String),
    #[error("unsupported interleave {0:?}")]
    UnsupportedInterleave(String),
    #[error("expected {expected} per-band values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("value {value} in band {band} not representable as {data_type}")]
    NotRepresentable {
        band: usize,
        value: f64,
        data_type: &'static str,
    },
}

pub type Result<T> = std::result::Result<T, IngestError>;
