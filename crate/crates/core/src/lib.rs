//! Road segmentation for snow-covered forest roads seen from a monocular
//! RGB camera.
//!
//! The winter trick: the drivable surface is the snowy part of the scene,
//! so segmentation reduces to finding bright, desaturated pixels and
//! fitting a road-shaped triangle to them. The crate provides the full
//! chain — raster buffers and PNM/PNG I/O, RGB→HSV conversion, weather
//! cleanup filters (blur, equalization, shadow, rain/snow streaks,
//! specular light), binary morphology, triangle fitting with
//! vanishing-point extraction, FNR/FPR evaluation, and a seeded synthetic
//! scene generator for reproducible experiments.
//!
//! Typical use goes through [`pipeline::run_pipeline`]:
//!
//! ```
//! use snowroad::pipeline::{run_pipeline, PipelineConfig};
//! use snowroad::synthgen::{generate_scene, SceneSpec};
//!
//! let (img, truth) = generate_scene(&SceneSpec::default()).unwrap();
//! let result = run_pipeline(&img, &PipelineConfig::default()).unwrap();
//! assert_eq!(result.road.mask.width(), truth.width());
//! ```

mod buffer;
mod kv;

pub mod colorspace;
pub mod error;
pub mod evaluation;
pub mod filters;
pub mod io;
pub mod pipeline;
pub mod render;
pub mod segmentation;
pub mod synthgen;
pub mod vanishing;

pub use buffer::{mask_from_gray, BinaryMask, GrayImage, HsvImage, RgbImage};
pub use error::{Error, Result};
