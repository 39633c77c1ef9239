//! Pre-classification cleanup filters.
//!
//! Everything here maps image -> image. Filters that work per channel keep
//! intermediates in f64 and quantize back to u8 exactly once on the way
//! out, so chained stages do not accumulate rounding error beyond the one
//! unavoidable quantization per stage.

mod equalize;
mod gaussian;
mod light;
mod rain_snow;
mod shadow;

pub use equalize::equalize_value_channel;
pub use gaussian::{gaussian_blur_gray, gaussian_blur_hsv};
pub use light::{light_filter, LightFilterParams};
pub use rain_snow::{
    background_estimate, remove_rain_snow, simulate_rain_snow, streak_mask, RainSnowParams,
};
pub use shadow::{detect_shadow_mask, remove_shadow, ShadowParams};
