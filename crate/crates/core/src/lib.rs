pub mod breakpoints;
pub mod core2d;
pub mod error;
pub mod generate;
pub mod geometry;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod mst_path;
pub mod pipeline;
pub mod pyramid;
pub mod render;
pub mod unfolding;

pub use error::{Result, SltError};
pub use geometry::{Point, PointCloud};
