pub mod bits;
pub mod cache_model;
pub mod codec;
pub mod context;
pub mod error;
pub mod huffman;
pub mod jpeg;
pub mod metrics;
mod parallel;
pub mod table_set;
pub mod threshold;
pub mod training;

pub use codec::{compress, compress_lossy, romp_decode, romp_encode, RompContainer};
pub use context::{ContextParams, ContextTriple};
pub use error::{Error, Result};
pub use table_set::ContextTableSet;
pub use training::{train, TrainConfig};
