//! Scheme descriptions and exhaustive search over small scheme families.

pub mod converse;
pub mod description;
pub mod engine;
pub mod space;

use thiserror::Error;

use crate::info::SpaceSize;

pub use converse::{
    check_coded_randomness_necessity, check_rate_infeasible, forced_decoder_census, min_seed_dimension,
    CensusEntry, CensusReport, CodedRandomnessReport, MinSeedReport, RateInfeasibility,
};
pub use description::{CoeffMatrix, CompiledScheme, Decoder, Encoder, Model, SchemeDescription, SchemeError, ShareMap};
pub use engine::{search, space_size, DecoderTally, SearchOptions, SearchResult};
pub use space::Family;

#[derive(Debug, Error)]
pub enum SearchError {
    /// Parameters outside the family's documented limits.
    #[error("search refused: {0}")]
    Refused(String),
    #[error("search space of {required} candidates exceeds the cap of {cap}")]
    TooLarge { required: SpaceSize, cap: u64 },
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error("{0}")]
    Io(String),
}
