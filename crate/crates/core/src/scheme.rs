//! The evaluation interface every verifiable scheme exposes.
//!
//! Values cross this interface packed: a vector of `n` symbols over F_p is the
//! integer whose little-endian base-`p` digits are the symbols (see
//! [`SymbolVector::pack`](crate::field::SymbolVector::pack)). Transmitter
//! positions are 0-based here.

use crate::protocol::SchemeParams;

pub trait Scheme: Sync {
    fn params(&self) -> SchemeParams;

    /// Uniform seed symbols consumed by the dealer.
    fn seed_dim(&self) -> usize;

    /// Symbols in each transmitter's share.
    fn share_dim(&self) -> usize;

    /// Writes the packed share of every transmitter into `shares`.
    fn deal_packed(&self, seed: u64, shares: &mut [u64]);

    fn encode_packed(&self, position: usize, desired: bool, message: u64, share: u64) -> u64;

    /// Decodes the packed signals, ordered by transmitter.
    fn decode_packed(&self, signals: &[u64]) -> u64;

    fn label(&self) -> String;
}
