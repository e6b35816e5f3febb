//! Anonymous communication from `K` transmitters to one receiver over
//! parallel links, using correlated randomness dealt in advance.
//!
//! One transmitter, chosen by a trusted dealer, delivers `L` symbols over
//! `F_p`; every transmitter sends `N = L` symbols. The receiver decodes the
//! message without learning who sent it.
//!
//! - [`field`]: `F_p` arithmetic, symbol vectors and matrix rank.
//! - [`info`]: exact distributions, entropy and mutual information.
//! - [`protocol`]: the built-in scheme and its rate and randomness metrics.
//! - [`verify`]: exhaustive property checks with counterexamples.
//! - [`search`]: exhaustive scheme search and the converse oracles.
//! - [`sim`]: actor simulation over in-process or TCP links.
//! - [`cli`]: the `anoncomm` command line.

pub mod cli;
pub mod field;
pub mod info;
pub mod protocol;
pub mod scheme;
pub mod search;
pub mod sim;
pub mod verify;
