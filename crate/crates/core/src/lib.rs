//! Random transposition walk on the symmetric group.
//!
//! The crate provides exact laws of the walk (full-group convolution for
//! tiny `n`, a cycle-type Markov kernel for moderate `n`), the Fourier
//! spectrum of the walk and of Poisson-planted reference measures, and a
//! Monte-Carlo engine for hitting times, marking couplings, and the coupled
//! random graph process.

pub mod characters;
pub mod combin;
pub mod distribution;
pub mod error;
pub mod exact_oracle;
pub mod graph;
pub mod measures;
pub mod partitions;
pub mod perm;
pub mod simulator;
pub mod spectral;

pub use distribution::{ClassDistribution, ExactClassDistribution};
pub use error::{Error, Result};
pub use measures::WalkTime;
pub use partitions::{enumerate_partitions, Partition, PartitionSpace};
