//! Shared fixtures for the benchmarks.

use std::sync::Arc;

use rtwalk::exact_oracle::ClassKernel;
use rtwalk::spectral::SpectralTable;
use rtwalk::PartitionSpace;

pub fn space(n: usize) -> Arc<PartitionSpace> {
    Arc::new(PartitionSpace::new(n).expect("partition space"))
}

pub fn kernel(n: usize) -> ClassKernel {
    ClassKernel::new(space(n)).expect("kernel")
}

pub fn spectral_table(n: usize) -> SpectralTable {
    SpectralTable::new(space(n)).expect("spectral table")
}
