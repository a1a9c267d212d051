use crate::error::{Result, StoreError};

/// Which physical form fragments take. `Heterogeneous` is the normal mode;
/// the two pure policies exist so that storage and data movement can be
/// compared against single-form baselines.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FragmentPolicy {
    Heterogeneous,
    PureSegment,
    PureBlock,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StoreConfig {
    pub block_size: u32,
    pub segment_threshold: u32,
    pub segment_reserve_factor: f64,
    pub policy: FragmentPolicy,
}

impl Default for StoreConfig {
    fn default() -> Self {
        StoreConfig {
            block_size: 65536,
            segment_threshold: 8192,
            segment_reserve_factor: 1.5,
            policy: FragmentPolicy::Heterogeneous,
        }
    }
}

impl StoreConfig {
    pub fn with_policy(mut self, policy: FragmentPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.segment_threshold > self.block_size {
            return Err(StoreError::Schema(format!(
                "segment_threshold {} exceeds block_size {}",
                self.segment_threshold, self.block_size
            )));
        }
        if self.block_size < 64 {
            return Err(StoreError::Schema("block_size must be at least 64 bytes".into()));
        }
        // negated so that NaN is rejected too
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(self.segment_reserve_factor >= 1.0) {
            return Err(StoreError::Schema("segment_reserve_factor must be >= 1".into()));
        }
        Ok(())
    }

    /// Whether a fragment holding `bytes` of row data belongs in block form.
    pub fn wants_blocks(&self, bytes: usize) -> bool {
        match self.policy {
            FragmentPolicy::Heterogeneous => bytes >= self.segment_threshold as usize,
            FragmentPolicy::PureSegment => false,
            FragmentPolicy::PureBlock => bytes > 0,
        }
    }
}
