use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// A ChaCha8 stream identified by `(seed, stream)`. Trial `k` of an experiment
/// seeded with `s` uses stream `k`, so every trial replays bit-exactly on its own.
#[derive(Debug, Clone)]
pub struct TrialRng {
    id: TrialId,
    inner: ChaCha8Rng,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrialId {
    pub seed: u64,
    pub stream: u64,
}

impl TrialRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        TrialRng {
            id: TrialId { seed, stream },
            inner,
        }
    }

    pub fn id(&self) -> TrialId {
        self.id
    }
}

impl RngCore for TrialRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.inner.try_fill_bytes(dest)
    }
}
