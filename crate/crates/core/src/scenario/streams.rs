use rand::{RngCore, SeedableRng};
use rand_chacha::{ChaCha20Rng, ChaCha8Rng};

const UNIT: f64 = 1.0 / (1u64 << 53) as f64;

/// Named substreams derived from the master seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StreamKind {
    Arrivals = 1,
    Fading = 2,
    ComputeRates = 3,
    Mobility = 4,
    Speed = 5,
    Replication = 6,
}

/// Source of every random number in a replication.
///
/// Each substream seed is read from a ChaCha20 keystream keyed by the master
/// seed: the stream id selects the kind and the word position selects the
/// index (user, replication, ...). Seeds for one kind therefore never depend
/// on how many of another kind exist.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RngStreams {
    master: u64,
}

impl RngStreams {
    pub fn new(master: u64) -> Self {
        RngStreams { master }
    }

    pub fn master_seed(&self) -> u64 {
        self.master
    }

    pub fn derive_seed(&self, kind: StreamKind, index: u64) -> [u8; 32] {
        let mut kdf = ChaCha20Rng::seed_from_u64(self.master);
        kdf.set_stream(kind as u64);
        kdf.set_word_pos(index as u128 * 8);
        let mut seed = [0u8; 32];
        kdf.fill_bytes(&mut seed);
        seed
    }

    /// A sequential generator for `kind`/`index`.
    pub fn sequential(&self, kind: StreamKind, index: u64) -> ChaCha8Rng {
        ChaCha8Rng::from_seed(self.derive_seed(kind, index))
    }

    pub fn indexed(&self, kind: StreamKind, index: u64) -> IndexedStream {
        IndexedStream::new(self.derive_seed(kind, index))
    }

    /// Bernoulli task arrivals of `user`, one draw per slot.
    pub fn arrivals(&self, user: u64, prob: f64) -> ArrivalStream {
        ArrivalStream {
            stream: self.indexed(StreamKind::Arrivals, user),
            prob,
        }
    }

    /// Small-scale fading of `user`; lanes are base stations, positions are slots.
    pub fn fading(&self, user: u64) -> IndexedStream {
        self.indexed(StreamKind::Fading, 0).with_user_offset(user)
    }

    /// Per-frame compute rates; lanes are base stations, positions are frames.
    pub fn compute_rates(&self) -> IndexedStream {
        self.indexed(StreamKind::ComputeRates, 0)
    }

    pub fn mobility(&self, user: u64) -> ChaCha8Rng {
        self.sequential(StreamKind::Mobility, user)
    }

    pub fn speeds(&self) -> ChaCha8Rng {
        self.sequential(StreamKind::Speed, 0)
    }

    /// Master seed of replication `rep` in a sweep built on this seed.
    pub fn replication_seed(&self, rep: u64) -> u64 {
        let mut rng = self.sequential(StreamKind::Replication, rep);
        rng.next_u64()
    }
}

/// A ChaCha8 stream addressed by `(lane, position)`, one 64-bit draw per
/// position. Sequential access and short forward gaps are plain reads;
/// anything else seeks.
#[derive(Clone, Debug)]
pub struct IndexedStream {
    rng: ChaCha8Rng,
    lane_offset: u64,
    lane: u64,
    next: u64,
}

impl IndexedStream {
    fn new(seed: [u8; 32]) -> Self {
        IndexedStream {
            rng: ChaCha8Rng::from_seed(seed),
            lane_offset: 0,
            lane: 0,
            next: 0,
        }
    }

    // Users share one key and are separated by the high half of the lane id.
    fn with_user_offset(mut self, user: u64) -> Self {
        self.lane_offset = user << 32;
        self.rng.set_stream(self.lane_offset);
        self
    }

    fn bits_at(&mut self, lane: u64, position: u64) -> u64 {
        // A short forward gap is cheaper to read through than to seek over,
        // since a seek regenerates the whole ChaCha block buffer.
        if lane == self.lane && position > self.next && position - self.next <= 16 {
            for _ in self.next..position {
                self.rng.next_u64();
            }
        } else if lane != self.lane || position != self.next {
            self.rng.set_stream(self.lane_offset | lane);
            self.rng.set_word_pos(position as u128 * 2);
            self.lane = lane;
        }
        self.next = position + 1;
        self.rng.next_u64()
    }

    /// Uniform draw in `[0, 1)` at `position` of `lane`.
    pub fn uniform_at(&mut self, lane: u64, position: u64) -> f64 {
        (self.bits_at(lane, position) >> 11) as f64 * UNIT
    }

    /// Unit-mean exponential draw at `position` of `lane`, by inverting the
    /// CDF at a uniform on the open interval (0, 1); strictly positive.
    pub fn exp1_at(&mut self, lane: u64, position: u64) -> f64 {
        let u = ((self.bits_at(lane, position) >> 11) as f64 + 0.5) * UNIT;
        -u.ln()
    }
}

/// Task arrivals of one user.
#[derive(Clone, Debug)]
pub struct ArrivalStream {
    stream: IndexedStream,
    prob: f64,
}

impl ArrivalStream {
    pub fn prob(&self) -> f64 {
        self.prob
    }

    /// Whether a task arrives at slot `t`.
    pub fn sample(&mut self, t: u64) -> bool {
        self.stream.uniform_at(0, t) < self.prob
    }
}
