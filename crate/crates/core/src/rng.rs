//! Counter-based random numbers.
//!
//! Every draw is a pure function of `(seed, stream, counter)`, so draws can be
//! generated in any order, split across threads, or replayed individually.
//! Stream layout used by the library:
//!
//! * chain simulation: stream = replicate, counter = step;
//! * multigraph sampling: stream = replicate, counter = dyad index.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const STREAM_MUL: u64 = 0xD1B5_4A32_D192_ED03;
const COUNTER_MUL: u64 = 0xAEF1_7502_108E_F2D9;

#[inline]
fn finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Keyed generator; see the module docs for the stream layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CounterRng {
    key: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self {
            key: finalize(seed.wrapping_add(GOLDEN)),
        }
    }

    pub fn u64_at(&self, stream: u64, counter: u64) -> u64 {
        let s = finalize(self.key ^ stream.wrapping_mul(STREAM_MUL).wrapping_add(GOLDEN));
        finalize(s ^ counter.wrapping_mul(COUNTER_MUL).wrapping_add(GOLDEN))
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn uniform_at(&self, stream: u64, counter: u64) -> f64 {
        const DEN: f64 = (1u64 << 53) as f64;
        (self.u64_at(stream, counter) >> 11) as f64 / DEN
    }

    /// Sequential view of one stream starting at counter 0.
    pub fn stream(&self, stream: u64) -> Stream {
        Stream {
            rng: *self,
            stream,
            counter: 0,
        }
    }
}

/// Sequential draws from a single stream.
#[derive(Clone, Debug)]
pub struct Stream {
    rng: CounterRng,
    stream: u64,
    counter: u64,
}

impl Stream {
    pub fn next_uniform(&mut self) -> f64 {
        let u = self.rng.uniform_at(self.stream, self.counter);
        self.counter += 1;
        u
    }
}
