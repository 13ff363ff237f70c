//! Timing abstraction so speedup measurements work on `no_std` targets; the
//! companion CLI provides a wall-clock implementation.

/// Monotonic nanosecond clock.
pub trait MonotonicClock {
    fn now_nanos(&self) -> u64;
}

#[cfg(feature = "std")]
pub use with_std::WallClock;

#[cfg(feature = "std")]
mod with_std {
    use super::MonotonicClock;
    use std::time::Instant;

    /// `std::time::Instant`-backed clock.
    pub struct WallClock {
        origin: Instant,
    }

    impl WallClock {
        pub fn new() -> Self {
            WallClock { origin: Instant::now() }
        }
    }

    impl Default for WallClock {
        fn default() -> Self {
            Self::new()
        }
    }

    impl MonotonicClock for WallClock {
        fn now_nanos(&self) -> u64 {
            self.origin.elapsed().as_nanos() as u64
        }
    }
}
