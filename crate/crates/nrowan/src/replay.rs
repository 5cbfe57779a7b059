//! Fixed-capacity experience buffer with uniform random sampling.

use rand::Rng;

use crate::error::{Error, Result};

/// One stored interaction.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub terminal: bool,
}

/// Ring buffer; once full, the oldest entry is overwritten.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    storage: Vec<Transition>,
    write_cursor: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "capacity must be positive");
        Self {
            capacity,
            storage: Vec::with_capacity(capacity),
            write_cursor: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.storage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.storage.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, t: Transition) {
        if self.storage.len() < self.capacity {
            self.storage.push(t);
        } else {
            self.storage[self.write_cursor] = t;
        }
        self.write_cursor = (self.write_cursor + 1) % self.capacity;
    }

    /// Draw `batch_size` transitions uniformly with replacement.
    pub fn sample(&self, batch_size: usize, rng: &mut impl Rng) -> Result<Vec<&Transition>> {
        if self.storage.len() < batch_size {
            return Err(Error::NotReady(format!(
                "replay buffer holds {} of {batch_size} transitions",
                self.storage.len()
            )));
        }
        Ok((0..batch_size)
            .map(|_| &self.storage[rng.random_range(0..self.storage.len())])
            .collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.storage.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn transition(tag: f64) -> Transition {
        Transition {
            state: vec![tag],
            action: 0,
            reward: tag,
            next_state: vec![tag],
            terminal: false,
        }
    }

    #[test]
    fn push_grows_until_capacity() {
        let mut buf = ReplayBuffer::new(3);
        buf.push(transition(1.0));
        assert_eq!(buf.len(), 1);
        for i in 2..=4 {
            buf.push(transition(i as f64));
        }
        assert_eq!(buf.len(), 3);
        // the first item was evicted
        assert!(buf.iter().all(|t| t.reward != 1.0));
    }

    #[test]
    fn eviction_is_fifo() {
        let mut buf = ReplayBuffer::new(3);
        for i in 1..=5 {
            buf.push(transition(i as f64));
        }
        let mut rewards: Vec<f64> = buf.iter().map(|t| t.reward).collect();
        rewards.sort_by(f64::total_cmp);
        assert_eq!(rewards, vec![3.0, 4.0, 5.0]);
    }

    #[test]
    fn capacity_holds_at_ten_thousand() {
        let mut buf = ReplayBuffer::new(10_000);
        for i in 0..10_000 {
            buf.push(transition(i as f64));
        }
        assert_eq!(buf.len(), 10_000);
    }

    #[test]
    fn sample_single_item_buffer() {
        let mut buf = ReplayBuffer::new(4);
        buf.push(transition(7.0));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let batch = buf.sample(1, &mut rng).unwrap();
        assert_eq!(batch[0].reward, 7.0);
    }

    #[test]
    fn sampled_items_are_members() {
        let mut buf = ReplayBuffer::new(64);
        for i in 0..32 {
            buf.push(transition(i as f64));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let batch = buf.sample(32, &mut rng).unwrap();
        for item in batch {
            assert!(buf.iter().any(|t| t == item));
        }
    }

    #[test]
    fn underfull_buffer_is_not_ready() {
        let mut buf = ReplayBuffer::new(64);
        buf.push(transition(0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert!(matches!(
            buf.sample(32, &mut rng),
            Err(Error::NotReady(_))
        ));
    }

    #[test]
    fn sampling_is_deterministic_for_a_fixed_seed() {
        let mut buf = ReplayBuffer::new(100);
        for i in 0..100 {
            buf.push(transition(i as f64));
        }
        let collect = |seed: u64| -> Vec<f64> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..10)
                .flat_map(|_| buf.sample(4, &mut rng).unwrap())
                .map(|t| t.reward)
                .collect()
        };
        assert_eq!(collect(9), collect(9));
    }

    /// 10⁵ batch draws of 32 from a 100-item buffer: every item's empirical
    /// frequency lands within ±5% of the uniform 1/100.
    #[test]
    fn sampling_is_uniform_monte_carlo() {
        let mut buf = ReplayBuffer::new(100);
        for i in 0..100 {
            buf.push(transition(i as f64));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut counts = [0u64; 100];
        let draws = 100_000usize;
        for _ in 0..draws {
            for item in buf.sample(32, &mut rng).unwrap() {
                counts[item.reward as usize] += 1;
            }
        }
        let total = (draws * 32) as f64;
        for (i, &c) in counts.iter().enumerate() {
            let freq = c as f64 / total;
            assert!(
                (freq - 0.01).abs() <= 0.01 * 0.05,
                "item {i}: frequency {freq}"
            );
        }
    }
}
