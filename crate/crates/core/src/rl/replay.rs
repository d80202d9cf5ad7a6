use std::collections::VecDeque;

use rand::Rng;

/// One `(s, s', a, r, done)` record, observations stored as network features.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub s: Vec<f32>,
    pub s_next: Vec<f32>,
    pub a: usize,
    pub r: f32,
    pub done: bool,
}

/// FIFO ring of transitions; the oldest record is evicted once full.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    storage: VecDeque<Transition>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        ReplayBuffer {
            capacity,
            storage: VecDeque::new(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.storage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.storage.is_empty()
    }

    pub fn insert(&mut self, t: Transition) {
        if self.storage.len() == self.capacity {
            self.storage.pop_front();
        }
        self.storage.push_back(t);
    }

    /// Oldest first.
    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.storage.iter()
    }

    pub fn get(&self, i: usize) -> Option<&Transition> {
        self.storage.get(i)
    }

    pub fn newest(&self) -> Option<&Transition> {
        self.storage.back()
    }

    /// Uniform indices, drawn with replacement.
    pub fn sample_indices<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Vec<usize> {
        if self.storage.is_empty() {
            return Vec::new();
        }
        (0..batch).map(|_| rng.random_range(0..self.storage.len())).collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Vec<&Transition> {
        self.sample_indices(batch, rng)
            .into_iter()
            .map(|i| &self.storage[i])
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};

    fn tr(tag: usize) -> Transition {
        Transition {
            s: vec![tag as f32],
            s_next: vec![tag as f32 + 0.5],
            a: tag % 7,
            r: 0.0,
            done: false,
        }
    }

    #[test]
    fn fifo_eviction() {
        let mut b = ReplayBuffer::new(10);
        for i in 0..13 {
            b.insert(tr(i));
        }
        assert_eq!(b.len(), 10);
        let tags: Vec<usize> = b.iter().map(|t| t.s[0] as usize).collect();
        assert_eq!(tags, (3..13).collect::<Vec<_>>());
        assert_eq!(b.newest().unwrap().s[0], 12.0);
    }

    #[test]
    fn empty_sample_is_empty() {
        let b = ReplayBuffer::new(4);
        assert!(b.sample(64, &mut stream(0, Stream::Replay)).is_empty());
    }

    #[test]
    fn sampling_is_seeded() {
        let mut b = ReplayBuffer::new(100);
        for i in 0..100 {
            b.insert(tr(i));
        }
        let a = b.sample_indices(64, &mut stream(5, Stream::Replay));
        let c = b.sample_indices(64, &mut stream(5, Stream::Replay));
        assert_eq!(a, c);
        assert!(a.iter().all(|i| *i < 100));
    }
}
