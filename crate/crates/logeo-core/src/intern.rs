//! Interning of signature vectors during partition refinement.
//!
//! `alloc` has no hash map, so keys are bucketed by an FNV-1a digest in a
//! `BTreeMap` and collisions are resolved by comparing stored keys. Ids are
//! handed out in first-seen order, which keeps every downstream labelling
//! deterministic.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

pub struct Interner<K> {
    buckets: BTreeMap<u64, Vec<u32>>,
    keys: Vec<K>,
}

fn fnv1a(bytes: impl Iterator<Item = u8>) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}

impl<K: Eq + IntoBytes> Interner<K> {
    pub fn new() -> Self {
        Interner { buckets: BTreeMap::new(), keys: Vec::new() }
    }

    pub fn intern(&mut self, key: K) -> u32 {
        let digest = fnv1a(key.bytes());
        let bucket = self.buckets.entry(digest).or_default();
        for &id in bucket.iter() {
            if self.keys[id as usize] == key {
                return id;
            }
        }
        let id = self.keys.len() as u32;
        bucket.push(id);
        self.keys.push(key);
        id
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }
}

/// Byte view of a key, used only for hashing.
pub trait IntoBytes {
    fn bytes(&self) -> impl Iterator<Item = u8>;
}

impl IntoBytes for Vec<u16> {
    fn bytes(&self) -> impl Iterator<Item = u8> {
        self.iter().flat_map(|v| v.to_le_bytes())
    }
}

impl IntoBytes for Vec<u32> {
    fn bytes(&self) -> impl Iterator<Item = u8> {
        self.iter().flat_map(|v| v.to_le_bytes())
    }
}
