use std::num::NonZeroUsize;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use lru::LruCache;

use crate::api::SonifyResult;

#[derive(Debug)]
pub struct StoredLoop {
    pub wav: Bytes,
    pub result: SonifyResult,
}

/// Bounded in-memory store of rendered loops keyed by loop id.
#[derive(Debug)]
pub struct LoopStore {
    entries: Mutex<LruCache<String, Arc<StoredLoop>>>,
    renders: AtomicU64,
}

impl LoopStore {
    pub fn new(capacity: usize) -> Self {
        let cap = NonZeroUsize::new(capacity).unwrap_or(NonZeroUsize::MIN);
        Self {
            entries: Mutex::new(LruCache::new(cap)),
            renders: AtomicU64::new(0),
        }
    }

    pub fn get(&self, id: &str) -> Option<Arc<StoredLoop>> {
        self.entries.lock().unwrap().get(id).cloned()
    }

    pub fn insert(&self, id: String, entry: StoredLoop) -> Arc<StoredLoop> {
        let entry = Arc::new(entry);
        self.entries.lock().unwrap().put(id, entry.clone());
        entry
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn capacity(&self) -> usize {
        self.entries.lock().unwrap().cap().get()
    }

    /// Loops rendered since startup.
    pub fn renders(&self) -> u64 {
        self.renders.load(Ordering::Relaxed)
    }

    pub(crate) fn count_render(&self) {
        self.renders.fetch_add(1, Ordering::Relaxed);
    }
}
