//! Process-wide cache of transform plans and symbol tables.
//!
//! Readers take a shared lock; insertion happens under the write lock and
//! re-checks the map so two racing builders end up sharing one entry.

use std::any::{Any, TypeId};
use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) struct CacheKey {
    pub ty: TypeId,
    pub kind: u8,
    pub dim: usize,
    pub n: usize,
    pub half_width_bits: u64,
    pub order_bits: u64,
}

type Entry = Arc<dyn Any + Send + Sync>;

fn registry() -> &'static RwLock<HashMap<CacheKey, Entry>> {
    static REGISTRY: OnceLock<RwLock<HashMap<CacheKey, Entry>>> = OnceLock::new();
    REGISTRY.get_or_init(|| RwLock::new(HashMap::new()))
}

pub(crate) fn get_or_build<V, F>(key: CacheKey, build: F) -> Arc<V>
where
    V: Any + Send + Sync,
    F: FnOnce() -> V,
{
    let downcast = |e: &Entry| Arc::clone(e).downcast::<V>().ok();
    if let Some(v) = registry().read().unwrap_or_else(|p| p.into_inner()).get(&key).and_then(downcast) {
        return v;
    }
    let built = Arc::new(build());
    let mut map = registry().write().unwrap_or_else(|p| p.into_inner());
    let entry = map.entry(key).or_insert_with(|| built as Entry);
    downcast(entry).expect("cache key encodes the value type")
}
