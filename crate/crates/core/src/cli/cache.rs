//! On-disk store for exact exponential sums, one file per `S_m`.

use std::fs;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::cyclotomic::CyclotomicInt;
use crate::error::{Error, Result};
use crate::lfunction::CurveConfig;

pub const CACHE_SCHEMA: u32 = 1;

/// Everything `S_m` depends on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumKey {
    pub p: u64,
    pub h: usize,
    pub modulus: Vec<u64>,
    pub d: u32,
    pub a: Vec<u64>,
    pub level: u32,
    pub m: u32,
}

impl SumKey {
    pub fn new(cfg: &CurveConfig, m: u32) -> Self {
        SumKey {
            p: cfg.p(),
            h: cfg.h(),
            modulus: cfg.field().modulus().to_vec(),
            d: cfg.d(),
            a: cfg.a().to_vec(),
            level: cfg.level(),
            m,
        }
    }

    /// `p{p}h{h}d{d}M{M}/a{a}/m{m}` with the coordinates of `a` joined by `_`.
    pub fn relative_path(&self) -> PathBuf {
        let a: Vec<String> = self.a.iter().map(|c| c.to_string()).collect();
        PathBuf::from(format!("p{}h{}d{}M{}", self.p, self.h, self.d, self.level))
            .join(format!("a{}", a.join("_")))
            .join(format!("m{}", self.m))
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Entry {
    schema: u32,
    p: u64,
    h: usize,
    modulus: Vec<u64>,
    d: u32,
    a: Vec<u64>,
    level: u32,
    m: u32,
    /// Coordinates in the power basis of `Z[ζ_{p^M}]`, as decimal strings.
    coeffs: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CacheStats {
    pub hits: u32,
    pub misses: u32,
    pub corrupt: u32,
}

#[derive(Debug, Clone)]
pub struct SumCache {
    root: PathBuf,
}

impl SumCache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        SumCache { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, key: &SumKey) -> PathBuf {
        self.root.join(key.relative_path())
    }

    pub fn store(&self, key: &SumKey, value: &CyclotomicInt) -> Result<()> {
        let entry = Entry {
            schema: CACHE_SCHEMA,
            p: key.p,
            h: key.h,
            modulus: key.modulus.clone(),
            d: key.d,
            a: key.a.clone(),
            level: key.level,
            m: key.m,
            coeffs: value.coeffs().iter().map(|c| c.to_string()).collect(),
        };
        let path = self.path(key);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let body = serde_json::to_string(&entry).map_err(|e| Error::Io(e.to_string()))?;
        // write-then-rename so a crash never leaves a half-written entry
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, body)?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }

    /// `Ok(None)` when absent. A present but unreadable or mismatched entry
    /// is an error so the caller can warn and recompute.
    pub fn load(&self, key: &SumKey) -> Result<Option<CyclotomicInt>> {
        let path = self.path(key);
        let body = match fs::read_to_string(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let bad = |why: String| Error::Io(format!("cache entry {}: {why}", path.display()));
        let entry: Entry = serde_json::from_str(&body).map_err(|e| bad(e.to_string()))?;
        if entry.schema != CACHE_SCHEMA {
            return Err(bad(format!("schema {} != {CACHE_SCHEMA}", entry.schema)));
        }
        let stored = SumKey {
            p: entry.p,
            h: entry.h,
            modulus: entry.modulus,
            d: entry.d,
            a: entry.a,
            level: entry.level,
            m: entry.m,
        };
        if &stored != key {
            return Err(bad("key fields do not match".into()));
        }
        let coeffs = entry
            .coeffs
            .iter()
            .map(|c| c.parse::<BigInt>().map_err(|e| bad(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        CyclotomicInt::from_coeffs(key.p, key.level, coeffs).map(Some).map_err(|e| bad(e.to_string()))
    }

    /// Cached value if sound, otherwise `compute()` stored for next time.
    pub fn get_or_compute(
        &self,
        key: &SumKey,
        stats: &mut CacheStats,
        compute: impl FnOnce() -> Result<CyclotomicInt>,
    ) -> Result<CyclotomicInt> {
        match self.load(key) {
            Ok(Some(v)) => {
                stats.hits += 1;
                return Ok(v);
            }
            Ok(None) => {}
            Err(e) => {
                log::warn!("{e}; recomputing");
                stats.corrupt += 1;
            }
        }
        stats.misses += 1;
        let v = compute()?;
        if let Err(e) = self.store(key, &v) {
            log::warn!("could not write cache entry: {e}");
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lfunction::{exp_sum, EnumOptions};

    fn cfg(a: u64) -> CurveConfig {
        CurveConfig::prime_field(5, 3, a, 1).unwrap()
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = SumCache::new(dir.path());
        let c = cfg(2);
        let key = SumKey::new(&c, 2);
        let v = exp_sum(&c, 2, &EnumOptions::default()).unwrap();
        assert_eq!(cache.load(&key).unwrap(), None);
        cache.store(&key, &v).unwrap();
        assert_eq!(cache.load(&key).unwrap(), Some(v));
        assert!(cache.path(&key).ends_with("p5h1d3M1/a2/m2"));
    }

    #[test]
    fn keys_differing_in_a_are_distinct() {
        let (k1, k2) = (SumKey::new(&cfg(1), 1), SumKey::new(&cfg(2), 1));
        assert_ne!(k1.relative_path(), k2.relative_path());
        let h2 = CurveConfig::new(5, 2, 3, &[1, 3], 1).unwrap();
        assert!(SumKey::new(&h2, 1).relative_path().starts_with("p5h2d3M1/a1_3"));
    }

    #[test]
    fn corrupt_entries_are_recomputed() {
        let dir = tempfile::tempdir().unwrap();
        let cache = SumCache::new(dir.path());
        let c = cfg(1);
        let key = SumKey::new(&c, 1);
        let truth = exp_sum(&c, 1, &EnumOptions::default()).unwrap();
        fs::create_dir_all(cache.path(&key).parent().unwrap()).unwrap();
        fs::write(cache.path(&key), "{not json").unwrap();
        assert!(cache.load(&key).is_err());
        let mut stats = CacheStats::default();
        let v = cache.get_or_compute(&key, &mut stats, || Ok(truth.clone())).unwrap();
        assert_eq!(v, truth);
        assert_eq!(stats, CacheStats { hits: 0, misses: 1, corrupt: 1 });
        let again = cache.get_or_compute(&key, &mut stats, || panic!("should hit")).unwrap();
        assert_eq!(again, truth);
        assert_eq!(stats.hits, 1);
    }

    #[test]
    fn mismatched_key_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cache = SumCache::new(dir.path());
        let c = cfg(1);
        let key = SumKey::new(&c, 1);
        cache.store(&key, &exp_sum(&c, 1, &EnumOptions::default()).unwrap()).unwrap();
        let moved = SumKey { m: 2, ..key.clone() };
        fs::create_dir_all(cache.path(&moved).parent().unwrap()).unwrap();
        fs::copy(cache.path(&key), cache.path(&moved)).unwrap();
        assert!(cache.load(&moved).is_err());
    }
}
