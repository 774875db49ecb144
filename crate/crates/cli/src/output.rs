//! Report writer and the on-disk report cache.

use std::hash::{Hash, Hasher};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use komatsu_spectral::{Error, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

/// Name of the environment variable pointing at the cache directory.
pub const CACHE_ENV: &str = "KOMATSU_SPECTRAL_CACHE";

/// Serialized writer: all report files go through one lock, in call order.
pub struct Output {
    dir: Option<PathBuf>,
    written: Mutex<Vec<PathBuf>>,
}

impl Output {
    pub fn new(dir: Option<PathBuf>) -> Result<Self> {
        if let Some(d) = &dir {
            std::fs::create_dir_all(d)?;
        }
        Ok(Self { dir, written: Mutex::new(Vec::new()) })
    }

    pub fn enabled(&self) -> bool {
        self.dir.is_some()
    }

    /// Writes `name` under the output directory; a no-op without `--out`.
    pub fn file(&self, name: &str, contents: &str) -> Result<()> {
        let Some(d) = &self.dir else { return Ok(()) };
        let mut w = self.written.lock().expect("writer lock");
        let p = d.join(name);
        std::fs::write(&p, contents)?;
        w.push(p);
        Ok(())
    }

    pub fn json(&self, name: &str, v: &Value) -> Result<()> {
        let mut s = serde_json::to_string_pretty(v)?;
        s.push('\n');
        self.file(name, &s)
    }

    pub fn written(&self) -> Vec<PathBuf> {
        self.written.lock().expect("writer lock").clone()
    }
}

/// Isolated metadata block; no wall-clock content, so reports are reproducible.
pub fn metadata(command: &str) -> Value {
    json!({ "tool": "komatsu", "version": env!("CARGO_PKG_VERSION"), "command": command })
}

/// Cache of JSON-serializable results keyed by a canonical string.
pub struct Cache {
    dir: Option<PathBuf>,
}

impl Cache {
    pub fn from_env() -> Self {
        Self { dir: std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from) }
    }

    pub fn at(dir: Option<&Path>) -> Self {
        Self { dir: dir.map(Path::to_path_buf) }
    }

    fn path(&self, kind: &str, key: &str) -> Option<PathBuf> {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        key.hash(&mut h);
        self.dir.as_ref().map(|d| d.join(format!("{kind}-{:016x}.cbor", h.finish())))
    }

    /// Returns the cached value for `key`, or computes and stores it.
    ///
    /// Entries are CBOR (non-finite floats survive, unlike JSON) and store
    /// their full key; a mismatch or unreadable entry is a miss.
    pub fn get_or<T, F>(&self, kind: &str, key: &str, compute: F) -> Result<(T, bool)>
    where
        T: Serialize + DeserializeOwned,
        F: FnOnce() -> Result<T>,
    {
        let Some(path) = self.path(kind, key) else { return Ok((compute()?, false)) };
        if let Ok(bytes) = std::fs::read(&path) {
            if let Ok((k, t)) = ciborium::from_reader::<(String, T), _>(bytes.as_slice()) {
                if k == key {
                    return Ok((t, true));
                }
            }
        }
        let t = compute()?;
        let mut buf = Vec::new();
        ciborium::into_writer(&(key, &t), &mut buf).map_err(|e| Error::Config(format!("cache encode: {e}")))?;
        std::fs::create_dir_all(path.parent().expect("cache dir"))?;
        // write then rename so concurrent readers never see a partial file
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        std::fs::write(&tmp, buf)?;
        std::fs::rename(&tmp, &path).map_err(Error::Io)?;
        Ok((t, false))
    }
}
