//! The ACU bank: cluster-partitioned storage of historical ACU records with
//! thresholded top-k cosine retrieval.
//!
//! Retrieval is an exhaustive flat scan over contiguous vector storage.
//! That keeps results exact (oracle-testable), makes search time linear in
//! bank size, and leaves room to layer an approximate index later without
//! touching the contract.
//!
//! On disk a bank is a directory holding `manifest.json` plus one
//! `<cluster>.acus.jsonl` per cluster database, one JSON record per line:
//! `{"acu_id", "doc_id", "text", "seq", "vector": [...]}`.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::{dot_clamped, EmbeddingVector};

/// On-disk format version understood by this build.
pub const BANK_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum BankError {
    #[error("vector dimension {got} does not match bank dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("duplicate ACU id `{0}` in cluster database `{1}`")]
    DuplicateAcuId(String, String),
    #[error("unknown cluster database `{0}`")]
    UnknownCluster(String),
    #[error("invalid cluster id `{0}`: must be non-empty and contain no path separators")]
    InvalidClusterId(String),
    #[error("k must be >= 1")]
    InvalidK,
    #[error("bank manifest not found or unreadable at {0}")]
    MissingManifest(String),
    #[error("unsupported bank format version {0} (supported: {BANK_FORMAT_VERSION})")]
    UnsupportedVersion(u32),
    #[error("corrupt record in {file} at line {line}: {reason}")]
    CorruptRecord { file: String, line: usize, reason: String },
    #[error("cluster `{cluster}` holds {found} records but the manifest says {expected}")]
    ManifestMismatch { cluster: String, expected: u64, found: u64 },
    #[error("cluster `{0}` already exists in the receiving bank")]
    ClusterCollision(String),
    #[error("bench sizes must be ascending and non-empty queries >= 1")]
    InvalidBenchSpec,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Behavior of [`AcuBank::search_top_k`] on a cluster that was never created.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BankMode {
    /// Unknown cluster is an error.
    Strict,
    /// Unknown cluster returns no hits.
    Lenient,
}

/// Record handed to [`AcuBank::insert`]; the bank assigns the insertion
/// sequence number.
#[derive(Debug, Clone)]
pub struct NewAcuRecord {
    pub acu_id: String,
    pub doc_id: String,
    pub text: String,
    pub vector: EmbeddingVector,
}

/// Borrowed view of a stored record.
#[derive(Debug, Clone, Copy)]
pub struct BankRecord<'a> {
    pub acu_id: &'a str,
    pub doc_id: &'a str,
    pub cluster_id: &'a str,
    pub text: &'a str,
    pub inserted_seq: u64,
    pub vector: &'a [f64],
}

/// One retrieval result: a stored record plus its similarity to the query.
#[derive(Debug, Clone, Copy)]
pub struct RetrievalHit<'a> {
    pub record: BankRecord<'a>,
    pub similarity: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RecordMeta {
    acu_id: String,
    doc_id: String,
    text: String,
    seq: u64,
}

#[derive(Debug, Default)]
struct ClusterDb {
    meta: Vec<RecordMeta>,
    /// Row-major contiguous vector storage, `meta.len() * dim` entries.
    flat: Vec<f64>,
    ids: HashSet<String>,
    next_seq: u64,
}

/// Serialized bank summary: format version, vector dimension, and per-cluster
/// record counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BankManifest {
    pub format_version: u32,
    pub dim: usize,
    pub databases: BTreeMap<String, u64>,
}

/// JSONL line shape of one persisted record.
#[derive(Serialize, Deserialize)]
struct RecordLine {
    acu_id: String,
    doc_id: String,
    text: String,
    seq: u64,
    vector: Vec<f64>,
}

#[derive(Debug)]
pub struct AcuBank {
    dim: usize,
    mode: BankMode,
    dbs: BTreeMap<String, ClusterDb>,
}

fn valid_cluster_id(id: &str) -> bool {
    !id.is_empty() && !id.contains(['/', '\\']) && id != "." && id != ".."
}

impl AcuBank {
    pub fn new(dim: usize) -> Self {
        Self::with_mode(dim, BankMode::Lenient)
    }

    pub fn with_mode(dim: usize, mode: BankMode) -> Self {
        assert!(dim > 0, "bank dimension must be positive");
        Self { dim, mode, dbs: BTreeMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn clusters(&self) -> impl Iterator<Item = &str> {
        self.dbs.keys().map(String::as_str)
    }

    pub fn record_count(&self, cluster_id: &str) -> u64 {
        self.dbs.get(cluster_id).map(|db| db.meta.len() as u64).unwrap_or(0)
    }

    pub fn total_records(&self) -> u64 {
        self.dbs.values().map(|db| db.meta.len() as u64).sum()
    }

    /// Create the cluster database if it does not exist yet.
    pub fn ensure_cluster(&mut self, cluster_id: &str) -> Result<(), BankError> {
        if !valid_cluster_id(cluster_id) {
            return Err(BankError::InvalidClusterId(cluster_id.to_string()));
        }
        self.dbs.entry(cluster_id.to_string()).or_default();
        Ok(())
    }

    /// Append records to a cluster database, assigning fresh sequence
    /// numbers. The call is atomic: every record is validated before any is
    /// appended, so a failed insert leaves the database unchanged.
    pub fn insert(
        &mut self,
        cluster_id: &str,
        records: Vec<NewAcuRecord>,
    ) -> Result<usize, BankError> {
        if !valid_cluster_id(cluster_id) {
            return Err(BankError::InvalidClusterId(cluster_id.to_string()));
        }
        let dim = self.dim;
        let db = self.dbs.entry(cluster_id.to_string()).or_default();
        let mut batch_ids: HashSet<&str> = HashSet::new();
        for r in &records {
            if r.vector.dim() != dim {
                return Err(BankError::DimensionMismatch { expected: dim, got: r.vector.dim() });
            }
            if db.ids.contains(&r.acu_id) || !batch_ids.insert(&r.acu_id) {
                return Err(BankError::DuplicateAcuId(r.acu_id.clone(), cluster_id.to_string()));
            }
        }
        let count = records.len();
        for r in records {
            db.flat.extend_from_slice(r.vector.values());
            db.ids.insert(r.acu_id.clone());
            db.meta.push(RecordMeta {
                acu_id: r.acu_id,
                doc_id: r.doc_id,
                text: r.text,
                seq: db.next_seq,
            });
            db.next_seq += 1;
        }
        Ok(count)
    }

    /// Thresholded top-k retrieval: hits with similarity >= `min_sim`
    /// (inclusive), at most `k`, sorted by similarity descending with ties
    /// broken by smaller insertion sequence. Equal to an exhaustive scan by
    /// construction.
    pub fn search_top_k(
        &self,
        cluster_id: &str,
        query: &EmbeddingVector,
        k: usize,
        min_sim: f64,
    ) -> Result<Vec<RetrievalHit<'_>>, BankError> {
        if k == 0 {
            return Err(BankError::InvalidK);
        }
        if query.dim() != self.dim {
            return Err(BankError::DimensionMismatch { expected: self.dim, got: query.dim() });
        }
        let (cluster_key, db) = match self.dbs.get_key_value(cluster_id) {
            Some((key, db)) => (key.as_str(), db),
            None => {
                return match self.mode {
                    BankMode::Strict => Err(BankError::UnknownCluster(cluster_id.to_string())),
                    BankMode::Lenient => Ok(Vec::new()),
                }
            }
        };
        let mut hits: Vec<(usize, f64)> = Vec::new();
        for (row, meta) in db.meta.iter().enumerate() {
            let start = row * self.dim;
            let sim = dot_clamped(&db.flat[start..start + self.dim], query.values());
            if sim >= min_sim {
                hits.push((row, sim));
            }
            let _ = meta;
        }
        hits.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .expect("similarities are finite")
                .then_with(|| db.meta[a.0].seq.cmp(&db.meta[b.0].seq))
        });
        hits.truncate(k);
        Ok(hits
            .into_iter()
            .map(|(row, similarity)| {
                let meta = &db.meta[row];
                let start = row * self.dim;
                RetrievalHit {
                    record: BankRecord {
                        acu_id: &meta.acu_id,
                        doc_id: &meta.doc_id,
                        cluster_id: cluster_key,
                        text: &meta.text,
                        inserted_seq: meta.seq,
                        vector: &db.flat[start..start + self.dim],
                    },
                    similarity,
                }
            })
            .collect())
    }

    /// Move `cluster_id`'s database into a new single-cluster bank with the
    /// same dimension and mode. Other clusters stay behind; the result is
    /// empty when the cluster was never created. Used to hand independent
    /// clusters to worker threads.
    pub fn split_cluster(&mut self, cluster_id: &str) -> AcuBank {
        let mut out = AcuBank::with_mode(self.dim, self.mode);
        if let Some(db) = self.dbs.remove(cluster_id) {
            out.dbs.insert(cluster_id.to_string(), db);
        }
        out
    }

    /// Merge every database of `other` back into this bank. Dimensions must
    /// match and cluster names must not collide with non-empty databases.
    pub fn absorb(&mut self, other: AcuBank) -> Result<(), BankError> {
        if other.dim != self.dim {
            return Err(BankError::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        for (cluster, db) in other.dbs {
            match self.dbs.get(&cluster) {
                Some(existing) if !existing.meta.is_empty() => {
                    return Err(BankError::ClusterCollision(cluster))
                }
                _ => {
                    self.dbs.insert(cluster, db);
                }
            }
        }
        Ok(())
    }

    /// Write the bank to `path` and return the manifest.
    pub fn persist(&self, path: &Path) -> Result<BankManifest, BankError> {
        fs::create_dir_all(path)?;
        let mut databases = BTreeMap::new();
        for (cluster, db) in &self.dbs {
            let file = path.join(format!("{cluster}.acus.jsonl"));
            let mut w = BufWriter::new(fs::File::create(&file)?);
            for (row, meta) in db.meta.iter().enumerate() {
                let start = row * self.dim;
                let line = RecordLine {
                    acu_id: meta.acu_id.clone(),
                    doc_id: meta.doc_id.clone(),
                    text: meta.text.clone(),
                    seq: meta.seq,
                    vector: db.flat[start..start + self.dim].to_vec(),
                };
                serde_json::to_writer(&mut w, &line)
                    .map_err(|e| BankError::CorruptRecord {
                        file: file.display().to_string(),
                        line: row + 1,
                        reason: e.to_string(),
                    })?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
            databases.insert(cluster.clone(), db.meta.len() as u64);
        }
        let manifest =
            BankManifest { format_version: BANK_FORMAT_VERSION, dim: self.dim, databases };
        let mut mw = BufWriter::new(fs::File::create(path.join("manifest.json"))?);
        serde_json::to_writer_pretty(&mut mw, &manifest)
            .map_err(|e| BankError::MissingManifest(e.to_string()))?;
        mw.write_all(b"\n")?;
        mw.flush()?;
        Ok(manifest)
    }

    /// Load a bank persisted by [`AcuBank::persist`]. Round-tripping is
    /// bit-exact: a loaded bank answers every query identically.
    pub fn load(path: &Path) -> Result<Self, BankError> {
        let manifest_path = path.join("manifest.json");
        let manifest_text = fs::read_to_string(&manifest_path)
            .map_err(|_| BankError::MissingManifest(manifest_path.display().to_string()))?;
        let manifest: BankManifest = serde_json::from_str(&manifest_text)
            .map_err(|_| BankError::MissingManifest(manifest_path.display().to_string()))?;
        if manifest.format_version != BANK_FORMAT_VERSION {
            return Err(BankError::UnsupportedVersion(manifest.format_version));
        }
        let mut bank = AcuBank::new(manifest.dim);
        for (cluster, &expected) in &manifest.databases {
            let file = path.join(format!("{cluster}.acus.jsonl"));
            let file_name = file.display().to_string();
            let reader = BufReader::new(fs::File::open(&file).map_err(|e| {
                BankError::CorruptRecord { file: file_name.clone(), line: 0, reason: e.to_string() }
            })?);
            let db = bank.dbs.entry(cluster.clone()).or_default();
            for (i, line) in reader.lines().enumerate() {
                let line_no = i + 1;
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let rec: RecordLine = serde_json::from_str(&line).map_err(|e| {
                    BankError::CorruptRecord {
                        file: file_name.clone(),
                        line: line_no,
                        reason: e.to_string(),
                    }
                })?;
                if rec.vector.len() != manifest.dim {
                    return Err(BankError::CorruptRecord {
                        file: file_name.clone(),
                        line: line_no,
                        reason: format!(
                            "vector has {} entries, manifest dim is {}",
                            rec.vector.len(),
                            manifest.dim
                        ),
                    });
                }
                if !db.ids.insert(rec.acu_id.clone()) {
                    return Err(BankError::CorruptRecord {
                        file: file_name.clone(),
                        line: line_no,
                        reason: format!("duplicate acu_id `{}`", rec.acu_id),
                    });
                }
                // Stored vectors are already unit norm; keep them bit-exact.
                db.flat.extend_from_slice(&rec.vector);
                db.next_seq = db.next_seq.max(rec.seq + 1);
                db.meta.push(RecordMeta {
                    acu_id: rec.acu_id,
                    doc_id: rec.doc_id,
                    text: rec.text,
                    seq: rec.seq,
                });
            }
            let found = db.meta.len() as u64;
            if found != expected {
                return Err(BankError::ManifestMismatch {
                    cluster: cluster.clone(),
                    expected,
                    found,
                });
            }
        }
        Ok(bank)
    }
}

// ---------------------------------------------------------------------------
// Search-time benchmark
// ---------------------------------------------------------------------------

/// One row of the search benchmark.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub size: usize,
    pub mean_seconds: f64,
    pub p95_seconds: f64,
}

/// Random unit vector; uniform components are fine for timing and oracles.
pub fn random_unit_vector(rng: &mut impl Rng, dim: usize) -> EmbeddingVector {
    loop {
        let values: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
        if let Ok(v) = EmbeddingVector::normalized(values) {
            return v;
        }
    }
}

/// Time top-k search over synthetic banks of the given ascending sizes.
/// Records are generated from a seeded generator; each size is measured over
/// `n_queries` warm queries.
pub fn bench_search(
    sizes: &[usize],
    dim: usize,
    n_queries: usize,
    seed: u64,
) -> Result<Vec<BenchRow>, BankError> {
    if sizes.is_empty() {
        return Ok(Vec::new());
    }
    if n_queries == 0 || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(BankError::InvalidBenchSpec);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bank = AcuBank::new(dim);
    let mut inserted = 0usize;
    let mut rows = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let batch: Vec<NewAcuRecord> = (inserted..size)
            .map(|i| NewAcuRecord {
                acu_id: format!("bench#{i}"),
                doc_id: format!("doc{}", i / 16),
                text: String::new(),
                vector: random_unit_vector(&mut rng, dim),
            })
            .collect();
        bank.insert("bench", batch)?;
        inserted = size;

        let queries: Vec<EmbeddingVector> =
            (0..n_queries).map(|_| random_unit_vector(&mut rng, dim)).collect();
        // Warm the cache before timing.
        for q in queries.iter().take(3) {
            let _ = bank.search_top_k("bench", q, 5, 0.6)?;
        }
        let mut times: Vec<f64> = Vec::with_capacity(n_queries);
        for q in &queries {
            let start = Instant::now();
            let hits = bank.search_top_k("bench", q, 5, 0.6)?;
            times.push(start.elapsed().as_secs_f64());
            std::hint::black_box(hits.len());
        }
        let mean = times.iter().sum::<f64>() / times.len() as f64;
        let mut sorted = times.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let p95_idx = ((0.95 * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len()) - 1;
        rows.push(BenchRow { size, mean_seconds: mean, p95_seconds: sorted[p95_idx] });
    }
    Ok(rows)
}

/// Write benchmark rows as `size,mean_seconds,p95_seconds` CSV.
pub fn write_bench_csv(rows: &[BenchRow], mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "size,mean_seconds,p95_seconds")?;
    for r in rows {
        writeln!(w, "{},{},{}", r.size, r.mean_seconds, r.p95_seconds)?;
    }
    Ok(())
}
