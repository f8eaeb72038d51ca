//! Chunked parallel sweep execution with an append-only result cache.
//!
//! The prime line is cut into fixed-width chunks aligned to absolute
//! multiples of the width, so a chunk's records are reusable by any later
//! run of the same system regardless of its range. Finished chunks are
//! appended to a JSONL file as single writes; a torn final line from a
//! crash is skipped on reload and recomputed.

use std::collections::HashMap;
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{SweepError, SweepRecord, TargetSystem};
use crate::stats::DensityEstimate;

pub const DEFAULT_CHUNK_WIDTH: u64 = 1 << 16;

/// Sweep executor. `chunk_budget` caps how many chunks one `run` call may
/// compute (cached chunks are free), which makes interruption testable.
#[derive(Debug, Clone)]
pub struct SweepRunner {
    pub chunk_width: u64,
    /// 0 uses the global thread pool.
    pub workers: usize,
    pub cache_dir: Option<PathBuf>,
    pub chunk_budget: Option<u64>,
}

impl Default for SweepRunner {
    fn default() -> SweepRunner {
        SweepRunner {
            chunk_width: DEFAULT_CHUNK_WIDTH,
            workers: 0,
            cache_dir: None,
            chunk_budget: None,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ChunkLine {
    chunk: u64,
    records: Vec<SweepRecord>,
}

#[derive(Debug)]
pub struct RunOutput {
    /// Ascending primes; on an incomplete run, the contiguous prefix of the
    /// range that is already covered.
    pub records: Vec<SweepRecord>,
    pub estimate: DensityEstimate,
    pub completed: bool,
    pub chunks_computed: u64,
    pub chunks_from_cache: u64,
}

impl SweepRunner {
    pub fn run(&self, sys: &TargetSystem, lo: u64, hi: u64) -> Result<RunOutput, SweepError> {
        assert!(self.chunk_width > 0);
        let w = self.chunk_width;
        let chunk_ids: Vec<u64> = if hi > lo {
            (lo / w..=(hi - 1) / w).collect()
        } else {
            Vec::new()
        };
        let cache_path = self.cache_dir.as_ref().map(|dir| {
            dir.join(format!("sweep-{}-w{}.jsonl", &sys.hash_hex()[..16], w))
        });
        let mut have: HashMap<u64, Vec<SweepRecord>> = HashMap::new();
        if let Some(path) = &cache_path {
            if let Ok(file) = std::fs::File::open(path) {
                for line in BufReader::new(file).lines() {
                    let Ok(line) = line else { break };
                    let Ok(parsed) = serde_json::from_str::<ChunkLine>(&line) else {
                        continue;
                    };
                    have.entry(parsed.chunk).or_insert(parsed.records);
                }
            }
        }
        let chunks_from_cache = chunk_ids.iter().filter(|k| have.contains_key(k)).count() as u64;
        let mut missing: Vec<u64> = chunk_ids
            .iter()
            .copied()
            .filter(|k| !have.contains_key(k))
            .collect();
        if let Some(budget) = self.chunk_budget {
            missing.truncate(budget as usize);
        }
        let chunks_computed = missing.len() as u64;
        if !missing.is_empty() {
            let sink = match &cache_path {
                Some(path) => {
                    if let Some(parent) = path.parent() {
                        std::fs::create_dir_all(parent)?;
                    }
                    Some(Mutex::new(
                        OpenOptions::new().create(true).append(true).open(path)?,
                    ))
                }
                None => None,
            };
            let computed: Vec<(u64, Vec<SweepRecord>)> = self.with_pool(|| {
                missing
                    .par_iter()
                    .map(|&k| {
                        // always the full chunk, so the cache entry is
                        // range-independent
                        let records = chunk_records(sys, k * w, (k + 1) * w);
                        if let Some(sink) = &sink {
                            let line = serde_json::to_string(&ChunkLine {
                                chunk: k,
                                records: records.clone(),
                            })
                            .expect("plain struct");
                            let mut file = sink.lock().unwrap();
                            let _ = file.write_all(line.as_bytes());
                            let _ = file.write_all(b"\n");
                            let _ = file.flush();
                        }
                        (k, records)
                    })
                    .collect()
            });
            have.extend(computed);
        }
        let mut records = Vec::new();
        let mut completed = true;
        for &k in &chunk_ids {
            match have.get(&k) {
                Some(chunk) => records.extend(
                    chunk
                        .iter()
                        .filter(|r| r.p >= lo && r.p < hi)
                        .cloned(),
                ),
                None => {
                    completed = false;
                    break;
                }
            }
        }
        let mut estimate = DensityEstimate::default();
        for rec in &records {
            estimate.record(rec.derangement);
        }
        Ok(RunOutput {
            records,
            estimate,
            completed,
            chunks_computed,
            chunks_from_cache,
        })
    }

    fn with_pool<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        if self.workers == 0 {
            f()
        } else {
            rayon::ThreadPoolBuilder::new()
                .num_threads(self.workers)
                .build()
                .expect("thread pool")
                .install(f)
        }
    }
}

fn chunk_records(sys: &TargetSystem, lo: u64, hi: u64) -> Vec<SweepRecord> {
    crate::exact::prime_range(lo, hi)
        .filter_map(|p| sys.prime_record(p))
        .collect()
}
