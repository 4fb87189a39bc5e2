//! Deployment-cost measurements: inference latency, model size and peak
//! heap use during inference.
//!
//! Peak memory comes from [`CountingAllocator`], a wrapper around the system
//! allocator that must be installed as the process `#[global_allocator]`.
//! It only counts allocations made by the thread that is currently
//! measuring, so unrelated threads (a test harness, a logger) do not leak
//! into the figure.

use std::alloc::{GlobalAlloc, Layout, System};
use std::cell::Cell;
use std::hint::black_box;
use std::sync::atomic::{AtomicBool, AtomicI64, Ordering::Relaxed, Ordering::SeqCst};
use std::time::Instant;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gbrt::{Ensemble, PredictError};
use crate::model_store::model_size_kb;

pub const DEFAULT_REPEATS: usize = 31;
pub const MIN_REPEATS: usize = 3;

#[derive(Debug, Error, PartialEq)]
pub enum ProfileError {
    #[error("at least {MIN_REPEATS} timed repeats are required, got {0}")]
    TooFewRepeats(usize),
    #[error("cannot time inference on an empty test set")]
    EmptyInput,
    #[error("prediction checksum changed between repeats")]
    ChecksumDrift,
    #[error("peak-memory instrumentation is not installed as the global allocator")]
    Unsupported,
    #[error("another peak-memory measurement is already running")]
    Busy,
    #[error(transparent)]
    Predict(#[from] PredictError),
}

thread_local! {
    static TRACKED: Cell<bool> = const { Cell::new(false) };
}

fn tracked() -> bool {
    TRACKED.try_with(Cell::get).unwrap_or(false)
}

/// Global allocator that records the live-bytes high-water mark of the
/// measuring thread.
pub struct CountingAllocator {
    installed: AtomicBool,
    measuring: AtomicBool,
    live: AtomicI64,
    peak: AtomicI64,
}

impl CountingAllocator {
    pub const fn new() -> CountingAllocator {
        CountingAllocator {
            installed: AtomicBool::new(false),
            measuring: AtomicBool::new(false),
            live: AtomicI64::new(0),
            peak: AtomicI64::new(0),
        }
    }

    /// True once any allocation has been routed through this instance.
    pub fn is_installed(&self) -> bool {
        self.installed.load(Relaxed)
    }

    fn record(&self, delta: i64) {
        let now = self.live.fetch_add(delta, SeqCst) + delta;
        self.peak.fetch_max(now, SeqCst);
    }

    /// Net bytes held at the peak while `action` ran on this thread.
    ///
    /// Allocations from other threads are ignored. Only one measurement may
    /// be active at a time.
    pub fn peak_during<T>(&self, action: impl FnOnce() -> T) -> Result<(T, u64), ProfileError> {
        if !self.is_installed() {
            return Err(ProfileError::Unsupported);
        }
        if self.measuring.swap(true, SeqCst) {
            return Err(ProfileError::Busy);
        }
        self.live.store(0, SeqCst);
        self.peak.store(0, SeqCst);
        TRACKED.with(|t| t.set(true));
        let out = action();
        TRACKED.with(|t| t.set(false));
        let peak = self.peak.load(SeqCst).max(0) as u64;
        self.measuring.store(false, SeqCst);
        Ok((out, peak))
    }
}

impl Default for CountingAllocator {
    fn default() -> Self {
        Self::new()
    }
}

unsafe impl GlobalAlloc for CountingAllocator {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let ptr = System.alloc(layout);
        self.installed.store(true, Relaxed);
        if !ptr.is_null() && tracked() {
            self.record(layout.size() as i64);
        }
        ptr
    }

    unsafe fn alloc_zeroed(&self, layout: Layout) -> *mut u8 {
        let ptr = System.alloc_zeroed(layout);
        self.installed.store(true, Relaxed);
        if !ptr.is_null() && tracked() {
            self.record(layout.size() as i64);
        }
        ptr
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        System.dealloc(ptr, layout);
        if tracked() {
            self.record(-(layout.size() as i64));
        }
    }

    unsafe fn realloc(&self, ptr: *mut u8, layout: Layout, new_size: usize) -> *mut u8 {
        let new = System.realloc(ptr, layout, new_size);
        if !new.is_null() && tracked() {
            self.record(new_size as i64 - layout.size() as i64);
        }
        new
    }
}

/// Peak bytes allocated by the current thread while `action` runs.
pub fn peak_memory_during(allocator: &CountingAllocator, action: impl FnOnce()) -> Result<u64, ProfileError> {
    allocator.peak_during(action).map(|((), peak)| peak)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub median_ms: f64,
    pub min_ms: f64,
    pub mean_ms: f64,
}

impl Timing {
    fn from_samples(mut samples: Vec<f64>) -> Timing {
        samples.sort_by(f64::total_cmp);
        let n = samples.len();
        let median_ms = if n % 2 == 1 {
            samples[n / 2]
        } else {
            (samples[n / 2 - 1] + samples[n / 2]) / 2.0
        };
        Timing {
            median_ms,
            min_ms: samples[0],
            mean_ms: samples.iter().sum::<f64>() / n as f64,
        }
    }
}

/// Time `action` once untimed, then `repeats` times, returning wall-clock
/// statistics in milliseconds and the per-run results.
pub fn time_action<T>(repeats: usize, mut action: impl FnMut() -> T) -> Result<(Timing, Vec<T>), ProfileError> {
    if repeats < MIN_REPEATS {
        return Err(ProfileError::TooFewRepeats(repeats));
    }
    black_box(action());
    let mut samples = Vec::with_capacity(repeats);
    let mut results = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let start = Instant::now();
        let out = black_box(action());
        samples.push(start.elapsed().as_secs_f64() * 1000.0);
        results.push(out);
    }
    Ok((Timing::from_samples(samples), results))
}

fn checksum(values: &[f64]) -> u64 {
    values
        .iter()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, v| (h ^ v.to_bits()).wrapping_mul(0x0100_0000_01b3))
}

/// Median, minimum and mean wall time of a full-batch `predict` call.
///
/// Each run's predictions are checksummed; any difference between runs is
/// an error.
pub fn time_inference(model: &Ensemble, x_test: ArrayView2<f64>, repeats: usize) -> Result<Timing, ProfileError> {
    if x_test.nrows() == 0 {
        return Err(ProfileError::EmptyInput);
    }
    // validate once so the timed closure cannot fail
    model.predict(x_test)?;
    let (timing, sums) = time_action(repeats, || {
        let p = model.predict(black_box(x_test)).expect("validated above");
        checksum(p.as_slice().expect("contiguous"))
    })?;
    if sums.windows(2).any(|w| w[0] != w[1]) {
        return Err(ProfileError::ChecksumDrift);
    }
    Ok(timing)
}

/// One row of the resource table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub target: String,
    pub model: String,
    pub inference_ms: f64,
    pub per_sample_us: f64,
    pub model_size_kb: f64,
    pub peak_mem_mb: f64,
    pub repeats: usize,
}

pub fn build_resource_report(
    target: &str,
    model_name: &str,
    model: &Ensemble,
    model_bytes: &[u8],
    x_test: ArrayView2<f64>,
    repeats: usize,
    allocator: &CountingAllocator,
) -> Result<ResourceReport, ProfileError> {
    let timing = time_inference(model, x_test, repeats)?;
    let (prediction, peak) = allocator.peak_during(|| model.predict(x_test))?;
    prediction?;
    Ok(ResourceReport {
        target: target.to_string(),
        model: model_name.to_string(),
        inference_ms: timing.median_ms,
        per_sample_us: timing.median_ms * 1000.0 / x_test.nrows() as f64,
        model_size_kb: model_size_kb(model_bytes),
        peak_mem_mb: peak as f64 / (1024.0 * 1024.0),
        repeats,
    })
}
