//! Shared fixtures for the integration tests.
//!
//! `surrogate_csv` writes a file in the AirQualityUCI layout (semicolon
//! delimiter, comma decimals, `-200` missing tags, two trailing empty
//! columns) whose sensor channels are noisy nonlinear functions of the
//! ground-truth pollutants. It stands in for the real recording when that
//! file is not available.
#![allow(dead_code)]

pub mod brute;

use std::fmt::Write as _;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub const HEADER: &str = "Date;Time;CO(GT);PT08.S1(CO);NMHC(GT);C6H6(GT);PT08.S2(NMHC);NOx(GT);PT08.S3(NOx);NO2(GT);PT08.S4(NO2);PT08.S5(O3);T;RH;AH;;";

/// Row count of the published recording.
pub const CANONICAL_ROWS: usize = 9358;

/// The real dataset, from `EDGEBOOST_AIRQUALITY_CSV` or `data/AirQualityUCI.csv`
/// at the workspace root.
pub fn canonical_csv() -> Option<PathBuf> {
    if let Ok(p) = std::env::var("EDGEBOOST_AIRQUALITY_CSV") {
        let p = PathBuf::from(p);
        return p.is_file().then_some(p);
    }
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/AirQualityUCI.csv");
    p.is_file().then_some(p)
}

fn decimal(v: f64, places: usize) -> String {
    format!("{v:.places$}").replace('.', ",")
}

pub fn surrogate_csv(n_rows: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).unwrap();
    let noise = move |rng: &mut ChaCha8Rng, sd: f64| sd * unit.sample(rng);

    let mut out = String::with_capacity(n_rows * 110);
    out.push_str(HEADER);
    out.push('\n');

    let mut outage = 0usize;
    let mut drift = 0.0f64;
    for i in 0..n_rows {
        let hour = (18 + i) % 24;
        let day = (18 + i) / 24;
        let h = hour as f64;
        let weekend = if day % 7 >= 5 { 0.6 } else { 1.0 };
        let traffic = weekend * (0.3 + (-(h - 8.0).powi(2) / 4.0).exp() + 0.9 * (-(h - 19.0).powi(2) / 5.0).exp());
        drift = 0.97 * drift + noise(&mut rng, 0.08);

        let season = (2.0 * std::f64::consts::PI * day as f64 / 365.0).sin();
        let t = 18.0 + 9.0 * season + 4.0 * (2.0 * std::f64::consts::PI * (h - 9.0) / 24.0).sin() + noise(&mut rng, 1.0);
        let rh = (50.0 - 1.5 * (t - 18.0) + noise(&mut rng, 8.0)).clamp(10.0, 90.0);
        let ah = 0.01 * rh * (0.6 + 0.05 * t);

        let co = (0.4 + 2.2 * traffic * (1.0 + 0.25 * season) + drift + noise(&mut rng, 0.2)).max(0.1);
        let nox = (30.0 + 220.0 * traffic + 40.0 * drift + noise(&mut rng, 20.0)).max(2.0);
        let no2 = (25.0 + 0.35 * nox + 8.0 * (1.0 - season) + noise(&mut rng, 9.0)).max(2.0);
        let c6h6 = (3.6 * co + noise(&mut rng, 0.5)).max(0.1);
        let nmhc = (80.0 * co + noise(&mut rng, 20.0)).max(7.0);

        let s1 = 700.0 + 260.0 * co.powf(0.8) + 1.5 * rh + noise(&mut rng, 35.0);
        let s2 = 450.0 + 95.0 * c6h6.powf(0.9) + noise(&mut rng, 30.0);
        let s3 = 1700.0 - 330.0 * (1.0 + nox / 60.0).ln() + 3.0 * t + noise(&mut rng, 40.0);
        let s4 = 1100.0 + 4.0 * no2 - 12.0 * (t - 18.0) + 2.0 * rh + noise(&mut rng, 50.0);
        let s5 = 450.0 + 230.0 * co + 3.0 * no2 + noise(&mut rng, 70.0);

        // sensor outages blank every instrument channel for a few hours
        if outage == 0 && rng.gen_bool(0.004) {
            outage = rng.gen_range(3..24);
        }
        let sensors_down = outage > 0;
        outage = outage.saturating_sub(1);

        let gt = |rng: &mut ChaCha8Rng, p: f64, text: String| if rng.gen_bool(p) { "-200".to_string() } else { text };
        let sensor = |v: f64, places: usize| if sensors_down { "-200".to_string() } else { decimal(v, places) };

        let _ = writeln!(
            out,
            "{:02}/{:02}/{};{:02}.00.00;{};{};{};{};{};{};{};{};{};{};{};{};{};;",
            1 + day % 28,
            1 + (day / 28) % 12,
            2004 + day / 336,
            hour,
            gt(&mut rng, 0.18, decimal(co, 1)),
            sensor(s1, 0),
            gt(&mut rng, 0.9, format!("{}", nmhc.round())),
            gt(&mut rng, 0.04, decimal(c6h6, 1)),
            sensor(s2, 0),
            gt(&mut rng, 0.175, format!("{}", nox.round())),
            sensor(s3, 0),
            gt(&mut rng, 0.175, format!("{}", no2.round())),
            sensor(s4, 0),
            sensor(s5, 0),
            sensor(t, 1),
            sensor(rh, 1),
            sensor(ah, 4),
        );
    }
    out
}

/// Write the surrogate into `dir` and return its path.
pub fn write_surrogate(dir: &std::path::Path, n_rows: usize, seed: u64) -> PathBuf {
    let path = dir.join("AirQualitySurrogate.csv");
    std::fs::write(&path, surrogate_csv(n_rows, seed)).unwrap();
    path
}
