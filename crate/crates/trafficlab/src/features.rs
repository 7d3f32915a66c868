//! Congestion labeling and temporal feature engineering.
//!
//! A sample keyed `(sensor, t)` predicts the congestion label of hour `t`
//! one step ahead: its traffic columns come from the reading at `t-1`, and
//! the engineered lag columns carry the congestion density score observed
//! one hour and one week before the target. Rows whose sources are missing
//! are dropped, not imputed.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use thiserror::Error;

use crate::time::HourStamp;

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("sensor `{0}` has readings but no metadata")]
    MissingMeta(String),
    #[error("embedding does not cover sensor `{0}`")]
    EmbeddingSizeMismatch(String),
}

#[derive(Debug, Clone)]
pub struct SensorReading {
    pub sensor_id: String,
    pub timestamp: HourStamp,
    pub avg_speed: f64,
    pub min_speed: f64,
    pub max_speed: f64,
    pub vehicle_count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Continent {
    Europe,
    Asia,
}

impl Continent {
    pub fn as_str(self) -> &'static str {
        match self {
            Continent::Europe => "europe",
            Continent::Asia => "asia",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "europe" => Some(Continent::Europe),
            "asia" => Some(Continent::Asia),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SensorMeta {
    pub sensor_id: String,
    pub latitude: f64,
    pub longitude: f64,
    pub continent: Continent,
    pub district: String,
    pub is_highway: bool,
    pub population_density: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelMode {
    /// Threshold `exp(-s)`.
    SpeedOnly,
    /// Threshold `sigmoid(s/v)`; falls back to speed-only when `v = 0`.
    SpeedVolume,
}

impl LabelMode {
    pub fn as_str(self) -> &'static str {
        match self {
            LabelMode::SpeedOnly => "speed_only",
            LabelMode::SpeedVolume => "speed_volume",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "speed_only" => Some(LabelMode::SpeedOnly),
            "speed_volume" => Some(LabelMode::SpeedVolume),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LabelingConfig {
    pub mode: LabelMode,
    pub tau: f64,
    /// Divisor applied to raw speed before either formula. `exp(-s)`
    /// saturates near zero for raw km/h, so set this near the free-flow
    /// speed when using the speed-only mode.
    pub speed_unit_scale: f64,
    /// Flip the thresholded label. The speed-volume formula as written marks
    /// high speed-per-vehicle as positive; this flag exposes the reverse
    /// without changing the formula.
    pub invert_label: bool,
}

impl Default for LabelingConfig {
    fn default() -> Self {
        LabelingConfig {
            mode: LabelMode::SpeedVolume,
            tau: 0.5,
            speed_unit_scale: 1.0,
            invert_label: false,
        }
    }
}

impl LabelingConfig {
    pub fn fingerprint(&self) -> String {
        format!(
            "label(mode={},tau={},scale={},invert={})",
            self.mode.as_str(),
            self.tau,
            self.speed_unit_scale,
            self.invert_label
        )
    }
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Speed-only congestion label: 0 when `exp(-s) < tau`, else 1.
/// `s` is already unit-scaled.
pub fn congestion_label_speed(s: f64, tau: f64) -> u8 {
    if (-s).exp() < tau {
        0
    } else {
        1
    }
}

/// Speed-and-volume congestion label: 0 when `sigmoid(s/v) < tau`, else 1.
/// Undefined at `v = 0`; callers use the speed-only fallback there.
pub fn congestion_label_speed_volume(s: f64, v: u64, tau: f64) -> u8 {
    debug_assert!(v > 0, "caller must handle the v = 0 fallback");
    if sigmoid(s / v as f64) < tau {
        0
    } else {
        1
    }
}

/// The pre-threshold congestion density in `(0, 1]`, plus a flag that is
/// set when the speed-volume formula hit its `v = 0` hole and the
/// speed-only fallback was used.
pub fn density_score(reading: &SensorReading, config: &LabelingConfig) -> (f64, bool) {
    let s = reading.avg_speed / config.speed_unit_scale;
    match config.mode {
        LabelMode::SpeedOnly => ((-s).exp(), false),
        LabelMode::SpeedVolume => {
            if reading.vehicle_count == 0 {
                ((-s).exp(), true)
            } else {
                (sigmoid(s / reading.vehicle_count as f64), false)
            }
        }
    }
}

/// Label from a density score: `score >= tau`, optionally inverted.
pub fn label_from_score(score: f64, config: &LabelingConfig) -> u8 {
    let raw = u8::from(score >= config.tau);
    if config.invert_label {
        1 - raw
    } else {
        raw
    }
}

/// Density-score series for one sensor, keyed by hour.
pub type ScoreSeries = BTreeMap<HourStamp, f64>;

/// Lag columns for one sensor: for every hour `t` with scores at both
/// `t - 1` and `t - 168`, the pair `(score(t-1), score(t-168))`.
pub fn build_lag_features(series: &ScoreSeries) -> BTreeMap<HourStamp, (f64, f64)> {
    let mut out = BTreeMap::new();
    for &t in series.keys() {
        let hour_ago = series.get(&t.minus_hours(1));
        let week_ago = series.get(&t.minus_hours(168));
        if let (Some(&h), Some(&w)) = (hour_ago, week_ago) {
            out.insert(t, (h, w));
        }
    }
    out
}

/// Per-sensor embedding rows for joining into the feature table.
#[derive(Debug, Clone)]
pub struct SensorEmbedding {
    pub dim: usize,
    pub by_sensor: HashMap<String, Vec<f64>>,
}

impl SensorEmbedding {
    pub fn new(ids: &[String], rows: &ndarray::Array2<f64>) -> Self {
        let dim = rows.ncols();
        let by_sensor = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), rows.row(i).to_vec()))
            .collect();
        SensorEmbedding { dim, by_sensor }
    }
}

#[derive(Debug, Clone)]
pub struct FeatureConfig {
    pub labeling: LabelingConfig,
    /// Include the engineered lag columns (the "with feature engineering"
    /// table). Without them only the base columns remain and rows need just
    /// the previous hour's reading.
    pub include_lags: bool,
    /// Ablation: lag columns carry the thresholded binary label instead of
    /// the continuous density score.
    pub lag_uses_binary: bool,
}

impl FeatureConfig {
    pub fn new(labeling: LabelingConfig, include_lags: bool) -> Self {
        FeatureConfig {
            labeling,
            include_lags,
            lag_uses_binary: false,
        }
    }
}

/// Assembled per-(sensor, hour) samples with a shared column manifest.
/// Feature values are stored row-major; the label is kept separately and is
/// always last on export.
#[derive(Debug, Clone)]
pub struct FeatureTable {
    pub column_manifest: Vec<String>,
    pub sensor_ids: Vec<String>,
    /// `(index into sensor_ids, target hour)` per row.
    pub keys: Vec<(u32, HourStamp)>,
    pub values: Vec<f64>,
    pub labels: Vec<u8>,
    /// Rows whose lag or label source hit the `v = 0` fallback.
    pub fallback_rows: usize,
}

impl FeatureTable {
    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_columns(&self) -> usize {
        self.column_manifest.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.n_columns();
        &self.values[i * w..(i + 1) * w]
    }

    pub fn row_key(&self, i: usize) -> (&str, HourStamp) {
        let (s, t) = self.keys[i];
        (&self.sensor_ids[s as usize], t)
    }

    /// `sensor_id,timestamp,<features...>,label` with the manifest order.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(
            out,
            "sensor_id,timestamp,{},label",
            self.column_manifest.join(",")
        )?;
        for i in 0..self.n_rows() {
            let (id, t) = self.row_key(i);
            write!(out, "{id},{}", t.to_iso())?;
            for v in self.row(i) {
                write!(out, ",{v}")?;
            }
            writeln!(out, ",{}", self.labels[i])?;
        }
        Ok(())
    }
}

/// Deterministic ordinal codes built in first-seen order over the sorted
/// sensor list.
fn build_dictionaries(sorted_meta: &[&SensorMeta]) -> (HashMap<Continent, f64>, HashMap<String, f64>) {
    let mut continent_codes = HashMap::new();
    let mut district_codes = HashMap::new();
    for m in sorted_meta {
        let next = continent_codes.len() as f64;
        continent_codes.entry(m.continent).or_insert(next);
        let next = district_codes.len() as f64;
        district_codes.entry(m.district.clone()).or_insert(next);
    }
    (continent_codes, district_codes)
}

/// Build the feature table. One row per (sensor, target hour) whose sources
/// all exist: the reading at the target hour (label), the reading one hour
/// earlier (traffic columns), and with lags enabled the density scores one
/// hour and one week before the target.
pub fn assemble_features(
    readings: &[SensorReading],
    meta: &[SensorMeta],
    embedding: Option<&SensorEmbedding>,
    config: &FeatureConfig,
) -> Result<FeatureTable, FeatureError> {
    let meta_by_id: HashMap<&str, &SensorMeta> =
        meta.iter().map(|m| (m.sensor_id.as_str(), m)).collect();
    let mut sorted_meta: Vec<&SensorMeta> = meta.iter().collect();
    sorted_meta.sort_by(|a, b| a.sensor_id.cmp(&b.sensor_id));
    let (continent_codes, district_codes) = build_dictionaries(&sorted_meta);

    let mut column_manifest: Vec<String> = [
        "avg_speed",
        "min_speed",
        "max_speed",
        "vehicle_count",
        "continent",
        "district",
        "is_highway",
        "pop_density",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    if config.include_lags {
        column_manifest.push("density_lag_1h".to_string());
        column_manifest.push("density_lag_168h".to_string());
    }
    if let Some(emb) = embedding {
        for k in 0..emb.dim {
            column_manifest.push(format!("e{k}"));
        }
    }

    // Group readings per sensor.
    let mut by_sensor: BTreeMap<&str, BTreeMap<HourStamp, &SensorReading>> = BTreeMap::new();
    for r in readings {
        if !meta_by_id.contains_key(r.sensor_id.as_str()) {
            return Err(FeatureError::MissingMeta(r.sensor_id.clone()));
        }
        by_sensor
            .entry(r.sensor_id.as_str())
            .or_default()
            .insert(r.timestamp, r);
    }
    if let Some(emb) = embedding {
        for &id in by_sensor.keys() {
            if !emb.by_sensor.contains_key(id) {
                return Err(FeatureError::EmbeddingSizeMismatch(id.to_string()));
            }
        }
    }

    let width = column_manifest.len();
    let mut sensor_ids = Vec::new();
    let mut keys = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    let mut labels = Vec::new();
    let mut fallback_rows = 0usize;

    for (id, series) in &by_sensor {
        let sensor_index = sensor_ids.len() as u32;
        sensor_ids.push(id.to_string());
        let m = meta_by_id[id];
        let continent = continent_codes[&m.continent];
        let district = district_codes[&m.district];
        let emb_row = embedding.map(|e| e.by_sensor[*id].as_slice());

        let mut scores: BTreeMap<HourStamp, (f64, bool)> = BTreeMap::new();
        for (&t, r) in series.iter() {
            scores.insert(t, density_score(r, &config.labeling));
        }

        for &t in series.keys() {
            let prev = match series.get(&t.minus_hours(1)) {
                Some(r) => r,
                None => continue,
            };
            let lag_pair = if config.include_lags {
                let hour = scores.get(&t.minus_hours(1));
                let week = scores.get(&t.minus_hours(168));
                match (hour, week) {
                    (Some(&h), Some(&w)) => Some((h, w)),
                    _ => continue,
                }
            } else {
                None
            };

            let (target_score, target_flag) = scores[&t];
            let start = values.len();
            values.extend_from_slice(&[
                prev.avg_speed,
                prev.min_speed,
                prev.max_speed,
                prev.vehicle_count as f64,
                continent,
                district,
                f64::from(m.is_highway),
                m.population_density,
            ]);
            let mut flagged = target_flag;
            if let Some(((h_score, h_flag), (w_score, w_flag))) = lag_pair {
                let (h, w) = if config.lag_uses_binary {
                    (
                        f64::from(label_from_score(h_score, &config.labeling)),
                        f64::from(label_from_score(w_score, &config.labeling)),
                    )
                } else {
                    (h_score, w_score)
                };
                values.push(h);
                values.push(w);
                flagged |= h_flag || w_flag;
            }
            if let Some(row) = emb_row {
                values.extend_from_slice(row);
            }
            debug_assert_eq!(values.len() - start, width);
            debug_assert!(values[start..].iter().all(|v| v.is_finite()));
            keys.push((sensor_index, t));
            labels.push(label_from_score(target_score, &config.labeling));
            fallback_rows += usize::from(flagged);
        }
    }

    Ok(FeatureTable {
        column_manifest,
        sensor_ids,
        keys,
        values,
        labels,
        fallback_rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reading(id: &str, hour: i64, speed: f64, count: u64) -> SensorReading {
        SensorReading {
            sensor_id: id.to_string(),
            timestamp: HourStamp(hour),
            avg_speed: speed,
            min_speed: speed * 0.5,
            max_speed: speed * 1.5,
            vehicle_count: count,
        }
    }

    fn meta(id: &str, district: &str, continent: Continent) -> SensorMeta {
        SensorMeta {
            sensor_id: id.to_string(),
            latitude: 41.0,
            longitude: 29.0,
            continent,
            district: district.to_string(),
            is_highway: false,
            population_density: 1000.0,
        }
    }

    #[test]
    fn speed_only_hand_values() {
        assert_eq!(congestion_label_speed(0.0, 1.0), 1);
        assert_eq!(congestion_label_speed(0.0, 0.5), 1);
        assert_eq!(congestion_label_speed(1.0, 0.5), 0);
        assert_eq!(congestion_label_speed(0.5, 0.5), 1);
    }

    #[test]
    fn speed_volume_hand_values() {
        assert_eq!(congestion_label_speed_volume(0.0, 10, 0.5), 1);
        assert_eq!(congestion_label_speed_volume(60.0, 1, 0.9), 1);
        assert_eq!(congestion_label_speed_volume(10.0, 100, 0.6), 0);
    }

    #[test]
    fn density_score_hand_values() {
        let cfg = LabelingConfig {
            mode: LabelMode::SpeedOnly,
            ..LabelingConfig::default()
        };
        let (s0, _) = density_score(&reading("a", 0, 0.0, 5), &cfg);
        assert_eq!(s0, 1.0);
        let (s1, _) = density_score(&reading("a", 0, 1.0, 5), &cfg);
        assert!((s1 - 0.36788).abs() < 5e-6);

        let cfg = LabelingConfig::default();
        let (sv, flag) = density_score(&reading("a", 0, 0.0, 5), &cfg);
        assert_eq!(sv, 0.5);
        assert!(!flag);
    }

    #[test]
    fn zero_vehicles_falls_back_and_flags() {
        let cfg = LabelingConfig::default();
        let (score, flag) = density_score(&reading("a", 0, 2.0, 0), &cfg);
        assert!(flag);
        assert!((score - (-2.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn lag_lookup_is_exact() {
        let mut series = ScoreSeries::new();
        for h in 0..400i64 {
            series.insert(HourStamp(h), if h == 231 { 0.2 } else { 0.9 });
        }
        let lags = build_lag_features(&series);
        // First 168 hours have no weekly source.
        assert!(!lags.contains_key(&HourStamp(167)));
        assert!(lags.contains_key(&HourStamp(168)));
        let (h, w) = lags[&HourStamp(232)];
        assert_eq!(h, 0.2);
        assert_eq!(w, 0.9);
        let (h, w) = lags[&HourStamp(231 + 168)];
        assert_eq!(h, 0.9);
        assert_eq!(w, 0.2);
    }

    #[test]
    fn constant_series_constant_lags() {
        let mut series = ScoreSeries::new();
        for h in 0..200i64 {
            series.insert(HourStamp(h), 0.4);
        }
        let lags = build_lag_features(&series);
        assert_eq!(lags.len(), 200 - 168);
        assert!(lags.values().all(|&(h, w)| h == 0.4 && w == 0.4));
    }

    fn two_sensor_fixture(hours: i64) -> (Vec<SensorReading>, Vec<SensorMeta>) {
        let mut readings = Vec::new();
        for h in 0..hours {
            readings.push(reading("s_a", h, 40.0 + (h % 7) as f64, 30));
            readings.push(reading("s_b", h, 70.0 + (h % 5) as f64, 80));
        }
        let metas = vec![
            meta("s_a", "center", Continent::Europe),
            meta("s_b", "north", Continent::Asia),
        ];
        (readings, metas)
    }

    #[test]
    fn table_shape_matches_lag_filtering() {
        let (readings, metas) = two_sensor_fixture(200);
        let cfg = FeatureConfig::new(LabelingConfig::default(), true);
        let table = assemble_features(&readings, &metas, None, &cfg).unwrap();
        assert_eq!(table.n_rows(), 2 * (200 - 168));
        assert_eq!(table.n_columns(), 10);
        assert_eq!(table.column_manifest.len(), 10);
        assert_eq!(table.column_manifest[8], "density_lag_1h");

        let cfg = FeatureConfig::new(LabelingConfig::default(), false);
        let table = assemble_features(&readings, &metas, None, &cfg).unwrap();
        assert_eq!(table.n_rows(), 2 * 199);
        assert_eq!(table.n_columns(), 8);
    }

    #[test]
    fn embedding_columns_append() {
        let (readings, metas) = two_sensor_fixture(200);
        let mut by_sensor = HashMap::new();
        by_sensor.insert("s_a".to_string(), vec![0.1; 8]);
        by_sensor.insert("s_b".to_string(), vec![0.2; 8]);
        let emb = SensorEmbedding { dim: 8, by_sensor };
        let cfg = FeatureConfig::new(LabelingConfig::default(), true);
        let table = assemble_features(&readings, &metas, Some(&emb), &cfg).unwrap();
        assert_eq!(table.n_rows(), 2 * 32);
        assert_eq!(table.n_columns(), 18);
        let row = table.row(0);
        assert_eq!(&row[10..], &[0.1; 8]);
    }

    #[test]
    fn empty_readings_empty_table() {
        let (_, metas) = two_sensor_fixture(0);
        let cfg = FeatureConfig::new(LabelingConfig::default(), true);
        let table = assemble_features(&[], &metas, None, &cfg).unwrap();
        assert_eq!(table.n_rows(), 0);
        assert_eq!(table.n_columns(), 10);
    }

    #[test]
    fn missing_meta_is_error() {
        let (readings, _) = two_sensor_fixture(4);
        let metas = vec![meta("s_a", "center", Continent::Europe)];
        let cfg = FeatureConfig::new(LabelingConfig::default(), false);
        assert_eq!(
            assemble_features(&readings, &metas, None, &cfg).unwrap_err(),
            FeatureError::MissingMeta("s_b".into())
        );
    }

    #[test]
    fn missing_embedding_sensor_is_error() {
        let (readings, metas) = two_sensor_fixture(4);
        let mut by_sensor = HashMap::new();
        by_sensor.insert("s_a".to_string(), vec![0.0; 4]);
        let emb = SensorEmbedding { dim: 4, by_sensor };
        let cfg = FeatureConfig::new(LabelingConfig::default(), false);
        assert_eq!(
            assemble_features(&readings, &metas, Some(&emb), &cfg).unwrap_err(),
            FeatureError::EmbeddingSizeMismatch("s_b".into())
        );
    }

    #[test]
    fn deterministic_assembly() {
        let (readings, metas) = two_sensor_fixture(180);
        let cfg = FeatureConfig::new(LabelingConfig::default(), false);
        let a = assemble_features(&readings, &metas, None, &cfg).unwrap();
        let mut shuffled = readings.clone();
        shuffled.reverse();
        let b = assemble_features(&shuffled, &metas, None, &cfg).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.labels, b.labels);
        assert_eq!(a.keys, b.keys);
    }

    #[test]
    fn traffic_columns_come_from_previous_hour() {
        let (readings, metas) = two_sensor_fixture(200);
        let cfg = FeatureConfig::new(LabelingConfig::default(), true);
        let table = assemble_features(&readings, &metas, None, &cfg).unwrap();
        let (id, t) = table.row_key(0);
        let prev = readings
            .iter()
            .find(|r| r.sensor_id == id && r.timestamp == t.minus_hours(1))
            .unwrap();
        assert_eq!(table.row(0)[0], prev.avg_speed);
        // Label comes from the target hour itself.
        let target = readings
            .iter()
            .find(|r| r.sensor_id == id && r.timestamp == t)
            .unwrap();
        let cfg_label = LabelingConfig::default();
        let (score, _) = density_score(target, &cfg_label);
        assert_eq!(table.labels[0], label_from_score(score, &cfg_label));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn label_equals_thresholded_score(speed in 0.0f64..200.0, count in 0u64..500, tau in 0.01f64..0.99) {
            for mode in [LabelMode::SpeedOnly, LabelMode::SpeedVolume] {
                let cfg = LabelingConfig { mode, tau, speed_unit_scale: 1.0, invert_label: false };
                let r = reading("x", 0, speed, count);
                let (score, _) = density_score(&r, &cfg);
                let expected = u8::from(score >= tau);
                prop_assert_eq!(label_from_score(score, &cfg), expected);
            }
        }

        #[test]
        fn speed_only_monotone(s1 in 0.0f64..50.0, s2 in 0.0f64..50.0, tau in 0.01f64..0.99) {
            let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
            prop_assert!(congestion_label_speed(lo, tau) >= congestion_label_speed(hi, tau));
        }

        #[test]
        fn speed_volume_monotone(
            s in 0.0f64..100.0,
            delta in 0.0f64..50.0,
            v in 1u64..300,
            extra in 0u64..100,
            tau in 0.01f64..0.99,
        ) {
            // Non-decreasing in speed for fixed volume.
            prop_assert!(
                congestion_label_speed_volume(s + delta, v, tau)
                    >= congestion_label_speed_volume(s, v, tau)
            );
            // Non-increasing in volume for fixed speed.
            prop_assert!(
                congestion_label_speed_volume(s, v, tau)
                    >= congestion_label_speed_volume(s, v + extra, tau)
            );
        }
    }
}
