//! Seeded randomized mission ensembles and their summary statistics.
//!
//! Mission `k` draws its waypoints from a ChaCha8 stream seeded with
//! `rng_seed` and switched to stream number `k`, so each mission is fixed
//! by the seed and its index alone and workers can take missions in any
//! order.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::leg::LegDisplacement;
use crate::planner::{self, Baseline, BaselineOrders, Mission, OrderResult, MAX_MISSION_WAYPOINTS};
use crate::table::EnergyTable;

/// Histogram bins are `[1 + k/200, 1 + (k+1)/200)` for `k < HISTOGRAM_BINS`,
/// followed by one overflow bin.
pub const HISTOGRAM_BINS: usize = 60;

/// Which traversal direction a baseline order is charged for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionConvention {
    /// The cheaper of the two directions.
    #[default]
    Best,
    /// The canonical (lexicographically smaller) direction only.
    Forward,
}

/// File names of the three reports, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReportPaths {
    pub missions_csv: PathBuf,
    pub summary_json: PathBuf,
    pub histogram_csv: PathBuf,
}

impl Default for ReportPaths {
    fn default() -> Self {
        ReportPaths {
            missions_csv: "missions.csv".into(),
            summary_json: "summary.json".into(),
            histogram_csv: "histogram.csv".into(),
        }
    }
}

impl ReportPaths {
    pub fn resolve(&self, dir: &Path) -> ReportPaths {
        ReportPaths {
            missions_csv: dir.join(&self.missions_csv),
            summary_json: dir.join(&self.summary_json),
            histogram_csv: dir.join(&self.histogram_csv),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub n_waypoints: usize,
    /// Waypoint x and y are drawn from `[-xy_range, xy_range]`.
    pub xy_range: f64,
    pub z_range: f64,
    pub mission_count: usize,
    pub rng_seed: u64,
    #[serde(default)]
    pub direction_convention: DirectionConvention,
    #[serde(default)]
    pub table: Option<PathBuf>,
    #[serde(default)]
    pub outputs: ReportPaths,
}

impl BenchmarkConfig {
    pub fn new(n_waypoints: usize, xy_range: f64, z_range: f64, mission_count: usize, rng_seed: u64) -> Self {
        BenchmarkConfig {
            n_waypoints,
            xy_range,
            z_range,
            mission_count,
            rng_seed,
            direction_convention: DirectionConvention::Best,
            table: None,
            outputs: ReportPaths::default(),
        }
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: Self = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_waypoints == 0 || self.n_waypoints > MAX_MISSION_WAYPOINTS {
            return Err(Error::InvalidConfig(format!(
                "n_waypoints must be in 1..={MAX_MISSION_WAYPOINTS}, got {}",
                self.n_waypoints
            )));
        }
        for (name, v) in [("xy_range", self.xy_range), ("z_range", self.z_range)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.mission_count == 0 {
            return Err(Error::InvalidConfig("mission_count must be at least 1".into()));
        }
        Ok(())
    }

    /// The longest legs a mission in this box can contain.
    pub fn extreme_legs(&self) -> [LegDisplacement<f64>; 2] {
        let x = 2.0 * std::f64::consts::SQRT_2 * self.xy_range;
        let z = 2.0 * self.z_range;
        [LegDisplacement::new(x, z), LegDisplacement::new(x, -z)]
    }
}

/// Fails unless every leg between two points of the mission box lies in the
/// table's hull.
pub fn check_coverage(config: &BenchmarkConfig, table: &EnergyTable<f64>) -> Result<()> {
    let s = &table.spec;
    let mut corners = config.extreme_legs().to_vec();
    corners.push(LegDisplacement::new(0.0, 0.0));
    for leg in corners {
        if !s.contains(&leg) {
            return Err(Error::OutOfHull {
                x_f: leg.x_f,
                z_f: leg.z_f,
                x_min: s.x_min,
                x_max: s.x_max,
                z_min: s.z_min,
                z_max: s.z_max,
            });
        }
    }
    Ok(())
}

pub fn mission_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

pub fn generate_mission(config: &BenchmarkConfig, index: usize) -> Mission<f64> {
    let mut rng = mission_rng(config.rng_seed, index);
    let xy = Uniform::new_inclusive(-config.xy_range, config.xy_range);
    let z = Uniform::new_inclusive(-config.z_range, config.z_range);
    let waypoints = (0..config.n_waypoints)
        .map(|_| [xy.sample(&mut rng), xy.sample(&mut rng), z.sample(&mut rng)])
        .collect();
    Mission {
        origin: [0.0; 3],
        waypoints,
    }
}

pub fn generate_missions(config: &BenchmarkConfig) -> Vec<Mission<f64>> {
    (0..config.mission_count).map(|k| generate_mission(config, k)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionRecord {
    pub id: usize,
    pub convention: DirectionConvention,
    pub min_energy: OrderResult<f64>,
    pub baselines: BaselineOrders<f64>,
    /// The min-`D_M` order is not the min-energy order. Under
    /// [`DirectionConvention::Best`] an order and its reverse count as the same.
    pub min_d_differs: bool,
}

fn reversed(order: &[usize]) -> Vec<usize> {
    order.iter().rev().copied().collect()
}

impl MissionRecord {
    pub fn new(id: usize, convention: DirectionConvention, min_energy: OrderResult<f64>, baselines: BaselineOrders<f64>) -> Self {
        let e = &min_energy.order;
        let d = &baselines.min_d.forward.order;
        let min_d_differs = match convention {
            DirectionConvention::Best => e != d && *e != reversed(d),
            DirectionConvention::Forward => e != d,
        };
        MissionRecord {
            id,
            convention,
            min_energy,
            baselines,
            min_d_differs,
        }
    }

    /// The baseline's energy under the record's direction convention.
    pub fn charged(&self, b: Baseline) -> &OrderResult<f64> {
        let pair = self.baselines.get(b);
        match self.convention {
            DirectionConvention::Best => pair.best(),
            DirectionConvention::Forward => &pair.forward,
        }
    }

    pub fn ratio(&self, b: Baseline) -> f64 {
        self.charged(b).energy / self.min_energy.energy
    }

    pub fn increase_pct(&self, b: Baseline) -> f64 {
        100.0 * (self.charged(b).energy - self.min_energy.energy) / self.min_energy.energy
    }
}

pub fn plan_record(id: usize, mission: &Mission<f64>, table: &EnergyTable<f64>, convention: DirectionConvention) -> Result<MissionRecord> {
    let report = planner::plan_mission(mission, table)?;
    Ok(MissionRecord::new(id, convention, report.min_energy, report.baselines))
}

/// Solves every mission on `workers` threads. Records come back in mission
/// order; on failure the error of the lowest-numbered failing mission is
/// returned.
pub fn run_benchmark(config: &BenchmarkConfig, table: &EnergyTable<f64>, workers: usize) -> Result<(Vec<MissionRecord>, SummaryStats)> {
    config.validate()?;
    check_coverage(config, table)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    log::info!("running {} missions of {} waypoints on {} workers", config.mission_count, config.n_waypoints, workers.max(1));
    let results: Vec<Result<MissionRecord>> = pool.install(|| {
        (0..config.mission_count)
            .into_par_iter()
            .map(|k| plan_record(k, &generate_mission(config, k), table, config.direction_convention))
            .collect()
    });
    let records = results.into_iter().collect::<Result<Vec<_>>>()?;
    let stats = summarize(&records)?;
    Ok((records, stats))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncreaseStats {
    pub mean_pct: f64,
    pub p90_pct: f64,
    pub max_pct: f64,
}

/// Fraction of missions where `better` is strictly cheaper than `worse`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairWin {
    pub better: Baseline,
    pub worse: Baseline,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub mission_count: usize,
    pub min_x: IncreaseStats,
    pub min_z: IncreaseStats,
    pub min_d: IncreaseStats,
    pub min_d_differs_fraction: f64,
    pub pair_wins: Vec<PairWin>,
}

impl SummaryStats {
    pub fn get(&self, b: Baseline) -> &IncreaseStats {
        match b {
            Baseline::MinX => &self.min_x,
            Baseline::MinZ => &self.min_z,
            Baseline::MinD => &self.min_d,
        }
    }
}

/// Nearest-rank percentile: the smallest value with at least `p` percent of
/// the sample at or below it.
pub fn nearest_rank(values: &[f64], p: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((p / 100.0) * sorted.len() as f64).ceil() as usize;
    Some(sorted[rank.clamp(1, sorted.len()) - 1])
}

fn increase_stats(values: &[f64]) -> IncreaseStats {
    IncreaseStats {
        mean_pct: values.iter().sum::<f64>() / values.len() as f64,
        p90_pct: nearest_rank(values, 90.0).unwrap_or(0.0),
        max_pct: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

pub fn summarize(records: &[MissionRecord]) -> Result<SummaryStats> {
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let n = records.len() as f64;
    let stats = |b: Baseline| increase_stats(&records.iter().map(|r| r.increase_pct(b)).collect::<Vec<_>>());
    let mut pair_wins = Vec::new();
    for better in Baseline::ALL {
        for worse in Baseline::ALL {
            if better == worse {
                continue;
            }
            let wins = records.iter().filter(|r| r.charged(better).energy < r.charged(worse).energy).count();
            pair_wins.push(PairWin {
                better,
                worse,
                fraction: wins as f64 / n,
            });
        }
    }
    Ok(SummaryStats {
        mission_count: records.len(),
        min_x: stats(Baseline::MinX),
        min_z: stats(Baseline::MinZ),
        min_d: stats(Baseline::MinD),
        min_d_differs_fraction: records.iter().filter(|r| r.min_d_differs).count() as f64 / n,
        pair_wins,
    })
}

pub fn histogram_edge(k: usize) -> f64 {
    (200 + k) as f64 / 200.0
}

/// Bin index of an energy ratio; `HISTOGRAM_BINS` is the overflow bin.
/// Ratios below 1 land in the first bin.
pub fn histogram_bin(ratio: f64) -> usize {
    (1..=HISTOGRAM_BINS).take_while(|&k| ratio >= histogram_edge(k)).count()
}

/// Counts per bin, one array per baseline in [`Baseline::ALL`] order.
pub fn histogram(records: &[MissionRecord]) -> [[usize; HISTOGRAM_BINS + 1]; 3] {
    let mut counts = [[0; HISTOGRAM_BINS + 1]; 3];
    for r in records {
        for (slot, b) in Baseline::ALL.into_iter().enumerate() {
            counts[slot][histogram_bin(r.ratio(b))] += 1;
        }
    }
    counts
}

fn order_string(order: &[usize]) -> String {
    order.iter().map(|k| k.to_string()).collect::<Vec<_>>().join("-")
}

/// Per-mission CSV header. Orders are waypoint indices joined by `-`;
/// energies are in J and distances in m.
pub fn missions_csv_header() -> Vec<String> {
    let mut h: Vec<String> = ["id", "min_e_order", "min_e_energy", "min_e_d_m", "min_e_x_m", "min_e_z_m"]
        .map(String::from)
        .to_vec();
    for b in Baseline::ALL {
        let n = b.name();
        for col in ["order", "energy_forward", "energy_reverse", "energy_charged", "increase_pct", "d_m", "x_m", "z_m"] {
            h.push(format!("{n}_{col}"));
        }
    }
    h.push("min_d_differs".into());
    h
}

pub fn write_missions_csv<W: Write>(records: &[MissionRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(missions_csv_header())?;
    for r in records {
        let e = &r.min_energy;
        let mut row = vec![
            r.id.to_string(),
            order_string(&e.order),
            e.energy.to_string(),
            e.d_m.to_string(),
            e.x_m.to_string(),
            e.z_m.to_string(),
        ];
        for b in Baseline::ALL {
            let pair = r.baselines.get(b);
            row.extend([
                order_string(&pair.forward.order),
                pair.forward.energy.to_string(),
                pair.reverse.energy.to_string(),
                r.charged(b).energy.to_string(),
                r.increase_pct(b).to_string(),
                pair.forward.d_m.to_string(),
                pair.forward.x_m.to_string(),
                pair.forward.z_m.to_string(),
            ]);
        }
        row.push(r.min_d_differs.to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))
}

pub fn write_histogram_csv<W: Write>(records: &[MissionRecord], out: W) -> Result<()> {
    let counts = histogram(records);
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["bin_lo".to_string(), "bin_hi".to_string()];
    header.extend(Baseline::ALL.iter().map(|b| b.name().to_string()));
    w.write_record(&header)?;
    for k in 0..=HISTOGRAM_BINS {
        let hi = if k == HISTOGRAM_BINS { "inf".to_string() } else { histogram_edge(k + 1).to_string() };
        let mut row = vec![histogram_edge(k).to_string(), hi];
        row.extend(counts.iter().map(|c| c[k].to_string()));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Writes the per-mission CSV, summary JSON and histogram CSV.
pub fn emit_reports(records: &[MissionRecord], stats: &SummaryStats, paths: &ReportPaths) -> Result<()> {
    write_missions_csv(records, create(&paths.missions_csv)?)?;
    write_histogram_csv(records, create(&paths.histogram_csv)?)?;
    let mut f = create(&paths.summary_json)?;
    serde_json::to_writer_pretty(&mut f, stats).map_err(|e| Error::json(&paths.summary_json, e))?;
    f.write_all(b"\n").and_then(|_| f.flush()).map_err(|e| Error::io(&paths.summary_json, e))
}
