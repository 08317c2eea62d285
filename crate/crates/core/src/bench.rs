//! Benchmark harness: trains and evaluates machines across a clause grid
//! with one or both backends, timing whole epochs with a monotonic clock.
//!
//! Both backends of a cell share the machine seed and the per-epoch
//! example order, so their models follow the same trajectory and only the
//! evaluation strategy differs. Dataset loading and unpacking happen
//! before any timer starts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::automaton::DEFAULT_HALF_RANGE;
use crate::bank::TmConfig;
use crate::data::{BoolDataset, Provenance};
use crate::error::{Error, Result};
use crate::machine::{Backend, Machine, GENERATOR};

/// Specificity used when none is given.
pub const DEFAULT_SPECIFICITY: f64 = 3.9;

/// Threshold used for synthetic workloads when none is given.
pub const SYNTHETIC_THRESHOLD: u32 = 15;

// Mixed into the experiment seed to derive the example-order stream.
const ORDER_STREAM: u64 = 0x5eed_0f0d_e5a1_17e5;

/// One feature variant: a train/test split of the same dataset.
#[derive(Debug, Clone)]
pub struct Workload {
    pub id: String,
    pub train: BoolDataset,
    pub test: BoolDataset,
}

impl Workload {
    pub fn new(id: impl Into<String>, train: BoolDataset, test: BoolDataset) -> Result<Self> {
        if train.features() != test.features() || train.classes() != test.classes() {
            return Err(Error::Dimension(format!(
                "train split is {}x{} classes, test split is {}x{} classes",
                train.features(),
                train.classes(),
                test.features(),
                test.classes()
            )));
        }
        Ok(Self {
            id: id.into(),
            train,
            test,
        })
    }

    pub fn features(&self) -> usize {
        self.train.features()
    }

    fn is_synthetic(&self) -> bool {
        matches!(self.train.provenance(), Provenance::Synthetic { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub clauses: Vec<usize>,
    pub epochs: usize,
    pub repetitions: usize,
    pub backends: Vec<Backend>,
    /// `None` selects 15 for synthetic data and `n/25` otherwise.
    pub threshold: Option<u32>,
    pub specificity: f64,
    pub half_range: u8,
    pub seed: u64,
}

impl Default for Experiment {
    fn default() -> Self {
        Self {
            clauses: vec![1000, 2000, 5000, 10000, 20000],
            epochs: 1,
            repetitions: 1,
            backends: vec![Backend::Direct, Backend::Indexed],
            threshold: None,
            specificity: DEFAULT_SPECIFICITY,
            half_range: DEFAULT_HALF_RANGE,
            seed: 1,
        }
    }
}

impl Experiment {
    pub fn validate(&self) -> Result<()> {
        if self.clauses.is_empty() {
            return Err(Error::Config("clause grid is empty".into()));
        }
        if let Some(&bad) = self.clauses.iter().find(|&&n| n == 0 || n % 2 != 0) {
            return Err(Error::Config(format!(
                "clause counts must be positive and even, got {bad}"
            )));
        }
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if self.backends.is_empty() {
            return Err(Error::Config("no backend selected".into()));
        }
        Ok(())
    }

    /// Machine configuration for one cell.
    pub fn config_for(&self, workload: &Workload, clauses: usize, rep: usize) -> TmConfig {
        let threshold = self.threshold.unwrap_or(if workload.is_synthetic() {
            SYNTHETIC_THRESHOLD
        } else {
            (clauses as u32 / 25).max(1)
        });
        TmConfig {
            classes: workload.train.classes(),
            clauses,
            features: workload.features(),
            half_range: self.half_range,
            threshold,
            specificity: self.specificity,
            seed: self.seed.wrapping_add(rep as u64),
            boost_true_positive: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Train,
    Test,
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub dataset: String,
    pub features: usize,
    pub clauses: usize,
    pub backend: String,
    pub phase: Phase,
    pub epoch_s_mean: f64,
    pub epoch_s_std: f64,
    /// Mean work per epoch.
    pub literal_visits: u64,
    /// Direct mean over indexed mean, when both backends ran.
    pub speedup: Option<f64>,
}

pub const CSV_COLUMNS: [&str; 9] = [
    "dataset",
    "features",
    "clauses",
    "backend",
    "phase",
    "epoch_s_mean",
    "epoch_s_std",
    "literal_visits",
    "speedup",
];

/// Test accuracy after each epoch of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyCurve {
    pub dataset: String,
    pub clauses: usize,
    pub backend: Backend,
    pub repetition: usize,
    pub accuracy: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metadata {
    pub seed: u64,
    pub host: String,
    pub generator: String,
    pub parallel_cells: bool,
}

impl Metadata {
    pub fn collect(seed: u64) -> Self {
        Self {
            seed,
            host: host_descriptor(),
            generator: GENERATOR.to_owned(),
            parallel_cells: false,
        }
    }

    /// `key=value` lines.
    pub fn to_text(&self) -> String {
        format!(
            "seed={}\nhost={}\ngenerator={}\nparallel_cells={}\n",
            self.seed, self.host, self.generator, self.parallel_cells
        )
    }
}

fn host_descriptor() -> String {
    let name = std::fs::read_to_string("/etc/hostname")
        .map(|s| s.trim().to_owned())
        .ok()
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".into());
    let cores = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    format!(
        "{name} ({}-{}, {cores} cores)",
        std::env::consts::OS,
        std::env::consts::ARCH
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub records: Vec<BenchRecord>,
    pub curves: Vec<AccuracyCurve>,
    pub metadata: Metadata,
}

impl BenchReport {
    pub fn empty(seed: u64) -> Self {
        Self {
            records: Vec::new(),
            curves: Vec::new(),
            metadata: Metadata::collect(seed),
        }
    }

    pub fn record(
        &self,
        dataset: &str,
        clauses: usize,
        backend: Backend,
        phase: Phase,
    ) -> Option<&BenchRecord> {
        self.records.iter().find(|r| {
            r.dataset == dataset
                && r.clauses == clauses
                && r.backend == backend.name()
                && r.phase == phase
        })
    }

    /// Fills `speedup` on every row whose cell ran with both backends.
    fn compute_speedups(&mut self) {
        let mut means: BTreeMap<(String, usize, usize, Phase), [Option<f64>; 2]> = BTreeMap::new();
        for r in &self.records {
            let slot = means
                .entry((r.dataset.clone(), r.features, r.clauses, r.phase))
                .or_default();
            match r.backend.parse::<Backend>() {
                Ok(Backend::Direct) => slot[0] = Some(r.epoch_s_mean),
                Ok(Backend::Indexed) => slot[1] = Some(r.epoch_s_mean),
                Err(_) => {}
            }
        }
        for r in &mut self.records {
            let key = (r.dataset.clone(), r.features, r.clauses, r.phase);
            r.speedup = match means.get(&key) {
                Some([Some(d), Some(i)]) if *i > 0.0 => Some(d / i),
                _ => None,
            };
        }
    }
}

fn mean_std(samples: &[f64]) -> (f64, f64) {
    if samples.is_empty() {
        return (0.0, 0.0);
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

struct Dense {
    rows: Vec<u8>,
    labels: Vec<usize>,
    width: usize,
}

impl Dense {
    fn new(ds: &BoolDataset) -> Self {
        Self {
            rows: ds.to_dense(),
            labels: ds.labels().collect(),
            width: ds.features(),
        }
    }

    fn row(&self, i: usize) -> &[u8] {
        &self.rows[i * self.width..(i + 1) * self.width]
    }
}

#[derive(Default)]
struct PhaseSamples {
    seconds: Vec<f64>,
    visits: Vec<u64>,
}

impl PhaseSamples {
    fn push(&mut self, seconds: f64, visits: u64) {
        self.seconds.push(seconds);
        self.visits.push(visits);
    }

    fn into_record(
        self,
        w: &Workload,
        clauses: usize,
        backend: Backend,
        phase: Phase,
    ) -> Option<BenchRecord> {
        if self.seconds.is_empty() {
            return None;
        }
        let (mean, std) = mean_std(&self.seconds);
        let visits = self.visits.iter().sum::<u64>() / self.visits.len() as u64;
        Some(BenchRecord {
            dataset: w.id.clone(),
            features: w.features(),
            clauses,
            backend: backend.name().to_owned(),
            phase,
            epoch_s_mean: mean,
            epoch_s_std: std,
            literal_visits: visits,
            speedup: None,
        })
    }
}

fn evaluate(machine: &mut Machine, test: &Dense) -> Result<f64> {
    let mut correct = 0usize;
    for (i, &y) in test.labels.iter().enumerate() {
        if machine.predict(test.row(i))? == y {
            correct += 1;
        }
    }
    Ok(if test.labels.is_empty() {
        0.0
    } else {
        correct as f64 / test.labels.len() as f64
    })
}

/// Runs every (workload, clause count, backend, repetition) cell in turn.
///
/// Each epoch trains on a shuffled pass over the training split and then
/// scores the full test split. With `epochs == 0` only one inference pass
/// per repetition is timed.
pub fn run_experiment(exp: &Experiment, workloads: &[Workload]) -> Result<BenchReport> {
    exp.validate()?;
    let mut report = BenchReport::empty(exp.seed);
    for w in workloads {
        let train = Dense::new(&w.train);
        let test = Dense::new(&w.test);
        for &clauses in &exp.clauses {
            for &backend in &exp.backends {
                let mut train_samples = PhaseSamples::default();
                let mut test_samples = PhaseSamples::default();
                for rep in 0..exp.repetitions {
                    let config = exp.config_for(w, clauses, rep);
                    let mut order_rng = ChaCha8Rng::seed_from_u64(config.seed ^ ORDER_STREAM);
                    let mut machine = Machine::new(config, backend)?;
                    let mut order: Vec<usize> = (0..train.labels.len()).collect();
                    let mut accuracy = Vec::with_capacity(exp.epochs);

                    if exp.epochs == 0 {
                        machine.reset_counters();
                        let start = Instant::now();
                        evaluate(&mut machine, &test)?;
                        test_samples.push(
                            start.elapsed().as_secs_f64(),
                            machine.counters().literal_visits,
                        );
                    }
                    for _ in 0..exp.epochs {
                        order.shuffle(&mut order_rng);
                        machine.reset_counters();
                        let start = Instant::now();
                        for &i in &order {
                            machine.train_step(train.row(i), train.labels[i])?;
                        }
                        train_samples.push(
                            start.elapsed().as_secs_f64(),
                            machine.counters().literal_visits,
                        );

                        machine.reset_counters();
                        let start = Instant::now();
                        let acc = evaluate(&mut machine, &test)?;
                        test_samples.push(
                            start.elapsed().as_secs_f64(),
                            machine.counters().literal_visits,
                        );
                        accuracy.push(acc);
                    }
                    report.curves.push(AccuracyCurve {
                        dataset: w.id.clone(),
                        clauses,
                        backend,
                        repetition: rep,
                        accuracy,
                    });
                }
                report
                    .records
                    .extend(train_samples.into_record(w, clauses, backend, Phase::Train));
                report
                    .records
                    .extend(test_samples.into_record(w, clauses, backend, Phase::Test));
            }
        }
    }
    report.compute_speedups();
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(Error::Config(format!("unknown report format {other:?}"))),
        }
    }
}

pub fn write_csv<W: Write>(records: &[BenchRecord], w: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(CSV_COLUMNS)?;
    for r in records {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(r: R) -> Result<Vec<BenchRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != CSV_COLUMNS {
        return Err(Error::Format(format!("unexpected CSV header {header:?}")));
    }
    let mut records = Vec::new();
    for row in rdr.deserialize() {
        records.push(row?);
    }
    Ok(records)
}

fn fmt_cell(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into())
}

/// Table with one row per clause count and a Train/Test column pair per
/// feature variant. Cells hold the speedup when both backends ran, else
/// the mean epoch time in seconds of the single backend.
pub fn render_markdown(report: &BenchReport) -> String {
    let mut variants: Vec<(String, usize)> = Vec::new();
    let mut clause_rows: Vec<usize> = Vec::new();
    for r in &report.records {
        let v = (r.dataset.clone(), r.features);
        if !variants.contains(&v) {
            variants.push(v);
        }
        if !clause_rows.contains(&r.clauses) {
            clause_rows.push(r.clauses);
        }
    }
    clause_rows.sort_unstable();
    let with_speedup = report.records.iter().any(|r| r.speedup.is_some());

    let value = |dataset: &str, features: usize, clauses: usize, phase: Phase| -> Option<f64> {
        let mut rows = report.records.iter().filter(|r| {
            r.dataset == dataset
                && r.features == features
                && r.clauses == clauses
                && r.phase == phase
        });
        if with_speedup {
            rows.find_map(|r| r.speedup)
        } else {
            rows.next().map(|r| r.epoch_s_mean)
        }
    };

    let mut md = String::new();
    let what = if with_speedup {
        "Indexing speedup (direct / indexed mean epoch time)"
    } else {
        "Mean epoch time [s]"
    };
    let _ = writeln!(md, "{what}\n");
    md.push_str("| Features |");
    for (_, f) in &variants {
        let _ = write!(md, " {f} | |");
    }
    md.push_str("\n|---|");
    for _ in &variants {
        md.push_str("---|---|");
    }
    md.push_str("\n| Clauses |");
    for _ in &variants {
        md.push_str(" Train | Test |");
    }
    md.push('\n');
    for &n in &clause_rows {
        let _ = write!(md, "| {n} |");
        for (d, f) in &variants {
            let _ = write!(
                md,
                " {} | {} |",
                fmt_cell(value(d, *f, n, Phase::Train)),
                fmt_cell(value(d, *f, n, Phase::Test))
            );
        }
        md.push('\n');
    }
    let datasets: Vec<&str> = variants.iter().map(|(d, _)| d.as_str()).collect();
    let _ = writeln!(md, "\nDatasets: {}", datasets.join(", "));
    for line in report.metadata.to_text().lines() {
        let _ = writeln!(md, "- {line}");
    }
    md
}

pub fn emit_report<W: Write>(report: &BenchReport, format: ReportFormat, mut w: W) -> Result<()> {
    match format {
        ReportFormat::Csv => write_csv(&report.records, w),
        ReportFormat::Markdown => {
            w.write_all(render_markdown(report).as_bytes())?;
            w.flush()?;
            Ok(())
        }
    }
}

/// Spearman rank correlation (average ranks for ties).
pub fn rank_correlation(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut out = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let r = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                out[k] = r;
            }
            i = j + 1;
        }
        out
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let (mx, _) = mean_std(&rx);
    let (my, _) = mean_std(&ry);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some(cov / (vx * vy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synthetic::noisy_xor;

    fn record(
        dataset: &str,
        features: usize,
        clauses: usize,
        backend: Backend,
        phase: Phase,
        mean: f64,
    ) -> BenchRecord {
        BenchRecord {
            dataset: dataset.into(),
            features,
            clauses,
            backend: backend.name().into(),
            phase,
            epoch_s_mean: mean,
            epoch_s_std: 0.0,
            literal_visits: 10,
            speedup: None,
        }
    }

    #[test]
    fn empty_report_is_header_only_csv() {
        let mut buf = Vec::new();
        emit_report(&BenchReport::empty(1), ReportFormat::Csv, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "dataset,features,clauses,backend,phase,epoch_s_mean,epoch_s_std,literal_visits,speedup\n"
        );
    }

    #[test]
    fn speedups_pair_backends_per_cell() {
        let mut report = BenchReport::empty(1);
        report.records = vec![
            record("m", 784, 1000, Backend::Direct, Phase::Test, 6.0),
            record("m", 784, 1000, Backend::Indexed, Phase::Test, 2.0),
            record("m", 784, 2000, Backend::Direct, Phase::Test, 6.0),
        ];
        report.compute_speedups();
        assert_eq!(report.records[0].speedup, Some(3.0));
        assert_eq!(report.records[1].speedup, Some(3.0));
        assert_eq!(report.records[2].speedup, None);
    }

    #[test]
    fn markdown_mirrors_speedup_table_layout() {
        let mut report = BenchReport::empty(1);
        for (f, name) in [(784, "M1"), (1568, "M2"), (2352, "M3"), (3136, "M4")] {
            for n in [1000, 2000, 5000, 10000, 20000] {
                for phase in [Phase::Train, Phase::Test] {
                    report
                        .records
                        .push(record(name, f, n, Backend::Direct, phase, 4.0));
                    report
                        .records
                        .push(record(name, f, n, Backend::Indexed, phase, 2.0));
                }
            }
        }
        report.compute_speedups();
        let md = render_markdown(&report);
        let rows: Vec<&str> = md.lines().filter(|l| l.starts_with("| ")).collect();
        // header rows + 5 clause rows
        assert_eq!(rows.len(), 7);
        assert!(rows[0].contains("784") && rows[0].contains("3136"));
        assert_eq!(rows[1].matches("Train").count(), 4);
        for row in &rows[2..] {
            assert_eq!(row.matches("2.00").count(), 8, "{row}");
        }
        assert!(rows[2].starts_with("| 1000 |"));
        assert!(rows[6].starts_with("| 20000 |"));
    }

    #[test]
    fn zero_epochs_times_inference_only() {
        let ds = noisy_xor(100, 6, 0.0, 3).unwrap();
        let w = Workload::new("xor", ds.clone(), ds).unwrap();
        let exp = Experiment {
            clauses: vec![10],
            epochs: 0,
            ..Experiment::default()
        };
        let report = run_experiment(&exp, &[w]).unwrap();
        assert_eq!(report.records.len(), 2);
        assert!(report.records.iter().all(|r| r.phase == Phase::Test));
        assert!(report.curves.iter().all(|c| c.accuracy.is_empty()));
    }

    #[test]
    fn experiment_validation() {
        let mut e = Experiment::default();
        assert!(e.validate().is_ok());
        e.clauses = vec![1000, 3];
        assert!(e.validate().is_err());
        e = Experiment {
            repetitions: 0,
            ..Experiment::default()
        };
        assert!(e.validate().is_err());
    }

    #[test]
    fn threshold_heuristic() {
        let xor = noisy_xor(10, 4, 0.0, 1).unwrap();
        let w = Workload::new("xor", xor.clone(), xor).unwrap();
        let e = Experiment::default();
        assert_eq!(e.config_for(&w, 1000, 0).threshold, 15);
        let img = BoolDataset::new(
            4,
            2,
            Provenance::Images {
                source: "s".into(),
                thresholds: vec![128],
            },
        )
        .unwrap();
        let w = Workload::new("img", img.clone(), img).unwrap();
        assert_eq!(e.config_for(&w, 10000, 0).threshold, 400);
        assert_eq!(e.config_for(&w, 10, 0).threshold, 1);
    }

    #[test]
    fn rank_correlation_basics() {
        assert_eq!(
            rank_correlation(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]),
            Some(1.0)
        );
        assert_eq!(
            rank_correlation(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]),
            Some(-1.0)
        );
        assert_eq!(rank_correlation(&[1.0], &[1.0]), None);
    }
}
