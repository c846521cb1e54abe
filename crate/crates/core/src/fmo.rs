//! Spin-distribution sweeps over the FMO network.
//!
//! Site indices are 0-based in this API. The record file stores 1-based site
//! labels, matching the usual FMO numbering (site 3 is the target).

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::sig12;
use crate::linalg::HermitianMatrix;
use crate::network::NetworkSpec;
use crate::spin_bath::{BathSpec, Temperature};
use crate::transport::{ThermalEnsemble, TimeWindow, WindowMax};
use crate::units::alpha_over_kbt;

pub const FMO_SITES: usize = 7;
pub const DEFAULT_TOTAL_SPINS: u32 = 10;
pub const DEFAULT_ALPHA: f64 = 150.0;
pub const DEFAULT_TEMPERATURE_K: f64 = 300.0;
pub const DEFAULT_WINDOW_PS: f64 = 1.0;
/// Upper end and step of the default coupling grid, rad/ps.
pub const DEFAULT_GAMMA_MAX: f64 = 200.0;
pub const DEFAULT_GAMMA_STEP: f64 = 2.0;

/// Number of bath spins on each site.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpinDistribution(Vec<u32>);

impl SpinDistribution {
    pub fn new(counts: Vec<u32>) -> Result<Self> {
        if let Some(&odd) = counts.iter().find(|&&n| n % 2 == 1) {
            return Err(Error::OddSpinTotal(odd));
        }
        Ok(SpinDistribution(counts))
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn sites(&self) -> usize {
        self.0.len()
    }

    pub fn baths(&self, alpha: f64, gamma: f64) -> Vec<BathSpec> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &n)| n > 0)
            .map(|(site, &n)| BathSpec::new(site, n, alpha, gamma))
            .collect()
    }
}

impl fmt::Display for SpinDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|n| n.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Every way to place `total` spins on `sites` sites in even numbers,
/// in descending lexicographic order: (2,0) comes before (0,2).
pub fn enumerate_even_distributions(total: u32, sites: usize) -> Result<Vec<SpinDistribution>> {
    if total % 2 == 1 {
        return Err(Error::OddSpinTotal(total));
    }
    if sites == 0 {
        return Err(Error::invalid("need at least one site"));
    }
    let mut out = Vec::new();
    let mut current = vec![0u32; sites];
    fill(total / 2, 0, &mut current, &mut out);
    Ok(out)
}

fn fill(pairs: u32, pos: usize, current: &mut Vec<u32>, out: &mut Vec<SpinDistribution>) {
    if pos + 1 == current.len() {
        current[pos] = 2 * pairs;
        out.push(SpinDistribution(current.clone()));
        return;
    }
    for here in (0..=pairs).rev() {
        current[pos] = 2 * here;
        fill(pairs - here, pos + 1, current, out);
    }
}

/// `0, step, 2·step, …` up to and including `max`.
pub fn gamma_grid(max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && max >= 0.0 && max.is_finite()) {
        return Err(Error::invalid(format!("bad γ grid: max {max}, step {step}")));
    }
    let count = (max / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| k as f64 * step).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub initial: usize,
    pub target: usize,
    pub total_spins: u32,
    /// Coupling grid in rad/ps, applied equally to every bath.
    pub gammas: Vec<f64>,
    pub alpha: f64,
    pub temperature_k: f64,
    pub window: TimeWindow,
}

impl SweepConfig {
    /// Defaults for transfer from `initial` to `target` (0-based).
    pub fn new(initial: usize, target: usize) -> Self {
        SweepConfig {
            initial,
            target,
            total_spins: DEFAULT_TOTAL_SPINS,
            gammas: gamma_grid(DEFAULT_GAMMA_MAX, DEFAULT_GAMMA_STEP).expect("default grid"),
            alpha: DEFAULT_ALPHA,
            temperature_k: DEFAULT_TEMPERATURE_K,
            window: TimeWindow::new(DEFAULT_WINDOW_PS),
        }
    }

    fn validate(&self) -> Result<()> {
        for site in [self.initial, self.target] {
            if site >= FMO_SITES {
                return Err(Error::SiteOutOfRange { site, dim: FMO_SITES });
            }
        }
        if self.initial == self.target {
            return Err(Error::SameSite(self.initial));
        }
        if self.gammas.is_empty() {
            return Err(Error::invalid("γ grid is empty"));
        }
        if self.gammas.iter().any(|g| !g.is_finite()) {
            return Err(Error::invalid("γ grid contains a non-finite value"));
        }
        Temperature::kelvin(self.temperature_k)?;
        self.window.validate()
    }
}

/// One (distribution, γ) maximization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub distribution: SpinDistribution,
    /// rad/ps
    pub gamma: f64,
    pub max_probability: f64,
    pub argmax_time_ps: f64,
    /// 1-based site label
    pub initial_site: usize,
    /// 1-based site label
    pub final_site: usize,
    #[serde(rename = "temperature_K")]
    pub temperature_k: f64,
    /// rad/ps
    pub alpha: f64,
}

impl SweepRecord {
    pub fn key(&self) -> RecordKey {
        RecordKey::new(&self.distribution, self.gamma)
    }

    /// Copy with every float rounded to 12 significant digits.
    fn rounded(&self) -> SweepRecord {
        SweepRecord {
            gamma: round12(self.gamma),
            max_probability: round12(self.max_probability),
            argmax_time_ps: round12(self.argmax_time_ps),
            temperature_k: round12(self.temperature_k),
            alpha: round12(self.alpha),
            ..self.clone()
        }
    }
}

fn round12(x: f64) -> f64 {
    sig12(x).parse().unwrap_or(x)
}

/// Identity of a record: the distribution and γ at 12 significant digits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RecordKey {
    pub distribution: SpinDistribution,
    pub gamma: String,
}

impl RecordKey {
    pub fn new(distribution: &SpinDistribution, gamma: f64) -> Self {
        RecordKey {
            distribution: distribution.clone(),
            gamma: sig12(gamma),
        }
    }
}

impl fmt::Display for RecordKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} γ={}", self.distribution, self.gamma)
    }
}

fn fmo_radps() -> HermitianMatrix {
    NetworkSpec::fmo().hamiltonian()
}

/// Window maximum for one distribution at one γ.
pub fn evaluate(config: &SweepConfig, distribution: &SpinDistribution, gamma: f64) -> Result<WindowMax> {
    evaluate_on(&fmo_radps(), config, distribution, gamma)
}

fn evaluate_on(
    h: &HermitianMatrix,
    config: &SweepConfig,
    distribution: &SpinDistribution,
    gamma: f64,
) -> Result<WindowMax> {
    let baths = distribution.baths(config.alpha, gamma);
    let ensemble = ThermalEnsemble::new(h, &baths, Temperature::kelvin(config.temperature_k)?)?;
    ensemble.max_transfer(config.initial, config.target, &config.window)
}

fn make_record(config: &SweepConfig, distribution: &SpinDistribution, gamma: f64, best: WindowMax) -> SweepRecord {
    SweepRecord {
        distribution: distribution.clone(),
        gamma,
        max_probability: best.probability,
        argmax_time_ps: best.time,
        initial_site: config.initial + 1,
        final_site: config.target + 1,
        temperature_k: config.temperature_k,
        alpha: config.alpha,
    }
}

fn evaluate_keys(h: &HermitianMatrix, config: &SweepConfig, keys: &[(SpinDistribution, f64)]) -> Result<Vec<SweepRecord>> {
    keys.par_iter()
        .map(|(d, g)| evaluate_on(h, config, d, *g).map(|best| make_record(config, d, *g, best)))
        .collect()
}

/// Bare-network maximum for the configured pair and window.
pub fn bare_maximum(config: &SweepConfig) -> Result<WindowMax> {
    ThermalEnsemble::bare(&fmo_radps()).max_transfer(config.initial, config.target, &config.window)
}

/// All (distribution, γ) pairs in record order: distributions outermost.
pub fn sweep_keys(config: &SweepConfig) -> Result<Vec<(SpinDistribution, f64)>> {
    let dists = enumerate_even_distributions(config.total_spins, FMO_SITES)?;
    Ok(dists
        .into_iter()
        .flat_map(|d| config.gammas.iter().map(move |&g| (d.clone(), g)))
        .collect())
}

/// In-memory sweep, parallel over the current rayon pool. Records come back
/// in key order and are not rounded.
pub fn sweep(config: &SweepConfig) -> Result<Vec<SweepRecord>> {
    config.validate()?;
    let keys = sweep_keys(config)?;
    evaluate_keys(&fmo_radps(), config, &keys)
}

/// Append-only line-delimited record file.
#[derive(Debug, Clone)]
pub struct RecordStore {
    path: PathBuf,
}

impl RecordStore {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        RecordStore { path: path.into() }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn persistence(&self, key: impl fmt::Display, message: impl fmt::Display) -> Error {
        Error::Persistence {
            path: self.path.display().to_string(),
            key: key.to_string(),
            message: message.to_string(),
        }
    }

    /// Reads every complete record. A torn last line without a newline
    /// (an interrupted write) is cut off; any other bad line is an error.
    pub fn load(&self) -> Result<Vec<SweepRecord>> {
        let file = match File::open(&self.path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(Error::io(&self.path, e)),
        };
        let mut reader = BufReader::new(file);
        let mut records = Vec::new();
        let mut good_len = 0u64;
        let mut line = String::new();
        let mut lineno = 0usize;
        loop {
            line.clear();
            let read = reader.read_line(&mut line).map_err(|e| Error::io(&self.path, e))?;
            if read == 0 {
                break;
            }
            lineno += 1;
            if !line.ends_with('\n') {
                self.truncate(good_len)?;
                break;
            }
            let record = serde_json::from_str::<SweepRecord>(line.trim_end())
                .map_err(|e| self.persistence(format!("line {lineno}"), e))?;
            good_len += read as u64;
            records.push(record);
        }
        Ok(records)
    }

    fn truncate(&self, len: u64) -> Result<()> {
        let f = OpenOptions::new()
            .write(true)
            .open(&self.path)
            .map_err(|e| Error::io(&self.path, e))?;
        f.set_len(len).map_err(|e| Error::io(&self.path, e))
    }

    fn append(&self, records: &[SweepRecord]) -> Result<()> {
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(|e| match records.first() {
                Some(r) => self.persistence(r.key(), e),
                None => Error::io(&self.path, e),
            })?;
        f.seek(SeekFrom::End(0)).map_err(|e| Error::io(&self.path, e))?;
        let mut buf = String::new();
        for r in records {
            let line = serde_json::to_string(&r.rounded()).map_err(|e| self.persistence(r.key(), e))?;
            buf.push_str(&line);
            buf.push('\n');
        }
        f.write_all(buf.as_bytes())
            .and_then(|_| f.flush())
            .map_err(|e| self.persistence(records[0].key(), e))
    }
}

/// Records per write when sweeping into a store.
pub const CHUNK_RECORDS: usize = 512;

/// Sweep backed by a record store. Keys already present are skipped; new
/// records are appended in key order, so an interrupted run resumed to the
/// end yields the same file as an uninterrupted one. Returns every record of
/// the sweep in key order, as read back (rounded).
pub fn sweep_to_store(
    config: &SweepConfig,
    store: &RecordStore,
    mut progress: impl FnMut(usize, usize),
) -> Result<Vec<SweepRecord>> {
    config.validate()?;
    let existing = store.load()?;
    let initial_label = config.initial + 1;
    let final_label = config.target + 1;
    for r in &existing {
        let same = r.initial_site == initial_label
            && r.final_site == final_label
            && r.temperature_k == round12(config.temperature_k)
            && r.alpha == round12(config.alpha);
        if !same {
            return Err(store.persistence(
                r.key(),
                "existing record was produced with a different site pair, temperature or α",
            ));
        }
    }
    let done: HashSet<RecordKey> = existing.iter().map(|r| r.key()).collect();
    let keys = sweep_keys(config)?;
    let pending: Vec<(SpinDistribution, f64)> = keys
        .iter()
        .filter(|(d, g)| !done.contains(&RecordKey::new(d, *g)))
        .cloned()
        .collect();

    let h = fmo_radps();
    let total = keys.len();
    let mut finished = total - pending.len();
    progress(finished, total);
    for chunk in pending.chunks(CHUNK_RECORDS) {
        let records = evaluate_keys(&h, config, chunk)?;
        store.append(&records)?;
        finished += records.len();
        progress(finished, total);
    }

    let mut by_key: BTreeMap<RecordKey, SweepRecord> = BTreeMap::new();
    for r in store.load()? {
        by_key.insert(r.key(), r);
    }
    keys.iter()
        .map(|(d, g)| {
            let key = RecordKey::new(d, *g);
            by_key
                .remove(&key)
                .ok_or_else(|| store.persistence(&key, "record missing after sweep"))
        })
        .collect()
}

/// Best γ of one distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionSummary {
    pub distribution: SpinDistribution,
    pub best_gamma: f64,
    pub max_probability: f64,
    pub argmax_time_ps: f64,
}

/// Per-distribution maximum over γ, in first-appearance order. The smallest
/// γ wins ties.
pub fn summarize(records: &[SweepRecord]) -> Vec<DistributionSummary> {
    let mut order: Vec<SpinDistribution> = Vec::new();
    let mut best: BTreeMap<SpinDistribution, DistributionSummary> = BTreeMap::new();
    for r in records {
        match best.get_mut(&r.distribution) {
            None => {
                order.push(r.distribution.clone());
                best.insert(
                    r.distribution.clone(),
                    DistributionSummary {
                        distribution: r.distribution.clone(),
                        best_gamma: r.gamma,
                        max_probability: r.max_probability,
                        argmax_time_ps: r.argmax_time_ps,
                    },
                );
            }
            Some(s) => {
                let better = r.max_probability > s.max_probability
                    || (r.max_probability == s.max_probability && r.gamma < s.best_gamma);
                if better {
                    s.best_gamma = r.gamma;
                    s.max_probability = r.max_probability;
                    s.argmax_time_ps = r.argmax_time_ps;
                }
            }
        }
    }
    order.into_iter().map(|d| best.remove(&d).expect("present")).collect()
}

/// Summaries sorted by decreasing maximum (stable for ties).
pub fn ranking(records: &[SweepRecord]) -> Vec<DistributionSummary> {
    let mut s = summarize(records);
    s.sort_by(|a, b| b.max_probability.total_cmp(&a.max_probability));
    s
}

pub fn summary_csv(summaries: &[DistributionSummary]) -> String {
    let mut out = String::from("n1,n2,n3,n4,n5,n6,n7,best_gamma_radps,max_probability,argmax_time_ps\n");
    for s in summaries {
        let counts: Vec<String> = s.distribution.counts().iter().map(|n| n.to_string()).collect();
        out.push_str(&format!(
            "{},{},{},{}\n",
            counts.join(","),
            sig12(s.best_gamma),
            sig12(s.max_probability),
            sig12(s.argmax_time_ps)
        ));
    }
    out
}

/// Distributions with two spins on site 1 and none on site 3, the subset
/// whose initial and final energies are pulled towards each other.
pub fn pulls_sites_together(d: &SpinDistribution) -> bool {
    d.counts().first() == Some(&2) && d.counts().get(2) == Some(&0)
}

/// Sorted per-distribution maxima with running counts.
pub fn cumulative_distribution(
    records: &[SweepRecord],
    filter: Option<&dyn Fn(&SpinDistribution) -> bool>,
) -> Result<Vec<(f64, usize)>> {
    if records.is_empty() {
        return Err(Error::invalid("no records"));
    }
    let mut values: Vec<f64> = summarize(records)
        .into_iter()
        .filter(|s| filter.is_none_or(|f| f(&s.distribution)))
        .map(|s| s.max_probability)
        .collect();
    values.sort_by(f64::total_cmp);
    Ok(values.into_iter().enumerate().map(|(i, v)| (v, i + 1)).collect())
}

pub fn cumulative_csv(points: &[(f64, usize)]) -> String {
    let mut out = String::from("max_probability,cumulative_count\n");
    for (v, c) in points {
        out.push_str(&format!("{},{}\n", sig12(*v), c));
    }
    out
}

/// Fraction of distributions whose best maximum exceeds `threshold`.
pub fn improvement_fraction(summaries: &[DistributionSummary], threshold: f64) -> f64 {
    if summaries.is_empty() {
        return 0.0;
    }
    let above = summaries.iter().filter(|s| s.max_probability > threshold).count();
    above as f64 / summaries.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaPoint {
    pub alpha: f64,
    pub alpha_over_kbt: f64,
    pub max_probability: f64,
}

/// Window maximum as a function of the bath splitting α (rad/ps).
pub fn alpha_scan(config: &SweepConfig, distribution: &SpinDistribution, gamma: f64, alphas: &[f64]) -> Result<Vec<AlphaPoint>> {
    config.validate()?;
    let h = fmo_radps();
    alphas
        .par_iter()
        .map(|&alpha| {
            let c = SweepConfig {
                alpha,
                ..config.clone()
            };
            let best = evaluate_on(&h, &c, distribution, gamma)?;
            Ok(AlphaPoint {
                alpha,
                alpha_over_kbt: alpha_over_kbt(alpha, config.temperature_k)?,
                max_probability: best.probability,
            })
        })
        .collect()
}

pub fn alpha_scan_csv(points: &[AlphaPoint]) -> String {
    let mut out = String::from("alpha_over_kbt,max_probability\n");
    for p in points {
        out.push_str(&format!("{},{}\n", sig12(p.alpha_over_kbt), sig12(p.max_probability)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_enumerations() {
        let two = enumerate_even_distributions(2, 2).unwrap();
        assert_eq!(two, vec![SpinDistribution(vec![2, 0]), SpinDistribution(vec![0, 2])]);
        assert_eq!(enumerate_even_distributions(0, 3).unwrap(), vec![SpinDistribution(vec![0, 0, 0])]);
        assert_eq!(enumerate_even_distributions(3, 2), Err(Error::OddSpinTotal(3)));
    }

    #[test]
    fn fmo_distribution_count() {
        let all = enumerate_even_distributions(10, 7).unwrap();
        assert_eq!(all.len(), 462);
        assert!(all.iter().all(|d| d.total() == 10 && d.counts().iter().all(|n| n % 2 == 0)));
        assert_eq!(all[0].counts(), &[10, 0, 0, 0, 0, 0, 0]);
        assert_eq!(all[461].counts(), &[0, 0, 0, 0, 0, 0, 10]);
        assert!(all.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn default_grid() {
        let g = gamma_grid(200.0, 2.0).unwrap();
        assert_eq!(g.len(), 101);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[100], 200.0);
        assert_eq!(gamma_grid(1.0, 0.3).unwrap().len(), 4);
        assert!(gamma_grid(1.0, 0.0).is_err());
    }

    #[test]
    fn record_rounding() {
        let r = SweepRecord {
            distribution: SpinDistribution(vec![2, 0, 0, 8, 0, 0, 0]),
            gamma: 1.0 / 3.0,
            max_probability: 0.123456789012345,
            argmax_time_ps: 0.5,
            initial_site: 1,
            final_site: 3,
            temperature_k: 300.0,
            alpha: 150.0,
        };
        let line = serde_json::to_string(&r.rounded()).unwrap();
        assert_eq!(
            line,
            r#"{"distribution":[2,0,0,8,0,0,0],"gamma":0.333333333333,"max_probability":0.123456789012,"argmax_time_ps":0.5,"initial_site":1,"final_site":3,"temperature_K":300.0,"alpha":150.0}"#
        );
        let back: SweepRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(back.key(), r.key());
    }

    #[test]
    fn summary_and_cdf() {
        let d1 = SpinDistribution(vec![2, 0, 0, 8, 0, 0, 0]);
        let d2 = SpinDistribution(vec![0, 0, 2, 8, 0, 0, 0]);
        let rec = |d: &SpinDistribution, g: f64, p: f64| SweepRecord {
            distribution: d.clone(),
            gamma: g,
            max_probability: p,
            argmax_time_ps: 0.1,
            initial_site: 1,
            final_site: 3,
            temperature_k: 300.0,
            alpha: 150.0,
        };
        let records = vec![rec(&d1, 0.0, 0.05), rec(&d1, 1.0, 0.7), rec(&d2, 0.0, 0.05), rec(&d2, 1.0, 0.01)];
        let s = summarize(&records);
        assert_eq!(s[0].best_gamma, 1.0);
        assert_eq!(s[1].best_gamma, 0.0);
        let cdf = cumulative_distribution(&records, None).unwrap();
        assert_eq!(cdf, vec![(0.05, 1), (0.7, 2)]);
        let only = cumulative_distribution(&records, Some(&pulls_sites_together)).unwrap();
        assert_eq!(only, vec![(0.7, 1)]);
        assert_eq!(improvement_fraction(&s, 0.05), 0.5);
        assert_eq!(cumulative_distribution(&records[..1], None).unwrap(), vec![(0.05, 1)]);
        assert!(summary_csv(&s).lines().nth(1).unwrap().starts_with("2,0,0,8,0,0,0,1,0.7,"));
    }
}
