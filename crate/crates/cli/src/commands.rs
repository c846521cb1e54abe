use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use spinnet_core::analytic::counterexample_series;
use spinnet_core::fmo::{
    self, alpha_scan, alpha_scan_csv, bare_maximum, cumulative_csv, cumulative_distribution, gamma_grid,
    improvement_fraction, pulls_sites_together, ranking, summarize, summary_csv, sweep_to_store, RecordStore,
    SpinDistribution, SweepConfig, SweepRecord, FMO_SITES,
};
use spinnet_core::format::sig12;
use spinnet_core::network::fully_connected;
use spinnet_core::oracle::run_validation;
use spinnet_core::scan::{
    end_site_surface, scan_csv, scan_peak, shared_gamma_scan, surface_csv, surface_peak, BathSettings,
};
use spinnet_core::spin_bath::BathSpec;
use spinnet_core::units::{cm_to_radps, kbt_radps, radps_to_cm};
use spinnet_core::{HermitianMatrix, Temperature, ThermalEnsemble, TimeWindow};

use crate::config::{parse_list, Config};
use crate::{
    AppendixArgs, BathArgs, Cli, Command, DimerArgs, FmoAlphaArgs, FmoCdfArgs, FmoCommand, FmoSweepArgs, GridArgs,
    NetworkArgs, Units, ValidateArgs,
};

const DEFAULT_ALPHA: f64 = 150.0;
const DEFAULT_TEMP: f64 = 300.0;
const DEFAULT_WINDOW: f64 = 1.0;
const DEFAULT_J: f64 = 10.0;
const DEFAULT_GAMMA_MAX: f64 = 200.0;
const DEFAULT_GAMMA_STEP: f64 = 2.0;
const ORACLE_TOLERANCE: f64 = 1e-12;

/// Config keys any subcommand may see.
const KNOWN_KEYS: &[&str] = &[
    "out", "jobs", "units", "alpha", "temp", "window", "gamma-max", "gamma-step", "j", "energies", "nspins", "n",
    "energy", "baths", "gamma", "initial", "final", "scan-gamma", "from", "to", "total-spins", "records",
    "distribution", "ratio-max", "ratio-step", "points", "seed", "cases",
];

struct Ctx {
    cfg: Config,
    units: Units,
    out: PathBuf,
}

impl Ctx {
    /// Energy-like value: converted from cm⁻¹ when it came from the user,
    /// defaults are already in rad/ps.
    fn energy(&self, flag: Option<f64>, key: &str, default_radps: f64) -> Result<f64> {
        let raw: Option<f64> = match flag {
            Some(v) => Some(v),
            None => self.cfg.get(key).map(|s| s.parse().map_err(|e| anyhow!("config key {key}: {e}"))).transpose()?,
        };
        Ok(raw.map_or(default_radps, |v| self.convert(v)))
    }

    fn energy_list(&self, flag: Option<String>, key: &str, default_radps: &[f64]) -> Result<Vec<f64>> {
        match self.text(flag, key) {
            Some(raw) => Ok(parse_list::<f64>(&raw)?.into_iter().map(|v| self.convert(v)).collect()),
            None => Ok(default_radps.to_vec()),
        }
    }

    fn convert(&self, v: f64) -> f64 {
        match self.units {
            Units::Radps => v,
            Units::Cm => cm_to_radps(v),
        }
    }

    fn text(&self, flag: Option<String>, key: &str) -> Option<String> {
        flag.or_else(|| self.cfg.get(key).map(str::to_string))
    }

    fn bath(&self, args: &BathArgs) -> Result<(f64, Temperature, TimeWindow)> {
        let alpha = self.energy(args.alpha, "alpha", DEFAULT_ALPHA)?;
        let temp = self.cfg.pick(args.temp, "temp", DEFAULT_TEMP)?;
        let window = self.cfg.pick(args.window, "window", DEFAULT_WINDOW)?;
        Ok((alpha, Temperature::kelvin(temp)?, checked_window(window)?))
    }

    fn grid(&self, args: &GridArgs) -> Result<Vec<f64>> {
        let max = self.energy(args.gamma_max, "gamma-max", DEFAULT_GAMMA_MAX)?;
        let step = self.energy(args.gamma_step, "gamma-step", DEFAULT_GAMMA_STEP)?;
        Ok(gamma_grid(max, step)?)
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.out.join(name);
        std::fs::write(&path, contents).with_context(|| format!("{}: cannot write", path.display()))?;
        println!("wrote={}", path.display());
        Ok(path)
    }
}

fn checked_window(t_max: f64) -> Result<TimeWindow> {
    let w = TimeWindow::new(t_max);
    w.validate()?;
    Ok(w)
}

fn kv(key: &str, value: impl std::fmt::Display) {
    println!("{key}={value}");
}

fn kvf(key: &str, value: f64) {
    kv(key, sig12(value));
}

pub fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(bad) = cfg.keys().find(|k| !KNOWN_KEYS.contains(k)) {
        bail!("unknown config key {bad:?}");
    }
    let units = cfg.pick(cli.units, "units", Units::Radps)?;
    let out: PathBuf = cfg.pick(cli.out.clone(), "out", PathBuf::from("out"))?;
    let jobs: Option<usize> = match cli.jobs {
        Some(j) => Some(j),
        None => cfg.get("jobs").map(|s| s.parse()).transpose().context("config key jobs")?,
    };
    if let Some(j) = jobs {
        if j == 0 {
            bail!("--jobs must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .context("cannot start worker pool")?;
    }
    std::fs::create_dir_all(&out).with_context(|| format!("{}: cannot create output directory", out.display()))?;
    let ctx = Ctx { cfg, units, out };
    match cli.command {
        Command::Dimer(a) => dimer(&ctx, a),
        Command::Network(a) => network(&ctx, a),
        Command::Fmo { command } => match command {
            FmoCommand::Sweep(a) => fmo_sweep(&ctx, a),
            FmoCommand::Cdf(a) => fmo_cdf(&ctx, a),
            FmoCommand::AlphaScan(a) => fmo_alpha(&ctx, a),
        },
        Command::Appendix(a) => appendix(&ctx, a),
        Command::Validate(a) => validate(&ctx, a),
    }
}

fn dimer(ctx: &Ctx, a: DimerArgs) -> Result<()> {
    let j = ctx.energy(a.j, "j", DEFAULT_J)?;
    let energies = ctx.energy_list(a.energies, "energies", &[0.0, 0.0])?;
    if energies.len() != 2 {
        bail!("--energies needs two values, got {}", energies.len());
    }
    let spins = parse_list::<u32>(&ctx.text(a.nspins, "nspins").unwrap_or_else(|| "10,10".into()))?;
    let [n1, n2] = spins[..] else {
        bail!("--nspins needs two values for the dimer");
    };
    let (alpha, temperature, window) = ctx.bath(&a.bath)?;
    let gammas = ctx.grid(&a.grid)?;
    let h = HermitianMatrix::from_real_symmetric(2, &[energies[0], j, j, energies[1]], Default::default())?;
    let settings = BathSettings { alpha, temperature };
    let surface = end_site_surface(&h, 0, 1, [n1, n2], settings, &gammas, &gammas, &window)?;
    let peak = surface_peak(&surface).expect("grid is nonempty");
    ctx.write("dimer_surface.csv", &surface_csv(&surface))?;
    kv("points", surface.len());
    kvf("peak_probability", peak.best.probability);
    kvf("peak_gamma1_radps", peak.gamma1);
    kvf("peak_gamma2_radps", peak.gamma2);
    kvf("argmax_time_ps", peak.best.time);
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Placement {
    None,
    Initial,
    Final,
    Ends,
    Intermediate,
}

fn placement(raw: &str) -> Result<Placement> {
    let norm: String = raw.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase();
    Ok(match norm.as_str() {
        "none" | "" => Placement::None,
        "i" => Placement::Initial,
        "f" => Placement::Final,
        "i,f" | "f,i" => Placement::Ends,
        "intermediate" => Placement::Intermediate,
        _ => bail!("unknown bath placement {raw:?}; use none, I, F, I,F or intermediate"),
    })
}

fn network(ctx: &Ctx, a: NetworkArgs) -> Result<()> {
    let n: usize = ctx.cfg.pick(a.n, "n", 10)?;
    let j = ctx.energy(a.j, "j", DEFAULT_J)?;
    let energy = ctx.energy(a.energy, "energy", 0.0)?;
    let place = placement(&ctx.text(a.baths, "baths").unwrap_or_else(|| "I,F".into()))?;
    let initial = ctx.cfg.pick(a.initial, "initial", 1)?;
    let final_site = ctx.cfg.pick(a.final_site, "final", n)?;
    if initial == 0 || final_site == 0 || initial > n || final_site > n {
        bail!("sites are numbered 1..={n}");
    }
    let (i, f) = (initial - 1, final_site - 1);
    let bath_sites: Vec<usize> = match place {
        Placement::None => vec![],
        Placement::Initial => vec![i],
        Placement::Final => vec![f],
        Placement::Ends => vec![i, f],
        Placement::Intermediate => (0..n).filter(|&s| s != i && s != f).collect(),
    };
    let default_spins = match place {
        Placement::Ends => "10,10".to_string(),
        Placement::Intermediate if n == 4 => "2,8".to_string(),
        _ => vec!["10"; bath_sites.len()].join(","),
    };
    let spins: Vec<u32> = if bath_sites.is_empty() {
        vec![]
    } else {
        parse_list(&ctx.text(a.nspins, "nspins").unwrap_or(default_spins))?
    };
    if spins.len() != bath_sites.len() {
        bail!("{} bath sites need {} spin counts, got {}", bath_sites.len(), bath_sites.len(), spins.len());
    }
    let (alpha, temperature, window) = ctx.bath(&a.bath)?;
    let settings = BathSettings { alpha, temperature };
    let h = fully_connected(n, energy, j)?;
    let scan = ctx.cfg.pick_flag(a.scan_gamma, "scan-gamma")?;

    let gammas: Vec<f64> = if scan && !bath_sites.is_empty() {
        let grid = ctx.grid(&a.grid)?;
        if place == Placement::Ends {
            let surface = end_site_surface(&h, i, f, [spins[0], spins[1]], settings, &grid, &grid, &window)?;
            let peak = surface_peak(&surface).expect("grid is nonempty");
            ctx.write("network_surface.csv", &surface_csv(&surface))?;
            kvf("peak_gamma1_radps", peak.gamma1);
            kvf("peak_gamma2_radps", peak.gamma2);
            vec![peak.gamma1, peak.gamma2]
        } else {
            let points = shared_gamma_scan(&h, i, f, &bath_sites, &spins, settings, &grid, &window)?;
            let peak = scan_peak(&points).expect("grid is nonempty");
            ctx.write("network_scan.csv", &scan_csv(&points))?;
            kvf("peak_gamma_radps", peak.gamma);
            vec![peak.gamma; bath_sites.len()]
        }
    } else {
        let g = ctx.energy_list(a.gamma, "gamma", &[0.0])?;
        match g.len() {
            1 => vec![g[0]; bath_sites.len()],
            k if k == bath_sites.len() => g,
            k => bail!("{k} couplings given for {} baths", bath_sites.len()),
        }
    };

    let baths: Vec<BathSpec> = bath_sites
        .iter()
        .zip(&spins)
        .zip(&gammas)
        .map(|((&s, &ns), &g)| BathSpec::new(s, ns, alpha, g))
        .collect();
    let series = ThermalEnsemble::new(&h, &baths, temperature)?.transfer_series(i, f, &window)?;
    ctx.write("network_series.csv", &series.to_csv())?;
    kv("sites", n);
    kvf("bare_max_probability", ThermalEnsemble::bare(&h).max_transfer(i, f, &window)?.probability);
    kvf("max_probability", series.max_probability);
    kvf("argmax_time_ps", series.argmax_time);
    Ok(())
}

fn site_pair(ctx: &Ctx, from: Option<usize>, to: Option<usize>) -> Result<(usize, usize)> {
    let from = ctx.cfg.pick(from, "from", 1)?;
    let to = ctx.cfg.pick(to, "to", 3)?;
    for s in [from, to] {
        if s == 0 || s > FMO_SITES {
            bail!("FMO sites are numbered 1..={FMO_SITES}, got {s}");
        }
    }
    Ok((from - 1, to - 1))
}

fn default_records(ctx: &Ctx, from: usize, to: usize) -> PathBuf {
    ctx.out.join(format!("fmo_records_{}_{}.jsonl", from + 1, to + 1))
}

fn fmo_sweep(ctx: &Ctx, a: FmoSweepArgs) -> Result<()> {
    let (from, to) = site_pair(ctx, a.sites.from, a.sites.to)?;
    let (alpha, temperature, window) = ctx.bath(&a.bath)?;
    let config = SweepConfig {
        total_spins: ctx.cfg.pick(a.total_spins, "total-spins", fmo::DEFAULT_TOTAL_SPINS)?,
        gammas: ctx.grid(&a.grid)?,
        alpha,
        temperature_k: temperature.as_kelvin(),
        window,
        ..SweepConfig::new(from, to)
    };
    let records_path: PathBuf = ctx.cfg.pick(a.records, "records", default_records(ctx, from, to))?;
    let store = RecordStore::new(&records_path);
    let mut last_pct = usize::MAX;
    let records = sweep_to_store(&config, &store, |done, total| {
        let pct = done * 100 / total.max(1);
        if pct != last_pct && pct % 5 == 0 {
            eprintln!("progress {done}/{total}");
            last_pct = pct;
        }
    })?;
    println!("records={}", records_path.display());
    report_records(ctx, &records, config.window, from, to)
}

fn report_records(ctx: &Ctx, records: &[SweepRecord], window: TimeWindow, from: usize, to: usize) -> Result<()> {
    let tag = format!("{}_{}", from + 1, to + 1);
    let summaries = summarize(records);
    ctx.write(&format!("fmo_summary_{tag}.csv"), &summary_csv(&summaries))?;
    let all = cumulative_distribution(records, None)?;
    ctx.write(&format!("fmo_cdf_{tag}.csv"), &cumulative_csv(&all))?;
    match cumulative_distribution(records, Some(&pulls_sites_together)) {
        Ok(subset) if !subset.is_empty() => {
            ctx.write(&format!("fmo_cdf_{tag}_n1_2_n3_0.csv"), &cumulative_csv(&subset))?;
        }
        _ => {}
    }
    let bare = bare_maximum(&SweepConfig {
        window,
        ..SweepConfig::new(from, to)
    })?;
    let best = &ranking(records)[0];
    kv("distributions", summaries.len());
    kvf("bare_max_probability", bare.probability);
    kv("best_distribution", &best.distribution);
    kvf("best_gamma_radps", best.best_gamma);
    kvf("best_gamma_cm", radps_to_cm(best.best_gamma));
    kvf("max_probability", best.max_probability);
    kvf("argmax_time_ps", best.argmax_time_ps);
    // strictly above the bare value, beyond rounding
    kvf("improved_fraction", improvement_fraction(&summaries, bare.probability + 1e-9));
    Ok(())
}

fn fmo_cdf(ctx: &Ctx, a: FmoCdfArgs) -> Result<()> {
    let path: PathBuf = match ctx.text(a.records.map(|p| p.display().to_string()), "records") {
        Some(p) => PathBuf::from(p),
        None => default_records(ctx, 0, 2),
    };
    let records = load_existing(&path)?;
    let first = records.first().ok_or_else(|| anyhow!("{}: no records", path.display()))?;
    let (from, to) = (first.initial_site - 1, first.final_site - 1);
    let window = checked_window(ctx.cfg.pick(a.window, "window", DEFAULT_WINDOW)?)?;
    report_records(ctx, &records, window, from, to)
}

fn load_existing(path: &Path) -> Result<Vec<SweepRecord>> {
    if !path.exists() {
        bail!("{}: record file not found", path.display());
    }
    Ok(RecordStore::new(path).load()?)
}

fn fmo_alpha(ctx: &Ctx, a: FmoAlphaArgs) -> Result<()> {
    let (from, to) = site_pair(ctx, a.sites.from, a.sites.to)?;
    let counts = parse_list::<u32>(&ctx.text(a.distribution, "distribution").unwrap_or_else(|| "2,0,0,8,0,0,0".into()))?;
    if counts.len() != FMO_SITES {
        bail!("distribution needs {FMO_SITES} counts, got {}", counts.len());
    }
    let distribution = SpinDistribution::new(counts)?;
    let gamma = ctx.energy(a.gamma, "gamma", cm_to_radps(170.0))?;
    let temp: f64 = ctx.cfg.pick(a.temp, "temp", DEFAULT_TEMP)?;
    let window = checked_window(ctx.cfg.pick(a.window, "window", DEFAULT_WINDOW)?)?;
    let ratio_max: f64 = ctx.cfg.pick(a.ratio_max, "ratio-max", 10.0)?;
    let ratio_step: f64 = ctx.cfg.pick(a.ratio_step, "ratio-step", 0.1)?;
    let kt = kbt_radps(temp)?;
    let alphas: Vec<f64> = gamma_grid(ratio_max, ratio_step)?.into_iter().map(|r| r * kt).collect();
    let config = SweepConfig {
        temperature_k: temp,
        window,
        ..SweepConfig::new(from, to)
    };
    let points = alpha_scan(&config, &distribution, gamma, &alphas)?;
    ctx.write(&format!("fmo_alpha_scan_{}_{}.csv", from + 1, to + 1), &alpha_scan_csv(&points))?;
    let anchor = alpha_scan(&config, &distribution, gamma, &[3.82 * kt])?[0];
    kv("distribution", &distribution);
    kvf("gamma_radps", gamma);
    kvf("alpha_150_over_kbt", 150.0 / kt);
    kvf("max_probability_at_smallest_ratio", points[0].max_probability);
    kvf("max_probability_at_ratio_3.82", anchor.max_probability);
    kvf("max_probability_at_largest_ratio", points[points.len() - 1].max_probability);
    Ok(())
}

fn appendix(ctx: &Ctx, a: AppendixArgs) -> Result<()> {
    let points = ctx.cfg.pick(a.points, "points", 20_001)?;
    let s = counterexample_series(points)?;
    ctx.write("appendix_series.csv", &s.to_csv())?;
    kvf("max_deviation", s.max_deviation);
    kvf("max_probability", s.max.probability);
    kvf("argmax_t_over_j", s.max.time);
    kvf("bound", 4.0 / 441.0);
    kvf("max_over_bound", s.bound_ratio());
    kv("bound_reached", s.bound_ratio() >= 1.0);
    Ok(())
}

fn validate(ctx: &Ctx, a: ValidateArgs) -> Result<()> {
    let seed = ctx.cfg.pick(a.seed, "seed", 2024)?;
    let cases = ctx.cfg.pick(a.cases, "cases", 50)?;
    let report = run_validation(seed, cases)?;
    let mut text = String::new();
    text.push_str(&format!("oracle_cases={}\n", report.oracle_cases));
    text.push_str(&format!("oracle_max_error={:e}\n", report.oracle_max_error));
    text.push_str(&format!("multiplicity_mismatches={}\n", report.multiplicity_mismatches.len()));
    text.push_str(&format!("sum_rule_failures={}\n", report.sum_rule_failures.len()));
    text.push_str(&format!("partition_max_rel_error={:e}\n", report.partition_max_rel_error));
    let passed = report.passed(ORACLE_TOLERANCE);
    text.push_str(&format!("passed={passed}\n"));
    print!("{text}");
    ctx.write("validate.txt", &text)?;
    if !passed {
        bail!("validation failed");
    }
    Ok(())
}
