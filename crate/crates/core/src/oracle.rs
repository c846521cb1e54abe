//! Brute-force reference calculations over explicit bath product states.
//!
//! Nothing here uses collective-spin bookkeeping: every bath spin is
//! enumerated individually. Slow by design, meant for tests and `validate`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;
use crate::spin_bath::{degeneracy, partition_function, partition_function_closed_form, total_spin_ladder, BathSpec, Temperature};
use crate::transport::{transfer_probability, ThermalEnsemble};
use crate::units::beta_from_kelvin;
use crate::units::EnergyUnit;

pub const MAX_ORACLE_SPINS: u32 = 12;
pub const MAX_MULTIPLICITY_SPINS: u32 = 8;

/// Thermal transfer probability summed over all 2^Σn bath product states.
///
/// Each spin contributes ±γ/2 to its site and ±α/2 to the bath energy.
/// At zero temperature the degenerate ground configurations are averaged
/// uniformly.
pub fn brute_force_thermal_transfer(
    network: &HermitianMatrix,
    baths: &[BathSpec],
    temperature: Temperature,
    initial: usize,
    target: usize,
    t: f64,
) -> Result<f64> {
    let total: u32 = baths.iter().map(|b| b.spins).sum();
    if total > MAX_ORACLE_SPINS {
        return Err(Error::TooManySpins {
            total,
            limit: MAX_ORACLE_SPINS,
        });
    }
    let h = network.to_radps();
    let dim = h.dim();
    for b in baths {
        if b.site >= dim {
            return Err(Error::SiteOutOfRange { site: b.site, dim });
        }
    }
    let beta = temperature.beta()?;

    // owner[s] = index of the bath that spin s belongs to
    let owner: Vec<usize> = baths
        .iter()
        .enumerate()
        .flat_map(|(i, b)| std::iter::repeat_n(i, b.spins as usize))
        .collect();

    let configs = 1usize << total;
    let mut energies = Vec::with_capacity(configs);
    let mut shifts = Vec::with_capacity(configs);
    for bits in 0..configs {
        let mut energy = 0.0;
        let mut shift = vec![0.0; dim];
        for (s, &b) in owner.iter().enumerate() {
            let sigma = if bits >> s & 1 == 1 { 0.5 } else { -0.5 };
            energy += baths[b].alpha * sigma;
            shift[baths[b].site] += baths[b].gamma * sigma;
        }
        energies.push(energy);
        shifts.push(shift);
    }

    let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = match beta {
        Some(beta) => energies.iter().map(|e| (-beta * (e - e_min)).exp()).collect(),
        None => {
            let scale = energies.iter().fold(1.0_f64, |a, e| a.max(e.abs()));
            energies
                .iter()
                .map(|e| if e - e_min <= 1e-12 * scale { 1.0 } else { 0.0 })
                .collect()
        }
    };
    let z: f64 = weights.iter().sum();

    let mut acc = 0.0;
    for (w, shift) in weights.iter().zip(&shifts) {
        if *w == 0.0 {
            continue;
        }
        let hs = h.with_diagonal_shifts(shift)?;
        acc += w * transfer_probability(&hs, initial, target, t)?;
    }
    Ok(acc / z)
}

/// Total-spin multiplicities of n spin-½ particles, keyed by 2j.
///
/// Builds S² = (Σ S_i)² on the product space one magnetization block at a
/// time, diagonalizes it and counts eigenvalues j(j+1), divided by 2j+1.
pub fn brute_force_multiplicities(n: u32) -> Result<BTreeMap<u32, u64>> {
    if n > MAX_MULTIPLICITY_SPINS {
        return Err(Error::TooManySpins {
            total: n,
            limit: MAX_MULTIPLICITY_SPINS,
        });
    }
    let n_us = n as usize;
    let mut eigen_counts: BTreeMap<u32, u64> = BTreeMap::new();
    for ups in 0..=n {
        let states: Vec<usize> = (0..1usize << n_us).filter(|s| s.count_ones() == ups).collect();
        let index: BTreeMap<usize, usize> = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let d = states.len();
        let mut m = vec![0.0; d * d];
        for (col, &s) in states.iter().enumerate() {
            let sigma = |i: usize| if s >> i & 1 == 1 { 1.0 } else { -1.0 };
            let mut diag = 0.75 * n as f64;
            for i in 0..n_us {
                for j in (i + 1)..n_us {
                    // 2 S_i^z S_j^z
                    diag += 0.5 * sigma(i) * sigma(j);
                    // S_i^+ S_j^- + S_i^- S_j^+ swaps an antiparallel pair
                    if sigma(i) != sigma(j) {
                        let flipped = s ^ (1 << i) ^ (1 << j);
                        m[index[&flipped] * d + col] += 1.0;
                    }
                }
            }
            m[col * d + col] += diag;
        }
        let s2 = HermitianMatrix::from_real_symmetric(d, &m, EnergyUnit::RadPerPs)?;
        for &lambda in s2.eigh().eigenvalues() {
            let j = 0.5 * ((1.0 + 4.0 * lambda).max(0.0).sqrt() - 1.0);
            let two_j = (2.0 * j).round();
            let jj = two_j / 2.0;
            if (jj * (jj + 1.0) - lambda).abs() > 1e-8 {
                return Err(Error::invalid(format!("S² eigenvalue {lambda} is not of the form j(j+1)")));
            }
            *eigen_counts.entry(two_j as u32).or_insert(0) += 1;
        }
    }
    let mut out = BTreeMap::new();
    for (two_j, count) in eigen_counts {
        let dim = two_j as u64 + 1;
        if count % dim != 0 {
            return Err(Error::invalid(format!(
                "{count} eigenvalues for 2j = {two_j} is not a multiple of {dim}"
            )));
        }
        out.insert(two_j, count / dim);
    }
    Ok(out)
}

/// Σ_j count(j)·(2j+1); equals 2ⁿ for a valid multiplicity table.
pub fn multiplicity_dimension(counts: &BTreeMap<u32, u64>) -> u64 {
    counts.iter().map(|(&two_j, &c)| c * (two_j as u64 + 1)).sum()
}

/// A random network-plus-baths case small enough for the oracle.
#[derive(Debug, Clone)]
pub struct OracleCase {
    pub network: HermitianMatrix,
    pub baths: Vec<BathSpec>,
    pub temperature: Temperature,
    pub initial: usize,
    pub target: usize,
    pub t: f64,
}

/// 2 to 4 sites with random real couplings, up to three baths holding at
/// most `max_spins` spins in total, temperature 0 or 1 to 400 K.
pub fn random_case(rng: &mut impl Rng, max_spins: u32) -> OracleCase {
    let dim = rng.gen_range(2..=4);
    let mut m = vec![0.0; dim * dim];
    for i in 0..dim {
        m[i * dim + i] = rng.gen_range(-50.0..50.0);
        for j in (i + 1)..dim {
            let c = rng.gen_range(-20.0..20.0);
            m[i * dim + j] = c;
            m[j * dim + i] = c;
        }
    }
    let network = HermitianMatrix::from_real_symmetric(dim, &m, EnergyUnit::RadPerPs).expect("symmetric");
    let mut budget = max_spins;
    let mut baths = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        if budget == 0 {
            break;
        }
        let n = rng.gen_range(1..=budget);
        budget -= n;
        baths.push(BathSpec::new(
            rng.gen_range(0..dim),
            n,
            rng.gen_range(-200.0..200.0),
            rng.gen_range(-60.0..60.0),
        ));
    }
    let temperature = if rng.gen_bool(0.2) {
        Temperature::Zero
    } else {
        Temperature::Kelvin(rng.gen_range(1.0..400.0))
    };
    let initial = rng.gen_range(0..dim);
    let target = (initial + rng.gen_range(1..dim)) % dim;
    OracleCase {
        network,
        baths,
        temperature,
        initial,
        target,
        t: rng.gen_range(0.0..2.0),
    }
}

/// Outcome of [`run_validation`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub oracle_cases: usize,
    /// Largest |sector − brute force| over all cases.
    pub oracle_max_error: f64,
    /// Spin counts n ≤ 8 whose brute-force multiplicities disagree with the recursion.
    pub multiplicity_mismatches: Vec<u32>,
    /// Spin counts n ≤ 20 violating Σ_j ν(n,j)(2j+1) = 2ⁿ.
    pub sum_rule_failures: Vec<u32>,
    /// Largest relative gap between the multiplet sum and (2cosh(βα/2))ⁿ.
    pub partition_max_rel_error: f64,
}

impl ValidationReport {
    pub fn passed(&self, tolerance: f64) -> bool {
        self.oracle_max_error <= tolerance
            && self.multiplicity_mismatches.is_empty()
            && self.sum_rule_failures.is_empty()
            && self.partition_max_rel_error <= 1e-12
    }
}

/// Sector reduction against brute force on `cases` random configurations
/// with at most 6 bath spins, plus the multiplicity and partition checks.
pub fn run_validation(seed: u64, cases: usize) -> Result<ValidationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let c = random_case(&mut rng, 6);
        let fast = ThermalEnsemble::new(&c.network, &c.baths, c.temperature)?.transfer_probability(c.initial, c.target, c.t)?;
        let slow = brute_force_thermal_transfer(&c.network, &c.baths, c.temperature, c.initial, c.target, c.t)?;
        worst = worst.max((fast - slow).abs());
    }

    let mut multiplicity_mismatches = Vec::new();
    for n in 0..=MAX_MULTIPLICITY_SPINS {
        let counts = brute_force_multiplicities(n)?;
        let agree = multiplicity_dimension(&counts) == 1 << n
            && total_spin_ladder(n).all(|tj| counts.get(&tj).copied().unwrap_or(0) as u128 == degeneracy(n, tj).unwrap_or(0));
        if !agree {
            multiplicity_mismatches.push(n);
        }
    }

    let mut sum_rule_failures = Vec::new();
    let mut partition_max_rel_error: f64 = 0.0;
    for n in 0..=20u32 {
        let total: u128 = total_spin_ladder(n)
            .map(|tj| degeneracy(n, tj).map(|d| d * (tj as u128 + 1)))
            .sum::<Result<u128>>()?;
        if total != 1u128 << n {
            sum_rule_failures.push(n);
        }
        for (alpha, kelvin) in [(150.0, 300.0), (460.0, 77.0), (-80.0, 300.0), (1.0, 1000.0)] {
            let beta = beta_from_kelvin(kelvin)?;
            let z = partition_function(n, alpha, beta)?;
            let closed = partition_function_closed_form(n, alpha, beta);
            partition_max_rel_error = partition_max_rel_error.max((z - closed).abs() / closed);
        }
    }

    Ok(ValidationReport {
        oracle_cases: cases,
        oracle_max_error: worst,
        multiplicity_mismatches,
        sum_rule_failures,
        partition_max_rel_error,
    })
}
