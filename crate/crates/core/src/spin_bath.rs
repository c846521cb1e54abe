//! Thermodynamics of finite spin-½ baths coupled to network sites by pure dephasing.
//!
//! A bath of `n` spins with splitting α enters the site Hamiltonian only
//! through its total magnetization `m`: the site energy is shifted by `γ·m`.
//! Sectors are therefore keyed by `m`, with the multiplicity of each `m`
//! aggregated over total spin `j` into a binomial coefficient.
//!
//! Half-integers are carried as doubled integers (`two_j`, `two_m`).

use crate::error::{Error, Result};
use crate::units::beta_from_kelvin;

/// Default upper bound on the total number of bath spins attached to one network.
pub const DEFAULT_MAX_TOTAL_SPINS: u32 = 24;
/// Default upper bound on the number of joint bath sectors.
pub const DEFAULT_MAX_SECTORS: usize = 1 << 20;

/// Bath temperature. Zero temperature is its own case rather than a β → ∞ limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Temperature {
    Zero,
    Kelvin(f64),
}

impl Temperature {
    pub fn kelvin(t: f64) -> Result<Self> {
        if t == 0.0 {
            Ok(Temperature::Zero)
        } else if t > 0.0 && t.is_finite() {
            Ok(Temperature::Kelvin(t))
        } else {
            Err(Error::invalid(format!("temperature must be ≥ 0 K, got {t}")))
        }
    }

    /// Value in kelvin (0 for [`Temperature::Zero`]).
    pub fn as_kelvin(&self) -> f64 {
        match *self {
            Temperature::Zero => 0.0,
            Temperature::Kelvin(t) => t,
        }
    }

    /// β in ps, `None` at zero temperature.
    pub fn beta(&self) -> Result<Option<f64>> {
        match *self {
            Temperature::Zero => Ok(None),
            Temperature::Kelvin(t) => beta_from_kelvin(t).map(Some),
        }
    }
}

/// One spin bath attached to a network site. Energies in rad/ps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    pub site: usize,
    pub spins: u32,
    pub alpha: f64,
    pub gamma: f64,
}

impl BathSpec {
    pub fn new(site: usize, spins: u32, alpha: f64, gamma: f64) -> Self {
        BathSpec {
            site,
            spins,
            alpha,
            gamma,
        }
    }
}

/// Probability of one magnetization value of a single bath.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagnetizationWeight {
    pub two_m: i32,
    pub weight: f64,
}

impl MagnetizationWeight {
    pub fn m(&self) -> f64 {
        0.5 * self.two_m as f64
    }
}

/// One joint magnetization configuration of all baths.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorWeight {
    /// Doubled magnetization of each bath, in bath order.
    pub two_m: Vec<i32>,
    pub weight: f64,
    /// Energy shift of every network site (rad/ps).
    pub shifts: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SectorLimits {
    pub max_total_spins: u32,
    pub max_sectors: usize,
}

impl Default for SectorLimits {
    fn default() -> Self {
        SectorLimits {
            max_total_spins: DEFAULT_MAX_TOTAL_SPINS,
            max_sectors: DEFAULT_MAX_SECTORS,
        }
    }
}

pub fn binomial(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Number of total-spin-`j` multiplets in the product of `n` spin-½ particles.
///
/// Uses d(n, j) = d(n−1, j−½) + d(n−1, j+½) starting from a single spin.
pub fn degeneracy(n: u32, two_j: u32) -> Result<u128> {
    if two_j > n || !(n - two_j).is_multiple_of(2) {
        return Err(Error::InvalidSpin { n, two_j });
    }
    if n > 120 {
        return Err(Error::invalid(format!("degeneracy table limited to n ≤ 120, got {n}")));
    }
    // row[two_j] for the current number of spins
    let width = n as usize + 2;
    let mut row = vec![0u128; width];
    row[0] = 1;
    for _ in 0..n {
        let mut next = vec![0u128; width];
        for tj in 0..width - 1 {
            let below = if tj >= 1 { row[tj - 1] } else { 0 };
            next[tj] = below + row[tj + 1];
        }
        row = next;
    }
    Ok(row[two_j as usize])
}

/// All allowed doubled total spins for `n` spins, from n/2 down to 0 or ½.
pub fn total_spin_ladder(n: u32) -> impl Iterator<Item = u32> {
    (0..=n).rev().filter(move |tj| (n - tj).is_multiple_of(2))
}

/// (1 − e^{−x(2j+1)}) / (1 − e^{−x}) = e^{−xj}·sinh(x(j+½))/sinh(x/2), x ≥ 0.
fn scaled_sinh_ratio(x: f64, two_j: u32) -> f64 {
    let levels = two_j as f64 + 1.0;
    if x == 0.0 {
        levels
    } else {
        (-x * levels).exp_m1() / (-x).exp_m1()
    }
}

/// Partition function summed over total-spin multiplets,
/// Σ_j ν(n,j) sinh(βα(j+½)) / sinh(βα/2).
pub fn partition_function(n: u32, alpha: f64, beta: f64) -> Result<f64> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::invalid(format!("β must be finite and ≥ 0, got {beta}")));
    }
    let x = (beta * alpha).abs();
    let mut z = 0.0;
    for tj in total_spin_ladder(n) {
        let j = 0.5 * tj as f64;
        z += degeneracy(n, tj)? as f64 * scaled_sinh_ratio(x, tj) * (x * j).exp();
    }
    Ok(z)
}

/// (2 cosh(βα/2))ⁿ.
pub fn partition_function_closed_form(n: u32, alpha: f64, beta: f64) -> f64 {
    (2.0 * (0.5 * beta * alpha).cosh()).powi(n as i32)
}

/// Canonical probabilities of each magnetization, ascending in m.
///
/// weight(m) = C(n, n/2 − m) e^{−βαm} / Z, evaluated with the largest
/// exponent subtracted.
pub fn magnetization_weights(n: u32, alpha: f64, beta: f64) -> Result<Vec<MagnetizationWeight>> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::invalid(format!("β must be finite and ≥ 0, got {beta}")));
    }
    let exponent = |two_m: i32| -beta * alpha * 0.5 * two_m as f64;
    let two_ms: Vec<i32> = (0..=n).map(|k| n as i32 - 2 * k as i32).rev().collect();
    let max_exp = two_ms
        .iter()
        .map(|&tm| exponent(tm))
        .fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = two_ms
        .iter()
        .map(|&tm| {
            let down = ((n as i32 - tm) / 2) as u32;
            binomial(n, down) as f64 * (exponent(tm) - max_exp).exp()
        })
        .collect();
    let total: f64 = raw.iter().sum();
    Ok(two_ms
        .into_iter()
        .zip(raw)
        .map(|(two_m, w)| MagnetizationWeight {
            two_m,
            weight: w / total,
        })
        .collect())
}

/// Zero-temperature magnetization distribution: the fully polarized ground
/// state, or the uniform product-state distribution when α = 0.
pub fn ground_state_weights(n: u32, alpha: f64) -> Vec<MagnetizationWeight> {
    if alpha > 0.0 {
        vec![MagnetizationWeight {
            two_m: -(n as i32),
            weight: 1.0,
        }]
    } else if alpha < 0.0 {
        vec![MagnetizationWeight {
            two_m: n as i32,
            weight: 1.0,
        }]
    } else {
        magnetization_weights(n, 0.0, 0.0).expect("β = 0 is valid")
    }
}

pub fn weights_at(n: u32, alpha: f64, temperature: Temperature) -> Result<Vec<MagnetizationWeight>> {
    match temperature.beta()? {
        None => Ok(ground_state_weights(n, alpha)),
        Some(beta) => magnetization_weights(n, alpha, beta),
    }
}

/// Joint sectors of independent baths with the default limits.
pub fn sector_product(
    baths: &[BathSpec],
    sites: usize,
    temperature: Temperature,
) -> Result<Vec<SectorWeight>> {
    sector_product_with_limits(baths, sites, temperature, SectorLimits::default())
}

/// Cartesian product of per-bath magnetization distributions. The first bath
/// varies slowest and every bath runs through ascending m, so the sequence is
/// sorted by sector key.
pub fn sector_product_with_limits(
    baths: &[BathSpec],
    sites: usize,
    temperature: Temperature,
    limits: SectorLimits,
) -> Result<Vec<SectorWeight>> {
    for b in baths {
        if b.site >= sites {
            return Err(Error::SiteOutOfRange { site: b.site, dim: sites });
        }
    }
    let total: u32 = baths.iter().map(|b| b.spins).sum();
    if total > limits.max_total_spins {
        return Err(Error::TooManySpins {
            total,
            limit: limits.max_total_spins,
        });
    }
    let per_bath: Vec<Vec<MagnetizationWeight>> = baths
        .iter()
        .map(|b| weights_at(b.spins, b.alpha, temperature))
        .collect::<Result<_>>()?;
    let count: u128 = per_bath.iter().map(|w| w.len() as u128).product();
    if count > limits.max_sectors as u128 {
        return Err(Error::TooManySectors {
            count,
            limit: limits.max_sectors,
        });
    }

    let mut out = Vec::with_capacity(count as usize);
    let mut idx = vec![0usize; baths.len()];
    loop {
        let mut weight = 1.0;
        let mut shifts = vec![0.0; sites];
        let mut two_m = Vec::with_capacity(baths.len());
        for ((b, w), &i) in baths.iter().zip(&per_bath).zip(&idx) {
            let mw = w[i];
            weight *= mw.weight;
            shifts[b.site] += b.gamma * mw.m();
            two_m.push(mw.two_m);
        }
        out.push(SectorWeight { two_m, weight, shifts });

        // odometer, last bath fastest
        let mut pos = baths.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < per_bath[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}
