//! Closed-form transfer results for homogeneous fully connected networks, and
//! the block reduction they rest on.
//!
//! A block of `k` sites with equal energies and homogeneous coupling carries
//! `k − 1` degenerate eigenvectors at ε − J that never mix with the rest of the
//! network. [`partial_diagonalization`] splits them off so the dynamics reduce
//! to an active block of dimension `N − k + 1` whose first basis vector is the
//! uniform superposition over the symmetric block.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::format::sig12;
use crate::linalg::{HermitianMatrix, C64};
use crate::network::{blocked_fully_connected, NetworkSpec};
use crate::transport::{max_of_samples, ThermalEnsemble, TimeWindow, WindowMax};
use crate::units::EnergyUnit;

const BLOCK_TOL: f64 = 1e-12;

/// J²/(J² + Δ'²) with Δ' half the difference of the shifted dimer energies.
pub fn dimer_max_probability(e1: f64, e2: f64, coupling: f64, shift1: f64, shift2: f64) -> Result<f64> {
    let detuning = 0.5 * ((e2 + shift2) - (e1 + shift1));
    if coupling == 0.0 {
        if detuning == 0.0 {
            return Err(Error::invalid(
                "uncoupled degenerate dimer: the excitation never leaves its initial site",
            ));
        }
        return Ok(0.0);
    }
    Ok(coupling * coupling / (coupling * coupling + detuning * detuning))
}

/// (4/N²) sin²(NJt/2) for the homogeneous N-site network.
pub fn symmetric_transfer(sites: usize, coupling: f64, t: f64) -> Result<f64> {
    if sites < 2 {
        return Err(Error::invalid(format!("need at least 2 sites, got {sites}")));
    }
    let n = sites as f64;
    let s = (0.5 * n * coupling * t).sin();
    Ok(4.0 / (n * n) * s * s)
}

/// Result of rotating away the degenerate part of a symmetric block.
#[derive(Debug, Clone)]
pub struct PartialDiagonalization {
    /// Row-major unitary U; the rotated Hamiltonian is U H U†.
    pub unitary: Vec<C64>,
    pub rotated: HermitianMatrix,
    /// Dimension of the leading block that still carries dynamics.
    pub active_dim: usize,
    /// Energy of the split-off degenerate states, ε − J.
    pub tail_energy: f64,
}

impl PartialDiagonalization {
    /// Leading `active_dim × active_dim` block of the rotated Hamiltonian.
    pub fn active_block(&self) -> HermitianMatrix {
        let (n, a) = (self.rotated.dim(), self.active_dim);
        let entries = (0..a)
            .flat_map(|i| (0..a).map(move |j| (i, j)))
            .map(|(i, j)| self.rotated.entries()[i * n + j])
            .collect();
        HermitianMatrix::new(a, entries, self.rotated.unit()).expect("principal block of a Hermitian matrix")
    }

    /// Largest entry of |U U† − I|.
    pub fn unitarity_error(&self) -> f64 {
        let n = self.rotated.dim();
        let u = &self.unitary;
        let mut worst = 0.0_f64;
        for a in 0..n {
            for b in 0..n {
                let dot: C64 = (0..n).map(|k| u[a * n + k] * u[b * n + k].conj()).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).norm());
            }
        }
        worst
    }
}

fn close(a: C64, b: C64, scale: f64) -> bool {
    (a - b).norm() <= BLOCK_TOL * scale
}

/// Checks that the first `k` sites form a symmetric block: equal energies,
/// equal couplings inside the block, and each outside site coupled equally to
/// every block site. Returns (ε, J).
fn check_symmetric_block(h: &HermitianMatrix, k: usize) -> Result<(f64, f64)> {
    let n = h.dim();
    if k < 1 || k > n {
        return Err(Error::invalid(format!("symmetric block size {k} out of range 1..={n}")));
    }
    let scale = h.entries().iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
    let eps = h.get(0, 0);
    for a in 1..k {
        if !close(h.get(a, a), eps, scale) {
            return Err(Error::invalid(format!(
                "site {a} energy {} differs from the block energy {}",
                h.get(a, a).re,
                eps.re
            )));
        }
    }
    let j = if k >= 2 { h.get(0, 1) } else { C64::new(0.0, 0.0) };
    for a in 0..k {
        for b in 0..k {
            if a != b && !close(h.get(a, b), j, scale) {
                return Err(Error::invalid(format!("coupling ({a},{b}) breaks the block symmetry")));
            }
        }
        for c in k..n {
            if !close(h.get(a, c), h.get(0, c), scale) {
                return Err(Error::invalid(format!(
                    "site {c} couples unequally to block sites 0 and {a}"
                )));
            }
        }
    }
    Ok((eps.re, j.re))
}

/// U_k = |0⟩⟨φ| + Σ_n |n⟩⟨n+k−1| + Σ_m |N−k+m⟩⟨λ_m| applied as U H U†, where
/// φ is the uniform superposition over the first `k` sites and λ_m their
/// discrete Fourier modes (0-based indices).
pub fn partial_diagonalization(h: &HermitianMatrix, k: usize) -> Result<PartialDiagonalization> {
    let (eps, j) = check_symmetric_block(h, k)?;
    let n = h.dim();
    let zero = C64::new(0.0, 0.0);
    let norm = 1.0 / (k as f64).sqrt();
    let mut u = vec![zero; n * n];
    u[..k].fill(C64::new(norm, 0.0));
    for r in 1..=(n - k) {
        u[r * n + (r + k - 1)] = C64::new(1.0, 0.0);
    }
    for m in 1..k {
        let row = n - k + m;
        for c in 0..k {
            let phase = 2.0 * PI * (m * (c + 1)) as f64 / k as f64;
            // ⟨λ_m| is the conjugate of ω^{m j}/√k
            u[row * n + c] = C64::from_polar(norm, -phase);
        }
    }

    let hm = h.entries();
    // U H
    let mut uh = vec![zero; n * n];
    for r in 0..n {
        for c in 0..n {
            uh[r * n + c] = (0..n).map(|x| u[r * n + x] * hm[x * n + c]).sum();
        }
    }
    // (U H) U†
    let mut rot = vec![zero; n * n];
    for r in 0..n {
        for c in 0..n {
            rot[r * n + c] = (0..n).map(|x| uh[r * n + x] * u[c * n + x].conj()).sum();
        }
    }
    let rotated = HermitianMatrix::new(n, rot, h.unit())?;
    Ok(PartialDiagonalization {
        unitary: u,
        rotated,
        active_dim: n - k + 1,
        tail_energy: eps - j,
    })
}

/// Resonant bath-site energy ε + (N−2)J and the resulting maximum 1/(N−1).
pub fn one_bath_resonant_max(sites: usize, energy: f64, coupling: f64) -> Result<(f64, f64)> {
    if sites < 3 {
        return Err(Error::invalid(format!("one-bath resonance needs N ≥ 3, got {sites}")));
    }
    Ok((
        energy + (sites as f64 - 2.0) * coupling,
        1.0 / (sites as f64 - 1.0),
    ))
}

/// Time of the first one-bath resonant maximum. At resonance the active
/// block is a dimer with coupling √(N−1)·J, so P = sin²(√(N−1)Jt)/(N−1)
/// peaks at π/(2√(N−1)J).
pub fn one_bath_peak_time(sites: usize, coupling: f64) -> f64 {
    PI / (2.0 * (sites as f64 - 1.0).sqrt() * coupling)
}

/// Homogeneous network whose last one or two sites carry shifted energies.
/// The bath-free sites come first so they form the symmetric block.
pub fn shifted_tail_network(sites: usize, energy: f64, coupling: f64, tail: &[f64]) -> Result<HermitianMatrix> {
    if tail.len() >= sites {
        return Err(Error::invalid("more shifted sites than network sites"));
    }
    let mut energies = vec![energy; sites - tail.len()];
    energies.extend_from_slice(tail);
    Ok(NetworkSpec::new(energies, crate::network::Coupling::Homogeneous(coupling))?.hamiltonian())
}

/// Spectral weights c_j = ⟨F|λ_j⟩⟨λ_j|I⟩ of the three-level active block for
/// baths on both the initial and the final site.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoBathCoefficients {
    /// Active-block eigenvalues, ascending (rad/ps).
    pub eigenvalues: [f64; 3],
    pub coefficients: [C64; 3],
}

impl TwoBathCoefficients {
    /// |Σ_j c_j e^{−itλ_j}|².
    pub fn probability(&self, t: f64) -> f64 {
        self.eigenvalues
            .iter()
            .zip(&self.coefficients)
            .map(|(l, c)| c * C64::from_polar(1.0, -l * t))
            .sum::<C64>()
            .norm_sqr()
    }

    /// (Σ_j |c_j|)², an upper bound on the transfer probability.
    pub fn bound(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm()).sum::<f64>().powi(2)
    }
}

/// Coefficients for the network with N − 2 bath-free sites at ε and the
/// initial (site N−2) and final (site N−1) sites at ε1 and ε2.
pub fn two_bath_coefficients(sites: usize, energy: f64, coupling: f64, e1: f64, e2: f64) -> Result<TwoBathCoefficients> {
    if sites < 3 {
        return Err(Error::invalid(format!("two-bath reduction needs N ≥ 3, got {sites}")));
    }
    let h = shifted_tail_network(sites, energy, coupling, &[e1, e2])?;
    let pd = partial_diagonalization(&h, sites - 2)?;
    let spectrum = pd.active_block().eigh();
    // initial and final sites map to rotated indices 1 and 2
    let mut eigenvalues = [0.0; 3];
    let mut coefficients = [C64::new(0.0, 0.0); 3];
    for k in 0..3 {
        eigenvalues[k] = spectrum.eigenvalues()[k];
        coefficients[k] = spectrum.component(2, k) * spectrum.component(1, k).conj();
    }
    Ok(TwoBathCoefficients {
        eigenvalues,
        coefficients,
    })
}

/// Residue form of the same coefficients, J(J − ε + λ_a)/Π_{b≠a}(λ_a − λ_b),
/// valid when the three active eigenvalues are distinct.
pub fn two_bath_coefficient_residue(energy: f64, coupling: f64, eigenvalues: &[f64; 3], index: usize) -> f64 {
    let la = eigenvalues[index];
    let denom: f64 = (0..3).filter(|&b| b != index).map(|b| la - eigenvalues[b]).product();
    coupling * (coupling - energy + la) / denom
}

/// (1/k²)|1 − e^{it(ε−J)} ⟨0|e^{−itH̃}|0⟩|² for initial and final sites inside
/// the bath-free symmetric block formed by the first `k` sites.
pub fn intermediate_bath_probability(
    k: usize,
    h: &HermitianMatrix,
    initial: usize,
    target: usize,
    t: f64,
) -> Result<f64> {
    if initial >= k || target >= k {
        return Err(Error::invalid(format!(
            "initial ({initial}) and final ({target}) sites must lie in the symmetric block of {k} sites"
        )));
    }
    if initial == target {
        return Err(Error::SameSite(initial));
    }
    let h = h.to_radps();
    let pd = partial_diagonalization(&h, k)?;
    let lead = pd.active_block().eigh().propagator_element(0, 0, t);
    let phase = C64::from_polar(1.0, pd.tail_energy * t);
    let kf = k as f64;
    Ok((C64::new(1.0, 0.0) - phase * lead).norm_sqr() / (kf * kf))
}

/// ⟨I|e^{−itH}|I⟩ for the three-level chain I –J1– M –J2– E (real valued).
pub fn three_level_return_amplitude(j1: f64, j2: f64, t: f64) -> Result<f64> {
    let s = j1 * j1 + j2 * j2;
    if s == 0.0 {
        return Err(Error::invalid("three-level chain needs a non-zero coupling"));
    }
    Ok((j2 * j2 + j1 * j1 * (s.sqrt() * t).cos()) / s)
}

/// Three-level chain Hamiltonian with couplings J1 and J2.
pub fn three_level_chain(j1: f64, j2: f64) -> HermitianMatrix {
    HermitianMatrix::from_real_symmetric(3, &[0.0, j1, 0.0, j1, 0.0, j2, 0.0, j2, 0.0], EnergyUnit::RadPerPs)
        .expect("symmetric")
}

/// Block sizes of the network that never saturates the 4/k² bound.
pub const COUNTEREXAMPLE_BLOCKS: [usize; 3] = [21, 6, 1];
/// Block energies in units of J.
pub const COUNTEREXAMPLE_ENERGIES: [f64; 3] = [0.0, 63.0 / 5.0, 112.0 / 5.0];
/// Fundamental period of [`counterexample_probability`] in units of 1/J.
/// Every frequency is a multiple of 21/5, so the period is 2π·5/21.
pub const COUNTEREXAMPLE_PERIOD: f64 = 10.0 * PI / 21.0;

/// Blocked network {21, 6, 1} with energies {0, 63/5, 112/5} and J = 1.
pub fn counterexample_network() -> HermitianMatrix {
    blocked_fully_connected(&COUNTEREXAMPLE_BLOCKS, &COUNTEREXAMPLE_ENERGIES, 1.0).expect("valid blocks")
}

/// Transfer probability between two block-1 sites of [`counterexample_network`],
/// t in units of 1/J.
pub fn counterexample_probability(t: f64) -> f64 {
    (2091.0 - 1350.0 * (42.0 * t / 5.0).cos() + 200.0 * (63.0 * t / 5.0).cos() - 216.0 * (21.0 * t).cos()
        + 625.0 * (126.0 * t / 5.0).cos()
        - 1350.0 * (168.0 * t / 5.0).cos())
        / 642_978.0
}

/// Closed form and direct simulation of the counterexample over one period.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleSeries {
    pub times: Vec<f64>,
    pub closed_form: Vec<f64>,
    pub simulated: Vec<f64>,
    /// Largest pointwise |closed form − simulation|.
    pub max_deviation: f64,
    /// Maximum of P over the period, refined.
    pub max: WindowMax,
}

impl CounterexampleSeries {
    /// max P divided by the bound 4/k₁² with k₁ = 21.
    pub fn bound_ratio(&self) -> f64 {
        let k = COUNTEREXAMPLE_BLOCKS[0] as f64;
        self.max.probability * k * k / 4.0
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_over_j,closed_form,simulated\n");
        for i in 0..self.times.len() {
            out.push_str(&format!(
                "{},{},{}\n",
                sig12(self.times[i]),
                sig12(self.closed_form[i]),
                sig12(self.simulated[i])
            ));
        }
        out
    }
}

/// Samples both forms at `points` grid points over [0, period].
pub fn counterexample_series(points: usize) -> Result<CounterexampleSeries> {
    let window = TimeWindow::with_points(COUNTEREXAMPLE_PERIOD, points);
    window.validate()?;
    let simulated = ThermalEnsemble::bare(&counterexample_network()).transfer_samples(0, 1, &window)?;
    let times = window.times();
    let closed_form: Vec<f64> = times.iter().map(|&t| counterexample_probability(t)).collect();
    let max_deviation = closed_form
        .iter()
        .zip(&simulated)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let max = max_of_samples(&window, &closed_form, counterexample_probability);
    Ok(CounterexampleSeries {
        times,
        closed_form,
        simulated,
        max_deviation,
        max,
    })
}
