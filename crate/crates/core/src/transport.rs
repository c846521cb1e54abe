//! Transfer probabilities, thermal bath mixtures and time-window maxima.
//!
//! A thermal bath state is a classical mixture over magnetization sectors, and
//! each sector evolves unitarily under the network Hamiltonian with shifted
//! site energies. Every quantity here is a weighted sum over those sectors,
//! taken in sector-key order so results are bit-stable.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::format::sig12;
use crate::linalg::{HermitianMatrix, SpectralDecomposition, StateVector, C64};
use crate::network::NetworkSpec;
use crate::spin_bath::{sector_product_with_limits, BathSpec, SectorLimits, Temperature};

/// Uniform samples per picosecond used by [`TimeWindow::new`].
pub const DEFAULT_SAMPLES_PER_PS: f64 = 10_000.0;

/// Phasor recurrences are re-seeded from exact exponentials this often.
const REANCHOR_EVERY: usize = 256;

/// Samples within this relative distance of the maximum count as tied; the earliest wins.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Closed interval [0, t_max] sampled on a uniform grid, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeWindow {
    pub t_max: f64,
    pub points: usize,
    pub refine: bool,
}

impl TimeWindow {
    /// Default density: 10 000 intervals per ps, parabolic refinement on.
    pub fn new(t_max: f64) -> Self {
        let points = ((DEFAULT_SAMPLES_PER_PS * t_max).ceil() as usize + 1).max(2);
        TimeWindow {
            t_max,
            points,
            refine: true,
        }
    }

    pub fn with_points(t_max: f64, points: usize) -> Self {
        TimeWindow {
            t_max,
            points,
            refine: true,
        }
    }

    pub fn without_refinement(mut self) -> Self {
        self.refine = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::invalid(format!(
                "time window must be positive, got {}",
                self.t_max
            )));
        }
        if self.points < 2 {
            return Err(Error::invalid("time window needs at least 2 grid points"));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        self.t_max / (self.points - 1) as f64
    }

    pub fn time(&self, index: usize) -> f64 {
        index as f64 * self.step()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.points).map(|k| self.time(k)).collect()
    }
}

/// Location and value of a maximum over a time window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowMax {
    pub time: f64,
    pub probability: f64,
}

/// Maximum of sampled values, optionally refined by one parabolic step.
///
/// Every interior local maximum gets a parabolic height estimate; the earliest
/// peak whose estimate ties the best one (within [`TIE_TOLERANCE`]) is chosen,
/// so a periodic signal reports its first peak rather than whichever copy the
/// grid happens to land closest to. The refined point is only accepted when
/// `evaluate` confirms it beats the local sample, and the reported probability
/// never drops below the largest sample.
pub fn max_of_samples<F>(window: &TimeWindow, samples: &[f64], evaluate: F) -> WindowMax
where
    F: Fn(f64) -> f64,
{
    let top = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let slack = TIE_TOLERANCE * top.abs().max(1.0);
    let first_top = samples.iter().position(|&p| p >= top - slack).unwrap_or(0);
    if !window.refine || samples.len() < 3 {
        return WindowMax {
            time: window.time(first_top),
            probability: top,
        };
    }

    // (index, estimated peak height, offset in steps)
    let mut peaks: Vec<(usize, f64, f64)> = Vec::new();
    for k in 1..samples.len() - 1 {
        let (left, mid, right) = (samples[k - 1], samples[k], samples[k + 1]);
        if mid < left || mid < right {
            continue;
        }
        let curvature = left - 2.0 * mid + right;
        if curvature < 0.0 {
            let offset = (0.5 * (left - right) / curvature).clamp(-1.0, 1.0);
            let height = mid - 0.125 * (left - right).powi(2) / curvature;
            peaks.push((k, height.max(mid), offset));
        }
    }
    let edge = [0, samples.len() - 1]
        .into_iter()
        .map(|k| (k, samples[k], 0.0));
    let best_height = peaks
        .iter()
        .copied()
        .chain(edge.clone())
        .map(|p| p.1)
        .fold(f64::NEG_INFINITY, f64::max);
    let slack = TIE_TOLERANCE * best_height.abs().max(1.0);
    let chosen = peaks
        .iter()
        .copied()
        .chain(edge)
        .filter(|p| p.1 >= best_height - slack)
        .min_by_key(|p| p.0)
        .expect("at least the edges are candidates");

    let (k, _, offset) = chosen;
    let mut out = WindowMax {
        time: window.time(k),
        probability: samples[k].max(top),
    };
    if offset != 0.0 {
        let t = window.time(k) + offset * window.step();
        let p = evaluate(t);
        if p > samples[k] {
            out = WindowMax {
                time: t,
                probability: p.max(top),
            };
        }
    }
    out
}

/// Coarse grid maximum of `evaluate` over the window, refined when requested.
pub fn max_over_window<F>(evaluate: F, window: &TimeWindow) -> Result<WindowMax>
where
    F: Fn(f64) -> f64,
{
    window.validate()?;
    let samples: Vec<f64> = window.times().into_iter().map(&evaluate).collect();
    Ok(max_of_samples(window, &samples, evaluate))
}

/// Sampled P(t) over a window together with its located maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferSeries {
    pub times: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub max_probability: f64,
    pub argmax_time: f64,
}

impl TransferSeries {
    /// `t_ps,probability` rows at 12 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_ps,probability\n");
        for (t, p) in self.times.iter().zip(&self.probabilities) {
            let _ = writeln!(out, "{},{}", sig12(*t), sig12(*p));
        }
        out
    }
}

fn check_pair(dim: usize, initial: usize, target: usize) -> Result<()> {
    for site in [initial, target] {
        if site >= dim {
            return Err(Error::SiteOutOfRange { site, dim });
        }
    }
    if initial == target {
        return Err(Error::SameSite(initial));
    }
    Ok(())
}

/// |⟨F| e^{−iHt} |I⟩|².
pub fn transfer_probability(h: &HermitianMatrix, initial: usize, target: usize, t: f64) -> Result<f64> {
    check_pair(h.dim(), initial, target)?;
    let spectrum = h.to_radps().eigh();
    Ok(spectrum.propagator_element(target, initial, t).norm_sqr())
}

/// Reduced density matrix of the network after tracing out the baths.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDensityMatrix {
    dim: usize,
    entries: Vec<C64>,
}

impl ReducedDensityMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim + col]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i).re).sum()
    }

    pub fn population(&self, site: usize) -> f64 {
        self.get(site, site).re
    }

    pub fn purity(&self) -> f64 {
        // Tr ρ² = Σ |ρ_ij|² for Hermitian ρ
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        HermitianMatrix::new(self.dim, self.entries.clone(), Default::default())
            .expect("density matrix is Hermitian by construction")
            .eigh()
            .eigenvalues()
            .to_vec()
    }

    /// |ρ_ab|² / (ρ_aa ρ_bb), or `None` when either population is below 1e-12.
    pub fn coherence(&self, a: usize, b: usize) -> Result<Option<f64>> {
        coherence(self, a, b)
    }
}

/// Population-normalized coherence between two sites.
pub fn coherence(rho: &ReducedDensityMatrix, a: usize, b: usize) -> Result<Option<f64>> {
    check_pair(rho.dim, a, b)?;
    let (pa, pb) = (rho.population(a), rho.population(b));
    if pa < 1e-12 || pb < 1e-12 {
        return Ok(None);
    }
    Ok(Some(rho.get(a, b).norm_sqr() / (pa * pb)))
}

#[derive(Debug, Clone)]
struct Member {
    weight: f64,
    spectrum: SpectralDecomposition,
}

/// Network plus baths at a fixed temperature, pre-diagonalized per sector.
#[derive(Debug, Clone)]
pub struct ThermalEnsemble {
    dim: usize,
    members: Vec<Member>,
}

impl ThermalEnsemble {
    pub fn new(network: &HermitianMatrix, baths: &[BathSpec], temperature: Temperature) -> Result<Self> {
        Self::with_limits(network, baths, temperature, SectorLimits::default())
    }

    pub fn with_limits(
        network: &HermitianMatrix,
        baths: &[BathSpec],
        temperature: Temperature,
        limits: SectorLimits,
    ) -> Result<Self> {
        let h = network.to_radps();
        let sectors = sector_product_with_limits(baths, h.dim(), temperature, limits)?;
        let members = sectors
            .into_iter()
            .filter(|s| s.weight > 0.0)
            .map(|s| {
                Ok(Member {
                    weight: s.weight,
                    spectrum: h.with_diagonal_shifts(&s.shifts)?.eigh(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ThermalEnsemble {
            dim: h.dim(),
            members,
        })
    }

    /// No baths: a single unit-weight sector.
    pub fn bare(network: &HermitianMatrix) -> Self {
        ThermalEnsemble {
            dim: network.dim(),
            members: vec![Member {
                weight: 1.0,
                spectrum: network.to_radps().eigh(),
            }],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of sectors with non-zero weight.
    pub fn sector_count(&self) -> usize {
        self.members.len()
    }

    pub fn transfer_probability(&self, initial: usize, target: usize, t: f64) -> Result<f64> {
        check_pair(self.dim, initial, target)?;
        Ok(self.transfer_unchecked(initial, target, t))
    }

    fn transfer_unchecked(&self, initial: usize, target: usize, t: f64) -> f64 {
        self.members
            .iter()
            .map(|m| m.weight * m.spectrum.propagator_element(target, initial, t).norm_sqr())
            .sum()
    }

    /// P(t) on every grid point of the window.
    pub fn transfer_samples(&self, initial: usize, target: usize, window: &TimeWindow) -> Result<Vec<f64>> {
        check_pair(self.dim, initial, target)?;
        window.validate()?;
        let n = self.dim;
        let dt = window.step();
        let mut out = vec![0.0; window.points];
        let mut phasors = vec![C64::new(0.0, 0.0); n];
        let mut coeffs = vec![C64::new(0.0, 0.0); n];
        let mut steps = vec![C64::new(0.0, 0.0); n];
        for m in &self.members {
            let s = &m.spectrum;
            for k in 0..n {
                coeffs[k] = s.component(target, k) * s.component(initial, k).conj();
                steps[k] = C64::from_polar(1.0, -s.eigenvalues()[k] * dt);
            }
            for (j, slot) in out.iter_mut().enumerate() {
                if j % REANCHOR_EVERY == 0 {
                    let t = window.time(j);
                    for k in 0..n {
                        phasors[k] = coeffs[k] * C64::from_polar(1.0, -s.eigenvalues()[k] * t);
                    }
                }
                let amp: C64 = phasors.iter().sum();
                *slot += m.weight * amp.norm_sqr();
                for k in 0..n {
                    phasors[k] *= steps[k];
                }
            }
        }
        Ok(out)
    }

    pub fn transfer_series(&self, initial: usize, target: usize, window: &TimeWindow) -> Result<TransferSeries> {
        let probabilities = self.transfer_samples(initial, target, window)?;
        let best = max_of_samples(window, &probabilities, |t| {
            self.transfer_unchecked(initial, target, t)
        });
        Ok(TransferSeries {
            times: window.times(),
            probabilities,
            max_probability: best.probability,
            argmax_time: best.time,
        })
    }

    pub fn max_transfer(&self, initial: usize, target: usize, window: &TimeWindow) -> Result<WindowMax> {
        let samples = self.transfer_samples(initial, target, window)?;
        Ok(max_of_samples(window, &samples, |t| {
            self.transfer_unchecked(initial, target, t)
        }))
    }

    /// Σ_sectors weight · |ψ_s(t)⟩⟨ψ_s(t)|.
    pub fn reduced_density_matrix(&self, psi0: &StateVector, t: f64) -> Result<ReducedDensityMatrix> {
        if psi0.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: psi0.dim(),
            });
        }
        if (psi0.norm() - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!(
                "initial state must be normalized, norm is {}",
                psi0.norm()
            )));
        }
        let n = self.dim;
        let mut entries = vec![C64::new(0.0, 0.0); n * n];
        for m in &self.members {
            let psi = m.spectrum.evolve(&psi0.amplitudes, t);
            for i in 0..n {
                for j in 0..n {
                    entries[i * n + j] += m.weight * psi[i] * psi[j].conj();
                }
            }
        }
        Ok(ReducedDensityMatrix { dim: n, entries })
    }
}

/// Sector-averaged transfer probability at one time.
pub fn thermal_transfer_probability(
    network: &NetworkSpec,
    baths: &[BathSpec],
    temperature: Temperature,
    initial: usize,
    target: usize,
    t: f64,
) -> Result<f64> {
    ThermalEnsemble::new(&network.hamiltonian(), baths, temperature)?.transfer_probability(initial, target, t)
}

pub fn reduced_density_matrix(
    network: &NetworkSpec,
    baths: &[BathSpec],
    temperature: Temperature,
    psi0: &StateVector,
    t: f64,
) -> Result<ReducedDensityMatrix> {
    ThermalEnsemble::new(&network.hamiltonian(), baths, temperature)?.reduced_density_matrix(psi0, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::fully_connected;
    use std::f64::consts::PI;

    #[test]
    fn symmetric_network_closed_form() {
        let (n, j) = (5usize, 1.3);
        let h = fully_connected(n, 0.4, j).unwrap();
        for k in 0..50 {
            let t = 0.137 * k as f64 + 0.01;
            let p = transfer_probability(&h, 0, 3, t).unwrap();
            let s = (n as f64 * j * t / 2.0).sin();
            let expect = 4.0 / (n * n) as f64 * s * s;
            assert!((p - expect).abs() < 1e-12, "t={t}: {p} vs {expect}");
        }
    }

    #[test]
    fn zero_time_and_bad_pairs() {
        let h = fully_connected(3, 0.0, 1.0).unwrap();
        assert!(transfer_probability(&h, 0, 2, 0.0).unwrap() < 1e-30);
        assert_eq!(transfer_probability(&h, 1, 1, 0.3), Err(Error::SameSite(1)));
        assert_eq!(
            transfer_probability(&h, 0, 3, 0.3),
            Err(Error::SiteOutOfRange { site: 3, dim: 3 })
        );
    }

    #[test]
    fn detuned_dimer_maximum() {
        let (j, delta) = (2.0, 1.5);
        let h = HermitianMatrix::from_real_symmetric(2, &[-delta, j, j, delta], Default::default()).unwrap();
        let best = max_over_window(|t| transfer_probability(&h, 0, 1, t).unwrap(), &TimeWindow::new(2.0)).unwrap();
        let expect = j * j / (j * j + delta * delta);
        assert!((best.probability - expect).abs() < 1e-9);
    }

    #[test]
    fn window_on_symmetric_network() {
        let h = fully_connected(10, 0.0, 10.0).unwrap();
        let ens = ThermalEnsemble::bare(&h);
        let best = ens.max_transfer(0, 1, &TimeWindow::new(1.0)).unwrap();
        assert!((best.probability - 0.04).abs() < 1e-6);
        assert!((best.time - PI / 100.0).abs() < 1e-5, "{best:?}");
    }

    #[test]
    fn constant_evaluator() {
        let best = max_over_window(|_| 0.25, &TimeWindow::with_points(3.0, 7)).unwrap();
        assert_eq!(best, WindowMax { time: 0.0, probability: 0.25 });
    }

    #[test]
    fn refinement_never_lowers_the_grid_max() {
        let w = TimeWindow::with_points(1.0, 11);
        let f = |t: f64| (7.3 * t).sin().powi(2);
        let coarse = max_over_window(f, &w.without_refinement()).unwrap();
        let fine = max_over_window(f, &w).unwrap();
        assert!(fine.probability >= coarse.probability);
        assert!((fine.time - PI / 2.0 / 7.3).abs() < (coarse.time - PI / 2.0 / 7.3).abs());
    }

    #[test]
    fn samples_match_direct_evaluation() {
        let h = fully_connected(4, 0.0, 3.0).unwrap();
        let baths = [BathSpec::new(2, 4, 50.0, 8.0)];
        let ens = ThermalEnsemble::new(&h, &baths, Temperature::Kelvin(300.0)).unwrap();
        let w = TimeWindow::with_points(1.0, 2001);
        let samples = ens.transfer_samples(0, 1, &w).unwrap();
        for k in (0..2001).step_by(97) {
            let direct = ens.transfer_probability(0, 1, w.time(k)).unwrap();
            assert!((samples[k] - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn series_csv() {
        let h = fully_connected(3, 0.0, 1.0).unwrap();
        let s = ThermalEnsemble::bare(&h)
            .transfer_series(0, 1, &TimeWindow::with_points(1.0, 3))
            .unwrap();
        let csv = s.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t_ps,probability"));
        assert!(lines.next().unwrap().starts_with("0,"));
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn coherence_cases() {
        let h = fully_connected(3, 0.0, 1.0).unwrap();
        let psi = StateVector::site(3, 0).unwrap();
        let rho = ThermalEnsemble::bare(&h).reduced_density_matrix(&psi, 0.4).unwrap();
        assert!((rho.coherence(0, 1).unwrap().unwrap() - 1.0).abs() < 1e-12);

        let mixed = ReducedDensityMatrix {
            dim: 2,
            entries: vec![C64::new(0.5, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.5, 0.0)],
        };
        assert_eq!(coherence(&mixed, 0, 1).unwrap(), Some(0.0));

        let rho0 = ThermalEnsemble::bare(&h).reduced_density_matrix(&psi, 0.0).unwrap();
        assert_eq!(rho0.coherence(0, 1).unwrap(), None);
        assert!(rho0.coherence(1, 1).is_err());
    }

    #[test]
    fn rejects_unnormalized_state() {
        let h = fully_connected(2, 0.0, 1.0).unwrap();
        let psi = StateVector::new(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]);
        assert!(ThermalEnsemble::bare(&h).reduced_density_matrix(&psi, 0.1).is_err());
    }
}
