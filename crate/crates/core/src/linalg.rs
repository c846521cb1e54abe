//! Dense complex-Hermitian kernels: eigendecomposition and unitary propagation.
//!
//! All matrices in this crate are small (a few dozen sites at most), so the
//! eigensolver is a plain cyclic Jacobi sweep and the propagator is built from
//! the spectral decomposition, which keeps evolution unitary up to eigensolver
//! round-off.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::units::EnergyUnit;

pub type C64 = Complex64;

/// Absolute Hermiticity tolerance, scaled by the largest entry magnitude.
pub const HERMITIAN_TOL: f64 = 1e-12;

const JACOBI_MAX_SWEEPS: usize = 64;

/// Dense Hermitian matrix stored row-major, tagged with its energy unit.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    entries: Vec<C64>,
    unit: EnergyUnit,
}

impl HermitianMatrix {
    /// Validates Hermiticity within [`HERMITIAN_TOL`] and symmetrizes exactly.
    pub fn new(dim: usize, entries: Vec<C64>, unit: EnergyUnit) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("matrix dimension must be at least 1"));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        let scale = entries.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
        let tolerance = HERMITIAN_TOL * scale;
        let mut worst = (0, 0, 0.0_f64);
        for i in 0..dim {
            for j in i..dim {
                let dev = (entries[i * dim + j] - entries[j * dim + i].conj()).norm();
                if dev > worst.2 || !dev.is_finite() {
                    worst = (i, j, dev);
                }
            }
        }
        if worst.2.is_nan() || worst.2 > tolerance {
            return Err(Error::NotHermitian {
                row: worst.0,
                col: worst.1,
                deviation: worst.2,
                tolerance,
            });
        }
        let mut m = HermitianMatrix { dim, entries, unit };
        m.symmetrize();
        Ok(m)
    }

    pub fn from_real_symmetric(dim: usize, entries: &[f64], unit: EnergyUnit) -> Result<Self> {
        Self::new(
            dim,
            entries.iter().map(|&x| C64::new(x, 0.0)).collect(),
            unit,
        )
    }

    pub fn from_diagonal(diagonal: &[f64], unit: EnergyUnit) -> Result<Self> {
        let dim = diagonal.len();
        let mut entries = vec![C64::new(0.0, 0.0); dim * dim];
        for (i, &d) in diagonal.iter().enumerate() {
            entries[i * dim + i] = C64::new(d, 0.0);
        }
        Self::new(dim, entries, unit)
    }

    fn symmetrize(&mut self) {
        let n = self.dim;
        for i in 0..n {
            self.entries[i * n + i].im = 0.0;
            for j in (i + 1)..n {
                let avg = 0.5 * (self.entries[i * n + j] + self.entries[j * n + i].conj());
                self.entries[i * n + j] = avg;
                self.entries[j * n + i] = avg.conj();
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn unit(&self) -> EnergyUnit {
        self.unit
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i).re).collect()
    }

    /// Same matrix expressed in another energy unit.
    pub fn to_unit(&self, unit: EnergyUnit) -> HermitianMatrix {
        let f = self.unit.factor_to(unit);
        HermitianMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * f).collect(),
            unit,
        }
    }

    pub fn to_radps(&self) -> HermitianMatrix {
        self.to_unit(EnergyUnit::RadPerPs)
    }

    /// Adds `shifts[i]` to the i-th diagonal entry.
    pub fn with_diagonal_shifts(&self, shifts: &[f64]) -> Result<HermitianMatrix> {
        if shifts.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: shifts.len(),
            });
        }
        let mut out = self.clone();
        for (i, s) in shifts.iter().enumerate() {
            out.entries[i * self.dim + i].re += s;
        }
        Ok(out)
    }

    pub fn eigh(&self) -> SpectralDecomposition {
        eigh(self)
    }

    /// Plain matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim;
        (0..n)
            .map(|i| (0..n).map(|j| self.entries[i * n + j] * v[j]).sum())
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    /// Row-major `dim × dim`; column `k` is the eigenvector of `eigenvalues[k]`.
    eigenvectors: Vec<C64>,
    unit: EnergyUnit,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn unit(&self) -> EnergyUnit {
        self.unit
    }

    /// Component `site` of eigenvector `k`, i.e. ⟨site|λ_k⟩.
    pub fn component(&self, site: usize, k: usize) -> C64 {
        self.eigenvectors[site * self.dim() + k]
    }

    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        (0..self.dim()).map(|i| self.component(i, k)).collect()
    }

    /// V · diag(λ) · V†.
    pub fn reconstruct(&self) -> Vec<C64> {
        let n = self.dim();
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = (0..n)
                    .map(|k| self.component(i, k) * self.eigenvalues[k] * self.component(j, k).conj())
                    .sum();
            }
        }
        out
    }

    /// Largest entry of |V†V − I|.
    pub fn orthonormality_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for a in 0..n {
            for b in 0..n {
                let dot: C64 = (0..n)
                    .map(|i| self.component(i, a).conj() * self.component(i, b))
                    .sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).norm());
            }
        }
        worst
    }

    /// ⟨to| e^{−iHt} |from⟩. Eigenvalues must be in rad/ps.
    pub fn propagator_element(&self, to: usize, from: usize, t: f64) -> C64 {
        (0..self.dim())
            .map(|k| {
                self.component(to, k)
                    * self.component(from, k).conj()
                    * C64::from_polar(1.0, -self.eigenvalues[k] * t)
            })
            .sum()
    }

    /// e^{−iHt} ψ computed as V · e^{−iλt} · V† ψ. Eigenvalues must be in rad/ps.
    pub fn evolve(&self, psi: &[C64], t: f64) -> Vec<C64> {
        let n = self.dim();
        let coeffs: Vec<C64> = (0..n)
            .map(|k| {
                let overlap: C64 = (0..n).map(|i| self.component(i, k).conj() * psi[i]).sum();
                overlap * C64::from_polar(1.0, -self.eigenvalues[k] * t)
            })
            .collect();
        (0..n)
            .map(|i| (0..n).map(|k| self.component(i, k) * coeffs[k]).sum())
            .collect()
    }
}

/// Normalized (for physical states) complex amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Self {
        StateVector { amplitudes }
    }

    /// Site basis state |site⟩.
    pub fn site(dim: usize, site: usize) -> Result<Self> {
        if site >= dim {
            return Err(Error::SiteOutOfRange { site, dim });
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[site] = C64::new(1.0, 0.0);
        Ok(StateVector { amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        StateVector {
            amplitudes: self.amplitudes.iter().map(|z| z / n).collect(),
        }
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn population(&self, site: usize) -> f64 {
        self.amplitudes[site].norm_sqr()
    }
}

/// Cyclic Jacobi eigendecomposition of a Hermitian matrix.
///
/// Each rotation first removes the phase of the pivot element and then applies
/// the real symmetric Jacobi rotation, i.e. `A ← J† A J` with
/// `J_pp = J_qq = c`, `J_pq = s·e^{iφ}`, `J_qp = −s·e^{−iφ}`.
pub fn eigh(h: &HermitianMatrix) -> SpectralDecomposition {
    let n = h.dim;
    let mut a = h.entries.clone();
    let mut v = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        v[i * n + i] = C64::new(1.0, 0.0);
    }

    let total: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let threshold = (f64::EPSILON * f64::EPSILON) * total.max(f64::MIN_POSITIVE);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j].norm_sqr())
            .sum();
        if off <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let g = apq.norm();
                if g == 0.0 {
                    continue;
                }
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                // skip rotations that cannot change the diagonal in floating point
                if g < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
                    a[p * n + q] = C64::new(0.0, 0.0);
                    a[q * n + p] = C64::new(0.0, 0.0);
                    continue;
                }
                let phase = apq / g;
                let theta = (aqq - app) / (2.0 * g);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let sp = phase * s; // s·e^{iφ}
                let spc = sp.conj(); // s·e^{−iφ}

                // A ← A J
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * c - akq * spc;
                    a[k * n + q] = akp * sp + akq * c;
                }
                // A ← J† A
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = apk * c - aqk * sp;
                    a[q * n + k] = apk * spc + aqk * c;
                }
                a[p * n + q] = C64::new(0.0, 0.0);
                a[q * n + p] = C64::new(0.0, 0.0);
                a[p * n + p].im = 0.0;
                a[q * n + q].im = 0.0;
                // V ← V J
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = vkp * c - vkq * spc;
                    v[k * n + q] = vkp * sp + vkq * c;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[x * n + x].re.total_cmp(&a[y * n + y].re));
    let eigenvalues = order.iter().map(|&k| a[k * n + k].re).collect();
    let mut eigenvectors = vec![C64::new(0.0, 0.0); n * n];
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            eigenvectors[i * n + dst] = v[i * n + src];
        }
    }
    SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        unit: h.unit,
    }
}

/// ψ(t) = e^{−iHt} ψ0 with t in ps. The Hamiltonian is converted to rad/ps first.
pub fn propagate(h: &HermitianMatrix, psi0: &StateVector, t: f64) -> Result<StateVector> {
    if psi0.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: psi0.dim(),
        });
    }
    if !t.is_finite() {
        return Err(Error::invalid(format!("propagation time must be finite, got {t}")));
    }
    let spectrum = h.to_radps().eigh();
    Ok(StateVector::new(spectrum.evolve(&psi0.amplitudes, t)))
}
