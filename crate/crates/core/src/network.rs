//! Network Hamiltonians in the single-excitation subspace.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;
use crate::units::{cm_to_radps, EnergyUnit};

/// Inter-site coupling of a network.
#[derive(Debug, Clone, PartialEq)]
pub enum Coupling {
    /// Same coupling J between every pair of sites.
    Homogeneous(f64),
    /// Full real symmetric coupling matrix, row-major, zero diagonal.
    Matrix(Vec<f64>),
}

/// Site energies and couplings of a network, in rad/ps.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    site_energies: Vec<f64>,
    coupling: Coupling,
}

impl NetworkSpec {
    pub fn new(site_energies: Vec<f64>, coupling: Coupling) -> Result<Self> {
        let n = site_energies.len();
        if n < 2 {
            return Err(Error::invalid(format!("a network needs at least 2 sites, got {n}")));
        }
        if let Coupling::Matrix(m) = &coupling {
            if m.len() != n * n {
                return Err(Error::DimensionMismatch {
                    expected: n * n,
                    found: m.len(),
                });
            }
            for i in 0..n {
                if m[i * n + i] != 0.0 {
                    return Err(Error::invalid(format!(
                        "coupling matrix diagonal must be zero, entry ({i},{i}) is {}",
                        m[i * n + i]
                    )));
                }
                for j in (i + 1)..n {
                    if m[i * n + j] != m[j * n + i] {
                        return Err(Error::invalid(format!(
                            "coupling matrix is not symmetric at ({i},{j})"
                        )));
                    }
                }
            }
        }
        Ok(NetworkSpec {
            site_energies,
            coupling,
        })
    }

    /// Homogeneous fully connected network with equal site energies.
    pub fn homogeneous(sites: usize, energy: f64, coupling: f64) -> Result<Self> {
        Self::new(vec![energy; sites], Coupling::Homogeneous(coupling))
    }

    /// The seven-site FMO network converted to rad/ps.
    pub fn fmo() -> Self {
        let h = fmo_hamiltonian();
        let n = h.dim();
        let site_energies = h.diagonal().into_iter().map(cm_to_radps).collect();
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    m[i * n + j] = cm_to_radps(h.get(i, j).re);
                }
            }
        }
        NetworkSpec {
            site_energies,
            coupling: Coupling::Matrix(m),
        }
    }

    pub fn sites(&self) -> usize {
        self.site_energies.len()
    }

    pub fn site_energies(&self) -> &[f64] {
        &self.site_energies
    }

    pub fn coupling(&self) -> &Coupling {
        &self.coupling
    }

    pub fn hamiltonian(&self) -> HermitianMatrix {
        let n = self.sites();
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                m[i * n + j] = if i == j {
                    self.site_energies[i]
                } else {
                    match &self.coupling {
                        Coupling::Homogeneous(j_c) => *j_c,
                        Coupling::Matrix(c) => c[i * n + j],
                    }
                };
            }
        }
        HermitianMatrix::from_real_symmetric(n, &m, EnergyUnit::RadPerPs)
            .expect("validated network is symmetric")
    }
}

/// ε on every site, J between every pair.
pub fn fully_connected(sites: usize, energy: f64, coupling: f64) -> Result<HermitianMatrix> {
    Ok(NetworkSpec::homogeneous(sites, energy, coupling)?.hamiltonian())
}

/// Homogeneous coupling J with the diagonal constant within consecutive blocks.
pub fn blocked_fully_connected(
    block_sizes: &[usize],
    block_energies: &[f64],
    coupling: f64,
) -> Result<HermitianMatrix> {
    if block_sizes.len() != block_energies.len() {
        return Err(Error::invalid(format!(
            "{} block sizes but {} block energies",
            block_sizes.len(),
            block_energies.len()
        )));
    }
    if let Some(pos) = block_sizes.iter().position(|&k| k == 0) {
        return Err(Error::invalid(format!("block {pos} is empty")));
    }
    let energies: Vec<f64> = block_sizes
        .iter()
        .zip(block_energies)
        .flat_map(|(&k, &e)| std::iter::repeat_n(e, k))
        .collect();
    Ok(NetworkSpec::new(energies, Coupling::Homogeneous(coupling))?.hamiltonian())
}

/// Excitonic Hamiltonian of one FMO monomer (C. tepidum), in cm⁻¹ relative
/// to 12 210 cm⁻¹.
#[rustfmt::skip]
pub const FMO_CM: [[f64; 7]; 7] = [
    [200.0, -96.0,   5.0,  -4.4,   4.7, -12.6,  -6.2],
    [-96.0, 320.0,  33.1,   6.8,   4.5,   7.4,  -0.3],
    [  5.0,  33.1,   0.0, -51.1,   0.8,  -8.4,   7.6],
    [ -4.4,   6.8, -51.1, 110.0, -76.6, -14.2, -67.0],
    [  4.7,   4.5,   0.8, -76.6, 270.0,  78.3,  -0.1],
    [-12.6,   7.4,  -8.4, -14.2,  78.3, 420.0,  38.3],
    [ -6.2,  -0.3,   7.6, -67.0,  -0.1,  38.3, 230.0],
];

pub fn fmo_hamiltonian() -> HermitianMatrix {
    let flat: Vec<f64> = FMO_CM.iter().flatten().copied().collect();
    HermitianMatrix::from_real_symmetric(7, &flat, EnergyUnit::Wavenumber)
        .expect("FMO matrix is symmetric")
}

/// FMO matrix as CSV, seven rows, cm⁻¹, printed precision.
pub fn fmo_csv() -> String {
    let mut out = String::new();
    for row in FMO_CM.iter() {
        let cells: Vec<String> = row.iter().map(|x| format!("{x}")).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimer_from_fully_connected() {
        let h = fully_connected(2, 0.0, 1.0).unwrap();
        let flat: Vec<f64> = h.entries().iter().map(|z| z.re).collect();
        assert_eq!(flat, vec![0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn homogeneous_entries() {
        let h = fully_connected(3, 5.0, 2.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 5.0 } else { 2.0 };
                assert_eq!(h.get(i, j).re, expect);
            }
        }
        assert!(fully_connected(1, 0.0, 1.0).is_err());
    }

    #[test]
    fn ten_site_spectrum() {
        let s = fully_connected(10, 0.0, 1.0).unwrap().eigh();
        for &l in &s.eigenvalues()[..9] {
            assert!((l + 1.0).abs() < 1e-10);
        }
        assert!((s.eigenvalues()[9] - 9.0).abs() < 1e-10);
    }

    #[test]
    fn appendix_blocks() {
        let h = blocked_fully_connected(&[21, 6, 1], &[0.0, 63.0 / 5.0, 112.0 / 5.0], 1.0).unwrap();
        assert_eq!(h.dim(), 28);
        let d = h.diagonal();
        assert!(d[..21].iter().all(|&x| x == 0.0));
        assert!(d[21..27].iter().all(|&x| (x - 12.6).abs() < 1e-12));
        assert!((d[27] - 22.4).abs() < 1e-12);
        assert!((0..28).all(|i| (0..28).all(|j| i == j || h.get(i, j).re == 1.0)));
    }

    #[test]
    fn single_block_and_dimer_blocks() {
        assert_eq!(
            blocked_fully_connected(&[5], &[1.5], 0.5).unwrap(),
            fully_connected(5, 1.5, 0.5).unwrap()
        );
        let d = blocked_fully_connected(&[1, 1], &[0.3, -0.7], 2.0).unwrap();
        assert_eq!(d.diagonal(), vec![0.3, -0.7]);
        assert_eq!(d.get(0, 1).re, 2.0);
        assert!(blocked_fully_connected(&[1, 2], &[0.0], 1.0).is_err());
        assert!(blocked_fully_connected(&[1, 0], &[0.0, 1.0], 1.0).is_err());
    }

    #[test]
    fn fmo_entries() {
        let h = fmo_hamiltonian();
        assert_eq!(h.unit(), EnergyUnit::Wavenumber);
        assert_eq!(h.get(0, 1).re, -96.0);
        assert_eq!(h.get(2, 2).re, 0.0);
        assert_eq!(h.get(3, 4).re, -76.6);
        assert_eq!(h.get(4, 5).re, 78.3);
        assert_eq!(h.diagonal(), vec![200.0, 320.0, 0.0, 110.0, 270.0, 420.0, 230.0]);
        for i in 0..7 {
            for j in 0..7 {
                assert_eq!(h.get(i, j), h.get(j, i));
            }
        }
        assert_eq!(fmo_hamiltonian(), h);
    }

    #[test]
    fn fmo_csv_layout() {
        let csv = fmo_csv();
        let rows: Vec<&str> = csv.lines().collect();
        assert_eq!(rows.len(), 7);
        assert_eq!(rows[0], "200,-96,5,-4.4,4.7,-12.6,-6.2");
        assert_eq!(rows[4].split(',').nth(5), Some("78.3"));
    }

    #[test]
    fn fmo_spec_matches_matrix() {
        let spec = NetworkSpec::fmo();
        let a = spec.hamiltonian();
        let b = fmo_hamiltonian().to_radps();
        for (x, y) in a.entries().iter().zip(b.entries()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn coupling_matrix_validation() {
        assert!(NetworkSpec::new(vec![0.0, 0.0], Coupling::Matrix(vec![0.0, 1.0, 2.0, 0.0])).is_err());
        assert!(NetworkSpec::new(vec![0.0, 0.0], Coupling::Matrix(vec![1.0, 1.0, 1.0, 0.0])).is_err());
        assert!(NetworkSpec::new(vec![0.0, 0.0], Coupling::Matrix(vec![0.0, 1.0])).is_err());
    }
}
