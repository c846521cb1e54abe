//! Coupling scans on homogeneous networks: baths on the end sites
//! (a γ₁×γ₂ surface) or on the intermediate sites (one shared γ).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::format::sig12;
use crate::linalg::HermitianMatrix;
use crate::spin_bath::{BathSpec, Temperature};
use crate::transport::{ThermalEnsemble, TimeWindow, WindowMax};

/// Thermal bath parameters shared by every bath of a scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSettings {
    pub alpha: f64,
    pub temperature: Temperature,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub gamma1: f64,
    pub gamma2: f64,
    pub best: WindowMax,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub gamma: f64,
    pub best: WindowMax,
}

fn window_max(
    network: &HermitianMatrix,
    baths: &[BathSpec],
    settings: BathSettings,
    initial: usize,
    target: usize,
    window: &TimeWindow,
) -> Result<WindowMax> {
    ThermalEnsemble::new(network, baths, settings.temperature)?.max_transfer(initial, target, window)
}

/// Window maximum over a γ₁×γ₂ grid with one bath on `initial` (γ₁) and one
/// on `target` (γ₂). Row-major in γ₁.
#[allow(clippy::too_many_arguments)]
pub fn end_site_surface(
    network: &HermitianMatrix,
    initial: usize,
    target: usize,
    spins: [u32; 2],
    settings: BathSettings,
    gammas1: &[f64],
    gammas2: &[f64],
    window: &TimeWindow,
) -> Result<Vec<SurfacePoint>> {
    if gammas1.is_empty() || gammas2.is_empty() {
        return Err(Error::invalid("γ grid is empty"));
    }
    let pairs: Vec<(f64, f64)> = gammas1
        .iter()
        .flat_map(|&a| gammas2.iter().map(move |&b| (a, b)))
        .collect();
    pairs
        .par_iter()
        .map(|&(g1, g2)| {
            let baths = [
                BathSpec::new(initial, spins[0], settings.alpha, g1),
                BathSpec::new(target, spins[1], settings.alpha, g2),
            ];
            Ok(SurfacePoint {
                gamma1: g1,
                gamma2: g2,
                best: window_max(network, &baths, settings, initial, target, window)?,
            })
        })
        .collect()
}

/// Window maximum against a single γ shared by baths on `sites`.
#[allow(clippy::too_many_arguments)]
pub fn shared_gamma_scan(
    network: &HermitianMatrix,
    initial: usize,
    target: usize,
    sites: &[usize],
    spins: &[u32],
    settings: BathSettings,
    gammas: &[f64],
    window: &TimeWindow,
) -> Result<Vec<ScanPoint>> {
    if sites.len() != spins.len() {
        return Err(Error::invalid(format!(
            "{} bath sites but {} spin counts",
            sites.len(),
            spins.len()
        )));
    }
    if gammas.is_empty() {
        return Err(Error::invalid("γ grid is empty"));
    }
    gammas
        .par_iter()
        .map(|&g| {
            let baths: Vec<BathSpec> = sites
                .iter()
                .zip(spins)
                .map(|(&s, &n)| BathSpec::new(s, n, settings.alpha, g))
                .collect();
            Ok(ScanPoint {
                gamma: g,
                best: window_max(network, &baths, settings, initial, target, window)?,
            })
        })
        .collect()
}

/// Sites strictly between the first and last, i.e. everything except I=0, F=N-1.
pub fn intermediate_sites(sites: usize) -> Vec<usize> {
    (1..sites.saturating_sub(1)).collect()
}

/// Highest point, earliest on ties.
pub fn surface_peak(points: &[SurfacePoint]) -> Option<SurfacePoint> {
    points
        .iter()
        .copied()
        .fold(None, |acc: Option<SurfacePoint>, p| match acc {
            Some(a) if a.best.probability >= p.best.probability => Some(a),
            _ => Some(p),
        })
}

pub fn scan_peak(points: &[ScanPoint]) -> Option<ScanPoint> {
    points.iter().copied().fold(None, |acc: Option<ScanPoint>, p| match acc {
        Some(a) if a.best.probability >= p.best.probability => Some(a),
        _ => Some(p),
    })
}

pub fn surface_csv(points: &[SurfacePoint]) -> String {
    let mut out = String::from("gamma1_radps,gamma2_radps,max_probability,argmax_time_ps\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{},{}\n",
            sig12(p.gamma1),
            sig12(p.gamma2),
            sig12(p.best.probability),
            sig12(p.best.time)
        ));
    }
    out
}

pub fn scan_csv(points: &[ScanPoint]) -> String {
    let mut out = String::from("gamma_radps,max_probability,argmax_time_ps\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{}\n",
            sig12(p.gamma),
            sig12(p.best.probability),
            sig12(p.best.time)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::fully_connected;

    fn settings() -> BathSettings {
        BathSettings {
            alpha: 150.0,
            temperature: Temperature::Kelvin(300.0),
        }
    }

    #[test]
    fn zero_coupling_corner_is_bare() {
        let h = fully_connected(4, 0.0, 10.0).unwrap();
        let w = TimeWindow::new(0.5);
        let s = end_site_surface(&h, 0, 3, [2, 2], settings(), &[0.0, 5.0], &[0.0], &w).unwrap();
        assert_eq!(s.len(), 2);
        assert!((s[0].best.probability - 4.0 / 16.0).abs() < 1e-9);
        assert_eq!(s[1].gamma1, 5.0);
    }

    #[test]
    fn intermediate_layout() {
        assert_eq!(intermediate_sites(4), vec![1, 2]);
        assert!(intermediate_sites(2).is_empty());
        let h = fully_connected(4, 0.0, 10.0).unwrap();
        let w = TimeWindow::new(0.5);
        let err = shared_gamma_scan(&h, 0, 3, &[1, 2], &[2], settings(), &[1.0], &w);
        assert!(err.is_err());
        let pts = shared_gamma_scan(&h, 0, 3, &[1, 2], &[2, 8], settings(), &[0.0, 40.0], &w).unwrap();
        assert!(pts[1].best.probability > pts[0].best.probability);
        assert_eq!(scan_peak(&pts).unwrap().gamma, 40.0);
        assert!(scan_csv(&pts).starts_with("gamma_radps,max_probability,argmax_time_ps\n0,0.25,"));
    }

    #[test]
    fn peak_prefers_first() {
        let w = WindowMax { time: 0.0, probability: 0.5 };
        let pts = [
            SurfacePoint { gamma1: 1.0, gamma2: 0.0, best: w },
            SurfacePoint { gamma1: 2.0, gamma2: 0.0, best: w },
        ];
        assert_eq!(surface_peak(&pts).unwrap().gamma1, 1.0);
        assert!(surface_peak(&[]).is_none());
    }
}
