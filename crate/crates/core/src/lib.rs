//! Single-excitation transport through fully connected quantum networks whose
//! sites dephase against finite spin baths.

pub mod analytic;
pub mod error;
pub mod fmo;
pub mod format;
pub mod linalg;
pub mod network;
pub mod oracle;
pub mod scan;
pub mod spin_bath;
pub mod transport;
pub mod units;

pub use error::{Error, Result};
pub use linalg::{eigh, propagate, HermitianMatrix, SpectralDecomposition, StateVector, C64};
pub use network::{blocked_fully_connected, fmo_hamiltonian, fully_connected, Coupling, NetworkSpec};
pub use spin_bath::{BathSpec, SectorWeight, Temperature};
pub use transport::{
    max_over_window, transfer_probability, ThermalEnsemble, TimeWindow, TransferSeries, WindowMax,
};
pub use units::{alpha_over_kbt, cm_to_radps, radps_to_cm, EnergyUnit, UnitConstants};
