//! Quantum-noise dynamics of a phonon laser built from an active-passive
//! pair of coupled optical resonators and one mechanical mode.
//!
//! The linearized Langevin system for `v = (o1, o1†, o2, o2†, b, b†)`, with
//! `o1,2 = (a1 ± a2)/√2` the optical supermodes, is solved in the
//! interaction picture. The supermode populations are split into initial
//! state, coherent drive and noise parts; their difference drives the
//! semiclassical phonon-laser equations.
//!
//! ```no_run
//! use supermode::{inversion_series, LinearSystem, Method, SystemParams, TimeGrid};
//!
//! let params = SystemParams::blue_detuned_reference(0.5);
//! let grid = TimeGrid::auto(&params, params.lifetime()).unwrap();
//! let series = inversion_series(&LinearSystem::new(&params), &grid, Method::Moments).unwrap();
//! println!("dN(T) = {:e}", series.inversion(series.last()));
//! ```

pub mod drive;
pub mod error;
pub mod grid;
pub mod laser;
pub mod linear;
pub mod moments;
pub mod params;
pub mod populations;
pub mod propagator;
pub mod spectral;
pub mod types;
pub mod validity;

pub use drive::{DriveEnvelope, DriveRegime};
pub use error::{Error, Result};
pub use grid::TimeGrid;
pub use laser::{amplification_ratio, integrate_laser, threshold_scan, LaserSetup, LaserTrajectory, Threshold};
pub use linear::{LinearSystem, NoiseMode, SignConvention};
pub use moments::{evolve_moments, MomentState};
pub use params::{ParamFlags, SystemParams};
pub use populations::{inversion_series, CrossCheck, Method, PopulationParts, PopulationSeries};
pub use propagator::{evolve_product, ProductMethod, PropagatorGrid};
pub use spectral::{classical_response, mode_overlap, pt_eigensystem, ClassicalResponse, PtEigensystem, PtRegime};
pub use types::{Mat6, Vec6, C64};
pub use validity::approximation_bound;
