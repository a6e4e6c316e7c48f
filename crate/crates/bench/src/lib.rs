//! Fixtures shared by the benchmarks.

use supermode::{LinearSystem, SystemParams, TimeGrid};

/// Blue-detuned reference system at gain `g` with an automatic grid over `t_end`.
pub fn reference(g: f64, t_end: f64) -> (LinearSystem, TimeGrid) {
    let p = SystemParams::blue_detuned_reference(g);
    let grid = TimeGrid::auto(&p, t_end).expect("reference grid");
    (LinearSystem::new(&p), grid)
}
