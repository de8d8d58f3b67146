//! Benchmark fixtures shared by the criterion targets.

use anyladder_core::{BasisTable, ModelParams};
use std::f64::consts::PI;

/// Reference model at `θ = 0.4π`, `J_p = 0.04` with its basis.
pub fn anyon_fixture(l: usize, n: usize) -> (ModelParams, BasisTable) {
    let p = ModelParams::reference(l, n).with_theta(0.4 * PI).with_jp(0.04);
    let b = p.basis().expect("reference sector is non-empty");
    (p, b)
}
