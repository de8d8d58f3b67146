//! Built-in experiment presets, stored as TOML so they merge with config
//! files and overrides the same way.
//!
//! Unless a preset says otherwise the model is `L = 10`, `N = 2`,
//! `J = e^α = 1/√2`, `U = 16`, `μ = 4`.

#[derive(Clone, Copy, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub body: &'static str,
}

const PRESETS: &[Preset] = &[
    Preset {
        name: "fig2a",
        description: "complex-eigenvalue counts vs Jp, U=16, mu=4",
        body: r#"
kind = "counts_vs_jp"
[grid]
theta_pi = [0.0, 0.4, 0.8, 1.0]
jp = { scale = "log", min = 1e-5, max = 1.0, points = 61 }
"#,
    },
    Preset {
        name: "fig2b",
        description: "complex-eigenvalue counts vs Jp, U=4, mu=0.2",
        body: r#"
kind = "counts_vs_jp"
[model]
u = 4.0
mu = 0.2
[grid]
theta_pi = [0.0, 0.4, 0.8, 1.0]
jp = { scale = "log", min = 1e-5, max = 1.0, points = 61 }
"#,
    },
    Preset {
        name: "fig2b_mu0",
        description: "complex-eigenvalue counts vs Jp, U=4, mu=0",
        body: r#"
kind = "counts_vs_jp"
[model]
u = 4.0
mu = 0.0
[grid]
theta_pi = [0.0, 0.4, 0.8, 1.0]
jp = { scale = "log", min = 1e-5, max = 1.0, points = 61 }
"#,
    },
    Preset {
        name: "fig2c",
        description: "Max Im E over (theta, Jp), U=16, mu=4",
        body: r#"
kind = "maxim_heatmap"
[grid]
theta_pi = [0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 1.0]
jp = { scale = "log", min = 1e-5, max = 1.0, points = 41 }
"#,
    },
    Preset {
        name: "fig2d",
        description: "onset threshold Jp* vs L, U=16, mu=4",
        body: r#"
kind = "threshold_vs_L"
[grid]
theta_pi = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
L = [4, 5, 6, 7, 8, 9, 10]
jp = { scale = "log", min = 1e-6, max = 1.0, points = 61 }
"#,
    },
    Preset {
        name: "fig2e",
        description: "Max Im E over (theta, Jp), U=4, mu=0.2",
        body: r#"
kind = "maxim_heatmap"
[model]
u = 4.0
mu = 0.2
[grid]
theta_pi = [0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 1.0]
jp = { scale = "log", min = 1e-5, max = 1.0, points = 41 }
"#,
    },
    Preset {
        name: "fig2e_mu0",
        description: "Max Im E over (theta, Jp), U=4, mu=0",
        body: r#"
kind = "maxim_heatmap"
[model]
u = 4.0
mu = 0.0
[grid]
theta_pi = [0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 1.0]
jp = { scale = "log", min = 1e-5, max = 1.0, points = 41 }
"#,
    },
    Preset {
        name: "fig2f",
        description: "onset threshold Jp* vs L, U=4, mu=0.2",
        body: r#"
kind = "threshold_vs_L"
[model]
u = 4.0
mu = 0.2
[grid]
theta_pi = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
L = [4, 5, 6, 7, 8, 9, 10]
jp = { scale = "log", min = 1e-6, max = 1.0, points = 61 }
"#,
    },
    Preset {
        name: "fig2f_mu0",
        description: "onset threshold Jp* vs L, U=4, mu=0",
        body: r#"
kind = "threshold_vs_L"
[model]
u = 4.0
mu = 0.0
[grid]
theta_pi = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
L = [4, 5, 6, 7, 8, 9, 10]
jp = { scale = "log", min = 1e-6, max = 1.0, points = 61 }
"#,
    },
    Preset {
        name: "fig3",
        description: "full spectra vs Jp with max-Im state tracking",
        body: r#"
kind = "spectrum_vs_jp"
[grid]
theta_pi = [0.0, 0.4, 0.8, 1.0]
jp = { scale = "linear", min = 0.0, max = 0.2, points = 401 }
"#,
    },
    Preset {
        name: "fig4",
        description: "quenches across the max-Im crossing for four angles",
        body: r#"
kind = "quench"
[quench]
pairs = [
  { theta_pi = 0.0, j_ini = 0.12, j_fin = 0.124 },
  { theta_pi = 0.4, j_ini = 0.035, j_fin = 0.045 },
  { theta_pi = 0.8, j_ini = 0.04, j_fin = 0.06 },
  { theta_pi = 1.0, j_ini = 0.08, j_fin = 0.09 },
]
"#,
    },
    Preset {
        name: "smS1",
        description: "Im E levels around the anyonic crossings",
        body: r#"
kind = "spectrum_vs_jp"
[grid]
theta_pi = [0.4, 0.8]
jp = { scale = "linear", min = 0.03, max = 0.07, points = 161 }
"#,
    },
    Preset {
        name: "smS2_N3",
        description: "Im E spectra for N=3 (n_cap=3)",
        body: r#"
kind = "spectrum_vs_jp"
[model]
N = 3
[grid]
theta_pi = [0.0, 0.4, 0.8, 1.0]
jp = { scale = "log", min = 1e-4, max = 0.1, points = 16 }
"#,
    },
    Preset {
        name: "smS4",
        description: "Im E density of states of post-quench Hamiltonians",
        body: r#"
kind = "im_dos"
[grid]
theta_pi = [0.0, 0.4, 0.8, 1.0]
[dos]
jp = [0.045, 0.09]
bins = 40
"#,
    },
    Preset {
        name: "smS6",
        description: "quench robustness across (J_ini, J_fin) pairs and angles",
        body: r#"
kind = "quench"
[quench]
pairs = [
  { theta_pi = 0.0, j_ini = 0.02, j_fin = 0.03 },
  { theta_pi = 0.0, j_ini = 0.035, j_fin = 0.045 },
  { theta_pi = 0.0, j_ini = 0.05, j_fin = 0.07 },
  { theta_pi = 0.2, j_ini = 0.02, j_fin = 0.03 },
  { theta_pi = 0.2, j_ini = 0.035, j_fin = 0.045 },
  { theta_pi = 0.2, j_ini = 0.05, j_fin = 0.07 },
  { theta_pi = 0.4, j_ini = 0.02, j_fin = 0.03 },
  { theta_pi = 0.4, j_ini = 0.035, j_fin = 0.045 },
  { theta_pi = 0.4, j_ini = 0.05, j_fin = 0.07 },
  { theta_pi = 0.6, j_ini = 0.02, j_fin = 0.03 },
  { theta_pi = 0.6, j_ini = 0.035, j_fin = 0.045 },
  { theta_pi = 0.6, j_ini = 0.05, j_fin = 0.07 },
  { theta_pi = 0.8, j_ini = 0.02, j_fin = 0.03 },
  { theta_pi = 0.8, j_ini = 0.035, j_fin = 0.045 },
  { theta_pi = 0.8, j_ini = 0.05, j_fin = 0.07 },
  { theta_pi = 1.0, j_ini = 0.02, j_fin = 0.03 },
  { theta_pi = 1.0, j_ini = 0.035, j_fin = 0.045 },
  { theta_pi = 1.0, j_ini = 0.05, j_fin = 0.07 },
]
"#,
    },
    Preset {
        name: "smS6_edge",
        description: "edge correlation of the max-Im state vs Jp for many angles",
        body: r#"
kind = "spectrum_vs_jp"
[grid]
theta_pi = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
jp = { scale = "linear", min = 0.005, max = 0.15, points = 146 }
"#,
    },
    Preset {
        name: "symmetry",
        description: "K-symmetry residuals per Hamiltonian term",
        body: r#"
kind = "symmetry_residuals"
[model]
jp = 0.1
[grid]
theta_pi = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
"#,
    },
    Preset {
        name: "commutators",
        description: "deformed commutation relations of the string operators",
        body: r#"
kind = "commutator_check"
[model]
L = 3
N = 3
n_cap = 3
[grid]
theta_pi = [0.0, 0.3, 0.5, 0.8, 1.0]
"#,
    },
    Preset {
        name: "perturbation",
        description: "second- and fourth-order effective couplings vs closed forms",
        body: r#"
kind = "perturbation_check"
[model]
L = 4
jp = 0.01
[grid]
theta_pi = [0.0, 0.3, 0.5, 1.0]
"#,
    },
];

pub fn all() -> &'static [Preset] {
    PRESETS
}

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique() {
        let mut names: Vec<_> = all().iter().map(|p| p.name).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), all().len());
    }

    #[test]
    fn listing_contains_headline_presets() {
        for n in ["fig2a", "fig4", "smS2_N3"] {
            assert!(find(n).is_some(), "{n}");
        }
    }
}
