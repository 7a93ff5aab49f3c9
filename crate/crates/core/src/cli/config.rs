//! Scenario files.
//!
//! A scenario is one JSON object; every field is optional and `{}` is the
//! desk-scale vacuum run. Lengths are in the units of `x`, velocities in the
//! units of `v`, times in the units of `t` of the equation
//! `d_t f + 2 v . grad_x f = Q(f)` written with `omega(v) = |v|^2`
//! (dimensionless throughout).
//!
//! ```json
//! {
//!   "params": { "alpha": 1.0, "beta": 1.0, "dim": 2 },
//!   "grid": { "x_extent": 3.0, "v_extent": 3.0, "nx": 12, "nv": 12 },
//!   "horizon": 1.0,
//!   "nt": 20,
//!   "solver": "both",
//!   "initial_data": { "terms": [ { "amplitude": 0.0129, "x_center": [0, 0],
//!       "v_center": [0, 0], "x_rate": 1.5, "v_rate": 1.5 } ] },
//!   "experiments": ["envelope", "contraction", "stability", "nesting"]
//! }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bounds::compute_constants;
use crate::error::{Error, Result};
use crate::kaniel_shinbrot::KsConfig;
use crate::phase::{InitialDataSpec, MaxwellianParams, PhaseGrid};
use crate::picard::PicardConfig;
use crate::resonance::{Reconstruction, SphereRule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    Picard,
    Ks,
    Both,
}

impl SolverChoice {
    pub fn picard(self) -> bool {
        matches!(self, SolverChoice::Picard | SolverChoice::Both)
    }

    pub fn ks(self) -> bool {
        matches!(self, SolverChoice::Ks | SolverChoice::Both)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Envelope,
    Contraction,
    Stability,
    Nesting,
    LemmaChecks,
    OracleChecks,
}

/// Spatial and velocity resolution; the dimension comes from `params`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    /// Half-width of the spatial box.
    pub x_extent: f64,
    /// Half-width of the velocity box.
    pub v_extent: f64,
    /// Nodes per spatial axis.
    pub nx: usize,
    /// Nodes per velocity axis.
    pub nv: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            x_extent: 3.0,
            v_extent: 3.0,
            nx: 12,
            nv: 12,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    /// Sphere rule order: circle nodes in d = 2, Lebedev size (6, 14, 26,
    /// 50) or Gauss product order otherwise in d = 3. Defaults to 16 / 26.
    pub sphere_order: Option<usize>,
    pub reconstruction: Reconstruction,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            sphere_order: None,
            reconstruction: Reconstruction::Maxwellian,
        }
    }
}

impl QuadratureSpec {
    pub fn order_for(&self, dim: usize) -> usize {
        self.sphere_order.unwrap_or(if dim == 2 { 16 } else { 26 })
    }
}

/// Limits of the checks that are not owned by a solver config.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// `sup_t ||f - g|| / ||f0 - g0||` must stay below this.
    pub stability: f64,
    /// Largest sup-norm difference between the two solvers.
    pub agreement: f64,
    /// Relative slack of the lemma and oracle comparisons.
    pub lemma_slack: f64,
    /// Relative distance of the oracle from `c_d`.
    pub oracle: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            stability: 2.1,
            agreement: 5e-7,
            lemma_slack: 1e-8,
            oracle: 0.01,
        }
    }
}

/// Sizes of the randomized experiments.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleSizes {
    /// Random slab pairs fed to the contraction probe.
    pub contraction_pairs: usize,
    /// Random samples per lemma.
    pub lemma_samples: usize,
    /// Mollifier width of the oracle experiment.
    pub oracle_eps: f64,
}

impl Default for SampleSizes {
    fn default() -> Self {
        SampleSizes {
            contraction_pairs: 2,
            lemma_samples: 1000,
            oracle_eps: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub params: MaxwellianParams,
    pub grid: GridSpec,
    /// Final time `T`; the step is `T / nt`.
    pub horizon: f64,
    pub nt: usize,
    pub solver: SolverChoice,
    pub initial_data: InitialDataSpec,
    /// Second datum of the stability experiment; `1.01 f0` when absent.
    pub second_data: Option<InitialDataSpec>,
    pub quadrature: QuadratureSpec,
    pub picard: PicardConfig,
    pub ks: KsConfig,
    pub tolerances: Tolerances,
    pub samples: SampleSizes,
    pub experiments: Vec<Experiment>,
    /// Write every slice of the solution as a raw field dump.
    pub dump_fields: bool,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            params: MaxwellianParams {
                alpha: 1.0,
                beta: 1.0,
                dim: 2,
            },
            grid: GridSpec::default(),
            horizon: 1.0,
            nt: 20,
            solver: SolverChoice::Both,
            initial_data: InitialDataSpec::vacuum(),
            second_data: None,
            quadrature: QuadratureSpec::default(),
            picard: PicardConfig::default(),
            ks: KsConfig::default(),
            tolerances: Tolerances::default(),
            samples: SampleSizes::default(),
            experiments: vec![
                Experiment::Envelope,
                Experiment::Contraction,
                Experiment::Stability,
                Experiment::Nesting,
            ],
            dump_fields: false,
            seed: 0,
            output_dir: PathBuf::from("wavekin-out"),
        }
    }
}

impl ScenarioConfig {
    pub fn phase_grid(&self) -> PhaseGrid {
        PhaseGrid {
            dim: self.params.dim,
            x_extent: self.grid.x_extent,
            v_extent: self.grid.v_extent,
            nx: self.grid.nx,
            nv: self.grid.nv,
        }
    }

    pub fn second_datum(&self) -> InitialDataSpec {
        self.second_data
            .clone()
            .unwrap_or_else(|| self.initial_data.scaled(1.01))
    }

    pub fn wants(&self, e: Experiment) -> bool {
        self.experiments.contains(&e)
    }

    /// Every violated invariant; empty when the scenario can run.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        let note = |out: &mut Vec<String>, r: Result<()>| {
            if let Err(e) = r {
                out.push(e.to_string());
            }
        };
        note(&mut out, self.params.validate());
        let params_ok = self.params.validate().is_ok();
        if params_ok {
            note(&mut out, self.phase_grid().validate());
            note(
                &mut out,
                SphereRule::for_dim(self.params.dim, self.quadrature.order_for(self.params.dim)).map(|_| ()),
            );
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            out.push(format!("horizon: must be positive, got {}", self.horizon));
        }
        if self.nt == 0 {
            out.push("nt: need at least one time step".into());
        }
        note(&mut out, self.picard.validate());
        note(&mut out, self.ks.validate());
        if !(self.samples.oracle_eps > 0.0) {
            out.push("samples.oracle_eps: must be positive".into());
        }
        if !params_ok {
            return out;
        }
        let data = [
            ("initial_data", Some(&self.initial_data)),
            ("second_data", self.second_data.as_ref()),
        ];
        for (name, spec) in data {
            let Some(spec) = spec else { continue };
            for p in spec.problems(&self.params) {
                out.push(format!("{name}: {p}"));
            }
        }
        if self.solver.ks() && !self.initial_data.is_nonnegative() {
            out.push("solver = ks needs non-negative amplitudes in initial_data".into());
        }
        if !out.is_empty() {
            return out;
        }
        // admissibility of both data against the vacuum radius
        if let Ok(c) = compute_constants(&self.params) {
            let grid = self.phase_grid();
            let mut data = vec![("initial_data", self.initial_data.clone())];
            if self.wants(Experiment::Stability) {
                data.push(("second_data", self.second_datum()));
            }
            for (name, spec) in data {
                let norm = spec.grid_norm(&grid, &self.params);
                if norm > c.r_max {
                    out.push(format!(
                        "{name}: norm {norm:.6e} exceeds the vacuum radius R_max = {:.6e}",
                        c.r_max
                    ));
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }
}

/// Parses a scenario from JSON text; `path` is only used in messages.
pub fn parse_config_str(text: &str, path: &Path) -> Result<ScenarioConfig> {
    let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Reads, parses and validates a scenario file.
pub fn parse_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ScenarioConfig> {
        parse_config_str(text, Path::new("test.json"))
    }

    #[test]
    fn empty_object_is_the_default_scenario() {
        let cfg = parse("{}").unwrap();
        assert_eq!(cfg, ScenarioConfig::default());
        assert_eq!(cfg.quadrature.order_for(2), 16);
        assert_eq!(cfg.phase_grid().nx, 12);
    }

    #[test]
    fn negative_beta_names_the_field() {
        let err = parse(r#"{"params": {"alpha": 1.0, "beta": -1.0, "dim": 2}}"#).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::Validation(_)));
        assert!(msg.contains("beta"), "{msg}");
    }

    #[test]
    fn oversized_data_reports_both_numbers() {
        let text = r#"{"initial_data": {"terms": [{"amplitude": 0.5, "x_center": [0, 0],
            "v_center": [0, 0], "x_rate": 1.5, "v_rate": 1.5}]}}"#;
        let msg = parse(text).unwrap_err().to_string();
        assert!(
            msg.contains("initial_data: norm 4.3") && msg.contains("R_max = 2.59"),
            "{msg}"
        );
    }

    #[test]
    fn syntax_and_unknown_fields_carry_context() {
        let msg = parse("{\n  \"nt\": 3,\n  \"bogus\": 1\n}").unwrap_err().to_string();
        assert!(msg.contains("bogus") && msg.contains("line 3"), "{msg}");
        let msg = parse(r#"{"grid": {"nx": "twelve"}}"#).unwrap_err().to_string();
        assert!(msg.contains("test.json"), "{msg}");
    }

    #[test]
    fn signed_data_rejected_for_ks_only() {
        let neg = r#""initial_data": {"terms": [{"amplitude": -0.001, "x_center": [0, 0],
            "v_center": [0, 0], "x_rate": 1.5, "v_rate": 1.5}]}"#;
        assert!(parse(&format!("{{ {neg}, \"solver\": \"ks\" }}")).is_err());
        assert!(parse(&format!("{{ {neg}, \"solver\": \"picard\" }}")).is_ok());
    }
}
