use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PlannerKind;
use crate::dynamics::{ExternalWrench, Wrench, WrenchPulse};
use crate::error::{Error, Result};
use crate::fic::FicParams;
use crate::ik::IkWeights;
use crate::planner::PlannerSet;
use nalgebra::Vector3;

/// End-effector wrench applied over `[t_start, t_start + duration)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpulsePerturbation {
    pub t_start: f64,
    pub duration: f64,
    #[serde(default)]
    pub force: [f64; 3],
    #[serde(default)]
    pub torque: [f64; 3],
}

/// Target frame translated by `offset`, ramped linearly over `ramp` seconds
/// from `t_start` and then held.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoardShift {
    pub t_start: f64,
    pub ramp: f64,
    pub offset: [f64; 3],
}

impl BoardShift {
    pub fn offset_at(&self, t: f64) -> Vector3<f64> {
        let s = if self.ramp > 0.0 {
            ((t - self.t_start) / self.ramp).clamp(0.0, 1.0)
        } else if t >= self.t_start {
            1.0
        } else {
            0.0
        };
        Vector3::from(self.offset) * s
    }

    pub fn active(&self, t: f64) -> bool {
        t >= self.t_start && t < self.t_start + self.ramp.max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbations {
    #[serde(default)]
    pub impulse: Vec<ImpulsePerturbation>,
    #[serde(default)]
    pub board_shift: Vec<BoardShift>,
}

impl Perturbations {
    pub fn external_wrench(&self) -> Result<ExternalWrench> {
        ExternalWrench::new(
            self.impulse
                .iter()
                .map(|p| WrenchPulse {
                    t_start: p.t_start,
                    t_end: p.t_start + p.duration,
                    wrench: Wrench::new(p.force.into(), p.torque.into()),
                })
                .collect(),
        )
    }

    pub fn board_offset(&self, t: f64) -> Vector3<f64> {
        self.board_shift.iter().map(|b| b.offset_at(t)).sum()
    }

    /// Inside an impulse or a board ramp.
    pub fn active(&self, t: f64) -> bool {
        self.impulse.iter().any(|p| t >= p.t_start && t < p.t_start + p.duration) || self.board_shift.iter().any(|b| b.active(t))
    }
}

/// Table I overrides; unset fields keep the selected set's values.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerOverrides {
    pub zeta: Option<f64>,
    pub f_n: Option<f64>,
    pub a_max: Option<f64>,
    pub v_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IkOverrides {
    pub w_task: Option<f64>,
    pub w_reg: Option<f64>,
}

fn default_planner() -> PlannerKind {
    PlannerKind::Harmonic
}
fn default_set() -> usize {
    3
}
fn default_fic() -> String {
    "set2".into()
}
fn default_angular() -> String {
    "angular".into()
}
fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Bundled model name (`arm7`, `planar2`) or model file path.
    pub model: String,
    /// CSV path or `synth:` spec.
    pub trajectory: String,
    #[serde(default = "default_planner")]
    pub planner: PlannerKind,
    #[serde(default = "default_set")]
    pub planner_set: usize,
    #[serde(default)]
    pub planner_overrides: PlannerOverrides,
    /// Translational FIC preset.
    #[serde(default = "default_fic")]
    pub fic: String,
    #[serde(default = "default_angular")]
    pub fic_angular: String,
    #[serde(default)]
    pub ik: IkOverrides,
    #[serde(default = "one")]
    pub s_x: f64,
    #[serde(default = "one")]
    pub s_t: f64,
    /// Episode length (s); defaults to the scaled stream plus one second.
    pub duration: Option<f64>,
    /// Start of steady state for metrics (s).
    #[serde(default = "one")]
    pub settle: f64,
    /// World position of the trajectory frame origin; defaults to the
    /// end-effector position at the home posture.
    pub board_origin: Option<[f64; 3]>,
    #[serde(default)]
    pub perturbations: Perturbations,
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(model: &str, trajectory: &str) -> Self {
        Self {
            model: model.into(),
            trajectory: trajectory.into(),
            planner: default_planner(),
            planner_set: default_set(),
            planner_overrides: PlannerOverrides::default(),
            fic: default_fic(),
            fic_angular: default_angular(),
            ik: IkOverrides::default(),
            s_x: 1.0,
            s_t: 1.0,
            duration: None,
            settle: 1.0,
            board_origin: None,
            perturbations: Perturbations::default(),
            output_dir: None,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parse a config file; relative model, trajectory and output paths are
    /// taken relative to the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let mut cfg: Self = toml::from_str(&std::fs::read_to_string(path)?).map_err(|e| Error::Config(format!("{}: {}", path.display(), e.message())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let rebase = |s: &str| -> String {
            let p = Path::new(s);
            if p.is_relative() {
                base.join(p).to_string_lossy().into_owned()
            } else {
                s.to_string()
            }
        };
        if !matches!(cfg.model.as_str(), "arm7" | "planar2" | "arm7.model" | "planar2.model") {
            cfg.model = rebase(&cfg.model);
        }
        if !cfg.trajectory.starts_with("synth:") {
            cfg.trajectory = rebase(&cfg.trajectory);
        }
        if let Some(out) = &cfg.output_dir {
            if out.is_relative() {
                cfg.output_dir = Some(base.join(out));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if let Some(d) = self.duration {
            if !(d > 0.0 && d.is_finite()) {
                return bad(format!("duration must be positive, got {d}"));
            }
        }
        if !(self.s_x > 0.0 && self.s_t > 0.0 && self.s_x.is_finite() && self.s_t.is_finite()) {
            return bad(format!("scale factors must be positive (s_x {}, s_t {})", self.s_x, self.s_t));
        }
        if !(self.settle >= 0.0 && self.settle.is_finite()) {
            return bad(format!("settle must be non-negative, got {}", self.settle));
        }
        self.planner_set_values()?;
        self.fic_params()?;
        if !matches!(self.model.as_str(), "arm7" | "planar2" | "arm7.model" | "planar2.model") && !Path::new(&self.model).exists() {
            return Err(Error::MissingFile(PathBuf::from(&self.model)));
        }
        if !self.trajectory.starts_with("synth:") && !Path::new(&self.trajectory).exists() {
            return Err(Error::MissingFile(PathBuf::from(&self.trajectory)));
        }
        for p in &self.perturbations.impulse {
            if !(p.duration > 0.0 && p.t_start >= 0.0) {
                return bad(format!("impulse needs t_start ≥ 0 and duration > 0: {p:?}"));
            }
        }
        for b in &self.perturbations.board_shift {
            if !(b.ramp >= 0.0 && b.t_start >= 0.0) {
                return bad(format!("board shift needs t_start ≥ 0 and ramp ≥ 0: {b:?}"));
            }
        }
        self.perturbations.external_wrench()?;
        Ok(())
    }

    /// Selected Table I row with overrides applied.
    pub fn planner_set_values(&self) -> Result<PlannerSet> {
        let mut s = PlannerSet::by_index(self.planner_set)?;
        let o = &self.planner_overrides;
        s.zeta = o.zeta.unwrap_or(s.zeta);
        s.f_n = o.f_n.unwrap_or(s.f_n);
        s.a_max = o.a_max.unwrap_or(s.a_max);
        s.v_max = o.v_max.unwrap_or(s.v_max);
        s.harmonic_params().validate()?;
        Ok(s)
    }

    pub fn fic_params(&self) -> Result<(FicParams, FicParams)> {
        Ok((FicParams::preset(&self.fic)?, FicParams::preset(&self.fic_angular)?))
    }

    pub fn ik_weights(&self, dof: usize, dt: f64) -> Result<IkWeights> {
        let d = IkWeights::defaults(dof, dt);
        let w = IkWeights {
            w_task: self.ik.w_task.unwrap_or(d.w_task),
            w_reg: self.ik.w_reg.unwrap_or(d.w_reg),
            dt,
        };
        w.validate()?;
        Ok(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = ExperimentConfig::from_toml_str("model = \"arm7\"\ntrajectory = \"synth:circle\"\n").unwrap();
        assert_eq!(c, ExperimentConfig::new("arm7", "synth:circle"));
    }

    #[test]
    fn full_config_round_trips() {
        let mut c = ExperimentConfig::new("arm7", "synth:circle:r=0.05");
        c.planner = PlannerKind::Bangbang;
        c.s_t = 0.25;
        c.duration = Some(3.0);
        c.perturbations.impulse.push(ImpulsePerturbation {
            t_start: 1.0,
            duration: 0.1,
            force: [20.0, 0.0, 0.0],
            torque: [0.0; 3],
        });
        c.perturbations.board_shift.push(BoardShift {
            t_start: 2.0,
            ramp: 0.5,
            offset: [0.0, 0.02, 0.0],
        });
        let text = c.to_toml_string().unwrap();
        assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), c);
    }

    #[test]
    fn rejects_bad_values() {
        let base = "model = \"arm7\"\ntrajectory = \"synth:circle\"\n";
        assert!(ExperimentConfig::from_toml_str(&format!("{base}duration = 0.0\n")).is_err());
        assert!(ExperimentConfig::from_toml_str(&format!("{base}planner_set = 9\n")).is_err());
        assert!(ExperimentConfig::from_toml_str(&format!("{base}fic = \"soft\"\n")).is_err());
        assert!(ExperimentConfig::from_toml_str(&format!("{base}colour = 1\n")).is_err());
        assert!(matches!(
            ExperimentConfig::from_toml_str("model = \"/no/such.model\"\ntrajectory = \"synth:circle\"\n"),
            Err(Error::MissingFile(_))
        ));
    }

    #[test]
    fn board_shift_ramps() {
        let b = BoardShift {
            t_start: 1.0,
            ramp: 2.0,
            offset: [0.0, 0.1, 0.0],
        };
        assert_eq!(b.offset_at(0.5), Vector3::zeros());
        assert!((b.offset_at(2.0).y - 0.05).abs() < 1e-15);
        assert_eq!(b.offset_at(5.0).y, 0.1);
        assert!(b.active(1.5) && !b.active(3.5));
    }
}
