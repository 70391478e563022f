//! Run configuration. One JSON document per invocation; the `problem` key
//! must name the subcommand, and only the matching parameter block may be
//! present. Every block has defaults, so `{"problem": "stefan"}` runs the
//! reference freezing slab. Physical quantities carry their unit in the key.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, HarnessResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Spectrum,
    Oit,
    Mixed,
    Obm,
    Multilayer,
    Stefan,
    Validate,
}

impl Problem {
    pub fn name(self) -> &'static str {
        match self {
            Problem::Spectrum => "spectrum",
            Problem::Oit => "oit",
            Problem::Mixed => "mixed",
            Problem::Obm => "obm",
            Problem::Multilayer => "multilayer",
            Problem::Stefan => "stefan",
            Problem::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: Problem,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oit: Option<OitConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixed: Option<MixedConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obm: Option<ObmConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multilayer: Option<MultilayerConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stefan: Option<StefanRunConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validate: Option<ValidateConfig>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Output directory; `--out` takes precedence.
    pub dir: Option<PathBuf>,
}

/// Eigenvalues of a strip `[y_0, y_N]` with piecewise-constant `σ`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    pub interfaces: Vec<f64>,
    pub sigma: Vec<f64>,
    pub count: usize,
    pub first_order: FirstOrderVariant,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig { interfaces: vec![0.0, 1.2, 2.2], sigma: vec![7.0, 0.7], count: 30, first_order: FirstOrderVariant::Displayed }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FirstOrderVariant {
    Displayed,
    Linearized,
}

/// Smooth test functions for the transform and sifting runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestFunction {
    /// `((x - lo)(hi - x))^power (x - y)^interface_order` on the support.
    PolyBump { power: i32, interface_order: i32 },
    /// `exp(1 - 1/(1 - u²))` with `u = (x - centre)/half_width`.
    SmoothBump { centre: f64, half_width: f64 },
}

impl TestFunction {
    /// Evaluator for a given support and interface position.
    pub fn evaluator(&self, support: (f64, f64), interface: f64) -> impl Fn(f64) -> f64 + Send + Sync + 'static {
        let this = self.clone();
        let (lo, hi) = support;
        move |x: f64| {
            if x <= lo || x >= hi {
                return 0.0;
            }
            match this {
                TestFunction::PolyBump { power, interface_order } => ((x - lo) * (hi - x)).powi(power) * (x - interface).powi(interface_order),
                TestFunction::SmoothBump { centre, half_width } => {
                    let u = (x - centre) / half_width;
                    if u.abs() >= 1.0 {
                        0.0
                    } else {
                        (1.0 - 1.0 / (1.0 - u * u)).exp()
                    }
                }
            }
        }
    }
}

/// Forward and inverse transform of a test function on the two-layer line.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OitConfig {
    pub interface: f64,
    pub sigma_minus: f64,
    pub sigma_plus: f64,
    pub support: [f64; 2],
    pub function: TestFunction,
    pub omega_max: f64,
    pub panels: usize,
    pub forward_tol: f64,
    pub inverse_tol: f64,
    pub points: usize,
}

impl Default for OitConfig {
    fn default() -> Self {
        OitConfig {
            interface: 0.2,
            sigma_minus: 0.6,
            sigma_plus: 1.7,
            support: [-1.0, 1.8],
            function: TestFunction::PolyBump { power: 6, interface_order: 4 },
            omega_max: 400.0,
            panels: 400,
            forward_tol: 1e-13,
            inverse_tol: 1e-6,
            points: 57,
        }
    }
}

/// Sifting by the branch-cut representation on a line with interior layers.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MixedConfig {
    pub interfaces: Vec<f64>,
    pub sigma: Vec<f64>,
    pub function: TestFunction,
    pub support: [f64; 2],
    pub omega_max: f64,
    pub points: usize,
    /// Closed-form zeros listed for `|n| ≤ zeros` (one interior layer only).
    pub zeros: usize,
}

impl Default for MixedConfig {
    fn default() -> Self {
        MixedConfig {
            interfaces: vec![-0.3, 0.4],
            sigma: vec![0.8, 1.5, 0.6],
            function: TestFunction::SmoothBump { centre: 0.1, half_width: 0.9 },
            support: [-0.8, 1.0],
            omega_max: 120.0,
            points: 9,
            zeros: 10,
        }
    }
}

/// Geometric time grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub h0: f64,
    pub h_max: f64,
    pub ratio: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { h0: 1e-4, h_max: 5e-3, ratio: 1.05 }
    }
}

/// Transition density of a diffusion whose variance switches at
/// `y(τ) = position + velocity·τ`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObmConfig {
    pub sigma_minus: f64,
    pub sigma_plus: f64,
    pub x0: f64,
    pub position: f64,
    pub velocity: f64,
    pub horizon: f64,
    pub grid: GridConfig,
    /// Also solve through the Laplace route and report both traces.
    pub laplace: bool,
    pub profile_times: Vec<f64>,
    pub x_range: [f64; 2],
    pub points: usize,
}

impl Default for ObmConfig {
    fn default() -> Self {
        ObmConfig {
            sigma_minus: 1.0,
            sigma_plus: 2.0,
            x0: 0.5,
            position: 0.0,
            velocity: 0.1,
            horizon: 1.0,
            grid: GridConfig::default(),
            laplace: true,
            profile_times: vec![0.1, 0.5, 1.0],
            x_range: [-4.0, 6.0],
            points: 201,
        }
    }
}

/// `y(τ) = position + velocity·τ + amplitude·sin(frequency·τ)`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InterfaceMotion {
    pub position: f64,
    pub velocity: f64,
    pub amplitude: f64,
    pub frequency: f64,
}

impl InterfaceMotion {
    pub fn fixed(position: f64) -> Self {
        InterfaceMotion { position, ..Default::default() }
    }

    pub fn y(&self, t: f64) -> f64 {
        self.position + self.velocity * t + self.amplitude * (self.frequency * t).sin()
    }

    pub fn y_prime(&self, t: f64) -> f64 {
        self.velocity + self.amplitude * self.frequency * (self.frequency * t).cos()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// `sin(mode·π·(x - y_0)/(y_N - y_0))`.
    Sine { mode: u32 },
    /// `(x - y_0)(y_N - x)`.
    Parabola,
}

/// Strip with moving interior interfaces and absorbing ends.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MultilayerConfig {
    pub interfaces: Vec<InterfaceMotion>,
    pub sigma: Vec<f64>,
    pub initial: InitialData,
    pub terms: usize,
    pub horizon: f64,
    pub steps: usize,
    pub profile_times: Vec<f64>,
    pub points: usize,
}

impl Default for MultilayerConfig {
    fn default() -> Self {
        MultilayerConfig {
            interfaces: vec![
                InterfaceMotion::fixed(0.0),
                InterfaceMotion { position: 0.3, velocity: 0.0, amplitude: 0.05, frequency: 10.0 },
                InterfaceMotion { position: 0.7, velocity: -0.1, amplitude: 0.0, frequency: 0.0 },
                InterfaceMotion::fixed(1.0),
            ],
            sigma: vec![1.0, 0.4, 0.8],
            initial: InitialData::Sine { mode: 1 },
            terms: 60,
            horizon: 0.2,
            steps: 40,
            profile_times: vec![0.05, 0.1, 0.2],
            points: 101,
        }
    }
}

/// Two-phase freezing slab in mm, s, K.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StefanRunConfig {
    pub y_minus_mm: f64,
    pub y_plus_mm: f64,
    #[serde(rename = "T_s_K")]
    pub t_s_k: f64,
    #[serde(rename = "T_m_K")]
    pub t_m_k: f64,
    #[serde(rename = "T_l_K")]
    pub t_l_k: f64,
    #[serde(rename = "kappa_I_mm2_per_s")]
    pub kappa_i_mm2_per_s: f64,
    #[serde(rename = "kappa_W_mm2_per_s")]
    pub kappa_w_mm2_per_s: f64,
    #[serde(rename = "rho_I_kg_per_m3")]
    pub rho_i_kg_per_m3: f64,
    #[serde(rename = "rho_W_kg_per_m3")]
    pub rho_w_kg_per_m3: f64,
    /// Latent heat over heat capacity.
    #[serde(rename = "latent_K")]
    pub latent_k: f64,
    /// The density-latent product as it enters the front condition.
    #[serde(rename = "rho_I_L_K")]
    pub rho_i_l_k: f64,
    pub terms: usize,
    pub h0_s: f64,
    pub h_max_s: f64,
    pub ratio: f64,
    pub horizon_s: f64,
    pub profile_times_s: Vec<f64>,
    pub profile_points: usize,
}

impl Default for StefanRunConfig {
    fn default() -> Self {
        let c = layerheat::stefan::StefanConfig::reference();
        let o = layerheat::stefan::StefanOptions::default();
        StefanRunConfig {
            y_minus_mm: c.y_minus,
            y_plus_mm: c.y_plus,
            t_s_k: c.t_s,
            t_m_k: c.t_m,
            t_l_k: c.t_l,
            kappa_i_mm2_per_s: c.kappa_i,
            kappa_w_mm2_per_s: c.kappa_w,
            rho_i_kg_per_m3: c.rho_i,
            rho_w_kg_per_m3: c.rho_w,
            latent_k: c.latent,
            rho_i_l_k: c.rho_latent,
            terms: o.terms,
            h0_s: o.h0,
            h_max_s: o.h_max,
            ratio: o.ratio,
            horizon_s: o.horizon,
            profile_times_s: vec![10.0, 100.0, 1000.0],
            profile_points: 99,
        }
    }
}

impl StefanRunConfig {
    pub fn physics(&self) -> layerheat::stefan::StefanConfig {
        layerheat::stefan::StefanConfig {
            y_minus: self.y_minus_mm,
            y_plus: self.y_plus_mm,
            t_s: self.t_s_k,
            t_m: self.t_m_k,
            t_l: self.t_l_k,
            kappa_i: self.kappa_i_mm2_per_s,
            kappa_w: self.kappa_w_mm2_per_s,
            rho_i: self.rho_i_kg_per_m3,
            rho_w: self.rho_w_kg_per_m3,
            latent: self.latent_k,
            rho_latent: self.rho_i_l_k,
        }
    }

    pub fn options(&self) -> layerheat::stefan::StefanOptions {
        layerheat::stefan::StefanOptions {
            terms: self.terms,
            h0: self.h0_s,
            h_max: self.h_max_s,
            ratio: self.ratio,
            horizon: self.horizon_s,
            ..Default::default()
        }
    }
}

/// Which acceptance checks to run; empty means all.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateConfig {
    pub only: Vec<String>,
}

fn bad(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

fn positive(name: &str, v: f64) -> HarnessResult<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(bad(format!("{name} must be positive and finite, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> HarnessResult<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(bad(format!("{name} must be finite, got {v}")))
    }
}

fn at_least(name: &str, v: usize, min: usize) -> HarnessResult<()> {
    if v >= min {
        Ok(())
    } else {
        Err(bad(format!("{name} must be at least {min}, got {v}")))
    }
}

fn increasing(name: &str, v: &[f64]) -> HarnessResult<()> {
    for &x in v {
        finite(name, x)?;
    }
    if v.windows(2).all(|w| w[1] > w[0]) {
        Ok(())
    } else {
        Err(bad(format!("{name} must be strictly increasing")))
    }
}

fn all_positive(name: &str, v: &[f64]) -> HarnessResult<()> {
    v.iter().try_for_each(|&x| positive(name, x))
}

fn times_within(name: &str, v: &[f64], horizon: f64) -> HarnessResult<()> {
    for &t in v {
        if !(t > 0.0 && t <= horizon) {
            return Err(bad(format!("{name} entries must lie in (0, {horizon}], got {t}")));
        }
    }
    Ok(())
}

fn test_function(f: &TestFunction) -> HarnessResult<()> {
    match *f {
        TestFunction::PolyBump { power, interface_order } => {
            if power < 1 || interface_order < 0 {
                return Err(bad("poly_bump needs power ≥ 1 and interface_order ≥ 0"));
            }
        }
        TestFunction::SmoothBump { centre, half_width } => {
            finite("function.centre", centre)?;
            positive("function.half_width", half_width)?;
        }
    }
    Ok(())
}

impl SpectrumConfig {
    pub fn check(&self) -> HarnessResult<()> {
        increasing("spectrum.interfaces", &self.interfaces)?;
        all_positive("spectrum.sigma", &self.sigma)?;
        if self.interfaces.len() != self.sigma.len() + 1 || self.sigma.is_empty() {
            return Err(bad("spectrum.interfaces needs one more entry than spectrum.sigma"));
        }
        at_least("spectrum.count", self.count, 1)
    }
}

impl OitConfig {
    pub fn check(&self) -> HarnessResult<()> {
        finite("oit.interface", self.interface)?;
        positive("oit.sigma_minus", self.sigma_minus)?;
        positive("oit.sigma_plus", self.sigma_plus)?;
        increasing("oit.support", &self.support)?;
        test_function(&self.function)?;
        positive("oit.omega_max", self.omega_max)?;
        at_least("oit.panels", self.panels, 1)?;
        positive("oit.forward_tol", self.forward_tol)?;
        positive("oit.inverse_tol", self.inverse_tol)?;
        at_least("oit.points", self.points, 2)
    }
}

impl MixedConfig {
    pub fn check(&self) -> HarnessResult<()> {
        increasing("mixed.interfaces", &self.interfaces)?;
        all_positive("mixed.sigma", &self.sigma)?;
        if self.interfaces.is_empty() || self.sigma.len() != self.interfaces.len() + 1 {
            return Err(bad("mixed.sigma needs one more entry than mixed.interfaces"));
        }
        test_function(&self.function)?;
        increasing("mixed.support", &self.support)?;
        positive("mixed.omega_max", self.omega_max)?;
        at_least("mixed.points", self.points, 1)
    }
}

impl ObmConfig {
    pub fn check(&self) -> HarnessResult<()> {
        positive("obm.sigma_minus", self.sigma_minus)?;
        positive("obm.sigma_plus", self.sigma_plus)?;
        finite("obm.x0", self.x0)?;
        finite("obm.position", self.position)?;
        finite("obm.velocity", self.velocity)?;
        positive("obm.horizon", self.horizon)?;
        if self.x0 == self.position {
            return Err(bad("obm.x0 must not sit on the interface"));
        }
        positive("obm.grid.h0", self.grid.h0)?;
        positive("obm.grid.h_max", self.grid.h_max)?;
        if !(self.grid.ratio >= 1.0 && self.grid.ratio.is_finite()) {
            return Err(bad("obm.grid.ratio must be at least 1"));
        }
        times_within("obm.profile_times", &self.profile_times, self.horizon)?;
        increasing("obm.x_range", &self.x_range)?;
        at_least("obm.points", self.points, 2)
    }
}

impl MultilayerConfig {
    pub fn check(&self) -> HarnessResult<()> {
        at_least("multilayer.interfaces", self.interfaces.len(), 2)?;
        for (i, m) in self.interfaces.iter().enumerate() {
            for (name, v) in [("position", m.position), ("velocity", m.velocity), ("amplitude", m.amplitude), ("frequency", m.frequency)] {
                finite(&format!("multilayer.interfaces[{i}].{name}"), v)?;
            }
        }
        let start: Vec<f64> = self.interfaces.iter().map(|m| m.position).collect();
        increasing("multilayer.interfaces (positions)", &start)?;
        all_positive("multilayer.sigma", &self.sigma)?;
        if self.sigma.len() + 1 != self.interfaces.len() {
            return Err(bad("multilayer.interfaces needs one more entry than multilayer.sigma"));
        }
        if let InitialData::Sine { mode } = self.initial {
            at_least("multilayer.initial.mode", mode as usize, 1)?;
        }
        at_least("multilayer.terms", self.terms, 1)?;
        positive("multilayer.horizon", self.horizon)?;
        at_least("multilayer.steps", self.steps, 1)?;
        times_within("multilayer.profile_times", &self.profile_times, self.horizon)?;
        at_least("multilayer.points", self.points, 2)
    }
}

impl StefanRunConfig {
    pub fn check(&self) -> HarnessResult<()> {
        self.physics().validate().map_err(|e| bad(format!("stefan: {e}")))?;
        at_least("stefan.terms", self.terms, 1)?;
        positive("stefan.h0_s", self.h0_s)?;
        positive("stefan.h_max_s", self.h_max_s)?;
        positive("stefan.horizon_s", self.horizon_s)?;
        if !(self.ratio >= 1.0 && self.ratio.is_finite()) {
            return Err(bad("stefan.ratio must be at least 1"));
        }
        times_within("stefan.profile_times_s", &self.profile_times_s, self.horizon_s)?;
        at_least("stefan.profile_points", self.profile_points, 2)
    }
}

impl RunConfig {
    /// Defaults for `problem` with no parameter block.
    pub fn default_for(problem: Problem) -> Self {
        RunConfig {
            problem,
            output: OutputConfig::default(),
            spectrum: None,
            oit: None,
            mixed: None,
            obm: None,
            multilayer: None,
            stefan: None,
            validate: None,
        }
    }

    pub fn from_json(text: &str) -> HarnessResult<Self> {
        serde_json::from_str(text).map_err(|e| bad(e.to_string()))
    }

    pub fn load(path: &Path) -> HarnessResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_json(&text)
    }

    /// Checks that the document targets `expected`, carries no foreign
    /// block, and that the active block is usable; fills in the default
    /// block when it is absent.
    pub fn resolve(mut self, expected: Problem) -> HarnessResult<Self> {
        if self.problem != expected {
            return Err(bad(format!("config is for `{}` but the subcommand is `{}`", self.problem.name(), expected.name())));
        }
        let present = [
            (Problem::Spectrum, self.spectrum.is_some()),
            (Problem::Oit, self.oit.is_some()),
            (Problem::Mixed, self.mixed.is_some()),
            (Problem::Obm, self.obm.is_some()),
            (Problem::Multilayer, self.multilayer.is_some()),
            (Problem::Stefan, self.stefan.is_some()),
            (Problem::Validate, self.validate.is_some()),
        ];
        if let Some((p, _)) = present.iter().find(|(p, on)| *on && *p != expected) {
            return Err(bad(format!("block `{}` does not belong to problem `{}`", p.name(), expected.name())));
        }
        match expected {
            Problem::Spectrum => self.spectrum.get_or_insert_with(Default::default).check()?,
            Problem::Oit => self.oit.get_or_insert_with(Default::default).check()?,
            Problem::Mixed => self.mixed.get_or_insert_with(Default::default).check()?,
            Problem::Obm => self.obm.get_or_insert_with(Default::default).check()?,
            Problem::Multilayer => self.multilayer.get_or_insert_with(Default::default).check()?,
            Problem::Stefan => self.stefan.get_or_insert_with(Default::default).check()?,
            Problem::Validate => {
                let v = self.validate.get_or_insert_with(Default::default);
                for id in &v.only {
                    if !crate::checks::ids().contains(&id.as_str()) {
                        return Err(bad(format!("unknown check `{id}`; known: {}", crate::checks::ids().join(", "))));
                    }
                }
            }
        }
        Ok(self)
    }

    /// SHA-256 of the resolved configuration in canonical JSON.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_documents_resolve_to_defaults() {
        for p in [Problem::Spectrum, Problem::Oit, Problem::Mixed, Problem::Obm, Problem::Multilayer, Problem::Stefan, Problem::Validate] {
            let cfg = RunConfig::from_json(&format!("{{\"problem\": \"{}\"}}", p.name())).unwrap();
            cfg.resolve(p).unwrap();
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_json(r#"{"problem": "spectrum", "extra": 1}"#).is_err());
        assert!(RunConfig::from_json(r#"{"problem": "spectrum", "spectrum": {"count": 3, "sigmas": [1.0]}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"problem": "stefan", "stefan": {"kappa_I": 1.0}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"problem": "oit", "oit": {"function": {"kind": "smooth_bump", "centre": 0.0, "half_width": 1.0, "x": 2}}}"#).is_err());
    }

    #[test]
    fn unit_tagged_keys_are_read() {
        let cfg = RunConfig::from_json(r#"{"problem": "stefan", "stefan": {"kappa_I_mm2_per_s": 1.5, "T_s_K": 268.0}}"#).unwrap();
        let s = cfg.resolve(Problem::Stefan).unwrap().stefan.unwrap();
        assert_eq!(s.physics().kappa_i, 1.5);
        assert_eq!(s.physics().t_s, 268.0);
        assert_eq!(s.physics().t_l, 290.0);
    }

    #[test]
    fn mismatched_or_foreign_blocks_fail() {
        let cfg = RunConfig::from_json(r#"{"problem": "spectrum"}"#).unwrap();
        assert!(matches!(cfg.resolve(Problem::Stefan), Err(HarnessError::Config(_))));
        let cfg = RunConfig::from_json(r#"{"problem": "spectrum", "obm": {}}"#).unwrap();
        assert!(cfg.resolve(Problem::Spectrum).is_err());
    }

    #[test]
    fn semantic_checks() {
        let cases = [
            (Problem::Spectrum, r#"{"problem": "spectrum", "spectrum": {"interfaces": [0.0, 1.0], "sigma": [1.0, 2.0]}}"#),
            (Problem::Spectrum, r#"{"problem": "spectrum", "spectrum": {"interfaces": [1.0, 0.0], "sigma": [1.0]}}"#),
            (Problem::Obm, r#"{"problem": "obm", "obm": {"sigma_minus": -1.0}}"#),
            (Problem::Obm, r#"{"problem": "obm", "obm": {"profile_times": [2.0]}}"#),
            (Problem::Stefan, r#"{"problem": "stefan", "stefan": {"y_plus_mm": 0.5}}"#),
            (Problem::Validate, r#"{"problem": "validate", "validate": {"only": ["99"]}}"#),
        ];
        for (p, text) in cases {
            let cfg = RunConfig::from_json(text).unwrap();
            assert!(cfg.resolve(p).is_err(), "{text}");
        }
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = RunConfig::from_json(r#"{"problem": "spectrum"}"#).unwrap().resolve(Problem::Spectrum).unwrap();
        let b = RunConfig::from_json(r#"{"problem": "spectrum", "spectrum": {"count": 30}}"#).unwrap().resolve(Problem::Spectrum).unwrap();
        let c = RunConfig::from_json(r#"{"problem": "spectrum", "spectrum": {"count": 31}}"#).unwrap().resolve(Problem::Spectrum).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
