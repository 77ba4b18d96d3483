//! JSON run configuration: one block per physics module plus task blocks.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cascade::{EmitterRates, SpectralShape, DEFAULT_REGIME_FACTOR, REFERENCE_BETAS};
use crate::defects::{
    DefectKind, DefectSpec, HeterostructureSpec, DEFAULT_CAVITY_CUTOFF, DEFAULT_MIRROR_PERIODS, DEFAULT_N_TRANSVERSE,
    DEFAULT_WAVEGUIDE_CUTOFF,
};
use crate::error::{Error, Result};
use crate::geometry::{AxisConvention, LatticeSpec, ShamrockHole, DEFAULT_RESOLUTION};
use crate::phononic::{ElasticMaterial, DEFAULT_FILLER_RATIO};
use crate::photonic::{DielectricRule, PhotonicMaterial, GAAS_INDEX};
use crate::pwe::DEFAULT_CUTOFF;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: Option<GeometryConfig>,
    #[serde(default)]
    pub photonic: PhotonicConfig,
    #[serde(default)]
    pub elastic: ElasticConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    pub defect: Option<DefectConfig>,
    pub heterostructure: Option<HeterostructureConfig>,
    pub cascade: Option<CascadeConfig>,
    pub sweep: Option<SweepConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub a_nm: f64,
    pub d_over_a: f64,
    #[serde(rename = "A_over_a")]
    pub a_over_a: f64,
    #[serde(rename = "B_over_a")]
    pub b_over_a: f64,
    #[serde(rename = "L_over_a")]
    pub l_over_a: f64,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default)]
    pub orientation_deg: f64,
    #[serde(default)]
    pub axis_convention: AxisConvention,
}

fn default_resolution() -> usize {
    DEFAULT_RESOLUTION
}

impl GeometryConfig {
    pub fn reference() -> Self {
        Self {
            a_nm: 300.0,
            d_over_a: 0.65,
            a_over_a: 0.45,
            b_over_a: 0.6,
            l_over_a: 0.17,
            resolution: DEFAULT_RESOLUTION,
            orientation_deg: 0.0,
            axis_convention: AxisConvention::Full,
        }
    }

    pub fn lattice(&self) -> Result<LatticeSpec> {
        let a = self.a_nm * 1e-9;
        LatticeSpec::hexagonal(a, self.d_over_a * a)
    }

    pub fn hole(&self) -> ShamrockHole {
        ShamrockHole {
            minor: self.a_over_a,
            major: self.b_over_a,
            shift: self.l_over_a,
            orientation: self.orientation_deg.to_radians(),
            convention: self.axis_convention,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhotonicConfig {
    #[serde(default = "default_index")]
    pub n_bulk: f64,
    /// Wavelength at which the slab effective index is evaluated.
    #[serde(default = "default_wavelength")]
    pub target_wavelength_nm: f64,
    #[serde(default = "yes")]
    pub slab_correction: bool,
    #[serde(default)]
    pub dielectric_rule: DielectricRule,
}

fn default_index() -> f64 {
    GAAS_INDEX
}

fn default_wavelength() -> f64 {
    870.0
}

fn yes() -> bool {
    true
}

impl Default for PhotonicConfig {
    fn default() -> Self {
        Self { n_bulk: GAAS_INDEX, target_wavelength_nm: 870.0, slab_correction: true, dielectric_rule: DielectricRule::default() }
    }
}

impl PhotonicConfig {
    pub fn material(&self, geometry: &GeometryConfig) -> Result<PhotonicMaterial> {
        if !(self.target_wavelength_nm > 0.0) {
            return Err(Error::invalid("target_wavelength_nm must be positive"));
        }
        let m = PhotonicMaterial {
            n_bulk: self.n_bulk,
            d_over_a: geometry.d_over_a,
            target_freq: geometry.a_nm / self.target_wavelength_nm,
            slab_correction: self.slab_correction,
            rule: self.dielectric_rule,
        };
        m.validate()?;
        Ok(m)
    }
}

/// Missing fields fall back to GaAs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ElasticConfig {
    #[serde(rename = "c11_GPa")]
    pub c11_gpa: f64,
    #[serde(rename = "c12_GPa")]
    pub c12_gpa: f64,
    #[serde(rename = "c44_GPa")]
    pub c44_gpa: f64,
    pub rho_kg_m3: f64,
    #[serde(default)]
    pub axis_rotation_deg: f64,
    /// Stiffness and density of the hole filler relative to the solid.
    #[serde(default = "default_filler")]
    pub filler_ratio: f64,
}

fn default_filler() -> f64 {
    DEFAULT_FILLER_RATIO
}

impl Default for ElasticConfig {
    fn default() -> Self {
        let g = ElasticMaterial::gaas();
        Self {
            c11_gpa: g.c11 / 1e9,
            c12_gpa: g.c12 / 1e9,
            c44_gpa: g.c44 / 1e9,
            rho_kg_m3: g.rho,
            axis_rotation_deg: 0.0,
            filler_ratio: DEFAULT_FILLER_RATIO,
        }
    }
}

impl ElasticConfig {
    pub fn material(&self) -> Result<ElasticMaterial> {
        let m = ElasticMaterial {
            c11: self.c11_gpa * 1e9,
            c12: self.c12_gpa * 1e9,
            c44: self.c44_gpa * 1e9,
            rho: self.rho_kg_m3,
            axis_rotation: self.axis_rotation_deg.to_radians(),
            filler_stiffness_ratio: self.filler_ratio,
            filler_density_ratio: self.filler_ratio,
        };
        m.validate()?;
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_cutoff")]
    pub cutoff: usize,
    #[serde(default = "default_n_bands")]
    pub n_bands: usize,
    #[serde(default = "default_samples")]
    pub samples_per_segment: usize,
    /// Overrides the geometry block's grid resolution.
    #[serde(default)]
    pub resolution: Option<usize>,
    /// Side of the uniform full-zone grid used to cross-check gap edges
    /// found on the path; 0 skips the scan.
    #[serde(default = "default_zone_samples")]
    pub zone_samples: usize,
}

fn default_zone_samples() -> usize {
    12
}

fn default_cutoff() -> usize {
    DEFAULT_CUTOFF
}

fn default_n_bands() -> usize {
    10
}

fn default_samples() -> usize {
    12
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { cutoff: DEFAULT_CUTOFF, n_bands: 10, samples_per_segment: 12, resolution: None, zone_samples: 12 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefectConfig {
    pub kind: DefectKind,
    #[serde(rename = "W", default = "one")]
    pub w: f64,
    #[serde(default)]
    pub circle_radius: Option<f64>,
    #[serde(default = "default_transverse")]
    pub n_transverse: usize,
    #[serde(default = "default_kx")]
    pub kx_samples: usize,
    /// Defaults to enough bands to cover the bulk gap.
    #[serde(default)]
    pub n_bands: Option<usize>,
    #[serde(default = "default_waveguide_cutoff")]
    pub cutoff: usize,
}

fn one() -> f64 {
    1.0
}

fn default_transverse() -> usize {
    DEFAULT_N_TRANSVERSE
}

fn default_kx() -> usize {
    9
}

fn default_waveguide_cutoff() -> usize {
    DEFAULT_WAVEGUIDE_CUTOFF
}

impl DefectConfig {
    pub fn spec(&self) -> DefectSpec {
        DefectSpec { kind: self.kind, w: self.w, circle_radius: self.circle_radius }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeterostructureConfig {
    pub mirror_w: f64,
    pub core_w: f64,
    pub core_periods: usize,
    #[serde(default = "default_mirror_periods")]
    pub mirror_periods: usize,
    #[serde(default = "default_n_modes")]
    pub n_modes: usize,
    #[serde(default = "default_transverse")]
    pub n_transverse: usize,
    #[serde(default = "default_cavity_cutoff")]
    pub cutoff: usize,
}

fn default_mirror_periods() -> usize {
    DEFAULT_MIRROR_PERIODS
}

fn default_n_modes() -> usize {
    4
}

fn default_cavity_cutoff() -> usize {
    DEFAULT_CAVITY_CUTOFF
}

impl HeterostructureConfig {
    pub fn spec(&self) -> HeterostructureSpec {
        HeterostructureSpec {
            mirror_w: self.mirror_w,
            core_w: self.core_w,
            core_periods: self.core_periods,
            mirror_periods: self.mirror_periods,
        }
    }
}

/// Cascade rates in GHz (ordinary frequency); converted to angular
/// frequency on entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CascadeConfig {
    #[serde(rename = "g12_GHz")]
    pub g12: f64,
    #[serde(rename = "g13_GHz")]
    pub g13: f64,
    #[serde(rename = "g23_GHz")]
    pub g23: f64,
    #[serde(rename = "kappa_eo_GHz")]
    pub kappa_eo: f64,
    #[serde(rename = "kappa_em_GHz")]
    pub kappa_em: f64,
    #[serde(rename = "kappa_io_GHz")]
    pub kappa_io: f64,
    #[serde(rename = "kappa_im_GHz")]
    pub kappa_im: f64,
    #[serde(rename = "gamma3_GHz")]
    pub gamma3: f64,
    #[serde(rename = "gamma2_GHz")]
    pub gamma2: f64,
    #[serde(default = "default_factor")]
    pub regime_factor: f64,
    /// Half-range of the detuning axis in linewidths.
    #[serde(default = "default_span")]
    pub detuning_span: f64,
    #[serde(default = "default_curve_samples")]
    pub n_samples: usize,
    #[serde(default = "default_betas")]
    pub betas: Vec<f64>,
    #[serde(default)]
    pub wavepacket: Option<WavepacketConfig>,
}

fn default_factor() -> f64 {
    DEFAULT_REGIME_FACTOR
}

fn default_span() -> f64 {
    3.0
}

fn default_curve_samples() -> usize {
    601
}

fn default_betas() -> Vec<f64> {
    REFERENCE_BETAS.to_vec()
}

/// Incident photon spectrum, with centre and width in units of the total
/// linewidth `Γ13 + Γ23 + γ3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WavepacketConfig {
    pub shape: SpectralShape,
    #[serde(default)]
    pub center_over_linewidth: f64,
    pub width_over_linewidth: f64,
}

impl CascadeConfig {
    /// Rates as angular frequencies in rad/s.
    pub fn rates(&self) -> EmitterRates {
        let w = |f: f64| 2.0 * PI * f * 1e9;
        EmitterRates {
            g12: w(self.g12),
            g13: w(self.g13),
            g23: w(self.g23),
            kappa_eo: w(self.kappa_eo),
            kappa_em: w(self.kappa_em),
            kappa_io: w(self.kappa_io),
            kappa_im: w(self.kappa_im),
            gamma3: w(self.gamma3),
            gamma2: w(self.gamma2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepCommand {
    Bands,
    Defect,
    Cascade,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub command: SweepCommand,
    /// Dotted path into the configuration, e.g. `defect.W`.
    pub parameter: String,
    pub values: Vec<Value>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_value(value: Value) -> Result<Self> {
        serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Ok((Self::from_json(&text)?, text))
    }

    pub fn geometry(&self) -> Result<&GeometryConfig> {
        self.geometry.as_ref().ok_or_else(|| Error::Config("missing \"geometry\" block".into()))
    }

    /// The reference design with every block filled in.
    pub fn reference() -> Self {
        Self {
            geometry: Some(GeometryConfig::reference()),
            photonic: PhotonicConfig::default(),
            elastic: ElasticConfig::default(),
            solver: SolverConfig::default(),
            defect: None,
            heterostructure: None,
            cascade: None,
            sweep: None,
        }
    }
}

/// Sets the value at a dotted path, creating intermediate objects. The
/// result still has to deserialize as a [`RunConfig`] to be usable.
pub fn set_path(root: &mut Value, path: &str, value: Value) -> Result<()> {
    let keys: Vec<&str> = path.split('.').collect();
    if path.is_empty() || keys.iter().any(|k| k.is_empty()) {
        return Err(Error::Config(format!("invalid parameter path {path:?}")));
    }
    let mut node = root;
    for key in &keys[..keys.len() - 1] {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("parameter path {path:?} crosses a non-object value")))?;
        node = obj.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    let obj = node
        .as_object_mut()
        .ok_or_else(|| Error::Config(format!("parameter path {path:?} crosses a non-object value")))?;
    obj.insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_geometry_block_parses() {
        let text = r#"{"geometry": {"a_nm": 300, "d_over_a": 0.65, "A_over_a": 0.45, "B_over_a": 0.6, "L_over_a": 0.17, "resolution": 256}}"#;
        let c = RunConfig::from_json(text).unwrap();
        assert_eq!(c.geometry.unwrap(), GeometryConfig::reference());
        assert_eq!(c.solver, SolverConfig::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(RunConfig::from_json(r#"{"geometri": {}}"#), Err(Error::Config(_))));
        let text = r#"{"elastic": {"c11_GPa": 1, "c12_GPa": 0.5, "c44_GPa": 0.3, "rho_kg_m3": 1, "c13_GPa": 2}}"#;
        assert!(RunConfig::from_json(text).is_err());
    }

    #[test]
    fn elastic_block_converts_units() {
        let text = r#"{"elastic": {"c11_GPa": 118.8, "c12_GPa": 53.8, "c44_GPa": 59.4, "rho_kg_m3": 5317, "axis_rotation_deg": 90}}"#;
        let m = RunConfig::from_json(text).unwrap().elastic.material().unwrap();
        assert!((m.c11 - 118.8e9).abs() < 1.0);
        assert!((m.axis_rotation - PI / 2.0).abs() < 1e-15);
        let partial = RunConfig::from_json(r#"{"elastic": {"axis_rotation_deg": 45}}"#).unwrap();
        assert_eq!(partial.elastic.c11_gpa, ElasticConfig::default().c11_gpa);
    }

    #[test]
    fn cascade_rates_are_angular() {
        let text = r#"{"cascade": {"g12_GHz": 1, "g13_GHz": 1, "g23_GHz": 1, "kappa_eo_GHz": 100, "kappa_em_GHz": 100,
            "kappa_io_GHz": 1, "kappa_im_GHz": 1, "gamma3_GHz": 0.01, "gamma2_GHz": 0.01}}"#;
        let c = RunConfig::from_json(text).unwrap().cascade.unwrap();
        assert!((c.rates().g13 - 2.0 * PI * 1e9).abs() < 1e-3);
        assert_eq!(c.betas, REFERENCE_BETAS.to_vec());
    }

    #[test]
    fn set_path_creates_and_overwrites() {
        let mut v = serde_json::json!({"defect": {"kind": "removed_row_w", "W": 0.58}});
        set_path(&mut v, "defect.W", serde_json::json!(0.52)).unwrap();
        set_path(&mut v, "solver.cutoff", serde_json::json!(9)).unwrap();
        let c = RunConfig::from_value(v.clone()).unwrap();
        assert_eq!(c.defect.unwrap().w, 0.52);
        assert_eq!(c.solver.cutoff, 9);
        set_path(&mut v, "defect.width", serde_json::json!(1)).unwrap();
        assert!(RunConfig::from_value(v.clone()).is_err());
        assert!(set_path(&mut v, "defect.W.x", serde_json::json!(1)).is_err());
        assert!(set_path(&mut v, "", serde_json::json!(1)).is_err());
    }
}
