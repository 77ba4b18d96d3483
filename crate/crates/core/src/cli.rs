//! Subcommand implementations behind the `omc` binary.
//!
//! Every command writes into a private temporary directory next to the
//! output directory and moves the files into place only after all of them
//! were produced, so a failed run leaves no partial outputs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use tempfile::TempDir;

use crate::bands::{find_complete_gap, find_gaps, BandStructure, Gap, GapReport, Polarization};
use crate::cascade::{
    beta_family, effective_rates, family_svg, lorentzian_overlap, success_curve, validate_regime, wavepacket_success,
    SpectralDensity, SpectralShape, SuccessCurve, PHONON_BRANCH_LABEL,
};
use crate::config::{set_path, RunConfig, SweepCommand};
use crate::defects::{
    build_supercell, bulk_gap, cavity_modes, export_mode_profile, waveguide_bands, DomainMaterial, WaveguideBands,
};
use crate::error::{Error, Result};
use crate::geometry::{build_unit_cell, UnitCellGeometry};
use crate::phononic::elastic_band_structure;
use crate::photonic::band_structure;
use crate::plot::{self, Series, Shade};
use crate::symmetry::{irbz_path, zone_grid, KPath};

/// Reference-design band gaps reported for comparison only.
const REFERENCE_TE_GAP_THZ: (f64, f64) = (305.0, 383.0);
const REFERENCE_ELASTIC_GAP_GHZ: (f64, f64) = (4.7, 7.1);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Photonic,
    Phononic,
}

impl Domain {
    fn tag(self) -> &'static str {
        match self {
            Domain::Photonic => "photonic",
            Domain::Phononic => "phononic",
        }
    }
}

/// Files produced by one command plus a few scalar results used by sweeps.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunSummary {
    pub files: Vec<String>,
    pub metrics: BTreeMap<String, f64>,
    /// Lowest bands per k-point of the primary band structure (bands runs).
    #[serde(skip)]
    pub bands: Option<Vec<Vec<f64>>>,
}

/// Files staged in a temporary directory and moved into place on commit.
/// Destination for the files of one command.
pub trait Sink {
    fn path(&self, name: &str) -> PathBuf;
    /// Registers a file written directly under [`Sink::path`].
    fn record(&mut self, name: &str);
    fn files(&self) -> Vec<String>;

    fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
        let path = self.path(name);
        if let Some(p) = path.parent() {
            fs::create_dir_all(p)?;
        }
        fs::write(path, contents)?;
        self.record(name);
        Ok(())
    }

    fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::numerical(e.to_string()))?;
        text.push('\n');
        self.write(name, text)
    }
}

fn push_unique(files: &mut Vec<String>, name: &str) {
    if !files.iter().any(|f| f == name) {
        files.push(name.to_string());
    }
}

pub struct OutputSet {
    dir: TempDir,
    files: Vec<String>,
}

impl OutputSet {
    /// Stages next to `out_dir` so the final rename stays on one filesystem.
    pub fn new(out_dir: &Path) -> Result<Self> {
        let parent = match out_dir.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        fs::create_dir_all(&parent)?;
        Ok(Self { dir: tempfile::Builder::new().prefix(".omc-staging").tempdir_in(parent)?, files: Vec::new() })
    }

    /// Moves every top-level entry into `out_dir`, replacing existing ones.
    pub fn commit(self, out_dir: &Path) -> Result<Vec<String>> {
        fs::create_dir_all(out_dir)?;
        let mut entries: Vec<PathBuf> = fs::read_dir(self.dir.path())?.map(|e| e.map(|e| e.path())).collect::<std::io::Result<_>>()?;
        entries.sort();
        for src in entries {
            let dst = out_dir.join(src.file_name().expect("entry has a name"));
            if dst.is_dir() {
                fs::remove_dir_all(&dst)?;
            }
            fs::rename(&src, &dst)?;
        }
        Ok(self.files)
    }
}

fn unit_cell(config: &RunConfig) -> Result<UnitCellGeometry> {
    let g = config.geometry()?;
    build_unit_cell(&g.lattice()?, &g.hole(), config.solver.resolution.unwrap_or(g.resolution))
}

fn domain_material(config: &RunConfig, domain: Domain) -> Result<DomainMaterial> {
    Ok(match domain {
        Domain::Photonic => DomainMaterial::Photonic(config.photonic.material(config.geometry()?)?),
        Domain::Phononic => DomainMaterial::Elastic(config.elastic.material()?),
    })
}

fn gap_json(report: &GapReport, reference: (f64, f64)) -> Value {
    let widest = report.widest();
    json!({
        "unit": report.unit,
        "gaps": report.gaps,
        "widest": widest,
        "reference_comparison": {
            "note": "reference range from a three-dimensional membrane calculation; the 2D model is not expected to reproduce it",
            "reference_lower": reference.0,
            "reference_upper": reference.1,
            "computed_lower": widest.map(|g| g.lower_edge_physical),
            "computed_upper": widest.map(|g| g.upper_edge_physical),
        },
        "notes": report.notes,
    })
}

fn zone_path(unit: &UnitCellGeometry, n: usize) -> Option<KPath> {
    (n > 0).then(|| KPath::from_points(zone_grid(&unit.lattice, n)))
}

/// Gaps of the path and zone samples taken together, which can only be
/// narrower than the path-only gaps.
fn zone_gap_json(path: &BandStructure, zone: &BandStructure) -> Result<Value> {
    let mut merged = path.clone();
    merged.frequencies.extend(zone.frequencies.iter().cloned());
    let report = find_complete_gap(&[&merged])?;
    Ok(json!({
        "grid_points": zone.frequencies.len(),
        "gaps": report.gaps,
        "widest": report.widest(),
    }))
}

fn gap_metrics_zone(metrics: &mut BTreeMap<String, f64>, gap: &Value) {
    let widest = &gap["full_zone"]["widest"];
    for (key, field) in [("zone_gap_lower", "lower_edge"), ("zone_gap_upper", "upper_edge")] {
        if let Some(v) = widest[field].as_f64() {
            metrics.insert(key.into(), v);
        }
    }
}

fn lowest(bs: &BandStructure, n: usize) -> Vec<Vec<f64>> {
    bs.frequencies.iter().map(|f| f.iter().take(n).copied().collect()).collect()
}

fn gap_metrics(metrics: &mut BTreeMap<String, f64>, gap: Option<&Gap>) {
    if let Some(g) = gap {
        metrics.insert("gap_lower".into(), g.lower_edge);
        metrics.insert("gap_upper".into(), g.upper_edge);
        metrics.insert("gap_to_midgap".into(), g.gap_to_midgap);
    }
}

/// Bulk band structure, gap report and band diagram.
pub fn cmd_bands(config: &RunConfig, domain: Domain, out: &mut impl Sink) -> Result<RunSummary> {
    let unit = unit_cell(config)?;
    let s = &config.solver;
    let path = irbz_path(&unit.lattice, s.samples_per_segment)?;
    out.write("kpath.csv", path.to_csv())?;
    unit.write_pgm(&out.path("cell.pgm"))?;
    out.record("cell.pgm");
    let mut summary = RunSummary::default();
    match domain {
        Domain::Photonic => {
            let material = config.photonic.material(config.geometry()?)?;
            let te = band_structure(&unit, &material, &path, s.n_bands, s.cutoff, Polarization::TE)?;
            let tm = band_structure(&unit, &material, &path, s.n_bands, s.cutoff, Polarization::TM)?;
            let te_gaps = find_gaps(&te, None)?;
            let tm_gaps = find_gaps(&tm, None)?;
            out.write("bands_te.csv", te.to_csv())?;
            out.write("bands_tm.csv", tm.to_csv())?;
            out.write("bands_te.svg", te.to_svg("TE bands", &te_gaps.gaps))?;
            out.write("bands_tm.svg", tm.to_svg("TM bands", &tm_gaps.gaps))?;
            let mut te_json = gap_json(&te_gaps, REFERENCE_TE_GAP_THZ);
            let mut tm_json = gap_json(&tm_gaps, REFERENCE_TE_GAP_THZ);
            if let Some(zone) = zone_path(&unit, s.zone_samples) {
                for (pol, path_bands, target) in [(Polarization::TE, &te, &mut te_json), (Polarization::TM, &tm, &mut tm_json)] {
                    let zb = band_structure(&unit, &material, &zone, s.n_bands, s.cutoff, pol)?;
                    target["full_zone"] = zone_gap_json(path_bands, &zb)?;
                }
                gap_metrics_zone(&mut summary.metrics, &te_json);
            }
            out.write_json("gaps.json", &json!({ "te": te_json, "tm": tm_json }))?;
            gap_metrics(&mut summary.metrics, te_gaps.widest());
            summary.bands = Some(lowest(&te, 10));
        }
        Domain::Phononic => {
            let material = config.elastic.material()?;
            let bs = elastic_band_structure(&unit, &material, &path, s.n_bands, s.cutoff)?;
            let complete = find_complete_gap(&[&bs])?;
            out.write("bands_elastic.csv", bs.to_csv())?;
            out.write("bands_elastic.svg", bs.to_svg("In-plane elastic bands", &complete.gaps))?;
            let mut gap = gap_json(&complete, REFERENCE_ELASTIC_GAP_GHZ);
            if let Some(zone) = zone_path(&unit, s.zone_samples) {
                let zb = elastic_band_structure(&unit, &material, &zone, s.n_bands, s.cutoff)?;
                gap["full_zone"] = zone_gap_json(&bs, &zb)?;
                gap_metrics_zone(&mut summary.metrics, &gap);
            }
            out.write_json("gaps.json", &json!({ "complete_gap": gap }))?;
            gap_metrics(&mut summary.metrics, complete.widest());
            summary.bands = Some(lowest(&bs, 10));
        }
    }
    summary.files = out.files();
    Ok(summary)
}

fn waveguide_svg(wb: &WaveguideBands, title: &str) -> String {
    let x: Vec<f64> = wb.kx.iter().map(|k| k / std::f64::consts::PI).collect();
    let columns: Vec<Vec<f64>> = (0..wb.bands.n_bands()).map(|b| wb.bands.band(b).collect()).collect();
    let guided: Vec<Vec<f64>> = (0..wb.bands.n_bands())
        .map(|b| {
            (0..x.len())
                .map(|k| if wb.is_guided(k, b) { wb.bands.frequencies[k][b] } else { f64::NAN })
                .collect()
        })
        .collect();
    let mut series: Vec<Series> = columns.iter().map(|y| Series { label: "", x: &x, y, dashed: false }).collect();
    for (b, y) in guided.iter().enumerate() {
        if y.iter().any(|v| v.is_finite()) {
            let label = if wb.guided_bands.first().map(|g| g.band_index) == Some(b) { "guided" } else { "" };
            series.push(Series { label, x: &x, y, dashed: true });
        }
    }
    let shades: Vec<Shade> = wb.bulk_gap.iter().map(|g| Shade { y0: g.lower_edge, y1: g.upper_edge }).collect();
    let y_label = match wb.bands.polarization {
        Polarization::Elastic => "frequency (omega a / 2 pi v_t)",
        _ => "frequency (omega a / 2 pi c)",
    };
    plot::line_plot(title, "kx (pi / a)", y_label, &series, &shades, &[])
}

/// Waveguide bands and/or heterostructure cavity modes.
pub fn cmd_defect(config: &RunConfig, domain: Domain, out: &mut impl Sink) -> Result<RunSummary> {
    if config.defect.is_none() && config.heterostructure.is_none() {
        return Err(Error::Config("defect command needs a \"defect\" or \"heterostructure\" block".into()));
    }
    let unit = unit_cell(config)?;
    let material = domain_material(config, domain)?;
    let tag = domain.tag();
    let mut summary = RunSummary::default();
    if let Some(d) = &config.defect {
        let spec = d.spec();
        spec.validate()?;
        let sc = build_supercell(&unit, Some(&spec), d.n_transverse)?;
        let n_bands = match d.n_bands {
            Some(n) => n,
            None => {
                // cover the bulk gap: every row contributes its bands below the gap
                let lower = bulk_gap(&unit, &material, d.cutoff)?.map_or(1, |g| g.lower_band + 1);
                (lower + 1) * d.n_transverse + 4
            }
        };
        let wb = waveguide_bands(&sc, &material, n_bands, d.cutoff, d.kx_samples)?;
        out.write(&format!("waveguide_{tag}.csv"), wb.to_csv())?;
        out.write(&format!("waveguide_{tag}.svg"), waveguide_svg(&wb, "Projected waveguide bands"))?;
        out.write_json(
            &format!("waveguide_{tag}.json"),
            &json!({
                "defect": spec,
                "n_transverse": d.n_transverse,
                "cutoff": d.cutoff,
                "bulk_gap": wb.bulk_gap,
                "guided_bands": wb.guided_bands,
                "primary_guided_band": wb.primary_guided().map(|g| g.band_index),
                "unit": wb.bands.polarization.unit_label(),
                "unit_scale": wb.bands.unit_scale,
                "notes": wb.bands.notes,
            }),
        )?;
        summary.metrics.insert("guided_bands".into(), wb.guided_bands.len() as f64);
        if let Some(f) = wb.primary_edge(wb.kx.len() - 1) {
            summary.metrics.insert("band_edge".into(), f);
        }
    }
    if let Some(h) = &config.heterostructure {
        let hs = h.spec();
        let result = cavity_modes(&unit, &hs, &material, h.n_modes, h.cutoff, h.n_transverse)?;
        let mut modes = Vec::new();
        for (i, m) in result.modes.iter().enumerate() {
            let stem = format!("mode_{tag}_{i}");
            export_mode_profile(m, &out.path(&stem))?;
            out.record(&format!("{stem}.csv"));
            out.record(&format!("{stem}.svg"));
            modes.push(json!({
                "index": i,
                "frequency_normalized": m.frequency,
                "frequency_physical": m.frequency_physical,
                "unit": m.unit,
                "localization": m.localization,
                "decay_length": m.decay_length,
                "in_mirror_band": m.in_mirror_band,
                "profile": format!("{stem}.csv"),
            }));
        }
        out.write_json(
            &format!("cavity_{tag}.json"),
            &json!({
                "heterostructure": hs,
                "n_transverse": h.n_transverse,
                "cutoff": h.cutoff,
                "bulk_gap": result.bulk_gap,
                "mirror_bands": result.mirror_bands,
                "modes": modes,
                "notes": result.notes,
            }),
        )?;
        if let Some(m) = result.modes.first() {
            summary.metrics.insert("localization".into(), m.localization);
            summary.metrics.insert("mode_frequency".into(), m.frequency);
        }
    }
    summary.files = out.files();
    Ok(summary)
}

fn curve_family_csv(curves: &[SuccessCurve]) -> String {
    let mut out = String::from("delta_over_linewidth");
    for c in curves {
        out.push_str(&format!(",p_success_beta_{}", c.beta_cav));
    }
    out.push('\n');
    let n = curves.first().map_or(0, |c| c.samples.len());
    for i in 0..n {
        let c0 = &curves[0];
        out.push_str(&format!("{}", c0.samples[i].delta / c0.linewidth));
        for c in curves {
            out.push_str(&format!(",{}", c.samples[i].p_success));
        }
        out.push('\n');
    }
    out
}

/// Regime report, success curve for the configured rates and the β family.
pub fn cmd_cascade(config: &RunConfig, out: &mut impl Sink) -> Result<RunSummary> {
    let cc = config
        .cascade
        .as_ref()
        .ok_or_else(|| Error::Config("cascade command needs a \"cascade\" block".into()))?;
    let rates = cc.rates();
    let er = effective_rates(&rates)?;
    let regime = validate_regime(&rates, cc.regime_factor);
    if !regime.all_passed {
        log::warn!("rates fall outside the bad-cavity / large-cooperativity regime (factor {})", cc.regime_factor);
    }
    let lw = er.linewidth(rates.gamma3);
    let curve = success_curve(&er, rates.gamma3, (-cc.detuning_span * lw, cc.detuning_span * lw), cc.n_samples)?;
    let family = beta_family(&cc.betas, cc.detuning_span, cc.n_samples)?;
    let wavepacket = match &cc.wavepacket {
        Some(w) => {
            let spec = SpectralDensity {
                shape: w.shape,
                center: w.center_over_linewidth * lw,
                width: w.width_over_linewidth * lw,
            };
            let p = wavepacket_success(&spec, &er, rates.gamma3)?;
            let closed = (w.shape == SpectralShape::Lorentzian).then(|| lorentzian_overlap(&spec, &er, rates.gamma3));
            Some(json!({ "spectrum": w, "p_success": p, "closed_form": closed }))
        }
        None => None,
    };
    out.write("success_curve.csv", curve.to_csv())?;
    out.write("beta_family.csv", curve_family_csv(&family))?;
    let mut svg_curves = family.clone();
    svg_curves.push(curve.clone());
    out.write("success_curve.svg", family_svg(&svg_curves))?;
    let peak = curve.peak();
    out.write_json(
        "regime.json",
        &json!({
            "rates_angular_per_s": rates,
            "effective_rates": er,
            "regime": regime,
            "linewidth_angular_per_s": lw,
            "peak_success": peak,
            "family_peaks": family.iter().map(|c| json!({"beta_cav": c.beta_cav, "peak": c.peak()})).collect::<Vec<_>>(),
            "phonon_branch_efficiency": { "value": er.phonon_branch_efficiency(), "label": PHONON_BRANCH_LABEL },
            "wavepacket": wavepacket,
        }),
    )?;
    let mut summary = RunSummary::default();
    summary.metrics.insert("peak_success".into(), peak);
    summary.metrics.insert("beta_cav".into(), er.beta_cav);
    summary.files = out.files();
    Ok(summary)
}

fn value_label(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Runs the sweep block's command once per value, concurrently, into
/// `<command>_<index>/` subdirectories and writes `index.json` and
/// `sweep.csv`.
pub fn cmd_sweep(raw: &Value, domain: Domain, out: &mut impl Sink) -> Result<RunSummary> {
    let config = RunConfig::from_value(raw.clone())?;
    let sweep = config.sweep.as_ref().ok_or_else(|| Error::Config("sweep command needs a \"sweep\" block".into()))?;
    if sweep.values.is_empty() {
        return Err(Error::Config("sweep value list is empty".into()));
    }
    let command = sweep.command;
    let name = match command {
        SweepCommand::Bands => "bands",
        SweepCommand::Defect => "defect",
        SweepCommand::Cascade => "cascade",
    };
    // resolve every point before any solving
    let points: Vec<(String, RunConfig)> = sweep
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let mut point = raw.clone();
            if let Some(obj) = point.as_object_mut() {
                obj.remove("sweep");
            }
            set_path(&mut point, &sweep.parameter, v.clone())?;
            let cfg = RunConfig::from_value(point)
                .map_err(|e| Error::Config(format!("sweep value {} for {}: {e}", value_label(v), sweep.parameter)))?;
            Ok((format!("{name}_{i:02}"), cfg))
        })
        .collect::<Result<_>>()?;

    let root = out.path("");
    let results = points
        .par_iter()
        .map(|(dir, cfg)| {
            let mut sub = SubSink { root: root.join(dir), files: Vec::new() };
            fs::create_dir_all(&sub.root)?;
            let summary = match command {
                SweepCommand::Bands => cmd_bands(cfg, domain, &mut sub),
                SweepCommand::Defect => cmd_defect(cfg, domain, &mut sub),
                SweepCommand::Cascade => cmd_cascade(cfg, &mut sub),
            }?;
            Ok((dir.clone(), summary))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut runs = Vec::new();
    let mut keys: Vec<String> = results.iter().flat_map(|(_, s)| s.metrics.keys().cloned()).collect();
    keys.sort();
    keys.dedup();
    let convergence = matches!(command, SweepCommand::Bands);
    let reference = results.last().and_then(|(_, s)| s.bands.clone());
    let mut csv = sweep.parameter.to_string();
    for k in &keys {
        csv.push_str(&format!(",{k}"));
    }
    if convergence {
        csv.push_str(",max_rel_change_vs_last");
    }
    csv.push('\n');
    for ((dir, summary), value) in results.iter().zip(&sweep.values) {
        for f in &summary.files {
            out.record(&format!("{dir}/{f}"));
        }
        csv.push_str(&value_label(value));
        for k in &keys {
            csv.push(',');
            if let Some(v) = summary.metrics.get(k) {
                csv.push_str(&v.to_string());
            }
        }
        let mut change = None;
        if convergence {
            change = match (&summary.bands, &reference) {
                (Some(a), Some(b)) => Some(max_relative_change(a, b)),
                _ => None,
            };
            csv.push(',');
            if let Some(c) = change {
                csv.push_str(&c.to_string());
            }
        }
        csv.push('\n');
        runs.push(json!({
            "value": value,
            "directory": dir,
            "files": summary.files,
            "metrics": summary.metrics,
            "max_rel_change_vs_last": change,
        }));
    }
    out.write("sweep.csv", csv)?;
    out.write_json("index.json", &json!({ "command": name, "parameter": sweep.parameter, "runs": runs }))?;
    Ok(RunSummary { files: out.files(), metrics: BTreeMap::new(), bands: None })
}

/// Largest relative difference between matching entries of two band tables.
pub fn max_relative_change(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y))
        .filter(|(_, &y)| y.abs() > 1e-9)
        .map(|(&x, &y)| ((x - y) / y).abs())
        .fold(0.0, f64::max)
}

impl Sink for OutputSet {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
    fn record(&mut self, name: &str) {
        push_unique(&mut self.files, name)
    }
    fn files(&self) -> Vec<String> {
        self.files.clone()
    }
}

/// A subdirectory of another sink; sweep points write here.
struct SubSink {
    root: PathBuf,
    files: Vec<String>,
}

impl Sink for SubSink {
    fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }
    fn record(&mut self, name: &str) {
        push_unique(&mut self.files, name)
    }
    fn files(&self) -> Vec<String> {
        self.files.clone()
    }
}
