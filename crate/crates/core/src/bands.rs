//! Band-structure containers, gap detection and CSV output.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plot::{self, Series, Shade};
use crate::symmetry::KPath;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarization {
    /// In-plane electric field (`H_z` scalar problem).
    TE,
    /// Out-of-plane electric field (`E_z` scalar problem).
    TM,
    /// In-plane (plane-strain) elastic displacement.
    Elastic,
}

impl Polarization {
    pub fn unit_label(self) -> &'static str {
        match self {
            Polarization::TE | Polarization::TM => "THz",
            Polarization::Elastic => "GHz",
        }
    }
}

/// Frequencies sampled along a k-path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandStructure {
    pub kpath: KPath,
    /// `frequencies[k][band]`, ascending per k-point, in normalized units
    /// (`ωa/2πc` for light, `(ωa/2π)/√(c44/ρ)` for sound).
    pub frequencies: Vec<Vec<f64>>,
    pub polarization: Polarization,
    /// Normalized frequency of the air light line at each k-point.
    pub light_line: Option<Vec<f64>>,
    /// Physical frequency (in `unit_label`) per normalized unit.
    pub unit_scale: f64,
    /// Disclosures attached to every physical-unit report.
    pub notes: Vec<String>,
}

impl BandStructure {
    pub fn n_bands(&self) -> usize {
        self.frequencies.first().map_or(0, Vec::len)
    }

    pub fn band(&self, index: usize) -> impl Iterator<Item = f64> + '_ {
        self.frequencies.iter().map(move |f| f[index])
    }

    pub fn band_min(&self, index: usize) -> f64 {
        self.band(index).fold(f64::INFINITY, f64::min)
    }

    pub fn band_max(&self, index: usize) -> f64 {
        self.band(index).fold(f64::NEG_INFINITY, f64::max)
    }

    /// CSV with columns `k_index,path_length,band_index,freq_normalized,freq_<unit>`
    /// plus `above_light_line` for photonic structures.
    pub fn to_csv(&self) -> String {
        let unit = self.polarization.unit_label();
        let photonic = self.polarization != Polarization::Elastic;
        let mut out = format!("k_index,path_length,band_index,freq_normalized,freq_{unit}");
        if photonic {
            out.push_str(",above_light_line");
        }
        out.push('\n');
        for (ki, freqs) in self.frequencies.iter().enumerate() {
            for (bi, &f) in freqs.iter().enumerate() {
                out.push_str(&format!(
                    "{ki},{},{bi},{},{}",
                    self.kpath.path_length[ki],
                    f,
                    f * self.unit_scale
                ));
                if photonic {
                    let above = self.light_line.as_ref().is_some_and(|ll| f > ll[ki]);
                    out.push_str(if above { ",1" } else { ",0" });
                }
                out.push('\n');
            }
        }
        out
    }
}

impl BandStructure {
    /// Band diagram with shaded gaps, the light line (dashed) and
    /// high-symmetry labels.
    pub fn to_svg(&self, title: &str, gaps: &[Gap]) -> String {
        let x = &self.kpath.path_length;
        let columns: Vec<Vec<f64>> = (0..self.n_bands()).map(|b| self.band(b).collect()).collect();
        let mut series: Vec<Series> = columns.iter().map(|y| Series { label: "", x, y, dashed: false }).collect();
        if let Some(ll) = &self.light_line {
            series.push(Series { label: "light line", x, y: ll, dashed: true });
        }
        let shades: Vec<Shade> = gaps.iter().map(|g| Shade { y0: g.lower_edge, y1: g.upper_edge }).collect();
        let ticks: Vec<(f64, String)> = self
            .kpath
            .vertices
            .iter()
            .map(|v| (x[v.sample_index], v.label.clone()))
            .collect();
        let y_label = match self.polarization {
            Polarization::Elastic => "frequency (omega a / 2 pi v_t)",
            _ => "frequency (omega a / 2 pi c)",
        };
        plot::line_plot(title, "wave vector", y_label, &series, &shades, &ticks)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    /// Index of the band below the gap; the band above is `lower_band + 1`.
    pub lower_band: usize,
    pub lower_edge: f64,
    pub upper_edge: f64,
    pub midgap: f64,
    pub gap_to_midgap: f64,
    pub lower_edge_physical: f64,
    pub upper_edge_physical: f64,
    pub midgap_physical: f64,
}

impl Gap {
    pub fn contains(&self, f: f64) -> bool {
        f > self.lower_edge && f < self.upper_edge
    }

    pub fn width(&self) -> f64 {
        self.upper_edge - self.lower_edge
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub gaps: Vec<Gap>,
    pub unit: String,
    pub notes: Vec<String>,
}

impl GapReport {
    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }

    /// The gap with the largest gap-to-midgap ratio.
    pub fn widest(&self) -> Option<&Gap> {
        self.gaps.iter().max_by(|a, b| a.gap_to_midgap.total_cmp(&b.gap_to_midgap))
    }
}

fn gaps_of(per_k: &[Vec<f64>], unit_scale: f64, window: Option<(f64, f64)>) -> Vec<Gap> {
    let n_bands = per_k.iter().map(Vec::len).min().unwrap_or(0);
    let mut gaps = Vec::new();
    for i in 0..n_bands.saturating_sub(1) {
        let lower = per_k.iter().map(|f| f[i]).fold(f64::NEG_INFINITY, f64::max);
        let upper = per_k.iter().map(|f| f[i + 1]).fold(f64::INFINITY, f64::min);
        if upper > lower {
            if let Some((lo, hi)) = window {
                if upper < lo || lower > hi {
                    continue;
                }
            }
            let midgap = 0.5 * (upper + lower);
            gaps.push(Gap {
                lower_band: i,
                lower_edge: lower,
                upper_edge: upper,
                midgap,
                gap_to_midgap: (upper - lower) / midgap,
                lower_edge_physical: lower * unit_scale,
                upper_edge_physical: upper * unit_scale,
                midgap_physical: midgap * unit_scale,
            });
        }
    }
    gaps
}

/// Gaps between consecutive bands: band `i+1`'s minimum over k exceeds band
/// `i`'s maximum. `window` keeps only gaps that intersect the range.
pub fn find_gaps(bands: &BandStructure, window: Option<(f64, f64)>) -> Result<GapReport> {
    if bands.n_bands() < 2 {
        return Err(Error::invalid("gap detection needs at least two bands"));
    }
    Ok(GapReport {
        gaps: gaps_of(&bands.frequencies, bands.unit_scale, window),
        unit: bands.polarization.unit_label().to_string(),
        notes: bands.notes.clone(),
    })
}

/// Gaps common to every branch of every supplied band set. All sets must
/// share the same k-sampling; bands are merged per k-point before the search.
pub fn find_complete_gap(sets: &[&BandStructure]) -> Result<GapReport> {
    let first = sets.first().ok_or_else(|| Error::invalid("no band structures supplied"))?;
    let n_k = first.frequencies.len();
    if sets.iter().any(|s| s.frequencies.len() != n_k) {
        return Err(Error::invalid("band sets must share the same k-points"));
    }
    let merged: Vec<Vec<f64>> = (0..n_k)
        .map(|k| {
            let mut all: Vec<f64> = sets.iter().flat_map(|s| s.frequencies[k].iter().copied()).collect();
            all.sort_by(f64::total_cmp);
            all
        })
        .collect();
    if merged.iter().map(Vec::len).min().unwrap_or(0) < 2 {
        return Err(Error::invalid("gap detection needs at least two bands"));
    }
    let mut notes: Vec<String> = sets.iter().flat_map(|s| s.notes.iter().cloned()).collect();
    notes.dedup();
    Ok(GapReport {
        gaps: gaps_of(&merged, first.unit_scale, None),
        unit: first.polarization.unit_label().to_string(),
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;

    fn synthetic(bands: &[&[f64]], pol: Polarization) -> BandStructure {
        let nk = bands[0].len();
        let kpath = KPath::from_points((0..nk).map(|i| Vec2::new(i as f64, 0.0)).collect());
        BandStructure {
            kpath,
            frequencies: (0..nk).map(|k| bands.iter().map(|b| b[k]).collect()).collect(),
            polarization: pol,
            light_line: None,
            unit_scale: 1.0,
            notes: vec![],
        }
    }

    #[test]
    fn flat_bands_give_one_gap() {
        let bs = synthetic(&[&[0.2, 0.2, 0.2], &[0.3, 0.3, 0.3]], Polarization::TE);
        let r = find_gaps(&bs, None).unwrap();
        assert_eq!(r.gaps.len(), 1);
        let g = &r.gaps[0];
        assert_eq!((g.lower_edge, g.upper_edge), (0.2, 0.3));
        assert!((g.gap_to_midgap - 0.4).abs() < 1e-12);
    }

    #[test]
    fn overlapping_bands_give_no_gap() {
        let bs = synthetic(&[&[0.1, 0.25, 0.2], &[0.3, 0.22, 0.4]], Polarization::TE);
        assert!(find_gaps(&bs, None).unwrap().is_empty());
    }

    #[test]
    fn single_band_is_rejected() {
        let bs = synthetic(&[&[0.1, 0.2]], Polarization::TE);
        assert!(find_gaps(&bs, None).is_err());
    }

    #[test]
    fn window_filters_gaps() {
        let bs = synthetic(&[&[0.1, 0.1], &[0.2, 0.2], &[0.5, 0.5]], Polarization::TE);
        assert_eq!(find_gaps(&bs, None).unwrap().gaps.len(), 2);
        let r = find_gaps(&bs, Some((0.3, 0.4))).unwrap();
        assert_eq!(r.gaps.len(), 1);
        assert_eq!(r.gaps[0].lower_band, 1);
    }

    #[test]
    fn complete_gap_of_disjoint_sets() {
        let a = synthetic(&[&[0.1, 0.2], &[0.6, 0.7]], Polarization::Elastic);
        let b = synthetic(&[&[0.15, 0.3], &[0.5, 0.9]], Polarization::Elastic);
        let r = find_complete_gap(&[&a, &b]).unwrap();
        assert_eq!(r.gaps.len(), 1);
        assert_eq!((r.gaps[0].lower_edge, r.gaps[0].upper_edge), (0.3, 0.5));
    }

    #[test]
    fn complete_gap_absent_when_sets_interleave() {
        let a = synthetic(&[&[0.1, 0.2], &[0.6, 0.7]], Polarization::Elastic);
        let b = synthetic(&[&[0.15, 0.65], &[0.8, 0.9]], Polarization::Elastic);
        let r = find_complete_gap(&[&a, &b]).unwrap();
        // only the gap above every lower branch survives
        assert_eq!(r.gaps.len(), 1);
        assert_eq!((r.gaps[0].lower_edge, r.gaps[0].upper_edge), (0.7, 0.8));
    }

    #[test]
    fn csv_has_light_line_flag_for_light_only() {
        let mut bs = synthetic(&[&[0.1, 0.6]], Polarization::TE);
        bs.light_line = Some(vec![0.5, 0.5]);
        let csv = bs.to_csv();
        assert!(csv.starts_with("k_index,path_length,band_index,freq_normalized,freq_THz,above_light_line\n"));
        assert!(csv.lines().nth(1).unwrap().ends_with(",0"));
        assert!(csv.lines().nth(2).unwrap().ends_with(",1"));
        let el = synthetic(&[&[0.1, 0.6]], Polarization::Elastic).to_csv();
        assert!(el.starts_with("k_index,path_length,band_index,freq_normalized,freq_GHz\n"));
    }
}
