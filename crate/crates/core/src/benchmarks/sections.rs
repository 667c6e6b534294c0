use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Square,
    Circle,
    I,
    Star,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fill {
    Full,
    Medium,
    Hollow,
}

impl Fill {
    /// Inner-to-outer size ratio of the hole for self-similar hollow sections.
    pub fn hole_ratio(self) -> f64 {
        match self {
            Fill::Full => 0.0,
            Fill::Medium => 0.5,
            Fill::Hollow => 0.8,
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Shape::Square => "square",
            Shape::Circle => "circle",
            Shape::I => "i",
            Shape::Star => "star",
        };
        f.write_str(s)
    }
}

impl fmt::Display for Fill {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Fill::Full => "full",
            Fill::Medium => "medium",
            Fill::Hollow => "hollow",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossSection {
    pub shape: Shape,
    pub fill: Fill,
    /// Second moment of area divided by the squared area (dimensionless).
    pub inertia: f64,
}

/// Twelve cantilever cross-sections, numbered 1..=12 as squares, circles,
/// I-beams then stars, each shape as full, medium and hollow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSectionTable {
    entries: Vec<CrossSection>,
}

/// Web and flange thickness of the I-beams, as fractions of a unit-square
/// bounding box, for full, medium and hollow variants.
pub const I_BEAM_THICKNESS: [(f64, f64); 3] = [(0.48, 0.32), (0.38, 0.25), (0.28, 0.18)];

/// Inner radius of the five-pointed star relative to its outer radius.
pub const STAR_INNER_RATIO: f64 = 0.5;

const SHAPES: [Shape; 4] = [Shape::Square, Shape::Circle, Shape::I, Shape::Star];
const FILLS: [Fill; 3] = [Fill::Full, Fill::Medium, Fill::Hollow];

impl Default for CrossSectionTable {
    /// Values computed from section geometry; see [`Fill::hole_ratio`],
    /// [`I_BEAM_THICKNESS`] and [`STAR_INNER_RATIO`].
    fn default() -> Self {
        let mut entries = Vec::with_capacity(12);
        for shape in SHAPES {
            for (k, fill) in FILLS.into_iter().enumerate() {
                let inertia = match shape {
                    Shape::Square => hollow_factor(fill) / 12.0,
                    Shape::Circle => hollow_factor(fill) / (4.0 * PI),
                    Shape::I => {
                        let (tw, tf) = I_BEAM_THICKNESS[k];
                        i_beam_inertia(1.0, 1.0, tw, tf)
                    }
                    Shape::Star => hollow_factor(fill) * polygon_inertia(&star_vertices(5, 1.0, STAR_INNER_RATIO)),
                };
                entries.push(CrossSection { shape, fill, inertia });
            }
        }
        Self { entries }
    }
}

impl CrossSectionTable {
    /// Table with the default shapes and fills but user-supplied inertias.
    pub fn with_inertias(inertias: &[f64]) -> Result<Self> {
        if inertias.len() != 12 {
            return Err(Error::InvalidArgument(format!(
                "expected 12 normalized inertias, got {}",
                inertias.len()
            )));
        }
        if let Some(bad) = inertias.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidArgument(format!("normalized inertia {bad} must be positive")));
        }
        let mut table = Self::default();
        for (e, &v) in table.entries.iter_mut().zip(inertias) {
            e.inertia = v;
        }
        Ok(table)
    }

    pub fn entries(&self) -> &[CrossSection] {
        &self.entries
    }

    /// Entry for `section` in 1..=12.
    pub fn get(&self, section: usize) -> Result<&CrossSection> {
        section
            .checked_sub(1)
            .and_then(|i| self.entries.get(i))
            .ok_or_else(|| Error::InvalidPoint(format!("cross-section {section} is outside 1..=12")))
    }

    pub fn inertia(&self, section: usize) -> Result<f64> {
        let v = self.get(section)?.inertia;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(Error::InvalidArgument(format!("normalized inertia {v} must be positive")))
        }
    }

    /// Labels such as `square-full`, in section order.
    pub fn labels(&self) -> Vec<String> {
        self.entries.iter().map(|e| format!("{}-{}", e.shape, e.fill)).collect()
    }
}

/// Ratio between a section with a self-similar hole and the full section:
/// `I ∝ 1 − ρ⁴`, `A ∝ 1 − ρ²`.
fn hollow_factor(fill: Fill) -> f64 {
    let r2 = fill.hole_ratio().powi(2);
    (1.0 + r2) / (1.0 - r2)
}

/// I-beam of width `b` and height `h` with web thickness `tw` and flange
/// thickness `tf`; bending about the strong axis.
pub fn i_beam_inertia(b: f64, h: f64, tw: f64, tf: f64) -> f64 {
    let web = h - 2.0 * tf;
    let area = b * h - (b - tw) * web;
    let second_moment = (b * h.powi(3) - (b - tw) * web.powi(3)) / 12.0;
    second_moment / (area * area)
}

/// Vertices of a star polygon with `points` tips, alternating between the
/// outer and inner radius, counter-clockwise.
pub fn star_vertices(points: usize, outer: f64, inner_ratio: f64) -> Vec<(f64, f64)> {
    (0..2 * points)
        .map(|k| {
            let r = if k % 2 == 0 { outer } else { outer * inner_ratio };
            let a = PI / 2.0 + PI * k as f64 / points as f64;
            (r * a.cos(), r * a.sin())
        })
        .collect()
}

/// Second moment of area about the horizontal centroidal axis divided by the
/// squared area, for a simple counter-clockwise polygon.
pub fn polygon_inertia(v: &[(f64, f64)]) -> f64 {
    let n = v.len();
    let (mut a, mut cy, mut ix) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (x0, y0) = v[i];
        let (x1, y1) = v[(i + 1) % n];
        let cross = x0 * y1 - x1 * y0;
        a += cross;
        cy += (y0 + y1) * cross;
        ix += (y0 * y0 + y0 * y1 + y1 * y1) * cross;
    }
    let area = a / 2.0;
    let cy = cy / (6.0 * area);
    let ix = ix / 12.0 - area * cy * cy;
    ix / (area * area)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn table_layout() {
        let t = CrossSectionTable::default();
        assert_eq!(t.entries().len(), 12);
        assert_eq!(t.get(1).unwrap().shape, Shape::Square);
        assert_eq!(t.get(4).unwrap().shape, Shape::Circle);
        assert_eq!(t.get(9).unwrap().shape, Shape::I);
        assert_eq!(t.get(12).unwrap().shape, Shape::Star);
        for group in [[1, 4, 7, 10], [2, 5, 8, 11], [3, 6, 9, 12]] {
            let fill = t.get(group[0]).unwrap().fill;
            assert!(group.iter().all(|&s| t.get(s).unwrap().fill == fill));
        }
        assert!(t.entries().iter().all(|e| e.inertia > 0.0));
        let mut v: Vec<f64> = t.entries().iter().map(|e| e.inertia).collect();
        v.sort_by(f64::total_cmp);
        assert!(v.windows(2).all(|w| w[1] > w[0]));
        assert!(t.get(0).is_err() && t.get(13).is_err());
        assert_eq!(t.labels()[8], "i-hollow");
    }

    #[test]
    fn closed_forms() {
        let t = CrossSectionTable::default();
        assert_abs_diff_eq!(t.inertia(1).unwrap(), 1.0 / 12.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.inertia(4).unwrap(), 1.0 / (4.0 * PI), epsilon = 1e-15);
        // Hollow square of outer side b and inner side a: (b² + a²)/(12(b² − a²)).
        let (b, a) = (1.0f64, 0.8f64);
        assert_abs_diff_eq!(t.inertia(3).unwrap(), (b * b + a * a) / (12.0 * (b * b - a * a)), epsilon = 1e-14);
        // A solid I-beam (web as wide as the flanges) is a square.
        assert_abs_diff_eq!(i_beam_inertia(1.0, 1.0, 1.0, 0.2), 1.0 / 12.0, epsilon = 1e-15);
        // Thinner walls spread the same area further from the axis.
        for g in 0..3 {
            let full = t.inertia(1 + 3 * g).unwrap();
            assert!(t.inertia(2 + 3 * g).unwrap() > full);
            assert!(t.inertia(3 + 3 * g).unwrap() > t.inertia(2 + 3 * g).unwrap());
        }
    }

    #[test]
    fn polygon_formula() {
        let square = [(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0)];
        assert_abs_diff_eq!(polygon_inertia(&square), 1.0 / 12.0, epsilon = 1e-15);
        // A fine regular polygon approaches the disk.
        let ngon = star_vertices(2000, 1.0, 1.0);
        assert_abs_diff_eq!(polygon_inertia(&ngon), 1.0 / (4.0 * PI), epsilon = 1e-6);
        // Rectangle b × h: (b h³/12)/(b h)² = h/(12 b).
        let rect = [(0.0, 0.0), (3.0, 0.0), (3.0, 1.0), (0.0, 1.0)];
        assert_abs_diff_eq!(polygon_inertia(&rect), 1.0 / 36.0, epsilon = 1e-15);
    }

    #[test]
    fn custom_inertias() {
        let t = CrossSectionTable::with_inertias(&[1.0; 12]).unwrap();
        assert_eq!(t.inertia(7).unwrap(), 1.0);
        assert_eq!(t.get(7).unwrap().shape, Shape::I);
        assert!(CrossSectionTable::with_inertias(&[1.0; 11]).is_err());
        let mut bad = [1.0; 12];
        bad[3] = 0.0;
        assert!(CrossSectionTable::with_inertias(&bad).is_err());
    }
}
