use std::f64::consts::TAU;
use std::fmt::Write as _;

use rayon::prelude::*;

use super::{gamma_dcsl, gamma_ddp, DcslParams, DdpParams, MeasuredBound, Variant};
use crate::error::{invalid, require_positive, Result};
use crate::trapphys::ParticleSpec;

/// Minimum points per grid axis.
pub const MIN_AXIS_POINTS: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    pub name: String,
    pub values: Vec<f64>,
}

impl GridAxis {
    /// `n` log-spaced points from `lo` to `hi` inclusive.
    pub fn log_spaced(name: &str, lo: f64, hi: f64, n: usize) -> Result<Self> {
        require_positive("lo", lo)?;
        require_positive("hi", hi)?;
        if !(hi > lo) || n < 2 {
            return Err(invalid("axis", format!("{name}: need hi > lo and at least 2 points")));
        }
        let (a, b) = (lo.ln(), hi.ln());
        let mut values: Vec<f64> = (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect();
        values[0] = lo;
        values[n - 1] = hi;
        Ok(Self {
            name: name.to_string(),
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Which model fills the grid, and how the two axes map onto its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridModel {
    /// axis1 = r_C (m), axis2 = λ (1/s).
    Dcsl { temperature: f64, variant: Variant },
    /// axis1 = R₀ (m), axis2 = T (K).
    Ddp { variant: Variant },
}

impl GridModel {
    pub fn name(&self) -> &'static str {
        match self {
            GridModel::Dcsl { .. } => "dcsl",
            GridModel::Ddp { .. } => "ddp",
        }
    }

    /// γ/2π in Hz at one grid point.
    pub fn gamma_hz(&self, p: &ParticleSpec, a1: f64, a2: f64) -> Result<f64> {
        let g = match *self {
            GridModel::Dcsl { temperature, variant } => {
                let d = DcslParams::new(a2, a1, temperature)?;
                match variant {
                    Variant::Sphere => gamma_dcsl(p, &d, false)?,
                    Variant::SingleParticle => gamma_dcsl(p, &d, true)?,
                    Variant::Strong => {
                        let s = super::eta_dcsl_strong(p, &d)?;
                        let m_a = p.avg_nucleus_mass();
                        let c = super::chi(m_a, temperature, a1);
                        s.eta * 4.0 * a1 * a1 * c * (1.0 + c) * m_a / p.mass()
                    }
                }
            }
            GridModel::Ddp { variant } => {
                let d = DdpParams::new(a1, a2)?;
                match variant {
                    Variant::Sphere => gamma_ddp(p, &d, false)?,
                    Variant::SingleParticle => gamma_ddp(p, &d, true)?,
                    Variant::Strong => {
                        let s = super::eta_ddp_strong(p, &d)?;
                        let m_a = p.avg_nucleus_mass();
                        let c = super::chi(m_a, a2, a1);
                        s.eta * 4.0 * a1 * a1 * c * (1.0 + c) * m_a / p.mass()
                    }
                }
            }
        };
        if g.is_finite() {
            Ok(g / TAU)
        } else {
            Err(invalid("gamma", format!("non-finite at ({a1:e}, {a2:e})")))
        }
    }
}

/// Where the excluded/allowed state flips along one column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub column: usize,
    pub axis1: f64,
    pub axis2: f64,
    /// True when cells above the crossing (larger axis2) are excluded.
    pub excluded_above: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExclusionGrid {
    pub model: GridModel,
    pub axis1: GridAxis,
    pub axis2: GridAxis,
    pub bound: MeasuredBound,
    /// γ/2π (Hz), indexed `[i2][i1]`; NaN where evaluation failed.
    pub gamma_hz: Vec<Vec<f64>>,
    /// `[i2][i1]`; `None` marks an indeterminate cell.
    pub excluded: Vec<Vec<Option<bool>>>,
    pub indeterminate: Vec<(usize, usize, String)>,
    pub boundary: Vec<BoundaryPoint>,
}

impl ExclusionGrid {
    pub fn excluded_count(&self) -> usize {
        self.excluded.iter().flatten().filter(|c| **c == Some(true)).count()
    }

    pub fn cell_count(&self) -> usize {
        self.axis1.len() * self.axis2.len()
    }

    /// Boundary point with the smallest axis2 value.
    pub fn boundary_minimum(&self) -> Option<BoundaryPoint> {
        self.boundary.iter().copied().min_by(|a, b| a.axis2.total_cmp(&b.axis2))
    }

    /// True when every cell excluded here is also excluded in `other`.
    pub fn is_subset_of(&self, other: &ExclusionGrid) -> bool {
        self.excluded
            .iter()
            .flatten()
            .zip(other.excluded.iter().flatten())
            .all(|(a, b)| *a != Some(true) || *b == Some(true))
    }

    /// Columns: axis1, axis2, gamma_model_hz, excluded (1, 0 or blank).
    pub fn grid_csv(&self) -> String {
        let mut s = format!("{},{},gamma_model_hz,excluded\n", self.axis1.name, self.axis2.name);
        for (i2, row) in self.gamma_hz.iter().enumerate() {
            for (i1, g) in row.iter().enumerate() {
                let e = match self.excluded[i2][i1] {
                    Some(true) => "1",
                    Some(false) => "0",
                    None => "",
                };
                let _ = writeln!(s, "{:e},{:e},{:e},{}", self.axis1.values[i1], self.axis2.values[i2], g, e);
            }
        }
        s
    }

    /// Columns: axis1, axis2, excluded_above.
    pub fn boundary_csv(&self) -> String {
        let mut s = format!("{},{},excluded_above\n", self.axis1.name, self.axis2.name);
        for b in &self.boundary {
            let _ = writeln!(s, "{:e},{:e},{}", b.axis1, b.axis2, b.excluded_above as u8);
        }
        s
    }
}

/// Crossing of ln γ through ln b between two samples, interpolated in
/// log-log space; falls back to the log midpoint if either γ is zero.
fn crossing(x0: f64, x1: f64, g0: f64, g1: f64, b: f64) -> f64 {
    let (l0, l1) = (x0.ln(), x1.ln());
    let t = if g0 > 0.0 && g1 > 0.0 && b > 0.0 && g0 != g1 {
        ((b.ln() - g0.ln()) / (g1.ln() - g0.ln())).clamp(0.0, 1.0)
    } else {
        0.5
    };
    (l0 + t * (l1 - l0)).exp()
}

/// Evaluates the model on every cell and marks it excluded when γ/2π
/// exceeds the bound. Cells whose evaluation fails are recorded as
/// indeterminate; the rest of the grid is unaffected.
pub fn exclusion_map(
    model: &GridModel,
    axis1: &GridAxis,
    axis2: &GridAxis,
    p: &ParticleSpec,
    bound: &MeasuredBound,
) -> Result<ExclusionGrid> {
    for ax in [axis1, axis2] {
        if ax.len() < MIN_AXIS_POINTS {
            return Err(invalid(
                "axis",
                format!("{}: need at least {MIN_AXIS_POINTS} points, got {}", ax.name, ax.len()),
            ));
        }
        if ax.values.windows(2).any(|w| !(w[1] > w[0])) || !(ax.values[0] > 0.0) {
            return Err(invalid("axis", format!("{}: values must be positive and increasing", ax.name)));
        }
    }
    let b = bound.gamma_cm_upper_hz;
    let columns: Vec<Vec<std::result::Result<f64, String>>> = axis1
        .values
        .par_iter()
        .map(|&a1| {
            axis2
                .values
                .iter()
                .map(|&a2| model.gamma_hz(p, a1, a2).map_err(|e| e.to_string()))
                .collect()
        })
        .collect();

    let n1 = axis1.len();
    let n2 = axis2.len();
    let mut gamma_hz = vec![vec![f64::NAN; n1]; n2];
    let mut excluded = vec![vec![None; n1]; n2];
    let mut indeterminate = Vec::new();
    let mut boundary = Vec::new();
    for (i1, col) in columns.iter().enumerate() {
        for (i2, cell) in col.iter().enumerate() {
            match cell {
                Ok(g) => {
                    gamma_hz[i2][i1] = *g;
                    excluded[i2][i1] = Some(*g > b);
                }
                Err(e) => indeterminate.push((i1, i2, e.clone())),
            }
        }
        for i2 in 0..n2 - 1 {
            if let (Some(e0), Some(e1)) = (excluded[i2][i1], excluded[i2 + 1][i1]) {
                if e0 != e1 {
                    boundary.push(BoundaryPoint {
                        column: i1,
                        axis1: axis1.values[i1],
                        axis2: crossing(axis2.values[i2], axis2.values[i2 + 1], gamma_hz[i2][i1], gamma_hz[i2 + 1][i1], b),
                        excluded_above: e1,
                    });
                }
            }
        }
    }
    Ok(ExclusionGrid {
        model: *model,
        axis1: axis1.clone(),
        axis2: axis2.clone(),
        bound: *bound,
        gamma_hz,
        excluded,
        indeterminate,
        boundary,
    })
}

/// Closed interval of excluded values along a 1-D scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

/// Excluded intervals of a single-argument γ/2π(x) over log-spaced `xs`.
/// Interval ends are interpolated as in the grid boundary; an interval that
/// touches the end of the scan stops at the scan edge.
pub fn exclusion_scan<F>(xs: &[f64], bound: &MeasuredBound, gamma_hz: F) -> Result<Vec<Interval>>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if xs.len() < 2 {
        return Err(invalid("xs", "need at least 2 points"));
    }
    let g: Vec<f64> = xs.par_iter().map(|&x| gamma_hz(x)).collect::<Result<_>>()?;
    let b = bound.gamma_cm_upper_hz;
    let mut out = Vec::new();
    let mut start = if g[0] > b { Some(xs[0]) } else { None };
    for i in 0..xs.len() - 1 {
        let (e0, e1) = (g[i] > b, g[i + 1] > b);
        if e0 != e1 {
            let x = crossing(xs[i], xs[i + 1], g[i], g[i + 1], b);
            match start.take() {
                Some(lo) => out.push(Interval { lo, hi: x }),
                None => start = Some(x),
            }
        }
    }
    if let Some(lo) = start {
        out.push(Interval {
            lo,
            hi: *xs.last().unwrap(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn particle() -> ParticleSpec {
        ParticleSpec::silica(231e-9).unwrap().with_mass(9.6e-17).unwrap()
    }

    fn dcsl_axes(n: usize) -> (GridAxis, GridAxis) {
        (
            GridAxis::log_spaced("r_c_m", 1e-9, 1e-3, n).unwrap(),
            GridAxis::log_spaced("lambda_per_s", 1e-20, 1e-4, n).unwrap(),
        )
    }

    fn dcsl() -> GridModel {
        GridModel::Dcsl {
            temperature: 1e-7,
            variant: Variant::Sphere,
        }
    }

    #[test]
    fn extreme_bounds_exclude_all_or_nothing() {
        let (a1, a2) = dcsl_axes(50);
        let p = particle();
        let all = exclusion_map(&dcsl(), &a1, &a2, &p, &MeasuredBound::new(0.0, 0.95).unwrap()).unwrap();
        assert_eq!(all.excluded_count(), all.cell_count());
        assert!(all.boundary.is_empty());
        let none = exclusion_map(&dcsl(), &a1, &a2, &p, &MeasuredBound::new(1e300, 0.95).unwrap()).unwrap();
        assert_eq!(none.excluded_count(), 0);
    }

    #[test]
    fn boundary_lies_between_differing_cells_and_is_exact_for_linear_lambda() {
        let (a1, a2) = dcsl_axes(60);
        let p = particle();
        let bound = MeasuredBound::new(48e-6, 0.95).unwrap();
        let g = exclusion_map(&dcsl(), &a1, &a2, &p, &bound).unwrap();
        assert!(!g.boundary.is_empty());
        for bp in &g.boundary {
            assert!(bp.excluded_above);
            let want = super::super::dcsl::lambda_threshold(&p, bp.axis1, 1e-7, 48e-6, false).unwrap();
            assert!((bp.axis2 / want - 1.0).abs() < 1e-9);
        }
        let tighter = exclusion_map(&dcsl(), &a1, &a2, &p, &MeasuredBound::new(4.8e-6, 0.95).unwrap()).unwrap();
        assert!(g.is_subset_of(&tighter));
        assert!(tighter.excluded_count() > g.excluded_count());
    }

    #[test]
    fn small_axes_are_rejected() {
        let (a1, a2) = dcsl_axes(10);
        let bound = MeasuredBound::new(48e-6, 0.95).unwrap();
        assert!(exclusion_map(&dcsl(), &a1, &a2, &particle(), &bound).is_err());
    }

    #[test]
    fn csv_has_one_row_per_cell() {
        let (a1, a2) = dcsl_axes(50);
        let g = exclusion_map(&dcsl(), &a1, &a2, &particle(), &MeasuredBound::new(48e-6, 0.95).unwrap()).unwrap();
        assert_eq!(g.grid_csv().lines().count(), 1 + 2500);
        assert!(g.grid_csv().starts_with("r_c_m,lambda_per_s,gamma_model_hz,excluded"));
        assert_eq!(g.boundary_csv().lines().count(), 1 + g.boundary.len());
    }

    #[test]
    fn scan_reports_interior_and_edge_intervals() {
        let xs: Vec<f64> = (0..101).map(|i| 10f64.powf(-2.0 + 0.04 * i as f64)).collect();
        let bound = MeasuredBound::new(1.0, 0.95).unwrap();
        // bump above 1 for 0.1 < x < 10
        let iv = exclusion_scan(&xs, &bound, |x| Ok(2.0 / (x * 0.1 + 0.1 / x))).unwrap();
        assert_eq!(iv.len(), 1);
        assert!(iv[0].lo > 0.05 && iv[0].lo < 0.2 && iv[0].hi > 5.0 && iv[0].hi < 20.0);
        let edge = exclusion_scan(&xs, &bound, |x| Ok(1.0 / x)).unwrap();
        assert_eq!(edge[0].lo, xs[0]);
        assert!((edge[0].hi - 1.0).abs() < 1e-9);
    }
}
