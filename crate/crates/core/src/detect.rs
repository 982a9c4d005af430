//! Source locations from the significant peaks of the indicator map, and
//! point-source intensities `alpha_j ~ I(x_j) / Im Phi(x_j, x_j)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::Helmholtz;
use crate::geometry::{distance, Point};
use crate::imaging::ImagingResult;

pub const DEFAULT_THRESHOLD: f64 = 0.25;
pub const DEFAULT_MIN_SEPARATION: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionParams {
    /// Candidates must reach this fraction of the global indicator maximum.
    pub threshold: f64,
    /// Accepted peaks are at least this far apart.
    pub min_separation: f64,
    pub max_peaks: Option<usize>,
    /// Quadratic sub-grid refinement of the reported location.
    pub refine: bool,
}

impl Default for DetectionParams {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            min_separation: DEFAULT_MIN_SEPARATION,
            max_peaks: None,
            refine: false,
        }
    }
}

impl DetectionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(Error::Config(format!(
                "threshold must lie in (0, 1], got {}",
                self.threshold
            )));
        }
        if !(self.min_separation.is_finite() && self.min_separation >= 0.0) {
            return Err(Error::Config(format!(
                "min_separation must be nonnegative, got {}",
                self.min_separation
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Peak {
    pub location: Point,
    pub grid_index: usize,
    pub indicator: f64,
    /// `I` at the peak's lattice point.
    pub value: Complex64,
    pub intensity: Option<Complex64>,
    /// The peak touches the edge of the grid; the source may lie outside.
    pub on_boundary: bool,
}

/// Peaks in descending indicator order.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct PeakList {
    pub peaks: Vec<Peak>,
}

impl PeakList {
    pub fn len(&self) -> usize {
        self.peaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }

    pub fn locations(&self) -> Vec<Point> {
        self.peaks.iter().map(|p| p.location).collect()
    }
}

/// Greedy non-maximum suppression over local maxima of the indicator.
///
/// A grid point is a candidate when its indicator is `>=` every in-grid
/// neighbor and `>= threshold * max`. Candidates are visited in descending
/// value (ties by grid index) and dropped when closer than `min_separation`
/// to an accepted peak.
pub fn find_peaks(result: &ImagingResult, params: &DetectionParams) -> Result<PeakList> {
    params.validate()?;
    let grid = result.grid();
    let ind = result.indicator();
    let max = ind.iter().copied().fold(0.0, f64::max);
    if !(max > 0.0) {
        return Ok(PeakList::default());
    }
    let cut = params.threshold * max;
    let mut candidates: Vec<usize> = (0..ind.len())
        .filter(|&i| ind[i] >= cut && grid.neighbors(i).all(|n| ind[i] >= ind[n]))
        .collect();
    candidates.sort_by(|&a, &b| ind[b].total_cmp(&ind[a]).then(a.cmp(&b)));

    let limit = params.max_peaks.unwrap_or(usize::MAX);
    let mut peaks: Vec<Peak> = Vec::new();
    for i in candidates {
        if peaks.len() >= limit {
            break;
        }
        let location = if params.refine {
            refine_location(result, i)
        } else {
            grid.point(i)
        };
        if peaks.iter().any(|p| distance(&p.location, &location) < params.min_separation) {
            continue;
        }
        peaks.push(Peak {
            location,
            grid_index: i,
            indicator: ind[i],
            value: result.values()[i],
            intensity: None,
            on_boundary: grid.on_boundary(i),
        });
    }
    Ok(PeakList { peaks })
}

/// Vertex of the parabola through the peak and its two neighbors, per axis,
/// clamped to half a cell.
fn refine_location(result: &ImagingResult, index: usize) -> Point {
    let grid = result.grid();
    let ind = result.indicator();
    let ijk = grid.multi_index(index);
    let mut loc = grid.point(index);
    for axis in 0..grid.dim().count() {
        let n = grid.resolution()[axis];
        if ijk[axis] == 0 || ijk[axis] + 1 >= n {
            continue;
        }
        let mut lo = ijk;
        let mut hi = ijk;
        lo[axis] -= 1;
        hi[axis] += 1;
        let (fm, f0, fp) = (ind[grid.index(lo)], ind[index], ind[grid.index(hi)]);
        let curvature = fm - 2.0 * f0 + fp;
        if curvature < 0.0 {
            let offset = (0.5 * (fm - fp) / curvature).clamp(-0.5, 0.5);
            loc[axis] += offset * grid.spacing(axis);
        }
    }
    loc
}

/// Fills `intensity = I(x_j) / Im Phi(x_j, x_j)` for every peak.
///
/// Requires raw functional values: a normalized result is rejected.
pub fn estimate_intensities(peaks: &PeakList, result: &ImagingResult) -> Result<PeakList> {
    if result.is_normalized() {
        return Err(Error::Contract(
            "intensity estimation needs an unnormalized imaging result".into(),
        ));
    }
    let diag = Helmholtz::new(result.grid().dim(), result.wavenumber())?.im_green_diagonal();
    Ok(PeakList {
        peaks: peaks
            .peaks
            .iter()
            .map(|p| Peak {
                intensity: Some(p.value / diag),
                ..p.clone()
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_sampling_grid;

    fn result_from(values: Vec<f64>, nx: usize, ny: usize) -> ImagingResult {
        let g = make_sampling_grid(&[0.0, 0.0], &[(nx - 1) as f64, (ny - 1) as f64], &[nx, ny]).unwrap();
        ImagingResult::from_values(g, values.into_iter().map(|v| Complex64::new(v, 0.0)).collect(), 1.0, 1.0)
            .unwrap()
    }

    #[test]
    fn all_zero_map_has_no_peaks() {
        let r = result_from(vec![0.0; 16], 4, 4);
        assert!(find_peaks(&r, &DetectionParams::default()).unwrap().is_empty());
    }

    #[test]
    fn full_threshold_keeps_the_first_global_maximum() {
        let mut v = vec![0.0; 25];
        v[6] = 2.0;
        v[18] = 2.0;
        v[12] = 1.0;
        let r = result_from(v, 5, 5);
        let params = DetectionParams {
            threshold: 1.0,
            min_separation: 0.0,
            ..Default::default()
        };
        let peaks = find_peaks(&r, &params).unwrap();
        assert_eq!(peaks.len(), 2);
        assert_eq!(peaks.peaks[0].grid_index, 6);
        let capped = find_peaks(&r, &DetectionParams { max_peaks: Some(1), ..params }).unwrap();
        assert_eq!(capped.len(), 1);
        assert_eq!(capped.peaks[0].grid_index, 6);
    }

    #[test]
    fn separation_suppresses_nearby_candidates() {
        let mut v = vec![0.0; 49];
        v[8] = 3.0; // (1, 1)
        v[10] = 2.5; // (3, 1): distance 2
        v[40] = 2.0; // (5, 5)
        let r = result_from(v, 7, 7);
        let params = DetectionParams {
            threshold: 0.1,
            min_separation: 2.5,
            ..Default::default()
        };
        let peaks = find_peaks(&r, &params).unwrap();
        let idx: Vec<_> = peaks.peaks.iter().map(|p| p.grid_index).collect();
        assert_eq!(idx, vec![8, 40]);
    }

    #[test]
    fn boundary_peaks_are_flagged() {
        let mut v = vec![0.0; 16];
        v[0] = 1.0;
        let r = result_from(v, 4, 4);
        let peaks = find_peaks(&r, &DetectionParams::default()).unwrap();
        assert!(peaks.peaks[0].on_boundary);
    }

    #[test]
    fn refinement_moves_toward_the_heavier_side() {
        let mut v = vec![0.0; 25];
        v[12] = 1.0;
        v[13] = 0.8;
        v[11] = 0.2;
        let r = result_from(v, 5, 5);
        let params = DetectionParams {
            refine: true,
            ..Default::default()
        };
        let p = &find_peaks(&r, &params).unwrap().peaks[0];
        assert!(p.location[0] > 2.0 && p.location[0] <= 2.5);
        assert_eq!(p.location[1], 2.0);
    }

    #[test]
    fn bad_params_are_rejected() {
        let r = result_from(vec![1.0; 4], 2, 2);
        for params in [
            DetectionParams { threshold: 0.0, ..Default::default() },
            DetectionParams { threshold: 1.5, ..Default::default() },
            DetectionParams { min_separation: -1.0, ..Default::default() },
        ] {
            assert!(matches!(find_peaks(&r, &params), Err(Error::Config(_))));
        }
    }

    #[test]
    fn normalized_results_cannot_estimate_intensities() {
        let mut v = vec![0.0; 9];
        v[4] = 1.0;
        let r = result_from(v, 3, 3);
        let peaks = find_peaks(&r, &DetectionParams::default()).unwrap();
        assert!(matches!(
            estimate_intensities(&peaks, &r.normalized()),
            Err(Error::Contract(_))
        ));
        let est = estimate_intensities(&peaks, &r).unwrap();
        assert_eq!(est.peaks[0].intensity, Some(Complex64::new(4.0, 0.0)));
    }
}
