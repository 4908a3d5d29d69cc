use serde::{Deserialize, Serialize};

use crate::Spectrum;

/// A local maximum of a sampled spectral density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// Vertex of the interpolating parabola (eV).
    pub position: f64,
    /// Interpolated height at the vertex (eV).
    pub height: f64,
    /// Second derivative of the interpolating parabola (eV⁻¹).
    pub curvature: f64,
    /// Topographic prominence (eV).
    pub prominence: f64,
}

/// Local maxima whose prominence is at least `prominence_frac · max(J)`,
/// ordered by position. Tables with fewer than 5 points yield no peaks.
pub fn detect_peaks(table: &Spectrum, prominence_frac: f64) -> Vec<Peak> {
    let x = table.omega();
    let y = table.j();
    let n = y.len();
    if n < 5 {
        return Vec::new();
    }
    let max = table.max_j();
    if max <= 0.0 {
        return Vec::new();
    }
    let threshold = prominence_frac * max;
    let mut peaks = Vec::new();
    let mut i = 1;
    while i < n - 1 {
        if y[i] > y[i - 1] {
            // walk across a plateau
            let mut k = i;
            while k + 1 < n && y[k + 1] == y[i] {
                k += 1;
            }
            if k + 1 < n && y[k + 1] < y[i] {
                let centre = (i + k) / 2;
                let prom = prominence(y, i, k);
                if prom >= threshold {
                    peaks.push(vertex(x, y, centre, prom));
                }
            }
            i = k + 1;
        } else {
            i += 1;
        }
    }
    peaks
}

/// Height above the higher of the two bases reached before climbing above the peak.
fn prominence(y: &[f64], left_edge: usize, right_edge: usize) -> f64 {
    let h = y[left_edge];
    let mut left_min = h;
    for k in (0..left_edge).rev() {
        if y[k] > h {
            break;
        }
        left_min = left_min.min(y[k]);
    }
    let mut right_min = h;
    for &v in &y[right_edge + 1..] {
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    h - left_min.max(right_min)
}

fn vertex(x: &[f64], y: &[f64], i: usize, prominence: f64) -> Peak {
    let (h0, h1) = (x[i] - x[i - 1], x[i + 1] - x[i]);
    let d0 = (y[i] - y[i - 1]) / h0;
    let d1 = (y[i + 1] - y[i]) / h1;
    let a = (d1 - d0) / (h0 + h1);
    let b = d0 + a * h0;
    if a < 0.0 {
        let shift = (-b / (2.0 * a)).clamp(-h0, h1);
        Peak { position: x[i] + shift, height: y[i] + b * shift + a * shift * shift, curvature: 2.0 * a, prominence }
    } else {
        // flat top: no usable curvature
        Peak { position: x[i], height: y[i], curvature: 0.0, prominence }
    }
}
