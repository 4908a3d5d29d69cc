use super::median;
use super::peaks::Peak;
use crate::{ModelParams, Spectrum};

/// Non-interacting initial guess from detected peaks.
///
/// For a Lorentzian of height A and full width κ the vertex curvature is
/// −8A/κ², so κ = √(8A/|c|) and g² = Aπκ/2. The `n` tallest peaks are used;
/// missing modes are spread uniformly over the grid with the median width and
/// 1% of the peak height. Returns the guess and any flags raised.
pub fn init_noninteracting(peaks: &[Peak], table: &Spectrum, n: usize) -> (ModelParams, Vec<String>) {
    let x = table.omega();
    let lo = x[0];
    let hi = x[x.len() - 1];
    let step = (hi - lo) / (x.len() - 1).max(1) as f64;
    let max_j = table.max_j();
    let mut flags = Vec::new();

    let mut chosen: Vec<Peak> = peaks.to_vec();
    chosen.sort_by(|a, b| b.height.partial_cmp(&a.height).unwrap_or(std::cmp::Ordering::Equal));
    chosen.truncate(n);
    chosen.sort_by(|a, b| a.position.partial_cmp(&b.position).unwrap_or(std::cmp::Ordering::Equal));

    let mut energies = Vec::with_capacity(n);
    let mut kappa = Vec::with_capacity(n);
    let mut g = Vec::with_capacity(n);
    for p in &chosen {
        let k = if p.curvature < 0.0 {
            (8.0 * p.height / p.curvature.abs()).sqrt()
        } else {
            flags.push(format!("flat_top_peak at {:.6} eV: kappa seeded as 10 grid steps", p.position));
            10.0 * step
        };
        let k = k.max(step).min(hi - lo);
        energies.push(p.position);
        kappa.push(k);
        g.push((p.height.max(0.0) * std::f64::consts::PI * k / 2.0).sqrt());
    }
    let missing = n - chosen.len();
    if missing > 0 {
        let k_fill = if kappa.is_empty() { (hi - lo) / (4.0 * n as f64) } else { median(&kappa) };
        let h_fill = 0.01 * max_j.max(f64::MIN_POSITIVE);
        flags.push(format!("{missing} mode(s) seeded uniformly: fewer peaks than requested modes"));
        for k in 0..missing {
            energies.push(lo + (hi - lo) * (k as f64 + 0.5) / missing as f64);
            kappa.push(k_fill);
            g.push((h_fill * std::f64::consts::PI * k_fill / 2.0).sqrt());
        }
    }
    let gmin = 1e-6 * g.iter().cloned().fold(0.0, f64::max).max(1e-30);
    for v in &mut g {
        *v = v.max(gmin);
    }
    let params =
        ModelParams::diagonal(&energies, kappa, g).expect("initial guess is valid by construction").sorted_by_energy();
    (params, flags)
}
