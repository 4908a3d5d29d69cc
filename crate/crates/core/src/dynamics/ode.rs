//! Dormand–Prince 5(4) with Hairer's continuous extension, for complex
//! linear/nonlinear systems y' = f(y). Output is interpolated onto the
//! requested times.

use crate::error::{Error, Result};
use crate::scalar::C64;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const MAX_STEPS: usize = 50_000_000;

pub(crate) struct Dopri5Stats {
    pub accepted: usize,
    pub rejected: usize,
}

/// Integrates from t = outputs[0] and returns y at every output time.
/// `scale` is a rough magnitude of the right-hand side's spectral radius,
/// used for the first step.
pub(crate) fn dopri5<F>(
    mut f: F,
    y0: &[C64],
    outputs: &[f64],
    rtol: f64,
    atol: f64,
    scale: f64,
) -> Result<(Vec<Vec<C64>>, Dopri5Stats)>
where
    F: FnMut(&[C64], &mut [C64]),
{
    let n = y0.len();
    let mut result = Vec::with_capacity(outputs.len());
    if outputs.is_empty() {
        return Ok((result, Dopri5Stats { accepted: 0, rejected: 0 }));
    }
    result.push(y0.to_vec());
    let t_end = *outputs.last().unwrap();
    let mut t = outputs[0];
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<C64>> = vec![vec![C64::new(0.0, 0.0); n]; 7];
    let mut tmp = vec![C64::new(0.0, 0.0); n];
    let mut y1 = vec![C64::new(0.0, 0.0); n];
    f(&y, &mut k[0]);

    let mut h = (0.01 / scale.max(1e-12)).min(t_end - t).max(1e-300);
    let mut next_out = 1;
    let mut stats = Dopri5Stats { accepted: 0, rejected: 0 };
    let mut fac_old: f64 = 1e-4;

    while next_out < outputs.len() {
        if stats.accepted + stats.rejected > MAX_STEPS {
            return Err(Error::Numerical("adaptive integrator exceeded its step budget".into()));
        }
        if t + h > t_end {
            h = t_end - t;
        }
        let stage = |coef: &[(usize, f64)], k: &[Vec<C64>], tmp: &mut [C64], y: &[C64]| {
            for i in 0..n {
                let mut s = C64::new(0.0, 0.0);
                for &(j, a) in coef {
                    s += k[j][i] * a;
                }
                tmp[i] = y[i] + s * h;
            }
        };
        stage(&[(0, A21)], &k, &mut tmp, &y);
        f(&tmp, &mut k[1]);
        stage(&[(0, A31), (1, A32)], &k, &mut tmp, &y);
        f(&tmp, &mut k[2]);
        stage(&[(0, A41), (1, A42), (2, A43)], &k, &mut tmp, &y);
        f(&tmp, &mut k[3]);
        stage(&[(0, A51), (1, A52), (2, A53), (3, A54)], &k, &mut tmp, &y);
        f(&tmp, &mut k[4]);
        stage(&[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)], &k, &mut tmp, &y);
        f(&tmp, &mut k[5]);
        stage(&[(0, A71), (2, A73), (3, A74), (4, A75), (5, A76)], &k, &mut y1, &y);
        f(&y1, &mut k[6]);

        let mut err = 0.0;
        for i in 0..n {
            let e = (k[0][i] * E1 + k[2][i] * E3 + k[3][i] * E4 + k[4][i] * E5 + k[5][i] * E6 + k[6][i] * E7) * h;
            let sc = atol + rtol * y[i].norm().max(y1[i].norm());
            err += (e.norm() / sc).powi(2);
        }
        let err = (err / n as f64).sqrt();
        if !err.is_finite() {
            return Err(Error::Numerical("non-finite error estimate in adaptive integrator".into()));
        }

        if err <= 1.0 {
            let t_new = t + h;
            while next_out < outputs.len() && outputs[next_out] <= t_new * (1.0 + 1e-15) {
                let theta = ((outputs[next_out] - t) / h).clamp(0.0, 1.0);
                result.push(dense(&y, &y1, &k, h, theta));
                next_out += 1;
            }
            t = t_new;
            y.copy_from_slice(&y1);
            k.swap(0, 6);
            stats.accepted += 1;
            // Lund-stabilized step control
            let fac = 0.9 * err.max(1e-10).powf(-0.17) * fac_old.powf(0.04);
            fac_old = err.max(1e-4);
            h *= fac.clamp(0.2, 10.0);
        } else {
            stats.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).max(0.2);
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::Numerical("adaptive integrator step size underflow".into()));
        }
    }
    Ok((result, stats))
}

fn dense(y0: &[C64], y1: &[C64], k: &[Vec<C64>], h: f64, theta: f64) -> Vec<C64> {
    let th1 = 1.0 - theta;
    (0..y0.len())
        .map(|i| {
            let r2 = y1[i] - y0[i];
            let r3 = k[0][i] * h - r2;
            let r4 = r2 - k[6][i] * h - r3;
            let r5 = (k[0][i] * D1 + k[2][i] * D3 + k[3][i] * D4 + k[4][i] * D5 + k[5][i] * D6 + k[6][i] * D7) * h;
            y0[i] + (r2 + (r3 + (r4 + r5 * th1) * theta) * th1) * theta
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_phase() {
        // y' = −iωy → y = e^{−iωt}
        let w = 1.7;
        let ts: Vec<f64> = (0..=200).map(|k| k as f64 * 0.37).collect();
        let (ys, stats) =
            dopri5(|y, dy| dy[0] = C64::new(0.0, -w) * y[0], &[C64::new(1.0, 0.0)], &ts, 1e-12, 1e-14, w).unwrap();
        for (t, y) in ts.iter().zip(&ys) {
            let exact = C64::new(0.0, -w * t).exp();
            assert!((y[0] - exact).norm() < 1e-9, "t = {t}");
        }
        assert!(stats.accepted > 0);
    }

    #[test]
    fn dense_output_between_steps() {
        // decay with coarse internal steps, fine output grid
        let ts: Vec<f64> = (0..=1000).map(|k| k as f64 * 0.005).collect();
        let (ys, _) = dopri5(|y, dy| dy[0] = -y[0], &[C64::new(1.0, 0.0)], &ts, 1e-10, 1e-12, 1.0).unwrap();
        for (t, y) in ts.iter().zip(&ys) {
            assert!((y[0].re - (-t).exp()).abs() < 1e-9);
        }
    }
}
