//! Adaptive Dormand–Prince 5(4) integration.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// 5th-order weights minus embedded 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Step-size controlled Dormand–Prince 5(4) integrator.
#[derive(Clone, Copy, Debug)]
pub struct DormandPrince {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub h_init: f64,
}

impl Default for DormandPrince {
    fn default() -> Self {
        DormandPrince { rtol: 1e-10, atol: 1e-10, max_steps: 200_000, h_init: 1e-2 }
    }
}

impl DormandPrince {
    pub fn with_tol(tol: f64) -> Self {
        DormandPrince { rtol: tol, atol: tol, ..Default::default() }
    }

    /// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction).
    ///
    /// `f` writes the derivative into its output slice and may fail, which
    /// aborts the integration.
    pub fn integrate<F>(&self, mut f: F, t0: f64, y0: &[f64], t1: f64) -> Result<Vec<f64>>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    {
        let n = y0.len();
        let mut y = y0.to_vec();
        if t1 == t0 {
            return Ok(y);
        }
        let dir = (t1 - t0).signum();
        let span = (t1 - t0).abs();
        let mut t = t0;
        let mut h = self.h_init.min(span);
        let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
        let mut tmp = vec![0.0; n];
        f(t, &y, &mut k[0])?;
        for _ in 0..self.max_steps {
            let remaining = (t1 - t).abs();
            if remaining <= 1e-14 * span {
                return Ok(y);
            }
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            let hs = dir * h;
            for s in 1..7 {
                for i in 0..n {
                    let mut acc = y[i];
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc += hs * A[s][j] * kj[i];
                    }
                    tmp[i] = acc;
                }
                f(t + C[s] * hs, &tmp, &mut k[s])?;
            }
            // stage 7 was evaluated at the 5th-order solution, held in `tmp`
            let mut err = 0.0;
            for i in 0..n {
                let e: f64 = (0..7).map(|s| E[s] * k[s][i]).sum::<f64>() * hs;
                let sc = self.atol + self.rtol * y[i].abs().max(tmp[i].abs());
                err += (e / sc) * (e / sc);
            }
            err = (err / n as f64).sqrt();
            if !err.is_finite() {
                return Err(Error::Ode(format!("non-finite error estimate at t = {t}")));
            }
            if err <= 1.0 {
                t = if last { t1 } else { t + hs };
                y.copy_from_slice(&tmp);
                let (first, rest) = k.split_at_mut(1);
                first[0].copy_from_slice(&rest[5]);
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                h *= fac;
            } else {
                h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
                if h < 1e-14 * span {
                    return Err(Error::Ode(format!("step size underflow at t = {t}")));
                }
            }
        }
        Err(Error::Ode(format!("exceeded {} steps", self.max_steps)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let dp = DormandPrince::with_tol(1e-12);
        let y = dp
            .integrate(
                |_, y, dy| {
                    dy[0] = y[0];
                    Ok(())
                },
                0.0,
                &[1.0],
                2.0,
            )
            .unwrap();
        assert!((y[0] - 2f64.exp()).abs() < 1e-10);
    }

    #[test]
    fn harmonic_oscillator_backwards() {
        let dp = DormandPrince::with_tol(1e-12);
        let y = dp
            .integrate(
                |_, y, dy| {
                    dy[0] = y[1];
                    dy[1] = -y[0];
                    Ok(())
                },
                0.0,
                &[1.0, 0.0],
                -3.0,
            )
            .unwrap();
        assert!((y[0] - 3f64.cos()).abs() < 1e-10);
        assert!((y[1] - 3f64.sin()).abs() < 1e-10);
    }

    #[test]
    fn rhs_failure_propagates() {
        let dp = DormandPrince::default();
        let r = dp.integrate(|t, _, _| if t > 0.5 { Err(Error::AtOrigin) } else { Ok(()) }, 0.0, &[0.0], 1.0);
        assert_eq!(r, Err(Error::AtOrigin));
    }
}
