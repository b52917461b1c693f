//! Johnson's log-derivative propagator for ψ'' = W(R) ψ.
//!
//! Y = ψ'ψ⁻¹ is carried across each segment by free steps
//! Y ← (I + hY)⁻¹Y interleaved with Simpson-weighted potential impulses
//! Y ← Y + (h/3) w_n U_n, where U_n = W_n at even nodes and
//! U_n = (I − h²W_n/6)⁻¹ W_n at odd nodes (weights 1, 4, 2, …, 4, 1).

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A stretch [r0, r1] propagated with steps no longer than `h_max`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Segment {
    pub r0: f64,
    pub r1: f64,
    pub h_max: f64,
}

impl Segment {
    /// Even number of equal steps covering the segment.
    pub fn steps(&self) -> (usize, f64) {
        let len = self.r1 - self.r0;
        let mut n = (len / self.h_max).ceil() as usize;
        n = n.max(2);
        if n % 2 == 1 {
            n += 1;
        }
        (n, len / n as f64)
    }
}

/// Propagates Y from `segments[0].r0` to the end of the last segment. The
/// callback fills W(R) (Å⁻²) into the provided matrix.
pub fn propagate<F>(y0: DMatrix<f64>, segments: &[Segment], mut w_at: F) -> Result<DMatrix<f64>>
where
    F: FnMut(f64, &mut DMatrix<f64>),
{
    let n = y0.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    let mut y = y0;
    let mut w = DMatrix::<f64>::zeros(n, n);
    for seg in segments {
        if !(seg.r1 > seg.r0 && seg.h_max > 0.0) {
            return Err(Error::config(format!("invalid propagation segment {seg:?}")));
        }
        let (steps, h) = seg.steps();
        w_at(seg.r0, &mut w);
        y += &w * (h / 3.0);
        for k in 1..=steps {
            let r = seg.r0 + k as f64 * h;
            let z = &eye + &y * h;
            y = z.lu().solve(&y).ok_or_else(|| {
                Error::numerical(format!("singular log-derivative step at R = {r:.6} Å"))
            })?;
            w_at(r, &mut w);
            let (weight, u) = if k == steps {
                (1.0, w.clone())
            } else if k % 2 == 1 {
                let a = &eye - &w * (h * h / 6.0);
                let u = a.lu().solve(&w).ok_or_else(|| {
                    Error::numerical(format!("singular odd-node correction at R = {r:.6} Å"))
                })?;
                (4.0, u)
            } else {
                (2.0, w.clone())
            };
            y += u * (weight * h / 3.0);
            // keep Y exactly symmetric
            let yt = y.transpose();
            y += yt;
            y *= 0.5;
        }
    }
    Ok(y)
}
