//! Zero counting by the argument principle along polygonal contours.
//!
//! The phase of an analytic map is followed along the contour with adaptive
//! bisection: a step is accepted only when the phase jump stays below pi/2,
//! which rules out unnoticed whole-turn slips. A map vanishing on (or very
//! near) the contour makes the count ill-defined and reports an error
//! instead of a guess.

use crate::{CoreError, Result, C64};

/// Options for the adaptive phase walk.
#[derive(Debug, Clone, Copy)]
pub struct WindingOptions {
    /// Initial sample intervals per polygon edge.
    pub initial_per_edge: usize,
    /// Maximum bisection depth within one initial interval.
    pub max_depth: u32,
    /// Largest accepted phase jump per interval (radians).
    pub max_jump: f64,
    /// Values with modulus below this abort the count.
    pub min_modulus: f64,
}

impl Default for WindingOptions {
    fn default() -> Self {
        WindingOptions {
            initial_per_edge: 16,
            max_depth: 26,
            max_jump: std::f64::consts::FRAC_PI_2,
            min_modulus: 1e-13,
        }
    }
}

/// Corners of an axis-aligned rectangle, counterclockwise from the lower left.
pub fn rect_corners(re_lo: f64, re_hi: f64, im_lo: f64, im_hi: f64) -> [C64; 4] {
    [
        C64::new(re_lo, im_lo),
        C64::new(re_hi, im_lo),
        C64::new(re_hi, im_hi),
        C64::new(re_lo, im_hi),
    ]
}

/// Net winding of `f` around the closed polygon through `corners`.
///
/// Counterclockwise corners give the number of zeros minus poles enclosed,
/// counted with multiplicity.
pub fn winding_number<F>(mut f: F, corners: &[C64], opts: &WindingOptions) -> Result<i64>
where
    F: FnMut(C64) -> Result<C64>,
{
    if corners.len() < 3 {
        return Err(CoreError::InvalidArgument(
            "winding_number: need at least 3 corners".into(),
        ));
    }
    let mut total = 0.0_f64;
    let n_edges = corners.len();
    for e in 0..n_edges {
        let z0 = corners[e];
        let z1 = corners[(e + 1) % n_edges];
        total += edge_phase(&mut f, z0, z1, e, opts)?;
    }
    let turns = total / (2.0 * std::f64::consts::PI);
    let rounded = turns.round();
    if (turns - rounded).abs() > 0.05 {
        return Err(CoreError::ContourUnresolved {
            panel: n_edges,
            jump: turns - rounded,
            splits: 0,
        });
    }
    Ok(rounded as i64)
}

fn edge_phase<F>(f: &mut F, z0: C64, z1: C64, edge: usize, opts: &WindingOptions) -> Result<f64>
where
    F: FnMut(C64) -> Result<C64>,
{
    let at = |t: f64| z0 + t * (z1 - z0);
    let n0 = opts.initial_per_edge.max(1);
    let mut ts: Vec<f64> = (0..=n0).map(|j| j as f64 / n0 as f64).collect();
    let mut vs: Vec<C64> = Vec::with_capacity(ts.len());
    for &t in &ts {
        vs.push(checked_eval(f, at(t), edge, opts)?);
    }
    let mut acc = 0.0;
    let mut i = 0;
    let mut splits = 0u64;
    let budget = (opts.initial_per_edge as u64) << opts.max_depth.min(20);
    while i + 1 < ts.len() {
        let jump = (vs[i + 1] / vs[i]).arg();
        let width = ts[i + 1] - ts[i];
        if jump.abs() <= opts.max_jump {
            acc += jump;
            i += 1;
            continue;
        }
        if width < 0.5_f64.powi(opts.max_depth as i32) / n0 as f64 || splits > budget {
            return Err(CoreError::ContourUnresolved {
                panel: edge,
                jump,
                splits: splits as usize,
            });
        }
        let tm = 0.5 * (ts[i] + ts[i + 1]);
        let vm = checked_eval(f, at(tm), edge, opts)?;
        ts.insert(i + 1, tm);
        vs.insert(i + 1, vm);
        splits += 1;
    }
    Ok(acc)
}

fn checked_eval<F>(f: &mut F, z: C64, edge: usize, opts: &WindingOptions) -> Result<C64>
where
    F: FnMut(C64) -> Result<C64>,
{
    let v = f(z)?;
    if !v.is_finite() || v.norm() < opts.min_modulus {
        return Err(CoreError::ContourUnresolved {
            panel: edge,
            jump: v.norm(),
            splits: 0,
        });
    }
    Ok(v)
}
