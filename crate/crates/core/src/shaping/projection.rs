use std::cmp::Ordering;

use crate::error::{Error, Result};

struct Breakpoint {
    value: f64,
    /// Change in `-dS/dz` when `z` crosses this point downwards.
    slope: f64,
    index: usize,
    upper: bool,
}

/// Solves `argmin ‖x ∘ δ − y‖₂` over `x ∈ [0,1]^m, Σ x ≤ budget`.
///
/// The KKT conditions give `x_i(z) = clamp((2 δ_i y_i − z) / (2 δ_i²), 0, 1)` for a
/// multiplier `z ≥ 0`. Each coordinate contributes two breakpoints, `2 δ_i y_i` (where it
/// reaches 0) and `2 δ_i (y_i − δ_i)` (where it reaches 1); `S(z) = Σ x_i(z)` is piecewise
/// linear between them, so a descending scan over the sorted breakpoints locates the
/// smallest `z ≥ 0` with `S(z) ≤ budget` in `O(m log m)`.
///
/// Coordinates with `δ_i = 0` cannot change the objective and are pinned to 0.
pub fn project_box_l1(delta: &[f64], y: &[f64], budget: f64) -> Result<Vec<f64>> {
    if delta.len() != y.len() {
        return Err(Error::domain(format!(
            "projection inputs differ in length ({} vs {})",
            delta.len(),
            y.len()
        )));
    }
    if let Some(i) = (0..delta.len()).find(|&i| !delta[i].is_finite() || !y[i].is_finite()) {
        return Err(Error::domain(format!(
            "non-finite projection input at coordinate {i}"
        )));
    }
    if budget.is_nan() {
        return Err(Error::domain("projection budget is NaN"));
    }
    let m = delta.len();
    let mut x = vec![0.0; m];
    if budget <= 0.0 {
        return Ok(x);
    }

    let mut bps = Vec::with_capacity(2 * m);
    for i in 0..m {
        let d = delta[i];
        if d == 0.0 {
            continue;
        }
        let slope = 1.0 / (2.0 * d * d);
        bps.push(Breakpoint {
            value: 2.0 * d * y[i],
            slope,
            index: i,
            upper: true,
        });
        bps.push(Breakpoint {
            value: 2.0 * d * (y[i] - d),
            slope: -slope,
            index: i,
            upper: false,
        });
    }
    bps.sort_by(|a, b| {
        b.value
            .partial_cmp(&a.value)
            .unwrap_or(Ordering::Equal)
            .then(a.index.cmp(&b.index))
            .then(b.upper.cmp(&a.upper))
    });

    let mut z = 0.0;
    let mut mass = 0.0;
    let mut slope = 0.0;
    for (k, bp) in bps.iter().enumerate() {
        if bp.value <= 0.0 {
            break;
        }
        slope += bp.slope;
        let next = bps.get(k + 1).map_or(0.0, |p| p.value.max(0.0));
        let next_mass = mass + slope * (bp.value - next);
        if next_mass >= budget && slope > 0.0 {
            z = (bp.value - (budget - mass) / slope).clamp(next, bp.value);
            break;
        }
        mass = next_mass;
    }

    for i in 0..m {
        let d = delta[i];
        if d != 0.0 {
            x[i] = ((2.0 * d * y[i] - z) / (2.0 * d * d)).clamp(0.0, 1.0);
        }
    }
    Ok(x)
}
