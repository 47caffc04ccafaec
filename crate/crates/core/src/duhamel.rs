//! Duhamel operators on grid fields.
//!
//! * `L(v)(x,t)   = 1/2 ∫_0^t ds ∫_{x-t+s}^{x+t-s} v(y,s) dy` (backward light triangle)
//! * `L'(v)(x,t)  = 1/2 ∫_0^t {v(x+t-s,s) + v(x-t+s,s)} ds` (both characteristic edges)
//! * `L̄'(v)(x,t) = 1/2 ∫_0^t {v(x+t-s,s) - v(x-t+s,s)} ds`
//!
//! All quadratures are composite trapezoid rules on the grid nodes. Because
//! `dx == dt`, the triangle edges pass through nodes and no interpolation is
//! needed.

use crate::error::Result;
use crate::grid::DiscreteField;

/// Trapezoid integral of a level over node indices `lo..=hi`.
fn level_trapezoid(level: &[f64], lo: usize, hi: usize, h: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let inner: f64 = level[lo + 1..hi].iter().sum();
    h * (0.5 * (level[lo] + level[hi]) + inner)
}

pub fn op_l(v: &DiscreteField, x: f64, t: f64) -> Result<f64> {
    let g = v.grid;
    let (i, n) = g.triangle_node(x, t)?;
    let mut acc = 0.0;
    for k in 0..n {
        let half = n - k;
        let inner = level_trapezoid(v.level(k), i - half, i + half, g.h);
        acc += if k == 0 { 0.5 * inner } else { inner };
    }
    // the apex level contributes a zero-width slice
    Ok(0.5 * g.h * acc)
}

/// Trapezoid sums of the two edge traces `v(x+t-s, s)` and `v(x-t+s, s)`.
fn edge_sums(v: &DiscreteField, i: usize, n: usize) -> (f64, f64) {
    let h = v.grid.h;
    let mut right = 0.0;
    let mut left = 0.0;
    for k in 0..=n {
        let w = if k == 0 || k == n { 0.5 } else { 1.0 };
        right += w * v.get(i + (n - k), k);
        left += w * v.get(i - (n - k), k);
    }
    if n == 0 {
        return (0.0, 0.0);
    }
    (h * right, h * left)
}

pub fn op_lprime(v: &DiscreteField, x: f64, t: f64) -> Result<f64> {
    let (i, n) = v.grid.triangle_node(x, t)?;
    let (right, left) = edge_sums(v, i, n);
    Ok(0.5 * (right + left))
}

pub fn op_lbarprime(v: &DiscreteField, x: f64, t: f64) -> Result<f64> {
    let (i, n) = v.grid.triangle_node(x, t)?;
    let (right, left) = edge_sums(v, i, n);
    Ok(0.5 * (right - left))
}

/// `L(v)` at every node, with `v` taken as zero off the grid.
///
/// Same quadrature as [`op_l`]; running prefix sums make each node cost
/// `O(n)` instead of `O(n^2)`.
pub fn apply_l(v: &DiscreteField) -> DiscreteField {
    let g = v.grid;
    let nx = g.nx();
    let h = g.h;
    // prefix[k][j] = trapezoid integral on level k from node 0 to node j
    let prefix: Vec<Vec<f64>> = (0..=g.nt)
        .map(|k| {
            let lv = v.level(k);
            let mut c = vec![0.0; nx];
            for j in 1..nx {
                c[j] = c[j - 1] + 0.5 * h * (lv[j - 1] + lv[j]);
            }
            c
        })
        .collect();
    let slice = |k: usize, lo: isize, hi: isize| -> f64 {
        let c = &prefix[k];
        let lo = lo.clamp(0, nx as isize - 1) as usize;
        let hi = hi.clamp(0, nx as isize - 1) as usize;
        c[hi] - c[lo]
    };
    let mut out = DiscreteField::zeros(g);
    for n in 1..=g.nt {
        let row = out.level_mut(n);
        for (i, cell) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in 0..n {
                let half = (n - k) as isize;
                let inner = slice(k, i as isize - half, i as isize + half);
                acc += if k == 0 { 0.5 * inner } else { inner };
            }
            *cell = 0.5 * h * acc;
        }
    }
    out
}

/// Right and left characteristic integrals at every node:
/// `P(x,t) = ∫_0^t v(x+t-s, s) ds`, `Q(x,t) = ∫_0^t v(x-t+s, s) ds`.
fn characteristic_integrals(v: &DiscreteField) -> (DiscreteField, DiscreteField) {
    let g = v.grid;
    let nx = g.nx();
    let h = g.h;
    let mut p = DiscreteField::zeros(g);
    let mut q = DiscreteField::zeros(g);
    for n in 1..=g.nt {
        for i in 0..nx {
            let here = v.get(i, n);
            // off-grid neighbours contribute zero integrand and zero history
            let (pv, pp) = if i + 1 < nx {
                (v.get(i + 1, n - 1), p.get(i + 1, n - 1))
            } else {
                (0.0, 0.0)
            };
            let (qv, qq) = if i >= 1 {
                (v.get(i - 1, n - 1), q.get(i - 1, n - 1))
            } else {
                (0.0, 0.0)
            };
            p.set(i, n, pp + 0.5 * h * (pv + here));
            q.set(i, n, qq + 0.5 * h * (qv + here));
        }
    }
    (p, q)
}

pub fn apply_lprime(v: &DiscreteField) -> DiscreteField {
    let (p, q) = characteristic_integrals(v);
    p.zip_map(&q, |a, b| 0.5 * (a + b))
}

pub fn apply_lbarprime(v: &DiscreteField) -> DiscreteField {
    let (p, q) = characteristic_integrals(v);
    p.zip_map(&q, |a, b| 0.5 * (a - b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::CharacteristicGrid;

    fn grid(h: f64) -> CharacteristicGrid {
        CharacteristicGrid::new(h, 2.0, 1.0).unwrap()
    }

    fn full(g: CharacteristicGrid, f: impl Fn(f64, f64) -> f64) -> DiscreteField {
        let mut out = DiscreteField::zeros(g);
        for n in 0..=g.nt {
            for i in 0..g.nx() {
                out.set(i, n, f(g.x(i), g.t(n)));
            }
        }
        out
    }

    #[test]
    fn l_of_one_is_half_t_squared() {
        let g = grid(0.125);
        let one = full(g, |_, _| 1.0);
        for (x, t) in [(0.0, 2.0), (0.5, 1.25), (-1.0, 0.5), (0.0, 0.0)] {
            let v = op_l(&one, x, t).unwrap();
            assert!((v - t * t / 2.0).abs() < 1e-13, "{x} {t}: {v}");
        }
        let zero = DiscreteField::zeros(g);
        assert_eq!(op_l(&zero, 0.25, 1.5).unwrap(), 0.0);
    }

    #[test]
    fn l_of_s_converges_at_second_order() {
        // exact: 1/2 ∫_0^t s 2(t-s) ds = t^3/6
        let mut errs = vec![];
        for h in [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0] {
            let v = full(grid(h), |_, s| s);
            errs.push((op_l(&v, 0.5, 2.0).unwrap() - 8.0 / 6.0).abs());
        }
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 1.9, "{errs:?}");
        }
    }

    #[test]
    fn lprime_examples() {
        let g = grid(0.125);
        let one = full(g, |_, _| 1.0);
        let y = full(g, |x, _| x);
        let zero = DiscreteField::zeros(g);
        for (x, t) in [(0.0, 2.0), (0.75, 1.0), (-0.5, 1.5)] {
            assert!((op_lprime(&one, x, t).unwrap() - t).abs() < 1e-13);
            assert!((op_lprime(&y, x, t).unwrap() - x * t).abs() < 1e-13);
            assert_eq!(op_lprime(&zero, x, t).unwrap(), 0.0);
            assert!(op_lbarprime(&one, x, t).unwrap().abs() < 1e-13);
            assert!((op_lbarprime(&y, x, t).unwrap() - t * t / 2.0).abs() < 1e-13);
        }
        let even = full(g, |x, s| x * x + s);
        assert!(op_lbarprime(&even, 0.0, 1.75).unwrap().abs() < 1e-14);
    }

    #[test]
    fn off_grid_points_are_domain_errors() {
        let g = grid(0.125);
        let one = full(g, |_, _| 1.0);
        assert!(op_l(&one, 0.1, 1.0).is_err());
        let edge = g.half_width();
        assert!(op_lprime(&one, edge, 1.0).is_err());
    }

    #[test]
    fn field_versions_match_pointwise() {
        let g = grid(0.125);
        let v = full(g, |x, s| (x * 1.3).sin() + s * s - 0.4 * x * s);
        let l = apply_l(&v);
        let lp = apply_lprime(&v);
        let lb = apply_lbarprime(&v);
        for n in 0..=g.nt {
            for i in n..g.nx() - n {
                let (x, t) = (g.x(i), g.t(n));
                assert!((l.get(i, n) - op_l(&v, x, t).unwrap()).abs() < 1e-12);
                assert!((lp.get(i, n) - op_lprime(&v, x, t).unwrap()).abs() < 1e-12);
                assert!((lb.get(i, n) - op_lbarprime(&v, x, t).unwrap()).abs() < 1e-12);
            }
        }
    }
}
