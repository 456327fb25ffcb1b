use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{Factor, FunctionSpace, Manifold, Point};

#[derive(Debug, Clone, PartialEq)]
pub struct Count1d {
    pub count: usize,
    pub roots: Vec<f64>,
    /// A near-tangential zero was seen.
    pub suspect: bool,
}

/// Zeros of a 2 pi-periodic function from sign changes on a uniform grid,
/// each refined by bisection to 1e-12.
pub fn count_zeros_1d(f: impl Fn(f64) -> f64, grid_size: usize) -> Count1d {
    let n = grid_size.max(4);
    let h = 2.0 * PI / n as f64;
    let ts: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
    let vs: Vec<f64> = ts.iter().map(|&t| f(t)).collect();
    let mut roots = Vec::new();
    let mut suspect = false;
    for i in 0..n {
        let (prev, cur, next) = (vs[(i + n - 1) % n], vs[i], vs[(i + 1) % n]);
        if cur == 0.0 {
            if prev.signum() * next.signum() < 0.0 {
                roots.push(ts[i]);
            } else {
                suspect = true;
            }
            continue;
        }
        if next != 0.0 && cur.signum() != next.signum() {
            let (mut a, mut b) = (ts[i], ts[i] + h);
            let mut fa = cur;
            while b - a > 1e-12 {
                let m = 0.5 * (a + b);
                let fm = f(m);
                if fm == 0.0 {
                    a = m;
                    b = m;
                    break;
                }
                if fm.signum() == fa.signum() {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            roots.push(0.5 * (a + b));
            continue;
        }
        // local minimum of |f| without a sign change
        if cur.abs() < 1e-9 && cur.abs() <= prev.abs() && cur.abs() <= next.abs() && prev.signum() == next.signum() {
            suspect = true;
        }
    }
    Count1d { count: roots.len(), roots, suspect }
}

/// Uniform grid in chart coordinates of a surface: angles on T^2,
/// (theta, phi) with both poles included on S^2.
#[derive(Debug, Clone)]
pub struct Grid2 {
    manifold: Manifold,
    rows: usize,
    cols: usize,
    sphere: bool,
    points: Vec<Point>,
}

impl Grid2 {
    pub fn new(manifold: &Manifold, rows: usize, cols: usize) -> Result<Self> {
        let sphere = match manifold.factors() {
            [Factor::Sphere2] => true,
            [Factor::Circle, Factor::Circle] => false,
            _ => return Err(Error::Unsupported(format!("surface grid on {}", manifold.descriptor()))),
        };
        if rows < 2 || cols < 3 {
            return Err(Error::InvalidInput(format!("grid {rows}x{cols} too small")));
        }
        let prow = if sphere { rows + 1 } else { rows };
        let mut points = Vec::with_capacity(prow * cols);
        for i in 0..prow {
            for j in 0..cols {
                points.push(manifold.point(&Self::chart(sphere, rows, cols, i as f64, j as f64))?);
            }
        }
        Ok(Self { manifold: manifold.clone(), rows, cols, sphere, points })
    }

    fn chart(sphere: bool, rows: usize, cols: usize, i: f64, j: f64) -> [f64; 2] {
        let a = if sphere { PI * i / rows as f64 } else { 2.0 * PI * i / rows as f64 };
        [a, 2.0 * PI * j / cols as f64]
    }

    fn index(&self, i: usize, j: usize) -> usize {
        let i = if self.sphere { i } else { i % self.rows };
        i * self.cols + j % self.cols
    }

    fn corners(&self, i: usize, j: usize) -> [usize; 4] {
        [self.index(i, j), self.index(i + 1, j), self.index(i, j + 1), self.index(i + 1, j + 1)]
    }

    fn center(&self, i: usize, j: usize) -> Point {
        let c = Self::chart(self.sphere, self.rows, self.cols, i as f64 + 0.5, j as f64 + 0.5);
        self.manifold.point(&c).expect("surface chart")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Count2d {
    pub count: usize,
    pub roots: Vec<DVector<f64>>,
    /// Non-transversal or non-isolated zeros were met.
    pub suspect: bool,
}

enum Newton {
    Root(DVector<f64>),
    Singular,
    Failed,
}

type Eval<'a> = dyn Fn(&[f64]) -> ([f64; 2], [DVector<f64>; 2]) + Sync + 'a;

fn newton(manifold: &Manifold, start: Point, eval: &Eval, iters: usize) -> Newton {
    let mut p = start;
    for _ in 0..iters {
        let (f, g) = eval(p.ambient.as_slice());
        let frame = manifold.tangent_frame(&p);
        let r0 = frame.tr_mul(&g[0]);
        let r1 = frame.tr_mul(&g[1]);
        let (a, b, c, d) = (r0[0], r0[1], r1[0], r1[1]);
        let det = a * d - b * c;
        let fro2 = a * a + b * b + c * c + d * d;
        let fnorm = f[0].abs().max(f[1].abs());
        if fro2 == 0.0 || det.abs() <= 1e-12 * fro2 {
            // the two gradients are parallel: the zero sets are tangent or coincide
            return Newton::Singular;
        }
        // condition number of the 2x2 Jacobian
        let s = (fro2 * fro2 - 4.0 * det * det).max(0.0).sqrt();
        let cond = ((fro2 + s) / (fro2 - s).max(f64::MIN_POSITIVE)).sqrt();
        if fnorm < 1e-13 {
            return if cond < 1e8 { Newton::Root(p.ambient) } else { Newton::Singular };
        }
        let mut dx = -(d * f[0] - b * f[1]) / det;
        let mut dy = -(-c * f[0] + a * f[1]) / det;
        let step = (dx * dx + dy * dy).sqrt();
        if step > 0.5 {
            dx *= 0.5 / step;
            dy *= 0.5 / step;
        }
        let moved = &p.ambient + frame.column(0) * dx + frame.column(1) * dy;
        p = manifold.retract(&moved);
        if step < 1e-15 {
            break;
        }
    }
    let (f, g) = eval(p.ambient.as_slice());
    if f[0].abs() < 1e-10 && f[1].abs() < 1e-10 {
        let frame = manifold.tangent_frame(&p);
        let r0 = frame.tr_mul(&g[0]);
        let r1 = frame.tr_mul(&g[1]);
        let j = DMatrix::from_row_slice(2, 2, &[r0[0], r0[1], r1[0], r1[1]]);
        let sv = j.singular_values();
        if sv[1] > 0.0 && sv[0] / sv[1] < 1e8 {
            return Newton::Root(p.ambient);
        }
        return Newton::Singular;
    }
    Newton::Failed
}

fn mixed(v: [f64; 4]) -> bool {
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    lo <= 0.0 && hi >= 0.0
}

fn count_on_grid(grid: &Grid2, v1: &[f64], v2: &[f64], eval: &Eval, iters: usize) -> Count2d {
    let mut roots: Vec<DVector<f64>> = Vec::new();
    let mut suspect = false;
    for i in 0..grid.rows {
        for j in 0..grid.cols {
            let c = grid.corners(i, j);
            if !mixed(c.map(|k| v1[k])) || !mixed(c.map(|k| v2[k])) {
                continue;
            }
            match newton(&grid.manifold, grid.center(i, j), eval, iters) {
                Newton::Root(x) => {
                    if !roots.iter().any(|r| (r - &x).norm() < 1e-6) {
                        roots.push(x);
                    }
                }
                Newton::Singular => suspect = true,
                Newton::Failed => {}
            }
        }
    }
    Count2d { count: roots.len(), roots, suspect }
}

/// Common zeros of two functions on T^2 or S^2 given by ambient value and
/// gradient. Newton runs from every grid cell whose corner signs are mixed
/// for both functions; roots must satisfy |f| < 1e-10 with Jacobian
/// condition below 1e8 and are merged at distance 1e-6. The count is
/// repeated on the doubled grid and a disagreement marks the result suspect.
pub fn count_zeros_2d(
    manifold: &Manifold,
    f1: &(dyn Fn(&[f64]) -> (f64, DVector<f64>) + Sync),
    f2: &(dyn Fn(&[f64]) -> (f64, DVector<f64>) + Sync),
    grid: (usize, usize),
    max_newton_iters: usize,
) -> Result<Count2d> {
    let eval = |x: &[f64]| {
        let (a, ga) = f1(x);
        let (b, gb) = f2(x);
        ([a, b], [ga, gb])
    };
    let mut results = Vec::new();
    for scale in [1, 2] {
        let g = Grid2::new(manifold, grid.0 * scale, grid.1 * scale)?;
        let v1: Vec<f64> = g.points.iter().map(|p| f1(p.ambient.as_slice()).0).collect();
        let v2: Vec<f64> = g.points.iter().map(|p| f2(p.ambient.as_slice()).0).collect();
        results.push(count_on_grid(&g, &v1, &v2, &eval, max_newton_iters));
    }
    let fine = results.pop().expect("two levels");
    let mut coarse = results.pop().expect("two levels");
    coarse.suspect |= fine.suspect || fine.count != coarse.count;
    Ok(coarse)
}

/// Basis values of each space on a fixed grid, so a sample only costs a
/// matrix-vector product per space before the Newton stage.
pub(crate) struct GridCache {
    grid: Grid2,
    values: Vec<DMatrix<f64>>,
}

impl GridCache {
    pub(crate) fn new(spaces: &[FunctionSpace], grid: Grid2) -> Self {
        let values = spaces
            .iter()
            .map(|s| {
                let mut m = DMatrix::zeros(grid.points.len(), s.dim());
                for (k, p) in grid.points.iter().enumerate() {
                    m.row_mut(k).copy_from(&s.values(p).transpose());
                }
                m
            })
            .collect();
        Self { grid, values }
    }

    pub(crate) fn count(&self, spaces: &[FunctionSpace], coefs: &[DVector<f64>], iters: usize) -> Count2d {
        let v1 = &self.values[0] * &coefs[0];
        let v2 = &self.values[1] * &coefs[1];
        let eval = |x: &[f64]| {
            let (a, ja) = spaces[0].evaluate_ambient(x);
            let (b, jb) = spaces[1].evaluate_ambient(x);
            ([a.dot(&coefs[0]), b.dot(&coefs[1])], [ja.tr_mul(&coefs[0]), jb.tr_mul(&coefs[1])])
        };
        count_on_grid(&self.grid, v1.as_slice(), v2.as_slice(), &eval, iters)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_counts() {
        for k in 1..6 {
            assert_eq!(count_zeros_1d(|t| (k as f64 * t).cos(), 4096).count, 2 * k);
        }
        let (a, b) = (0.3, -1.7);
        let r = count_zeros_1d(|t| a * (3.0 * t).cos() + b * (3.0 * t).sin(), 4096);
        assert_eq!((r.count, r.suspect), (6, false));
        assert_eq!(count_zeros_1d(|_| 1.0, 4096).count, 0);
        let r = count_zeros_1d(|t| 1.0 - t.cos(), 4096);
        assert!(r.suspect);
        let r = count_zeros_1d(|t| (2.0 * t).sin(), 64);
        assert_eq!(r.count, 4);
        assert!(r.roots.iter().any(|x| (x - PI / 2.0).abs() < 1e-12));
    }

    fn linear(i: usize, n: usize) -> impl Fn(&[f64]) -> (f64, DVector<f64>) + Sync {
        move |x: &[f64]| {
            let mut g = DVector::zeros(n);
            g[i] = 1.0;
            (x[i], g)
        }
    }

    #[test]
    fn sphere_great_circles() {
        let s2 = Manifold::sphere2();
        let r = count_zeros_2d(&s2, &linear(2, 3), &linear(0, 3), (48, 96), 30).unwrap();
        assert_eq!((r.count, r.suspect), (2, false));
        for root in &r.roots {
            assert!((root[1].abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn torus_product_of_circles() {
        let t2 = Manifold::torus(2);
        // cos t1 and sin t2 in ambient coordinates (x1, y1, x2, y2)
        let r = count_zeros_2d(&t2, &linear(0, 4), &linear(3, 4), (64, 64), 30).unwrap();
        assert_eq!((r.count, r.suspect), (4, false));
    }

    #[test]
    fn identical_functions_are_suspect() {
        let s2 = Manifold::sphere2();
        let f = |x: &[f64]| (x[0] + 0.5 * x[2], DVector::from_vec(vec![1.0, 0.0, 0.5]));
        let r = count_zeros_2d(&s2, &f, &f, (24, 48), 30).unwrap();
        assert!(r.suspect);
    }
}
