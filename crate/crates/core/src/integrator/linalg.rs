//! Small dense matrices for the coordinate-frame updates.
#![allow(clippy::needless_range_loop)]

use crate::interval::Interval;

/// Square row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Mat<T> {
    pub n: usize,
    pub data: Vec<T>,
}

impl<T: Copy> Mat<T> {
    pub fn filled(n: usize, v: T) -> Self {
        Mat {
            n,
            data: vec![v; n * n],
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }
}

impl Mat<f64> {
    pub fn identity(n: usize) -> Self {
        let mut m = Mat::filled(n, 0.0);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut t = Mat::filled(self.n, 0.0);
        for i in 0..self.n {
            for j in 0..self.n {
                t.set(j, i, self.at(i, j));
            }
        }
        t
    }
}

impl Mat<Interval> {
    pub fn mid(&self) -> Mat<f64> {
        Mat {
            n: self.n,
            data: self.data.iter().map(Interval::mid).collect(),
        }
    }
}

/// Interval product `M * A` with a point matrix `A`.
pub(crate) fn mul_ip(m: &Mat<Interval>, a: &Mat<f64>) -> Mat<Interval> {
    let n = m.n;
    let mut out = Mat::filled(n, Interval::ZERO);
    for i in 0..n {
        for j in 0..n {
            let mut acc = Interval::ZERO;
            for k in 0..n {
                acc = acc + m.at(i, k) * Interval::point(a.at(k, j));
            }
            out.set(i, j, acc);
        }
    }
    out
}

/// Interval product of two interval matrices.
pub(crate) fn mul_ii(m: &Mat<Interval>, a: &Mat<Interval>) -> Mat<Interval> {
    let n = m.n;
    let mut out = Mat::filled(n, Interval::ZERO);
    for i in 0..n {
        for j in 0..n {
            let mut acc = Interval::ZERO;
            for k in 0..n {
                acc = acc + m.at(i, k) * a.at(k, j);
            }
            out.set(i, j, acc);
        }
    }
    out
}

pub(crate) fn mul_iv(m: &Mat<Interval>, v: &[Interval]) -> Vec<Interval> {
    (0..m.n)
        .map(|i| (0..m.n).fold(Interval::ZERO, |acc, k| acc + m.at(i, k) * v[k]))
        .collect()
}

pub(crate) fn mul_pv(m: &Mat<f64>, v: &[Interval]) -> Vec<Interval> {
    (0..m.n)
        .map(|i| (0..m.n).fold(Interval::ZERO, |acc, k| acc + Interval::point(m.at(i, k)) * v[k]))
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Orthonormal frame from the columns of `b`, processed in order of
/// decreasing `weights[j] * |column j|` (column pivoting). Nearly dependent
/// columns are replaced by completions from the unit vectors.
pub(crate) fn orthonormal_frame(b: &Mat<f64>, weights: &[f64]) -> Mat<f64> {
    let n = b.n;
    let cols: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| b.at(i, j)).collect()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    let key = |j: usize| weights[j] * dot(&cols[j], &cols[j]).sqrt();
    order.sort_by(|&a, &c| key(c).partial_cmp(&key(a)).unwrap_or(std::cmp::Ordering::Equal));
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    let candidates = order
        .iter()
        .map(|&j| cols[j].clone())
        .chain((0..n).map(|i| (0..n).map(|k| if k == i { 1.0 } else { 0.0 }).collect()));
    for mut v in candidates {
        if basis.len() == n {
            break;
        }
        let norm0 = dot(&v, &v).sqrt();
        if norm0 == 0.0 || !norm0.is_finite() {
            continue;
        }
        // Two passes of modified Gram-Schmidt.
        for _ in 0..2 {
            for q in &basis {
                let p = dot(&v, q);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= p * qi;
                }
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm <= 1e-10 * norm0 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        basis.push(v);
    }
    let mut q = Mat::filled(n, 0.0);
    for (j, col) in basis.iter().enumerate() {
        for i in 0..n {
            q.set(i, j, col[i]);
        }
    }
    q
}

/// Rigorous enclosure of the inverse of a nearly orthogonal matrix `q`.
///
/// With `C = qᵀ` and `E = I - C q`, `‖E‖∞ ≤ δ < 1` gives
/// `q⁻¹ = (I - E)⁻¹ C` and `‖(I - E)⁻¹ - I‖∞ ≤ δ / (1 - δ) = η`, hence every
/// entry of `q⁻¹ - C` in column `j` is bounded by `η · maxᵢ |C_ij|`.
pub(crate) fn inverse_enclosure(q: &Mat<f64>) -> Option<Mat<Interval>> {
    let n = q.n;
    let c = q.transpose();
    let ci = Mat {
        n,
        data: c.data.iter().map(|&v| Interval::point(v)).collect(),
    };
    let cq = mul_ip(&ci, q);
    let mut delta = Interval::ZERO;
    for i in 0..n {
        let mut row = Interval::ZERO;
        for j in 0..n {
            let e = if i == j {
                Interval::ONE - cq.at(i, j)
            } else {
                -cq.at(i, j)
            };
            row = row + Interval::point(e.mag());
        }
        delta = Interval::point(delta.hi().max(row.hi()));
    }
    if delta.hi() >= 0.5 {
        return None;
    }
    let eta = (delta.checked_div(&(Interval::ONE - delta))?).hi();
    let mut inv = Mat::filled(n, Interval::ZERO);
    for j in 0..n {
        let cmax = (0..n).map(|i| c.at(i, j).abs()).fold(0.0, f64::max);
        let slack = (Interval::point(eta) * Interval::point(cmax)).hi();
        for i in 0..n {
            inv.set(i, j, Interval::new(-slack, slack).add_scalar(c.at(i, j)));
        }
    }
    Some(inv)
}
