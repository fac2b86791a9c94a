use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use super::Interval;

/// An interval vector; `x ∈ B` means componentwise membership.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalBox(Vec<Interval>);

impl IntervalBox {
    pub fn new(components: Vec<Interval>) -> Self {
        IntervalBox(components)
    }

    pub fn from_points(x: &[f64]) -> Self {
        IntervalBox(x.iter().map(|&v| Interval::point(v)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Interval> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[Interval] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Interval> {
        self.0
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && self.0.iter().zip(x).all(|(a, &v)| a.contains(v))
    }

    pub fn subset_of(&self, other: &IntervalBox) -> bool {
        self.dim() == other.dim() && self.0.iter().zip(&other.0).all(|(a, b)| a.subset_of(b))
    }

    pub fn interior_of(&self, other: &IntervalBox) -> bool {
        self.dim() == other.dim() && self.0.iter().zip(&other.0).all(|(a, b)| a.interior_of(b))
    }

    pub fn hull(&self, other: &IntervalBox) -> IntervalBox {
        IntervalBox(self.0.iter().zip(&other.0).map(|(a, b)| a.hull(b)).collect())
    }

    pub fn intersect(&self, other: &IntervalBox) -> Option<IntervalBox> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.intersect(b))
            .collect::<Option<Vec<_>>>()
            .map(IntervalBox)
    }

    pub fn mid(&self) -> Vec<f64> {
        self.0.iter().map(Interval::mid).collect()
    }

    /// Largest component width.
    pub fn max_width(&self) -> f64 {
        self.0.iter().map(Interval::width).fold(0.0, f64::max)
    }
}

impl Index<usize> for IntervalBox {
    type Output = Interval;
    fn index(&self, i: usize) -> &Interval {
        &self.0[i]
    }
}

impl IndexMut<usize> for IntervalBox {
    fn index_mut(&mut self, i: usize) -> &mut Interval {
        &mut self.0[i]
    }
}

impl FromIterator<Interval> for IntervalBox {
    fn from_iter<T: IntoIterator<Item = Interval>>(iter: T) -> Self {
        IntervalBox(iter.into_iter().collect())
    }
}

impl fmt::Debug for IntervalBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}
