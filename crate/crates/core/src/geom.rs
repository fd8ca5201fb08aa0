//! Geometric primitives shared by every estimator: node identifiers,
//! undirected edges, and fixed-capacity 2-D/3-D positions.

use crate::real::{rf, Real};
use serde::{Deserialize, Serialize};

/// Identifier of a network node. Anchors and agents share one id space.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Undirected edge, stored with the smaller id first so that one key
/// represents each node pair regardless of construction order.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct EdgeKey {
    pub lo: NodeId,
    pub hi: NodeId,
}

impl EdgeKey {
    pub fn new(a: NodeId, b: NodeId) -> Self {
        if a <= b {
            Self { lo: a, hi: b }
        } else {
            Self { lo: b, hi: a }
        }
    }

    /// The endpoint opposite to `id`, or `None` if `id` is not on the edge.
    pub fn other(&self, id: NodeId) -> Option<NodeId> {
        if self.lo == id {
            Some(self.hi)
        } else if self.hi == id {
            Some(self.lo)
        } else {
            None
        }
    }

    pub fn touches(&self, id: NodeId) -> bool {
        self.lo == id || self.hi == id
    }
}

/// A point in 2-D or 3-D space. The unused third coordinate of a 2-D point is
/// kept at zero, so norms and differences can always run over three lanes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Position<R: Real> {
    coords: [R; 3],
    dim: u8,
}

impl<R: Real> Position<R> {
    pub fn new_2d(x: R, y: R) -> Self {
        Self { coords: [x, y, R::zero()], dim: 2 }
    }

    pub fn new_3d(x: R, y: R, z: R) -> Self {
        Self { coords: [x, y, z], dim: 3 }
    }

    /// Builds from a slice of length 2 or 3.
    pub fn from_slice(v: &[R]) -> Option<Self> {
        match v {
            [x, y] => Some(Self::new_2d(*x, *y)),
            [x, y, z] => Some(Self::new_3d(*x, *y, *z)),
            _ => None,
        }
    }

    pub fn from_array(coords: [R; 3], dim: usize) -> Self {
        debug_assert!(dim == 2 || dim == 3);
        let mut coords = coords;
        if dim == 2 {
            coords[2] = R::zero();
        }
        Self { coords, dim: dim as u8 }
    }

    pub fn origin(dim: usize) -> Self {
        Self::from_array([R::zero(); 3], dim)
    }

    pub fn dim(&self) -> usize {
        usize::from(self.dim)
    }

    /// Active coordinates (length 2 or 3).
    pub fn coords(&self) -> &[R] {
        &self.coords[..self.dim()]
    }

    /// Padded representation; the third lane of a 2-D point is zero.
    pub fn array(&self) -> [R; 3] {
        self.coords
    }

    pub fn get(&self, axis: usize) -> R {
        self.coords[axis]
    }

    pub fn distance(&self, other: &Self) -> R {
        let mut acc = R::zero();
        for k in 0..3 {
            let d = self.coords[k] - other.coords[k];
            acc += d * d;
        }
        acc.sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite_real())
    }

    /// Arithmetic mean of a non-empty set of equal-dimension points.
    pub fn centroid<'a, I>(points: I) -> Option<Self>
    where
        I: IntoIterator<Item = &'a Self>,
        R: 'a,
    {
        let mut acc = [R::zero(); 3];
        let mut n = 0usize;
        let mut dim = 0usize;
        for p in points {
            for k in 0..3 {
                acc[k] += p.coords[k];
            }
            dim = dim.max(p.dim());
            n += 1;
        }
        if n == 0 {
            return None;
        }
        let inv = R::one() / rf::<R>(n as f64);
        for c in &mut acc {
            *c *= inv;
        }
        Some(Self::from_array(acc, dim))
    }

    /// Converts the active coordinates to `f64` for interchange formats.
    pub fn coords_f64(&self) -> Vec<f64> {
        self.coords().iter().map(|c| c.as_f64()).collect()
    }
}

/// Euclidean norm of a padded coordinate triple.
#[inline]
pub fn norm3<R: Real>(v: [R; 3]) -> R {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

#[inline]
pub fn sub3<R: Real>(a: [R; 3], b: [R; 3]) -> [R; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn add3<R: Real>(a: [R; 3], b: [R; 3]) -> [R; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn scale3<R: Real>(a: [R; 3], s: R) -> [R; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn dot3<R: Real>(a: [R; 3], b: [R; 3]) -> R {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_key_normalizes_order() {
        let e = EdgeKey::new(NodeId(5), NodeId(2));
        assert_eq!(e.lo, NodeId(2));
        assert_eq!(e.hi, NodeId(5));
        assert_eq!(e.other(NodeId(2)), Some(NodeId(5)));
        assert_eq!(e.other(NodeId(7)), None);
    }

    #[test]
    fn distance_ignores_padding_lane() {
        let a = Position::new_2d(0.0, 0.0);
        let b = Position::new_2d(3.0, 4.0);
        assert_eq!(a.distance(&b), 5.0);
        assert_eq!(a.dim(), 2);
        assert_eq!(b.coords(), &[3.0, 4.0]);
    }

    #[test]
    fn centroid_of_square_corners() {
        let pts = [
            Position::new_2d(0.0, 0.0),
            Position::new_2d(1.0, 0.0),
            Position::new_2d(1.0, 1.0),
            Position::new_2d(0.0, 1.0),
        ];
        let c = Position::centroid(pts.iter()).unwrap();
        assert_eq!(c, Position::new_2d(0.5, 0.5));
        assert!(Position::<f64>::centroid([].iter()).is_none());
    }

    #[test]
    fn from_slice_rejects_bad_lengths() {
        assert!(Position::<f64>::from_slice(&[1.0]).is_none());
        assert!(Position::<f64>::from_slice(&[1.0, 2.0, 3.0, 4.0]).is_none());
        let p = Position::<f64>::from_slice(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(p.dim(), 3);
        assert_eq!(p.get(2), 3.0);
    }
}
