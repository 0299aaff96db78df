//! Affine maps `x ↦ slope·x + offset` over an exact scalar field.

use num_traits::Num;

/// The map `x ↦ slope·x + offset`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineMap<T> {
    pub slope: T,
    pub offset: T,
}

impl<T: Clone + Num> AffineMap<T> {
    pub fn new(slope: T, offset: T) -> Self {
        AffineMap { slope, offset }
    }

    pub fn identity() -> Self {
        AffineMap::new(T::one(), T::zero())
    }

    pub fn translation(c: T) -> Self {
        AffineMap::new(T::one(), c)
    }

    pub fn scaling(s: T) -> Self {
        AffineMap::new(s, T::zero())
    }

    pub fn apply(&self, x: &T) -> T {
        self.slope.clone() * x.clone() + self.offset.clone()
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn compose(&self, inner: &AffineMap<T>) -> AffineMap<T> {
        AffineMap::new(self.slope.clone() * inner.slope.clone(), self.apply(&inner.offset))
    }

    /// Panics when the slope is zero.
    pub fn inverse(&self) -> AffineMap<T> {
        assert!(!self.slope.is_zero(), "affine map with zero slope is not invertible");
        let s = T::one() / self.slope.clone();
        AffineMap::new(s.clone(), T::zero() - s * self.offset.clone())
    }

    /// The unique fixed point, when the slope is not 1.
    pub fn fixed_point(&self) -> Option<T> {
        if self.slope.is_one() {
            None
        } else {
            Some(self.offset.clone() / (T::one() - self.slope.clone()))
        }
    }

    pub fn is_identity(&self) -> bool {
        self.slope.is_one() && self.offset.is_zero()
    }
}
