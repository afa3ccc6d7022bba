//! Temporal interval geometry and the gIoU-targeted varifocal loss.
//!
//! Everything here is generic over the floating-point scalar; the crate root
//! exports `f64` and `f32` aliases.

use num_traits::Float;

use crate::error::{CurateError, Result};

/// A non-degenerate time interval `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    start: T,
    end: T,
}

impl<T: Float> Interval<T> {
    pub fn new(start: T, end: T) -> Result<Self> {
        if !(start.is_finite() && end.is_finite()) || start >= end {
            return Err(CurateError::Invalid(format!(
                "interval [{:?}, {:?}] must satisfy start < end",
                start.to_f64(),
                end.to_f64()
            )));
        }
        Ok(Interval { start, end })
    }

    pub fn start(&self) -> T {
        self.start
    }

    pub fn end(&self) -> T {
        self.end
    }

    pub fn length(&self) -> T {
        self.end - self.start
    }

    pub fn intersection_len(&self, other: &Self) -> T {
        let lo = self.start.max(other.start);
        let hi = self.end.min(other.end);
        (hi - lo).max(T::zero())
    }

    /// Smallest interval containing both.
    pub fn hull(&self, other: &Self) -> Self {
        Interval {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
        }
    }
}

/// Intersection over union.
pub fn interval_iou<T: Float>(a: &Interval<T>, b: &Interval<T>) -> T {
    let inter = a.intersection_len(b);
    let union = a.length() + b.length() - inter;
    inter / union
}

/// Generalized IoU: IoU minus the fraction of the hull not covered by the union.
pub fn interval_giou<T: Float>(a: &Interval<T>, b: &Interval<T>) -> T {
    let inter = a.intersection_len(b);
    let union = a.length() + b.length() - inter;
    let hull = a.hull(b).length();
    inter / union - (hull - union) / hull
}

/// gIoU rescaled into `(0, 1]`: `0.5 * (1 + giou)`.
pub fn scaled_g<T: Float>(b: &Interval<T>, b_hat: &Interval<T>) -> T {
    let half = T::from(0.5).unwrap();
    half * (T::one() + interval_giou(b, b_hat))
}

/// How the loss treats a zero target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NegativeBranch {
    /// `alpha * p^gamma * -ln(1 - p)`, the usual varifocal negative term.
    #[default]
    Corrected,
    /// `-alpha * p^gamma * ln(1 - g)`, which is identically zero at `g = 0`.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VflParams<T> {
    pub alpha: T,
    pub gamma: T,
    pub negative_branch: NegativeBranch,
}

impl<T: Float> Default for VflParams<T> {
    fn default() -> Self {
        VflParams {
            alpha: T::from(0.75).unwrap(),
            gamma: T::from(2.0).unwrap(),
            negative_branch: NegativeBranch::Corrected,
        }
    }
}

impl<T: Float> VflParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > T::zero()) || !(self.gamma >= T::zero()) {
            return Err(CurateError::Invalid(
                "varifocal params need alpha > 0 and gamma >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Bound applied to `p` at both ends before taking logarithms.
pub fn prob_epsilon<T: Float>() -> T {
    T::from(1e-7).unwrap()
}

/// Varifocal loss of confidence `p` against the scaled-gIoU target `g`.
pub fn gvfl_loss<T: Float>(p: T, g: T, params: &VflParams<T>) -> Result<T> {
    if !(g >= T::zero() && g <= T::one()) {
        return Err(CurateError::Invalid(format!(
            "target g = {:?} outside [0, 1]",
            g.to_f64()
        )));
    }
    params.validate()?;
    let eps = prob_epsilon::<T>();
    let p = p.max(eps).min(T::one() - eps);
    let one = T::one();
    let loss = if g > T::zero() {
        -g * (g * p.ln() + (one - g) * (one - p).ln())
    } else {
        let weight = params.alpha * p.powf(params.gamma);
        match params.negative_branch {
            NegativeBranch::Corrected => -weight * (one - p).ln(),
            NegativeBranch::Literal => -weight * (one - g).ln(),
        }
    };
    // Clears the -0.0 the literal branch produces.
    Ok(loss.max(T::zero()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn iv(a: f64, b: f64) -> Interval<f64> {
        Interval::new(a, b).unwrap()
    }

    #[test]
    fn degenerate_intervals_rejected() {
        assert!(Interval::new(1.0, 1.0).is_err());
        assert!(Interval::new(2.0, 1.0).is_err());
        assert!(Interval::new(0.0, f64::NAN).is_err());
    }

    #[test]
    fn iou_examples() {
        assert_eq!(interval_iou(&iv(2.0, 5.0), &iv(2.0, 5.0)), 1.0);
        assert_eq!(interval_iou(&iv(0.0, 1.0), &iv(2.0, 3.0)), 0.0);
        assert!((interval_iou(&iv(0.0, 2.0), &iv(1.0, 3.0)) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn giou_examples() {
        assert_eq!(interval_giou(&iv(4.0, 7.0), &iv(4.0, 7.0)), 1.0);
        assert!((interval_giou(&iv(0.0, 1.0), &iv(2.0, 3.0)) + 1.0 / 3.0).abs() < 1e-9);
        let (a, b) = (iv(0.0, 2.0), iv(1.0, 3.0));
        assert_eq!(interval_giou(&a, &b), interval_iou(&a, &b));
    }

    #[test]
    fn scaled_g_examples() {
        assert_eq!(scaled_g(&iv(1.0, 2.0), &iv(1.0, 2.0)), 1.0);
        assert!((scaled_g(&iv(0.0, 1.0), &iv(2.0, 3.0)) - 1.0 / 3.0).abs() < 1e-12);
        let far = scaled_g(&iv(0.0, 1.0), &iv(1e9, 1e9 + 1.0));
        assert!(far > 0.0 && far < 1e-8);
    }

    #[test]
    fn scalar_types_agree() {
        let a32 = Interval::<f32>::new(0.0, 1.0).unwrap();
        let b32 = Interval::<f32>::new(2.0, 3.0).unwrap();
        let g32 = interval_giou(&a32, &b32);
        assert!((f64::from(g32) + 1.0 / 3.0).abs() < 1e-6);
        let loss32 = gvfl_loss(0.8f32, 0.8f32, &VflParams::default()).unwrap();
        assert!((f64::from(loss32) - 0.400322).abs() < 1e-5);
    }

    #[test]
    fn loss_examples() {
        let params = VflParams::<f64>::default();
        assert!(gvfl_loss(1.0 - 1e-7, 1.0, &params).unwrap() < 1e-6);
        assert!((gvfl_loss(0.8, 0.8, &params).unwrap() - 0.400322).abs() < 1e-5);
        assert!((gvfl_loss(0.5, 0.0, &params).unwrap() - 0.129_965_096).abs() < 1e-8);
    }

    #[test]
    fn literal_branch_is_zero_at_zero_target() {
        let params = VflParams {
            negative_branch: NegativeBranch::Literal,
            ..VflParams::<f64>::default()
        };
        let loss = gvfl_loss(0.9, 0.0, &params).unwrap();
        assert_eq!(loss, 0.0);
        assert!(loss.is_sign_positive());
    }

    #[test]
    fn target_outside_unit_interval_rejected() {
        let params = VflParams::<f64>::default();
        assert!(gvfl_loss(0.5, 1.5, &params).is_err());
        assert!(gvfl_loss(0.5, -0.1, &params).is_err());
        assert!(gvfl_loss(0.5, f64::NAN, &params).is_err());
    }

    #[test]
    fn probabilities_are_clamped() {
        let params = VflParams::<f64>::default();
        let at_zero = gvfl_loss(0.0, 0.5, &params).unwrap();
        let at_eps = gvfl_loss(1e-7, 0.5, &params).unwrap();
        assert!(at_zero.is_finite());
        assert_eq!(at_zero, at_eps);
    }

    fn interval() -> impl Strategy<Value = Interval<f64>> {
        (-100.0..100.0f64, 0.01..50.0f64).prop_map(|(s, len)| iv(s, s + len))
    }

    proptest! {
        #[test]
        fn giou_bounded_by_iou(a in interval(), b in interval()) {
            let (iou, giou) = (interval_iou(&a, &b), interval_giou(&a, &b));
            prop_assert!(giou <= iou + 1e-12);
            prop_assert!(giou > -1.0 && giou <= 1.0);
            prop_assert!((0.0..=1.0).contains(&iou));
            let touching = a.start() <= b.end() && b.start() <= a.end();
            prop_assert_eq!(touching, (iou - giou).abs() < 1e-12);
        }

        #[test]
        fn symmetric_and_similarity_invariant(a in interval(), b in interval(),
                                              shift in -50.0..50.0f64, scale in 0.1..10.0f64) {
            let map = |x: &Interval<f64>| iv(x.start() * scale + shift, x.end() * scale + shift);
            let (ta, tb) = (map(&a), map(&b));
            prop_assert!((interval_iou(&a, &b) - interval_iou(&b, &a)).abs() < 1e-12);
            prop_assert!((interval_giou(&a, &b) - interval_giou(&b, &a)).abs() < 1e-12);
            prop_assert!((interval_iou(&a, &b) - interval_iou(&ta, &tb)).abs() < 1e-9);
            prop_assert!((interval_giou(&a, &b) - interval_giou(&ta, &tb)).abs() < 1e-9);
        }

        #[test]
        fn loss_is_non_negative(p in 0.0..=1.0f64, g in 0.0..=1.0f64, zero in any::<bool>()) {
            let g = if zero { 0.0 } else { g };
            for branch in [NegativeBranch::Corrected, NegativeBranch::Literal] {
                let params = VflParams { negative_branch: branch, ..VflParams::default() };
                prop_assert!(gvfl_loss(p, g, &params).unwrap() >= 0.0);
            }
        }
    }
}
