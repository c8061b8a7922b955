//! Globally adaptive Gauss–Kronrod (7/15 point) integration on a finite interval.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for XGK[1], XGK[3], XGK[5] and the centre.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

pub const DEFAULT_MAX_EVALUATIONS: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    pub error_bound: T,
    pub evaluations: usize,
}

#[derive(Clone, Copy, Debug)]
struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

impl<T: Real> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T: Real> Eq for Segment<T> {}
impl<T: Real> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

fn kronrod<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> Segment<T> {
    let half = T::lit(0.5);
    let centre = half * (a + b);
    let half_len = half * (b - a);
    let fc = f(centre);
    let mut k = fc * T::lit(WGK[7]);
    let mut g = fc * T::lit(WG[3]);
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half_len * T::lit(x);
        let sum = f(centre - dx) + f(centre + dx);
        k = k + T::lit(w) * sum;
        if j % 2 == 1 {
            g = g + T::lit(WG[j / 2]) * sum;
        }
    }
    let value = k * half_len;
    let error = ((k - g) * half_len).abs();
    Segment { a, b, value, error }
}

/// Integrates `f` over `[a, b]` until the summed error estimate drops below
/// `max(abs_tol, rel_tol * |I|)`.
///
/// The tolerance is floored at a few machine epsilons of `|I|`, which is the
/// best the rule can resolve in `T`.
pub fn integrate<T: Real, F: Fn(T) -> T>(
    f: F,
    a: T,
    b: T,
    rel_tol: T,
    abs_tol: T,
    max_evaluations: usize,
) -> Result<Integral<T>> {
    if a == b {
        return Ok(Integral { value: T::zero(), error_bound: T::zero(), evaluations: 0 });
    }
    let first = kronrod(&f, a, b);
    let mut evaluations = 15;
    let mut value = first.value;
    let mut error = first.error;
    let mut heap = BinaryHeap::from([first]);
    let floor = T::lit(50.0) * T::epsilon();

    loop {
        let target = abs_tol.max(rel_tol.max(floor) * value.abs());
        if error <= target {
            return Ok(Integral { value, error_bound: error, evaluations });
        }
        if evaluations + 30 > max_evaluations {
            return Err(Error::QuadratureFailure { estimate: value.as_f64(), error_bound: error.as_f64() });
        }
        let worst = heap.pop().expect("non-empty segment heap");
        let mid = T::lit(0.5) * (worst.a + worst.b);
        let left = kronrod(&f, worst.a, mid);
        let right = kronrod(&f, mid, worst.b);
        evaluations += 30;
        value = value - worst.value + left.value + right.value;
        error = error - worst.error + left.error + right.error;
        heap.push(left);
        heap.push(right);
        // Refresh the running sums occasionally to stop drift from the
        // incremental updates.
        if evaluations % 3000 == 15 {
            value = heap.iter().fold(T::zero(), |s, seg| s + seg.value);
            error = heap.iter().fold(T::zero(), |s, seg| s + seg.error);
        }
    }
}
