//! Globally adaptive Gauss–Kronrod (7/15) quadrature for complex-valued integrands.

use num_complex::Complex;

use crate::scalar::Real;

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
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Clone, Copy, Debug)]
pub struct Integral<T> {
    pub value: Complex<T>,
    pub error: T,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug)]
struct Piece<T> {
    a: T,
    b: T,
    value: Complex<T>,
    error: T,
}

fn gk15<T: Real, F: Fn(T) -> Complex<T>>(f: &F, a: T, b: T) -> Piece<T> {
    let half = (b - a) / T::lit(2.0);
    let center = (a + b) / T::lit(2.0);
    let fc = f(center);
    let mut kron = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let s = f(center - dx) + f(center + dx);
        kron = kron + s * T::lit(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + s * T::lit(WG[j / 2]);
        }
    }
    let value = kron * half;
    let error = ((kron - gauss) * half).norm();
    Piece { a, b, value, error }
}

/// Integrates `f` over [a, b], starting from `pieces` equal sub-intervals and
/// bisecting the worst one until the summed error estimate is below
/// max(abs_tol, rel_tol·|I|) or `max_pieces` is reached.
pub fn integrate<T: Real, F: Fn(T) -> Complex<T>>(
    f: F,
    a: T,
    b: T,
    pieces: usize,
    rel_tol: T,
    abs_tol: T,
    max_pieces: usize,
) -> Integral<T> {
    let n = pieces.max(1);
    let width = (b - a) / T::from_usize(n).unwrap();
    let mut parts: Vec<Piece<T>> = (0..n)
        .map(|k| {
            let lo = a + width * T::from_usize(k).unwrap();
            let hi = if k + 1 == n { b } else { lo + width };
            gk15(&f, lo, hi)
        })
        .collect();
    let mut evaluations = 15 * n;
    let zero = Complex::new(T::zero(), T::zero());
    let mut total: Complex<T> = parts.iter().fold(zero, |acc, p| acc + p.value);
    let mut err: T = parts.iter().map(|p| p.error).sum();
    loop {
        let target = abs_tol.max(rel_tol * total.norm());
        if err <= target || parts.len() >= max_pieces.max(n) {
            // resum to shed the drift of the running totals
            let value = parts.iter().fold(zero, |acc, p| acc + p.value);
            let error: T = parts.iter().map(|p| p.error).sum();
            return Integral { value, error, evaluations, converged: error <= abs_tol.max(rel_tol * value.norm()) };
        }
        let worst = parts
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |best, (i, p)| if p.error > best.1 { (i, p.error) } else { best })
            .0;
        let p = parts.swap_remove(worst);
        let mid = (p.a + p.b) / T::lit(2.0);
        let left = gk15(&f, p.a, mid);
        let right = gk15(&f, mid, p.b);
        total = total - p.value + left.value + right.value;
        err = err - p.error + left.error + right.error;
        parts.push(left);
        parts.push(right);
        evaluations += 30;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x: f64| Complex::new(x.powi(5), -x * x), 0.0, 2.0, 1, 1e-14, 0.0, 10);
        assert!((r.value.re - 64.0 / 6.0).abs() < 1e-12);
        assert!((r.value.im + 8.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn damped_oscillation() {
        // ∫₀^∞ e^{−at} e^{ibt} dt = 1/(a − ib)
        let (a, b) = (0.05, 3.0);
        let r = integrate(|t: f64| Complex::new(0.0, b * t).exp() * (-a * t).exp(), 0.0, 40.0 / a, 200, 1e-12, 0.0, 100_000);
        let exact = Complex::new(1.0, 0.0) / Complex::new(a, -b);
        assert!((r.value - exact).norm() / exact.norm() < 1e-11, "{:?}", r);
    }

    #[test]
    fn works_in_f32() {
        let r = integrate(|x: f32| Complex::new(x.cos(), 0.0), 0.0, std::f32::consts::FRAC_PI_2, 1, 1e-6, 0.0, 50);
        assert!((r.value.re - 1.0).abs() < 1e-5);
    }
}
