//! Exponential integral, adaptive quadrature and a Monte-Carlo estimator.

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `E₁(x) = ∫ₓ^∞ e^{-t}/t dt` for `x > 0`.
///
/// Power series up to `x = 1`, modified-Lentz continued fraction above.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("E1 needs x > 0, got {x}")));
    }
    Ok(if x <= 1.0 { e1_series(x) } else { e1_continued_fraction(x) })
}

fn e1_series(x: f64) -> f64 {
    // E1(x) = -γ - ln x - Σ_{k≥1} (-x)^k / (k·k!)
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= -x / kf;
        let add = term / kf;
        sum += add;
        if add.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

fn e1_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..1000 {
        let a = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-x).exp()
}

/// Closed-form bracket `½e^{-x}ln(1+2/x) < E₁(x) < e^{-x}ln(1+1/x)`.
pub fn e1_bounds(x: f64) -> (f64, f64) {
    let ex = (-x).exp();
    (0.5 * ex * (2.0 / x).ln_1p(), ex * (1.0 / x).ln_1p())
}

/// Stopping rule for [`integrate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-12,
            max_subdivisions: 2_000,
        }
    }
}

impl QuadratureSpec {
    pub fn new(rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        if !(rel_tol > 0.0 && rel_tol <= 1e-6) {
            return Err(Error::Domain(format!(
                "quadrature tolerance must lie in (0, 1e-6], got {rel_tol}"
            )));
        }
        Ok(QuadratureSpec {
            rel_tol,
            max_subdivisions,
        })
    }
}

// 15-point Kronrod extension of the 7-point Gauss rule (nodes descending).
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

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Globally adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    let (v, e) = kronrod15(&f, a, b);
    let mut pieces = vec![(a, b, v, e)];
    loop {
        let total: f64 = pieces.iter().map(|p| p.2).sum();
        let err: f64 = pieces.iter().map(|p| p.3).sum();
        if err <= spec.rel_tol * total.abs() || err < f64::MIN_POSITIVE {
            return Ok(total);
        }
        if pieces.len() >= spec.max_subdivisions {
            return Err(Error::Quadrature {
                subdivisions: pieces.len(),
                error: err,
            });
        }
        let worst = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap();
        let (lo, hi, _, _) = pieces.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = kronrod15(&f, lo, mid);
        let (v2, e2) = kronrod15(&f, mid, hi);
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
}

/// `E₁(x)` by direct quadrature, substituting `t = x·e^v` so the integrand
/// becomes `exp(-x e^v)` on a finite range.
pub fn exp_integral_e1_quadrature(x: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("E1 needs x > 0, got {x}")));
    }
    let upper = (745.0 / x).ln().max(1.0);
    integrate(|v| (-x * v.exp()).exp(), 0.0, upper, spec)
}

/// Sample mean of `g` with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

pub const MIN_MC_SAMPLES: usize = 1_000;

/// Averages `g(sampler())` over `n_samples` draws.
pub fn mc_expectation<S, G>(mut sampler: S, g: G, n_samples: usize) -> Result<McEstimate>
where
    S: FnMut() -> f64,
    G: Fn(f64) -> f64,
{
    if n_samples < MIN_MC_SAMPLES {
        return Err(Error::Precondition(format!(
            "Monte-Carlo needs at least {MIN_MC_SAMPLES} samples, got {n_samples}"
        )));
    }
    // Welford
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for k in 1..=n_samples {
        let y = g(sampler());
        let delta = y - mean;
        mean += delta / k as f64;
        m2 += delta * (y - mean);
    }
    let n = n_samples as f64;
    let var = m2 / (n - 1.0);
    Ok(McEstimate {
        mean,
        std_error: (var / n).sqrt(),
        samples: n_samples,
    })
}
