//! Adaptive Gauss–Kronrod quadrature and fixed Gauss–Legendre panels.

#![allow(clippy::excessive_precision)]

// Kronrod abscissae / weights of the 15-point rule; the odd entries
// (1, 3, 5, 7) are the 7-point Gauss nodes.
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

const GL10_X: [f64; 5] = [
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.973_906_528_517_171_720_077_964_012_084_452,
];
const GL10_W: [f64; 5] = [
    0.295_524_224_714_752_870_173_892_994_651_338,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.066_671_344_308_688_137_593_568_809_893_332,
];

const MAX_DEPTH: u32 = 40;

// Returns (Kronrod value, |Kronrod − Gauss|, Kronrod estimate of ∫|f|).
fn kronrod15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut abs = WGK[7] * fc.abs();
    for j in 0..7 {
        let dx = half * XGK[j];
        let (fl, fr) = (f(center - dx), f(center + dx));
        kronrod += WGK[j] * (fl + fr);
        abs += WGK[j] * (fl.abs() + fr.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (fl + fr);
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs(), abs * half.abs())
}

/// Integrates `f` over `[a, b]` to within `max(abs_tol, rel_tol·|I|)`
/// by recursive bisection of 15-point Gauss–Kronrod panels.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (whole, _, _) = kronrod15(&f, a, b);
    let tol = abs_tol.max(rel_tol * whole.abs());
    adapt(&f, a, b, tol, 0)
}

fn adapt(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (value, err, abs) = kronrod15(f, a, b);
    // Below the rounding floor further splitting cannot help.
    let floor = 50.0 * f64::EPSILON * abs;
    if err <= tol.max(floor) || depth >= MAX_DEPTH {
        return value;
    }
    let mid = 0.5 * (a + b);
    adapt(f, a, mid, 0.5 * tol, depth + 1) + adapt(f, mid, b, 0.5 * tol, depth + 1)
}

/// Ten-point Gauss–Legendre rule on a single panel `[a, b]`.
pub fn gauss_legendre10(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum = 0.0;
    for (x, w) in GL10_X.iter().zip(GL10_W.iter()) {
        sum += w * (f(center - half * x) + f(center + half * x));
    }
    sum * half
}

/// Running integral `∫_{t₀}^{t_i} f` on a sorted grid, one Gauss–Legendre
/// panel per grid interval.
pub fn cumulative(f: impl Fn(f64) -> f64, grid: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    if let Some(&first) = grid.first() {
        out.push(0.0);
        let mut prev = first;
        for &t in &grid[1..] {
            acc += gauss_legendre10(&f, prev, t);
            out.push(acc);
            prev = t;
        }
    }
    out
}
