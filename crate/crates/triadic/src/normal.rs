//! Standard normal CDF and quantile kernel.
//!
//! The CDF is evaluated through the rational Chebyshev approximations for
//! erf/erfc of W. J. Cody (Math. Comp. 23, 1969), which keep the relative
//! error near machine precision on all three branches. The quantile starts
//! from Acklam's rational approximation and applies one Halley step against
//! the CDF, so the inverse is consistent with the forward map to roughly
//! 1e-15.

use crate::error::{Error, Result};

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;
const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// 1/sqrt(pi), used by the large-argument erfc branch.
const SQRPI: f64 = 5.641_895_835_477_562_9e-1;

const ERF_A: [f64; 5] = [
    3.161_123_743_870_565_6e0,
    1.138_641_541_510_501_56e2,
    3.774_852_376_853_020_2e2,
    3.209_377_589_138_469_47e3,
    1.857_777_061_846_031_53e-1,
];
const ERF_B: [f64; 4] = [
    2.360_129_095_234_412_09e1,
    2.440_246_379_344_441_73e2,
    1.282_616_526_077_372_28e3,
    2.844_236_833_439_170_62e3,
];
const ERFC_C: [f64; 9] = [
    5.641_884_969_886_700_9e-1,
    8.883_149_794_388_375_94e0,
    6.611_919_063_714_162_95e1,
    2.986_351_381_974_001_31e2,
    8.819_522_212_417_690_9e2,
    1.712_047_612_634_070_58e3,
    2.051_078_377_826_071_47e3,
    1.230_339_354_797_997_25e3,
    2.153_115_354_744_038_46e-8,
];
const ERFC_D: [f64; 8] = [
    1.574_492_611_070_983_47e1,
    1.176_939_508_913_124_99e2,
    5.371_811_018_620_098_58e2,
    1.621_389_574_566_690_19e3,
    3.290_799_235_733_459_63e3,
    4.362_619_090_143_247_16e3,
    3.439_367_674_143_721_64e3,
    1.230_339_354_803_749_42e3,
];
const ERFC_P: [f64; 6] = [
    3.053_266_349_612_323_44e-1,
    3.603_448_999_498_044_39e-1,
    1.257_817_261_112_292_46e-1,
    1.608_378_514_874_227_66e-2,
    6.587_491_615_298_378_03e-4,
    1.631_538_713_730_209_78e-2,
];
const ERFC_Q: [f64; 5] = [
    2.568_520_192_289_822_42e0,
    1.872_952_849_923_460_47e0,
    5.279_051_029_514_284_12e-1,
    6.051_834_131_244_131_91e-2,
    2.335_204_976_268_691_85e-3,
];

/// erf(x) on |x| <= 0.46875.
fn erf_small(x: f64) -> f64 {
    let z = x * x;
    let mut num = ERF_A[4] * z;
    let mut den = z;
    for i in 0..3 {
        num = (num + ERF_A[i]) * z;
        den = (den + ERF_B[i]) * z;
    }
    x * (num + ERF_A[3]) / (den + ERF_B[3])
}

/// exp(-y^2) computed as exp(-ysq^2) * exp(-del) with ysq a 1/16 grid point,
/// which avoids the cancellation Cody's scheme is designed around.
fn exp_neg_square(y: f64) -> f64 {
    let ysq = (y * 16.0).trunc() / 16.0;
    let del = (y - ysq) * (y + ysq);
    (-ysq * ysq).exp() * (-del).exp()
}

/// erfc(y) on 0.46875 <= y <= 4.
fn erfc_mid(y: f64) -> f64 {
    let mut num = ERFC_C[8] * y;
    let mut den = y;
    for i in 0..7 {
        num = (num + ERFC_C[i]) * y;
        den = (den + ERFC_D[i]) * y;
    }
    exp_neg_square(y) * (num + ERFC_C[7]) / (den + ERFC_D[7])
}

/// erfc(y) on y > 4.
fn erfc_large(y: f64) -> f64 {
    let z = 1.0 / (y * y);
    let mut num = ERFC_P[5] * z;
    let mut den = z;
    for i in 0..4 {
        num = (num + ERFC_P[i]) * z;
        den = (den + ERFC_Q[i]) * z;
    }
    let r = z * (num + ERFC_P[4]) / (den + ERFC_Q[4]);
    exp_neg_square(y) * (SQRPI - r) / y
}

/// Complementary error function for any finite argument.
fn erfc(x: f64) -> f64 {
    let y = x.abs();
    let tail = if y <= 0.46875 {
        return 1.0 - erf_small(x);
    } else if y <= 4.0 {
        erfc_mid(y)
    } else if y < 26.64 {
        erfc_large(y)
    } else {
        0.0
    };
    if x < 0.0 {
        2.0 - tail
    } else {
        tail
    }
}

/// Standard normal CDF.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// Standard normal density.
pub fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / SQRT_2PI
}

const ACKLAM_A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_69e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239e0,
];
const ACKLAM_B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const ACKLAM_C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838e0,
    -2.549_732_539_343_734e0,
    4.374_664_141_464_968e0,
    2.938_163_982_698_783e0,
];
const ACKLAM_D: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996e0,
    3.754_408_661_907_416e0,
];
const ACKLAM_P_LOW: f64 = 0.02425;

fn acklam_tail(q: f64) -> f64 {
    (((((ACKLAM_C[0] * q + ACKLAM_C[1]) * q + ACKLAM_C[2]) * q + ACKLAM_C[3]) * q + ACKLAM_C[4])
        * q
        + ACKLAM_C[5])
        / ((((ACKLAM_D[0] * q + ACKLAM_D[1]) * q + ACKLAM_D[2]) * q + ACKLAM_D[3]) * q + 1.0)
}

/// Standard normal quantile (inverse CDF) for p in the open interval (0, 1).
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::DomainError {
            what: "probability",
            value: p,
        });
    }
    let mut x = if p < ACKLAM_P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        acklam_tail(q)
    } else if p <= 1.0 - ACKLAM_P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((ACKLAM_A[0] * r + ACKLAM_A[1]) * r + ACKLAM_A[2]) * r + ACKLAM_A[3]) * r
            + ACKLAM_A[4])
            * r
            + ACKLAM_A[5])
            * q
            / (((((ACKLAM_B[0] * r + ACKLAM_B[1]) * r + ACKLAM_B[2]) * r + ACKLAM_B[3]) * r
                + ACKLAM_B[4])
                * r
                + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -acklam_tail(q)
    };
    // One Halley step against the forward CDF pins the inverse to the CDF
    // itself rather than to the approximation.
    let e = std_normal_cdf(x) - p;
    let u = e * SQRT_2PI * (0.5 * x * x).exp();
    x -= u / (1.0 + 0.5 * x * u);
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values frozen from an independent double-precision
    // implementation of the normal distribution.
    const CDF_TABLE: [(f64, f64); 13] = [
        (0.0, 0.5),
        (0.1, 0.539827837277029),
        (0.3, 0.6179114221889526),
        (0.46875, 0.6803758284828824),
        (0.5, 0.6914624612740131),
        (1.0, 0.8413447460685429),
        (1.6448536269514722, 0.95),
        (1.9599639845400545, 0.975),
        (2.5, 0.9937903346742238),
        (3.0, 0.9986501019683699),
        (4.0, 0.9999683287581669),
        (5.0, 0.9999997133484281),
        (6.0, 0.9999999990134123),
    ];

    #[test]
    fn cdf_matches_reference_table() {
        for (z, phi) in CDF_TABLE {
            assert!(
                (std_normal_cdf(z) - phi).abs() <= 1e-15,
                "cdf({z}) = {} vs {phi}",
                std_normal_cdf(z)
            );
            assert!(
                (std_normal_cdf(-z) - (1.0 - phi)).abs() <= 1e-15,
                "cdf({})",
                -z
            );
        }
        // deep lower tail, where no cancellation occurs
        assert!((std_normal_cdf(-8.0) - 6.22096057427174e-16).abs() < 1e-29);
    }

    #[test]
    fn cdf_is_symmetric() {
        let mut z = -8.0;
        while z <= 8.0 {
            let s = std_normal_cdf(z) + std_normal_cdf(-z);
            assert!((s - 1.0).abs() < 1e-15, "z = {z}, sum = {s}");
            z += 0.0917;
        }
    }

    #[test]
    fn quantile_matches_reference_table() {
        let table = [
            (1e-10, -6.361340902404056),
            (0.001, -3.090232306167813),
            (0.025, -1.9599639845400545),
            (0.05, -1.6448536269514729),
            (0.1, -1.2815515655446004),
            (0.5, 0.0),
            (0.9, 1.2815515655446004),
            (0.95, 1.6448536269514722),
            (0.975, 1.959963984540054),
            (0.99, 2.3263478740408408),
        ];
        for (p, z) in table {
            let q = std_normal_quantile(p).unwrap();
            assert!((q - z).abs() <= 4e-9, "quantile({p}) = {q} vs {z}");
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        let mut p = 0.000123;
        while p < 1.0 {
            let x = std_normal_quantile(p).unwrap();
            let back = std_normal_cdf(x);
            assert!((back - p).abs() <= 1e-13, "p = {p}, round trip {back}");
            p += 0.000917;
        }
    }

    #[test]
    fn quantile_rejects_boundary_probabilities() {
        for p in [0.0, 1.0, -0.1, 1.1, f64::NAN] {
            assert!(matches!(
                std_normal_quantile(p),
                Err(Error::DomainError { .. })
            ));
        }
    }
}
