//! Closed-form objective/safety pairs. Points are `[s, x...]`.

use std::f64::consts::PI;

/// Dose-efficacy and dose-toxicity logistic curves; `d1 = s`, `d2 = x`.
pub fn eval_clinical(point: &[f64]) -> (f64, f64) {
    let (d1, d2) = (point[0], point[1]);
    let (tf0, tf1, tf2, tf3, tf4) = (1.0, 2.0, 1.0, -4.0, -1.0);
    let (tg1, tg2) = (2.0, 1.0);
    let f = 1.0 / (1.0 + (tf0 - tf1 * d1 - tf2 * d2 - tf3 * d1 * d1 - tf4 * d2 * d2).exp());
    let g = 1.0 / (1.0 + (-tg1 * d1 - tg2 * d2).exp());
    (f, g)
}

/// Branin-style objective with a wavy safety function that is linear in s.
pub fn eval_synthetic2d(point: &[f64]) -> (f64, f64) {
    let (s, x) = (point[0], point[1]);
    let alpha = 1.0 / 51.95;
    let delta = -44.81;
    let b = 5.1 / (4.0 * PI * PI);
    let c = 5.0 / PI;
    let t = 1.0 / (8.0 * PI);
    let q = x - b * s * s + c * s - 6.0;
    let f = alpha * (q * q + 10.0 * (1.0 - t) * s.cos() + delta);
    let y = x + 1.0 / 3.0;
    let g = 2.0 * s * (y.exp() * (10.0 * y).sin() + (5.0 * y).sin() + 5.0) / 3.0;
    (f, g)
}

const HARTMANN_ALPHA: [f64; 4] = [1.0, 1.2, 3.0, 3.2];
const HARTMANN_A: [[f64; 3]; 4] = [
    [3.0, 10.0, 30.0],
    [0.1, 10.0, 35.0],
    [3.0, 10.0, 30.0],
    [0.1, 10.0, 35.0],
];
const HARTMANN_P: [[f64; 3]; 4] = [
    [0.3689, 0.1170, 0.2673],
    [0.4699, 0.4387, 0.7470],
    [0.1091, 0.8732, 0.5547],
    [0.0381, 0.5743, 0.8828],
];

/// Standard Hartmann-3 on `[0, 1]^3`; global minimum ≈ -3.86278 near (0.1146, 0.5556, 0.8525).
pub fn hartmann3(z: &[f64]) -> f64 {
    -HARTMANN_ALPHA
        .iter()
        .zip(&HARTMANN_A)
        .zip(&HARTMANN_P)
        .map(|((alpha, a), p)| {
            let r: f64 = (0..3).map(|j| a[j] * (z[j] - p[j]).powi(2)).sum();
            alpha * (-r).exp()
        })
        .sum::<f64>()
}

/// f = -Hartmann-3 (so the task is maximization), g = s + x1² + x2³.
pub fn eval_synthetic3d(point: &[f64]) -> (f64, f64) {
    let f = -hartmann3(point);
    let g = point[0] + point[1] * point[1] + point[2].powi(3);
    (f, g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn clinical_values() {
        let (f, g) = eval_clinical(&[0.0, 0.0]);
        assert_eq!(g, 0.5);
        assert!(close(f, 0.268_941_421_369_995_1, 1e-15));
        let (f, g) = eval_clinical(&[0.3, 1.2]);
        assert!(close(f, 0.268_941_421_369_995_1, 1e-15));
        assert!(close(g, 0.858_148_935_099_512_3, 1e-15));
    }

    #[test]
    fn clinical_toxicity_rises_with_dose() {
        for k in 0..20 {
            let x = 2.0 * (k as f64 * 0.618_033_988_7).fract();
            let mut prev = f64::NEG_INFINITY;
            for i in 0..=100 {
                let (_, g) = eval_clinical(&[i as f64 / 100.0, x]);
                assert!(g > prev);
                prev = g;
            }
        }
    }

    #[test]
    fn synthetic2d_values() {
        let (f, g) = eval_synthetic2d(&[0.0, 0.0]);
        assert!(close(f, 0.015_247_596_578_830_824, 1e-15));
        assert_eq!(g, 0.0);
        let (f, g) = eval_synthetic2d(&[0.5, 0.25]);
        assert!(close(f, -0.221_712_369_532_862_3, 1e-14));
        assert!(close(g, 1.481_271_348_915_809_4, 1e-14));
        for k in 0..=10 {
            assert_eq!(eval_synthetic2d(&[0.0, k as f64 / 10.0]).1, 0.0);
        }
    }

    #[test]
    fn hartmann_reference_values() {
        assert!(close(hartmann3(&[0.1146, 0.5556, 0.8525]), -3.862_779_504_237_918_7, 1e-12));
        assert!(close(hartmann3(&[0.0, 0.0, 0.0]), -0.067_974_116_590_134_64, 1e-14));
        assert!(close(hartmann3(&[0.5, 0.5, 0.5]), -0.628_022_015_070_593_7, 1e-14));
    }

    #[test]
    fn synthetic3d_safety_corners() {
        assert_eq!(eval_synthetic3d(&[0.0, 0.0, 0.0]).1, 0.0);
        assert_eq!(eval_synthetic3d(&[1.0, 1.0, 1.0]).1, 3.0);
        assert_eq!(eval_synthetic3d(&[0.0, 1.0, 1.0]).1, 2.0);
    }
}
