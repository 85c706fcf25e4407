//! Adaptive Dormand–Prince 5(4) integrator for `ẏ = M y`.

use selftrig::kernels::{Matrix, Vector};

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `ẏ = m y` from `y0` over `[0, t_end]` with mixed tolerance `tol`.
pub fn integrate_linear(m: &Matrix, y0: &Vector, t_end: f64, tol: f64) -> Vector {
    let mut y = y0.clone();
    let mut t = 0.0;
    let mut h = (t_end / 100.0).max(1e-6).min(t_end);
    let mut steps = 0usize;
    while t < t_end {
        steps += 1;
        assert!(steps < 10_000_000, "ODE oracle did not finish");
        h = h.min(t_end - t);
        let mut k: Vec<Vector> = Vec::with_capacity(7);
        for row in &A {
            let mut yi = y.clone();
            for (kj, &a) in k.iter().zip(row) {
                if a != 0.0 {
                    yi += kj * (h * a);
                }
            }
            k.push(m * yi);
        }
        let mut y5 = y.clone();
        let mut y4 = y.clone();
        for i in 0..7 {
            y5 += &k[i] * (h * B5[i]);
            y4 += &k[i] * (h * B4[i]);
        }
        let err = (0..y.len())
            .map(|i| {
                let sc = tol * (1.0 + y[i].abs().max(y5[i].abs()));
                ((y5[i] - y4[i]) / sc).powi(2)
            })
            .sum::<f64>()
            / y.len() as f64;
        let err = err.sqrt();
        if err <= 1.0 {
            t += h;
            y = y5;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }
    y
}
