//! Fixed-order Gauss-Legendre quadrature used for exact-to-machine-precision
//! cell masses of smooth densities.

/// 16-point Gauss-Legendre nodes on [-1, 1] (positive half; symmetric).
const GL16_NODES: [f64; 8] = [
    0.09501250983763744,
    0.2816035507792589,
    0.45801677765722737,
    0.6178762444026438,
    0.7554044083550030,
    0.8656312023878318,
    0.9445750230732326,
    0.9894009349916499,
];

const GL16_WEIGHTS: [f64; 8] = [
    0.1894506104550685,
    0.1826034150449236,
    0.1691565193950025,
    0.1495959888165767,
    0.1246289712555339,
    0.0951585116824928,
    0.0622535239386479,
    0.0271524594117541,
];

/// Integral of `f` over [a, b] by 16-point Gauss-Legendre.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum = 0.0;
    for i in 0..8 {
        let dx = half * GL16_NODES[i];
        sum += GL16_WEIGHTS[i] * (f(mid + dx) + f(mid - dx));
    }
    sum * half
}

/// Integral of `f` over [a, b] split into `cells` panels; accurate for
/// smooth integrands even when a single panel would under-resolve them.
pub fn integrate_cells<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cells: usize) -> f64 {
    let h = (b - a) / cells as f64;
    (0..cells)
        .map(|i| integrate(&f, a + i as f64 * h, a + (i + 1) as f64 * h))
        .sum()
}
