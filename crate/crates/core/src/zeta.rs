//! Hurwitz zeta by Euler–Maclaurin summation, for the lattice-sum constants of
//! the singular kernel.

// B_{2j} / (2j)!
const BERNOULLI_OVER_FACT: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
];

/// `ζ(s, a) = Σ_{k≥0} (k + a)^{-s}`, analytically continued, for real `s ≠ 1` and `a > 0`.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    debug_assert!(a > 0.0 && s != 1.0);
    const HEAD: usize = 24;
    let mut sum: f64 = (0..HEAD).map(|k| (k as f64 + a).powf(-s)).sum();
    let x = HEAD as f64 + a;
    sum += x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    // rising factorial s (s+1) ... (s+2j-2)
    let mut rising = s;
    let mut xpow = x.powf(-s - 1.0);
    for (j, c) in BERNOULLI_OVER_FACT.iter().enumerate() {
        sum += c * rising * xpow;
        let m = 2.0 * j as f64;
        rising *= (s + m + 1.0) * (s + m + 2.0);
        xpow /= x * x;
    }
    sum
}

pub fn riemann_zeta(s: f64) -> f64 {
    hurwitz_zeta(s, 1.0)
}

/// Dirichlet beta `β(s) = Σ (-1)^k (2k+1)^{-s}`.
pub fn dirichlet_beta(s: f64) -> f64 {
    4f64.powf(-s) * (hurwitz_zeta(s, 0.25) - hurwitz_zeta(s, 0.75))
}
