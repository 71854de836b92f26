//! Uniform lattices on the truncated box `[-L, L]^n` and nodal fields on them.
//!
//! All integrals use the rectangle rule with weight `h^n` per node; fields are
//! taken to vanish outside the box.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Magic prefix of the binary field format.
pub const FIELD_MAGIC: &[u8; 6] = b"RSFLD1";

/// Uniform grid with an odd number of points per dimension, so the origin is a node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
    half_width: f64,
    points: usize,
    h: f64,
}

impl Grid {
    pub fn new(n: usize, half_width: f64, points: usize) -> Result<Self> {
        if !(1..=2).contains(&n) {
            return Err(Error::UnsupportedDimension(n));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::NonPositiveHalfWidth(half_width));
        }
        if points % 2 == 0 {
            return Err(Error::EvenPointCount);
        }
        if points < 3 {
            return Err(Error::TooFewPoints(points));
        }
        Ok(Self { n, half_width, points, h: 2.0 * half_width / (points - 1) as f64 })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Points per dimension.
    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Total node count `N^n`.
    pub fn len(&self) -> usize {
        self.points.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight `h^n`.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.n as i32)
    }

    /// Coordinate of the 1-D lattice index `k` along any axis.
    #[inline]
    pub fn axis_coord(&self, k: usize) -> f64 {
        -self.half_width + k as f64 * self.h
    }

    /// Multi-index of a flat node index, row-major with axis 0 slowest.
    #[inline]
    pub fn multi_index(&self, i: usize) -> [usize; 2] {
        match self.n {
            1 => [i, 0],
            _ => [i / self.points, i % self.points],
        }
    }

    #[inline]
    pub fn flat_index(&self, m: [usize; 2]) -> usize {
        match self.n {
            1 => m[0],
            _ => m[0] * self.points + m[1],
        }
    }

    /// Node coordinates; the second entry is zero when `n = 1`.
    #[inline]
    pub fn node(&self, i: usize) -> [f64; 2] {
        let m = self.multi_index(i);
        match self.n {
            1 => [self.axis_coord(m[0]), 0.0],
            _ => [self.axis_coord(m[0]), self.axis_coord(m[1])],
        }
    }

    /// Index of the node at the origin.
    pub fn origin_index(&self) -> usize {
        let c = (self.points - 1) / 2;
        self.flat_index([c, c])
    }

    /// Euclidean distance between a node and an arbitrary point (only the first `n` coordinates count).
    #[inline]
    pub fn distance_to(&self, i: usize, point: &[f64]) -> f64 {
        let x = self.node(i);
        let mut s = 0.0;
        for d in 0..self.n {
            let c = point.get(d).copied().unwrap_or(0.0);
            s += (x[d] - c) * (x[d] - c);
        }
        s.sqrt()
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.n == other.n
            && self.points == other.points
            && self.half_width.to_bits() == other.half_width.to_bits()
    }
}

/// Analytic initial profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Profile {
    Zero,
    /// `amplitude * exp(-|x - center|^2 / (2 width^2))`
    Gaussian { center: Vec<f64>, width: f64, amplitude: f64 },
    /// Smooth compactly supported bump with peak `amplitude` at `center`.
    Bump { center: Vec<f64>, radius: f64, amplitude: f64 },
}

impl Profile {
    /// Builds a profile from its name; `scale` is the gaussian width or bump radius.
    pub fn from_name(name: &str, center: Vec<f64>, scale: f64, amplitude: f64) -> Result<Self> {
        match name {
            "zero" => Ok(Profile::Zero),
            "gaussian" => Ok(Profile::Gaussian { center, width: scale, amplitude }),
            "bump" => Ok(Profile::Bump { center, radius: scale, amplitude }),
            other => Err(Error::UnknownProfile(other.to_string())),
        }
    }

    pub fn eval(&self, grid: &Grid, i: usize) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::Gaussian { center, width, amplitude } => {
                let r = grid.distance_to(i, center);
                amplitude * (-(r * r) / (2.0 * width * width)).exp()
            }
            Profile::Bump { center, radius, amplitude } => {
                let s = grid.distance_to(i, center) / radius;
                if s < 1.0 {
                    amplitude * (1.0 - 1.0 / (1.0 - s * s)).exp()
                } else {
                    0.0
                }
            }
        }
    }
}

/// Real function sampled on the nodes of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("field values must be finite".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut([f64; 2]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.node(i))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn scaled(&self, c: f64) -> Field {
        Field { grid: self.grid, values: self.values.iter().map(|v| c * v).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// `h^n`-weighted inner product.
    pub fn dot(&self, other: &Field) -> f64 {
        self.grid.cell_volume()
            * self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>()
    }

    /// `h^n Σ u_i^2`.
    pub fn mass(&self) -> f64 {
        self.grid.cell_volume() * self.values.iter().map(|v| v * v).sum::<f64>()
    }

    /// Multilinear interpolation onto another grid; zero outside this field's box.
    pub fn interpolate_to(&self, target: &Grid) -> Field {
        let g = &self.grid;
        let n = g.dim();
        let np = g.points();
        let h = g.spacing();
        let locate = |x: f64| -> Option<(usize, f64)> {
            let s = (x + g.half_width()) / h;
            if s < 0.0 || s > (np - 1) as f64 {
                return None;
            }
            let k = (s.floor() as usize).min(np - 2);
            Some((k, s - k as f64))
        };
        let values = (0..target.len())
            .map(|i| {
                let x = target.node(i);
                let Some((a, ta)) = locate(x[0]) else { return 0.0 };
                if n == 1 {
                    return (1.0 - ta) * self.values[a] + ta * self.values[a + 1];
                }
                let Some((b, tb)) = locate(x[1]) else { return 0.0 };
                let at = |p: usize, q: usize| self.values[g.flat_index([p, q])];
                (1.0 - ta) * ((1.0 - tb) * at(a, b) + tb * at(a, b + 1))
                    + ta * ((1.0 - tb) * at(a + 1, b) + tb * at(a + 1, b + 1))
            })
            .collect();
        Field { grid: *target, values }
    }

    /// Centroid of the density `u^2`.
    pub fn mass_center(&self) -> Result<[f64; 2]> {
        let total: f64 = self.values.iter().map(|v| v * v).sum();
        if total == 0.0 {
            return Err(Error::ZeroField);
        }
        let mut c = [0.0; 2];
        for (i, v) in self.values.iter().enumerate() {
            let x = self.grid.node(i);
            c[0] += x[0] * v * v;
            c[1] += x[1] * v * v;
        }
        Ok([c[0] / total, c[1] / total])
    }
}

/// Evaluates a named profile on every node.
pub fn sample_profile(grid: &Grid, profile: &Profile) -> Field {
    let values = (0..grid.len()).map(|i| profile.eval(grid, i)).collect();
    Field { grid: *grid, values }
}

/// Nodal weight for [`lp_norm_weighted`].
#[derive(Debug, Clone, Copy)]
pub enum Weight<'a> {
    Constant(f64),
    Nodal(&'a [f64]),
}

/// `(Σ h^n w_i |u_i|^q)^{1/q}`.
pub fn lp_norm_weighted(u: &Field, q: f64, weight: Weight<'_>) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(Error::ExponentBelowOne(q));
    }
    let sum: f64 = match weight {
        Weight::Constant(w) => {
            if !(w > 0.0) {
                return Err(Error::NonPositiveWeight);
            }
            w * u.values.iter().map(|v| v.abs().powf(q)).sum::<f64>()
        }
        Weight::Nodal(w) => {
            if w.len() != u.values.len() {
                return Err(Error::GridMismatch);
            }
            if w.iter().any(|&x| !(x > 0.0)) {
                return Err(Error::NonPositiveWeight);
            }
            u.values.iter().zip(w).map(|(v, w)| w * v.abs().powf(q)).sum::<f64>()
        }
    };
    Ok((u.grid.cell_volume() * sum).powf(1.0 / q))
}

/// Nodes within this relative distance of a sphere count as on it, hence outside the open ball.
const SPHERE_GUARD: f64 = 1e-12;

fn ball_mass(u: &Field, center: &[f64], radius: f64) -> f64 {
    let g = &u.grid;
    let radius = radius * (1.0 - SPHERE_GUARD);
    let inside: f64 = u
        .values
        .iter()
        .enumerate()
        .filter(|(i, _)| g.distance_to(*i, center) < radius)
        .map(|(_, v)| v * v)
        .sum();
    g.cell_volume() * inside
}

/// Fraction of the `L^2` mass inside the open ball `B(center, radius)`.
pub fn mass_in_ball(u: &Field, center: &[f64], radius: f64) -> Result<f64> {
    let total = u.mass();
    if total == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(ball_mass(u, center, radius) / total)
}

/// `max_y Σ_{|x_i - y| < R} h^n u_i^2` over lattice-node centers `y`.
///
/// Uses a precomputed offset stencil so the cost is `N^n` times the stencil size.
pub fn localization_profile(u: &Field, radius: f64) -> f64 {
    let g = &u.grid;
    let h = g.spacing();
    let reach = (radius / h).ceil() as isize;
    let n = g.dim();
    let mut stencil = Vec::new();
    let range_b = if n == 1 { 0..=0 } else { -reach..=reach };
    for a in -reach..=reach {
        for b in range_b.clone() {
            let d = ((a * a + b * b) as f64).sqrt() * h;
            if d < radius * (1.0 - SPHERE_GUARD) {
                stencil.push((a, b));
            }
        }
    }
    let np = g.points() as isize;
    let mut best = 0.0f64;
    for i in 0..g.len() {
        let m = g.multi_index(i);
        let mut s = 0.0;
        for &(a, b) in &stencil {
            let p = m[0] as isize + a;
            let q = m[1] as isize + b;
            if p < 0 || p >= np || (n == 2 && (q < 0 || q >= np)) {
                continue;
            }
            let v = u.values[g.flat_index([p as usize, q as usize])];
            s += v * v;
        }
        best = best.max(s);
    }
    g.cell_volume() * best
}

/// Writes the binary field format (little-endian).
pub fn write_field(u: &Field, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(FIELD_MAGIC)?;
    w.write_all(&(u.grid.n as u32).to_le_bytes())?;
    w.write_all(&(u.grid.points as u64).to_le_bytes())?;
    w.write_all(&u.grid.half_width.to_le_bytes())?;
    w.write_all(&u.grid.h.to_le_bytes())?;
    for v in &u.values {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_exact_or_truncated(r: &mut impl Read, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::TruncatedFile,
        _ => Error::Io(e),
    })
}

pub fn read_field(path: impl AsRef<Path>) -> Result<Field> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 6];
    read_exact_or_truncated(&mut r, &mut magic)?;
    if &magic != FIELD_MAGIC {
        return Err(Error::BadMagic);
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    read_exact_or_truncated(&mut r, &mut b4)?;
    let n = u32::from_le_bytes(b4) as usize;
    read_exact_or_truncated(&mut r, &mut b8)?;
    let points = u64::from_le_bytes(b8) as usize;
    read_exact_or_truncated(&mut r, &mut b8)?;
    let half_width = f64::from_le_bytes(b8);
    read_exact_or_truncated(&mut r, &mut b8)?;
    let h = f64::from_le_bytes(b8);
    let grid = Grid::new(n, half_width, points)
        .map_err(|e| Error::DimensionMismatch(e.to_string()))?;
    if grid.h.to_bits() != h.to_bits() {
        return Err(Error::DimensionMismatch(format!(
            "stored spacing {h} disagrees with 2L/(N-1) = {}",
            grid.h
        )));
    }
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        read_exact_or_truncated(&mut r, &mut b8)?;
        values.push(f64::from_le_bytes(b8));
    }
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(Error::DimensionMismatch(format!("{} trailing bytes", rest.len())));
    }
    Field::new(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: Grid, seed: u64) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Field::from_fn(grid, |_| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn grid_spacing_and_errors() {
        let g = Grid::new(1, 10.0, 401).unwrap();
        assert_eq!(g.spacing(), 0.05);
        assert!(matches!(Grid::new(1, 10.0, 400), Err(Error::EvenPointCount)));
        assert_eq!(Grid::new(1, 10.0, 400).unwrap_err().to_string(), "N must be odd");
        let g2 = Grid::new(2, 5.0, 101).unwrap();
        assert_eq!(g2.len(), 101 * 101);
        assert_eq!(g2.spacing(), 0.1);
        assert!(matches!(Grid::new(3, 1.0, 5), Err(Error::UnsupportedDimension(3))));
        assert!(matches!(Grid::new(1, 0.0, 5), Err(Error::NonPositiveHalfWidth(_))));
        assert!(matches!(Grid::new(1, 1.0, 1), Err(Error::TooFewPoints(1))));
        assert_eq!(g2.node(g2.origin_index()), [0.0, 0.0]);
        assert_eq!(g.node(0)[0], -10.0);
        assert_eq!(g.node(400)[0], 10.0);
    }

    #[test]
    fn profiles() {
        let g = Grid::new(1, 10.0, 401).unwrap();
        assert!(sample_profile(&g, &Profile::Zero).is_zero());
        let u = sample_profile(&g, &Profile::Gaussian { center: vec![0.0], width: 1.0, amplitude: 1.0 });
        assert_eq!(u.values()[200], 1.0);
        assert!((u.values()[220] - (-0.5f64).exp()).abs() < 1e-15);
        assert!((u.values()[220] - 0.60653).abs() < 1e-5);
        assert!(matches!(
            Profile::from_name("sinc", vec![0.0], 1.0, 1.0),
            Err(Error::UnknownProfile(_))
        ));
        let b = sample_profile(&g, &Profile::from_name("bump", vec![1.0], 2.0, 3.0).unwrap());
        assert_eq!(b.values()[220], 3.0);
        assert_eq!(b.values()[260], 0.0);
    }

    #[test]
    fn weighted_norms() {
        // Rectangle rule: 21 nodes of weight 0.1 on [-1, 1].
        let g = Grid::new(1, 1.0, 21).unwrap();
        let one = Field::from_fn(g, |_| 1.0);
        let n2 = lp_norm_weighted(&one, 2.0, Weight::Constant(1.0)).unwrap();
        assert!((n2 - 2.1f64.sqrt()).abs() < 1e-14);
        assert_eq!(lp_norm_weighted(&Field::zeros(g), 2.0, Weight::Constant(1.0)).unwrap(), 0.0);
        let u = random_field(Grid::new(1, 3.0, 61).unwrap(), 4);
        let plain = lp_norm_weighted(&u, 2.0, Weight::Constant(1.0)).unwrap();
        let four = lp_norm_weighted(&u, 2.0, Weight::Constant(4.0)).unwrap();
        assert!((four - 2.0 * plain).abs() < 1e-14 * plain);
        let w = vec![4.0; u.values().len()];
        let nodal = lp_norm_weighted(&u, 2.0, Weight::Nodal(&w)).unwrap();
        assert!((nodal - four).abs() < 1e-14);
        assert!(matches!(lp_norm_weighted(&u, 0.5, Weight::Constant(1.0)), Err(Error::ExponentBelowOne(_))));
        assert!(matches!(lp_norm_weighted(&u, 2.0, Weight::Constant(0.0)), Err(Error::NonPositiveWeight)));
    }

    #[test]
    fn ball_fractions() {
        let g = Grid::new(1, 10.0, 401).unwrap();
        let u = sample_profile(&g, &Profile::Gaussian { center: vec![0.0], width: 1.0, amplitude: 1.0 });
        assert_eq!(mass_in_ball(&u, &[0.0], 0.0).unwrap(), 0.0);
        assert_eq!(mass_in_ball(&u, &[0.0], 100.0).unwrap(), 1.0);
        // Direct-sum oracle written independently of the implementation.
        let (mut inside, mut total) = (0.0, 0.0);
        for k in 0..401 {
            let x = -10.0 + 0.05 * k as f64;
            let v: f64 = (-x * x / 2.0).exp();
            total += v * v;
            if x.abs() < 2.0 {
                inside += v * v;
            }
        }
        let frac = mass_in_ball(&u, &[0.0], 2.0).unwrap();
        assert!((frac - inside / total).abs() < 1e-12);
        let b = sample_profile(&g, &Profile::Bump { center: vec![0.0], radius: 1.0, amplitude: 1.0 });
        assert_eq!(mass_in_ball(&b, &[0.0], 1.5).unwrap(), 1.0);
        assert!(matches!(mass_in_ball(&Field::zeros(g), &[0.0], 1.0), Err(Error::ZeroField)));
    }

    #[test]
    fn localization_diagnostic() {
        let g = Grid::new(1, 5.0, 101).unwrap();
        assert_eq!(localization_profile(&Field::zeros(g), 1.0), 0.0);
        let mut point = Field::zeros(g);
        point.values_mut()[50] = 3.0;
        for r in [0.01, 0.5, 2.0] {
            assert!((localization_profile(&point, r) - 0.1 * 9.0).abs() < 1e-14);
        }
        let u = sample_profile(&g, &Profile::Gaussian { center: vec![0.7], width: 0.8, amplitude: 1.0 });
        let numerators: Vec<f64> = (0..g.len())
            .map(|i| {
                let c = g.node(i);
                mass_in_ball(&u, &c[..1], 1.3).unwrap() * u.mass()
            })
            .collect();
        let best = numerators.iter().cloned().fold(0.0, f64::max);
        let arg = numerators.iter().position(|&v| v == best).unwrap();
        assert!((g.node(arg)[0] - 0.7).abs() < 1e-12);
        let loc = localization_profile(&u, 1.3);
        assert!((loc - best).abs() < 1e-13, "{loc} {best}");

        let g2 = Grid::new(2, 2.0, 21).unwrap();
        let u2 = sample_profile(&g2, &Profile::Gaussian { center: vec![0.4, -0.2], width: 0.5, amplitude: 1.0 });
        let best2 = (0..g2.len())
            .map(|i| mass_in_ball(&u2, &g2.node(i), 0.7).unwrap() * u2.mass())
            .fold(0.0, f64::max);
        assert!((localization_profile(&u2, 0.7) - best2).abs() < 1e-13);
    }

    #[test]
    fn interpolation_reproduces_linear_functions() {
        let coarse = Grid::new(2, 2.0, 11).unwrap();
        let fine = Grid::new(2, 2.0, 21).unwrap();
        let f = |x: [f64; 2]| 1.0 + 0.5 * x[0] - 0.25 * x[1];
        let u = Field::from_fn(coarse, f);
        let v = u.interpolate_to(&fine);
        for i in 0..fine.len() {
            assert!((v.values()[i] - f(fine.node(i))).abs() < 1e-13);
        }
        let wide = Grid::new(1, 4.0, 9).unwrap();
        let w = Field::from_fn(Grid::new(1, 2.0, 5).unwrap(), |_| 1.0).interpolate_to(&wide);
        assert_eq!(w.values(), &[0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn field_file_errors() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::new(2, 1.5, 7).unwrap();
        let u = random_field(g, 11);
        let path = dir.path().join("u.rsfld");
        write_field(&u, &path).unwrap();
        assert_eq!(read_field(&path).unwrap(), u);

        let bytes = std::fs::read(&path).unwrap();
        let short = dir.path().join("short.rsfld");
        std::fs::write(&short, &bytes[..bytes.len() - 5]).unwrap();
        let err = read_field(&short).unwrap_err();
        assert_eq!(err.to_string(), "unexpected end of field file");

        let mut bad = bytes.clone();
        bad[0] = b'X';
        let badp = dir.path().join("bad.rsfld");
        std::fs::write(&badp, &bad).unwrap();
        assert_eq!(read_field(&badp).unwrap_err().to_string(), "not a field file");

        let mut wrong_n = bytes;
        wrong_n[6] = 3;
        std::fs::write(&badp, &wrong_n).unwrap();
        assert!(matches!(read_field(&badp), Err(Error::DimensionMismatch(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn field_file_round_trip(seed in any::<u64>(), n in 1usize..=2, half in 1usize..6) {
            let g = Grid::new(n, 0.37 * seed as f64 % 5.0 + 0.5, 2 * half + 1).unwrap();
            let u = random_field(g, seed);
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("f.rsfld");
            write_field(&u, &p).unwrap();
            let back = read_field(&p).unwrap();
            prop_assert_eq!(back.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                            u.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
            prop_assert!(back.grid().same_as(u.grid()));
        }

        #[test]
        fn norm_homogeneity_and_ball_monotonicity(seed in any::<u64>(), c in -5.0f64..5.0, r in 0.0f64..3.0) {
            let g = Grid::new(1, 2.0, 41).unwrap();
            let u = random_field(g, seed);
            let a = lp_norm_weighted(&u, 3.0, Weight::Constant(2.0)).unwrap();
            let b = lp_norm_weighted(&u.scaled(c), 3.0, Weight::Constant(2.0)).unwrap();
            prop_assert!((b - c.abs() * a).abs() <= 1e-12 * (1.0 + a));
            prop_assert!(a >= 0.0);
            let f1 = mass_in_ball(&u, &[0.3], r).unwrap();
            let f2 = mass_in_ball(&u, &[0.3], r + 0.25).unwrap();
            prop_assert!(f1 <= f2 && f2 <= 1.0);
            let c = g.node(23);
            let at_node = mass_in_ball(&u, &c[..1], r).unwrap() * u.mass();
            prop_assert!(localization_profile(&u, r) + 1e-14 >= at_node);
        }
    }
}
