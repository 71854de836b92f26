//! Discrete regional and full fractional quadratic forms.
//!
//! The form realizes the ordered-pair sum
//!
//! ```text
//! uᵀAu = Σ_i Σ_{j ≠ i, |x_j - x_i| < ρ(x_i)} h^{2n} (u_j - u_i)^2 / |x_j - x_i|^{n+2α}
//! ```
//!
//! with the singular self-pair omitted. Each ordered pair is split over the
//! entries `(i,i), (j,j), (i,j), (j,i)`, so `A` is symmetric and positive
//! semidefinite by construction.

mod csr;
mod norm_equiv;
mod scope;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use csr::CsrMatrix;
pub use norm_equiv::{check_norm_equivalence, norm_equivalence_constant, sphere_area, NormEquivalenceReport};
pub use scope::{eval_scope, Frame, ScopeKind, ScopeSpec};

use crate::error::{Error, Result};
use crate::field::{Field, Grid};
use crate::zeta::{dirichlet_beta, riemann_zeta};

/// Treatment of the kernel singularity at `z = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quadrature {
    /// Skip the self-pair; leading error `O(h^{2-2α})`.
    PunchedHole,
    /// Punched hole with the nearest-neighbour shell reweighted so that the
    /// lattice sum reproduces the integral on quadratics.
    ShellCorrected,
}

impl Quadrature {
    /// Weight multiplier on the `|k| = 1` shell.
    pub fn shell_multiplier(self, n: usize, alpha: f64) -> f64 {
        match self {
            Quadrature::PunchedHole => 1.0,
            Quadrature::ShellCorrected => match n {
                1 => 1.0 - riemann_zeta(2.0 * alpha - 1.0),
                _ => 1.0 - riemann_zeta(alpha) * dirichlet_beta(alpha),
            },
        }
    }

    /// Leading order of the consistency error in `h`.
    pub fn error_order(self, alpha: f64) -> f64 {
        match self {
            Quadrature::PunchedHole => 2.0 - 2.0 * alpha,
            Quadrature::ShellCorrected => 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssemblyOptions {
    /// Accumulate zero-extension pairs that leave the box onto the diagonal.
    pub ghosts: bool,
    pub quadrature: Quadrature,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self { ghosts: true, quadrature: Quadrature::PunchedHole }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FormKind {
    Regional,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormMeta {
    pub kind: FormKind,
    pub alpha: f64,
    /// FNV-1a hash of the per-node scope radii (0 for the full form).
    pub scope_hash: u64,
    /// Largest pair distance that can enter the form.
    pub truncation_radius: f64,
    pub tail_correction: bool,
    pub ghosts: bool,
    pub quadrature: Quadrature,
}

/// Assembled symmetric form together with the diagonal part that does not come
/// from interior pairs (zero-extension ghosts and the far-field tail).
#[derive(Debug, Clone)]
pub struct QuadForm {
    grid: Grid,
    matrix: CsrMatrix,
    boundary_diag: Vec<f64>,
    meta: FormMeta,
}

impl QuadForm {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn meta(&self) -> &FormMeta {
        &self.meta
    }

    pub fn alpha(&self) -> f64 {
        self.meta.alpha
    }

    pub fn boundary_diag(&self) -> &[f64] {
        &self.boundary_diag
    }

    /// Writes `i j value` lines sorted by `(i, j)`, 17 significant digits.
    pub fn write_coo(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        for (i, j, v) in self.matrix.triplets() {
            writeln!(w, "{i} {j} {v:.16e}")?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange(alpha))
    }
}

struct Offset {
    k: [isize; 2],
    dist: f64,
    weight: f64,
}

/// Lattice offsets `k ≠ 0` in lexicographic order with `|k|h < reach` (or every
/// in-box offset when `reach` is infinite).
fn stencil(grid: &Grid, alpha: f64, reach: f64, quadrature: Quadrature) -> Vec<Offset> {
    let n = grid.dim();
    let h = grid.spacing();
    let box_span = grid.points() as isize - 1;
    let kmax = if reach.is_finite() { ((reach / h).ceil() as isize).max(1) } else { box_span };
    let shell = quadrature.shell_multiplier(n, alpha);
    let cell2 = grid.cell_volume() * grid.cell_volume();
    let expo = n as f64 + 2.0 * alpha;
    let second = if n == 1 { 0..=0 } else { -kmax..=kmax };
    let mut out = Vec::new();
    for a in -kmax..=kmax {
        for b in second.clone() {
            if a == 0 && b == 0 {
                continue;
            }
            let norm2 = a * a + b * b;
            let dist = (norm2 as f64).sqrt() * h;
            if reach.is_finite() && dist >= reach {
                continue;
            }
            let mut weight = cell2 / dist.powf(expo);
            if norm2 == 1 {
                weight *= shell;
            }
            out.push(Offset { k: [a, b], dist, weight });
        }
    }
    out
}

fn fnv1a(values: &[f64]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for v in values {
        for b in v.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    }
    h
}

/// Row `i`: sorted off-diagonal entries, interior diagonal, boundary diagonal.
fn assemble_row(
    grid: &Grid,
    i: usize,
    offsets: &[Offset],
    include: impl Fn(usize, &Offset) -> f64,
    ghost: impl Fn(&Offset) -> f64,
) -> (Vec<(usize, f64)>, f64) {
    let n = grid.dim();
    let np = grid.points() as isize;
    let m = grid.multi_index(i);
    let mut entries = Vec::new();
    let mut diag = 0.0;
    let mut boundary = 0.0;
    let mut diag_slot = None;
    for off in offsets {
        let p = m[0] as isize + off.k[0];
        let q = m[1] as isize + off.k[1];
        let inside = p >= 0 && p < np && (n == 1 || (q >= 0 && q < np));
        if inside {
            let j = grid.flat_index([p as usize, q as usize]);
            let c = include(j, off);
            if c > 0.0 {
                if diag_slot.is_none() && j > i {
                    diag_slot = Some(entries.len());
                    entries.push((i, 0.0));
                }
                entries.push((j, -c * off.weight));
                diag += c * off.weight;
            }
        } else {
            boundary += ghost(off);
        }
    }
    let slot = diag_slot.unwrap_or_else(|| {
        entries.push((i, 0.0));
        entries.len() - 1
    });
    entries[slot].1 = diag + boundary;
    (entries, boundary)
}

fn build(grid: &Grid, rows: Vec<(Vec<(usize, f64)>, f64)>, meta: FormMeta) -> QuadForm {
    let (rows, boundary_diag): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    QuadForm { grid: *grid, matrix: CsrMatrix::from_rows(rows), boundary_diag, meta }
}

/// Regional form with per-node scope radii `scope[i] = ρ(x_i)`.
pub fn assemble_regional_form(
    grid: &Grid,
    scope: &[f64],
    alpha: f64,
    opts: AssemblyOptions,
) -> Result<QuadForm> {
    check_alpha(alpha)?;
    if scope.len() != grid.len() {
        return Err(Error::GridMismatch);
    }
    if scope.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::Invalid("scope radii must be positive".into()));
    }
    let reach = scope.iter().cloned().fold(0.0, f64::max);
    let offsets = stencil(grid, alpha, reach, opts.quadrature);
    let rows: Vec<_> = (0..grid.len())
        .into_par_iter()
        .with_min_len(16)
        .map(|i| {
            let ri = scope[i];
            assemble_row(
                grid,
                i,
                &offsets,
                |j, off| (off.dist < ri) as u8 as f64 + (off.dist < scope[j]) as u8 as f64,
                |off| if opts.ghosts && off.dist < ri { 2.0 * off.weight } else { 0.0 },
            )
        })
        .collect();
    let meta = FormMeta {
        kind: FormKind::Regional,
        alpha,
        scope_hash: fnv1a(scope),
        truncation_radius: reach,
        tail_correction: false,
        ghosts: opts.ghosts,
        quadrature: opts.quadrature,
    };
    Ok(build(grid, rows, meta))
}

/// Full fractional form (scope `+∞`) truncated at the box.
///
/// With `tail_correction` the zero extension is accounted for: lattice offsets
/// with `|z| < L` that leave the box go to the diagonal as ghosts, and
/// `|z| ≥ L` is covered by the analytic far-field term `h^n |S^{n-1}| / (α L^{2α})`.
pub fn assemble_full_form(
    grid: &Grid,
    alpha: f64,
    tail_correction: bool,
    quadrature: Quadrature,
) -> Result<QuadForm> {
    check_alpha(alpha)?;
    let offsets = stencil(grid, alpha, f64::INFINITY, quadrature);
    let tail = if tail_correction {
        grid.cell_volume() * sphere_area(grid.dim()) / (alpha * grid.half_width().powf(2.0 * alpha))
    } else {
        0.0
    };
    let r_tail = grid.half_width();
    let rows: Vec<_> = (0..grid.len())
        .into_par_iter()
        .with_min_len(16)
        .map(|i| {
            let ghost = |off: &Offset| if tail_correction && off.dist < r_tail * (1.0 - 1e-12) { 2.0 * off.weight } else { 0.0 };
            let (mut entries, boundary) = assemble_row(grid, i, &offsets, |_, _| 2.0, ghost);
            if tail != 0.0 {
                let d = entries.iter_mut().find(|(j, _)| *j == i).expect("diagonal present");
                d.1 += tail;
            }
            (entries, boundary + tail)
        })
        .collect();
    let meta = FormMeta {
        kind: FormKind::Full,
        alpha,
        scope_hash: 0,
        truncation_radius: 2.0 * grid.half_width() * (grid.dim() as f64).sqrt(),
        tail_correction,
        ghosts: tail_correction,
        quadrature,
    };
    Ok(build(grid, rows, meta))
}

/// `v = A u`.
pub fn apply_form(form: &QuadForm, u: &Field) -> Result<Field> {
    if !form.grid.same_as(u.grid()) {
        return Err(Error::GridMismatch);
    }
    Field::new(form.grid, form.matrix.matvec(u.values()))
}

/// `uᵀAu`, evaluated as a sum of squares so it is never negative.
pub fn quad_energy(form: &QuadForm, u: &Field) -> Result<f64> {
    if !form.grid.same_as(u.grid()) {
        return Err(Error::GridMismatch);
    }
    let x = u.values();
    let m = &form.matrix;
    let mut pairs = 0.0;
    for i in 0..m.nrows() {
        let (c, v) = m.row(i);
        let mut row = 0.0;
        for (&j, &a) in c.iter().zip(v) {
            if j != i {
                let d = x[j] - x[i];
                row -= a * d * d;
            }
        }
        pairs += row;
    }
    let boundary: f64 = form.boundary_diag.iter().zip(x).map(|(b, v)| b * v * v).sum();
    Ok(0.5 * pairs + boundary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: Grid, rng: &mut ChaCha8Rng) -> Field {
        Field::from_fn(grid, |_| rng.random_range(-1.0..1.0))
    }

    fn no_ghosts() -> AssemblyOptions {
        AssemblyOptions { ghosts: false, quadrature: Quadrature::PunchedHole }
    }

    #[test]
    fn hand_sum_on_three_nodes() {
        // Nodes {-1, 0, 1}, h = 1, ρ ≡ 2: only the neighbouring pair (0,1) touches u = (1,0,0).
        let g = Grid::new(1, 1.0, 3).unwrap();
        for alpha in [0.1, 0.5, 0.9] {
            let a = assemble_regional_form(&g, &[2.0; 3], alpha, no_ghosts()).unwrap();
            let u = Field::new(g, vec![1.0, 0.0, 0.0]).unwrap();
            assert!((quad_energy(&a, &u).unwrap() - 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn constants_have_zero_energy_without_ghosts() {
        let g = Grid::new(1, 2.0, 41).unwrap();
        let a = assemble_regional_form(&g, &vec![0.7; g.len()], 0.3, no_ghosts()).unwrap();
        let c = Field::from_fn(g, |_| 3.5);
        assert_eq!(quad_energy(&a, &c).unwrap(), 0.0);
        let withg = assemble_regional_form(&g, &vec![0.7; g.len()], 0.3, AssemblyOptions::default()).unwrap();
        assert!(quad_energy(&withg, &c).unwrap() > 0.0);
        let full = assemble_full_form(&g, 0.3, true, Quadrature::PunchedHole).unwrap();
        assert_eq!(quad_energy(&full, &Field::zeros(g)).unwrap(), 0.0);
    }

    #[test]
    fn alpha_range_checked() {
        let g = Grid::new(1, 1.0, 5).unwrap();
        assert!(matches!(assemble_regional_form(&g, &[1.0; 5], 1.0, no_ghosts()), Err(Error::AlphaOutOfRange(_))));
        assert!(matches!(assemble_full_form(&g, 0.0, false, Quadrature::PunchedHole), Err(Error::AlphaOutOfRange(_))));
    }

    #[test]
    fn tail_term_on_single_node() {
        let g = Grid::new(1, 4.0, 81).unwrap();
        let alpha = 0.35;
        let with = assemble_full_form(&g, alpha, true, Quadrature::PunchedHole).unwrap();
        let without = assemble_full_form(&g, alpha, false, Quadrature::PunchedHole).unwrap();
        let mut u = Field::zeros(g);
        let c = 1.7;
        u.values_mut()[40] = c;
        let diff = quad_energy(&with, &u).unwrap() - quad_energy(&without, &u).unwrap();
        // Two rays, each ∫_L^∞ r^{-1-2α} dr = 1/(2α L^{2α}), counted for both pair orders.
        let expect = 2.0 * g.spacing() * c * c * 2.0 / (2.0 * alpha * 4f64.powf(2.0 * alpha));
        assert!((diff - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn edge_node_sees_exterior_ghosts() {
        let g = Grid::new(1, 4.0, 81).unwrap();
        let alpha = 0.35;
        let with = assemble_full_form(&g, alpha, true, Quadrature::PunchedHole).unwrap();
        let without = assemble_full_form(&g, alpha, false, Quadrature::PunchedHole).unwrap();
        let mut u = Field::zeros(g);
        u.values_mut()[0] = 1.0;
        let diff = quad_energy(&with, &u).unwrap() - quad_energy(&without, &u).unwrap();
        let h = g.spacing();
        // offsets -1 ... -39 leave the box with |z| < L = 40h
        let ghosts: f64 = (1..40).map(|k| 2.0 * h * h / (k as f64 * h).powf(1.0 + 2.0 * alpha)).sum();
        let tail = h * 2.0 / (alpha * 4f64.powf(2.0 * alpha));
        assert!((diff - ghosts - tail).abs() < 1e-12 * diff);
        assert!((with.boundary_diag()[0] - ghosts - tail).abs() < 1e-12 * diff);
    }

    #[test]
    fn symmetric_and_matches_dense_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = Grid::new(1, 3.0, 61).unwrap();
        let scope: Vec<f64> = (0..g.len()).map(|i| 0.5 + 0.3 * (g.node(i)[0]).cos().abs()).collect();
        for opts in [no_ghosts(), AssemblyOptions::default(), AssemblyOptions { ghosts: true, quadrature: Quadrature::ShellCorrected }] {
            let a = assemble_regional_form(&g, &scope, 0.45, opts).unwrap();
            assert!(a.matrix().is_symmetric());
            let dense = a.matrix().to_dense();
            let u = random_field(g, &mut rng);
            let w = random_field(g, &mut rng);
            let au = apply_form(&a, &u).unwrap();
            for i in 0..g.len() {
                let s: f64 = (0..g.len()).map(|j| dense[i][j] * u.values()[j]).sum();
                assert!((s - au.values()[i]).abs() < 1e-12);
            }
            let aw = apply_form(&a, &w).unwrap();
            let lhs: f64 = w.values().iter().zip(au.values()).map(|(a, b)| a * b).sum();
            let rhs: f64 = u.values().iter().zip(aw.values()).map(|(a, b)| a * b).sum();
            assert!((lhs - rhs).abs() < 1e-12);
            let uau: f64 = u.values().iter().zip(au.values()).map(|(a, b)| a * b).sum();
            assert!((uau - quad_energy(&a, &u).unwrap()).abs() < 1e-12);
        }
        assert!(apply_form(&assemble_full_form(&g, 0.5, false, Quadrature::PunchedHole).unwrap(), &Field::zeros(g))
            .unwrap()
            .is_zero());
    }

    #[test]
    fn two_dimensional_form_is_symmetric_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = Grid::new(2, 1.0, 11).unwrap();
        let scope = vec![0.45; g.len()];
        let a = assemble_regional_form(&g, &scope, 0.6, AssemblyOptions::default()).unwrap();
        assert!(a.matrix().is_symmetric());
        let full = assemble_full_form(&g, 0.6, true, Quadrature::ShellCorrected).unwrap();
        assert!(full.matrix().is_symmetric());
        for _ in 0..20 {
            let u = random_field(g, &mut rng);
            assert!(quad_energy(&a, &u).unwrap() >= 0.0);
            assert!(quad_energy(&full, &u).unwrap() >= 0.0);
        }
    }

    #[test]
    fn regional_with_covering_scope_equals_full() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = Grid::new(1, 2.0, 41).unwrap();
        let big = vec![10.0; g.len()];
        let r = assemble_regional_form(&g, &big, 0.4, no_ghosts()).unwrap();
        let f = assemble_full_form(&g, 0.4, false, Quadrature::PunchedHole).unwrap();
        for _ in 0..10 {
            let u = random_field(g, &mut rng);
            let a = quad_energy(&r, &u).unwrap();
            let b = quad_energy(&f, &u).unwrap();
            assert!((a - b).abs() <= 1e-12 * b.max(1.0));
        }
    }

    #[test]
    fn coo_dump_sorted_with_17_digits() {
        let g = Grid::new(1, 1.0, 5).unwrap();
        let a = assemble_regional_form(&g, &[1.2; 5], 0.5, AssemblyOptions::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.coo");
        a.write_coo(&p).unwrap();
        let text = std::fs::read_to_string(p).unwrap();
        let mut prev = None;
        for line in text.lines() {
            let parts: Vec<&str> = line.split(' ').collect();
            let key = (parts[0].parse::<usize>().unwrap(), parts[1].parse::<usize>().unwrap());
            assert!(prev.map_or(true, |p| p < key));
            prev = Some(key);
            let v: f64 = parts[2].parse().unwrap();
            assert_eq!(v, a.matrix().get(key.0, key.1));
            assert_eq!(parts[2].split('e').next().unwrap().replace(['-', '.'], "").len(), 17);
        }
        assert_eq!(text.lines().count(), a.matrix().nnz());
    }

    #[test]
    fn shell_correction_accelerates_gaussian_seminorm() {
        // ∫∫ |u(x)-u(y)|^2 / |x-y|^{1+2α} for u = exp(-x^2/2) is 4√π 2^{-1-2α} Γ(1-α)/α.
        let alpha: f64 = 0.4;
        let exact = 4.0 * std::f64::consts::PI.sqrt() * 2f64.powf(-1.0 - 2.0 * alpha)
            * statrs::function::gamma::gamma(1.0 - alpha)
            / alpha;
        // the uniform far-field radius double counts O(L^{-2α-1}) near the centre, so the box is wide
        let err = |points: usize, quad: Quadrature| {
            let g = Grid::new(1, 40.0, points).unwrap();
            let a = assemble_full_form(&g, alpha, true, quad).unwrap();
            let u = Field::from_fn(g, |x| (-x[0] * x[0] / 2.0).exp());
            (quad_energy(&a, &u).unwrap() - exact).abs() / exact
        };
        let p1 = err(801, Quadrature::PunchedHole);
        let p2 = err(1601, Quadrature::PunchedHole);
        let c1 = err(801, Quadrature::ShellCorrected);
        let c2 = err(1601, Quadrature::ShellCorrected);
        assert!(p2 < p1);
        assert!(c1 < p1 / 5.0, "corrected {c1} vs punched {p1}");
        assert!(c2 < 1e-3, "corrected error {c2}");
    }
}
