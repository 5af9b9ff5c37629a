//! Random-matrix oracle for `⊠`: moments of products of independently
//! Haar-rotated diagonal matrices whose spectra match the input measures.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freeconv::MomentVector;
use crate::measure::{AtomicMeasure, Space};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub dim: usize,
    pub samples: usize,
    pub seed: u64,
    /// number of moments to estimate
    #[serde(default = "default_order")]
    pub order: usize,
}

fn default_order() -> usize {
    4
}

impl McConfig {
    pub fn new(dim: usize, samples: usize, seed: u64) -> Self {
        McConfig {
            dim,
            samples,
            seed,
            order: default_order(),
        }
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.order = order;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::MonteCarlo(format!("dimension {} < 2", self.dim)));
        }
        if self.samples == 0 {
            return Err(Error::MonteCarlo("need at least one sample".into()));
        }
        if self.order == 0 {
            return Err(Error::MonteCarlo("order must be positive".into()));
        }
        Ok(())
    }
}

/// Sample mean of the normalized traces with standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct McEstimate {
    pub space: Space,
    pub config: McConfig,
    pub mean: Vec<Complex64>,
    /// `sqrt(var(Re) + var(Im)) / sqrt(samples)` per moment
    pub std_err: Vec<f64>,
}

impl McEstimate {
    pub fn moments(&self) -> MomentVector {
        MomentVector {
            space: self.space,
            moments: self.mean.clone(),
        }
    }

    fn from_samples(space: Space, config: McConfig, samples: Vec<Vec<Complex64>>) -> Self {
        let n = samples.len() as f64;
        let k = config.order;
        let mut mean = vec![Complex64::new(0.0, 0.0); k];
        for s in &samples {
            for (m, x) in mean.iter_mut().zip(s) {
                *m += x;
            }
        }
        for m in mean.iter_mut() {
            *m /= n;
        }
        let std_err = (0..k)
            .map(|j| {
                if samples.len() < 2 {
                    return 0.0;
                }
                let ss: f64 = samples.iter().map(|s| (s[j] - mean[j]).norm_sqr()).sum();
                (ss / (n - 1.0)).sqrt() / n.sqrt()
            })
            .collect();
        McEstimate {
            space,
            config,
            mean,
            std_err,
        }
    }
}

/// Eigenvalue multiplicities summing to `d`, by largest remainder.
fn multiplicities(nu: &AtomicMeasure, d: usize) -> Result<Vec<usize>> {
    let atoms = nu.atoms();
    if d < atoms.len() {
        return Err(Error::MonteCarlo(format!(
            "dimension {d} is smaller than the atom count {}",
            atoms.len()
        )));
    }
    let exact: Vec<f64> = atoms.iter().map(|a| a.weight * d as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut order: Vec<usize> = (0..atoms.len()).collect();
    order.sort_by(|&i, &j| {
        let ri = exact[i] - counts[i] as f64;
        let rj = exact[j] - counts[j] as f64;
        rj.total_cmp(&ri).then(i.cmp(&j))
    });
    let assigned: usize = counts.iter().sum();
    for &i in order.iter().take(d - assigned) {
        counts[i] += 1;
    }
    Ok(counts)
}

fn sample_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// First `r` columns of a Haar orthogonal matrix.
fn haar_orthogonal_columns(rng: &mut impl Rng, d: usize, r: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(d, r, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let diag = qr.r().diagonal();
    for (j, rjj) in diag.iter().enumerate() {
        if *rjj < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// First `r` columns of a Haar unitary matrix, as real and imaginary parts.
fn haar_unitary_columns(rng: &mut impl Rng, d: usize, r: usize) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let g = DMatrix::from_fn(d, r, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(s * re, s * im)
    });
    let qr = g.qr();
    let mut q = qr.q();
    let diag = qr.r().diagonal();
    for (j, rjj) in diag.iter().enumerate() {
        let n = rjj.norm();
        if n > 0.0 {
            let phase = rjj / n;
            for x in q.column_mut(j).iter_mut() {
                *x *= phase;
            }
        }
    }
    CMat {
        re: q.map(|z| z.re),
        im: q.map(|z| z.im),
    }
}

/// Spectral layout of one factor: the most repeated atom as a base value and
/// the others as a low-rank correction on Haar-rotated columns.
struct LowRank {
    base: usize,
    /// `(atom index, multiplicity)` of the non-base atoms, in column order
    blocks: Vec<(usize, usize)>,
    rank: usize,
}

impl LowRank {
    fn new(counts: &[usize]) -> Self {
        let base = (0..counts.len())
            .max_by(|&i, &j| counts[i].cmp(&counts[j]).then(j.cmp(&i)))
            .expect("measure has atoms");
        let blocks: Vec<(usize, usize)> = counts
            .iter()
            .enumerate()
            .filter(|&(i, &c)| i != base && c > 0)
            .map(|(i, &c)| (i, c))
            .collect();
        let rank = blocks.iter().map(|b| b.1).sum();
        LowRank { base, blocks, rank }
    }

    fn column_values<T: Copy>(&self, values: &[T], f: impl Fn(T, T) -> T) -> Vec<T> {
        let b = values[self.base];
        self.blocks
            .iter()
            .flat_map(|&(i, c)| std::iter::repeat_n(f(values[i], b), c))
            .collect()
    }
}

fn diagonal_entries<T: Copy>(values: &[T], counts: &[usize]) -> Vec<T> {
    values
        .iter()
        .zip(counts)
        .flat_map(|(&v, &c)| std::iter::repeat_n(v, c))
        .collect()
}

/// `tr(M^k)/d` for `k = 1..K` from the powers `M, …, M^{⌈K/2⌉}`, using
/// `tr(M^{i+j}) = Σ_ab (M^i)_ab (M^j)_ba`.
fn normalized_traces_real(m: &DMatrix<f64>, order: usize) -> Vec<Complex64> {
    let d = m.nrows() as f64;
    let h = order.div_ceil(2);
    let mut powers = vec![m.clone()];
    for _ in 1..h {
        let next = powers.last().unwrap() * m;
        powers.push(next);
    }
    (1..=order)
        .map(|k| {
            let i = k.div_ceil(2);
            let j = k / 2;
            let t = if j == 0 {
                powers[i - 1].trace()
            } else {
                powers[i - 1].dot(&powers[j - 1].transpose())
            };
            Complex64::new(t / d, 0.0)
        })
        .collect()
}

/// Complex matrix stored as real and imaginary parts, so products run on
/// real gemm kernels.
#[derive(Clone)]
struct CMat {
    re: DMatrix<f64>,
    im: DMatrix<f64>,
}

impl CMat {
    fn diagonal(entries: &[Complex64]) -> Self {
        CMat {
            re: DMatrix::from_diagonal(&DVector::from_iterator(entries.len(), entries.iter().map(|z| z.re))),
            im: DMatrix::from_diagonal(&DVector::from_iterator(entries.len(), entries.iter().map(|z| z.im))),
        }
    }

    fn mul(&self, other: &CMat) -> CMat {
        CMat {
            re: &self.re * &other.re - &self.im * &other.im,
            im: &self.re * &other.im + &self.im * &other.re,
        }
    }

    /// `self · V^*`.
    fn mul_adjoint(&self, v: &CMat) -> CMat {
        CMat {
            re: &self.re * v.re.transpose() + &self.im * v.im.transpose(),
            im: &self.im * v.re.transpose() - &self.re * v.im.transpose(),
        }
    }

    fn scale_columns(&mut self, c: &[Complex64]) {
        for (j, z) in c.iter().enumerate() {
            let re = self.re.column(j).clone_owned();
            let im = self.im.column(j).clone_owned();
            self.re.set_column(j, &(&re * z.re - &im * z.im));
            self.im.set_column(j, &(&re * z.im + &im * z.re));
        }
    }

    fn scale(&mut self, z: Complex64) {
        let re = self.re.clone();
        self.re = &self.re * z.re - &self.im * z.im;
        self.im = &re * z.im + &self.im * z.re;
    }

    fn add_assign(&mut self, other: &CMat) {
        self.re += &other.re;
        self.im += &other.im;
    }

    fn trace_product(&self, other: &CMat) -> Complex64 {
        // Σ_ab A_ab B_ba
        let rt = other.re.transpose();
        let it = other.im.transpose();
        Complex64::new(self.re.dot(&rt) - self.im.dot(&it), self.re.dot(&it) + self.im.dot(&rt))
    }

    fn trace(&self) -> Complex64 {
        Complex64::new(self.re.trace(), self.im.trace())
    }
}

fn normalized_traces_complex(m: &CMat, order: usize) -> Vec<Complex64> {
    let d = m.re.nrows() as f64;
    let h = order.div_ceil(2);
    let mut powers = vec![m.clone()];
    for _ in 1..h {
        let next = powers.last().unwrap().mul(m);
        powers.push(next);
    }
    (1..=order)
        .map(|k| {
            let i = k.div_ceil(2);
            let j = k / 2;
            let t = if j == 0 {
                powers[i - 1].trace()
            } else {
                powers[i - 1].trace_product(&powers[j - 1])
            };
            t / d
        })
        .collect()
}

/// Monte Carlo moments of `μ ⊠ ν` on the half-line from
/// `(1/d) tr((A^{1/2} O B O^T A^{1/2})^k)` with `O` Haar orthogonal.
pub fn rmt_oracle_pos(mu: &AtomicMeasure, nu: &AtomicMeasure, cfg: &McConfig) -> Result<McEstimate> {
    cfg.validate()?;
    Space::PositiveHalfLine.expect(mu.space())?;
    Space::PositiveHalfLine.expect(nu.space())?;
    let d = cfg.dim;
    let a_vals: Vec<f64> = mu.atoms().iter().map(|a| a.pos).collect();
    let b_vals: Vec<f64> = nu.atoms().iter().map(|a| a.pos).collect();
    let a_diag = diagonal_entries(&a_vals, &multiplicities(mu, d)?);
    let sqrt_a: Vec<f64> = a_diag.iter().map(|x| x.sqrt()).collect();
    let layout = LowRank::new(&multiplicities(nu, d)?);
    let b_base = b_vals[layout.base];
    let coeffs = layout.column_values(&b_vals, |x, b| x - b);

    let samples: Vec<Vec<Complex64>> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            // B = b I + V C V^T, so A^{1/2} B A^{1/2} = bA + W C W^T with W = A^{1/2} V
            let mut m = DMatrix::from_diagonal(&DVector::from_iterator(d, a_diag.iter().map(|a| a * b_base)));
            if layout.rank > 0 {
                let mut rng = sample_rng(cfg.seed, i);
                let mut w = haar_orthogonal_columns(&mut rng, d, layout.rank);
                for (r, s) in sqrt_a.iter().enumerate() {
                    w.row_mut(r).scale_mut(*s);
                }
                let mut wc = w.clone();
                for (j, c) in coeffs.iter().enumerate() {
                    wc.column_mut(j).scale_mut(*c);
                }
                m.gemm(1.0, &wc, &w.transpose(), 1.0);
            }
            normalized_traces_real(&m, cfg.order)
        })
        .collect();
    Ok(McEstimate::from_samples(Space::PositiveHalfLine, *cfg, samples))
}

/// Monte Carlo moments of `ν_1 ⊠ ⋯ ⊠ ν_k` on the circle from
/// `(1/d) tr((D_1 W_2 D_2 W_2^* ⋯ W_k D_k W_k^*)^j)` with independent Haar unitaries.
pub fn rmt_oracle_circ_row(row: &[AtomicMeasure], cfg: &McConfig) -> Result<McEstimate> {
    cfg.validate()?;
    let first = row.first().ok_or_else(|| Error::MonteCarlo("empty row".into()))?;
    for m in row {
        Space::Circle.expect(m.space())?;
    }
    let d = cfg.dim;
    let points = |m: &AtomicMeasure| -> Vec<Complex64> {
        m.atoms().iter().map(|a| Complex64::from_polar(1.0, a.pos)).collect()
    };
    let d1 = diagonal_entries(&points(first), &multiplicities(first, d)?);
    let mut factors = Vec::with_capacity(row.len().saturating_sub(1));
    for m in &row[1..] {
        let layout = LowRank::new(&multiplicities(m, d)?);
        let pts = points(m);
        let base = pts[layout.base];
        // U = e^{iθ_b}(I + V C V^*), with C = e^{i(θ_l − θ_b)} − 1 on each block
        let coeffs = layout.column_values(&pts, |x, b| x / b - 1.0);
        factors.push((layout.rank, base, coeffs));
    }

    let samples: Vec<Vec<Complex64>> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(cfg.seed, i);
            let mut x = CMat::diagonal(&d1);
            for (rank, base, coeffs) in &factors {
                if *rank > 0 {
                    let v = haar_unitary_columns(&mut rng, d, *rank);
                    let mut xv = x.mul(&v);
                    xv.scale_columns(coeffs);
                    x.add_assign(&xv.mul_adjoint(&v));
                }
                x.scale(*base);
            }
            normalized_traces_complex(&x, cfg.order)
        })
        .collect();
    Ok(McEstimate::from_samples(Space::Circle, *cfg, samples))
}

/// Monte Carlo moments of `μ ⊠ ν` on the circle.
pub fn rmt_oracle_circ(mu: &AtomicMeasure, nu: &AtomicMeasure, cfg: &McConfig) -> Result<McEstimate> {
    mu.space().expect(nu.space())?;
    rmt_oracle_circ_row(&[mu.clone(), nu.clone()], cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Atom;

    fn half(atoms: &[(f64, f64)]) -> AtomicMeasure {
        AtomicMeasure::new(
            Space::PositiveHalfLine,
            atoms.iter().map(|&(t, w)| Atom::new(t, w)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn multiplicities_sum_to_dim() {
        let nu = half(&[(1.0, 1.0 / 3.0), (2.0, 1.0 / 3.0), (3.0, 1.0 / 3.0)]);
        let c = multiplicities(&nu, 10).unwrap();
        assert_eq!(c.iter().sum::<usize>(), 10);
        assert_eq!(c, vec![4, 3, 3]);
        assert!(multiplicities(&nu, 2).is_err());
    }

    #[test]
    fn haar_columns_orthonormal() {
        let mut rng = sample_rng(7, 0);
        let q = haar_orthogonal_columns(&mut rng, 20, 5);
        assert!((q.transpose() * &q - DMatrix::<f64>::identity(5, 5)).norm() < 1e-12);
        let u = haar_unitary_columns(&mut rng, 20, 5);
        let gram = CMat { re: u.re.transpose(), im: -u.im.transpose() }.mul(&u);
        assert!((gram.re - DMatrix::<f64>::identity(5, 5)).norm() < 1e-12);
        assert!(gram.im.norm() < 1e-12);
    }

    #[test]
    fn point_masses_are_exact() {
        let a = AtomicMeasure::dirac(Space::PositiveHalfLine, 2.0).unwrap();
        let b = AtomicMeasure::dirac(Space::PositiveHalfLine, 3.0).unwrap();
        let est = rmt_oracle_pos(&a, &b, &McConfig::new(8, 3, 1)).unwrap();
        for (k, m) in est.mean.iter().enumerate() {
            assert!((m.re - 6f64.powi(k as i32 + 1)).abs() < 1e-12 * 6f64.powi(k as i32 + 1));
            assert_eq!(est.std_err[k], 0.0);
        }
        let a = AtomicMeasure::dirac(Space::Circle, 0.4).unwrap();
        let b = AtomicMeasure::dirac(Space::Circle, 1.1).unwrap();
        let est = rmt_oracle_circ(&a, &b, &McConfig::new(8, 2, 1)).unwrap();
        for (k, m) in est.mean.iter().enumerate() {
            assert!((m - Complex64::from_polar(1.0, 1.5 * (k + 1) as f64)).norm() < 1e-12);
        }
    }

    #[test]
    fn first_moment_is_multiplicative() {
        let nu = half(&[(1.0, 0.5), (2.0, 0.5)]);
        // E tr(A O B O^T)/d = (tr A/d)(tr B/d) at every d
        let est = rmt_oracle_pos(&nu, &nu, &McConfig::new(64, 50, 3)).unwrap();
        assert!((est.mean[0].re - 2.25).abs() < 4.0 * est.std_err[0]);
    }

    #[test]
    fn reproducible_given_seed() {
        let nu = half(&[(1.0, 0.5), (2.0, 0.5)]);
        let cfg = McConfig::new(32, 4, 11);
        assert_eq!(rmt_oracle_pos(&nu, &nu, &cfg).unwrap(), rmt_oracle_pos(&nu, &nu, &cfg).unwrap());
        let other = McConfig::new(32, 4, 12);
        assert_ne!(rmt_oracle_pos(&nu, &nu, &cfg).unwrap().mean, rmt_oracle_pos(&nu, &nu, &other).unwrap().mean);
    }

    #[test]
    fn config_validation() {
        let nu = half(&[(1.0, 0.5), (2.0, 0.5)]);
        assert!(rmt_oracle_pos(&nu, &nu, &McConfig::new(1, 4, 0)).is_err());
        assert!(rmt_oracle_pos(&nu, &nu, &McConfig::new(8, 0, 0)).is_err());
        let c = AtomicMeasure::dirac(Space::Circle, 0.0).unwrap();
        assert!(rmt_oracle_pos(&nu, &c, &McConfig::new(8, 1, 0)).is_err());
    }
}
