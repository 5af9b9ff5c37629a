//! Non-crossing partitions, the Kreweras complement, and the brute-force
//! moment formula for `⊠` built on them.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest `n` for which `NC(n)` is enumerated.
pub const MAX_NC_ORDER: usize = 8;

/// A non-crossing partition of `{1..n}`, blocks as sorted 0-based index lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonCrossingPartition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl NonCrossingPartition {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    /// Block sizes of the Kreweras complement `K(π)`, read off as the
    /// cycle type of the permutation `π^{-1}γ`, where π sends each block
    /// element to the next one cyclically and `γ = (1 2 … n)`.
    pub fn kreweras_sizes(&self) -> Vec<usize> {
        let n = self.n;
        let mut inv = vec![0usize; n];
        for b in &self.blocks {
            for (j, &i) in b.iter().enumerate() {
                let next = b[(j + 1) % b.len()];
                inv[next] = i;
            }
        }
        let perm: Vec<usize> = (0..n).map(|i| inv[(i + 1) % n]).collect();
        let mut seen = vec![false; n];
        let mut sizes = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut len = 0;
            let mut i = s;
            while !seen[i] {
                seen[i] = true;
                i = perm[i];
                len += 1;
            }
            sizes.push(len);
        }
        sizes
    }

    fn is_non_crossing(blocks: &[Vec<usize>]) -> bool {
        for (x, p) in blocks.iter().enumerate() {
            for q in &blocks[x + 1..] {
                for &a in p {
                    for &c in p {
                        if c <= a {
                            continue;
                        }
                        if q.iter().any(|&b| a < b && b < c)
                            && q.iter().any(|&d| d < a || d > c)
                        {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    // restricted growth strings
    let mut out = Vec::new();
    let mut rgs = vec![0usize; n];
    fn rec(i: usize, max: usize, rgs: &mut Vec<usize>, out: &mut Vec<Vec<Vec<usize>>>) {
        let n = rgs.len();
        if i == n {
            let mut blocks = vec![Vec::new(); max + 1];
            for (j, &b) in rgs.iter().enumerate() {
                blocks[b].push(j);
            }
            out.push(blocks);
            return;
        }
        for b in 0..=max + 1 {
            rgs[i] = b;
            rec(i + 1, max.max(b), rgs, out);
        }
    }
    if n == 0 {
        return vec![Vec::new()];
    }
    rec(1, 0, &mut rgs, &mut out);
    out
}

static CACHE: [OnceLock<Vec<NonCrossingPartition>>; MAX_NC_ORDER + 1] =
    [const { OnceLock::new() }; MAX_NC_ORDER + 1];

/// All of `NC(n)` for `1 ≤ n ≤ 8`.
pub fn nc_partitions(n: usize) -> Result<&'static [NonCrossingPartition]> {
    if n > MAX_NC_ORDER {
        return Err(Error::OrderTooLarge(n));
    }
    Ok(CACHE[n].get_or_init(|| {
        set_partitions(n)
            .into_iter()
            .filter(|b| NonCrossingPartition::is_non_crossing(b))
            .map(|blocks| NonCrossingPartition { n, blocks })
            .collect()
    }))
}

fn product_over(sizes: &[usize], seq: &[Complex64]) -> Complex64 {
    sizes
        .iter()
        .fold(Complex64::new(1.0, 0.0), |acc, &s| acc * seq[s - 1])
}

/// Free cumulants by Möbius inversion over `NC(n)`:
/// `κ_n = m_n − Σ_{π ≠ 1_n} κ_π`.
pub fn cumulants_by_enumeration(m: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut kappa: Vec<Complex64> = Vec::with_capacity(m.len());
    for n in 1..=m.len() {
        let mut rest = Complex64::new(0.0, 0.0);
        for p in nc_partitions(n)? {
            if p.blocks.len() > 1 {
                rest += product_over(&p.block_sizes(), &kappa);
            }
        }
        kappa.push(m[n - 1] - rest);
    }
    Ok(kappa)
}

/// `m_n(μ⊠ν) = Σ_{π∈NC(n)} κ_π[μ] · m_{K(π)}[ν]`, given the moments of both.
pub fn nc_boxtimes(m_mu: &[Complex64], m_nu: &[Complex64]) -> Result<Vec<Complex64>> {
    let order = m_mu.len().min(m_nu.len());
    if order > MAX_NC_ORDER {
        return Err(Error::OrderTooLarge(order));
    }
    let kappa = cumulants_by_enumeration(&m_mu[..order])?;
    (1..=order)
        .map(|n| {
            Ok(nc_partitions(n)?
                .iter()
                .map(|p| product_over(&p.block_sizes(), &kappa) * product_over(&p.kreweras_sizes(), m_nu))
                .sum())
        })
        .collect()
}
