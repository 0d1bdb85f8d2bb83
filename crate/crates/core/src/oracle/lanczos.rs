//! Restarted Lanczos with full reorthogonalization for the lowest eigenpair
//! of a Hermitian operator, optionally deflated against known eigenvectors.

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{abs2, czero, lit, to_f64, Real};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LanczosConfig<T: Real> {
    pub krylov_dim: usize,
    pub max_restarts: usize,
    /// Absolute residual target `‖Hx − θx‖`.
    pub tolerance: T,
    pub seed: u64,
}

impl<T: Real> LanczosConfig<T> {
    /// Defaults scaled to an operator-norm bound.
    pub fn for_norm(norm_bound: T) -> Self {
        let floor = T::eps() * lit(1e3);
        let rel = lit::<T>(1e-8).max(floor);
        Self {
            krylov_dim: 40,
            max_restarts: 200,
            tolerance: rel * norm_bound.max(T::one()),
            seed: 0x00be_2271,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Eigenpair<T: Real> {
    pub value: T,
    pub vector: Vec<Complex<T>>,
    pub residual: T,
}

pub(crate) fn dot<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter()
        .zip(b)
        .fold(czero(), |acc, (x, y)| acc + x.conj() * y)
}

pub(crate) fn norm<T: Real>(a: &[Complex<T>]) -> T {
    a.iter().fold(T::zero(), |acc, z| acc + abs2(*z)).sqrt()
}

fn axpy<T: Real>(alpha: Complex<T>, x: &[Complex<T>], y: &mut [Complex<T>]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn project_out<T: Real>(v: &mut [Complex<T>], basis: &[&[Complex<T>]]) {
    // two passes keep the vector orthogonal to working precision
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, v);
            axpy(-c, b, v);
        }
    }
}

fn random_vector<T: Real>(dim: usize, seed: u64) -> Vec<Complex<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim)
        .map(|_| {
            Complex::new(
                lit(rng.random::<f64>() - 0.5),
                lit(rng.random::<f64>() - 0.5),
            )
        })
        .collect()
}

/// Lowest eigenpair of `apply` on the orthogonal complement of `deflate`.
///
/// `deflate` vectors must be orthonormal. A missing or degenerate start
/// vector is replaced by a seeded random one.
pub fn lowest_eigenpair<T: Real>(
    apply: impl Fn(&[Complex<T>], &mut [Complex<T>]),
    dim: usize,
    start: Option<&[Complex<T>]>,
    deflate: &[&[Complex<T>]],
    config: &LanczosConfig<T>,
) -> Result<Eigenpair<T>> {
    let free = dim.saturating_sub(deflate.len());
    if free == 0 {
        return Err(Error::InvalidModel("nothing left after deflation".into()));
    }
    let tiny = T::eps() * lit(1e2);
    // a fresh seed per deflation level; reusing the ground-state start would
    // leave no weight on a degenerate partner
    let seed = config.seed.wrapping_add(deflate.len() as u64);
    let mut x = start.map_or_else(|| random_vector(dim, seed), <[_]>::to_vec);
    project_out(&mut x, deflate);
    if norm(&x) < lit(1e-3) {
        x = random_vector(dim, seed);
        project_out(&mut x, deflate);
    }
    let m_max = config.krylov_dim.min(free).max(1);
    let mut best = T::max_value().unwrap_or_else(|| lit(f64::MAX));
    let mut w = vec![czero(); dim];
    for _restart in 0..=config.max_restarts {
        let nx = norm(&x);
        x.iter_mut().for_each(|z| *z = z.unscale(nx));

        let mut basis: Vec<Vec<Complex<T>>> = vec![x.clone()];
        let mut alphas: Vec<T> = Vec::new();
        let mut betas: Vec<T> = Vec::new();
        loop {
            let j = basis.len() - 1;
            apply(&basis[j], &mut w);
            let alpha = dot(&basis[j], &w).re;
            alphas.push(alpha);
            if basis.len() == m_max {
                break;
            }
            {
                let refs: Vec<&[Complex<T>]> = deflate
                    .iter()
                    .copied()
                    .chain(basis.iter().map(Vec::as_slice))
                    .collect();
                project_out(&mut w, &refs);
            }
            let beta = norm(&w);
            if beta <= tiny * (alpha.abs() + T::one()) {
                break;
            }
            betas.push(beta);
            basis.push(w.iter().map(|z| z.unscale(beta)).collect());
        }

        let m = alphas.len();
        let tri = DMatrix::from_fn(m, m, |r, c| {
            if r == c {
                alphas[r]
            } else if r == c + 1 {
                betas[c]
            } else if c == r + 1 {
                betas[r]
            } else {
                T::zero()
            }
        });
        let eig = tri.symmetric_eigen();
        let (k, theta) = eig.eigenvalues.iter().copied().enumerate().fold(
            (0, eig.eigenvalues[0]),
            |acc, (i, v)| {
                if v < acc.1 {
                    (i, v)
                } else {
                    acc
                }
            },
        );
        let mut ritz = vec![czero(); dim];
        for (r, v) in basis.iter().enumerate() {
            let y = eig.eigenvectors[(r, k)];
            axpy(Complex::new(y, T::zero()), v, &mut ritz);
        }
        project_out(&mut ritz, deflate);
        let nr = norm(&ritz);
        ritz.iter_mut().for_each(|z| *z = z.unscale(nr));

        apply(&ritz, &mut w);
        axpy(Complex::new(-theta, T::zero()), &ritz, &mut w);
        project_out(&mut w, deflate);
        let residual = norm(&w);
        if residual <= config.tolerance || m < m_max {
            return Ok(Eigenpair {
                value: theta,
                vector: ritz,
                residual,
            });
        }
        best = best.min(residual);
        x = ritz;
    }
    Err(Error::NoConvergence {
        iterations: config.max_restarts,
        residual: to_f64(best),
    })
}
