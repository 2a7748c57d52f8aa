//! Dense Hermitian eigensolver.
//!
//! Householder reduction to a real symmetric tridiagonal matrix (the
//! reflectors are chosen so the off-diagonal comes out real), then implicit
//! QL with Wilkinson-type shifts on the tridiagonal, accumulating rotations
//! into the tridiagonal eigenvectors. Eigenvectors of the original matrix are
//! back-transformed on request only, which keeps the common case (full
//! spectrum, a handful of modes) cheap.
//!
//! Everything runs in a fixed order on one thread, so results are
//! bit-reproducible.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::CMatrix;

const MAX_QL_SWEEPS: usize = 60;

/// Scalars the reduction runs on. Real symmetric input takes the `f64`
/// path, which is four times cheaper.
pub(crate) trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Mul<f64, Output = Self>
    + AddAssign
    + SubAssign
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_parts(re: f64, im: f64) -> Self;
    fn conj(self) -> Self;
    fn re(self) -> f64;
    fn im(self) -> f64;
    fn norm_sqr(self) -> f64;
    fn recip(self) -> Self;
    fn to_complex(self) -> Complex64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_parts(re: f64, _im: f64) -> Self {
        re
    }
    fn conj(self) -> Self {
        self
    }
    fn re(self) -> f64 {
        self
    }
    fn im(self) -> f64 {
        0.0
    }
    fn norm_sqr(self) -> f64 {
        self * self
    }
    fn recip(self) -> Self {
        1.0 / self
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_parts(re: f64, im: f64) -> Self {
        Complex64::new(re, im)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn im(self) -> f64 {
        self.im
    }
    fn norm_sqr(self) -> f64 {
        Complex64::norm_sqr(&self)
    }
    fn recip(self) -> Self {
        Complex64::inv(&self)
    }
    fn to_complex(self) -> Complex64 {
        self
    }
}

/// Reflector `H = I − τ v vᴴ` (with `v[0] = 1`) mapping `x` to `β e₁`, `β` real.
struct Reflector<S> {
    tau: S,
    // v[1..]; v[0] = 1 is implicit
    tail: Vec<S>,
}

/// Tridiagonal form `A = Q T Qᴴ`.
pub(crate) struct Tridiagonal<S> {
    pub diag: Vec<f64>,
    /// `off[i]` couples `i` and `i + 1`; the last entry is zero.
    pub off: Vec<f64>,
    reflectors: Vec<Reflector<S>>,
}

fn make_reflector<S: Scalar>(x: &[S]) -> (Reflector<S>, f64) {
    let alpha = x[0];
    let xnorm_sqr: f64 = x[1..].iter().map(|v| v.norm_sqr()).sum();
    if xnorm_sqr == 0.0 && alpha.im() == 0.0 {
        return (Reflector { tau: S::zero(), tail: vec![S::zero(); x.len() - 1] }, alpha.re());
    }
    let norm = (alpha.norm_sqr() + xnorm_sqr).sqrt();
    let beta = if alpha.re() >= 0.0 { -norm } else { norm };
    let tau = S::from_parts((beta - alpha.re()) / beta, -alpha.im() / beta);
    let scale = (alpha - S::from_parts(beta, 0.0)).recip();
    let tail = x[1..].iter().map(|&v| v * scale).collect();
    (Reflector { tau, tail }, beta)
}

/// Reduces the Hermitian matrix stored row-major in `a` (destroyed).
pub(crate) fn tridiagonalize<S: Scalar>(mut a: Vec<S>, n: usize) -> Tridiagonal<S> {
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n];
    let mut reflectors = Vec::with_capacity(n.saturating_sub(1));
    let mut v = Vec::with_capacity(n);
    let mut w = vec![S::zero(); n];

    for k in 0..n.saturating_sub(1) {
        diag[k] = a[k * n + k].re();
        let m = n - k - 1;
        // column k below the diagonal = conjugate of row k right of it
        let x: Vec<S> = a[k * n + k + 1..(k + 1) * n].iter().map(|z| z.conj()).collect();
        let (reflector, beta) = make_reflector(&x);
        off[k] = beta;

        let tau = reflector.tau;
        if tau.norm_sqr() != 0.0 {
            v.clear();
            v.push(S::one());
            v.extend_from_slice(&reflector.tail);
            let base = k + 1;

            // p = τ B v
            for r in 0..m {
                let row = &a[(base + r) * n + base..(base + r) * n + n];
                let mut acc = S::zero();
                for (b, &vc) in row.iter().zip(&v) {
                    acc += *b * vc;
                }
                w[r] = tau * acc;
            }
            // w = p − ½ τ̄ (vᴴ p) v   (the coefficient is real)
            let mut vhp = S::zero();
            for r in 0..m {
                vhp += v[r].conj() * w[r];
            }
            let alpha = -0.5 * (tau.conj() * vhp).re();
            for r in 0..m {
                w[r] += v[r] * alpha;
            }
            // B -= v wᴴ + w vᴴ
            for r in 0..m {
                let (vr, wr) = (v[r], w[r]);
                let row = &mut a[(base + r) * n + base..(base + r) * n + n];
                for ((b, &vc), &wc) in row.iter_mut().zip(&v).zip(&w[..m]) {
                    *b -= vr * wc.conj() + wr * vc.conj();
                }
            }
        }
        reflectors.push(reflector);
    }
    if n > 0 {
        diag[n - 1] = a[(n - 1) * n + n - 1].re();
    }
    Tridiagonal { diag, off, reflectors }
}

impl<S: Scalar> Tridiagonal<S> {
    /// Maps a tridiagonal eigenvector `z` to an eigenvector `Q z` of the original matrix.
    pub fn back_transform(&self, z: &[f64]) -> Vec<Complex64> {
        let mut u: Vec<S> = z.iter().map(|&v| S::from_parts(v, 0.0)).collect();
        for (k, refl) in self.reflectors.iter().enumerate().rev() {
            if refl.tau.norm_sqr() == 0.0 {
                continue;
            }
            let seg = &mut u[k + 1..];
            // s = vᴴ u
            let mut s = seg[0];
            for (&vi, &ui) in refl.tail.iter().zip(&seg[1..]) {
                s += vi.conj() * ui;
            }
            let coeff = refl.tau * s;
            seg[0] -= coeff;
            for (vi, ui) in refl.tail.iter().zip(seg[1..].iter_mut()) {
                *ui -= *vi * coeff;
            }
        }
        u.into_iter().map(Scalar::to_complex).collect()
    }
}

/// Implicit QL on a symmetric tridiagonal matrix. On return `diag` holds the
/// eigenvalues (unordered) and row `j` of `vectors` the eigenvector of `diag[j]`.
pub(crate) fn tridiagonal_ql(diag: &mut [f64], off: &mut [f64], mut vectors: Option<&mut [f64]>) -> Result<()> {
    let n = diag.len();
    debug_assert_eq!(off.len(), n);
    if n == 0 {
        return Ok(());
    }
    off[n - 1] = 0.0;
    let eps = f64::EPSILON;
    let mut shift_total = 0.0;
    let mut tst1 = 0.0f64;

    for l in 0..n {
        tst1 = tst1.max(diag[l].abs() + off[l].abs());
        let mut m = l;
        while m < n - 1 && off[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_QL_SWEEPS {
                    return Err(Error::Integrity(format!("QL iteration did not converge at index {l}")));
                }
                // Wilkinson-type shift from the leading 2×2 block
                let g = diag[l];
                let mut p = (diag[l + 1] - g) / (2.0 * off[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                diag[l] = off[l] / (p + r);
                diag[l + 1] = off[l] * (p + r);
                let dl1 = diag[l + 1];
                let h = g - diag[l];
                for d in diag.iter_mut().skip(l + 2) {
                    *d -= h;
                }
                shift_total += h;

                p = diag[m];
                let (mut c, mut c2, mut c3) = (1.0, 1.0, 1.0);
                let el1 = off[l + 1];
                let (mut s, mut s2) = (0.0, 0.0);
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * off[i];
                    let h = c * p;
                    r = p.hypot(off[i]);
                    off[i + 1] = s * r;
                    s = off[i] / r;
                    c = p / r;
                    p = c * diag[i] - s * g;
                    diag[i + 1] = h + s * (c * g + s * diag[i]);

                    if let Some(vectors) = vectors.as_deref_mut() {
                        let (lo, hi) = vectors.split_at_mut((i + 1) * n);
                        let row_i = &mut lo[i * n..];
                        let row_next = &mut hi[..n];
                        for (zi, zn) in row_i.iter_mut().zip(row_next.iter_mut()) {
                            let t = *zn;
                            *zn = s * *zi + c * t;
                            *zi = c * *zi - s * t;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * off[l] / dl1;
                off[l] = s * p;
                diag[l] = c * p;
                if off[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        diag[l] += shift_total;
        off[l] = 0.0;
    }
    Ok(())
}

/// Full spectrum plus the tridiagonal eigenvectors, ready for selective back-transformation.
pub(crate) struct Decomposition {
    /// Eigenvalues in algebraic descending order.
    pub values: Vec<f64>,
    tri_vectors: Vec<f64>,
    order: Vec<usize>,
    reduction: Reduction,
}

enum Reduction {
    Real(Tridiagonal<f64>),
    Complex(Tridiagonal<Complex64>),
}

impl Decomposition {
    /// Unit eigenvector of `values[idx]`, phase-fixed so its largest component is real positive.
    pub fn vector(&self, idx: usize) -> Vec<Complex64> {
        let n = self.values.len();
        let src = self.order[idx];
        let z = &self.tri_vectors[src * n..(src + 1) * n];
        let mut u = match &self.reduction {
            Reduction::Real(t) => t.back_transform(z),
            Reduction::Complex(t) => t.back_transform(z),
        };
        fix_phase(&mut u);
        u
    }
}

fn fix_phase(u: &mut [Complex64]) {
    let Some(pivot) = u
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, z)| match best {
            Some((_, m)) if z.norm() <= m => best,
            _ => Some((i, z.norm())),
        })
    else {
        return;
    };
    let z = u[pivot.0];
    if z.norm() == 0.0 {
        return;
    }
    let phase = z.conj() / z.norm();
    for v in u.iter_mut() {
        *v *= phase;
    }
    u[pivot.0] = Complex64::new(u[pivot.0].norm(), 0.0);
}

fn reduce(a: &CMatrix) -> (Vec<f64>, Vec<f64>, Reduction) {
    let n = a.dim();
    if a.is_real() {
        let t = tridiagonalize(a.as_slice().iter().map(|z| z.re).collect(), n);
        (t.diag.clone(), t.off.clone(), Reduction::Real(t))
    } else {
        let t = tridiagonalize(a.as_slice().to_vec(), n);
        (t.diag.clone(), t.off.clone(), Reduction::Complex(t))
    }
}

fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    order
}

pub(crate) fn decompose(a: &CMatrix) -> Result<Decomposition> {
    let n = a.dim();
    let (mut diag, mut off, reduction) = reduce(a);
    let mut tri_vectors = vec![0.0; n * n];
    for i in 0..n {
        tri_vectors[i * n + i] = 1.0;
    }
    tridiagonal_ql(&mut diag, &mut off, Some(&mut tri_vectors))?;
    let order = descending_order(&diag);
    let values = order.iter().map(|&i| diag[i]).collect();
    Ok(Decomposition { values, tri_vectors, order, reduction })
}

/// Eigenvalues only, algebraic descending.
pub(crate) fn eigenvalues(a: &CMatrix) -> Result<Vec<f64>> {
    let (mut diag, mut off, _) = reduce(a);
    tridiagonal_ql(&mut diag, &mut off, None)?;
    Ok(descending_order(&diag).into_iter().map(|i| diag[i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matvec(a: &CMatrix, x: &[Complex64]) -> Vec<Complex64> {
        (0..a.dim())
            .map(|i| a.row(i).iter().zip(x).map(|(p, q)| p * q).sum())
            .collect()
    }

    fn check_decomposition(a: &CMatrix) {
        let d = decompose(a).unwrap();
        assert_eq!(eigenvalues(a).unwrap(), d.values);
        let n = a.dim();
        let scale = a.max_abs().max(1e-300);
        let trace: f64 = d.values.iter().sum();
        assert!((trace - a.trace().re).abs() < 1e-12 * n as f64 * scale);
        for idx in 0..n {
            let u = d.vector(idx);
            let au = matvec(a, &u);
            let resid = au
                .iter()
                .zip(&u)
                .map(|(p, q)| (p - q * d.values[idx]).norm())
                .fold(0.0, f64::max);
            assert!(resid < 1e-12 * n as f64 * scale, "residual {resid}");
            let norm: f64 = u.iter().map(|z| z.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
        for w in d.values.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn small_real_symmetric() {
        let a = CMatrix::from_fn(3, |i, j| {
            let m = [[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 2.0]];
            Complex64::new(m[i][j], 0.0)
        });
        let d = decompose(&a).unwrap();
        let s = 2f64.sqrt();
        let expected = [2.0 + s, 2.0, 2.0 - s];
        for (v, e) in d.values.iter().zip(expected) {
            assert!((v - e).abs() < 1e-14);
        }
        check_decomposition(&a);
    }

    #[test]
    fn complex_hermitian_pauli_like() {
        // [[1, -i], [i, 1]] has eigenvalues 2 and 0
        let a = CMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 1) => Complex64::new(0.0, -1.0),
            (1, 0) => Complex64::new(0.0, 1.0),
            _ => Complex64::new(1.0, 0.0),
        });
        let d = decompose(&a).unwrap();
        assert!((d.values[0] - 2.0).abs() < 1e-15 && d.values[1].abs() < 1e-15);
        check_decomposition(&a);
    }

    #[test]
    fn random_hermitian_matrices() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for &n in &[1usize, 2, 5, 17, 40] {
            let mut a = CMatrix::zeros(n);
            for i in 0..n {
                a[(i, i)] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
                for j in i + 1..n {
                    let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    a[(i, j)] = z;
                    a[(j, i)] = z.conj();
                }
            }
            check_decomposition(&a);
        }
    }

    #[test]
    fn degenerate_and_zero() {
        let z = CMatrix::zeros(4);
        let d = decompose(&z).unwrap();
        assert!(d.values.iter().all(|&v| v == 0.0));
        let id = CMatrix::from_fn(5, |i, j| Complex64::new(if i == j { 3.0 } else { 0.0 }, 0.0));
        check_decomposition(&id);
    }

    #[test]
    fn phase_is_fixed() {
        let a = CMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 1) => Complex64::new(0.3, 0.4),
            (1, 0) => Complex64::new(0.3, -0.4),
            (0, 0) => Complex64::new(1.0, 0.0),
            _ => Complex64::new(-1.0, 0.0),
        });
        let d = decompose(&a).unwrap();
        for idx in 0..2 {
            let u = d.vector(idx);
            let big = u.iter().max_by(|p, q| p.norm().total_cmp(&q.norm())).unwrap();
            assert!(big.im == 0.0 && big.re > 0.0);
        }
    }
}
