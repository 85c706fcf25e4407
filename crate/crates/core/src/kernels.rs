//! Dense real-matrix primitives: matrix exponential, eigenvalues, the
//! continuous Lyapunov equation and definiteness checks.
//!
//! Everything here is sized for desk-scale systems (tens of states at most).

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

// Degree-13 Padé coefficients and the backward-error thresholds for the
// lower-degree approximants (Higham, 2005).
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const THETA3: f64 = 1.495585217958292e-2;
const THETA5: f64 = 2.53939833006323e-1;
const THETA7: f64 = 9.504178996162932e-1;
const THETA9: f64 = 2.097847961257068e0;
const THETA13: f64 = 5.371920351148152e0;

pub(crate) fn ensure_square(m: &Matrix) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub(crate) fn ensure_finite(m: &Matrix, what: &'static str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { what })
    }
}

fn one_norm(m: &Matrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Computes `e^{F·dt}` by scaling and squaring with a diagonal Padé
/// approximant. The degree is chosen from the 1-norm of `F·dt`; only the
/// degree-13 path scales.
pub fn mat_exp(f: &Matrix, dt: f64) -> Result<Matrix> {
    let n = ensure_square(f)?;
    ensure_finite(f, "matrix")?;
    if !dt.is_finite() {
        return Err(Error::NonFinite { what: "time step" });
    }
    if dt == 0.0 {
        return Ok(Matrix::identity(n, n));
    }

    let a = f * dt;
    let norm = one_norm(&a);
    let ident = Matrix::identity(n, n);

    for (theta, coeffs) in [
        (THETA3, &PADE3[..]),
        (THETA5, &PADE5[..]),
        (THETA7, &PADE7[..]),
        (THETA9, &PADE9[..]),
    ] {
        if norm <= theta {
            return pade_low(&a, coeffs, &ident);
        }
    }

    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scaled = &a / 2f64.powi(s);
    let mut r = pade13(&scaled, &ident)?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

fn pade_low(a: &Matrix, b: &[f64], ident: &Matrix) -> Result<Matrix> {
    let a2 = a * a;
    // Even powers A^0, A^2, A^4, ...
    let mut pow = ident.clone();
    let mut u_inner = Matrix::zeros(a.nrows(), a.ncols());
    let mut v = Matrix::zeros(a.nrows(), a.ncols());
    for j in 0..b.len() / 2 {
        if j > 0 {
            pow = &pow * &a2;
        }
        v += &pow * b[2 * j];
        u_inner += &pow * b[2 * j + 1];
    }
    let u = a * u_inner;
    solve_pade(&u, &v)
}

fn pade13(a: &Matrix, ident: &Matrix) -> Result<Matrix> {
    let b = &PADE13;
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_high = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9]);
    let u = a * (u_high + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + ident * b[1]);
    let v_high = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8]);
    let v = v_high + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + ident * b[0];
    solve_pade(&u, &v)
}

fn solve_pade(u: &Matrix, v: &Matrix) -> Result<Matrix> {
    let p = v + u;
    let q = v - u;
    q.lu().solve(&p).ok_or(Error::Singular)
}

/// Eigenvalues of a square real matrix, in no particular order.
pub fn eigenvalues(f: &Matrix) -> Result<Vec<Complex<f64>>> {
    ensure_square(f)?;
    ensure_finite(f, "matrix")?;
    Ok(f.complex_eigenvalues().iter().copied().collect())
}

/// Largest real part over the spectrum of `f`.
pub fn spectral_abscissa(f: &Matrix) -> Result<f64> {
    Ok(eigenvalues(f)?
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

pub fn is_hurwitz(f: &Matrix) -> Result<bool> {
    Ok(spectral_abscissa(f)? < 0.0)
}

/// Solves `Fᵀ P + P F = −Q` for symmetric `P`.
///
/// The equation is vectorized into `(I ⊗ Fᵀ + Fᵀ ⊗ I) vec(P) = −vec(Q)` and
/// solved densely, which is fine for n up to a few dozen.
pub fn solve_lyapunov(f: &Matrix, q: &Matrix) -> Result<Matrix> {
    let n = ensure_square(f)?;
    ensure_finite(f, "matrix")?;
    if q.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            what: "Lyapunov right-hand side",
            expected: format!("{n}x{n}"),
            found: format!("{}x{}", q.nrows(), q.ncols()),
        });
    }
    ensure_finite(q, "Lyapunov right-hand side")?;
    check_symmetric(q)?;
    let abscissa = spectral_abscissa(f)?;
    if abscissa >= 0.0 {
        return Err(Error::NotHurwitz { max_real: abscissa });
    }

    // vec is column-major: entry (i, j) of P sits at j*n + i.
    let ft = f.transpose();
    let ident = Matrix::identity(n, n);
    let op = ident.kronecker(&ft) + ft.kronecker(&ident);
    let rhs = Vector::from_iterator(n * n, q.iter().map(|v| -v));
    let vec_p = op.lu().solve(&rhs).ok_or(Error::Singular)?;
    let p = Matrix::from_column_slice(n, n, vec_p.as_slice());
    Ok((&p + p.transpose()) * 0.5)
}

fn asymmetry(p: &Matrix) -> f64 {
    let scale = p.amax().max(f64::MIN_POSITIVE);
    (p - p.transpose()).amax() / scale
}

fn check_symmetric(p: &Matrix) -> Result<()> {
    let a = asymmetry(p);
    if a > 1e-9 {
        Err(Error::Asymmetric { asymmetry: a })
    } else {
        Ok(())
    }
}

/// Smallest eigenvalue of the symmetric part of `p`.
pub fn min_symmetric_eigenvalue(p: &Matrix) -> Result<f64> {
    ensure_square(p)?;
    ensure_finite(p, "matrix")?;
    let sym = (p + p.transpose()) * 0.5;
    Ok(sym.symmetric_eigenvalues().min())
}

/// Largest eigenvalue of the symmetric part of `p`.
pub fn max_symmetric_eigenvalue(p: &Matrix) -> Result<f64> {
    ensure_square(p)?;
    ensure_finite(p, "matrix")?;
    let sym = (p + p.transpose()) * 0.5;
    Ok(sym.symmetric_eigenvalues().max())
}

/// `true` iff the smallest eigenvalue of `p` exceeds `margin`. The
/// symmetric part is used, so data rounded entry-wise is accepted as long
/// as it is symmetric to 1e-9 relative.
pub fn is_positive_definite(p: &Matrix, margin: f64) -> Result<bool> {
    ensure_square(p)?;
    check_symmetric(p)?;
    Ok(min_symmetric_eigenvalue(p)? > margin)
}
