//! Small dense complex linear algebra: spin operators, norms, and the two
//! matrix exponentials used by the propagator.

use nalgebra::{Complex, ComplexField, DMatrix};

use crate::{CMatrix, Real};

pub fn c<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

/// `exp(iθ)`.
pub fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

pub fn modulus<T: Real>(z: Complex<T>) -> T {
    ComplexField::modulus(z)
}

pub fn identity<T: Real>(dim: usize) -> CMatrix<T> {
    DMatrix::identity(dim, dim)
}

/// Spin-½ operators `S = σ/2`.
pub fn spin_x<T: Real>() -> CMatrix<T> {
    DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.0, 0.0)])
}

pub fn spin_y<T: Real>() -> CMatrix<T> {
    DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -0.5), c(0.0, 0.5), c(0.0, 0.0)])
}

pub fn spin_z<T: Real>() -> CMatrix<T> {
    DMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)])
}

pub fn kron<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a.kronecker(b)
}

pub fn max_abs<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(modulus(*z)))
}

/// Max-norm of `m - m†`.
pub fn hermiticity_defect<T: Real>(m: &CMatrix<T>) -> T {
    max_abs(&(m - m.adjoint()))
}

/// Max-norm of `u†u - I`.
pub fn unitarity_defect<T: Real>(u: &CMatrix<T>) -> T {
    let n = u.nrows();
    max_abs(&(u.adjoint() * u - identity::<T>(n)))
}

pub fn is_finite<T: Real>(m: &CMatrix<T>) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn is_diagonal<T: Real>(m: &CMatrix<T>) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)] == Complex::new(T::zero(), T::zero())))
}

/// Induced 1-norm (max column sum).
pub fn one_norm<T: Real>(m: &CMatrix<T>) -> T {
    m.column_iter()
        .map(|col| col.iter().fold(T::zero(), |acc, z| acc + modulus(*z)))
        .fold(T::zero(), |a, b| a.max(b))
}

/// `exp(-i·h·dt)` for Hermitian `h`, by diagonalisation.
pub fn expm_hermitian<T: Real>(h: &CMatrix<T>, dt: T) -> CMatrix<T> {
    let eig = h.clone().symmetric_eigen();
    let w = &eig.eigenvectors;
    let n = h.nrows();
    let mut scaled = w.clone();
    for (j, lambda) in eig.eigenvalues.iter().enumerate() {
        let phase = cis(-*lambda * dt);
        for i in 0..n {
            scaled[(i, j)] *= phase;
        }
    }
    scaled * w.adjoint()
}

// Padé coefficients and scaling thresholds from Higham (2005).
const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
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
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.53939833006323e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA13: f64 = 5.371920351148152;

fn scale<T: Real>(m: &CMatrix<T>, s: f64) -> CMatrix<T> {
    m * Complex::new(T::lit(s), T::zero())
}

fn pade_low<T: Real>(a: &CMatrix<T>, coeffs: &[f64]) -> (CMatrix<T>, CMatrix<T>) {
    let n = a.nrows();
    let a2 = a * a;
    let mut power = identity::<T>(n);
    let mut odd = DMatrix::zeros(n, n);
    let mut even = DMatrix::zeros(n, n);
    for k in 0..coeffs.len() / 2 {
        even += scale(&power, coeffs[2 * k]);
        odd += scale(&power, coeffs[2 * k + 1]);
        power = &power * &a2;
    }
    (a * odd, even)
}

fn pade13<T: Real>(a: &CMatrix<T>) -> (CMatrix<T>, CMatrix<T>) {
    let b = PADE13;
    let n = a.nrows();
    let id = identity::<T>(n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = scale(&a6, b[13]) + scale(&a4, b[11]) + scale(&a2, b[9]);
    let u = a * (&a6 * inner_u + scale(&a6, b[7]) + scale(&a4, b[5]) + scale(&a2, b[3]) + scale(&id, b[1]));
    let inner_v = scale(&a6, b[12]) + scale(&a4, b[10]) + scale(&a2, b[8]);
    let v = &a6 * inner_v + scale(&a6, b[6]) + scale(&a4, b[4]) + scale(&a2, b[2]) + scale(&id, b[0]);
    (u, v)
}

/// General matrix exponential by scaling and squaring with a Padé core.
pub fn expm<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    let norm = one_norm(a).to_f64_lossy();
    let (u, v, squarings) = match THETA.iter().find(|(_, theta)| norm <= *theta) {
        Some(&(degree, _)) => {
            let coeffs: &[f64] = match degree {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            let (u, v) = pade_low(a, coeffs);
            (u, v, 0)
        }
        None => {
            let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
            let scaled = scale(a, 0.5f64.powi(s));
            let (u, v) = pade13(&scaled);
            (u, v, s)
        }
    };
    let numerator = &v + &u;
    let denominator = v - u;
    let mut r = denominator
        .lu()
        .solve(&numerator)
        .expect("Padé denominator is nonsingular for scaled arguments");
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}
