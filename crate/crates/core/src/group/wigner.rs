//! Wigner-D matrices for SO(3): complex form from ZYZ Euler angles and the
//! real form acting on real spherical harmonics.
//!
//! Conventions: `R = Rz(α) Ry(β) Rz(γ)`, `D_{m'm} = e^{-im'α} d_{m'm}(β) e^{-imγ}`
//! with Condon–Shortley phases. Rows and columns are indexed by `m + ℓ`.
//! The real matrix `Δ(R)` satisfies `s(R n) = Δ(R) s(n)` for the real
//! spherical harmonics `s` of degree `ℓ`.

use nalgebra::{DMatrix, UnitQuaternion};
use num_complex::Complex64;

/// ZYZ Euler angles `(α, β, γ)` of a unit quaternion, with `β ∈ [0, π]`.
///
/// Uses half-angle atan2 forms so it stays accurate at `β ≈ 0` and `β ≈ π`.
pub fn zyz_angles(q: &UnitQuaternion<f64>) -> (f64, f64, f64) {
    let (w, x, y, z) = (q.w, q.i, q.j, q.k);
    let beta = 2.0 * (x * x + y * y).sqrt().atan2((w * w + z * z).sqrt());
    let sum = 2.0 * z.atan2(w);
    let diff = 2.0 * (-x).atan2(y);
    (0.5 * (sum + diff), beta, 0.5 * (sum - diff))
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Jacobi polynomial `P_n^{(a,b)}(x)` by the three-term recurrence.
fn jacobi(n: usize, a: f64, b: f64, x: f64) -> f64 {
    let mut p0 = 1.0;
    if n == 0 {
        return p0;
    }
    let mut p1 = (a + 1.0) + 0.5 * (a + b + 2.0) * (x - 1.0);
    for k in 2..=n {
        let k = k as f64;
        let s = 2.0 * k + a + b;
        let c1 = 2.0 * k * (k + a + b) * (s - 2.0);
        let c2 = (s - 1.0) * (s * (s - 2.0) * x + a * a - b * b);
        let c3 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * s;
        let p2 = (c2 * p1 - c3 * p0) / c1;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Per-entry constants of `d^ℓ(β)` so repeated evaluations only pay for the
/// Jacobi recurrence.
#[derive(Clone, Debug)]
pub struct SmallDPlan {
    l: usize,
    /// `(sign · norm, a, b, k)` per entry, row-major.
    entries: Vec<(f64, i32, i32, usize)>,
}

impl SmallDPlan {
    pub fn new(l: usize) -> Self {
        let li = l as i64;
        let n = 2 * l + 1;
        let mut entries = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                let mp = r as i64 - li;
                let m = c as i64 - li;
                let cands = [li + m, li - m, li + mp, li - mp];
                let k = *cands.iter().min().unwrap();
                let (a, lam) =
                    if k != li + m && (k == li - m || k == li + mp) { (m - mp, 0) } else { (mp - m, mp - m) };
                let b = 2 * li - 2 * k - a;
                let (k, a, b) = (k as usize, a as usize, b as usize);
                let norm = (binomial(2 * l - k, k + a) / binomial(k + b, b)).sqrt();
                let sign = if lam.rem_euclid(2) == 1 { -1.0 } else { 1.0 };
                entries.push((sign * norm, a as i32, b as i32, k));
            }
        }
        SmallDPlan { l, entries }
    }

    pub fn order(&self) -> usize {
        self.l
    }

    /// Writes `d^ℓ(β)` row-major into `out`.
    pub fn eval_into(&self, beta: f64, out: &mut [f64]) {
        let (sh, ch) = (0.5 * beta).sin_cos();
        let cb = beta.cos();
        for (o, &(c, a, b, k)) in out.iter_mut().zip(&self.entries) {
            *o = c * sh.powi(a) * ch.powi(b) * jacobi(k, a as f64, b as f64, cb);
        }
    }

    pub fn eval(&self, beta: f64) -> DMatrix<f64> {
        let n = 2 * self.l + 1;
        let mut buf = vec![0.0; n * n];
        self.eval_into(beta, &mut buf);
        DMatrix::from_row_slice(n, n, &buf)
    }
}

/// Wigner small-d matrix `d^ℓ(β)`, entry `(m'+ℓ, m+ℓ)`.
pub fn small_d(l: usize, beta: f64) -> DMatrix<f64> {
    SmallDPlan::new(l).eval(beta)
}

/// Complex Wigner-D matrix from ZYZ Euler angles.
pub fn complex_d(l: usize, alpha: f64, beta: f64, gamma: f64) -> DMatrix<Complex64> {
    let d = small_d(l, beta);
    let li = l as i64;
    let phase = |m: i64, ang: f64| Complex64::from_polar(1.0, -(m as f64) * ang);
    DMatrix::from_fn(2 * l + 1, 2 * l + 1, |r, c| {
        let mp = r as i64 - li;
        let m = c as i64 - li;
        phase(mp, alpha) * d[(r, c)] * phase(m, gamma)
    })
}

/// Unitary change of basis `C` with real harmonics `s = C Y`.
pub fn real_basis(l: usize) -> DMatrix<Complex64> {
    let n = 2 * l + 1;
    let li = l as i64;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut c = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for m in -li..=li {
        let row = (m + li) as usize;
        let parity = if m.rem_euclid(2) == 1 { -1.0 } else { 1.0 };
        let pos = (m + li) as usize;
        let neg = (-m + li) as usize;
        if m < 0 {
            c[(row, pos)] = Complex64::new(0.0, h);
            c[(row, neg)] = Complex64::new(0.0, -parity * h);
        } else if m == 0 {
            c[(row, pos)] = Complex64::new(1.0, 0.0);
        } else {
            c[(row, neg)] = Complex64::new(h, 0.0);
            c[(row, pos)] = Complex64::new(parity * h, 0.0);
        }
    }
    c
}

/// Real Wigner-D matrix `Δ^ℓ(R) = C conj(D(R)) C^†`.
pub fn real_d(l: usize, q: &UnitQuaternion<f64>) -> DMatrix<f64> {
    let (a, b, g) = zyz_angles(q);
    real_d_euler(l, a, b, g)
}

pub fn real_d_euler(l: usize, alpha: f64, beta: f64, gamma: f64) -> DMatrix<f64> {
    let d = complex_d(l, alpha, beta, gamma);
    let c = real_basis(l);
    let prod = &c * d.map(|z| z.conj()) * c.adjoint();
    prod.map(|z| z.re)
}

/// Coefficients `c = C^† M C` such that `Tr[Δ(R)ᵀ M] = Re Σ D_{pq}(R) c_{pq}`.
///
/// Used to evaluate band-limited functions on Euler-angle grids without
/// forming real matrices at every point.
pub fn trace_coefficients(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    let l = (m.nrows() - 1) / 2;
    let c = real_basis(l);
    let mc = m.map(|x| Complex64::new(x, 0.0));
    c.adjoint() * mc * c
}
