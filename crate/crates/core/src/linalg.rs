//! Dense complex linear algebra at working precision: Hermitian Cholesky,
//! triangular inversion, quadratic forms and Hessenberg QR eigenvalues.

use rug::Float;

use crate::mp::{fma_conj_into, fma_into, Complex, Precision, Real};

pub type CMatrix = Vec<Vec<Complex>>;

pub fn zeros(n: usize, m: usize, prec: Precision) -> CMatrix {
    vec![vec![prec.czero(); m]; n]
}

/// Lower-triangular `L` with `M = L L*` and positive real diagonal.
/// Fails with the index of the first non-positive pivot.
pub fn cholesky(m: &[Vec<Complex>], prec: Precision) -> Result<CMatrix, usize> {
    let n = m.len();
    let mut l = zeros(n, n, prec);
    for j in 0..n {
        let mut d = m[j][j].re.clone();
        for k in 0..j {
            d -= l[j][k].norm_sqr();
        }
        if !(d > 0) {
            return Err(j);
        }
        let djj = d.sqrt();
        let inv = Float::with_val(prec.bits(), djj.recip_ref());
        l[j][j] = Complex::from_real(djj);
        for i in j + 1..n {
            let mut acc = m[i][j].clone();
            let mut s = prec.czero();
            for k in 0..j {
                fma_conj_into(&mut s, &l[i][k], &l[j][k]);
            }
            acc -= &s;
            l[i][j] = acc.mul_real(&inv);
        }
    }
    Ok(l)
}

/// Inverse of a lower-triangular matrix with nonzero diagonal.
pub fn lower_inverse(l: &[Vec<Complex>], prec: Precision) -> CMatrix {
    let n = l.len();
    let mut c = zeros(n, n, prec);
    for i in 0..n {
        let inv_ii = l[i][i].recip();
        c[i][i] = inv_ii.clone();
        for j in (0..i).rev() {
            // row i of C: sum_{k=j..i} l[i][k] c[k][j] = 0 for j < i
            let mut s = prec.czero();
            for k in j..i {
                fma_into(&mut s, &l[i][k], &c[k][j]);
            }
            c[i][j] = -(&s * &inv_ii);
        }
    }
    c
}

/// `v M v*`, i.e. `sum_{i,l} v_i conj(v_l) M[i][l]` (real for Hermitian `M`).
pub fn quad_form(m: &[Vec<Complex>], v: &[Complex], prec: Precision) -> Real {
    let mut total = prec.czero();
    for (i, vi) in v.iter().enumerate() {
        if vi.is_zero() {
            continue;
        }
        let mut row = prec.czero();
        for (l, vl) in v.iter().enumerate() {
            if vl.is_zero() {
                continue;
            }
            fma_conj_into(&mut row, &m[i][l], vl);
        }
        fma_into(&mut total, vi, &row);
    }
    total.re
}

/// `u M v*`.
pub fn bilinear(m: &[Vec<Complex>], u: &[Complex], v: &[Complex], prec: Precision) -> Complex {
    let mut total = prec.czero();
    for (i, ui) in u.iter().enumerate() {
        if ui.is_zero() {
            continue;
        }
        let mut row = prec.czero();
        for (l, vl) in v.iter().enumerate() {
            if vl.is_zero() {
                continue;
            }
            fma_conj_into(&mut row, &m[i][l], vl);
        }
        fma_into(&mut total, ui, &row);
    }
    total
}

/// `max |(A M A*)_{ij} - delta_ij|` for a row-coefficient matrix `A`.
pub fn gram_residual(a: &[Vec<Complex>], m: &[Vec<Complex>], prec: Precision) -> f64 {
    let n = a.len();
    // T = A M
    let t: CMatrix = a
        .iter()
        .map(|row| {
            (0..m.len())
                .map(|col| {
                    let mut s = prec.czero();
                    for (k, x) in row.iter().enumerate() {
                        if !x.is_zero() {
                            fma_into(&mut s, x, &m[k][col]);
                        }
                    }
                    s
                })
                .collect()
        })
        .collect();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let mut s = prec.czero();
            for (k, x) in t[i].iter().enumerate() {
                fma_conj_into(&mut s, x, &a[j][k]);
            }
            if i == j {
                s -= &prec.cone();
            }
            worst = worst.max(s.abs_f64());
        }
    }
    worst
}

/// Eigenvalues of an upper Hessenberg matrix by shifted complex QR with
/// Givens rotations and Wilkinson shifts. Returns `None` if the iteration
/// budget is exhausted.
pub fn hessenberg_eigenvalues(h: &[Vec<Complex>], prec: Precision) -> Option<Vec<Complex>> {
    let n = h.len();
    let mut a: CMatrix = h.to_vec();
    let mut eig: Vec<Option<Complex>> = vec![None; n];
    if n == 0 {
        return Some(Vec::new());
    }
    let eps = Float::with_val(prec.bits(), Float::i_exp(1, -(prec.bits() as i32) + 16));
    let mut hi = n - 1;
    let mut iter_since = 0usize;
    let mut total_iter = 0usize;
    loop {
        if hi == 0 {
            eig[0] = Some(a[0][0].clone());
            break;
        }
        // find lo: largest k <= hi with negligible subdiagonal a[k][k-1]
        let mut lo = hi;
        while lo > 0 {
            let scale = Float::with_val(prec.bits(), a[lo][lo].abs() + a[lo - 1][lo - 1].abs());
            let sub = a[lo][lo - 1].abs();
            if sub <= Float::with_val(prec.bits(), &eps * &scale) || sub.is_zero() {
                a[lo][lo - 1] = prec.czero();
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig[hi] = Some(a[hi][hi].clone());
            hi -= 1;
            iter_since = 0;
            continue;
        }
        total_iter += 1;
        iter_since += 1;
        if total_iter > 60 * n {
            return None;
        }
        // Wilkinson shift from trailing 2x2 block
        let (p, q, r, s) = (&a[hi - 1][hi - 1], &a[hi - 1][hi], &a[hi][hi - 1], &a[hi][hi]);
        let mut mu = if iter_since % 11 == 10 {
            // exceptional shift
            let bump = a[hi][hi - 1].abs().to_f64() + a[hi - 1][hi - 2.min(hi - 1)].abs().to_f64();
            s + &prec.complex(0.75 * bump, 0.25 * bump)
        } else {
            let tr = p + s;
            let det = &(p * s) - &(q * r);
            let half_tr = tr.div_real(&prec.real(2.0));
            let disc = (&(&half_tr * &half_tr) - &det).sqrt();
            let l1 = &half_tr + &disc;
            let l2 = &half_tr - &disc;
            if (&l1 - s).abs() <= (&l2 - s).abs() {
                l1
            } else {
                l2
            }
        };
        if !mu.is_finite() {
            mu = s.clone();
        }
        qr_step(&mut a, lo, hi, &mu, prec);
    }
    Some(eig.into_iter().map(|e| e.expect("all eigenvalues deflated")).collect())
}

fn qr_step(a: &mut CMatrix, lo: usize, hi: usize, mu: &Complex, prec: Precision) {
    for k in lo..=hi {
        a[k][k] -= mu;
    }
    let mut rots: Vec<(Complex, Complex)> = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let x = a[k][k].clone();
        let y = a[k + 1][k].clone();
        let r = Float::with_val(prec.bits(), x.norm_sqr() + y.norm_sqr()).sqrt();
        let (c, s) = if r.is_zero() {
            (prec.cone(), prec.czero())
        } else {
            (x.div_real(&r), y.div_real(&r))
        };
        let cc = c.conj();
        let sc = s.conj();
        for j in k..=hi {
            let u = a[k][j].clone();
            let v = a[k + 1][j].clone();
            a[k][j] = &(&cc * &u) + &(&sc * &v);
            a[k + 1][j] = &(&c * &v) - &(&s * &u);
        }
        rots.push((c, s));
    }
    for (idx, (c, s)) in rots.iter().enumerate() {
        let k = lo + idx;
        let sc = s.conj();
        let cc = c.conj();
        for i in lo..=(k + 1).min(hi) {
            let u = a[i][k].clone();
            let v = a[i][k + 1].clone();
            a[i][k] = &(&u * c) + &(&v * s);
            a[i][k + 1] = &(&v * &cc) - &(&u * &sc);
        }
    }
    for k in lo..=hi {
        a[k][k] += mu;
    }
}
