//! Dense symmetric eigendecomposition.
//!
//! Householder reduction to tridiagonal form followed by the implicit-shift
//! QL iteration (the EISPACK `tred2`/`tql2` pair). Graphs here have at most a
//! few hundred nodes and every projection needs the full spectrum, so there is
//! no sparse or iterative path.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

const MAX_QL_SWEEPS: usize = 60;

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a real
/// symmetric matrix. Only the lower triangle of the input is read.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    values: Array1<f64>,
    vectors: Array2<f64>,
}

impl SymmetricEigen {
    pub fn new(m: &Array2<f64>) -> Result<Self> {
        let (values, vt) = decompose(m.view(), true)?;
        let n = values.len();
        // `vt` holds eigenvectors as rows.
        let mut vectors = Array2::from_shape_vec((n, n), vt)
            .expect("square buffer")
            .reversed_axes();
        for mut col in vectors.columns_mut() {
            if let Some(&lead) = col.iter().find(|x| x.abs() > 1e-12) {
                if lead < 0.0 {
                    col.mapv_inplace(|x| -x);
                }
            }
        }
        Ok(Self {
            values: Array1::from(values),
            vectors: vectors.as_standard_layout().into_owned(),
        })
    }

    pub fn values(&self) -> ArrayView1<'_, f64> {
        self.values.view()
    }

    pub fn vectors(&self) -> ArrayView2<'_, f64> {
        self.vectors.view()
    }

    /// Unit eigenvector paired with `values()[j]`. Sign is fixed so that the
    /// first non-negligible coordinate is positive.
    pub fn vector(&self, j: usize) -> ArrayView1<'_, f64> {
        self.vectors.column(j)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min_value(&self) -> f64 {
        self.values[0]
    }

    pub fn max_value(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// `V f(Λ) Vᵀ`.
    pub fn reconstruct(&self, f: impl Fn(f64) -> f64) -> Array2<f64> {
        let n = self.len();
        let mut out = Array2::zeros((n, n));
        for (j, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            if w != 0.0 {
                add_outer(&mut out, self.vectors.column(j), w);
            }
        }
        symmetrize_in_place(&mut out);
        out
    }
}

/// Eigenvalues only, ascending. Skips eigenvector accumulation in the QL
/// sweeps, which is the dominant cost.
pub fn eigenvalues(m: &Array2<f64>) -> Result<Vec<f64>> {
    decompose(m.view(), false).map(|(v, _)| v)
}

fn check_square(m: ArrayView2<'_, f64>) -> Result<usize> {
    let (rows, cols) = m.dim();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    for ((i, j), x) in m.indexed_iter() {
        if !x.is_finite() {
            return Err(Error::NonFinite { row: i, col: j });
        }
    }
    Ok(rows)
}

/// Returns ascending eigenvalues and, when requested, the eigenvectors stored
/// row-wise (row `j` pairs with value `j`).
fn decompose(m: ArrayView2<'_, f64>, want_vectors: bool) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = check_square(m)?;
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let mut v: Vec<f64> = m.iter().copied().collect();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(n, &mut v, &mut d, &mut e);

    // Transpose so each eigenvector is contiguous during the QL rotations.
    let mut vt = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            vt[i * n + k] = v[k * n + i];
        }
    }
    tql2(n, &mut d, &mut e, want_vectors.then_some(vt.as_mut_slice()))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = if want_vectors {
        let mut sorted = Vec::with_capacity(n * n);
        for &i in &order {
            sorted.extend_from_slice(&vt[i * n..(i + 1) * n]);
        }
        sorted
    } else {
        Vec::new()
    };
    Ok((values, vectors))
}

// Row-major `v[k * n + j]` is V[k][j].
fn tred2(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    for j in 0..n {
        d[j] = v[(n - 1) * n + j];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1) * n + j];
                v[i * n + j] = 0.0;
                v[j * n + i] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }

            for j in 0..i {
                f = d[j];
                v[j * n + i] = f;
                g = e[j] + v[j * n + j] * f;
                for k in (j + 1)..i {
                    g += v[k * n + j] * d[k];
                    e[k] += v[k * n + j] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k * n + j] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1) * n + j];
                v[i * n + j] = 0.0;
            }
        }
        d[i] = h;
    }

    // Accumulate transformations.
    for i in 0..n - 1 {
        v[(n - 1) * n + i] = v[i * n + i];
        v[i * n + i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k * n + i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[k * n + i + 1] * v[k * n + j];
                }
                for k in 0..=i {
                    v[k * n + j] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[k * n + i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1) * n + j];
        v[(n - 1) * n + j] = 0.0;
    }
    v[(n - 1) * n + n - 1] = 1.0;
    e[0] = 0.0;
}

// `vt[i * n + k]` is V[k][i], i.e. eigenvector `i` is row `i`.
fn tql2(n: usize, d: &mut [f64], e: &mut [f64], mut vt: Option<&mut [f64]>) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }

        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_QL_SWEEPS {
                    return Err(Error::EigenNoConvergence { index: l });
                }

                // Implicit shift.
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                // Implicit QL transformation.
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    if let Some(vt) = vt.as_deref_mut() {
                        let (lo, hi) = vt.split_at_mut((i + 1) * n);
                        let row_i = &mut lo[i * n..];
                        let row_next = &mut hi[..n];
                        for (a, b) in row_i.iter_mut().zip(row_next.iter_mut()) {
                            let t = *b;
                            *b = s * *a + c * t;
                            *a = c * *a - s * t;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// `out += w · v vᵀ`.
pub(crate) fn add_outer(out: &mut Array2<f64>, v: ArrayView1<'_, f64>, w: f64) {
    let n = v.len();
    for i in 0..n {
        let wi = w * v[i];
        if wi == 0.0 {
            continue;
        }
        for j in 0..n {
            out[[i, j]] += wi * v[j];
        }
    }
}

/// Replaces `m` by `(m + mᵀ)/2`, making it bit-exactly symmetric.
pub(crate) fn symmetrize_in_place(m: &mut Array2<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[[i, j]] + m[[j, i]]);
            m[[i, j]] = avg;
            m[[j, i]] = avg;
        }
    }
}

pub fn frobenius_norm(m: &Array2<f64>) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn frobenius_distance(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Frobenius inner product `⟨a, b⟩ = tr(aᵀ b)`.
pub fn frobenius_inner(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// The averaging matrix `(1/n)·11ᵀ`.
pub fn averaging_matrix(n: usize) -> Array2<f64> {
    Array2::from_elem((n, n), 1.0 / n as f64)
}

/// Solves `a·x = b` for symmetric positive definite `a` by Cholesky
/// factorization, overwriting `a` with its factor and `b` with `x`. Returns
/// `false` if a pivot is not positive.
pub(crate) fn cholesky_solve(a: &mut Array2<f64>, b: &mut [f64]) -> bool {
    let n = a.nrows();
    for j in 0..n {
        let mut d = a[[j, j]];
        for k in 0..j {
            d -= a[[j, k]] * a[[j, k]];
        }
        if d.is_nan() || d <= 0.0 {
            return false;
        }
        let d = d.sqrt();
        a[[j, j]] = d;
        for i in (j + 1)..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= a[[i, k]] * a[[j, k]];
            }
            a[[i, j]] = s / d;
        }
    }
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= a[[i, k]] * b[k];
        }
        b[i] = s / a[[i, i]];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= a[[k, i]] * b[k];
        }
        b[i] = s / a[[i, i]];
    }
    true
}
