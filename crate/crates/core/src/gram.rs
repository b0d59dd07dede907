//! Discrete carré du champ, Gram fields and inner products of k-forms.

use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array2, Array3, ArrayView2, Axis};

use crate::data::cache::Precision;
use crate::data::measure::Measure;
use crate::data::multi_index::{binomial, multi_index_table, MultiIndexTable};
use crate::error::{NpfError, Result};
use crate::laplacian::{build_laplacian, DiffusionOperator, LaplacianParams};

/// Per-point symmetric `B×B` matrices, `B = C(D,k)`, in multi-index order.
#[derive(Debug, Clone, PartialEq)]
pub struct GramField {
    table: MultiIndexTable,
    values: Array3<f64>,
}

impl GramField {
    /// Validates shape and finiteness, then symmetrises every slice as `(A+Aᵀ)/2`.
    pub fn from_parts(table: MultiIndexTable, mut values: Array3<f64>) -> Result<Self> {
        let (_, r, c) = values.dim();
        if r != table.len() || c != table.len() {
            return Err(NpfError::ShapeMismatch(format!(
                "slices are {r}x{c}, basis has {} elements",
                table.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(NpfError::ShapeMismatch("gram field has non-finite entries".into()));
        }
        for mut slice in values.axis_iter_mut(Axis(0)) {
            for i in 0..r {
                for j in i + 1..r {
                    let s = 0.5 * (slice[[i, j]] + slice[[j, i]]);
                    slice[[i, j]] = s;
                    slice[[j, i]] = s;
                }
            }
        }
        Ok(Self { table, values })
    }

    pub fn table(&self) -> &MultiIndexTable {
        &self.table
    }

    pub fn values(&self) -> &Array3<f64> {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.table.dim()
    }

    pub fn degree(&self) -> usize {
        self.table.degree()
    }

    pub fn basis_len(&self) -> usize {
        self.table.len()
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.values.len_of(Axis(0))
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn slice(&self, p: usize) -> ArrayView2<'_, f64> {
        self.values.index_axis(Axis(0), p)
    }

    /// Reorders points so that new point `i` is old point `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self { table: self.table.clone(), values: self.values.select(Axis(0), perm) }
    }

    /// Smallest eigenvalue over all slices; negative values are reported, never clipped.
    pub fn min_eigenvalue(&self) -> f64 {
        let b = self.basis_len();
        self.values
            .axis_iter(Axis(0))
            .map(|s| {
                let m = DMatrix::from_fn(b, b, |i, j| s[[i, j]]);
                SymmetricEigen::new(m).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// `Γ(f,h) = ½(f·Lh + h·Lf − L(fh))`, pointwise.
pub fn carre_du_champ(op: &DiffusionOperator, f: &[f64], h: &[f64]) -> Result<Vec<f64>> {
    let m = op.len();
    for v in [f, h] {
        if v.len() != m {
            return Err(NpfError::LengthMismatch { expected: m, got: v.len() });
        }
    }
    let lf = op.apply(f)?;
    let lh = op.apply(h)?;
    let fh: Vec<f64> = f.iter().zip(h).map(|(a, b)| a * b).collect();
    let lfh = op.apply(&fh)?;
    Ok((0..m).map(|i| 0.5 * (f[i] * lh[i] + h[i] * lf[i] - lfh[i])).collect())
}

/// Builds the Laplacian of `points` and returns the order-`degree` Gram field.
pub fn gram_field(points: ArrayView2<'_, f64>, params: &LaplacianParams, degree: usize) -> Result<GramField> {
    let op = build_laplacian(points, params)?;
    let g1 = gram_field_1(&op, points)?;
    compound_gram_field(&g1, degree)
}

/// Order-1 Gram field: `G(p)[i][j] = Γ(xⁱ, xʲ)(p)` for the coordinate functions.
pub fn gram_field_1(op: &DiffusionOperator, points: ArrayView2<'_, f64>) -> Result<GramField> {
    let (m, dim) = points.dim();
    if m != op.len() {
        return Err(NpfError::LengthMismatch { expected: op.len(), got: m });
    }
    let coords: Vec<Vec<f64>> = (0..dim).map(|c| points.column(c).to_vec()).collect();
    let mut l_coords = vec![vec![0.0; m]; dim];
    for (x, lx) in coords.iter().zip(l_coords.iter_mut()) {
        op.laplacian.mul_vec_into(x, lx);
    }
    let mut values = Array3::zeros((m, dim, dim));
    let mut prod = vec![0.0; m];
    let mut l_prod = vec![0.0; m];
    for i in 0..dim {
        for j in i..dim {
            for p in 0..m {
                prod[p] = coords[i][p] * coords[j][p];
            }
            op.laplacian.mul_vec_into(&prod, &mut l_prod);
            for p in 0..m {
                let g = 0.5 * (coords[i][p] * l_coords[j][p] + coords[j][p] * l_coords[i][p] - l_prod[p]);
                values[[p, i, j]] = g;
                values[[p, j, i]] = g;
            }
        }
    }
    GramField::from_parts(multi_index_table(dim, 1)?, values)
}

fn det2(a: [[f64; 2]; 2]) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

fn det3(a: [[f64; 3]; 3]) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

/// Determinant by Gaussian elimination with partial pivoting.
fn det_lu(mut a: Vec<f64>, n: usize) -> f64 {
    let mut det = 1.0;
    for c in 0..n {
        let pivot = (c..n).max_by(|&x, &y| a[x * n + c].abs().total_cmp(&a[y * n + c].abs())).unwrap();
        if a[pivot * n + c] == 0.0 {
            return 0.0;
        }
        if pivot != c {
            for k in 0..n {
                a.swap(c * n + k, pivot * n + k);
            }
            det = -det;
        }
        let d = a[c * n + c];
        det *= d;
        for r in c + 1..n {
            let f = a[r * n + c] / d;
            for k in c..n {
                a[r * n + k] -= f * a[c * n + k];
            }
        }
    }
    det
}

/// Determinant of the `rows × cols` submatrix of `g`.
pub fn minor(g: ArrayView2<'_, f64>, rows: &[usize], cols: &[usize]) -> f64 {
    match rows.len() {
        1 => g[[rows[0], cols[0]]],
        2 => det2([
            [g[[rows[0], cols[0]]], g[[rows[0], cols[1]]]],
            [g[[rows[1], cols[0]]], g[[rows[1], cols[1]]]],
        ]),
        3 => {
            let mut a = [[0.0; 3]; 3];
            for (r, &i) in rows.iter().enumerate() {
                for (c, &j) in cols.iter().enumerate() {
                    a[r][c] = g[[i, j]];
                }
            }
            det3(a)
        }
        n => det_lu(rows.iter().flat_map(|&i| cols.iter().map(move |&j| g[[i, j]])).collect(), n),
    }
}

/// Compound matrix of a single `D×D` slice: all `k×k` minors in multi-index order.
pub fn compound_matrix(g: ArrayView2<'_, f64>, table: &MultiIndexTable) -> Array2<f64> {
    let b = table.len();
    let mut out = Array2::zeros((b, b));
    for (a, rows) in table.entries().iter().enumerate() {
        for (c, cols) in table.entries().iter().enumerate() {
            out[[a, c]] = minor(g, rows, cols);
        }
    }
    out
}

/// Lifts an order-1 field to order `k` through per-point compound matrices.
pub fn compound_gram_field(g1: &GramField, degree: usize) -> Result<GramField> {
    if g1.degree() != 1 {
        return Err(NpfError::ShapeMismatch(format!("expected an order-1 field, got order {}", g1.degree())));
    }
    let table = multi_index_table(g1.dim(), degree)?;
    if degree == 1 {
        return Ok(g1.clone());
    }
    let b = table.len();
    let mut values = Array3::zeros((g1.len(), b, b));
    for (p, mut out) in values.axis_iter_mut(Axis(0)).enumerate() {
        let slice = g1.slice(p);
        for a in 0..b {
            for c in a..b {
                let v = minor(slice, table.get(a), table.get(c));
                out[[a, c]] = v;
                out[[c, a]] = v;
            }
        }
    }
    GramField::from_parts(table, values)
}

/// Coefficients of an ambient k-form evaluated at every point (`m × B`).
pub fn evaluate_form(
    points: ArrayView2<'_, f64>,
    basis_len: usize,
    form: impl Fn(&[f64]) -> Vec<f64>,
) -> Result<Array2<f64>> {
    let m = points.nrows();
    let mut out = Array2::zeros((m, basis_len));
    for (p, row) in points.rows().into_iter().enumerate() {
        let coeffs = form(row.as_slice().map_or_else(|| row.to_vec(), <[f64]>::to_vec).as_slice());
        if coeffs.len() != basis_len {
            return Err(NpfError::ShapeMismatch(format!("form has {} coefficients, basis has {basis_len}", coeffs.len())));
        }
        out.row_mut(p).assign(&ndarray::ArrayView1::from(&coeffs));
    }
    Ok(out)
}

fn check_coeffs(gk: &GramField, f: &ArrayView2<'_, f64>) -> Result<()> {
    if f.dim() != (gk.len(), gk.basis_len()) {
        return Err(NpfError::ShapeMismatch(format!(
            "coefficients are {:?}, gram field needs ({}, {})",
            f.dim(),
            gk.len(),
            gk.basis_len()
        )));
    }
    Ok(())
}

/// `(fᵀ G h)(p)` at every point.
///
/// Summed as `Σ_i G_ii f_i h_i + Σ_{i<j} G_ij (f_i h_j + f_j h_i)`, so swapping `f` and `h`
/// gives bitwise the same result on symmetric slices.
pub fn local_inner_product(gk: &GramField, f: ArrayView2<'_, f64>, h: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
    check_coeffs(gk, &f)?;
    check_coeffs(gk, &h)?;
    let b = gk.basis_len();
    Ok((0..gk.len())
        .map(|p| {
            let g = gk.slice(p);
            let mut acc = 0.0;
            for i in 0..b {
                acc += g[[i, i]] * (f[[p, i]] * h[[p, i]]);
                for j in i + 1..b {
                    acc += g[[i, j]] * (f[[p, i]] * h[[p, j]] + f[[p, j]] * h[[p, i]]);
                }
            }
            acc
        })
        .collect())
}

/// `Σ_p μ(p) (fᵀ G h)(p)`, summed in point order.
pub fn global_inner_product(
    gk: &GramField,
    f: ArrayView2<'_, f64>,
    h: ArrayView2<'_, f64>,
    mu: &Measure,
) -> Result<f64> {
    if mu.len() != gk.len() {
        return Err(NpfError::LengthMismatch { expected: gk.len(), got: mu.len() });
    }
    let local = local_inner_product(gk, f, h)?;
    Ok(local.iter().zip(&mu.weights).map(|(l, w)| l * w).sum())
}

/// Dense Gram-tensor footprint, `width · m · C(D,k)²` bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemoryEstimate {
    pub bytes: u64,
}

impl MemoryEstimate {
    pub fn megabytes(&self) -> f64 {
        self.bytes as f64 / 1e6
    }

    pub fn mebibytes(&self) -> f64 {
        self.bytes as f64 / (1u64 << 20) as f64
    }

    pub fn times(&self, n: u64) -> Self {
        Self { bytes: self.bytes * n }
    }
}

fn group_thousands(n: u64) -> String {
    let digits = n.to_string();
    let mut out = String::new();
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

impl fmt::Display for MemoryEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} B", group_thousands(self.bytes))?;
        const UNITS: [(&str, u32); 3] = [("GiB", 30), ("MiB", 20), ("KiB", 10)];
        for (name, shift) in UNITS {
            if self.bytes >= 1u64 << shift {
                return write!(f, " ≈ {:.2} {name}", self.bytes as f64 / (1u64 << shift) as f64);
            }
        }
        Ok(())
    }
}

pub fn estimate_gram_memory(m: u64, dim: usize, degree: usize, precision: Precision) -> Result<MemoryEstimate> {
    if degree < 1 || degree > dim {
        return Err(NpfError::InvalidDegree { k: degree, dim });
    }
    let b = binomial(dim, degree) as u64;
    Ok(MemoryEstimate { bytes: precision.width() as u64 * m * b * b })
}
