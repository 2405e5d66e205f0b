use nalgebra_sparse::{CooMatrix, CsrMatrix};
use std::io::Write;

use super::grid::SymmetricGrid;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::potential::Potential;
use crate::root_system::DunklSystem;

/// Per-axis weight factor `(2t²)^k`.
#[inline]
fn axis_weight(k: f64, t: f64) -> f64 {
    if k == 0.0 {
        1.0
    } else {
        (2.0 * t * t).powf(k)
    }
}

/// `∫_a^b (2t²)^k dt`.
fn axis_mass(k: f64, a: f64, b: f64) -> f64 {
    if k == 0.0 {
        return b - a;
    }
    let p = 2.0 * k + 1.0;
    let prim = |t: f64| t.signum() * t.abs().powf(p) / p;
    2f64.powf(k) * (prim(b) - prim(a))
}

/// Multiplicity per axis, or an error for non-product root systems.
pub fn axis_multiplicities(system: &DunklSystem, grid: &SymmetricGrid) -> Result<Vec<f64>> {
    let ks = system.axis_multiplicities().ok_or(Error::UnsupportedGroup)?;
    if ks.len() != grid.dim() {
        return Err(Error::InvalidParameter("grid and root system dimensions differ".into()));
    }
    Ok(ks)
}

fn dual_len(grid: &SymmetricGrid) -> usize {
    (grid.per_axis() + 1) * grid.per_axis().pow(grid.dim() as u32 - 1)
}

/// Multi-index of dual point `r` along `axis`: entry `axis` is the edge
/// index `0..=2n`, the others node indices.
fn dual_multi(grid: &SymmetricGrid, axis: usize, mut r: usize) -> Vec<usize> {
    let m = grid.per_axis();
    let mut out = vec![0; grid.dim()];
    for j in (0..grid.dim()).rev() {
        let size = if j == axis { m + 1 } else { m };
        out[j] = r % size;
        r /= size;
    }
    out
}

/// Coordinates of a dual point.
pub fn dual_coords(grid: &SymmetricGrid, axis: usize, r: usize) -> Vec<f64> {
    dual_multi(grid, axis, r)
        .into_iter()
        .enumerate()
        .map(|(j, i)| if j == axis { grid.dual_coord(i) } else { grid.axis_coord(i) })
        .collect()
}

/// Discrete Dunkl derivative along `axis`, mapping node values to the
/// edge midpoints `x̄` of that axis (Dirichlet zero ghosts outside the box):
///
/// `(D f)(x̄) = (f(x̄ + h/2) - f(x̄ - h/2))/h + k (f̄(x̄) - f̄(σ x̄))/x̄`,
///
/// where `f̄` is the two-point average. On `x̄ = 0` the reflection quotient
/// is replaced by its limit `2k (f(h/2) - f(-h/2))/h`.
pub fn discrete_dunkl_derivative(grid: &SymmetricGrid, k: f64, axis: usize) -> CsrMatrix<f64> {
    let m = grid.per_axis();
    let h = grid.h();
    let rows = dual_len(grid);
    let mut coo = CooMatrix::new(rows, grid.len());
    for r in 0..rows {
        let multi = dual_multi(grid, axis, r);
        let e = multi[axis];
        let node = |i: usize| {
            let mut mm = multi.clone();
            mm[axis] = i;
            grid.index(&mm)
        };
        let xb = grid.dual_coord(e);
        let mut push = |i: isize, v: f64| {
            if i >= 0 && (i as usize) < m && v != 0.0 {
                coo.push(r, node(i as usize), v);
            }
        };
        let (lo, hi) = (e as isize - 1, e as isize);
        if e == grid.half_count() {
            push(hi, (1.0 + 2.0 * k) / h);
            push(lo, -(1.0 + 2.0 * k) / h);
            continue;
        }
        push(hi, 1.0 / h);
        push(lo, -1.0 / h);
        if k != 0.0 {
            let c = 0.5 * k / xb;
            let (mlo, mhi) = (m as isize - e as isize, m as isize - 1 - e as isize);
            push(lo, c);
            push(hi, c);
            push(mlo, -c);
            push(mhi, -c);
        }
    }
    CsrMatrix::from(&coo)
}

/// The mass matrices and the assembled form `B = Σ_j D_jᵀ W̄_j D_j + W V`.
/// `W` holds `w(x_i) h^N`; the edge mass `W̄_j` integrates `w` exactly over
/// the edge cell in direction `j`.
#[derive(Clone, Debug)]
pub struct DiscreteOperatorPair {
    grid: SymmetricGrid,
    ks: Vec<f64>,
    w: Vec<f64>,
    v: Vec<f64>,
    derivs: Vec<CsrMatrix<f64>>,
    dual_w: Vec<Vec<f64>>,
    b: CsrMatrix<f64>,
}

/// Assembles the discrete form for `V` given at the nodes.
pub fn assemble_values(grid: &SymmetricGrid, system: &DunklSystem, v: Vec<f64>, exec: Execution) -> Result<DiscreteOperatorPair> {
    let ks = axis_multiplicities(system, grid)?;
    if v.len() != grid.len() {
        return Err(Error::InvalidParameter("potential samples do not match the grid".into()));
    }
    if let Some((node, &value)) = v.iter().enumerate().find(|(_, x)| !(**x >= 0.0)) {
        return Err(Error::NegativePotential { node, value });
    }
    let hn = grid.h().powi(grid.dim() as i32);
    let weight = |x: &[f64]| x.iter().zip(&ks).map(|(t, k)| axis_weight(*k, *t)).product::<f64>() * hn;
    let w: Vec<f64> = exec.map_range(grid.len(), |i| weight(&grid.coords(i)));
    let derivs: Vec<CsrMatrix<f64>> = (0..grid.dim())
        .map(|j| discrete_dunkl_derivative(grid, ks[j], j))
        .collect();
    // edge masses integrate the weight across the edge cell along its axis;
    // the cell at x̄_j = 0 keeps a positive mass, which pins odd functions there
    let h = grid.h();
    let dual_w: Vec<Vec<f64>> = (0..grid.dim())
        .map(|j| {
            exec.map_range(dual_len(grid), |r| {
                let x = dual_coords(grid, j, r);
                let cross: f64 = x
                    .iter()
                    .zip(&ks)
                    .enumerate()
                    .filter(|(i, _)| *i != j)
                    .map(|(_, (t, k))| axis_weight(*k, *t) * h)
                    .product();
                cross * axis_mass(ks[j], x[j] - 0.5 * h, x[j] + 0.5 * h)
            })
        })
        .collect();
    let transposed: Vec<CsrMatrix<f64>> = derivs.iter().map(|d| d.transpose()).collect();
    // row p of B: Σ_j Σ_e D_j[e,p] W̄_j[e] D_j[e,·] + W_p V_p
    let rows: Vec<Vec<(usize, f64)>> = exec.map_range(grid.len(), |p| {
        let mut acc: Vec<(usize, f64)> = vec![(p, w[p] * v[p])];
        for j in 0..grid.dim() {
            let dt = transposed[j].row(p);
            for (&e, &a) in dt.col_indices().iter().zip(dt.values()) {
                let row = derivs[j].row(e);
                let s = a * dual_w[j][e];
                for (&q, &b) in row.col_indices().iter().zip(row.values()) {
                    acc.push((q, s * b));
                }
            }
        }
        acc.sort_by_key(|t| t.0);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(acc.len());
        for (q, x) in acc {
            match merged.last_mut() {
                Some(last) if last.0 == q => last.1 += x,
                _ => merged.push((q, x)),
            }
        }
        merged
    });
    // the two triangles round differently; mirror the upper one
    let mut rows = rows;
    for p in 0..rows.len() {
        for t in 0..rows[p].len() {
            let q = rows[p][t].0;
            if q < p {
                let upper = rows[q]
                    .binary_search_by_key(&p, |e| e.0)
                    .map(|pos| rows[q][pos].1)
                    .map_err(|_| Error::InvalidParameter("assembly: asymmetric pattern".into()))?;
                rows[p][t].1 = upper;
            }
        }
    }
    let mut offsets = Vec::with_capacity(grid.len() + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    offsets.push(0);
    for r in rows {
        for (q, x) in r {
            cols.push(q);
            vals.push(x);
        }
        offsets.push(cols.len());
    }
    let b = CsrMatrix::try_from_csr_data(grid.len(), grid.len(), offsets, cols, vals)
        .map_err(|e| Error::InvalidParameter(format!("assembly: {e}")))?;
    Ok(DiscreteOperatorPair {
        grid: grid.clone(),
        ks,
        w,
        v,
        derivs,
        dual_w,
        b,
    })
}

/// Assembles the discrete form for a potential.
pub fn assemble(grid: &SymmetricGrid, system: &DunklSystem, potential: &Potential, exec: Execution) -> Result<DiscreteOperatorPair> {
    let v = exec.map_range(grid.len(), |i| potential.eval(&grid.coords(i)));
    assemble_values(grid, system, v, exec)
}

fn spmv(a: &CsrMatrix<f64>, x: &[f64]) -> Vec<f64> {
    a.row_iter()
        .map(|r| r.col_indices().iter().zip(r.values()).map(|(&j, v)| v * x[j]).sum())
        .collect()
}

fn weighted_dot(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    w.iter().zip(a.iter().zip(b)).map(|(w, (a, b))| w * a * b).sum()
}

impl DiscreteOperatorPair {
    pub fn grid(&self) -> &SymmetricGrid {
        &self.grid
    }

    pub fn multiplicities(&self) -> &[f64] {
        &self.ks
    }

    /// Diagonal of `W`.
    pub fn mass(&self) -> &[f64] {
        &self.w
    }

    pub fn potential_values(&self) -> &[f64] {
        &self.v
    }

    pub fn stiffness(&self) -> &CsrMatrix<f64> {
        &self.b
    }

    pub fn derivative(&self, axis: usize) -> &CsrMatrix<f64> {
        &self.derivs[axis]
    }

    /// Diagonal of the edge mass `W̄` along `axis`.
    pub fn dual_mass(&self, axis: usize) -> &[f64] {
        &self.dual_w[axis]
    }

    pub fn dual_coords(&self, axis: usize, r: usize) -> Vec<f64> {
        dual_coords(&self.grid, axis, r)
    }

    /// `D_j f` on the edge midpoints.
    pub fn apply_derivative(&self, axis: usize, f: &[f64]) -> Vec<f64> {
        spmv(&self.derivs[axis], f)
    }

    /// `W⁻¹ D_jᵀ W̄ g`, the adjoint of `D_j` between the weighted spaces.
    pub fn apply_adjoint(&self, axis: usize, g: &[f64]) -> Vec<f64> {
        let wg: Vec<f64> = g.iter().zip(&self.dual_w[axis]).map(|(a, b)| a * b).collect();
        let dt = self.derivs[axis].transpose();
        spmv(&dt, &wg).into_iter().zip(&self.w).map(|(a, b)| a / b).collect()
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        spmv(&self.b, f)
    }

    /// `⟨B f, f⟩`.
    pub fn quadratic_form(&self, f: &[f64]) -> f64 {
        self.apply(f).iter().zip(f).map(|(a, b)| a * b).sum()
    }

    /// `(Σ_j ‖D_j f‖²_W̄, ⟨V f, f⟩_W)`.
    pub fn form_parts(&self, f: &[f64]) -> (f64, f64) {
        let kinetic = (0..self.grid.dim())
            .map(|j| {
                let d = self.apply_derivative(j, f);
                weighted_dot(&self.dual_w[j], &d, &d)
            })
            .sum();
        let pot = self.w.iter().zip(&self.v).zip(f).map(|((w, v), x)| w * v * x * x).sum();
        (kinetic, pot)
    }

    /// `‖f‖²_W`.
    pub fn norm_sq(&self, f: &[f64]) -> f64 {
        weighted_dot(&self.w, f, f)
    }

    /// `⟨m² f, f⟩_W / Q(f, f)` with `m` sampled at the nodes.
    pub fn fp_ratio(&self, m: &[f64], f: &[f64]) -> Result<f64> {
        let q = self.quadratic_form(f);
        let num: f64 = self.w.iter().zip(m).zip(f).map(|((w, m), x)| w * m * m * x * x).sum();
        if !(q > 0.0) {
            if num > 0.0 || f.iter().any(|x| *x != 0.0) {
                return Err(Error::DegenerateForm);
            }
            return Ok(0.0);
        }
        Ok(num / q)
    }

    /// Terms of the cut-off energy estimate along `axis`:
    /// `(‖D_j(fφ)‖_W̄, ‖D_j f‖_{W̄, in_star}, ‖m f‖_{W, in_orbit})`.
    pub fn cutoff_energy(
        &self,
        axis: usize,
        f: &[f64],
        phi: &[f64],
        m: &[f64],
        in_star: impl Fn(&[f64]) -> bool,
        in_orbit: impl Fn(&[f64]) -> bool,
    ) -> (f64, f64, f64) {
        let fphi: Vec<f64> = f.iter().zip(phi).map(|(a, b)| a * b).collect();
        let d1 = self.apply_derivative(axis, &fphi);
        let lhs = weighted_dot(&self.dual_w[axis], &d1, &d1).sqrt();
        let df = self.apply_derivative(axis, f);
        let deriv: f64 = (0..df.len())
            .filter(|&r| in_star(&self.dual_coords(axis, r)))
            .map(|r| self.dual_w[axis][r] * df[r] * df[r])
            .sum();
        let pot: f64 = (0..f.len())
            .filter(|&i| in_orbit(&self.grid.coords(i)))
            .map(|i| self.w[i] * m[i] * m[i] * f[i] * f[i])
            .sum();
        (lhs, deriv.sqrt(), pot.sqrt())
    }

    /// Max-norm defect of the product rule along `axis`, over edge midpoints
    /// off the hyperplane `x_j = 0`:
    /// `D(fg) - [(Df) ḡ + f̄ ∂̂g + k f̄(σx̄)(ḡ(x̄) - ḡ(σx̄))/x̄_j]`.
    pub fn leibniz_defect(&self, axis: usize, f: &[f64], g: &[f64]) -> f64 {
        let grid = &self.grid;
        let k = self.ks[axis];
        let h = grid.h();
        let m = grid.per_axis();
        let fg: Vec<f64> = f.iter().zip(g).map(|(a, b)| a * b).collect();
        let dfg = self.apply_derivative(axis, &fg);
        let df = self.apply_derivative(axis, f);
        let mut worst: f64 = 0.0;
        for r in 0..dfg.len() {
            let multi = dual_multi(grid, axis, r);
            let e = multi[axis];
            if e == grid.half_count() {
                continue;
            }
            let val = |u: &[f64], i: isize| -> f64 {
                if i < 0 || i as usize >= m {
                    0.0
                } else {
                    let mut mm = multi.clone();
                    mm[axis] = i as usize;
                    u[grid.index(&mm)]
                }
            };
            let avg = |u: &[f64], e: usize| 0.5 * (val(u, e as isize - 1) + val(u, e as isize));
            let xb = grid.dual_coord(e);
            let se = m - e;
            let dg = (val(g, e as isize) - val(g, e as isize - 1)) / h;
            let rhs = df[r] * avg(g, e) + avg(f, e) * dg + k * avg(f, se) * (avg(g, e) - avg(g, se)) / xb;
            worst = worst.max((dfg[r] - rhs).abs());
        }
        worst
    }

    /// Writes `B` as `row,col,value` lines with a header.
    pub fn write_matrix<W: Write>(&self, out: W) -> Result<()> {
        write_triplets(&self.b, out)
    }
}

/// Coordinate-format dump of a sparse matrix.
pub fn write_triplets<W: Write>(a: &CsrMatrix<f64>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["row", "col", "value"])?;
    for (i, row) in a.row_iter().enumerate() {
        for (&j, v) in row.col_indices().iter().zip(row.values()) {
            w.write_record([i.to_string(), j.to_string(), format!("{v:e}")])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::PotentialSpec;

    #[test]
    fn derivative_of_coordinate() {
        for k in [0.0, 0.5, 1.0, 2.5] {
            let g = SymmetricGrid::new(1, 2.0, 0.25).unwrap();
            let d = discrete_dunkl_derivative(&g, k, 0);
            let x: Vec<f64> = (0..g.len()).map(|i| g.axis_coord(i)).collect();
            let y = spmv(&d, &x);
            // interior edges only: the outermost ones see the zero ghosts
            for (e, v) in y.iter().enumerate().skip(1).take(g.per_axis() - 1) {
                assert!((v - (1.0 + 2.0 * k)).abs() < 1e-12, "k={k} e={e}: {v}");
            }
            let even: Vec<f64> = x.iter().map(|t| t * t).collect();
            let plain = spmv(&discrete_dunkl_derivative(&g, 0.0, 0), &even);
            let with_k = spmv(&d, &even);
            for e in 0..=g.per_axis() {
                if e != g.half_count() {
                    assert!((plain[e] - with_k[e]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn classical_matrix() {
        let g = SymmetricGrid::new(1, 1.0, 0.25).unwrap();
        let s = DunklSystem::rank1(0.0).unwrap();
        let p = assemble_values(&g, &s, vec![0.0; g.len()], Execution::Sequential).unwrap();
        let h = 0.25;
        for i in 0..g.len() {
            let row = p.stiffness().row(i);
            for (&j, v) in row.col_indices().iter().zip(row.values()) {
                let expect = if i == j { 2.0 / h } else if i.abs_diff(j) == 1 { -1.0 / h } else { 0.0 };
                assert!((v - expect).abs() < 1e-12, "{i} {j} {v}");
            }
        }
        let pot = Potential::with_default_q(PotentialSpec::Constant { value: -1.0 }, &s);
        assert!(pot.is_err());
        assert!(matches!(
            assemble_values(&g, &s, vec![-1.0; g.len()], Execution::Sequential),
            Err(Error::NegativePotential { .. })
        ));
    }
}
