//! The rational R-matrix `R_VW(t)`, obtained by solving its defining linear
//! relations level by level on `V (x) W`.

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use super::{max_abs, Gen, Mat, Module, WeightSubspace};
use crate::error::{Error, Result};

/// Relative size below which a singular value counts as zero.
const RANK_TOL: f64 = 1e-10;

/// `R_VW(t)` on the levels `0..=max_level` of `V (x) W`.
#[derive(Clone, Debug)]
pub struct RMatrix {
    pub t: C64,
    pub modules: [Module; 2],
    blocks: Vec<Mat>,
    spaces: Vec<WeightSubspace>,
    /// Largest residual of the defining relations, relative to the operator size.
    pub residual: f64,
    /// Dimension of the solution space of the homogeneous relations.
    pub null_dim: usize,
}

/// Row-major bookkeeping of the unknown entries of all blocks.
struct Layout {
    offsets: Vec<usize>,
    dims: Vec<usize>,
}

impl Layout {
    fn var(&self, k: usize, i: usize, j: usize) -> usize {
        self.offsets[k] + i * self.dims[k] + j
    }
    fn total(&self) -> usize {
        self.offsets.last().copied().unwrap_or(0) + self.dims.last().map_or(0, |d| d * d)
    }
}

/// Appends the rows of `R_hi A - A R_lo = 0` for `A: lo -> hi`.
fn push_intertwiner(rows: &mut Vec<Vec<(usize, C64)>>, lay: &Layout, lo: usize, hi: usize, a: &Mat, b: &Mat) {
    // R_hi a - b R_lo
    for i in 0..lay.dims[hi] {
        for j in 0..lay.dims[lo] {
            let mut row = Vec::new();
            for l in 0..lay.dims[hi] {
                if a[(l, j)] != C64::new(0.0, 0.0) {
                    row.push((lay.var(hi, i, l), a[(l, j)]));
                }
            }
            for l in 0..lay.dims[lo] {
                if b[(i, l)] != C64::new(0.0, 0.0) {
                    row.push((lay.var(lo, l, j), -b[(i, l)]));
                }
            }
            rows.push(row);
        }
    }
}

/// Appends the rows of `R_lo A - A R_hi = 0` for `A: hi -> lo`.
fn push_lowering(rows: &mut Vec<Vec<(usize, C64)>>, lay: &Layout, lo: usize, hi: usize, a: &Mat) {
    for i in 0..lay.dims[lo] {
        for j in 0..lay.dims[hi] {
            let mut row = Vec::new();
            for l in 0..lay.dims[lo] {
                if a[(l, j)] != C64::new(0.0, 0.0) {
                    row.push((lay.var(lo, i, l), a[(l, j)]));
                }
            }
            for l in 0..lay.dims[hi] {
                if a[(i, l)] != C64::new(0.0, 0.0) {
                    row.push((lay.var(hi, l, j), -a[(i, l)]));
                }
            }
            rows.push(row);
        }
    }
}

fn dense(rows: &[Vec<(usize, C64)>], ncols: usize) -> Mat {
    let mut m = Mat::zeros(rows.len(), ncols);
    for (r, row) in rows.iter().enumerate() {
        for &(c, v) in row {
            m[(r, c)] += v;
        }
    }
    m
}

fn rank(m: &Mat) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > RANK_TOL * top).count()
}

/// Solves for `R_VW(t)`: commutation with the diagonal gl2 action, the
/// E21-intertwining relation with parameter `t`, and `R v (x) w = v (x) w`.
/// Fails if the relations do not determine `R` uniquely.
pub fn build_r(t: C64, v: Module, w: Module, max_level: usize) -> Result<RMatrix> {
    let spaces: Vec<WeightSubspace> =
        (0..=max_level + 1).map(|k| WeightSubspace::new(vec![v, w], k)).collect::<Result<_>>()?;
    let dims: Vec<usize> = spaces.iter().map(|s| s.dim()).collect();
    let mut offsets = vec![0];
    for d in &dims[..dims.len() - 1] {
        offsets.push(offsets.last().unwrap() + d * d);
    }
    let lay = Layout { offsets, dims };
    let mut rows = Vec::new();
    for k in 0..=max_level {
        let s = &spaces[k];
        let lower = s.total_op(Gen::E21);
        let x = s.product(Gen::E21, 0, Gen::E11, 1) + s.product(Gen::E22, 0, Gen::E21, 1) + s.site_op(Gen::E21, 0) * t;
        let y = s.product(Gen::E11, 0, Gen::E21, 1) + s.product(Gen::E21, 0, Gen::E22, 1) + s.site_op(Gen::E21, 0) * t;
        push_intertwiner(&mut rows, &lay, k, k + 1, &lower, &lower);
        push_intertwiner(&mut rows, &lay, k, k + 1, &x, &y);
        let raise = spaces[k + 1].total_op(Gen::E12);
        push_lowering(&mut rows, &lay, k, k + 1, &raise);
    }
    let n = lay.total();
    let homogeneous = dense(&rows, n);
    let null_dim = n - rank(&homogeneous);
    if null_dim != 1 {
        return Err(Error::Singular(format!(
            "R-matrix relations at t = {t} leave a {null_dim}-dimensional solution space"
        )));
    }
    let last = homogeneous.nrows();
    let mut full = homogeneous.clone().insert_row(last, C64::new(0.0, 0.0));
    full[(last, lay.var(0, 0, 0))] = C64::new(1.0, 0.0);
    let mut rhs = DVector::zeros(last + 1);
    rhs[last] = C64::new(1.0, 0.0);
    let x = full
        .svd(true, true)
        .solve(&rhs, 1e-300)
        .map_err(|e| Error::Singular(format!("R-matrix solve failed: {e}")))?;
    let scale = max_abs(&homogeneous).max(1.0);
    let size = x.iter().fold(1.0f64, |a, v| a.max(v.norm()));
    let residual = (&homogeneous * &x).iter().fold(0.0f64, |a, r| a.max(r.norm())) / (scale * size);
    let blocks = (0..=max_level)
        .map(|k| {
            let d = lay.dims[k];
            Mat::from_fn(d, d, |i, j| x[lay.var(k, i, j)])
        })
        .collect();
    let mut spaces = spaces;
    spaces.truncate(max_level + 1);
    Ok(RMatrix { t, modules: [v, w], blocks, spaces, residual, null_dim })
}

impl RMatrix {
    pub fn max_level(&self) -> usize {
        self.blocks.len() - 1
    }

    /// Block on the level-`k` subspace of `V (x) W`.
    pub fn block(&self, k: usize) -> &Mat {
        &self.blocks[k]
    }

    pub fn space(&self, k: usize) -> &WeightSubspace {
        &self.spaces[k]
    }

    /// `R^{(ab)}` on `space`, with `V` at site `a` and `W` at site `b`.
    pub fn embed(&self, space: &WeightSubspace, a: usize, b: usize) -> Result<Mat> {
        if space.modules()[a] != self.modules[0] || space.modules()[b] != self.modules[1] {
            return Err(Error::InvalidParams("R-matrix modules do not match the sites".into()));
        }
        let mut out = Mat::zeros(space.dim(), space.dim());
        for (col, d) in space.basis().iter().enumerate() {
            let k = d[a] + d[b];
            if k > self.max_level() {
                return Err(Error::InvalidParams(format!("R-matrix built up to level {} only", self.max_level())));
            }
            let local = &self.spaces[k];
            let j = local.position(&[d[a], d[b]]).expect("pair is admissible");
            for (i, e) in local.basis().iter().enumerate() {
                let mut target = d.clone();
                target[a] = e[0];
                target[b] = e[1];
                let row = space.position(&target).expect("same level");
                out[(row, col)] += self.blocks[k][(i, j)];
            }
        }
        Ok(out)
    }
}
