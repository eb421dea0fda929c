//! Complex tridiagonal LU with partial pivoting (row interchanges create one
//! extra superdiagonal).

use crate::error::{Result, VortexError};
use crate::C64;

#[derive(Debug, Clone)]
pub(crate) struct Tridiagonal {
    pub sub: Vec<C64>,
    pub diag: Vec<C64>,
    pub sup: Vec<C64>,
}

impl Tridiagonal {
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let n = self.diag.len();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * x[i];
                if i > 0 {
                    acc += self.sub[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    acc += self.sup[i] * x[i + 1];
                }
                acc
            })
            .collect()
    }

    pub fn factor(&self) -> Result<TridiagLu> {
        let n = self.diag.len();
        if n == 0 || self.sub.len() + 1 != n || self.sup.len() + 1 != n {
            return Err(VortexError::invalid("tridiagonal bands have inconsistent lengths"));
        }
        let mut dl = self.sub.clone();
        let mut d = self.diag.clone();
        let mut du = self.sup.clone();
        let mut du2 = vec![C64::new(0.0, 0.0); n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].norm() >= dl[i].norm() {
                if d[i].norm() != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        if let Some(k) = d.iter().position(|z| z.norm() == 0.0 || !z.re.is_finite() || !z.im.is_finite()) {
            return Err(VortexError::DegenerateSystem(format!("zero pivot at row {k}")));
        }
        Ok(TridiagLu { dl, d, du, du2, swapped })
    }
}

#[derive(Debug, Clone)]
pub(crate) struct TridiagLu {
    dl: Vec<C64>,
    d: Vec<C64>,
    du: Vec<C64>,
    du2: Vec<C64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    pub fn solve_in_place(&self, b: &mut [C64]) {
        let n = self.d.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                let temp = b[i] - self.dl[i] * b[i + 1];
                b[i] = b[i + 1];
                b[i + 1] = temp;
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

/// Solves `A x = b` followed by one step of iterative refinement.
pub(crate) fn solve_refined(a: &Tridiagonal, lu: &TridiagLu, b: &[C64]) -> Vec<C64> {
    let mut x = b.to_vec();
    lu.solve_in_place(&mut x);
    let ax = a.apply(&x);
    let mut corr: Vec<C64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    lu.solve_in_place(&mut corr);
    x.iter().zip(&corr).map(|(xi, ci)| xi + ci).collect()
}
