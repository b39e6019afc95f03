//! Symmetric tridiagonal kernels: Sturm counts, bisection, linear solves.

/// Symmetric tridiagonal matrix given by its diagonal and off-diagonal.
#[derive(Debug, Clone)]
pub(crate) struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(diag.len(), off.len() + 1);
        Self { diag, off }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Number of eigenvalues strictly below `sigma` (LDL^T inertia).
    pub fn count_below(&self, sigma: f64) -> usize {
        let tiny = f64::MIN_POSITIVE.sqrt() * (1.0 + self.norm_inf());
        let mut count = 0;
        let mut pivot = self.diag[0] - sigma;
        if pivot == 0.0 {
            pivot = -tiny;
        }
        if pivot < 0.0 {
            count += 1;
        }
        for i in 1..self.dim() {
            let e = self.off[i - 1];
            pivot = self.diag[i] - sigma - e * e / pivot;
            if pivot == 0.0 {
                pivot = -tiny;
            }
            if pivot < 0.0 {
                count += 1;
            }
        }
        count
    }

    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    pub fn norm_inf(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs())
    }

    /// k-th smallest eigenvalue (1-based) by Sturm-sequence bisection.
    pub fn bisect_eigenvalue(&self, k: usize) -> f64 {
        debug_assert!(k >= 1 && k <= self.dim());
        let (mut lo, mut hi) = self.gershgorin();
        let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        lo -= 1e-12 * scale;
        hi += 1e-12 * scale;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                break;
            }
            if self.count_below(mid) >= k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Eigenvector for the eigenvalue approximation `sigma` from a twisted
    /// factorisation of `A - sigma I`. Components are generated by ratios
    /// of pivots, so entries many orders below the maximum keep their
    /// relative accuracy. When `sigma` lies below the whole spectrum and the
    /// off-diagonal is negative, every component is positive.
    pub fn twisted_eigenvector(&self, sigma: f64) -> Vec<f64> {
        let n = self.dim();
        let guard = |p: f64| if p == 0.0 { f64::MIN_POSITIVE } else { p };
        let mut fwd = vec![0.0; n];
        fwd[0] = guard(self.diag[0] - sigma);
        for i in 1..n {
            let e = self.off[i - 1];
            fwd[i] = guard(self.diag[i] - sigma - e * e / fwd[i - 1]);
        }
        let mut bwd = vec![0.0; n];
        bwd[n - 1] = guard(self.diag[n - 1] - sigma);
        for i in (0..n - 1).rev() {
            let e = self.off[i];
            bwd[i] = guard(self.diag[i] - sigma - e * e / bwd[i + 1]);
        }
        let twist = (0..n)
            .min_by(|&a, &b| {
                let ga = (fwd[a] + bwd[a] - (self.diag[a] - sigma)).abs();
                let gb = (fwd[b] + bwd[b] - (self.diag[b] - sigma)).abs();
                ga.total_cmp(&gb)
            })
            .unwrap_or(0);
        let mut z = vec![0.0; n];
        z[twist] = 1.0;
        for i in (0..twist).rev() {
            z[i] = -self.off[i] * z[i + 1] / fwd[i];
        }
        for i in twist + 1..n {
            z[i] = -self.off[i - 1] * z[i - 1] / bwd[i];
        }
        z
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y: Vec<f64> = self.diag.iter().zip(x).map(|(d, v)| d * v).collect();
        for i in 0..n - 1 {
            y[i] += self.off[i] * x[i + 1];
            y[i + 1] += self.off[i] * x[i];
        }
        y
    }

    /// Solves `(A - sigma I) x = b` by LU with partial pivoting. Exactly zero
    /// pivots are perturbed, which is what inverse iteration wants.
    pub fn solve_shifted(&self, sigma: f64, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let tiny = f64::EPSILON * self.norm_inf().max(1.0);
        // Row i of U holds up to three entries: u0 (diagonal), u1, u2.
        let mut d: Vec<f64> = self.diag.iter().map(|v| v - sigma).collect();
        let mut du: Vec<f64> = self.off.clone();
        let mut dl: Vec<f64> = self.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        let mut mult = vec![0.0; n.saturating_sub(1)];
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let m = dl[i] / d[i];
                mult[i] = m;
                d[i + 1] -= m * du[i];
            } else {
                // swap rows i and i+1
                swapped[i] = true;
                let m = d[i] / dl[i];
                mult[i] = m;
                d[i] = dl[i];
                let tmp = d[i + 1];
                d[i + 1] = du[i] - m * tmp;
                du[i] = tmp;
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -m * du2[i];
                }
            }
            dl[i] = 0.0;
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        let mut x = b.to_vec();
        for i in 0..n - 1 {
            if swapped[i] {
                x.swap(i, i + 1);
            }
            let xi = x[i];
            x[i + 1] -= mult[i] * xi;
        }
        x[n - 1] /= d[n - 1];
        if n >= 2 {
            x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
        }
        x
    }

    /// Thomas algorithm; only valid for diagonally dominant or SPD matrices.
    pub fn solve_spd(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut c = vec![0.0; n];
        let mut x = b.to_vec();
        let mut denom = self.diag[0];
        x[0] /= denom;
        for i in 1..n {
            c[i - 1] = self.off[i - 1] / denom;
            denom = self.diag[i] - self.off[i - 1] * c[i - 1];
            x[i] = (x[i] - self.off[i - 1] * x[i - 1]) / denom;
        }
        for i in (0..n - 1).rev() {
            x[i] -= c[i] * x[i + 1];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> SymTridiag {
        SymTridiag::new(vec![2.0; n], vec![-1.0; n - 1])
    }

    #[test]
    fn dirichlet_laplacian_spectrum() {
        // eigenvalues 2 - 2 cos(k pi / (n+1))
        let n = 50;
        let a = laplacian(n);
        for k in [1, 2, 17, 50] {
            let exact = 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos();
            assert!((a.bisect_eigenvalue(k) - exact).abs() < 1e-13, "k = {k}");
        }
        assert_eq!(a.count_below(0.0), 0);
        assert_eq!(a.count_below(4.0), n);
    }

    #[test]
    fn twisted_vector_of_laplacian() {
        let n = 60;
        let a = laplacian(n);
        let lam = a.bisect_eigenvalue(1);
        let z = a.twisted_eigenvector(lam);
        let scale = z[n / 2] / (std::f64::consts::PI * (n / 2 + 1) as f64 / (n as f64 + 1.0)).sin();
        for (i, v) in z.iter().enumerate() {
            let exact = (std::f64::consts::PI * (i + 1) as f64 / (n as f64 + 1.0)).sin();
            assert!((v / scale - exact).abs() < 1e-12, "i = {i}");
        }
    }

    #[test]
    fn twisted_vector_keeps_tiny_components() {
        // strong barrier on the right: the ground state decays by many
        // orders of magnitude and must stay positive
        let n = 400;
        let diag = (0..n).map(|i| if i < 50 { 2.0 } else { 2.0 + 1.0 }).collect();
        let a = SymTridiag::new(diag, vec![-1.0; n - 1]);
        let z = a.twisted_eigenvector(a.bisect_eigenvalue(1));
        assert!(z.iter().all(|v| *v > 0.0));
        assert!(z[n - 1] < 1e-60 * z[0]);
        let r = a.apply(&z);
        let lam = a.bisect_eigenvalue(1);
        for (i, (ri, zi)) in r.iter().zip(&z).enumerate() {
            assert!((ri - lam * zi).abs() <= 1e-13 * zi.abs().max(1e-300) + 1e-15, "i = {i}");
        }
    }

    #[test]
    fn shifted_solve_matches_apply() {
        let n = 40;
        let a = SymTridiag::new(
            (0..n).map(|i| (i as f64 * 0.37).sin()).collect(),
            (0..n - 1).map(|i| 1.0 + (i as f64 * 0.11).cos()).collect(),
        );
        let x0: Vec<f64> = (0..n).map(|i| (i as f64).sqrt() - 2.0).collect();
        for sigma in [0.3, -1.7, 2.2] {
            let mut b = a.apply(&x0);
            for (bi, xi) in b.iter_mut().zip(&x0) {
                *bi -= sigma * xi;
            }
            let x = a.solve_shifted(sigma, &b);
            for (u, v) in x.iter().zip(&x0) {
                assert!((u - v).abs() < 1e-9, "sigma {sigma}: {u} vs {v}");
            }
        }
    }

    #[test]
    fn spd_solve() {
        let a = SymTridiag::new(vec![4.0; 6], vec![-1.0; 5]);
        let x0 = [1.0, -2.0, 3.0, 0.5, 0.0, 7.0];
        let x = a.solve_spd(&a.apply(&x0));
        for (u, v) in x.iter().zip(&x0) {
            assert!((u - v).abs() < 1e-13);
        }
    }
}
