//! Symmetric tridiagonal eigenvalues, including a relatively accurate
//! Sturm count for matrices of the form `B Bᵀ` with `B` upper bidiagonal.

/// Sum with Neumaier's compensation.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + comp
}

/// Eigenvalues (ascending) of the symmetric tridiagonal matrix with diagonal
/// `d` and off-diagonal `e` (`e.len() == d.len() - 1`), by implicit QL.
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(&off[..n.saturating_sub(1)]);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut early = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    d
}

/// `A = B Bᵀ` where `B` is `n × (n+1)` with `B[i][i] = -a[i]`, `B[i][i+1] = b[i]`,
/// all `a[i], b[i] > 0`. Pivots of `A − μ` are formed without cancellation.
#[derive(Debug, Clone)]
pub struct BidiagonalGram {
    a2: Vec<f64>,
    b2: Vec<f64>,
}

impl BidiagonalGram {
    pub fn new(a: &[f64], b: &[f64]) -> Self {
        assert_eq!(a.len(), b.len());
        BidiagonalGram { a2: a.iter().map(|x| x * x).collect(), b2: b.iter().map(|x| x * x).collect() }
    }

    pub fn len(&self) -> usize {
        self.a2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a2.is_empty()
    }

    /// Diagonal and off-diagonal of `A`.
    pub fn tridiagonal(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.len();
        let diag = (0..n).map(|i| self.a2[i] + self.b2[i]).collect();
        let off = (0..n.saturating_sub(1)).map(|i| -(self.b2[i] * self.a2[i + 1]).sqrt()).collect();
        (diag, off)
    }

    /// Pivots of the `LDLᵀ` factorization of `A − μ`.
    pub fn pivots(&self, mu: f64) -> Vec<f64> {
        let n = self.len();
        let mut out = Vec::with_capacity(n);
        if n == 0 {
            return out;
        }
        let mut s = self.a2[0] - mu;
        for i in 0..n {
            let p = self.b2[i] + s;
            out.push(p);
            if i + 1 < n {
                s = self.a2[i + 1] * s / p - mu;
            }
        }
        out
    }

    /// Number of eigenvalues strictly below `mu`.
    pub fn count_below(&self, mu: f64) -> usize {
        let n = self.len();
        if n == 0 {
            return 0;
        }
        let mut count = 0;
        let mut s = self.a2[0] - mu;
        for i in 0..n {
            let mut p = self.b2[i] + s;
            if p == 0.0 {
                p = -f64::MIN_POSITIVE;
            }
            if p < 0.0 {
                count += 1;
            }
            if i + 1 < n {
                s = self.a2[i + 1] * s / p - mu;
            }
        }
        count
    }

    /// `log det A` by Cauchy–Binet: deleting column `k` of `B` leaves a
    /// triangular matrix, so `det A = Σ_k ∏_{i<k} a_i² ∏_{i≥k} b_i²`.
    pub fn log_det(&self) -> f64 {
        let n = self.len();
        let lb = compensated_sum(self.b2.iter().map(|x| x.ln()));
        let mut partial = Vec::with_capacity(n + 1);
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        partial.push(0.0);
        for i in 0..n {
            let v = self.a2[i].ln() - self.b2[i].ln();
            let t = sum + v;
            comp += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
            sum = t;
            partial.push(sum + comp);
        }
        let top = partial.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        lb + top + compensated_sum(partial.iter().map(|p| (p - top).exp())).ln()
    }

    /// `Σ_i p_i'(μ)/p_i(μ) = −Σ_k 1/(λ_k − μ)` along the pivot recurrence.
    fn log_det_slope(&self, mu: f64) -> f64 {
        let n = self.len();
        let mut s = self.a2[0] - mu;
        let mut ds = -1.0;
        let mut acc = 0.0;
        for i in 0..n {
            let p = self.b2[i] + s;
            acc += ds / p;
            if i + 1 < n {
                let next = self.a2[i + 1] * s / p - mu;
                ds = self.a2[i + 1] * ds * self.b2[i] / (p * p) - 1.0;
                s = next;
            }
        }
        acc
    }

    fn brackets(&self, k: usize, mu: f64) -> bool {
        let w = 8.0 * f64::EPSILON * mu;
        self.count_below(mu - w) <= k && self.count_below(mu + w) > k
    }

    /// All eigenvalues (ascending) to high relative accuracy: QL estimates
    /// refined by Newton steps on `log det(A − μ)`, checked against
    /// [`count_below`](Self::count_below), with bisection as the fallback.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let (d, e) = self.tridiagonal();
        let rough = tridiagonal_eigenvalues(&d, &e);
        let norm = rough.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let slack = 64.0 * f64::EPSILON * norm * (self.len() as f64).sqrt();
        rough
            .iter()
            .enumerate()
            .map(|(k, &x)| {
                let mut mu = x;
                for _ in 0..8 {
                    let slope = self.log_det_slope(mu);
                    if !slope.is_finite() || slope == 0.0 {
                        break;
                    }
                    let next = mu - 1.0 / slope;
                    let done = (next - mu).abs() <= 2.0 * f64::EPSILON * next.abs();
                    mu = next;
                    if done {
                        break;
                    }
                }
                if mu > 0.0 && (mu - x).abs() <= slack && self.brackets(k, mu) {
                    mu
                } else {
                    self.bisect(k, x, slack)
                }
            })
            .collect()
    }

    fn bisect(&self, k: usize, x: f64, slack: f64) -> f64 {
        let mut lo = (x - slack).max(0.0);
        let mut hi = x + slack;
        while self.count_below(lo) > k {
            lo *= 0.5;
            if lo < f64::MIN_POSITIVE {
                lo = 0.0;
                break;
            }
        }
        while self.count_below(hi) <= k {
            hi = hi * 2.0 + slack;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}
