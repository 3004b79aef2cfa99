//! Independent reference implementations used to check the statistics
//! pipeline. p-values come from adaptive-Simpson quadrature of the
//! distribution densities (self-normalizing, no gamma functions shared with
//! the implementation under test); the statistics themselves are recomputed
//! from their textbook definitions with naive accumulation.

/// Adaptive Simpson quadrature with a relative tolerance.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, m: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
    }
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        m: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let lm = (a + m) / 2.0;
        let rm = (m + b) / 2.0;
        let left = simpson(f, a, lm, m);
        let right = simpson(f, m, rm, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, lm, m, left, tol / 2.0, depth - 1)
            + recurse(f, m, rm, b, right, tol / 2.0, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let m = (a + b) / 2.0;
    let whole = simpson(f, a, m, b);
    // Scale the absolute tolerance to a first estimate of the magnitude.
    let scale = whole.abs().max(1e-300);
    recurse(f, a, m, b, whole, rel_tol * scale, 60)
}

/// Regularized incomplete beta I_x(a, b) by quadrature after the t = sin^2
/// substitution, which removes the endpoint singularities for a, b >= 1/2:
/// the integrand becomes 2 sin^{2a-1} cos^{2b-1}.
pub fn inc_beta_reg_oracle(a: f64, b: f64, x: f64) -> f64 {
    assert!(a >= 0.5 && b >= 0.5, "oracle valid for a,b >= 1/2");
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let integrand =
        |theta: f64| 2.0 * theta.sin().powf(2.0 * a - 1.0) * theta.cos().powf(2.0 * b - 1.0);
    let split = x.sqrt().asin();
    let lower = adaptive_simpson(&integrand, 0.0, split, 1e-13);
    let upper = adaptive_simpson(&integrand, split, std::f64::consts::FRAC_PI_2, 1e-13);
    lower / (lower + upper)
}

/// erfc by quadrature of the Gaussian tail (z >= 0).
pub fn erfc_oracle(z: f64) -> f64 {
    let f = |t: f64| (-t * t).exp();
    // e^{-(z+14)^2} underflows; the truncated remainder is far below any
    // tolerance used here.
    2.0 / std::f64::consts::PI.sqrt() * adaptive_simpson(&f, z, z + 14.0, 1e-13)
}

/// Upper chi-square tail by the half-integer recurrence
/// Q(a+1, y) = Q(a, y) + y^a e^{-y} / Gamma(a+1), anchored at
/// Q(1/2, y) = erfc(sqrt(y)) and Q(1, y) = e^{-y}.
pub fn chi2_sf_oracle(x: f64, df: u64) -> f64 {
    assert!(df >= 1);
    let y = x / 2.0;
    if y <= 0.0 {
        return 1.0;
    }
    let (mut a, mut q, mut term) = if df % 2 == 0 {
        // a = 1: term for the step to a = 2 is y e^{-y} / 1!.
        (1.0, (-y).exp(), y * (-y).exp())
    } else {
        // a = 1/2: term to a = 3/2 is y^{1/2} e^{-y} / Gamma(3/2).
        (
            0.5,
            erfc_oracle(y.sqrt()),
            2.0 * (y / std::f64::consts::PI).sqrt() * (-y).exp(),
        )
    };
    let target = df as f64 / 2.0;
    while a + 0.5 <= target + 1e-9 {
        q += term;
        a += 1.0;
        term *= y / a;
    }
    q
}

pub fn t_sf_two_sided_oracle(t: f64, df: f64) -> f64 {
    inc_beta_reg_oracle(df / 2.0, 0.5, df / (df + t * t))
}

pub fn f_sf_oracle(f: f64, d1: f64, d2: f64) -> f64 {
    if f <= 0.0 {
        return 1.0;
    }
    inc_beta_reg_oracle(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f))
}

// ---------------------------------------------------------------------------
// Reference statistics, computed straight from the definitions.
// ---------------------------------------------------------------------------

pub struct RefTest {
    pub statistic: f64,
    pub p: f64,
}

pub fn anova_reference(groups: &[Vec<f64>]) -> RefTest {
    let all: Vec<f64> = groups.iter().flatten().copied().collect();
    let grand = all.iter().sum::<f64>() / all.len() as f64;
    let mut ssb = 0.0;
    let mut ssw = 0.0;
    for g in groups {
        let m = g.iter().sum::<f64>() / g.len() as f64;
        ssb += g.len() as f64 * (m - grand).powi(2);
        for v in g {
            ssw += (v - m).powi(2);
        }
    }
    let df_b = groups.len() as f64 - 1.0;
    let df_w = all.len() as f64 - groups.len() as f64;
    let f = (ssb / df_b) / (ssw / df_w);
    RefTest {
        statistic: f,
        p: f_sf_oracle(f, df_b, df_w),
    }
}

pub fn chi_square_reference(table: &[Vec<f64>]) -> RefTest {
    let rows = table.len();
    let cols = table[0].len();
    let total: f64 = table.iter().flatten().sum();
    let mut chi2 = 0.0;
    for i in 0..rows {
        let row_sum: f64 = table[i].iter().sum();
        for j in 0..cols {
            let col_sum: f64 = table.iter().map(|r| r[j]).sum();
            let expected = row_sum * col_sum / total;
            chi2 += (table[i][j] - expected).powi(2) / expected;
        }
    }
    let df = (rows - 1) * (cols - 1);
    RefTest {
        statistic: chi2,
        p: chi2_sf_oracle(chi2, df as u64),
    }
}

pub fn welch_reference(a: &[f64], b: &[f64]) -> RefTest {
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let var = |xs: &[f64]| {
        let m = mean(xs);
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
    };
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (va, vb) = (var(a), var(b));
    let se2 = va / na + vb / nb;
    let t = (mean(a) - mean(b)) / se2.sqrt();
    let df = se2 * se2 / ((va / na).powi(2) / (na - 1.0) + (vb / nb).powi(2) / (nb - 1.0));
    RefTest {
        statistic: t,
        p: t_sf_two_sided_oracle(t, df),
    }
}

/// Naive O(n^2) average ranks.
fn ranks_reference(xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .map(|&x| {
            let less = xs.iter().filter(|&&y| y < x).count() as f64;
            let equal = xs.iter().filter(|&&y| y == x).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

pub fn spearman_reference(x: &[f64], y: &[f64]) -> RefTest {
    let rx = ranks_reference(x);
    let ry = ranks_reference(y);
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let sxy: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    let rho = sxy / (sxx * syy).sqrt();
    let df = n - 2.0;
    let p = if rho.abs() >= 1.0 {
        0.0
    } else {
        t_sf_two_sided_oracle(rho * (df / (1.0 - rho * rho)).sqrt(), df)
    };
    RefTest { statistic: rho, p }
}
