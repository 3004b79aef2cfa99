//! The statistical battery: one-way ANOVA, chi-square independence, Welch t,
//! Spearman correlation, and Bonferroni adjustment, with p-values computed
//! from internally implemented special functions (no numeric dependencies).

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::events::FeatureRow;

pub mod special {
    //! Regularized incomplete beta and gamma functions.
    //!
    //! Incomplete beta uses the standard continued fraction with the
    //! symmetry switch at x = (a+1)/(a+b+2); incomplete gamma switches from
    //! the power series to a Lentz continued fraction at x = a+1.

    const MAX_ITER: usize = 500;
    const EPS: f64 = 3e-16;
    const TINY: f64 = 1e-300;

    /// ln Gamma(z) for z > 0, Lanczos approximation (g = 7, 9 terms).
    pub fn ln_gamma(z: f64) -> f64 {
        const COEFFS: [f64; 8] = [
            676.5203681218851,
            -1259.1392167224028,
            771.32342877765313,
            -176.61502916214059,
            12.507343278686905,
            -0.13857109526572012,
            9.9843695780195716e-6,
            1.5056327351493116e-7,
        ];
        if z < 0.5 {
            // Reflection for small z keeps the series in its accurate range.
            let pi = core::f64::consts::PI;
            return libm::log(pi / libm::sin(pi * z)) - ln_gamma(1.0 - z);
        }
        let z = z - 1.0;
        let mut x = 0.99999999999980993;
        for (i, c) in COEFFS.iter().enumerate() {
            x += c / (z + i as f64 + 1.0);
        }
        let t = z + 7.5;
        0.5 * libm::log(2.0 * core::f64::consts::PI) + (z + 0.5) * libm::log(t) - t
            + libm::log(x)
    }

    fn betacf(a: f64, b: f64, x: f64) -> f64 {
        let qab = a + b;
        let qap = a + 1.0;
        let qam = a - 1.0;
        let mut c = 1.0;
        let mut d = 1.0 - qab * x / qap;
        if d.abs() < TINY {
            d = TINY;
        }
        d = 1.0 / d;
        let mut h = d;
        for m in 1..=MAX_ITER {
            let m = m as f64;
            let m2 = 2.0 * m;
            let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
            d = 1.0 + aa * d;
            if d.abs() < TINY {
                d = TINY;
            }
            c = 1.0 + aa / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            h *= d * c;
            let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
            d = 1.0 + aa * d;
            if d.abs() < TINY {
                d = TINY;
            }
            c = 1.0 + aa / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < EPS {
                break;
            }
        }
        h
    }

    /// Regularized incomplete beta I_x(a, b), for a, b > 0 and x in [0, 1].
    pub fn inc_beta_reg(a: f64, b: f64, x: f64) -> f64 {
        debug_assert!(a > 0.0 && b > 0.0 && (0.0..=1.0).contains(&x));
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let ln_bt = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b)
            + a * libm::log(x)
            + b * libm::log(1.0 - x);
        let bt = libm::exp(ln_bt);
        if x < (a + 1.0) / (a + b + 2.0) {
            bt * betacf(a, b, x) / a
        } else {
            1.0 - bt * betacf(b, a, 1.0 - x) / b
        }
    }

    /// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
    pub fn inc_gamma_lower_reg(a: f64, x: f64) -> f64 {
        let (p, _q) = inc_gamma_pair(a, x);
        p
    }

    /// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
    pub fn inc_gamma_upper_reg(a: f64, x: f64) -> f64 {
        let (_p, q) = inc_gamma_pair(a, x);
        q
    }

    fn inc_gamma_pair(a: f64, x: f64) -> (f64, f64) {
        debug_assert!(a > 0.0 && x >= 0.0);
        if x == 0.0 {
            return (0.0, 1.0);
        }
        let ln_pref = -x + a * libm::log(x) - ln_gamma(a);
        let pref = libm::exp(ln_pref);
        if x < a + 1.0 {
            // Series: P(a,x) = pref * sum_n x^n / (a (a+1) ... (a+n)).
            let mut ap = a;
            let mut term = 1.0 / a;
            let mut sum = term;
            for _ in 0..MAX_ITER {
                ap += 1.0;
                term *= x / ap;
                sum += term;
                if term.abs() < sum.abs() * EPS {
                    break;
                }
            }
            let p = pref * sum;
            (p, 1.0 - p)
        } else {
            // Lentz continued fraction for Q(a,x).
            let mut b = x + 1.0 - a;
            let mut c = 1.0 / TINY;
            let mut d = 1.0 / b;
            let mut h = d;
            for i in 1..=MAX_ITER {
                let an = -(i as f64) * (i as f64 - a);
                b += 2.0;
                d = an * d + b;
                if d.abs() < TINY {
                    d = TINY;
                }
                c = b + an / c;
                if c.abs() < TINY {
                    c = TINY;
                }
                d = 1.0 / d;
                let del = d * c;
                h *= del;
                if (del - 1.0).abs() < EPS {
                    break;
                }
            }
            let q = pref * h;
            (1.0 - q, q)
        }
    }

    /// Upper tail of the F distribution with (d1, d2) degrees of freedom.
    pub fn f_sf(f: f64, d1: f64, d2: f64) -> f64 {
        if !f.is_finite() {
            return 0.0;
        }
        if f <= 0.0 {
            return 1.0;
        }
        inc_beta_reg(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f))
    }

    /// Two-sided tail of Student's t with `df` degrees of freedom.
    pub fn t_sf_two_sided(t: f64, df: f64) -> f64 {
        if !t.is_finite() {
            return 0.0;
        }
        inc_beta_reg(df / 2.0, 0.5, df / (df + t * t))
    }

    /// Upper tail of the chi-square distribution with `df` degrees of
    /// freedom.
    pub fn chi2_sf(x: f64, df: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        inc_gamma_upper_reg(df / 2.0, x / 2.0)
    }
}

/// Degrees of freedom of a test.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Df {
    One(f64),
    Pair(f64, f64),
}

/// Outcome of a single statistical test.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TestResult {
    pub label: String,
    pub statistic: f64,
    pub df: Df,
    pub p_value: f64,
}

/// Why a test could not run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StatsError {
    /// ANOVA needs at least two groups of at least two samples.
    GroupTooSmall { group: usize },
    TooFewGroups,
    /// A contingency row or column sums to zero.
    ZeroMarginal { axis: &'static str, index: usize },
    NotRectangular,
    TooSmallTable,
    LengthMismatch,
    TooFewSamples,
    /// Both samples have zero variance at different means (Welch t), or a
    /// rank vector is constant (Spearman).
    ZeroVariance,
    NonFinite,
}

impl core::fmt::Display for StatsError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            StatsError::GroupTooSmall { group } => {
                write!(f, "group {group} has fewer than 2 samples")
            }
            StatsError::TooFewGroups => write!(f, "need at least 2 groups"),
            StatsError::ZeroMarginal { axis, index } => {
                write!(f, "{axis} {index} has zero total")
            }
            StatsError::NotRectangular => write!(f, "table rows have unequal lengths"),
            StatsError::TooSmallTable => write!(f, "need at least a 2x2 table"),
            StatsError::LengthMismatch => write!(f, "inputs have different lengths"),
            StatsError::TooFewSamples => write!(f, "too few samples"),
            StatsError::ZeroVariance => write!(f, "zero variance"),
            StatsError::NonFinite => write!(f, "non-finite input"),
        }
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn check_finite(xs: &[f64]) -> Result<(), StatsError> {
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    Ok(())
}

/// Fixed-effects one-way ANOVA: F = (SSB/dfB) / (SSW/dfW), p from the F
/// upper tail.
pub fn one_way_anova<G: AsRef<[f64]>>(groups: &[G]) -> Result<TestResult, StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::TooFewGroups);
    }
    for (i, g) in groups.iter().enumerate() {
        if g.as_ref().len() < 2 {
            return Err(StatsError::GroupTooSmall { group: i });
        }
        check_finite(g.as_ref())?;
    }
    let k = groups.len();
    let n: usize = groups.iter().map(|g| g.as_ref().len()).sum();
    let grand: f64 = groups.iter().flat_map(|g| g.as_ref().iter()).sum::<f64>() / n as f64;
    let mut ssb = 0.0;
    let mut ssw = 0.0;
    for g in groups {
        let xs = g.as_ref();
        let m = mean(xs);
        ssb += xs.len() as f64 * (m - grand) * (m - grand);
        ssw += xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>();
    }
    let df_b = (k - 1) as f64;
    let df_w = (n - k) as f64;
    let (f, p) = if ssw == 0.0 {
        if ssb == 0.0 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY, 0.0)
        }
    } else {
        let f = (ssb / df_b) / (ssw / df_w);
        (f, special::f_sf(f, df_b, df_w))
    };
    Ok(TestResult {
        label: "one-way ANOVA".to_string(),
        statistic: f,
        df: Df::Pair(df_b, df_w),
        p_value: p,
    })
}

/// Pearson chi-square test of independence over a contingency table of
/// counts.
pub fn chi_square_independence<R: AsRef<[f64]>>(table: &[R]) -> Result<TestResult, StatsError> {
    if table.len() < 2 {
        return Err(StatsError::TooSmallTable);
    }
    let cols = table[0].as_ref().len();
    if cols < 2 {
        return Err(StatsError::TooSmallTable);
    }
    if table.iter().any(|r| r.as_ref().len() != cols) {
        return Err(StatsError::NotRectangular);
    }
    let rows = table.len();
    let mut row_sum = alloc::vec![0.0; rows];
    let mut col_sum = alloc::vec![0.0; cols];
    let mut total = 0.0;
    for (i, r) in table.iter().enumerate() {
        for (j, &v) in r.as_ref().iter().enumerate() {
            if !(v.is_finite() && v >= 0.0) {
                return Err(StatsError::NonFinite);
            }
            row_sum[i] += v;
            col_sum[j] += v;
            total += v;
        }
    }
    for (i, &s) in row_sum.iter().enumerate() {
        if s == 0.0 {
            return Err(StatsError::ZeroMarginal { axis: "row", index: i });
        }
    }
    for (j, &s) in col_sum.iter().enumerate() {
        if s == 0.0 {
            return Err(StatsError::ZeroMarginal { axis: "column", index: j });
        }
    }
    let mut chi2 = 0.0;
    for (i, r) in table.iter().enumerate() {
        for (j, &o) in r.as_ref().iter().enumerate() {
            let e = row_sum[i] * col_sum[j] / total;
            chi2 += (o - e) * (o - e) / e;
        }
    }
    let df = ((rows - 1) * (cols - 1)) as f64;
    Ok(TestResult {
        label: "chi-square independence".to_string(),
        statistic: chi2,
        df: Df::One(df),
        p_value: special::chi2_sf(chi2, df),
    })
}

fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Welch's unequal-variance t test, two-sided, with Welch-Satterthwaite
/// degrees of freedom.
pub fn welch_t(a: &[f64], b: &[f64]) -> Result<TestResult, StatsError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(StatsError::TooFewSamples);
    }
    check_finite(a)?;
    check_finite(b)?;
    let (ma, mb) = (mean(a), mean(b));
    let (va, vb) = (sample_variance(a), sample_variance(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let se2 = va / na + vb / nb;
    if se2 == 0.0 {
        return if ma == mb {
            Ok(TestResult {
                label: "Welch t".to_string(),
                statistic: 0.0,
                df: Df::One(na + nb - 2.0),
                p_value: 1.0,
            })
        } else {
            Err(StatsError::ZeroVariance)
        };
    }
    let t = (ma - mb) / libm::sqrt(se2);
    let df = se2 * se2 / ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
    Ok(TestResult {
        label: "Welch t".to_string(),
        statistic: t,
        df: Df::One(df),
        p_value: special::t_sf_two_sided(t, df),
    })
}

/// Average ranks (1-based), ties sharing the mean of their rank span.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| xs[i].partial_cmp(&xs[j]).expect("finite values"));
    let mut ranks = alloc::vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            ranks[idx[k]] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with the t-approximation p-value (n - 2 df).
pub fn spearman(x: &[f64], y: &[f64]) -> Result<TestResult, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch);
    }
    let n = x.len();
    if n < 3 {
        return Err(StatsError::TooFewSamples);
    }
    check_finite(x)?;
    check_finite(y)?;
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let (mx, my) = (mean(&rx), mean(&ry));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        let dx = rx[i] - mx;
        let dy = ry[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let rho = sxy / libm::sqrt(sxx * syy);
    let df = (n - 2) as f64;
    let p = if rho.abs() >= 1.0 {
        0.0
    } else {
        let t = rho * libm::sqrt(df / (1.0 - rho * rho));
        special::t_sf_two_sided(t, df)
    };
    Ok(TestResult {
        label: "Spearman rho".to_string(),
        statistic: rho,
        df: Df::One(df),
        p_value: p,
    })
}

/// Bonferroni-adjusted p-values: `min(1, p * m)`. `m` defaults to the number
/// of p-values.
pub fn bonferroni_adjust(p_values: &[f64], m: Option<usize>) -> Vec<f64> {
    let m = m.unwrap_or(p_values.len()).max(1) as f64;
    p_values.iter().map(|p| (p * m).min(1.0)).collect()
}

/// Bonferroni-adjusted significance level: `alpha / m`.
pub fn bonferroni_alpha(alpha: f64, m: usize) -> f64 {
    alpha / m.max(1) as f64
}

// ---------------------------------------------------------------------------
// The analysis battery over feature rows.
// ---------------------------------------------------------------------------

/// The six numeric variables of the battery, named as in the report tables.
pub const NUMERIC_VARIABLES: [&str; 6] = [
    "Fixation index in trial",
    "Average pupil size",
    "Average of both eyes microsaccade's rate",
    "Binocular microsaccade's rate",
    "Binocular microsaccade average duration",
    "Fixation duration",
];

/// The five categorical variables the battery tests against.
pub const CATEGORICAL_VARIABLES: [&str; 5] = [
    "Emotions",
    "RoI Label",
    "Face region",
    "Participant ID",
    "Interest Period Index",
];

fn numeric_value(row: &FeatureRow, variable: usize) -> f64 {
    match variable {
        0 => row.fixation_index_in_trial as f64,
        1 => row.avg_pupil_au,
        2 => row.avg_monocular_ms_rate_hz,
        3 => row.binocular_ms_rate_hz,
        4 => row.binocular_ms_avg_duration_ms,
        5 => row.fixation_duration_ms,
        _ => unreachable!(),
    }
}

/// Categorical level of a row, `None` when the row does not apply (face
/// fields of word fixations are none-sentinels and are excluded from these
/// tests).
fn categorical_value(row: &FeatureRow, variable: usize) -> Option<String> {
    match variable {
        0 => row.emotion_of_fixated_face.map(|e| e.as_str().to_string()),
        1 => row.roi_label.map(|r| r.as_str().to_string()),
        2 => row.face_region.map(|g| g.as_str().to_string()),
        3 => Some(row.participant_id.clone()),
        4 => Some(format!("{}", row.interest_period_index)),
        _ => unreachable!(),
    }
}

/// A battery cell that was actually tested.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TestedCell {
    pub statistic: f64,
    pub df: Df,
    pub p_value: f64,
    pub p_adjusted: f64,
    pub significant: bool,
}

/// A battery cell: either a result or the reason it could not run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CellOutcome {
    Tested(TestedCell),
    InsufficientLevels,
}

/// One ANOVA cell: numeric variable x categorical variable.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AnovaCell {
    pub variable: String,
    pub category: String,
    pub outcome: CellOutcome,
}

/// One chi-square cell: categorical variable pair.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChiSquareCell {
    pub variable_a: String,
    pub variable_b: String,
    pub outcome: CellOutcome,
}

/// The full battery report: 6x5 ANOVA cells and the 10 categorical pairs,
/// Bonferroni-adjusted across every test performed.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BatteryReport {
    pub alpha: f64,
    pub tests_performed: usize,
    pub anova: Vec<AnovaCell>,
    pub chi_square: Vec<ChiSquareCell>,
}

/// Run every ANOVA (numeric x categorical) and chi-square (categorical pair)
/// test over the rows, with Bonferroni correction at `alpha` across all
/// performed tests.
pub fn run_analysis_battery(rows: &[FeatureRow], alpha: f64) -> BatteryReport {
    let mut anova_raw = Vec::new();
    for (ci, cat) in CATEGORICAL_VARIABLES.iter().enumerate() {
        for (ni, num) in NUMERIC_VARIABLES.iter().enumerate() {
            let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
            for row in rows {
                if let Some(level) = categorical_value(row, ci) {
                    groups.entry(level).or_default().push(numeric_value(row, ni));
                }
            }
            let usable: Vec<Vec<f64>> = groups.into_values().filter(|g| g.len() >= 2).collect();
            let result = if usable.len() >= 2 {
                one_way_anova(&usable).ok()
            } else {
                None
            };
            anova_raw.push((num.to_string(), cat.to_string(), result));
        }
    }

    let mut chi_raw = Vec::new();
    for i in 0..CATEGORICAL_VARIABLES.len() {
        for j in (i + 1)..CATEGORICAL_VARIABLES.len() {
            let mut counts: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
            let mut col_levels: alloc::collections::BTreeSet<String> =
                alloc::collections::BTreeSet::new();
            for row in rows {
                let (Some(a), Some(b)) = (categorical_value(row, i), categorical_value(row, j))
                else {
                    continue;
                };
                col_levels.insert(b.clone());
                *counts.entry(a).or_default().entry(b).or_default() += 1.0;
            }
            let result = if counts.len() >= 2 && col_levels.len() >= 2 {
                let table: Vec<Vec<f64>> = counts
                    .values()
                    .map(|row| {
                        col_levels
                            .iter()
                            .map(|c| row.get(c).copied().unwrap_or(0.0))
                            .collect()
                    })
                    .collect();
                chi_square_independence(&table).ok()
            } else {
                None
            };
            chi_raw.push((
                CATEGORICAL_VARIABLES[i].to_string(),
                CATEGORICAL_VARIABLES[j].to_string(),
                result,
            ));
        }
    }

    let tests_performed = anova_raw.iter().filter(|(_, _, r)| r.is_some()).count()
        + chi_raw.iter().filter(|(_, _, r)| r.is_some()).count();
    let adjust = |r: Option<TestResult>| match r {
        Some(r) => {
            let p_adjusted = (r.p_value * tests_performed as f64).min(1.0);
            CellOutcome::Tested(TestedCell {
                statistic: r.statistic,
                df: r.df,
                p_value: r.p_value,
                p_adjusted,
                significant: p_adjusted < alpha,
            })
        }
        None => CellOutcome::InsufficientLevels,
    };

    BatteryReport {
        alpha,
        tests_performed,
        anova: anova_raw
            .into_iter()
            .map(|(variable, category, r)| AnovaCell {
                variable,
                category,
                outcome: adjust(r),
            })
            .collect(),
        chi_square: chi_raw
            .into_iter()
            .map(|(variable_a, variable_b, r)| ChiSquareCell {
                variable_a,
                variable_b,
                outcome: adjust(r),
            })
            .collect(),
    }
}
