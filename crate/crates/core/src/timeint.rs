//! Explicit Runge–Kutta methods, their stability polynomials and regions.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TABLEAU_TOL: f64 = 1e-14;

/// Slack on `|p(z)| ≤ 1` so that boundary points survive roundoff.
pub const REGION_SLACK: f64 = 1e-14;

/// Explicit Butcher tableau. `a` is stored as full `s × s` rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ButcherTableau {
    pub stages: usize,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    /// Declared order of accuracy, when known.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
}

/// On-disk form; `c` is derived from the row sums of `a` when absent.
#[derive(Debug, Deserialize)]
struct TableauDoc {
    stages: usize,
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    #[serde(default)]
    c: Option<Vec<f64>>,
    #[serde(default)]
    order: Option<usize>,
}

impl ButcherTableau {
    /// Validates shape, explicitness, `Σ b = 1` and `c_i = Σ_j a_ij`.
    ///
    /// Rows of `a` may be given ragged (row `i` with `i` entries); they are
    /// zero-padded to length `s`.
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>, c: Option<Vec<f64>>) -> Result<Self> {
        let s = b.len();
        if s == 0 {
            return Err(Error::InvalidTableau("at least one stage is required".into()));
        }
        if a.len() != s {
            return Err(Error::InvalidTableau(format!("a has {} rows, expected {s}", a.len())));
        }
        let mut full = Vec::with_capacity(s);
        for (i, row) in a.into_iter().enumerate() {
            if row.len() > s {
                return Err(Error::InvalidTableau(format!("row {} of a is longer than {s}", i + 1)));
            }
            if let Some((j, _)) = row.iter().enumerate().find(|&(j, v)| j >= i && *v != 0.0) {
                return Err(Error::InvalidTableau(format!(
                    "a[{}][{}] is non-zero; tableau must be explicit",
                    i + 1,
                    j + 1
                )));
            }
            let mut row = row;
            row.resize(s, 0.0);
            full.push(row);
        }
        let row_sums: Vec<f64> = full.iter().map(|r| r.iter().sum()).collect();
        let c = match c {
            Some(c) => {
                if c.len() != s {
                    return Err(Error::InvalidTableau(format!("c has {} entries, expected {s}", c.len())));
                }
                for (i, (ci, si)) in c.iter().zip(&row_sums).enumerate() {
                    if (ci - si).abs() > TABLEAU_TOL {
                        return Err(Error::InvalidTableau(format!(
                            "c[{}] = {ci} differs from row sum {si}",
                            i + 1
                        )));
                    }
                }
                c
            }
            None => row_sums,
        };
        let bsum: f64 = b.iter().sum();
        if (bsum - 1.0).abs() > TABLEAU_TOL {
            return Err(Error::InvalidTableau(format!("weights sum to {bsum}, expected 1")));
        }
        if b.iter().chain(c.iter()).chain(full.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidTableau("non-finite entry".into()));
        }
        Ok(Self {
            stages: s,
            a: full,
            b,
            c,
            order: None,
        })
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.order = Some(order);
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TableauDoc = serde_json::from_str(text)?;
        if doc.stages != doc.b.len() {
            return Err(Error::InvalidTableau(format!(
                "stages = {} but b has {} entries",
                doc.stages,
                doc.b.len()
            )));
        }
        let t = Self::new(doc.a, doc.b, doc.c)?;
        Ok(match doc.order {
            Some(o) => t.with_order(o),
            None => t,
        })
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn stability_polynomial(&self) -> StabilityPolynomial {
        stability_polynomial(self)
    }
}

/// `p_s(z)` as coefficients, constant term first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityPolynomial {
    pub coeffs: Vec<f64>,
}

impl StabilityPolynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.coeffs.len() > 1 && *self.coeffs.last().unwrap() == 0.0 {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.coeffs.push(0.0);
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        eval_p(self, z)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        in_stability_region(self, z)
    }
}

/// Stage polynomials `π_1 = 1`, `π_i = 1 + z Σ_{j<i} a_ij π_j`, then
/// `p_s = 1 + z Σ_j b_j π_j`.
pub fn stability_polynomial(tab: &ButcherTableau) -> StabilityPolynomial {
    let s = tab.stages;
    let mut stage: Vec<Vec<f64>> = Vec::with_capacity(s);
    let combine = |weights: &[f64], stage: &[Vec<f64>]| {
        let mut out = vec![0.0; stage.len() + 1];
        out[0] = 1.0;
        for (w, pj) in weights.iter().zip(stage) {
            for (d, c) in pj.iter().enumerate() {
                out[d + 1] += w * c;
            }
        }
        out
    };
    for i in 0..s {
        let pi = combine(&tab.a[i][..i], &stage);
        stage.push(pi);
    }
    StabilityPolynomial::new(combine(&tab.b, &stage))
}

/// Horner evaluation.
pub fn eval_p(p: &StabilityPolynomial, z: Complex64) -> Complex64 {
    p.coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

pub fn in_stability_region(p: &StabilityPolynomial, z: Complex64) -> bool {
    eval_p(p, z).norm() <= 1.0 + REGION_SLACK
}

fn tab(a: Vec<Vec<f64>>, b: Vec<f64>, order: usize) -> ButcherTableau {
    ButcherTableau::new(a, b, None)
        .expect("builtin tableau is valid")
        .with_order(order)
}

/// Built-in explicit methods keyed by CLI name.
pub fn builtin_tableaux() -> BTreeMap<&'static str, ButcherTableau> {
    let mut m = BTreeMap::new();
    m.insert("fe", tab(vec![vec![]], vec![1.0], 1));
    m.insert("rk2", tab(vec![vec![], vec![0.5]], vec![0.0, 1.0], 2));
    m.insert("rk2-ssp", tab(vec![vec![], vec![1.0]], vec![0.5, 0.5], 2));
    m.insert(
        "rk3",
        tab(
            vec![vec![], vec![1.0 / 3.0], vec![0.0, 2.0 / 3.0]],
            vec![0.25, 0.0, 0.75],
            3,
        ),
    );
    m.insert(
        "rk3-ssp",
        tab(
            vec![vec![], vec![1.0], vec![0.25, 0.25]],
            vec![1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
            3,
        ),
    );
    m.insert(
        "lsrk3",
        tab(
            vec![vec![], vec![0.5], vec![0.0, 1.0], vec![0.0, 0.0, 1.0]],
            vec![1.0 / 6.0, 2.0 / 3.0, 0.0, 1.0 / 6.0],
            3,
        ),
    );
    m.insert(
        "rk4",
        tab(
            vec![vec![], vec![0.5], vec![0.0, 0.5], vec![0.0, 0.0, 1.0]],
            vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
            4,
        ),
    );
    m.insert(
        "rk4-38",
        tab(
            vec![vec![], vec![1.0 / 3.0], vec![-1.0 / 3.0, 1.0], vec![1.0, -1.0, 1.0]],
            vec![0.125, 0.375, 0.375, 0.125],
            4,
        ),
    );
    m
}

pub fn builtin(name: &str) -> Result<ButcherTableau> {
    builtin_tableaux()
        .remove(name.to_ascii_lowercase().as_str())
        .ok_or_else(|| Error::UnknownTableau(name.to_string()))
}

/// Builtin name, or a path to a JSON tableau document.
pub fn resolve(name_or_path: &str) -> Result<ButcherTableau> {
    match builtin(name_or_path) {
        Ok(t) => Ok(t),
        Err(e) => {
            let path = Path::new(name_or_path);
            if path.is_file() {
                ButcherTableau::from_json_file(path)
            } else {
                Err(e)
            }
        }
    }
}

/// Dense check that the left half-disk wedge
/// `{ |z| < eps, Re z < -slope·(Im z)² }` lies in the stability region.
///
/// Samples a polar grid of `n_r × n_phi` points on the half-disk plus the
/// parabola boundary itself.
pub fn wedge_contained(p: &StabilityPolynomial, eps: f64, slope: f64, n_r: usize, n_phi: usize) -> bool {
    let polar = (1..=n_r).flat_map(|i| {
        let rho = eps * i as f64 / (n_r as f64 + 1.0);
        (0..=n_phi).map(move |j| {
            let phi = std::f64::consts::FRAC_PI_2 + std::f64::consts::PI * j as f64 / n_phi as f64;
            Complex64::from_polar(rho, phi)
        })
    });
    let parabola = (1..=n_r).flat_map(|i| {
        let y = eps * i as f64 / (n_r as f64 + 1.0);
        [Complex64::new(-slope * y * y, y), Complex64::new(-slope * y * y, -y)]
    });
    polar
        .chain(parabola)
        .filter(|z| z.norm() < eps && z.re <= -slope * z.im * z.im)
        .all(|z| in_stability_region(p, z))
}

/// Largest `eps` of the form `2^{-k}` (k ≤ 10) for which the wedge test
/// passes, or `None` when even `2^{-10}` fails. Smaller radii would put
/// `|p(z)| - 1` below the region slack and certify nothing.
pub fn certified_wedge_radius(p: &StabilityPolynomial, slope: f64) -> Option<f64> {
    (0..=10)
        .map(|k| 0.5f64.powi(k))
        .find(|&eps| wedge_contained(p, eps, slope, 200, 200))
}
