//! Model specification and treatment-coded design matrices.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Result, StatsError};
use crate::table::DataTable;

/// A categorical predictor. The reference level is coded as all-zero
/// dummies; the remaining levels follow `levels` when given, otherwise
/// lexicographic order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorSpec {
    pub name: String,
    pub reference: Option<String>,
    pub levels: Option<Vec<String>>,
}

impl FactorSpec {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            reference: None,
            levels: None,
        }
    }

    pub fn reference(mut self, level: impl Into<String>) -> Self {
        self.reference = Some(level.into());
        self
    }

    pub fn levels<S: Into<String>>(mut self, levels: impl IntoIterator<Item = S>) -> Self {
        self.levels = Some(levels.into_iter().map(Into::into).collect());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub response: String,
    pub fixed_factors: Vec<FactorSpec>,
    pub covariates: Vec<String>,
    pub interactions: Vec<(String, String)>,
    /// Column holding the random-intercept grouping (GLMM only).
    pub grouping: Option<String>,
}

impl ModelSpec {
    pub fn new(response: impl Into<String>) -> Self {
        Self {
            response: response.into(),
            fixed_factors: Vec::new(),
            covariates: Vec::new(),
            interactions: Vec::new(),
            grouping: None,
        }
    }

    pub fn factor(mut self, factor: FactorSpec) -> Self {
        self.fixed_factors.push(factor);
        self
    }

    pub fn covariate(mut self, name: impl Into<String>) -> Self {
        self.covariates.push(name.into());
        self
    }

    pub fn interaction(mut self, a: impl Into<String>, b: impl Into<String>) -> Self {
        self.interactions.push((a.into(), b.into()));
        self
    }

    pub fn grouping(mut self, name: impl Into<String>) -> Self {
        self.grouping = Some(name.into());
        self
    }

    /// Same spec without the named main effect and any interaction using it.
    pub fn without(&self, term: &str) -> ModelSpec {
        let mut spec = self.clone();
        spec.fixed_factors.retain(|f| f.name != term);
        spec.covariates.retain(|c| c != term);
        spec.interactions.retain(|(a, b)| a != term && b != term);
        spec
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Factor(usize),
    Covariate(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermKind {
    Intercept,
    Factor(usize),
    Covariate(usize),
    Interaction(Component, Component),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TermInfo {
    pub name: String,
    pub kind: TermKind,
    pub columns: Range<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorInfo {
    pub name: String,
    /// Reference level first.
    pub levels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovariateInfo {
    pub name: String,
    pub mean: f64,
}

/// Everything needed to rebuild design rows after fitting.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignInfo {
    pub response: String,
    pub columns: Vec<String>,
    pub terms: Vec<TermInfo>,
    pub factors: Vec<FactorInfo>,
    pub covariates: Vec<CovariateInfo>,
    /// Observation counts per combination of factor levels (indices into
    /// each factor's `levels`, in factor order).
    pub cells: BTreeMap<Vec<usize>, usize>,
    pub n_obs: usize,
}

impl DesignInfo {
    pub fn n_coef(&self) -> usize {
        self.columns.len()
    }

    pub fn term(&self, name: &str) -> Option<&TermInfo> {
        self.terms.iter().find(|t| t.name == name)
    }

    pub fn factor_index(&self, name: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.name == name)
    }

    /// Design row for the given level index per factor and covariate values.
    pub fn row(&self, levels: &[usize], covariates: &[f64]) -> DVector<f64> {
        let mut row = DVector::zeros(self.n_coef());
        for term in &self.terms {
            let start = term.columns.start;
            match term.kind {
                TermKind::Intercept => row[start] = 1.0,
                TermKind::Factor(f) => {
                    if levels[f] > 0 {
                        row[start + levels[f] - 1] = 1.0;
                    }
                }
                TermKind::Covariate(c) => row[start] = covariates[c],
                TermKind::Interaction(a, b) => {
                    let va = self.component_values(a, levels, covariates);
                    let vb = self.component_values(b, levels, covariates);
                    let mut k = start;
                    for x in &va {
                        for y in &vb {
                            row[k] = x * y;
                            k += 1;
                        }
                    }
                }
            }
        }
        row
    }

    fn component_values(&self, c: Component, levels: &[usize], covariates: &[f64]) -> Vec<f64> {
        match c {
            Component::Factor(f) => {
                let n = self.factors[f].levels.len() - 1;
                (1..=n).map(|j| f64::from(u8::from(levels[f] == j))).collect()
            }
            Component::Covariate(i) => vec![covariates[i]],
        }
    }

    fn component_width(&self, c: Component) -> usize {
        match c {
            Component::Factor(f) => self.factors[f].levels.len() - 1,
            Component::Covariate(_) => 1,
        }
    }

    fn component_names(&self, c: Component) -> Vec<String> {
        match c {
            Component::Factor(f) => {
                let fi = &self.factors[f];
                fi.levels[1..]
                    .iter()
                    .map(|l| format!("{}[{}]", fi.name, l))
                    .collect()
            }
            Component::Covariate(i) => vec![self.covariates[i].name.clone()],
        }
    }
}

/// Random-intercept grouping: observation indices per group.
#[derive(Debug, Clone, PartialEq)]
pub struct Grouping {
    pub name: String,
    pub labels: Vec<String>,
    pub members: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct Design {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub grouping: Option<Grouping>,
    pub info: DesignInfo,
}

impl Design {
    pub fn build(spec: &ModelSpec, table: &DataTable) -> Result<Design> {
        let n = table.nrows();
        let response = table.column(&spec.response)?;
        let y: Vec<f64> = (0..n)
            .map(|r| {
                response.numeric_at(r).ok_or_else(|| StatsError::MissingValue {
                    column: spec.response.clone(),
                    row: r,
                })
            })
            .collect::<Result<_>>()?;

        let mut factors = Vec::with_capacity(spec.fixed_factors.len());
        let mut level_idx: Vec<Vec<usize>> = Vec::with_capacity(spec.fixed_factors.len());
        for fs in &spec.fixed_factors {
            let col = table.column(&fs.name)?;
            let raw: Vec<String> = (0..n)
                .map(|r| {
                    col.level_at(r).ok_or_else(|| StatsError::MissingValue {
                        column: fs.name.clone(),
                        row: r,
                    })
                })
                .collect::<Result<_>>()?;
            let present: BTreeSet<&str> = raw.iter().map(String::as_str).collect();
            let mut levels: Vec<String> = match &fs.levels {
                Some(order) => {
                    if let Some(bad) = present.iter().find(|l| !order.iter().any(|o| o == *l)) {
                        return Err(StatsError::UndeclaredLevel {
                            factor: fs.name.clone(),
                            level: bad.to_string(),
                        });
                    }
                    order
                        .iter()
                        .filter(|l| present.contains(l.as_str()))
                        .cloned()
                        .collect()
                }
                None => present.iter().map(|s| s.to_string()).collect(),
            };
            if let Some(reference) = &fs.reference {
                let pos = levels.iter().position(|l| l == reference).ok_or_else(|| {
                    StatsError::UnknownReference {
                        factor: fs.name.clone(),
                        level: reference.clone(),
                    }
                })?;
                let r = levels.remove(pos);
                levels.insert(0, r);
            }
            let index: BTreeMap<&str, usize> = levels
                .iter()
                .enumerate()
                .map(|(i, l)| (l.as_str(), i))
                .collect();
            level_idx.push(raw.iter().map(|l| index[l.as_str()]).collect());
            factors.push(FactorInfo {
                name: fs.name.clone(),
                levels,
            });
        }

        let mut cov_values: Vec<Vec<f64>> = Vec::with_capacity(spec.covariates.len());
        let mut covariates = Vec::with_capacity(spec.covariates.len());
        for name in &spec.covariates {
            let col = table.column(name)?;
            let v: Vec<f64> = (0..n)
                .map(|r| {
                    col.numeric_at(r).ok_or_else(|| StatsError::MissingValue {
                        column: name.clone(),
                        row: r,
                    })
                })
                .collect::<Result<_>>()?;
            let mean = if n > 0 { v.iter().sum::<f64>() / n as f64 } else { 0.0 };
            covariates.push(CovariateInfo {
                name: name.clone(),
                mean,
            });
            cov_values.push(v);
        }

        let mut info = DesignInfo {
            response: spec.response.clone(),
            columns: vec!["(Intercept)".to_string()],
            terms: vec![TermInfo {
                name: "(Intercept)".to_string(),
                kind: TermKind::Intercept,
                columns: 0..1,
            }],
            factors,
            covariates,
            cells: BTreeMap::new(),
            n_obs: n,
        };

        for (f, fi) in info.factors.clone().iter().enumerate() {
            let comp = Component::Factor(f);
            let names = info.component_names(comp);
            push_term(&mut info, fi.name.clone(), TermKind::Factor(f), names);
        }
        for (i, ci) in info.covariates.clone().iter().enumerate() {
            push_term(&mut info, ci.name.clone(), TermKind::Covariate(i), vec![ci.name.clone()]);
        }
        for (a, b) in &spec.interactions {
            let ca = resolve_component(&info, a)?;
            let cb = resolve_component(&info, b)?;
            let mut names = Vec::new();
            for x in info.component_names(ca) {
                for y in info.component_names(cb) {
                    names.push(format!("{x}:{y}"));
                }
            }
            debug_assert_eq!(names.len(), info.component_width(ca) * info.component_width(cb));
            push_term(&mut info, format!("{a}:{b}"), TermKind::Interaction(ca, cb), names);
        }

        let p = info.n_coef();
        if n < p {
            return Err(StatsError::TooFewObservations { n, p });
        }
        let mut x = DMatrix::zeros(n, p);
        let mut levels_row = vec![0usize; info.factors.len()];
        let mut cov_row = vec![0.0; info.covariates.len()];
        for r in 0..n {
            for (f, idx) in level_idx.iter().enumerate() {
                levels_row[f] = idx[r];
            }
            for (i, v) in cov_values.iter().enumerate() {
                cov_row[i] = v[r];
            }
            *info.cells.entry(levels_row.clone()).or_insert(0) += 1;
            x.set_row(r, &info.row(&levels_row, &cov_row).transpose());
        }

        check_rank(&x, &info.columns)?;

        let grouping = match &spec.grouping {
            None => None,
            Some(g) => {
                let col = table.column(g)?;
                let mut index: BTreeMap<String, usize> = BTreeMap::new();
                let mut labels = Vec::new();
                let mut members: Vec<Vec<usize>> = Vec::new();
                for r in 0..n {
                    let key = col.level_at(r).ok_or_else(|| StatsError::MissingValue {
                        column: g.clone(),
                        row: r,
                    })?;
                    let gi = *index.entry(key.clone()).or_insert_with(|| {
                        labels.push(key);
                        members.push(Vec::new());
                        labels.len() - 1
                    });
                    members[gi].push(r);
                }
                Some(Grouping {
                    name: g.clone(),
                    labels,
                    members,
                })
            }
        };

        Ok(Design {
            x,
            y: DVector::from_vec(y),
            grouping,
            info,
        })
    }
}

fn push_term(info: &mut DesignInfo, name: String, kind: TermKind, names: Vec<String>) {
    let start = info.columns.len();
    info.columns.extend(names);
    let end = info.columns.len();
    info.terms.push(TermInfo {
        name,
        kind,
        columns: start..end,
    });
}

fn resolve_component(info: &DesignInfo, name: &str) -> Result<Component> {
    if let Some(f) = info.factor_index(name) {
        return Ok(Component::Factor(f));
    }
    info.covariates
        .iter()
        .position(|c| c.name == name)
        .map(Component::Covariate)
        .ok_or_else(|| StatsError::UnknownTerm(name.to_string()))
}

/// Fails with the names of columns that are (numerically) linear
/// combinations of the columns before them.
pub fn check_rank(x: &DMatrix<f64>, names: &[String]) -> Result<()> {
    let r = x.clone().qr().r();
    let aliased: Vec<String> = (0..x.ncols())
        .filter(|&j| {
            let norm = x.column(j).norm();
            norm == 0.0 || r[(j, j)].abs() <= 1e-9 * norm
        })
        .map(|j| names[j].clone())
        .collect();
    if aliased.is_empty() {
        Ok(())
    } else {
        Err(StatsError::RankDeficient(aliased))
    }
}
