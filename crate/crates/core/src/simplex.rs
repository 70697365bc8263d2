//! Exact two-phase simplex over rationals.
//!
//! Dense tableau with Dantzig pricing and a fallback to Bland's rule on long
//! degenerate runs, so the method always terminates. Row operations skip
//! zero entries, which keeps the sparse scheduling LPs fast enough without a
//! revised implementation.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    /// `None` declares a free variable.
    pub lower: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub coefficients: BTreeMap<VarId, Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn lhs(&self, values: &[Rational]) -> Rational {
        self.coefficients.iter().map(|(v, a)| a * &values[v.0]).sum()
    }

    pub fn is_satisfied(&self, values: &[Rational]) -> bool {
        let lhs = self.lhs(values);
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Eq => lhs == self.rhs,
            Relation::Ge => lhs >= self.rhs,
        }
    }
}

/// `minimize objective · x` subject to linear constraints and lower bounds.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinearProgram {
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective: BTreeMap<VarId, Rational>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(&mut self, name: impl Into<String>, lower: Option<Rational>) -> VarId {
        self.variables.push(Variable { name: name.into(), lower });
        VarId(self.variables.len() - 1)
    }

    /// Adds `Σ a·x (relation) rhs`; repeated variables are summed, zero terms dropped.
    pub fn add_constraint(
        &mut self,
        terms: impl IntoIterator<Item = (VarId, Rational)>,
        relation: Relation,
        rhs: Rational,
    ) {
        self.constraints.push(Constraint { coefficients: collect_terms(terms), relation, rhs });
    }

    pub fn set_objective(&mut self, terms: impl IntoIterator<Item = (VarId, Rational)>) {
        self.objective = collect_terms(terms);
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &BTreeMap<VarId, Rational> {
        &self.objective
    }

    pub fn variable_by_name(&self, name: &str) -> Option<VarId> {
        self.variables.iter().position(|v| v.name == name).map(VarId)
    }

    pub fn objective_value(&self, values: &[Rational]) -> Rational {
        self.objective.iter().map(|(v, c)| c * &values[v.0]).sum()
    }

    /// Whether `values` satisfies every constraint and lower bound exactly.
    pub fn is_feasible(&self, values: &[Rational]) -> bool {
        values.len() == self.variables.len()
            && self.variables.iter().zip(values).all(|(v, x)| v.lower.as_ref().is_none_or(|l| x >= l))
            && self.constraints.iter().all(|c| c.is_satisfied(values))
    }

    fn check_references(&self) -> Result<()> {
        let n = self.variables.len();
        let bad =
            self.constraints.iter().flat_map(|c| c.coefficients.keys()).chain(self.objective.keys()).find(|v| v.0 >= n);
        match bad {
            Some(v) => Err(Error::MalformedLp(format!("reference to undeclared variable #{} ({} declared)", v.0, n))),
            None => Ok(()),
        }
    }
}

fn collect_terms(terms: impl IntoIterator<Item = (VarId, Rational)>) -> BTreeMap<VarId, Rational> {
    let mut out: BTreeMap<VarId, Rational> = BTreeMap::new();
    for (v, a) in terms {
        *out.entry(v).or_default() += a;
    }
    out.retain(|_, a| !a.is_zero());
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpSolution {
    pub values: Vec<Rational>,
    pub value: Rational,
}

impl LpSolution {
    pub fn get(&self, v: VarId) -> &Rational {
        &self.values[v.0]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<LpSolution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, LpOutcome::Infeasible)
    }
}

/// How an original variable maps onto nonnegative tableau columns.
enum Column {
    Shifted { col: usize, offset: Rational },
    Split { pos: usize, neg: usize },
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    /// Reduced costs; the last entry is minus the current objective value.
    costs: Vec<Rational>,
    basis: Vec<usize>,
    width: usize,
}

/// Consecutive degenerate pivots tolerated before falling back to Bland's rule.
const DEGENERATE_RUN: usize = 50;

enum Phase {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn rhs(&self, row: usize) -> &Rational {
        &self.rows[row][self.width]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let pivot = self.rows[row][col].clone();
        let nonzero: Vec<usize> = (0..=self.width).filter(|&j| !self.rows[row][j].is_zero()).collect();
        if pivot != 1 {
            let inv = pivot.recip().expect("pivot is nonzero");
            for &j in &nonzero {
                self.rows[row][j] *= &inv;
            }
        }
        let pivot_row = std::mem::take(&mut self.rows[row]);
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row || r[col].is_zero() {
                continue;
            }
            let factor = r[col].clone();
            for &j in &nonzero {
                r[j].sub_mul_assign(&factor, &pivot_row[j]);
            }
        }
        if !self.costs[col].is_zero() {
            let factor = self.costs[col].clone();
            for &j in &nonzero {
                self.costs[j].sub_mul_assign(&factor, &pivot_row[j]);
            }
        }
        self.rows[row] = pivot_row;
        self.basis[row] = col;
    }

    /// Dantzig's rule (most negative reduced cost, lowest index on ties).
    /// After a run of degenerate pivots it switches to Bland's rule until
    /// the objective moves again, which rules out cycling.
    fn run(&mut self, allowed: &[bool]) -> Phase {
        let mut degenerate = 0;
        loop {
            let entering = if degenerate < DEGENERATE_RUN {
                (0..self.width)
                    .filter(|&j| allowed[j] && self.costs[j].is_negative())
                    .min_by(|&a, &b| self.costs[a].cmp(&self.costs[b]).then(a.cmp(&b)))
            } else {
                (0..self.width).find(|&j| allowed[j] && self.costs[j].is_negative())
            };
            let Some(col) = entering else {
                return Phase::Optimal;
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                let better = match &best {
                    None => true,
                    Some((k, r)) => ratio < *r || (ratio == *r && self.basis[i] < self.basis[*k]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((row, ratio)) => {
                    if ratio.is_zero() {
                        degenerate += 1;
                    } else {
                        degenerate = 0;
                    }
                    self.pivot(row, col)
                }
                None => return Phase::Unbounded,
            }
        }
    }
}

pub fn solve(lp: &LinearProgram) -> Result<LpOutcome> {
    lp.check_references()?;

    let mut columns = Vec::with_capacity(lp.variables.len());
    let mut ncols = 0;
    for v in &lp.variables {
        match &v.lower {
            Some(l) => {
                columns.push(Column::Shifted { col: ncols, offset: l.clone() });
                ncols += 1;
            }
            None => {
                columns.push(Column::Split { pos: ncols, neg: ncols + 1 });
                ncols += 2;
            }
        }
    }
    let structural = ncols;

    // Rows over structural columns with the bound shift applied, rhs ≥ 0.
    let mut rows: Vec<(BTreeMap<usize, Rational>, Relation, Rational)> = Vec::new();
    for c in &lp.constraints {
        let mut coeffs = BTreeMap::new();
        let mut rhs = c.rhs.clone();
        for (v, a) in &c.coefficients {
            match &columns[v.0] {
                Column::Shifted { col, offset } => {
                    rhs -= a * offset;
                    coeffs.insert(*col, a.clone());
                }
                Column::Split { pos, neg } => {
                    coeffs.insert(*pos, a.clone());
                    coeffs.insert(*neg, -a);
                }
            }
        }
        let mut relation = c.relation;
        if rhs.is_negative() {
            rhs = -rhs;
            for a in coeffs.values_mut() {
                *a = -&*a;
            }
            relation = match relation {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
        if coeffs.is_empty() {
            let holds = match relation {
                Relation::Le => true,
                Relation::Ge | Relation::Eq => rhs.is_zero(),
            };
            if holds {
                continue;
            }
            return Ok(LpOutcome::Infeasible);
        }
        rows.push((coeffs, relation, rhs));
    }

    let slack_count = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let artificial_count = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let first_artificial = structural + slack_count;
    let width = first_artificial + artificial_count;

    let mut tableau = Tableau {
        rows: Vec::with_capacity(rows.len()),
        costs: vec![Rational::zero(); width + 1],
        basis: Vec::with_capacity(rows.len()),
        width,
    };
    let mut next_slack = structural;
    let mut next_artificial = first_artificial;
    for (coeffs, relation, rhs) in rows {
        let mut row = vec![Rational::zero(); width + 1];
        for (j, a) in coeffs {
            row[j] = a;
        }
        row[width] = rhs;
        let basic = match relation {
            Relation::Le => {
                row[next_slack] = Rational::one();
                next_slack += 1;
                next_slack - 1
            }
            Relation::Ge => {
                row[next_slack] = -Rational::one();
                next_slack += 1;
                row[next_artificial] = Rational::one();
                next_artificial += 1;
                next_artificial - 1
            }
            Relation::Eq => {
                row[next_artificial] = Rational::one();
                next_artificial += 1;
                next_artificial - 1
            }
        };
        tableau.rows.push(row);
        tableau.basis.push(basic);
    }

    // Phase 1: minimize the sum of artificials.
    if artificial_count > 0 {
        for (i, row) in tableau.rows.iter().enumerate() {
            if tableau.basis[i] >= first_artificial {
                for (j, a) in row.iter().enumerate() {
                    if j < first_artificial || j == width {
                        tableau.costs[j] -= a;
                    }
                }
            }
        }
        let allowed = vec![true; width];
        if let Phase::Unbounded = tableau.run(&allowed) {
            return Err(Error::Internal("phase one cannot be unbounded".into()));
        }
        if !tableau.costs[width].is_zero() {
            return Ok(LpOutcome::Infeasible);
        }
        // Drive remaining zero-level artificials out of the basis.
        let mut i = 0;
        while i < tableau.rows.len() {
            if tableau.basis[i] >= first_artificial {
                match (0..first_artificial).find(|&j| !tableau.rows[i][j].is_zero()) {
                    Some(col) => {
                        tableau.pivot(i, col);
                        i += 1;
                    }
                    None => {
                        tableau.rows.remove(i);
                        tableau.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
    }

    // Phase 2 over structural and slack columns.
    let mut costs = vec![Rational::zero(); width + 1];
    let mut constant = Rational::zero();
    for (v, c) in &lp.objective {
        match &columns[v.0] {
            Column::Shifted { col, offset } => {
                costs[*col] += c;
                constant += c * offset;
            }
            Column::Split { pos, neg } => {
                costs[*pos] += c;
                costs[*neg] -= c;
            }
        }
    }
    for (i, &b) in tableau.basis.iter().enumerate() {
        if costs[b].is_zero() {
            continue;
        }
        let factor = costs[b].clone();
        for (j, a) in tableau.rows[i].iter().enumerate() {
            if !a.is_zero() {
                costs[j].sub_mul_assign(&factor, a);
            }
        }
    }
    tableau.costs = costs;
    let allowed: Vec<bool> = (0..width).map(|j| j < first_artificial).collect();
    if let Phase::Unbounded = tableau.run(&allowed) {
        return Ok(LpOutcome::Unbounded);
    }

    let mut column_values = vec![Rational::zero(); width];
    for (i, &b) in tableau.basis.iter().enumerate() {
        column_values[b] = tableau.rhs(i).clone();
    }
    let values: Vec<Rational> = columns
        .iter()
        .map(|c| match c {
            Column::Shifted { col, offset } => &column_values[*col] + offset,
            Column::Split { pos, neg } => &column_values[*pos] - &column_values[*neg],
        })
        .collect();

    let value = lp.objective_value(&values);
    if value != &constant - &tableau.costs[width] {
        return Err(Error::Internal("objective value disagrees with the tableau".into()));
    }
    if !lp.is_feasible(&values) {
        return Err(Error::Internal("simplex returned an infeasible point".into()));
    }
    Ok(LpOutcome::Optimal(LpSolution { values, value }))
}
