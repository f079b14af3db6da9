//! Exact phase-one simplex for `A w = b, w ≥ 0`.
//!
//! Minimizes the sum of artificial variables using Dantzig's entering rule
//! with the lexicographic ratio test, which cannot cycle. On infeasibility
//! the optimal phase-one duals `y` form a Farkas certificate: `y·A_j ≤ 0` for
//! every column and `y·b > 0`.
//!
//! The tableau first runs over `i64` fractions with checked arithmetic and
//! restarts over big rationals if anything overflows; both paths are exact.

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};

use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq)]
pub enum Feasibility {
    /// A nonnegative solution of `A w = b`.
    Feasible(Vec<Rational>),
    /// Duals with `y·A_j ≤ 0` for all `j` and `y·b > 0`.
    Infeasible(Vec<Rational>),
}

/// Exact ordered field; `None` signals overflow.
trait Field: Clone + Ord + Sized {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn is_positive(&self) -> bool;
    fn neg(&self) -> Self;
    fn add(&self, other: &Self) -> Option<Self>;
    fn sub(&self, other: &Self) -> Option<Self>;
    fn mul(&self, other: &Self) -> Option<Self>;
    fn div(&self, other: &Self) -> Option<Self>;
    fn to_big(&self) -> Rational;
}

impl Field for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn neg(&self) -> Self {
        -self
    }
    fn add(&self, other: &Self) -> Option<Self> {
        Some(self + other)
    }
    fn sub(&self, other: &Self) -> Option<Self> {
        Some(self - other)
    }
    fn mul(&self, other: &Self) -> Option<Self> {
        Some(self * other)
    }
    fn div(&self, other: &Self) -> Option<Self> {
        Some(self / other)
    }
    fn to_big(&self) -> Rational {
        self.clone()
    }
}

type Small = Ratio<i64>;

impl Field for Small {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn neg(&self) -> Self {
        -self
    }
    fn add(&self, other: &Self) -> Option<Self> {
        self.checked_add(other)
    }
    fn sub(&self, other: &Self) -> Option<Self> {
        self.checked_sub(other)
    }
    fn mul(&self, other: &Self) -> Option<Self> {
        self.checked_mul(other)
    }
    fn div(&self, other: &Self) -> Option<Self> {
        self.checked_div(other)
    }
    fn to_big(&self) -> Rational {
        Rational::new((*self.numer()).into(), (*self.denom()).into())
    }
}

fn to_small(v: &Rational) -> Option<Small> {
    // keep headroom so that negation and cross products stay checkable
    let num = v.numer().to_i64().filter(|x| x.unsigned_abs() < 1 << 62)?;
    let den = v.denom().to_i64().filter(|x| *x < 1 << 62)?;
    Some(Small::new(num, den))
}

enum Outcome<F> {
    Feasible(Vec<F>),
    Infeasible(Vec<F>),
}

struct Tableau<F> {
    rows: Vec<Vec<F>>,
    rhs: Vec<F>,
    /// Reduced costs of all columns (originals then artificials).
    cost: Vec<F>,
    basis: Vec<usize>,
}

impl<F: Field> Tableau<F> {
    fn pivot(&mut self, row: usize, col: usize) -> Option<()> {
        let pivot = self.rows[row][col].clone();
        for v in self.rows[row].iter_mut().filter(|v| !v.is_zero()) {
            *v = v.div(&pivot)?;
        }
        self.rhs[row] = self.rhs[row].div(&pivot)?;
        let support: Vec<usize> = (0..self.rows[row].len()).filter(|&j| !self.rows[row][j].is_zero()).collect();
        let prow = std::mem::take(&mut self.rows[row]);
        let prhs = self.rhs[row].clone();
        for i in 0..self.rows.len() {
            if i == row || self.rows[i][col].is_zero() {
                continue;
            }
            let factor = self.rows[i][col].clone();
            for &j in &support {
                self.rows[i][j] = self.rows[i][j].sub(&factor.mul(&prow[j])?)?;
            }
            self.rhs[i] = self.rhs[i].sub(&factor.mul(&prhs)?)?;
        }
        if !self.cost[col].is_zero() {
            let factor = self.cost[col].clone();
            for &j in &support {
                self.cost[j] = self.cost[j].sub(&factor.mul(&prow[j])?)?;
            }
        }
        self.rows[row] = prow;
        self.basis[row] = col;
        Some(())
    }

    /// Leaving row for entering column `col` under the lexicographic rule.
    fn leaving_row(&self, col: usize, k: usize) -> Option<usize> {
        let mut candidates: Vec<(usize, F)> = Vec::new();
        for (i, row) in self.rows.iter().enumerate() {
            if row[col].is_positive() {
                candidates.push((i, self.rhs[i].div(&row[col])?));
            }
        }
        // the phase-one objective is bounded below by zero
        assert!(!candidates.is_empty(), "phase-one objective cannot be unbounded");
        let best = candidates.iter().map(|(_, r)| r).min()?.clone();
        candidates.retain(|(_, r)| *r == best);
        let mut lex = k;
        while candidates.len() > 1 {
            for (i, key) in candidates.iter_mut() {
                *key = self.rows[*i][lex].div(&self.rows[*i][col])?;
            }
            let best = candidates.iter().map(|(_, r)| r).min()?.clone();
            candidates.retain(|(_, r)| *r == best);
            lex += 1;
        }
        Some(candidates[0].0)
    }
}

fn solve<F: Field>(a: &[Vec<F>], b: &[F]) -> Option<Outcome<F>> {
    let m = a.len();
    let k = a.first().map_or(0, |r| r.len());
    let total = k + m;

    // flip rows so that b ≥ 0; remember the signs for the duals
    let signs: Vec<bool> = b.iter().map(|v| v.is_negative()).collect();
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for (i, (row, bi)) in a.iter().zip(b).enumerate() {
        assert_eq!(row.len(), k, "ragged constraint matrix");
        let mut r: Vec<F> = Vec::with_capacity(total);
        if signs[i] {
            r.extend(row.iter().map(|v| v.neg()));
            rhs.push(bi.neg());
        } else {
            r.extend(row.iter().cloned());
            rhs.push(bi.clone());
        }
        r.extend((0..m).map(|j| if j == i { F::one() } else { F::zero() }));
        rows.push(r);
    }
    // reduced cost of original column j is -Σ_i rows[i][j]; artificials start at 0
    let mut cost = vec![F::zero(); total];
    for r in &rows {
        for (c, v) in cost.iter_mut().zip(&r[..k]) {
            if !v.is_zero() {
                *c = c.sub(v)?;
            }
        }
    }
    let mut t = Tableau { rows, rhs, cost, basis: (k..total).collect() };

    // Every row of `[rhs | B^-1]` starts and stays lexicographically positive,
    // so the objective row strictly increases lexicographically and no basis
    // repeats.
    loop {
        // artificials never re-enter; the certificate only needs the original columns
        let entering =
            (0..k).filter(|&j| t.cost[j].is_negative()).min_by(|&i, &j| t.cost[i].cmp(&t.cost[j]).then(i.cmp(&j)));
        let Some(col) = entering else { break };
        let row = t.leaving_row(col, k)?;
        t.pivot(row, col)?;
    }

    let mut objective = F::zero();
    for i in (0..m).filter(|&i| t.basis[i] >= k) {
        objective = objective.add(&t.rhs[i])?;
    }
    if objective.is_zero() {
        let mut w = vec![F::zero(); k];
        for i in 0..m {
            if t.basis[i] < k {
                w[t.basis[i]] = t.rhs[i].clone();
            }
        }
        Some(Outcome::Feasible(w))
    } else {
        // y = c_B B^{-1}; B^{-1} sits in the artificial columns
        let mut y = Vec::with_capacity(m);
        for (col, &negated) in signs.iter().enumerate().take(m) {
            let mut v = F::zero();
            for r in (0..m).filter(|&r| t.basis[r] >= k) {
                v = v.add(&t.rows[r][k + col])?;
            }
            y.push(if negated { v.neg() } else { v });
        }
        Some(Outcome::Infeasible(y))
    }
}

fn widen<F: Field>(outcome: Outcome<F>) -> Feasibility {
    match outcome {
        Outcome::Feasible(w) => Feasibility::Feasible(w.iter().map(F::to_big).collect()),
        Outcome::Infeasible(y) => Feasibility::Infeasible(y.iter().map(F::to_big).collect()),
    }
}

/// `a` is row-major with every row of equal length.
pub fn phase_one(a: &[Vec<Rational>], b: &[Rational]) -> Feasibility {
    assert_eq!(a.len(), b.len(), "row count mismatch");
    let small_a: Option<Vec<Vec<Small>>> = a.iter().map(|r| r.iter().map(to_small).collect()).collect();
    let small_b: Option<Vec<Small>> = b.iter().map(to_small).collect();
    if let (Some(sa), Some(sb)) = (small_a, small_b) {
        if let Some(outcome) = solve(&sa, &sb) {
            return widen(outcome);
        }
    }
    widen(solve(a, b).expect("big rationals do not overflow"))
}
