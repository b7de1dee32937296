//! Zero-sum matrix games solved as a linear program.
//!
//! The payoff matrix is shifted so every entry is at least one, and the
//! column player's program
//!
//! ```text
//! maximise Σ y_j   subject to   M' y <= 1,  y >= 0
//! ```
//!
//! is solved with a dense tableau simplex using Bland's rule. The optimal
//! objective is `1 / v'`; the column strategy is the normalised primal, and
//! the row strategy is read off the reduced costs of the slack columns. The
//! pivoting rule is fixed, so the equilibrium picked among several optimal
//! ones is reproducible.

use crate::error::{domain, Error, Result};

/// Reduced costs above `-COST_EPS` count as optimal.
const COST_EPS: f64 = 1e-12;
/// Smallest admissible pivot element; shifted entries are at least one.
const PIVOT_EPS: f64 = 1e-9;
/// Relative tolerance for ties in the ratio test.
const RATIO_EPS: f64 = 1e-12;
/// Accepted deviation gain of a floating-point solution, relative to the
/// largest payoff magnitude.
const CERTIFY_EPS: f64 = 1e-11;
const CLEAN_EPS: f64 = 1e-13;

/// Row-major payoff matrix for the row (maximising) player.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl PayoffMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(domain("payoff matrix needs at least one row and one column"));
        }
        if data.len() != rows * cols {
            return Err(domain(format!("payoff matrix {rows}x{cols} given {} entries", data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(domain("ragged payoff matrix"));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Row player's expected payoff of pure row `i` against `col`.
    pub fn row_payoff(&self, i: usize, col: &[f64]) -> f64 {
        self.data[i * self.cols..(i + 1) * self.cols].iter().zip(col).map(|(m, y)| m * y).sum()
    }

    /// Row player's expected payoff of `row` against pure column `j`.
    pub fn col_payoff(&self, row: &[f64], j: usize) -> f64 {
        row.iter().enumerate().map(|(i, x)| x * self.get(i, j)).sum()
    }

    pub fn expected(&self, row: &[f64], col: &[f64]) -> f64 {
        row.iter().enumerate().map(|(i, x)| x * self.row_payoff(i, col)).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixGameSolution {
    /// Maximiser's mixed strategy over rows.
    pub row: Vec<f64>,
    /// Minimiser's mixed strategy over columns.
    pub col: Vec<f64>,
    /// Game value for the row player.
    pub value: f64,
}

impl MatrixGameSolution {
    /// Largest gain either player could get by a unilateral pure deviation.
    pub fn max_deviation_gain(&self, m: &PayoffMatrix) -> f64 {
        let v = m.expected(&self.row, &self.col);
        let row_gain = (0..m.rows()).map(|i| m.row_payoff(i, &self.col) - v).fold(f64::MIN, f64::max);
        let col_gain = (0..m.cols()).map(|j| v - m.col_payoff(&self.row, j)).fold(f64::MIN, f64::max);
        row_gain.max(col_gain)
    }
}

/// Mixed equilibrium and value of the zero-sum game where the row player
/// maximises `m` and the column player minimises it.
///
/// Weakly dominated rows and columns are removed first (exact comparisons,
/// later index removed on equality). The floating-point simplex then
/// solves the reduced game; its answer is accepted only if no pure
/// deviation in the full game gains more than a rounding-level tolerance.
/// Otherwise the reduced game is re-solved in exact rational arithmetic on
/// the exact binary values of the entries. The reported value is
/// `x^T M y` of the returned strategies.
pub fn solve_matrix_game(m: &PayoffMatrix) -> Result<MatrixGameSolution> {
    if m.data.iter().any(|v| !v.is_finite()) {
        return Err(domain("payoff matrix has non-finite entries"));
    }
    let (keep_rows, keep_cols) = undominated(m);
    let reduced = if keep_rows.len() == m.rows && keep_cols.len() == m.cols {
        m.clone()
    } else {
        let data = keep_rows.iter().flat_map(|&i| keep_cols.iter().map(move |&j| m.get(i, j))).collect();
        PayoffMatrix::new(keep_rows.len(), keep_cols.len(), data)?
    };
    let expand = |s: MatrixGameSolution| {
        let mut row = vec![0.0; m.rows];
        let mut col = vec![0.0; m.cols];
        for (&i, p) in keep_rows.iter().zip(s.row) {
            row[i] = p;
        }
        for (&j, p) in keep_cols.iter().zip(s.col) {
            col[j] = p;
        }
        let value = m.expected(&row, &col);
        MatrixGameSolution { row, col, value }
    };
    if let Some(s) = float_simplex(&reduced) {
        let s = expand(s);
        let scale = m.data.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        if s.max_deviation_gain(m) <= CERTIFY_EPS * scale {
            return Ok(s);
        }
    }
    exact::solve(&reduced).map(expand)
}

/// Rows and columns surviving iterated weak dominance.
fn undominated(m: &PayoffMatrix) -> (Vec<usize>, Vec<usize>) {
    let mut rows: Vec<usize> = (0..m.rows).collect();
    let mut cols: Vec<usize> = (0..m.cols).collect();
    loop {
        let before = (rows.len(), cols.len());
        // Row `r` goes if an earlier survivor is >= everywhere, or a later
        // one is >= everywhere and > somewhere.
        let mut i = 0;
        while rows.len() > 1 && i < rows.len() {
            let r = rows[i];
            let dominated = rows.iter().enumerate().any(|(k, &o)| {
                k != i
                    && cols.iter().all(|&j| m.get(o, j) >= m.get(r, j))
                    && (k < i || cols.iter().any(|&j| m.get(o, j) > m.get(r, j)))
            });
            if dominated {
                rows.remove(i);
            } else {
                i += 1;
            }
        }
        let mut i = 0;
        while cols.len() > 1 && i < cols.len() {
            let c = cols[i];
            let dominated = cols.iter().enumerate().any(|(k, &o)| {
                k != i
                    && rows.iter().all(|&r| m.get(r, o) <= m.get(r, c))
                    && (k < i || rows.iter().any(|&r| m.get(r, o) < m.get(r, c)))
            });
            if dominated {
                cols.remove(i);
            } else {
                i += 1;
            }
        }
        if (rows.len(), cols.len()) == before {
            return (rows, cols);
        }
    }
}

fn float_simplex(m: &PayoffMatrix) -> Option<MatrixGameSolution> {
    let (rows, cols) = (m.rows, m.cols);
    let min = m.data.iter().copied().fold(f64::INFINITY, f64::min);
    let shift = 1.0 - min;

    // Tableau: `rows` constraint rows then the objective row; columns are
    // the `cols` decision variables, `rows` slacks and the right-hand side.
    let width = cols + rows + 1;
    let rhs = width - 1;
    let mut t = vec![0.0f64; (rows + 1) * width];
    for i in 0..rows {
        for j in 0..cols {
            t[i * width + j] = m.get(i, j) + shift;
        }
        t[i * width + cols + i] = 1.0;
        t[i * width + rhs] = 1.0;
    }
    let obj = rows * width;
    for j in 0..cols {
        t[obj + j] = -1.0;
    }
    let mut basis: Vec<usize> = (cols..cols + rows).collect();

    let max_pivots = 50 * (rows + cols) + 1000;
    let mut pivots = 0;
    loop {
        // Bland's rule: lowest-index improving column that has a pivot row.
        // The shifted program is bounded, so an improving column without a
        // positive entry only arises from rounding and is skipped.
        let mut choice = None;
        for enter in (0..cols + rows).filter(|&j| t[obj + j] < -COST_EPS) {
            if let Some(pr) = ratio_test(&t, width, rows, rhs, enter, &basis) {
                choice = Some((pr, enter));
                break;
            }
        }
        let Some((pr, enter)) = choice else {
            break;
        };
        pivot(&mut t, width, rows + 1, pr, enter);
        basis[pr] = enter;
        pivots += 1;
        if pivots > max_pivots {
            return None;
        }
    }

    let objective = t[obj + rhs];
    if !(objective > 0.0) {
        return None;
    }
    let mut col = vec![0.0; cols];
    for (i, &b) in basis.iter().enumerate() {
        if b < cols {
            col[b] = t[i * width + rhs];
        }
    }
    let mut row: Vec<f64> = (0..rows).map(|i| t[obj + cols + i]).collect();
    normalise(&mut col).ok()?;
    normalise(&mut row).ok()?;
    Some(MatrixGameSolution { row, col, value: 1.0 / objective - shift })
}

/// Minimum-ratio row for column `enter`, ties broken by the smallest basic
/// variable index.
fn ratio_test(t: &[f64], width: usize, rows: usize, rhs: usize, enter: usize, basis: &[usize]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for i in 0..rows {
        let a = t[i * width + enter];
        if a > PIVOT_EPS {
            let ratio = t[i * width + rhs] / a;
            best = match best {
                Some((b, r))
                    if !(ratio < r - RATIO_EPS * r.abs().max(1.0)
                        || (ratio <= r + RATIO_EPS * r.abs().max(1.0) && basis[i] < basis[b])) =>
                {
                    Some((b, r))
                }
                _ => Some((i, ratio)),
            };
        }
    }
    best.map(|(i, _)| i)
}

fn pivot(t: &mut [f64], width: usize, height: usize, pr: usize, pc: usize) {
    let p = t[pr * width + pc];
    for j in 0..width {
        t[pr * width + j] /= p;
    }
    t[pr * width + pc] = 1.0;
    for i in 0..height {
        if i == pr {
            continue;
        }
        let f = t[i * width + pc];
        if f != 0.0 {
            for j in 0..width {
                t[i * width + j] -= f * t[pr * width + j];
            }
            t[i * width + pc] = 0.0;
        }
    }
}

fn normalise(v: &mut [f64]) -> Result<()> {
    for x in v.iter_mut() {
        if *x < CLEAN_EPS {
            *x = 0.0;
        }
    }
    let total: f64 = v.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Internal("empty equilibrium strategy".into()));
    }
    for x in v.iter_mut() {
        *x /= total;
    }
    Ok(())
}

mod exact {
    use num_rational::BigRational;
    use num_traits::{One, Signed, ToPrimitive, Zero};

    use super::{normalise, MatrixGameSolution, PayoffMatrix};
    use crate::error::{Error, Result};

    fn rational(x: f64) -> BigRational {
        BigRational::from_float(x).expect("finite payoff")
    }

    fn to_f64(x: &BigRational) -> f64 {
        x.to_f64().unwrap_or(f64::NAN)
    }

    /// The floating-point tableau method with exact arithmetic; Bland's
    /// rule terminates without tolerances.
    pub(super) fn solve(m: &PayoffMatrix) -> Result<MatrixGameSolution> {
        let (rows, cols) = (m.rows(), m.cols());
        let min = m.data().iter().copied().fold(f64::INFINITY, f64::min);
        let shift = BigRational::one() - rational(min);
        let width = cols + rows + 1;
        let rhs = width - 1;
        let mut t = vec![BigRational::zero(); (rows + 1) * width];
        for i in 0..rows {
            for j in 0..cols {
                t[i * width + j] = rational(m.get(i, j)) + &shift;
            }
            t[i * width + cols + i] = BigRational::one();
            t[i * width + rhs] = BigRational::one();
        }
        let obj = rows * width;
        for j in 0..cols {
            t[obj + j] = -BigRational::one();
        }
        let mut basis: Vec<usize> = (cols..cols + rows).collect();

        while let Some(enter) = (0..cols + rows).find(|&j| t[obj + j].is_negative()) {
            let mut best: Option<(usize, BigRational)> = None;
            for i in 0..rows {
                let a = &t[i * width + enter];
                if a.is_positive() {
                    let ratio = &t[i * width + rhs] / a;
                    let better = match &best {
                        None => true,
                        Some((b, r)) => ratio < *r || (ratio == *r && basis[i] < basis[*b]),
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            let (pr, _) = best.ok_or_else(|| Error::Internal("matrix game LP unbounded".into()))?;
            let p = t[pr * width + enter].clone();
            for j in 0..width {
                t[pr * width + j] = &t[pr * width + j] / &p;
            }
            for i in 0..=rows {
                if i == pr || t[i * width + enter].is_zero() {
                    continue;
                }
                let f = t[i * width + enter].clone();
                for j in 0..width {
                    let delta = &f * &t[pr * width + j];
                    t[i * width + j] -= delta;
                }
            }
            basis[pr] = enter;
        }

        let objective = t[obj + rhs].clone();
        if !objective.is_positive() {
            return Err(Error::Internal("degenerate LP objective".into()));
        }
        let mut col = vec![0.0; cols];
        for (i, &b) in basis.iter().enumerate() {
            if b < cols {
                col[b] = to_f64(&(&t[i * width + rhs] / &objective));
            }
        }
        let mut row: Vec<f64> = (0..rows).map(|i| to_f64(&(&t[obj + cols + i] / &objective))).collect();
        normalise(&mut col)?;
        normalise(&mut row)?;
        let value = to_f64(&(objective.recip() - shift));
        Ok(MatrixGameSolution { row, col, value })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(rows: &[Vec<f64>]) -> MatrixGameSolution {
        solve_matrix_game(&PayoffMatrix::from_rows(rows).unwrap()).unwrap()
    }

    #[test]
    fn matching_pennies() {
        let s = solve(&[vec![1.0, -1.0], vec![-1.0, 1.0]]);
        assert!(s.value.abs() < 1e-12);
        for p in s.row.iter().chain(&s.col) {
            assert!((p - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn strict_dominance() {
        let s = solve(&[vec![1.0, 1.0], vec![0.0, 0.0]]);
        assert_eq!(s.row, vec![1.0, 0.0]);
        assert!((s.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rock_paper_scissors_variant() {
        let s = solve(&[vec![0.0, 2.0, -1.0], vec![-1.0, 0.0, 1.0], vec![1.0, -1.0, 0.0]]);
        assert!((s.value - 1.0 / 12.0).abs() < 1e-12);
        let want_row = [0.25, 1.0 / 3.0, 5.0 / 12.0];
        for (got, want) in s.row.iter().zip(want_row) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn single_cell() {
        let s = solve(&[vec![-0.7]]);
        assert_eq!(s.row, vec![1.0]);
        assert_eq!(s.col, vec![1.0]);
        assert!((s.value + 0.7).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_finite() {
        let m = PayoffMatrix::from_rows(&[vec![1.0, f64::NAN]]).unwrap();
        assert!(solve_matrix_game(&m).is_err());
        assert!(PayoffMatrix::new(0, 3, vec![]).is_err());
    }

    #[test]
    fn constant_matrix() {
        let rows = vec![vec![2.5; 4]; 3];
        let s = solve(&rows);
        assert!((s.value - 2.5).abs() < 1e-12);
        assert!(s.max_deviation_gain(&PayoffMatrix::from_rows(&rows).unwrap()) < 1e-12);
    }

    #[test]
    fn degenerate_near_ties() {
        // Full-horizon matrix of a nearly saturated jamming state; rows tie
        // to the last bit in several columns.
        let data = vec![
            0.06666666666666654,
            -0.19047619021245096,
            -0.36190476155310913,
            -0.46476190444541726,
            -0.5161904759794845,
            -0.5333333332454202,
            -0.53333333324542,
            -0.5333333331575063,
            0.02222222222222192,
            0.02222222222222192,
            -0.14920634885469666,
            -0.3549206342876601,
            -0.5092063485733743,
            -0.5777777774261252,
            -0.5777777776898644,
            -0.5777777747008154,
            0.0222222222222222,
            0.0222222222222222,
            0.022222222222222088,
            -0.14920634867886995,
            -0.4063492052942478,
            -0.5777777768986456,
            -0.5777777777777777,
            -0.5777777769662711,
            0.022222222222222254,
            0.022222222222222254,
            0.022222222222222254,
            0.022222222222222254,
            -0.23492063386567624,
            -0.5777777760195133,
            -0.5777777777777777,
            -0.5777777777777777,
            0.022222222222222088,
            0.022222222222222088,
            0.022222222222222088,
            0.022222222222222088,
            0.022222222222222088,
            -0.5777777747008153,
            -0.577777777777778,
            -0.577777777777778,
        ];
        let m = PayoffMatrix::new(5, 8, data).unwrap();
        let s = solve_matrix_game(&m).unwrap();
        assert!(s.max_deviation_gain(&m) < 1e-12, "{s:?}");

        // Same state one level deeper: columns five to seven agree to 1e-9.
        let data = vec![
            -1.9777777777777765,
            -2.234920634656894,
            -2.406349205997552,
            -2.5092063488898604,
            -2.5606349204239054,
            -2.577777777555987,
            -2.5777777773903567,
            -2.577777777107873,
            -1.977777777777776,
            -1.977777777777776,
            -2.149206348854695,
            -2.354920634287658,
            -2.509206348573372,
            -2.5777777774174555,
            -2.5777777777691084,
            -2.5777777777691084,
            -1.977777777777775,
            -1.977777777777775,
            -1.977777777777775,
            -2.149206348678867,
            -2.406349205294245,
            -2.5777777768986425,
            -2.577777777777775,
            -2.577777777777775,
            -1.977777777777777,
            -1.977777777777777,
            -1.977777777777777,
            -1.977777777777777,
            -2.2349206338656753,
            -2.5777777760195124,
            -2.5777777777777766,
            -2.5777777777777766,
            -1.9777777777777765,
            -1.9777777777777765,
            -1.9777777777777765,
            -1.9777777777777765,
            -1.9777777777777765,
            -2.577777774700814,
            -2.5777777777777766,
            -2.5777777777777766,
        ];
        let m = PayoffMatrix::new(5, 8, data).unwrap();
        let s = solve_matrix_game(&m).unwrap();
        assert!(s.max_deviation_gain(&m) < 1e-12, "{s:?}");
        let e = exact::solve(&m).unwrap();
        assert!(e.max_deviation_gain(&m) < 1e-15, "{e:?}");
        assert!((s.value - e.value).abs() < 1e-14);
    }

    #[test]
    fn exact_path_agrees_with_float_path() {
        let rows = vec![vec![0.0, 2.0, -1.0], vec![-1.0, 0.0, 1.0], vec![1.0, -1.0, 0.0]];
        let m = PayoffMatrix::from_rows(&rows).unwrap();
        let a = float_simplex(&m).unwrap();
        let b = exact::solve(&m).unwrap();
        assert!((a.value - b.value).abs() < 1e-15);
        for (x, y) in a.row.iter().zip(&b.row).chain(a.col.iter().zip(&b.col)) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn dominance_reduction() {
        let m = PayoffMatrix::from_rows(&[vec![3.0, 1.0, 4.0], vec![2.0, 0.0, 4.0], vec![3.0, 1.0, 4.0]]).unwrap();
        // Row 1 is dominated and row 2 duplicates row 0; column 0 and 2 are
        // dominated by column 1 for the minimiser.
        assert_eq!(undominated(&m), (vec![0], vec![1]));
        let s = solve_matrix_game(&m).unwrap();
        assert_eq!(s.row, vec![1.0, 0.0, 0.0]);
        assert_eq!(s.col, vec![0.0, 1.0, 0.0]);
        assert_eq!(s.value, 1.0);
    }

    #[test]
    fn deterministic() {
        let rows = vec![vec![0.3, 0.3, 0.1], vec![0.3, 0.3, 0.1], vec![0.2, 0.2, 0.2]];
        assert_eq!(solve(&rows), solve(&rows));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn matrices() -> impl Strategy<Value = PayoffMatrix> {
            (1usize..=6, 1usize..=8).prop_flat_map(|(r, c)| {
                // Coarse grid with tiny perturbations: lots of exact and near ties.
                prop::collection::vec((-4i32..=4, prop::bool::ANY), r * c).prop_map(move |cells| {
                    let data =
                        cells.into_iter().map(|(v, nudge)| v as f64 / 4.0 + if nudge { 1e-15 } else { 0.0 }).collect();
                    PayoffMatrix::new(r, c, data).unwrap()
                })
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(2000))]

            #[test]
            fn equilibrium_on_tie_heavy_matrices(m in matrices()) {
                let s = solve_matrix_game(&m).unwrap();
                prop_assert!(s.max_deviation_gain(&m) < 1e-9, "{:?}", s);
                prop_assert!((m.expected(&s.row, &s.col) - s.value).abs() < 1e-9);
                prop_assert!(s.row.iter().chain(&s.col).all(|p| *p >= 0.0));
            }
        }
    }
}
