/// Minimum-cost assignment of every row to a distinct column
/// (Kuhn-Munkres with potentials). Requires `rows <= cols`. Returns the
/// column chosen for each row.
pub fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    let m = cost[0].len();
    assert!(n <= m, "assignment needs rows <= cols ({n} > {m})");
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            let row = &cost[i0 - 1];
            for j in 1..=m {
                if !used[j] {
                    let cur = row[j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut ans = vec![0; n];
    for j in 1..=m {
        if p[j] != 0 {
            ans[p[j] - 1] = j - 1;
        }
    }
    ans
}

/// Maximum-weight assignment; `None` weights are forbidden pairs. Ties lean
/// towards lower column indices.
pub fn max_weight_assignment(weights: &[Vec<Option<f64>>]) -> Vec<usize> {
    const FORBIDDEN: f64 = 1e9;
    const TIE: f64 = 1e-9;
    let cost: Vec<Vec<f64>> = weights
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(j, w)| match w {
                    Some(w) => -w + TIE * j as f64,
                    None => FORBIDDEN,
                })
                .collect()
        })
        .collect();
    min_cost_assignment(&cost)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(cost: &[Vec<f64>]) -> f64 {
        fn rec(i: usize, cost: &[Vec<f64>], used: &mut Vec<bool>) -> f64 {
            if i == cost.len() {
                return 0.0;
            }
            let mut best = f64::INFINITY;
            for j in 0..used.len() {
                if !used[j] {
                    used[j] = true;
                    best = best.min(cost[i][j] + rec(i + 1, cost, used));
                    used[j] = false;
                }
            }
            best
        }
        rec(0, cost, &mut vec![false; cost[0].len()])
    }

    #[test]
    fn small_known_case() {
        let cost = vec![vec![4.0, 1.0, 3.0], vec![2.0, 0.0, 5.0], vec![3.0, 2.0, 2.0]];
        let a = min_cost_assignment(&cost);
        let total: f64 = a.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
        assert_eq!(total, 5.0);
    }

    #[test]
    fn forbidden_pairs_avoided() {
        let w = vec![vec![Some(1.0), None], vec![Some(5.0), Some(0.5)]];
        assert_eq!(max_weight_assignment(&w), vec![0, 1]);
    }

    #[test]
    fn ties_prefer_low_columns() {
        let w = vec![vec![Some(1.0); 4]];
        assert_eq!(max_weight_assignment(&w), vec![0]);
    }

    proptest! {
        #[test]
        fn matches_brute_force(rows in 1usize..6, extra in 0usize..3, vals in prop::collection::vec(-10.0f64..10.0, 64)) {
            let cols = rows + extra;
            let cost: Vec<Vec<f64>> = (0..rows).map(|i| (0..cols).map(|j| vals[(i * cols + j) % 64]).collect()).collect();
            let a = min_cost_assignment(&cost);
            let mut seen = std::collections::HashSet::new();
            prop_assert!(a.iter().all(|j| seen.insert(*j)));
            let total: f64 = a.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
            prop_assert!((total - brute(&cost)).abs() < 1e-9);
        }
    }
}
