//! Transportation simplex on the dense bipartite graph: exact optimal
//! couplings between finitely supported measures. The basis is maintained as
//! a spanning tree over row and column nodes; entering variables follow
//! Dantzig's rule with a deterministic lexicographic tie-break, switching to
//! Bland's rule if degenerate pivots stall.

/// One basic feasible flow cell.
#[derive(Debug, Clone, Copy)]
pub struct Flow {
    pub source: usize,
    pub target: usize,
    pub mass: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum SimplexError {
    #[error("marginal totals differ beyond tolerance: {0} vs {1}")]
    Infeasible(f64, f64),
    #[error("empty marginal")]
    Empty,
    #[error("simplex failed to converge after {0} pivots")]
    Stalled(usize),
}

/// Exact minimum-cost transport between `supply` and `demand` under the
/// dense `cost` matrix. Returns basic flows with positive mass, sorted
/// lexicographically by (source, target).
pub fn solve_transport(
    supply: &[f64],
    demand: &[f64],
    cost: &[Vec<f64>],
) -> Result<Vec<Flow>, SimplexError> {
    let n = supply.len();
    let m = demand.len();
    if n == 0 || m == 0 {
        return Err(SimplexError::Empty);
    }
    let sa: f64 = supply.iter().sum();
    let sb: f64 = demand.iter().sum();
    if (sa - sb).abs() > 1e-9 * sa.max(sb).max(1e-300) {
        return Err(SimplexError::Infeasible(sa, sb));
    }

    let mut flow = vec![0.0f64; n * m];
    let mut basic = vec![false; n * m];
    // row i adjacency: basic columns; column j adjacency: basic rows
    let mut row_adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut col_adj: Vec<Vec<usize>> = vec![Vec::new(); m];

    // northwest corner start
    {
        let mut ra: Vec<f64> = supply.to_vec();
        let mut rb: Vec<f64> = demand.to_vec();
        let (mut i, mut j) = (0usize, 0usize);
        loop {
            let t = ra[i].min(rb[j]);
            flow[i * m + j] = t;
            basic[i * m + j] = true;
            row_adj[i].push(j);
            col_adj[j].push(i);
            ra[i] -= t;
            rb[j] -= t;
            if i == n - 1 && j == m - 1 {
                break;
            }
            if ra[i] < rb[j] && i < n - 1 {
                i += 1;
            } else if rb[j] < ra[i] && j < m - 1 {
                j += 1;
            } else if i < n - 1 {
                i += 1;
            } else {
                j += 1;
            }
        }
    }

    let cmax = cost
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |a, &b| a.max(b.abs()))
        .max(1.0);
    let eps = 1e-12 * cmax;

    let mut u = vec![0.0f64; n];
    let mut v = vec![0.0f64; m];
    let mut seen_row = vec![false; n];
    let mut seen_col = vec![false; m];

    let max_pivots = 200 * (n + m) * (n + m) + 10_000;
    let mut degenerate_streak = 0usize;
    let mut bland = false;

    for pivot in 0..max_pivots {
        // duals from the basis tree (u[0] = 0)
        seen_row.iter_mut().for_each(|s| *s = false);
        seen_col.iter_mut().for_each(|s| *s = false);
        let mut stack: Vec<isize> = vec![0]; // rows >= 0, cols encoded as -(j+1)
        u[0] = 0.0;
        seen_row[0] = true;
        while let Some(node) = stack.pop() {
            if node >= 0 {
                let i = node as usize;
                for &j in &row_adj[i] {
                    if !seen_col[j] {
                        v[j] = cost[i][j] - u[i];
                        seen_col[j] = true;
                        stack.push(-(j as isize) - 1);
                    }
                }
            } else {
                let j = (-node - 1) as usize;
                for &i in &col_adj[j] {
                    if !seen_row[i] {
                        u[i] = cost[i][j] - v[j];
                        seen_row[i] = true;
                        stack.push(i as isize);
                    }
                }
            }
        }

        // entering variable
        let mut enter: Option<(usize, usize)> = None;
        let mut best_rc = -eps;
        'outer: for i in 0..n {
            for j in 0..m {
                if basic[i * m + j] {
                    continue;
                }
                let rc = cost[i][j] - u[i] - v[j];
                if bland {
                    if rc < -eps {
                        enter = Some((i, j));
                        break 'outer;
                    }
                } else if rc < best_rc {
                    best_rc = rc;
                    enter = Some((i, j));
                }
            }
        }
        let Some((ei, ej)) = enter else {
            // optimal
            let mut out: Vec<Flow> = Vec::new();
            for i in 0..n {
                for j in 0..m {
                    if basic[i * m + j] && flow[i * m + j] > 0.0 {
                        out.push(Flow { source: i, target: j, mass: flow[i * m + j] });
                    }
                }
            }
            return Ok(out);
        };

        // unique tree path from row ei to col ej; adding (ei, ej) closes the cycle
        let cycle = tree_path(ei, ej, n, m, &row_adj, &col_adj);
        // cycle cells alternate +, -, +, ... starting with the entering cell
        let mut minus_min = f64::INFINITY;
        let mut leave: Option<(usize, usize)> = None;
        for (k, &(i, j)) in cycle.iter().enumerate() {
            if k % 2 == 1 {
                let fl = flow[i * m + j];
                if fl < minus_min - 1e-18
                    || (fl <= minus_min + 1e-18
                        && leave.map_or(true, |(li, lj)| (i, j) < (li, lj)))
                {
                    minus_min = fl.min(minus_min);
                    leave = Some((i, j));
                }
            }
        }
        let (li, lj) = leave.expect("cycle has a leaving arc");
        let delta = flow[li * m + lj];
        for (k, &(i, j)) in cycle.iter().enumerate() {
            if k % 2 == 0 {
                flow[i * m + j] += delta;
            } else {
                flow[i * m + j] -= delta;
            }
        }
        flow[ei * m + ej] += 0.0; // entering already included as cycle[0]
        flow[li * m + lj] = 0.0;
        basic[ei * m + ej] = true;
        basic[li * m + lj] = false;
        row_adj[ei].push(ej);
        col_adj[ej].push(ei);
        row_adj[li].retain(|&j| j != lj);
        col_adj[lj].retain(|&i| i != li);

        if delta <= 0.0 {
            degenerate_streak += 1;
            if degenerate_streak > 4 * (n + m) {
                bland = true;
            }
        } else {
            degenerate_streak = 0;
        }
        let _ = pivot;
    }
    Err(SimplexError::Stalled(max_pivots))
}

/// Cells of the unique basis-tree path from row `i0` to column `j0`,
/// prefixed by the entering cell (i0, j0).
fn tree_path(
    i0: usize,
    j0: usize,
    n: usize,
    m: usize,
    row_adj: &[Vec<usize>],
    col_adj: &[Vec<usize>],
) -> Vec<(usize, usize)> {
    // nodes: rows 0..n, cols n..n+m
    let total = n + m;
    let mut parent: Vec<usize> = vec![usize::MAX; total];
    let mut queue = std::collections::VecDeque::new();
    let start = i0;
    let goal = n + j0;
    parent[start] = start;
    queue.push_back(start);
    while let Some(node) = queue.pop_front() {
        if node == goal {
            break;
        }
        if node < n {
            for &j in &row_adj[node] {
                let nj = n + j;
                if parent[nj] == usize::MAX {
                    parent[nj] = node;
                    queue.push_back(nj);
                }
            }
        } else {
            let j = node - n;
            for &i in &col_adj[j] {
                if parent[i] == usize::MAX {
                    parent[i] = node;
                    queue.push_back(i);
                }
            }
        }
    }
    // walk back from the goal collecting tree edges as cells
    let mut cells = vec![(i0, j0)];
    let mut node = goal;
    while node != start {
        let p = parent[node];
        let cell = if node < n { (node, p - n) } else { (p, node - n) };
        cells.push(cell);
        node = p;
    }
    cells
}

/// Exact assignment (equal-weight square case) by shortest augmenting paths
/// with potentials. Returns, for each row, its assigned column.
pub fn solve_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    // column 0 is a virtual root; arrays are 1-based over columns
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut matched = vec![usize::MAX; n + 1]; // column -> row
    for i in 0..n {
        matched[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0][j - 1] - u[i0] - v[j];
                let cur = if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                    cur
                } else {
                    minv[j]
                };
                if cur < delta {
                    delta = cur;
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    if matched[j] != usize::MAX {
                        u[matched[j]] += delta;
                    }
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched[j0] == usize::MAX {
                break;
            }
        }
        // augment along the alternating path
        loop {
            let j1 = way[j0];
            matched[j0] = matched[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![usize::MAX; n];
    for j in 1..=n {
        if matched[j] != usize::MAX {
            assignment[matched[j]] = j - 1;
        }
    }
    assignment
}
