//! Multiuser association: load-dependent compute rates, the system cost of
//! an association, and the worst-association local search with round-robin
//! user switching. An exhaustive solver is kept for small instances.

use crate::controller::{z_frame_closed_form, FrameParams};
use crate::error::{Error, Result};
use crate::offloading::PhyModel;

/// `F·α^(y-1)`: per-user rate of a server shared by `y` users.
pub fn load_rate(base_rate: f64, degradation: f64, load: usize) -> Result<f64> {
    if load == 0 {
        return Err(Error::Constraint("rate requested for an empty BS".into()));
    }
    Ok(base_rate * degradation.powi(load as i32 - 1))
}

/// User-to-BS association, stored as one BS index per user. Each row of the
/// equivalent 0/1 matrix therefore sums to exactly one.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AssociationMatrix {
    assign: Vec<usize>,
    num_bs: usize,
}

impl AssociationMatrix {
    pub fn new(assign: Vec<usize>, num_bs: usize) -> Result<Self> {
        if let Some(&n) = assign.iter().find(|&&n| n >= num_bs) {
            return Err(Error::Constraint(format!("BS index {n} out of range 0..{num_bs}")));
        }
        Ok(AssociationMatrix { assign, num_bs })
    }

    /// From explicit `x[i][n]` entries; every row must hold exactly one 1.
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let num_bs = rows.first().map_or(0, Vec::len);
        let mut assign = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            if row.len() != num_bs || row.iter().any(|&x| x > 1) || row.iter().map(|&x| x as u32).sum::<u32>() != 1 {
                return Err(Error::Constraint(format!("row {i} must be a 0/1 row with exactly one 1")));
            }
            assign.push(row.iter().position(|&x| x == 1).unwrap());
        }
        Ok(AssociationMatrix { assign, num_bs })
    }

    pub fn num_users(&self) -> usize {
        self.assign.len()
    }

    pub fn num_bs(&self) -> usize {
        self.num_bs
    }

    pub fn bs_of(&self, user: usize) -> usize {
        self.assign[user]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assign
    }

    pub fn x(&self, user: usize, bs: usize) -> u8 {
        (self.assign[user] == bs) as u8
    }

    /// Column sums `y_n`.
    pub fn loads(&self) -> Vec<usize> {
        let mut y = vec![0; self.num_bs];
        for &n in &self.assign {
            y[n] += 1;
        }
        y
    }

    /// Same association with `user` moved to `bs`.
    pub fn with_move(&self, user: usize, bs: usize) -> Self {
        let mut next = self.clone();
        next.assign[user] = bs;
        next
    }
}

/// One user's view of the frame.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiuserUser {
    /// Large-scale gain to every BS.
    pub gains: Vec<f64>,
    pub queue_len: f64,
    /// Association in the previous frame.
    pub prev: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultiuserScenario {
    pub phy: PhyModel,
    pub frame: FrameParams,
    pub control_v: f64,
    pub base_rate: f64,
    /// Per-BS degradation factor.
    pub degradation: Vec<f64>,
    pub users: Vec<MultiuserUser>,
}

impl MultiuserScenario {
    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn num_bs(&self) -> usize {
        self.degradation.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_bs();
        if n == 0 || self.users.is_empty() {
            return Err(Error::InvalidConfig("multiuser scenario needs at least one user and one BS".into()));
        }
        if self.degradation.iter().any(|&a| !(a > 0.0 && a <= 1.0)) {
            return Err(Error::InvalidConfig("degradation factors must lie in (0, 1]".into()));
        }
        for (i, u) in self.users.iter().enumerate() {
            if u.gains.len() != n || u.prev >= n {
                return Err(Error::InvalidConfig(format!("user {i} does not match {n} BSs")));
            }
        }
        Ok(())
    }

    fn check(&self, x: &AssociationMatrix) -> Result<()> {
        if x.num_users() != self.num_users() || x.num_bs() != self.num_bs() {
            return Err(Error::Constraint(format!(
                "association is {}x{}, scenario is {}x{}",
                x.num_users(),
                x.num_bs(),
                self.num_users(),
                self.num_bs()
            )));
        }
        Ok(())
    }

    /// `Z_{i,n}` for BS `n` carrying `load` users.
    pub fn z(&self, user: usize, bs: usize, load: usize) -> f64 {
        let u = &self.users[user];
        let f = self.base_rate * self.degradation[bs].powi(load as i32 - 1);
        z_frame_closed_form(&self.phy, u.gains[bs], f, u.queue_len, self.control_v)
    }

    /// `Z^sum_{i,n}` for BS `n` carrying `load` users.
    pub fn z_sum(&self, user: usize, bs: usize, load: usize) -> f64 {
        let u = &self.users[user];
        self.frame.z_sum(self.z(user, bs, load), u.queue_len, bs == u.prev)
    }
}

/// `R(X) = Σ_i Z^sum_{i, n_i}(y_{n_i})`.
pub fn system_cost(x: &AssociationMatrix, sc: &MultiuserScenario) -> Result<f64> {
    sc.check(x)?;
    let y = x.loads();
    Ok((0..x.num_users()).map(|i| sc.z_sum(i, x.bs_of(i), y[x.bs_of(i)])).sum())
}

/// Most expensive user-BS pair; lowest user index on ties.
pub fn worst_pair(x: &AssociationMatrix, sc: &MultiuserScenario) -> Result<(usize, usize)> {
    sc.check(x)?;
    let y = x.loads();
    let mut best = (0, f64::NEG_INFINITY);
    for i in 0..x.num_users() {
        let c = sc.z_sum(i, x.bs_of(i), y[x.bs_of(i)]);
        if c > best.1 {
            best = (i, c);
        }
    }
    Ok((best.0, x.bs_of(best.0)))
}

/// Best of `x` and the moves of `user` to each other BS. The incumbent wins
/// ties; among moves, the lowest BS index does.
pub fn association_update(x: &AssociationMatrix, sc: &MultiuserScenario, user: usize) -> Result<AssociationMatrix> {
    let mut best = x.clone();
    let mut best_cost = system_cost(x, sc)?;
    for m in 0..x.num_bs() {
        if m == x.bs_of(user) {
            continue;
        }
        let cand = x.with_move(user, m);
        let c = system_cost(&cand, sc)?;
        if c < best_cost {
            best = cand;
            best_cost = c;
        }
    }
    Ok(best)
}

/// Minimum of `R` over all `N^M` associations. Only for small instances.
pub fn exhaustive_optimum(sc: &MultiuserScenario) -> Result<(AssociationMatrix, f64)> {
    let (m, n) = (sc.num_users(), sc.num_bs());
    let total = (n as u64).checked_pow(m as u32).filter(|&t| t <= 10_000_000).ok_or_else(|| {
        Error::InvalidConfig(format!("exhaustive search over {n}^{m} associations is too large"))
    })?;
    let mut best: Option<(AssociationMatrix, f64)> = None;
    for code in 0..total {
        let mut c = code;
        let assign = (0..m)
            .map(|_| {
                let b = (c % n as u64) as usize;
                c /= n as u64;
                b
            })
            .collect();
        let x = AssociationMatrix::new(assign, n)?;
        let r = system_cost(&x, sc)?;
        if best.as_ref().map_or(true, |b| r < b.1) {
            best = Some((x, r));
        }
    }
    Ok(best.unwrap())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Algorithm2Options {
    /// Hard stop; `None` picks `100·M·N + 1000`.
    pub max_iterations: Option<usize>,
    pub record_trace: bool,
}

impl Default for Algorithm2Options {
    fn default() -> Self {
        Algorithm2Options {
            max_iterations: None,
            record_trace: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Algorithm2Result {
    pub association: AssociationMatrix,
    pub iterations: usize,
    pub initial_cost: f64,
    pub final_cost: f64,
    /// `R` after each iteration, when requested.
    pub cost_trace: Vec<f64>,
    /// Association after each iteration, when requested.
    pub association_trace: Vec<AssociationMatrix>,
    pub hit_iteration_cap: bool,
}

// A move must lower the cost of the two BSs involved by more than this
// fraction; protects termination against rounding in the incremental sums.
const MOVE_REL_TOL: f64 = 1e-13;

/// Per-user `Z^sum` memoized by load for one frame.
struct CostTable<'a> {
    sc: &'a MultiuserScenario,
    cache: Vec<Vec<f64>>,
}

impl<'a> CostTable<'a> {
    fn new(sc: &'a MultiuserScenario) -> Self {
        CostTable {
            sc,
            cache: vec![Vec::new(); sc.num_users() * sc.num_bs()],
        }
    }

    fn get(&mut self, user: usize, bs: usize, load: usize) -> f64 {
        debug_assert!(load >= 1);
        let slot = &mut self.cache[user * self.sc.degradation.len() + bs];
        if slot.len() < load {
            slot.resize(load, f64::NAN);
        }
        let v = slot[load - 1];
        if !v.is_nan() {
            return v;
        }
        let v = self.sc.z_sum(user, bs, load);
        slot[load - 1] = v;
        v
    }
}

/// Incremental bookkeeping for the local search.
struct SearchState<'a> {
    table: CostTable<'a>,
    assign: Vec<usize>,
    members: Vec<Vec<usize>>,
    /// Sum of member costs at the current load, one less, and one more.
    cur: Vec<f64>,
    minus: Vec<f64>,
    plus: Vec<f64>,
    user_cost: Vec<f64>,
}

impl<'a> SearchState<'a> {
    fn new(sc: &'a MultiuserScenario, x: &AssociationMatrix) -> Self {
        let n = sc.num_bs();
        let mut members = vec![Vec::new(); n];
        for (i, &b) in x.assignment().iter().enumerate() {
            members[b].push(i);
        }
        let mut s = SearchState {
            table: CostTable::new(sc),
            assign: x.assignment().to_vec(),
            members,
            cur: vec![0.0; n],
            minus: vec![0.0; n],
            plus: vec![0.0; n],
            user_cost: vec![0.0; sc.num_users()],
        };
        for b in 0..n {
            s.refresh(b);
        }
        s
    }

    fn refresh(&mut self, b: usize) {
        let y = self.members[b].len();
        let (mut cur, mut minus, mut plus) = (0.0, 0.0, 0.0);
        for k in 0..y {
            let j = self.members[b][k];
            let c = self.table.get(j, b, y);
            self.user_cost[j] = c;
            cur += c;
            plus += self.table.get(j, b, y + 1);
            if y >= 2 {
                minus += self.table.get(j, b, y - 1);
            }
        }
        self.cur[b] = cur;
        self.minus[b] = minus;
        self.plus[b] = plus;
    }

    fn total(&self) -> f64 {
        self.cur.iter().sum()
    }

    /// Cost change of moving `user` to `to`.
    fn delta(&mut self, user: usize, to: usize) -> f64 {
        let from = self.assign[user];
        let y_from = self.members[from].len();
        let y_to = self.members[to].len();
        let leave = if y_from >= 2 {
            self.minus[from] - self.table.get(user, from, y_from - 1)
        } else {
            0.0
        };
        let join = self.plus[to] + self.table.get(user, to, y_to + 1);
        (leave - self.cur[from]) + (join - self.cur[to])
    }

    /// Applies the best strictly improving move of `user`, if any.
    fn improve(&mut self, user: usize) -> bool {
        let from = self.assign[user];
        let mut best: Option<(usize, f64)> = None;
        for m in 0..self.members.len() {
            if m == from {
                continue;
            }
            let d = self.delta(user, m);
            if best.map_or(true, |b| d < b.1) {
                best = Some((m, d));
            }
        }
        let Some((to, d)) = best else { return false };
        let scale = self.cur[from] + self.cur[to] + self.plus[to];
        if d >= -MOVE_REL_TOL * scale || !(d < 0.0) {
            return false;
        }
        let pos = self.members[from].iter().position(|&j| j == user).unwrap();
        self.members[from].swap_remove(pos);
        self.members[to].push(user);
        self.assign[user] = to;
        self.refresh(from);
        self.refresh(to);
        true
    }

    fn worst_user(&self) -> usize {
        let mut best = 0;
        for (i, &c) in self.user_cost.iter().enumerate() {
            if c > self.user_cost[best] {
                best = i;
            }
        }
        best
    }
}

/// Worst-association local search with round-robin user switching.
///
/// Each iteration tries to move one user to the BS that lowers `R` most. The
/// next user is the worst pair after a change, or the next user in
/// round-robin order after no change. The search stops once `M` consecutive
/// round-robin users could not improve, so every user has been swept.
pub fn algorithm2(x0: &AssociationMatrix, sc: &MultiuserScenario, opts: &Algorithm2Options) -> Result<Algorithm2Result> {
    sc.validate()?;
    sc.check(x0)?;
    let m = sc.num_users();
    let cap = opts.max_iterations.unwrap_or(100 * m * sc.num_bs() + 1000);
    let mut st = SearchState::new(sc, x0);
    // both ends through the same summation, so an unchanged association
    // reports identical costs
    let initial_cost = system_cost(x0, sc)?;
    let mut cost_trace = Vec::new();
    let mut association_trace = Vec::new();
    let mut user = st.worst_user();
    let mut user_is_switch = false;
    let mut s = 0usize;
    let mut unchanged_switches = 0usize;
    let mut iterations = 0usize;
    let mut hit_cap = false;
    loop {
        if iterations >= cap {
            hit_cap = true;
            break;
        }
        let changed = st.improve(user);
        iterations += 1;
        if opts.record_trace {
            cost_trace.push(st.total());
            association_trace.push(AssociationMatrix {
                assign: st.assign.clone(),
                num_bs: sc.num_bs(),
            });
        }
        if changed {
            unchanged_switches = 0;
            user = st.worst_user();
            user_is_switch = false;
        } else {
            if user_is_switch {
                unchanged_switches += 1;
                if unchanged_switches >= m {
                    break;
                }
            }
            user = s % m;
            s += 1;
            user_is_switch = true;
        }
    }
    let association = AssociationMatrix {
        assign: st.assign,
        num_bs: sc.num_bs(),
    };
    let final_cost = system_cost(&association, sc)?;
    Ok(Algorithm2Result {
        association,
        iterations,
        initial_cost,
        final_cost,
        cost_trace,
        association_trace,
        hit_iteration_cap: hit_cap,
    })
}
