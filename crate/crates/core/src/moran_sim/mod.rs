//! Finite-N Moran model with genealogy and types.
//!
//! The genealogy of the `N` living individuals is kept as a binary tree:
//! leaves `0..N` are the individuals, each of the `N − 1` internal nodes is
//! a coalescence point with a birth time, and the distance of two
//! individuals is the age of their lowest common ancestor. This is the
//! same ultrametric as the full distance matrix (which
//! [`MoranState::distance_matrix`] materialises on demand) but a
//! resampling event only touches the ancestors of two leaves.
//!
//! Dynamics (all rates per unit time):
//! * neutral resampling — every unordered pair at rate 1, direction
//!   uniform: the offspring of `k` replaces `ℓ`;
//! * mutation — every individual at rate ϑ; with probability `z` the new
//!   type is uniform on [0,1], otherwise the type is kept;
//! * selection — individual `k` at rate `α·χ(type_k)` sends its offspring
//!   onto a uniformly chosen other individual.
//!
//! Between events all distances grow at speed 1. The state tracks, exactly
//! and in closed form between events:
//! * `S_λ = Σ_{i<j} e^{−λ d_ij}` for a set of Laplace parameters λ, and
//! * the number of ε-balls `N_ε = 1 + #{internal nodes of age ≥ ε}` for a
//!   set of radii ε,
//! together with their time integrals.

mod snapshot;

pub use snapshot::{Functional, Snapshot};

use std::collections::VecDeque;

use rand::Rng as _;
use rand_distr::{Distribution, Exp1};

use crate::coalescent_sim::sample_tree;
use crate::error::{Error, Result};
use crate::rng::Rng;

const NONE: u32 = u32::MAX;

/// Largest supported population size.
pub const MAX_POPULATION: usize = 5000;

/// Burn-in horizon used before a non-neutral or star start counts as
/// stationary.
pub const BURN_IN: f64 = 10.0;

/// A bounded fitness function on types in [0,1].
#[derive(Clone, Copy, Debug)]
pub struct Fitness {
    pub chi: fn(f64) -> f64,
    /// Upper bound of `chi` on [0,1].
    pub max: f64,
}

impl Default for Fitness {
    /// `χ(a) = a`.
    fn default() -> Self {
        Fitness { chi: |a| a, max: 1.0 }
    }
}

/// Model parameters.
#[derive(Clone, Copy, Debug)]
pub struct MoranConfig {
    /// Population size `N`.
    pub n: usize,
    /// Mutation rate ϑ per individual.
    pub theta: f64,
    /// Weight of the parent-independent (uniform) mutation component.
    pub z: f64,
    /// Selection intensity α.
    pub alpha: f64,
    pub fitness: Fitness,
}

impl MoranConfig {
    /// Neutral model without mutation.
    pub fn neutral(n: usize) -> Self {
        MoranConfig { n, theta: 0.0, z: 1.0, alpha: 0.0, fitness: Fitness::default() }
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=MAX_POPULATION).contains(&self.n) {
            return Err(Error::InvalidParameter(format!("N must lie in 2..={MAX_POPULATION}, got {}", self.n)));
        }
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        if !ok(self.theta) || !ok(self.alpha) || !(0.0..=1.0).contains(&self.z) {
            return Err(Error::InvalidParameter("need ϑ ≥ 0, α ≥ 0 and z ∈ [0,1]".into()));
        }
        if !(self.fitness.max > 0.0) || !self.fitness.max.is_finite() {
            return Err(Error::InvalidParameter("fitness bound must be positive and finite".into()));
        }
        Ok(())
    }
}

/// How to start a population.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitMode {
    /// Genealogy from a Kingman tree on `N` leaves, types by mutating along
    /// its branches; with α > 0 followed by a burn-in of [`BURN_IN`].
    Stationary,
    /// All distances 0 and all types equal; not stationary until burnt in.
    Star,
}

/// Quantities followed continuously along a path.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Tracking {
    pub lambdas: Vec<f64>,
    pub eps: Vec<f64>,
}

/// Numbers of events of each kind.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EventCounts {
    pub resampling: u64,
    pub mutation: u64,
    pub selection: u64,
}

impl std::ops::AddAssign for EventCounts {
    fn add_assign(&mut self, o: Self) {
        self.resampling += o.resampling;
        self.mutation += o.mutation;
        self.selection += o.selection;
    }
}

#[derive(Clone, Copy, Debug)]
struct Node {
    parent: u32,
    child: [u32; 2],
    birth: f64,
    leaves: u32,
    serial: u32,
}

#[derive(Clone, Debug)]
struct EpsTrack {
    eps: f64,
    /// Internal nodes not yet of age ε, in birth order: (birth, node, serial).
    queue: VecDeque<(f64, u32, u32)>,
    old: Vec<bool>,
    old_count: usize,
    integral: f64,
}

/// Population state.
#[derive(Clone, Debug)]
pub struct MoranState {
    config: MoranConfig,
    nodes: Vec<Node>,
    root: u32,
    types: Vec<f64>,
    clock: f64,
    next_serial: u32,
    stationary: bool,
    lambdas: Vec<f64>,
    t_ref: f64,
    /// `g[v·L + j] = e^{λ_j (birth_v − t_ref)}` for internal nodes.
    g: Vec<f64>,
    /// `Σ_v L_v R_v g_v`, so that `S_λ(now) = e^{−λ(now − t_ref)}·s_ref`.
    s_ref: Vec<f64>,
    /// `e^{−λ_j(clock − t_ref)}`.
    decay: Vec<f64>,
    laplace_integral: Vec<f64>,
    eps: Vec<EpsTrack>,
    integral_time: f64,
    since_refresh: usize,
    counts: EventCounts,
}

impl MoranState {
    /// A new population at time 0.
    pub fn new(config: MoranConfig, mode: InitMode, tracking: Tracking, rng: &mut Rng) -> Result<Self> {
        config.validate()?;
        if tracking.lambdas.iter().any(|&l| !(l > 0.0) || !l.is_finite()) || tracking.eps.iter().any(|&e| !(e > 0.0)) {
            return Err(Error::InvalidParameter("tracked λ and ε must be positive".into()));
        }
        let n = config.n;
        let mut nodes = vec![Node { parent: NONE, child: [NONE; 2], birth: 0.0, leaves: 1, serial: 0 }; 2 * n - 1];
        let mut types = vec![0.0; n];
        let root;
        match mode {
            InitMode::Stationary => {
                let tree = sample_tree(n, rng)?;
                for (m, mg) in tree.merges.iter().enumerate() {
                    let v = n + m;
                    nodes[v] = Node {
                        parent: NONE,
                        child: [mg.left as u32, mg.right as u32],
                        birth: -mg.depth,
                        leaves: (mg.left_size + mg.right_size) as u32,
                        serial: 0,
                    };
                    nodes[mg.left].parent = v as u32;
                    nodes[mg.right].parent = v as u32;
                }
                root = (2 * n - 2) as u32;
                // Types: mutate down the tree from a uniform root type.
                let rate = config.theta * config.z;
                let mut node_type = vec![0.0f64; 2 * n - 1];
                node_type[root as usize] = rng.random::<f64>();
                for v in (n..2 * n - 1).rev() {
                    for &c in &nodes[v].child {
                        let c = c as usize;
                        let len = if c < n { -nodes[v].birth } else { nodes[c].birth - nodes[v].birth };
                        node_type[c] =
                            if rng.random::<f64>() < -(-rate * len).exp_m1() { rng.random::<f64>() } else { node_type[v] };
                    }
                }
                types.copy_from_slice(&node_type[..n]);
            }
            InitMode::Star => {
                // A balanced tree with every coalescence at time 0.
                let mut level: Vec<u32> = (0..n as u32).collect();
                let mut next = n;
                while level.len() > 1 {
                    let mut up = Vec::with_capacity(level.len() / 2 + 1);
                    for pair in level.chunks(2) {
                        if let [a, b] = *pair {
                            let leaves = nodes[a as usize].leaves + nodes[b as usize].leaves;
                            nodes[next] = Node { parent: NONE, child: [a, b], birth: 0.0, leaves, serial: 0 };
                            nodes[a as usize].parent = next as u32;
                            nodes[b as usize].parent = next as u32;
                            up.push(next as u32);
                            next += 1;
                        } else {
                            up.push(pair[0]);
                        }
                    }
                    level = up;
                }
                root = level[0];
                let t = rng.random::<f64>();
                types.iter_mut().for_each(|x| *x = t);
            }
        }
        let nl = tracking.lambdas.len();
        let eps = tracking
            .eps
            .iter()
            .map(|&e| EpsTrack { eps: e, queue: VecDeque::new(), old: vec![false; 2 * n - 1], old_count: 0, integral: 0.0 })
            .collect();
        let mut state = MoranState {
            config,
            nodes,
            root,
            types,
            clock: 0.0,
            next_serial: 1,
            stationary: mode == InitMode::Stationary,
            lambdas: tracking.lambdas,
            t_ref: 0.0,
            g: vec![0.0; (2 * n - 1) * nl],
            s_ref: vec![0.0; nl],
            decay: vec![1.0; nl],
            laplace_integral: vec![0.0; nl],
            eps,
            integral_time: 0.0,
            since_refresh: 0,
            counts: EventCounts::default(),
        };
        state.rebase();
        state.init_eps();
        if mode == InitMode::Stationary && config.alpha > 0.0 {
            state.stationary = false;
            state.burn_in(BURN_IN, rng);
        }
        Ok(state)
    }

    fn init_eps(&mut self) {
        let n = self.config.n;
        let mut internal: Vec<u32> = (n as u32..(2 * n - 1) as u32).collect();
        internal.sort_by(|&a, &b| self.nodes[a as usize].birth.total_cmp(&self.nodes[b as usize].birth));
        for tr in &mut self.eps {
            tr.queue.clear();
            tr.old.iter_mut().for_each(|o| *o = false);
            tr.old_count = 0;
            for &v in &internal {
                let node = &self.nodes[v as usize];
                if self.clock - node.birth >= tr.eps {
                    tr.old[v as usize] = true;
                    tr.old_count += 1;
                } else {
                    tr.queue.push_back((node.birth, v, node.serial));
                }
            }
        }
    }

    /// Resets the reference time of the Laplace weights and recomputes the
    /// tracked sums from scratch.
    fn rebase(&mut self) {
        let n = self.config.n;
        let nl = self.lambdas.len();
        self.t_ref = self.clock;
        for j in 0..nl {
            let l = self.lambdas[j];
            let mut s = 0.0;
            for v in n..2 * n - 1 {
                let node = &self.nodes[v];
                let gv = (l * (node.birth - self.t_ref)).exp();
                self.g[v * nl + j] = gv;
                let [a, b] = node.child;
                s += self.nodes[a as usize].leaves as f64 * self.nodes[b as usize].leaves as f64 * gv;
            }
            self.s_ref[j] = s;
            self.decay[j] = 1.0;
        }
        self.since_refresh = 0;
    }

    pub fn config(&self) -> &MoranConfig {
        &self.config
    }

    pub fn n(&self) -> usize {
        self.config.n
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn types(&self) -> &[f64] {
        &self.types
    }

    pub fn is_stationary(&self) -> bool {
        self.stationary
    }

    pub fn event_counts(&self) -> EventCounts {
        self.counts
    }

    /// `Σ_{i<j} e^{−λ_j d_ij}` for the `j`-th tracked λ.
    pub fn laplace_pair_sum(&self, j: usize) -> f64 {
        self.decay[j] * self.s_ref[j]
    }

    /// `N_ε` for the `k`-th tracked radius.
    pub fn tracked_n_eps(&self, k: usize) -> usize {
        1 + self.eps[k].old_count
    }

    /// Clears the accumulated time integrals.
    pub fn reset_integrals(&mut self) {
        self.laplace_integral.iter_mut().for_each(|x| *x = 0.0);
        self.eps.iter_mut().for_each(|t| t.integral = 0.0);
        self.integral_time = 0.0;
    }

    /// Time elapsed since the integrals were last cleared.
    pub fn integral_time(&self) -> f64 {
        self.integral_time
    }

    /// `∫ ((λ+1)·U_λ(s) − 1) ds` with `U_λ` the mean of `e^{−λ d_ij}` over
    /// pairs of distinct individuals.
    pub fn centred_laplace_integral(&self, j: usize) -> f64 {
        let n = self.config.n as f64;
        (self.lambdas[j] + 1.0) * 2.0 / (n * (n - 1.0)) * self.laplace_integral[j] - self.integral_time
    }

    /// `∫ N_ε(s) ds` for the `k`-th tracked radius.
    pub fn n_eps_integral(&self, k: usize) -> f64 {
        self.eps[k].integral
    }

    /// Runs the dynamics for `duration` and marks the state stationary if
    /// the duration reaches [`BURN_IN`].
    pub fn burn_in(&mut self, duration: f64, rng: &mut Rng) {
        self.advance(duration, rng);
        if duration >= BURN_IN {
            self.stationary = true;
        }
    }

    /// Advances the clock by `dt`, returning the events that occurred.
    pub fn advance(&mut self, dt: f64, rng: &mut Rng) -> EventCounts {
        let before = self.counts;
        let target = self.clock + dt;
        let n = self.config.n as f64;
        let r_pair = n * (n - 1.0) / 2.0;
        let r_mut = self.config.theta * n;
        let r_sel = self.config.alpha * n * self.config.fitness.max;
        let total = r_pair + r_mut + r_sel;
        loop {
            let tau: f64 = Exp1.sample(rng);
            let next = self.clock + tau / total;
            if next > target {
                // Memorylessness: the pending event is simply redrawn later.
                self.flow_to(target);
                break;
            }
            self.flow_to(next);
            let u = rng.random::<f64>() * total;
            if u < r_pair {
                let k = rng.random_range(0..self.config.n);
                let mut l = rng.random_range(0..self.config.n - 1);
                if l >= k {
                    l += 1;
                }
                self.resample(k, l);
                self.counts.resampling += 1;
            } else if u < r_pair + r_mut {
                let i = rng.random_range(0..self.config.n);
                if rng.random::<f64>() < self.config.z {
                    self.types[i] = rng.random::<f64>();
                }
                self.counts.mutation += 1;
            } else {
                let k = rng.random_range(0..self.config.n);
                let accept = (self.config.fitness.chi)(self.types[k]) / self.config.fitness.max;
                if rng.random::<f64>() < accept {
                    let mut l = rng.random_range(0..self.config.n - 1);
                    if l >= k {
                        l += 1;
                    }
                    self.resample(k, l);
                    self.counts.selection += 1;
                }
            }
        }
        let after = self.counts;
        EventCounts {
            resampling: after.resampling - before.resampling,
            mutation: after.mutation - before.mutation,
            selection: after.selection - before.selection,
        }
    }

    /// Lets time run to `t1` without events, integrating tracked quantities.
    fn flow_to(&mut self, t1: f64) {
        let t0 = self.clock;
        if t1 <= t0 {
            return;
        }
        for j in 0..self.lambdas.len() {
            let l = self.lambdas[j];
            let d1 = (-l * (t1 - self.t_ref)).exp();
            self.laplace_integral[j] += self.s_ref[j] * (self.decay[j] - d1) / l;
            self.decay[j] = d1;
        }
        for tr in &mut self.eps {
            let mut t = t0;
            while let Some(&(birth, v, serial)) = tr.queue.front() {
                let cross = birth + tr.eps;
                if cross > t1 {
                    break;
                }
                tr.queue.pop_front();
                if self.nodes[v as usize].serial == serial {
                    let cross = cross.max(t);
                    tr.integral += (1 + tr.old_count) as f64 * (cross - t);
                    t = cross;
                    tr.old[v as usize] = true;
                    tr.old_count += 1;
                }
            }
            tr.integral += (1 + tr.old_count) as f64 * (t1 - t);
        }
        self.integral_time += t1 - t0;
        self.clock = t1;
        let lmax = self.lambdas.iter().cloned().fold(0.0, f64::max);
        if lmax * (self.clock - self.t_ref) > 300.0 {
            self.rebase();
        }
    }

    fn replace_child(&mut self, parent: u32, old: u32, new: u32) {
        if parent == NONE {
            self.root = new;
        } else {
            let c = &mut self.nodes[parent as usize].child;
            if c[0] == old {
                c[0] = new;
            } else {
                debug_assert_eq!(c[1], old);
                c[1] = new;
            }
        }
    }

    /// The offspring of `k` replaces `l` at the current time.
    fn resample(&mut self, k: usize, l: usize) {
        let nl = self.lambdas.len();
        let (k, l) = (k as u32, l as u32);
        // Detach leaf l together with its parent p.
        let p = self.nodes[l as usize].parent;
        let pn = self.nodes[p as usize];
        let s = if pn.child[0] == l { pn.child[1] } else { pn.child[0] };
        let gp = pn.parent;
        let ls = self.nodes[s as usize].leaves as f64;
        for j in 0..nl {
            self.s_ref[j] -= ls * self.g[p as usize * nl + j];
        }
        for tr in &mut self.eps {
            if tr.old[p as usize] {
                tr.old[p as usize] = false;
                tr.old_count -= 1;
            }
        }
        let mut child_leaves = pn.leaves;
        let mut a = gp;
        while a != NONE {
            let node = &mut self.nodes[a as usize];
            let before = node.leaves;
            let other = (before - child_leaves) as f64;
            node.leaves -= 1;
            let next = node.parent;
            for j in 0..nl {
                self.s_ref[j] -= other * self.g[a as usize * nl + j];
            }
            child_leaves = before;
            a = next;
        }
        self.nodes[s as usize].parent = gp;
        self.replace_child(gp, p, s);

        // Re-use p as the new coalescence point of k and l.
        let q = p;
        let pk = self.nodes[k as usize].parent;
        let serial = self.next_serial;
        self.next_serial = self.next_serial.wrapping_add(1);
        self.nodes[q as usize] = Node { parent: pk, child: [k, l], birth: self.clock, leaves: 2, serial };
        self.nodes[k as usize].parent = q;
        self.nodes[l as usize].parent = q;
        self.replace_child(pk, k, q);
        for j in 0..nl {
            let gq = 1.0 / self.decay[j];
            self.g[q as usize * nl + j] = gq;
            self.s_ref[j] += gq;
        }
        let mut child_leaves = 2;
        let mut a = pk;
        while a != NONE {
            let node = &mut self.nodes[a as usize];
            node.leaves += 1;
            let other = (node.leaves - child_leaves) as f64;
            child_leaves = node.leaves;
            let next = node.parent;
            for j in 0..nl {
                self.s_ref[j] += other * self.g[a as usize * nl + j];
            }
            a = next;
        }
        for tr in &mut self.eps {
            tr.queue.push_back((self.clock, q, serial));
        }
        self.types[l as usize] = self.types[k as usize];

        self.since_refresh += 1;
        if self.since_refresh >= self.config.n {
            self.rebase();
        }
    }

    /// Pairwise distances as a dense row-major `N × N` matrix.
    pub fn distance_matrix(&self) -> Vec<f64> {
        let n = self.config.n;
        let mut d = vec![0.0; n * n];
        self.snapshot().for_each_pair(|i, j, dist| {
            d[i * n + j] = dist;
            d[j * n + i] = dist;
        });
        d
    }

    /// A read-only view for pair functionals at the current time.
    pub fn snapshot(&self) -> Snapshot<'_> {
        Snapshot::new(self)
    }

    /// Checks the internal consistency of the tree (leaf counts, parent
    /// links, birth order) and of the tracked sums.
    pub fn check_consistency(&self) -> std::result::Result<(), String> {
        let n = self.config.n;
        let mut seen = 0usize;
        let mut stack = vec![self.root];
        if self.nodes[self.root as usize].parent != NONE {
            return Err("root has a parent".into());
        }
        while let Some(v) = stack.pop() {
            seen += 1;
            let node = &self.nodes[v as usize];
            if (v as usize) < n {
                if node.leaves != 1 {
                    return Err(format!("leaf {v} has count {}", node.leaves));
                }
                continue;
            }
            let [a, b] = node.child;
            for c in [a, b] {
                let cn = &self.nodes[c as usize];
                if cn.parent != v {
                    return Err(format!("broken parent link {c} → {v}"));
                }
                if (c as usize) >= n && cn.birth < node.birth {
                    return Err(format!("child {c} older than parent {v}"));
                }
                stack.push(c);
            }
            if node.leaves != self.nodes[a as usize].leaves + self.nodes[b as usize].leaves {
                return Err(format!("leaf count mismatch at {v}"));
            }
        }
        if seen != 2 * n - 1 {
            return Err(format!("tree reaches {seen} of {} nodes", 2 * n - 1));
        }
        let snap = self.snapshot();
        for (j, &l) in self.lambdas.iter().enumerate() {
            let direct = snap.laplace_pair_sum(l);
            let tracked = self.laplace_pair_sum(j);
            if (direct - tracked).abs() > 1e-8 * direct.max(1.0) {
                return Err(format!("Laplace sum drift at λ={l}: {tracked} vs {direct}"));
            }
        }
        for (k, tr) in self.eps.iter().enumerate() {
            let direct = snap.n_eps(tr.eps);
            if direct != self.tracked_n_eps(k) {
                return Err(format!("N_ε mismatch at ε={}: {} vs {direct}", tr.eps, self.tracked_n_eps(k)));
            }
        }
        Ok(())
    }
}

/// Cumulative path functionals on a time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PathRecord {
    pub times: Vec<f64>,
    /// `W_λ(t) = λ∫₀ᵗ((λ+1)U_λ − 1)ds` per tracked λ, per grid time.
    pub w: Vec<Vec<f64>>,
    /// `B_ε(t) = √(3/2)∫₀ᵗ(N_ε − c_ε)ds` per tracked ε, per grid time.
    pub b: Vec<Vec<f64>>,
    /// Time average of `N_ε` over the whole path, per tracked ε.
    pub mean_n_eps: Vec<f64>,
    pub events: EventCounts,
}

/// Runs a stationary state along `grid` (increasing, positive, relative to
/// the current time) and records `W_λ` and `B_ε` with centring constants
/// `centers` (one per tracked ε).
pub fn record_path(state: &mut MoranState, grid: &[f64], centers: &[f64], rng: &mut Rng) -> Result<PathRecord> {
    if !state.stationary {
        return Err(Error::NotStationary);
    }
    if centers.len() != state.eps.len() {
        return Err(Error::InvalidParameter("one centring constant per tracked ε".into()));
    }
    if grid.is_empty() || grid[0] <= 0.0 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("grid must be positive and increasing".into()));
    }
    state.reset_integrals();
    let start = state.clock;
    let mut w = vec![Vec::with_capacity(grid.len()); state.lambdas.len()];
    let mut b = vec![Vec::with_capacity(grid.len()); state.eps.len()];
    let mut events = EventCounts::default();
    for &t in grid {
        events += state.advance(start + t - state.clock, rng);
        for (j, wj) in w.iter_mut().enumerate() {
            wj.push(state.lambdas[j] * state.centred_laplace_integral(j));
        }
        for (k, bk) in b.iter_mut().enumerate() {
            bk.push((1.5f64).sqrt() * (state.n_eps_integral(k) - centers[k] * state.integral_time));
        }
    }
    let mean_n_eps = (0..state.eps.len()).map(|k| state.n_eps_integral(k) / state.integral_time).collect();
    Ok(PathRecord { times: grid.to_vec(), w, b, mean_n_eps, events })
}

#[cfg(test)]
mod tests;
