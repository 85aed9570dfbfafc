//! Simulation state and the one-customer transition.
//!
//! Customer `t+1` selects each old dish `j` independently with inclusion
//! probability
//!
//! ```text
//! P(t, j) = w * [ (1 - iota) * K(t,j)/(theta + t)
//!               + iota * (1/D_t) * sum_i K(t,i)/(theta + t) ]
//!         = (1 - iota) * w * K(t,j)/(theta + t) + iota * Pbar(t)
//! ```
//!
//! and then tries a Poisson(`alpha/(t+1)^(1-beta)`) number of new dishes.
//! The second form above is used everywhere so that `iota = 1` makes the
//! inclusion probability bitwise equal to the mean `Pbar(t)` for every
//! dish.
//!
//! Untagged dishes with the same count share one inclusion probability,
//! so they are stored as a count histogram. Two stepping strategies give
//! the same one-step conditional law:
//!
//! * per-bucket `Binomial(n_k, P(k))` draws for the handful of buckets
//!   whose inclusion probability is large (the "head"), and
//! * a thinning scan for the remaining mass: candidate slots arrive with
//!   geometric gaps at a rate `q` that bounds every tail probability and
//!   are accepted with probability `P(k)/q`.
//!
//! The thinning scan makes the per-step cost proportional to the number
//! of *selections* rather than the number of dishes in the regimes where
//! inclusion probabilities decay. A naive per-dish mode is retained as a
//! distributional oracle.
//!
//! Randomness is consumed in a frozen order: head buckets, thinning
//! scan, tagged dishes, innovation. Checkpoint recording never touches
//! the generator.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fenwick::Fenwick;
use crate::observables::LambdaTable;
use crate::params::Parameters;
use crate::rng::{bernoulli, geometric_failures_with, replica_rng, SimRng};
use crate::sampling::{binomial, poisson, poisson_with_exp};

/// Maximum head size before it is re-trimmed.
const HEAD_MAX: usize = 48;
/// Head size targeted by a trim or a deepening pass.
const HEAD_TARGET: usize = 16;
/// Between efficiency checks of the thinning scan (steps).
const TUNE_INTERVAL: u64 = 1024;

/// One individually tracked dish.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaggedDish {
    /// Birth-order identity (1 = first dish ever observed).
    pub id: u64,
    /// First time step at which the dish appears.
    pub birth: u64,
    /// Number of customers who tried the dish so far.
    pub count: u64,
}

/// What one arriving customer did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepRecord {
    /// Time after the step (index of the arriving customer).
    pub t_new: u64,
    /// Dishes tried by this customer.
    pub tried: u64,
    /// New dishes among them.
    pub new_dishes: u64,
    /// Old dishes among them (tagged and untagged).
    pub old_selected: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Bucket {
    count: u64,
    width: u64,
}

/// Untagged-dish storage.
#[derive(Debug, Clone)]
enum DishStore {
    Histogram(Histogram),
    /// One entry per dish; reference implementation.
    PerDish(Vec<u64>),
}

#[derive(Debug, Clone)]
struct Histogram {
    /// Buckets whose inclusion probability is too large for thinning to
    /// be efficient. Scanned directly each step. Empty until the tuner
    /// decides otherwise.
    head: Vec<Bucket>,
    /// Count value above which a bucket belongs to the head. Tail
    /// buckets always satisfy `count <= tail_cap`.
    tail_cap: u64,
    /// Append-only bucket list (duplicate counts and zero-width
    /// tombstones allowed), with a Fenwick tree over the widths.
    tail: Vec<Bucket>,
    fenwick: Fenwick,
    tail_slots: u64,
    dead: usize,
    /// Thinning efficiency counters since the last tuning pass.
    cand_since_tune: u64,
    sel_since_tune: u64,
    steps_since_tune: u64,
    /// Live bucket count at the last compaction (bloat trigger).
    len_after_compact: usize,
    /// Per-step selection scratch (kept to avoid reallocation).
    head_sel: Vec<(usize, u64)>,
    tail_sel: Vec<(usize, u64)>,
    /// Lifetime engine counters (diagnostics only).
    total_candidates: u64,
    total_selections: u64,
    total_compactions: u64,
    total_head_draws: u64,
}

impl Histogram {
    fn new() -> Self {
        Histogram {
            head: Vec::new(),
            tail_cap: u64::MAX,
            tail: Vec::new(),
            fenwick: Fenwick::new(),
            tail_slots: 0,
            dead: 0,
            cand_since_tune: 0,
            sel_since_tune: 0,
            steps_since_tune: 0,
            len_after_compact: 0,
            head_sel: Vec::new(),
            tail_sel: Vec::new(),
            total_candidates: 0,
            total_selections: 0,
            total_compactions: 0,
            total_head_draws: 0,
        }
    }

    fn push_tail(&mut self, count: u64, width: u64) {
        self.tail.push(Bucket { count, width });
        self.fenwick.push(width);
        self.tail_slots += width;
        if width == 0 {
            self.dead += 1;
        }
    }

    /// Drops tombstones and merges buckets with equal counts, so the
    /// tail stays near the number of distinct count values.
    fn compact_tail(&mut self) {
        self.total_compactions += 1;
        self.tail.retain(|b| b.width > 0);
        self.tail.sort_unstable_by(|a, b| b.count.cmp(&a.count));
        let mut merged: Vec<Bucket> = Vec::with_capacity(self.tail.len());
        for b in self.tail.drain(..) {
            match merged.last_mut() {
                Some(last) if last.count == b.count => last.width += b.width,
                _ => merged.push(b),
            }
        }
        self.tail = merged;
        self.fenwick.rebuild(self.tail.iter().map(|b| b.width));
        self.dead = 0;
        self.len_after_compact = self.tail.len();
    }

    fn maybe_compact(&mut self) {
        if self.dead > self.tail.len() / 2 + 32
            || self.tail.len() > 2 * self.len_after_compact + 64
        {
            self.compact_tail();
        }
    }

    /// Returns every head bucket to the tail and lifts the cap; the
    /// tuner re-forms a head if the scan gets wasteful again.
    fn retire_head(&mut self) {
        self.tail_cap = u64::MAX;
        let head = std::mem::take(&mut self.head);
        for b in head {
            if b.width > 0 {
                self.push_tail(b.count, b.width);
            }
        }
        self.maybe_compact();
    }
}

/// Storage/stepping mode. `Histogram` is the production path,
/// `Naive` the per-dish oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepMode {
    #[default]
    Histogram,
    Naive,
}

/// Full simulation state at time `t`.
#[derive(Debug, Clone)]
pub struct ModelState {
    /// Customers served so far.
    pub t: u64,
    store: DishStore,
    tagged: Vec<TaggedDish>,
    n_tagged: usize,
    /// Number of distinct dishes observed (tagged + untagged).
    d_total: u64,
    /// Sum of all dish counts = total dishes tried by customers 1..=t.
    sum_counts: u64,
    /// Largest count over all dishes (tagged included).
    max_count: u64,
    /// Dishes tried by the most recent customer.
    last_tried: u64,
    rng: SimRng,
    lambda_table: Option<Arc<LambdaTable>>,
}

/// Per-step snapshot of the inclusion-probability coefficients:
/// `P(k) = slope * k + base`.
#[derive(Debug, Clone, Copy)]
struct Coeffs {
    slope: f64,
    base: f64,
}

impl Coeffs {
    #[inline]
    fn p(&self, count: u64) -> f64 {
        self.slope * count as f64 + self.base
    }
}

impl ModelState {
    /// Serves customer 1: draws `N_1 ~ Poisson(alpha)`, tags the first
    /// `min(N_1, n_tagged)` dishes and puts the rest in the histogram.
    pub fn init(params: &Parameters, seed: u64, n_tagged: usize) -> ModelState {
        Self::init_with_mode(params, seed, n_tagged, StepMode::Histogram)
    }

    pub fn init_with_mode(
        params: &Parameters,
        seed: u64,
        n_tagged: usize,
        mode: StepMode,
    ) -> ModelState {
        let mut rng = replica_rng(seed, 0);
        let n1 = poisson(&mut rng, params.alpha);
        let mut state = ModelState {
            t: 1,
            store: match mode {
                StepMode::Histogram => DishStore::Histogram(Histogram::new()),
                StepMode::Naive => DishStore::PerDish(Vec::new()),
            },
            tagged: Vec::new(),
            n_tagged,
            d_total: 0,
            sum_counts: 0,
            max_count: 0,
            last_tried: n1,
            rng,
            lambda_table: None,
        };
        state.admit_new_dishes(n1, 1);
        state.d_total = n1;
        state.sum_counts = n1;
        if n1 > 0 {
            state.max_count = 1;
        }
        state
    }

    pub(crate) fn attach_lambda_table(&mut self, table: Arc<LambdaTable>) {
        self.lambda_table = Some(table);
    }

    /// Clones the state with a freshly seeded generator, for conditional
    /// Monte Carlo over one step from a fixed configuration.
    pub fn clone_with_seed(&self, seed: u64) -> ModelState {
        let mut st = self.clone();
        st.rng = replica_rng(seed, 1);
        st
    }

    pub fn d_total(&self) -> u64 {
        self.d_total
    }

    pub fn sum_counts(&self) -> u64 {
        self.sum_counts
    }

    pub fn tagged(&self) -> &[TaggedDish] {
        &self.tagged
    }

    /// Dishes tried by the most recent customer (`T_t`).
    pub fn last_tried(&self) -> u64 {
        self.last_tried
    }

    pub fn mode(&self) -> StepMode {
        match self.store {
            DishStore::Histogram(_) => StepMode::Histogram,
            DishStore::PerDish(_) => StepMode::Naive,
        }
    }

    /// `S_t = sum_j P(t,j) = w * sum_counts / (theta + t)`.
    ///
    /// This expression is the canonical one; `Pbar` and the per-dish
    /// probabilities are derived from it so that algebraically equal
    /// quantities are also bitwise equal.
    pub fn s_value(&self, params: &Parameters) -> f64 {
        params.w * self.sum_counts as f64 / (params.theta + self.t as f64)
    }

    /// `Pbar_t = S_t / D_t`; `None` while no dish has been observed.
    pub fn pbar(&self, params: &Parameters) -> Option<f64> {
        if self.d_total == 0 {
            None
        } else {
            Some(self.s_value(params) / self.d_total as f64)
        }
    }

    fn coeffs(&self, params: &Parameters) -> Coeffs {
        let slope = (1.0 - params.iota) * params.w / (params.theta + self.t as f64);
        let base = match self.pbar(params) {
            Some(pbar) => params.iota * pbar,
            None => 0.0,
        };
        Coeffs { slope, base }
    }

    /// Inclusion probability for a dish with `count_k` customers.
    ///
    /// Errors when no dish has been observed (the mean-popularity term
    /// divides by `D_t`) or when `count_k` is impossible at time `t`.
    pub fn inclusion_probability(&self, params: &Parameters, count_k: u64) -> Result<f64> {
        if self.d_total == 0 {
            return Err(Error::Undefined("no observed dishes".into()));
        }
        if count_k < 1 || count_k > self.t {
            return Err(Error::Undefined(format!(
                "count {count_k} impossible at time {}",
                self.t
            )));
        }
        Ok(self.coeffs(params).p(count_k))
    }

    /// Serves customer `t+1`. Dispatches on the storage mode.
    pub fn step(&mut self, params: &Parameters) -> StepRecord {
        let t_new = self.t + 1;
        let (lam, exp_neg) = match &self.lambda_table {
            Some(table) => table.mean_and_exp(self.t),
            None => {
                let lam = crate::observables::lambda_t(params, self.t);
                (lam, (-lam).exp())
            }
        };
        self.step_impl(params, lam, exp_neg, t_new)
    }

    fn step_impl(&mut self, params: &Parameters, lam: f64, exp_neg: f64, t_new: u64) -> StepRecord {
        let coeffs = self.coeffs(params);
        // Range check once per step on the largest probability in play.
        let p_max = coeffs.p(self.max_count.max(1));
        if !(0.0..=1.0).contains(&p_max) {
            panic!(
                "inclusion probability {p_max} outside [0,1] at t={} (internal invariant failure)",
                self.t
            );
        }

        let old_untagged = match &mut self.store {
            DishStore::Histogram(_) => self.step_histogram(coeffs),
            DishStore::PerDish(_) => self.step_naive_untagged(coeffs),
        };

        // Tagged dishes: one independent Bernoulli each, in birth order.
        let mut old_tagged = 0u64;
        for i in 0..self.tagged.len() {
            let p = coeffs.p(self.tagged[i].count);
            if bernoulli(&mut self.rng, p) {
                self.tagged[i].count += 1;
                self.max_count = self.max_count.max(self.tagged[i].count);
                old_tagged += 1;
            }
        }

        // Innovation.
        let n_new = poisson_with_exp(&mut self.rng, lam, exp_neg);
        self.admit_new_dishes(n_new, t_new);

        let old_selected = old_untagged + old_tagged;
        self.t = t_new;
        self.d_total += n_new;
        self.sum_counts += old_selected + n_new;
        if n_new > 0 {
            self.max_count = self.max_count.max(1);
        }
        let tried = old_selected + n_new;
        self.last_tried = tried;
        StepRecord {
            t_new,
            tried,
            new_dishes: n_new,
            old_selected,
        }
    }

    /// Appends `n` new dishes born at time `birth`: tag slots fill first
    /// (identities in draw order), the remainder goes to the store.
    fn admit_new_dishes(&mut self, n: u64, birth: u64) {
        let mut remaining = n;
        while remaining > 0 && self.tagged.len() < self.n_tagged {
            let id = (self.tagged.len() + 1) as u64;
            self.tagged.push(TaggedDish {
                id,
                birth,
                count: 1,
            });
            remaining -= 1;
        }
        if remaining == 0 {
            return;
        }
        match &mut self.store {
            DishStore::Histogram(h) => h.push_tail(1, remaining),
            DishStore::PerDish(counts) => {
                counts.extend(std::iter::repeat(1).take(remaining as usize))
            }
        }
    }

    /// Histogram transition for the untagged dishes; returns how many
    /// were selected.
    fn step_histogram(&mut self, coeffs: Coeffs) -> u64 {
        let DishStore::Histogram(h) = &mut self.store else {
            unreachable!()
        };
        if h.tail_slots == 0 && h.head.is_empty() {
            return 0;
        }
        h.steps_since_tune += 1;

        let mut selected = 0u64;
        // Head: direct per-bucket binomials; mutations deferred so every
        // draw sees the time-t state.
        let mut head_sel = std::mem::take(&mut h.head_sel);
        head_sel.clear();
        for (i, b) in h.head.iter().enumerate() {
            if b.width == 0 {
                continue;
            }
            h.total_head_draws += 1;
            let m = binomial(&mut self.rng, b.width, coeffs.p(b.count));
            if m > 0 {
                head_sel.push((i, m));
            }
        }

        // Tail: thinning scan with bound q >= P(count) for all tail buckets.
        let mut tail_sel = std::mem::take(&mut h.tail_sel);
        tail_sel.clear();
        if h.tail_slots > 0 {
            let bound_count = if h.head.is_empty() {
                // no head: the global max count may sit in the tail
                self.max_count.max(1)
            } else {
                h.tail_cap
            };
            let q = coeffs.p(bound_count.max(1));
            debug_assert!(q <= 1.0);
            if q > 0.0 && q < 1.0 {
                let ln_one_minus_q = (-q).ln_1p();
                let total = h.tail_slots as f64;
                let mut slot = geometric_failures_with(&mut self.rng, ln_one_minus_q);
                while slot < total {
                    h.cand_since_tune += 1;
                    h.total_candidates += 1;
                    let (idx, _off) = h.fenwick.locate(slot as u64);
                    let p = coeffs.p(h.tail[idx].count);
                    if bernoulli(&mut self.rng, p / q) {
                        h.sel_since_tune += 1;
                        h.total_selections += 1;
                        match tail_sel.last_mut() {
                            Some((last, m)) if *last == idx => *m += 1,
                            _ => tail_sel.push((idx, 1)),
                        }
                    }
                    slot += 1.0 + geometric_failures_with(&mut self.rng, ln_one_minus_q);
                }
            }
        }

        // Apply head promotions.
        for &(i, m) in &head_sel {
            selected += m;
            let count = h.head[i].count + 1;
            self.max_count = self.max_count.max(count);
            if h.head[i].width == m {
                // whole bucket advances together
                h.head[i].count = count;
            } else {
                h.head[i].width -= m;
                h.head.push(Bucket { count, width: m });
            }
        }
        // Apply tail promotions.
        for &(idx, m) in &tail_sel {
            selected += m;
            let count = h.tail[idx].count + 1;
            self.max_count = self.max_count.max(count);
            if h.tail[idx].width == m && count <= h.tail_cap {
                // order is irrelevant to the thinning scan, so a bucket
                // promoted in full just changes its count in place
                h.tail[idx].count = count;
                continue;
            }
            h.tail[idx].width -= m;
            if h.tail[idx].width == 0 {
                h.dead += 1;
            }
            h.fenwick.add(idx, -(m as i64));
            h.tail_slots -= m;
            if count > h.tail_cap {
                h.head.push(Bucket { count, width: m });
            } else {
                h.push_tail(count, m);
            }
        }
        h.head_sel = head_sel;
        h.tail_sel = tail_sel;

        // Structural upkeep (no randomness involved).
        h.maybe_compact();
        if h.head.len() > HEAD_MAX {
            Self::trim_head_impl(h);
        }
        if h.steps_since_tune >= TUNE_INTERVAL {
            Self::tune_histogram(h, coeffs, self.max_count);
        }
        selected
    }

    /// Rebalances an oversized head: raises `tail_cap` to the count of
    /// the `HEAD_TARGET+1`-th largest head bucket and moves everything
    /// at or below the new cap back to the tail. The cap only ever
    /// rises, so the tail invariant (`count <= tail_cap`) is preserved;
    /// in regimes where every count grows the cap keeps riding the
    /// spectrum upward.
    fn trim_head_impl(h: &mut Histogram) {
        h.head.retain(|b| b.width > 0);
        if h.head.len() <= HEAD_TARGET {
            return;
        }
        h.head.sort_unstable_by(|a, b| b.count.cmp(&a.count));
        let boundary = h.head[HEAD_TARGET].count;
        h.tail_cap = h.tail_cap.max(boundary);
        let cap = h.tail_cap;
        let mut moved = Vec::new();
        h.head.retain(|b| {
            if b.count > cap {
                true
            } else {
                moved.push(*b);
                false
            }
        });
        for b in moved {
            h.push_tail(b.count, b.width);
        }
        h.maybe_compact();
    }

    /// Periodically rebalances the head/tail split.
    ///
    /// Deepens the head with the largest tail counts when the thinning
    /// scan wastes candidates on a few high-probability buckets;
    /// retires the head when direct draws cost more per step than the
    /// whole store would cost under plain thinning (`coeffs` supplies
    /// the current probability scale for that estimate).
    fn tune_histogram(h: &mut Histogram, coeffs: Coeffs, max_count: u64) {
        let cand = h.cand_since_tune;
        let sel = h.sel_since_tune;
        let steps = h.steps_since_tune.max(1);
        h.cand_since_tune = 0;
        h.sel_since_tune = 0;
        h.steps_since_tune = 0;
        let wasteful = cand > 16 * (sel + 1) && cand / steps >= 4;
        if !wasteful {
            if !h.head.is_empty() {
                if h.head.len() > 2 * HEAD_TARGET {
                    Self::trim_head_impl(h);
                }
                // Candidate rate if the head were folded back into the
                // thinning scan, versus the direct draws it costs now.
                let head_slots: u64 = h.head.iter().map(|b| b.width).sum();
                let est_after = (h.tail_slots + head_slots) as f64 * coeffs.p(max_count.max(1));
                let cost_now = h.head.len() as f64 + cand as f64 / steps as f64;
                if est_after < 0.75 * cost_now {
                    h.retire_head();
                }
            }
            return;
        }
        // Deepen the head with the largest tail counts.
        let mut counts: Vec<u64> = h
            .tail
            .iter()
            .filter(|b| b.width > 0)
            .map(|b| b.count)
            .collect();
        if counts.len() <= HEAD_TARGET {
            return;
        }
        counts.sort_unstable_by(|a, b| b.cmp(a));
        let new_cap = counts[HEAD_TARGET];
        if new_cap >= h.tail_cap {
            return;
        }
        h.tail_cap = new_cap;
        for idx in 0..h.tail.len() {
            let b = h.tail[idx];
            if b.width > 0 && b.count > new_cap {
                h.fenwick.add(idx, -(b.width as i64));
                h.tail_slots -= b.width;
                h.tail[idx].width = 0;
                h.dead += 1;
                h.head.push(b);
            }
        }
        h.maybe_compact();
    }

    /// Naive transition: one Bernoulli per untagged dish, in storage
    /// order. Same one-step conditional law as the histogram path.
    fn step_naive_untagged(&mut self, coeffs: Coeffs) -> u64 {
        let DishStore::PerDish(counts) = &mut self.store else {
            unreachable!()
        };
        let mut selected = 0u64;
        for c in counts.iter_mut() {
            if bernoulli(&mut self.rng, coeffs.p(*c)) {
                *c += 1;
                selected += 1;
                if *c > self.max_count {
                    self.max_count = *c;
                }
            }
        }
        selected
    }

    /// Sum of `n_k * P(k)^2` over untagged buckets plus `P(K)^2` over
    /// tagged dishes: the exact `R_t`.
    pub fn r_value(&self, params: &Parameters) -> f64 {
        let coeffs = self.coeffs(params);
        let mut r = 0.0;
        match &self.store {
            DishStore::Histogram(h) => {
                for b in h.head.iter().chain(h.tail.iter()) {
                    if b.width > 0 {
                        let p = coeffs.p(b.count);
                        r += b.width as f64 * p * p;
                    }
                }
            }
            DishStore::PerDish(counts) => {
                for &c in counts {
                    let p = coeffs.p(c);
                    r += p * p;
                }
            }
        }
        for d in &self.tagged {
            let p = coeffs.p(d.count);
            r += p * p;
        }
        r
    }

    /// Inclusion probabilities of the tagged dishes at the current time.
    pub fn tagged_probabilities(&self, params: &Parameters) -> Vec<f64> {
        let coeffs = self.coeffs(params);
        self.tagged.iter().map(|d| coeffs.p(d.count)).collect()
    }

    /// Lifetime engine counters: (tail candidates, tail selections,
    /// compactions, head draws, head len, tail len). Diagnostics only.
    #[doc(hidden)]
    pub fn engine_counters(&self) -> (u64, u64, u64, u64, usize, usize) {
        match &self.store {
            DishStore::Histogram(h) => (
                h.total_candidates,
                h.total_selections,
                h.total_compactions,
                h.total_head_draws,
                h.head.len(),
                h.tail.len(),
            ),
            DishStore::PerDish(_) => (0, 0, 0, 0, 0, 0),
        }
    }

    /// Recomputes the redundant aggregates from the raw store and checks
    /// them against the maintained ones. Test support.
    pub fn check_invariants(&self) -> Result<()> {
        let mut dishes = self.tagged.len() as u64;
        let mut sum = self.tagged.iter().map(|d| d.count).sum::<u64>();
        let mut maxc = self.tagged.iter().map(|d| d.count).max().unwrap_or(0);
        match &self.store {
            DishStore::Histogram(h) => {
                let mut slots = 0u64;
                for (i, b) in h.tail.iter().enumerate() {
                    dishes += b.width;
                    sum += b.count * b.width;
                    slots += b.width;
                    if b.width > 0 {
                        maxc = maxc.max(b.count);
                        if b.count > h.tail_cap {
                            return Err(Error::InvalidParameter(format!(
                                "tail bucket {i} count {} above cap {}",
                                b.count, h.tail_cap
                            )));
                        }
                    }
                }
                if slots != h.tail_slots {
                    return Err(Error::InvalidParameter("tail slot total mismatch".into()));
                }
                for b in &h.head {
                    dishes += b.width;
                    sum += b.count * b.width;
                    if b.width > 0 {
                        maxc = maxc.max(b.count);
                    }
                }
            }
            DishStore::PerDish(counts) => {
                dishes += counts.len() as u64;
                sum += counts.iter().sum::<u64>();
                maxc = maxc.max(counts.iter().copied().max().unwrap_or(0));
            }
        }
        if dishes != self.d_total {
            return Err(Error::InvalidParameter(format!(
                "d_total {} != recomputed {dishes}",
                self.d_total
            )));
        }
        if sum != self.sum_counts {
            return Err(Error::InvalidParameter(format!(
                "sum_counts {} != recomputed {sum}",
                self.sum_counts
            )));
        }
        if maxc != self.max_count && !(maxc == 0 && self.max_count <= 1) {
            return Err(Error::InvalidParameter(format!(
                "max_count {} != recomputed {maxc}",
                self.max_count
            )));
        }
        for d in &self.tagged {
            if d.count < 1 || d.count > self.t - d.birth + 1 {
                return Err(Error::InvalidParameter(format!(
                    "tagged dish {} count {} impossible (birth {}, t {})",
                    d.id, d.count, d.birth, self.t
                )));
            }
        }
        if maxc > self.t {
            return Err(Error::InvalidParameter("count exceeds time".into()));
        }
        Ok(())
    }
}
