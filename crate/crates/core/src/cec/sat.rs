// SPDX-License-Identifier: Apache-2.0

//! Incremental CDCL solver: two watched literals, first-UIP learning with
//! clause minimization, VSIDS, phase saving, Luby restarts and LBD-based
//! clause deletion. Supports solving under assumptions.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Instant;

/// `2 * var + negated`, vars from 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SatLit(u32);

impl SatLit {
    #[inline]
    pub fn new(var: u32, negated: bool) -> SatLit {
        SatLit(var << 1 | negated as u32)
    }

    #[inline]
    pub fn var(self) -> u32 {
        self.0 >> 1
    }

    #[inline]
    pub fn is_negated(self) -> bool {
        self.0 & 1 == 1
    }

    #[inline]
    fn code(self) -> usize {
        self.0 as usize
    }

    /// DIMACS literal (vars from 1, sign for polarity).
    pub fn from_dimacs(d: i32) -> SatLit {
        assert!(d != 0, "0 terminates DIMACS clauses");
        SatLit::new(d.unsigned_abs() - 1, d < 0)
    }

    pub fn to_dimacs(self) -> i32 {
        let v = self.var() as i32 + 1;
        if self.is_negated() {
            -v
        } else {
            v
        }
    }
}

impl std::ops::Not for SatLit {
    type Output = SatLit;
    #[inline]
    fn not(self) -> SatLit {
        SatLit(self.0 ^ 1)
    }
}

/// Limits for one `solve` call. Exhausting any of them yields `Unknown`.
#[derive(Clone, Debug, Default)]
pub struct Budget {
    pub conflicts: Option<u64>,
    pub deadline: Option<Instant>,
    pub cancel: Option<Arc<AtomicBool>>,
}

impl Budget {
    pub fn unlimited() -> Budget {
        Budget::default()
    }

    pub fn conflicts(n: u64) -> Budget {
        Budget {
            conflicts: Some(n),
            ..Budget::default()
        }
    }

    /// Why the budget is exhausted, if it is (conflict limit aside).
    pub fn expired(&self) -> Option<&'static str> {
        if self.cancel.as_ref().is_some_and(|c| c.load(Ordering::Relaxed)) {
            return Some("cancelled");
        }
        if self.deadline.is_some_and(|d| Instant::now() >= d) {
            return Some("time budget exhausted");
        }
        None
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveResult {
    Sat,
    Unsat,
    Unknown(&'static str),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub restarts: u64,
    pub solves: u64,
}

const NO_REASON: u32 = u32::MAX;
const UNDEF: i8 = 0;
const TRUE: i8 = 1;
const FALSE: i8 = -1;

/// Clause arena entry: `[len, flags | lbd, lits...]`.
const LEARNT: u32 = 1 << 31;
const DELETED: u32 = 1 << 30;
const LBD_MASK: u32 = DELETED - 1;

#[derive(Clone, Copy)]
struct Watch {
    cref: u32,
    blocker: SatLit,
    binary: bool,
}

/// Binary max-heap over variables keyed by activity.
#[derive(Default)]
struct VarHeap {
    heap: Vec<u32>,
    pos: Vec<u32>,
}

const NOT_IN_HEAP: u32 = u32::MAX;

impl VarHeap {
    fn grow(&mut self, n: usize) {
        self.pos.resize(n, NOT_IN_HEAP);
    }

    fn contains(&self, v: u32) -> bool {
        self.pos[v as usize] != NOT_IN_HEAP
    }

    fn up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let p = (i - 1) / 2;
            if act[self.heap[p] as usize] >= act[v as usize] {
                break;
            }
            self.heap[i] = self.heap[p];
            self.pos[self.heap[i] as usize] = i as u32;
            i = p;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i as u32;
    }

    fn down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let c = if r < n && act[self.heap[r] as usize] > act[self.heap[l] as usize] { r } else { l };
            if act[self.heap[c] as usize] <= act[v as usize] {
                break;
            }
            self.heap[i] = self.heap[c];
            self.pos[self.heap[i] as usize] = i as u32;
            i = c;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i as u32;
    }

    fn insert(&mut self, v: u32, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.heap.push(v);
        let i = self.heap.len() - 1;
        self.pos[v as usize] = i as u32;
        self.up(i, act);
    }

    fn bumped(&mut self, v: u32, act: &[f64]) {
        if self.contains(v) {
            let i = self.pos[v as usize] as usize;
            self.up(i, act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<u32> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().expect("non-empty");
        self.pos[top as usize] = NOT_IN_HEAP;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = 0;
            self.down(0, act);
        }
        Some(top)
    }
}

fn luby(mut i: u64) -> u64 {
    // Finite subsequence containing index i, then its position in it.
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < i + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != i {
        size = (size - 1) / 2;
        seq -= 1;
        i %= size;
    }
    1 << seq
}

pub struct Solver {
    arena: Vec<u32>,
    wasted: usize,
    watches: Vec<Vec<Watch>>,
    assigns: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<u32>,
    phase: Vec<bool>,
    activity: Vec<f64>,
    var_inc: f64,
    heap: VarHeap,
    trail: Vec<SatLit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    seen: Vec<bool>,
    ok: bool,
    learnts: usize,
    max_learnts: usize,
    model: Vec<bool>,
    /// Variables decided before any other, in order.
    priority: Vec<u32>,
    pub stats: SolverStats,
}

impl Default for Solver {
    fn default() -> Solver {
        Solver::new()
    }
}

impl Solver {
    pub fn new() -> Solver {
        Solver {
            arena: Vec::new(),
            wasted: 0,
            watches: Vec::new(),
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            phase: Vec::new(),
            activity: Vec::new(),
            var_inc: 1.0,
            heap: VarHeap::default(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            seen: Vec::new(),
            ok: true,
            learnts: 0,
            max_learnts: 4000,
            model: Vec::new(),
            priority: Vec::new(),
            stats: SolverStats::default(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    pub fn new_var(&mut self) -> u32 {
        let v = self.assigns.len() as u32;
        self.ensure_vars(v as usize + 1);
        v
    }

    pub fn ensure_vars(&mut self, n: usize) {
        let old = self.assigns.len();
        if n <= old {
            return;
        }
        self.assigns.resize(n, UNDEF);
        self.level.resize(n, 0);
        self.reason.resize(n, NO_REASON);
        self.phase.resize(n, false);
        self.activity.resize(n, 0.0);
        self.seen.resize(n, false);
        self.watches.resize(2 * n, Vec::new());
        self.heap.grow(n);
        for v in old..n {
            self.heap.insert(v as u32, &self.activity);
        }
    }

    #[inline]
    fn value(&self, l: SatLit) -> i8 {
        let a = self.assigns[l.var() as usize];
        if l.is_negated() {
            -a
        } else {
            a
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, l: SatLit, reason: u32) {
        let v = l.var() as usize;
        self.assigns[v] = if l.is_negated() { FALSE } else { TRUE };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Adds a clause at decision level 0. Returns false once the formula is
    /// known unsatisfiable.
    pub fn add_clause(&mut self, lits: &[SatLit]) -> bool {
        if !self.ok {
            return false;
        }
        debug_assert_eq!(self.decision_level(), 0);
        let max_var = lits.iter().map(|l| l.var() as usize + 1).max().unwrap_or(0);
        self.ensure_vars(max_var);
        let mut c: Vec<SatLit> = lits.to_vec();
        c.sort_unstable();
        c.dedup();
        if c.windows(2).any(|w| w[0] == !w[1]) || c.iter().any(|&l| self.value(l) == TRUE) {
            return true;
        }
        c.retain(|&l| self.value(l) != FALSE);
        match c.len() {
            0 => {
                self.ok = false;
            }
            1 => {
                self.enqueue(c[0], NO_REASON);
                if self.propagate().is_some() {
                    self.ok = false;
                }
            }
            _ => {
                self.attach(c, false, 0);
            }
        }
        self.ok
    }

    fn attach(&mut self, lits: Vec<SatLit>, learnt: bool, lbd: u32) -> u32 {
        let cref = self.arena.len() as u32;
        self.arena.push(lits.len() as u32);
        self.arena.push(if learnt { LEARNT } else { 0 } | lbd.min(LBD_MASK));
        self.arena.extend(lits.iter().map(|l| l.0));
        self.watch(cref);
        if learnt {
            self.learnts += 1;
        }
        cref
    }

    fn watch(&mut self, cref: u32) {
        let c = cref as usize;
        let binary = self.arena[c] == 2;
        let (l0, l1) = (SatLit(self.arena[c + 2]), SatLit(self.arena[c + 3]));
        self.watches[l0.code()].push(Watch { cref, blocker: l1, binary });
        self.watches[l1.code()].push(Watch { cref, blocker: l0, binary });
    }

    #[inline]
    fn lits(&self, cref: u32) -> &[u32] {
        let c = cref as usize;
        &self.arena[c + 2..c + 2 + self.arena[c] as usize]
    }

    /// Offsets of live clauses.
    fn clause_refs(&self) -> Vec<u32> {
        let mut out = Vec::new();
        let mut c = 0;
        while c < self.arena.len() {
            if self.arena[c + 1] & DELETED == 0 {
                out.push(c as u32);
            }
            c += 2 + self.arena[c] as usize;
        }
        out
    }

    /// Unit propagation; returns a conflicting clause.
    fn propagate(&mut self) -> Option<u32> {
        let mut conflict = None;
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let (mut i, mut j) = (0, 0);
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                let bv = self.value(w.blocker);
                if bv == TRUE {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                if w.binary {
                    ws[j] = w;
                    j += 1;
                    if bv == FALSE {
                        conflict = Some(w.cref);
                        break;
                    }
                    self.enqueue(w.blocker, w.cref);
                    continue;
                }
                let c = w.cref as usize;
                let len = self.arena[c] as usize;
                let base = c + 2;
                if self.arena[base] == false_lit.0 {
                    self.arena.swap(base, base + 1);
                }
                let first = SatLit(self.arena[base]);
                let nw = Watch {
                    cref: w.cref,
                    blocker: first,
                    binary: false,
                };
                if first != w.blocker && self.value(first) == TRUE {
                    ws[j] = nw;
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in base + 2..base + len {
                    let l = SatLit(self.arena[k]);
                    if self.value(l) != FALSE {
                        self.arena.swap(base + 1, k);
                        self.watches[l.code()].push(nw);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = nw;
                j += 1;
                if self.value(first) == FALSE {
                    conflict = Some(w.cref);
                    break;
                }
                self.enqueue(first, w.cref);
            }
            if conflict.is_some() {
                while i < ws.len() {
                    ws[j] = ws[i];
                    i += 1;
                    j += 1;
                }
                self.qhead = self.trail.len();
            }
            ws.truncate(j);
            self.watches[false_lit.code()] = ws;
            if conflict.is_some() {
                break;
            }
        }
        conflict
    }

    fn bump(&mut self, v: u32) {
        let a = &mut self.activity[v as usize];
        *a += self.var_inc;
        if *a > 1e100 {
            for x in self.activity.iter_mut() {
                *x *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.bumped(v, &self.activity);
    }

    /// First-UIP learnt clause (asserting literal first), backjump level
    /// and LBD.
    fn analyze(&mut self, mut confl: u32) -> (Vec<SatLit>, u32, u32) {
        let mut learnt = vec![SatLit(0)];
        let mut pending = 0usize;
        let mut p: Option<SatLit> = None;
        let mut idx = self.trail.len();
        let dl = self.decision_level();
        loop {
            let pivot = p.map(|l| l.var());
            let c = confl as usize;
            for k in c + 2..c + 2 + self.arena[c] as usize {
                let q = SatLit(self.arena[k]);
                let v = q.var() as usize;
                if Some(q.var()) != pivot && !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump(q.var());
                    if self.level[v] >= dl {
                        pending += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var() as usize] {
                    break;
                }
            }
            let lit = self.trail[idx];
            p = Some(lit);
            self.seen[lit.var() as usize] = false;
            pending -= 1;
            if pending == 0 {
                learnt[0] = !lit;
                break;
            }
            confl = self.reason[lit.var() as usize];
        }
        // Drop literals implied by the rest of the clause.
        let marked: Vec<SatLit> = learnt[1..].to_vec();
        let mut keep = vec![learnt[0]];
        for &q in &marked {
            let r = self.reason[q.var() as usize];
            let redundant = r != NO_REASON
                && self.lits(r).iter().all(|&x| {
                    let v = (x >> 1) as usize;
                    v == q.var() as usize || self.seen[v] || self.level[v] == 0
                });
            if !redundant {
                keep.push(q);
            }
        }
        for q in &marked {
            self.seen[q.var() as usize] = false;
        }
        let mut learnt = keep;
        let mut bt = 0;
        if learnt.len() > 1 {
            let mut best = 1;
            for k in 2..learnt.len() {
                if self.level[learnt[k].var() as usize] > self.level[learnt[best].var() as usize] {
                    best = k;
                }
            }
            learnt.swap(1, best);
            bt = self.level[learnt[1].var() as usize];
        }
        let mut levels: Vec<u32> = learnt.iter().map(|l| self.level[l.var() as usize]).collect();
        levels.sort_unstable();
        levels.dedup();
        (learnt, bt, levels.len() as u32)
    }

    fn cancel_until(&mut self, lvl: u32) {
        if self.decision_level() <= lvl {
            return;
        }
        let lim = self.trail_lim[lvl as usize];
        for k in (lim..self.trail.len()).rev() {
            let v = self.trail[k].var() as usize;
            self.phase[v] = !self.trail[k].is_negated();
            self.assigns[v] = UNDEF;
            self.reason[v] = NO_REASON;
            self.heap.insert(v as u32, &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(lvl as usize);
        self.qhead = lim;
    }

    fn locked(&self, cref: u32) -> bool {
        self.lits(cref)[..2].iter().any(|&x| {
            let l = SatLit(x);
            self.reason[l.var() as usize] == cref && self.value(l) == TRUE
        })
    }

    /// Deletes about half of the learnt clauses with LBD above 2, worst
    /// LBD first, and compacts the arena when half of it is garbage.
    fn reduce_db(&mut self) {
        let mut cand: Vec<(u32, u32)> = self
            .clause_refs()
            .into_iter()
            .filter(|&c| {
                let f = self.arena[c as usize + 1];
                f & LEARNT != 0 && f & LBD_MASK > 2 && !self.locked(c)
            })
            .map(|c| (self.arena[c as usize + 1] & LBD_MASK, c))
            .collect();
        cand.sort_unstable_by(|a, b| b.cmp(a));
        for &(_, c) in cand.iter().take(cand.len() / 2) {
            self.arena[c as usize + 1] |= DELETED;
            self.wasted += 2 + self.arena[c as usize] as usize;
            self.learnts -= 1;
        }
        if self.wasted * 2 > self.arena.len() {
            self.compact();
        } else {
            let arena = &self.arena;
            for ws in self.watches.iter_mut() {
                ws.retain(|w| arena[w.cref as usize + 1] & DELETED == 0);
            }
        }
    }

    fn compact(&mut self) {
        let mut moved: rustc_hash::FxHashMap<u32, u32> = rustc_hash::FxHashMap::default();
        let mut arena = Vec::with_capacity(self.arena.len() - self.wasted);
        for c in self.clause_refs() {
            let c = c as usize;
            moved.insert(c as u32, arena.len() as u32);
            arena.extend_from_slice(&self.arena[c..c + 2 + self.arena[c] as usize]);
        }
        self.arena = arena;
        self.wasted = 0;
        for r in self.reason.iter_mut() {
            if *r != NO_REASON {
                *r = moved.get(r).copied().unwrap_or(NO_REASON);
            }
        }
        for ws in self.watches.iter_mut() {
            ws.clear();
        }
        for c in self.clause_refs() {
            self.watch(c);
        }
    }

    /// Branch on `vars` first (circuit inputs, typically).
    pub fn set_priority(&mut self, vars: &[u32]) {
        if let Some(m) = vars.iter().map(|&v| v as usize + 1).max() {
            self.ensure_vars(m);
        }
        self.priority = vars.to_vec();
    }

    fn pick_branch(&mut self) -> Option<SatLit> {
        for &v in &self.priority {
            if self.assigns[v as usize] == UNDEF {
                return Some(SatLit::new(v, !self.phase[v as usize]));
            }
        }
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.assigns[v as usize] == UNDEF {
                return Some(SatLit::new(v, !self.phase[v as usize]));
            }
        }
        None
    }

    /// Solves under `assumptions`. The solver stays usable afterwards.
    pub fn solve(&mut self, assumptions: &[SatLit], budget: &Budget) -> SolveResult {
        self.stats.solves += 1;
        if !self.ok {
            return SolveResult::Unsat;
        }
        if let Some(m) = assumptions.iter().map(|l| l.var() as usize + 1).max() {
            self.ensure_vars(m);
        }
        let start_conflicts = self.stats.conflicts;
        let mut restart = 0u64;
        let result = 'search: loop {
            let limit = luby(restart) * 64;
            restart += 1;
            let mut local = 0u64;
            loop {
                if let Some(confl) = self.propagate() {
                    self.stats.conflicts += 1;
                    local += 1;
                    if self.decision_level() == 0 {
                        self.ok = false;
                        break 'search SolveResult::Unsat;
                    }
                    let (learnt, bt, lbd) = self.analyze(confl);
                    self.cancel_until(bt);
                    if learnt.len() == 1 {
                        self.enqueue(learnt[0], NO_REASON);
                    } else {
                        let l0 = learnt[0];
                        let cref = self.attach(learnt, true, lbd);
                        self.enqueue(l0, cref);
                    }
                    self.var_inc /= 0.95;
                    if self.stats.conflicts.is_multiple_of(256) {
                        if let Some(why) = budget.expired() {
                            break 'search SolveResult::Unknown(why);
                        }
                    }
                    if budget.conflicts.is_some_and(|n| self.stats.conflicts - start_conflicts >= n) {
                        break 'search SolveResult::Unknown("conflict budget exhausted");
                    }
                    continue;
                }
                if local >= limit {
                    self.stats.restarts += 1;
                    self.cancel_until(0);
                    break;
                }
                if self.learnts >= self.max_learnts + self.trail.len() {
                    self.reduce_db();
                    self.max_learnts += self.max_learnts / 10;
                }
                let dl = self.decision_level() as usize;
                let next = if dl < assumptions.len() {
                    let a = assumptions[dl];
                    match self.value(a) {
                        TRUE => {
                            self.trail_lim.push(self.trail.len());
                            continue;
                        }
                        FALSE => break 'search SolveResult::Unsat,
                        _ => a,
                    }
                } else {
                    self.stats.decisions += 1;
                    if self.stats.decisions % 1024 == 0 {
                        if let Some(why) = budget.expired() {
                            break 'search SolveResult::Unknown(why);
                        }
                    }
                    match self.pick_branch() {
                        Some(l) => l,
                        None => {
                            self.model = self.assigns.iter().map(|&a| a == TRUE).collect();
                            break 'search SolveResult::Sat;
                        }
                    }
                };
                self.trail_lim.push(self.trail.len());
                self.enqueue(next, NO_REASON);
            }
        };
        self.cancel_until(0);
        if result == SolveResult::Sat && !self.model_satisfies_clauses() {
            return SolveResult::Unknown("model check failed");
        }
        result
    }

    fn model_satisfies_clauses(&self) -> bool {
        self.clause_refs()
            .into_iter()
            .filter(|&c| self.arena[c as usize + 1] & LEARNT == 0)
            .all(|c| {
                self.lits(c).iter().any(|&x| {
                    let l = SatLit(x);
                    self.model[l.var() as usize] != l.is_negated()
                })
            })
            && self.trail.iter().all(|l| self.model[l.var() as usize] != l.is_negated())
    }

    /// Value of `var` in the last satisfying assignment.
    pub fn model_value(&self, var: u32) -> bool {
        self.model.get(var as usize).copied().unwrap_or(false)
    }

    pub fn model(&self) -> &[bool] {
        &self.model
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn lits(c: &[i32]) -> Vec<SatLit> {
        c.iter().map(|&d| SatLit::from_dimacs(d)).collect()
    }

    fn brute(n: usize, cls: &[Vec<i32>]) -> bool {
        (0u32..1 << n).any(|m| cls.iter().all(|c| c.iter().any(|&d| ((m >> (d.unsigned_abs() - 1)) & 1 == 1) == (d > 0))))
    }

    #[test]
    fn luby_prefix() {
        let s: Vec<u64> = (0..15).map(luby).collect();
        assert_eq!(s, vec![1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
    }

    #[test]
    fn tiny_formulas() {
        let mut s = Solver::new();
        s.add_clause(&lits(&[1]));
        assert_eq!(s.solve(&[], &Budget::unlimited()), SolveResult::Sat);
        assert!(s.model_value(0));
        s.add_clause(&lits(&[-1]));
        assert_eq!(s.solve(&[], &Budget::unlimited()), SolveResult::Unsat);
    }

    #[test]
    fn assumptions_do_not_stick() {
        let mut s = Solver::new();
        s.add_clause(&lits(&[1, 2]));
        s.add_clause(&lits(&[-1, 2]));
        assert_eq!(s.solve(&lits(&[-2]), &Budget::unlimited()), SolveResult::Unsat);
        assert_eq!(s.solve(&lits(&[1]), &Budget::unlimited()), SolveResult::Sat);
        assert!(s.model_value(1));
    }

    #[test]
    fn random_3sat_matches_enumeration() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 20;
        for _ in 0..100 {
            let m = (n as f64 * 4.26) as usize;
            let cls: Vec<Vec<i32>> = (0..m)
                .map(|_| {
                    (0..3)
                        .map(|_| {
                            let v = rng.gen_range(1..=n as i32);
                            if rng.gen() {
                                v
                            } else {
                                -v
                            }
                        })
                        .collect()
                })
                .collect();
            let mut s = Solver::new();
            for c in &cls {
                s.add_clause(&lits(c));
            }
            let r = s.solve(&[], &Budget::unlimited());
            assert_eq!(r == SolveResult::Sat, brute(n, &cls));
            if r == SolveResult::Sat {
                assert!(cls.iter().all(|c| c.iter().any(|&d| s.model_value(d.unsigned_abs() - 1) == (d > 0))));
            }
        }
    }

    #[test]
    fn pigeonhole_is_unsat() {
        // 7 pigeons, 6 holes.
        let (p, h) = (7, 6);
        let var = |i: i32, j: i32| i * h + j + 1;
        let mut s = Solver::new();
        for i in 0..p {
            s.add_clause(&lits(&(0..h).map(|j| var(i, j)).collect::<Vec<_>>()));
        }
        for j in 0..h {
            for a in 0..p {
                for b in a + 1..p {
                    s.add_clause(&lits(&[-var(a, j), -var(b, j)]));
                }
            }
        }
        assert_eq!(s.solve(&[], &Budget::unlimited()), SolveResult::Unsat);
        let mut s2 = Solver::new();
        for i in 0..p {
            s2.add_clause(&lits(&(0..h).map(|j| var(i, j)).collect::<Vec<_>>()));
        }
        for j in 0..h {
            for a in 0..p {
                for b in a + 1..p {
                    s2.add_clause(&lits(&[-var(a, j), -var(b, j)]));
                }
            }
        }
        assert!(matches!(s2.solve(&[], &Budget::conflicts(5)), SolveResult::Unknown(_)));
    }
}
