//! Operational models of the thread-management and synchronization
//! intrinsics, expanded into SSA constraints during symbolic execution.
//!
//! Mutexes carry a lock bit and a blocked-thread count; both are encoded as
//! symbolic counters and mirrored concretely in the exploration folds. A
//! blocked acquisition parks between two atomic sections: the first
//! test-and-sets or bumps the count, the second re-checks after a context
//! switch. Threads still blocked when nothing can run any more emit the
//! global-deadlock obligation (total blocked running threads must stay
//! below the number of running threads); blocked-but-released paths are
//! pruned by strengthening the path guard (wait-free paths), re-acquire,
//! and continue. Condition variables follow the same pattern with a
//! waiter count and a broadcast generation counter.
//!
//! The blocked-thread total used in the deadlock comparison is global
//! (mutex waiters + cond waiters + join waiters), so cross-object cycles
//! such as lock-order inversions are caught in the same solver call as
//! ordinary assertion failures.

use crate::encoder::{TermCtx, TermId, VarId};
use crate::frontend::ast::Span;

use super::symex::state::{Event, Obligation, ObligationTag, SymState, CTR_WIDTH};
use super::symex::vars::ProgramVars;

pub struct ModelCx<'a> {
    pub ctx: &'a mut TermCtx,
    pub pv: &'a ProgramVars,
}

impl<'a> ModelCx<'a> {
    fn bump(
        &mut self,
        state: &mut SymState,
        event: &mut Event,
        var: VarId,
        delta: i64,
    ) {
        let old = state.store.cur(self.ctx, var);
        let delta_c = self.ctx.bvc_signed(delta, CTR_WIDTH);
        let rhs = self.ctx.bv_add(old, delta_c);
        let fold = state
            .store
            .fold(var)
            .map(|v| crate::encoder::bits::add(v, crate::encoder::bits::from_signed(delta, CTR_WIDTH), CTR_WIDTH));
        if let Some(eq) = state.store.assign(self.ctx, var, state.guard, rhs, fold) {
            event.eqs.push(eq);
        }
    }

    fn set(&mut self, state: &mut SymState, event: &mut Event, var: VarId, value: u64) {
        let rhs = self.ctx.bvc(value, CTR_WIDTH);
        if let Some(eq) = state.store.assign(self.ctx, var, state.guard, rhs, Some(value)) {
            event.eqs.push(eq);
        }
    }

    fn push_obligation(
        &mut self,
        event: &mut Event,
        cond_violated: TermId,
        tag: ObligationTag,
        span: Span,
        thread: usize,
        desc: &str,
    ) {
        // Obligations that fold away can never fire.
        if matches!(self.ctx.term(cond_violated), crate::encoder::Term::False) {
            return;
        }
        event.obligations.push(Obligation {
            cond_violated,
            tag,
            span,
            thread,
            desc: desc.to_string(),
        });
    }

    /// `count < trds_in_run` with `count` = symbolic blocked total plus the
    /// concretely-known join waiters. Violated (the negation holds) exactly
    /// when every running thread is blocked.
    fn deadlock_obligation(
        &mut self,
        state: &mut SymState,
        event: &mut Event,
        span: Span,
        thread: usize,
        desc: &str,
    ) {
        let blocked = state.store.cur(self.ctx, self.pv.blocked);
        let join_c = self.ctx.bvc(state.join_blocked_count(), CTR_WIDTH);
        let total = self.ctx.bv_add(blocked, join_c);
        let trds = state.store.cur(self.ctx, self.pv.trds_in_run);
        let ok = self.ctx.ult(total, trds);
        let not_ok = self.ctx.not(ok);
        let violated = self.ctx.and(state.guard, not_ok);
        self.push_obligation(event, violated, ObligationTag::Deadlock, span, thread, desc);
    }

    /// First atomic section of the lock model: test-and-set, or bump the
    /// per-mutex count when already held. Returns whether the lock was
    /// acquired on this exploration branch.
    pub fn lock_attempt(
        &mut self,
        state: &mut SymState,
        event: &mut Event,
        lock: VarId,
        count: VarId,
    ) -> bool {
        let held = state.store.fold(lock).expect("mutex state is concrete per branch") != 0;
        if !held {
            self.set(state, event, lock, 1);
            true
        } else {
            self.bump(state, event, count, 1);
            self.bump(state, event, self.pv.blocked, 1);
            false
        }
    }

    /// Second atomic section on the released path: drop the wait counts,
    /// check for deadlock (folds away here), and re-acquire.
    pub fn lock_resume(
        &mut self,
        state: &mut SymState,
        event: &mut Event,
        lock: VarId,
        count: VarId,
        span: Span,
        thread: usize,
    ) {
        debug_assert_eq!(state.store.fold(lock), Some(0), "resume requires a free mutex");
        self.bump(state, event, count, -1);
        self.bump(state, event, self.pv.blocked, -1);
        self.deadlock_obligation(state, event, span, thread, "deadlock on mutex");
        // Wait-free path: continuing means the mutex was released.
        let cur = state.store.cur(self.ctx, lock);
        let zero = self.ctx.bvc(0, CTR_WIDTH);
        let released = self.ctx.eq_bv(cur, zero);
        state.guard = self.ctx.and(state.guard, released);
        self.set(state, event, lock, 1);
    }

    /// Second atomic section when the path stays blocked: the mutex never
    /// came back, so the deadlock comparison fires if everyone is stuck.
    pub fn lock_stuck(
        &mut self,
        state: &mut SymState,
        event: &mut Event,
        span: Span,
        thread: usize,
    ) {
        self.deadlock_obligation(state, event, span, thread, "deadlock on mutex");
    }

    /// Unlock asserts the lock bit and clears it; ownership is not tracked,
    /// matching the mutex model.
    pub fn unlock(
        &mut self,
        state: &mut SymState,
        event: &mut Event,
        lock: VarId,
        span: Span,
        thread: usize,
    ) {
        let cur = state.store.cur(self.ctx, lock);
        let zero = self.ctx.bvc(0, CTR_WIDTH);
        let unlocked = self.ctx.eq_bv(cur, zero);
        let violated = self.ctx.and(state.guard, unlocked);
        self.push_obligation(
            event,
            violated,
            ObligationTag::BadUnlock,
            span,
            thread,
            "unlock of a mutex that is not locked",
        );
        self.set(state, event, lock, 0);
    }

    /// Entry half of the wait model: flag the condition as waited-on,
    /// assert the mutex is held, release it, and count the waiter.
    /// Returns the broadcast generation recorded for the wake-up check.
    pub fn wait_enter(
        &mut self,
        state: &mut SymState,
        event: &mut Event,
        cond_lock: VarId,
        nwaiters: VarId,
        mutex_lock: VarId,
        span: Span,
        thread: usize,
    ) -> u64 {
        self.set(state, event, cond_lock, 1);
        let m = state.store.cur(self.ctx, mutex_lock);
        let zero = self.ctx.bvc(0, CTR_WIDTH);
        let not_held = self.ctx.eq_bv(m, zero);
        let violated = self.ctx.and(state.guard, not_held);
        self.push_obligation(
            event,
            violated,
            ObligationTag::BadWait,
            span,
            thread,
            "wait without holding the mutex",
        );
        self.set(state, event, mutex_lock, 0);
        self.bump(state, event, nwaiters, 1);
        self.bump(state, event, self.pv.blocked, 1);
        state.store.fold(self.pv.broadcast_id).expect("broadcast counter is concrete")
    }

    /// Resume half of the wait model after a signal or broadcast: keep only
    /// woken paths, then re-acquire the mutex (the scheduler only resumes
    /// waiters once the mutex is actually free).
    pub fn wait_resume(
        &mut self,
        state: &mut SymState,
        event: &mut Event,
        cond_lock: VarId,
        mutex_lock: VarId,
        recorded_bid: u64,
    ) {
        let cl = state.store.cur(self.ctx, cond_lock);
        let zero = self.ctx.bvc(0, CTR_WIDTH);
        let signalled = self.ctx.eq_bv(cl, zero);
        let bid = state.store.cur(self.ctx, self.pv.broadcast_id);
        let rec = self.ctx.bvc(recorded_bid, CTR_WIDTH);
        let broadcasted = self.ctx.ult(rec, bid);
        let woken = self.ctx.or(signalled, broadcasted);
        state.guard = self.ctx.and(state.guard, woken);
        self.bump(state, event, self.pv.blocked, -1);
        debug_assert_eq!(state.store.fold(mutex_lock), Some(0));
        self.set(state, event, mutex_lock, 1);
    }

    /// A waiter still parked when nothing can run: deadlock check.
    pub fn wait_stuck(
        &mut self,
        state: &mut SymState,
        event: &mut Event,
        span: Span,
        thread: usize,
    ) {
        self.deadlock_obligation(state, event, span, thread, "deadlock on condition variable");
    }

    /// A join-waiter still parked when nothing can run.
    pub fn join_stuck(
        &mut self,
        state: &mut SymState,
        event: &mut Event,
        span: Span,
        thread: usize,
    ) {
        self.deadlock_obligation(state, event, span, thread, "deadlock waiting for thread exit");
    }

    /// Signal clears the condition flag and decrements the waiter count
    /// (clamped at zero so the count field never underflows).
    pub fn signal(&mut self, state: &mut SymState, event: &mut Event, cond_lock: VarId, nwaiters: VarId) {
        self.set(state, event, cond_lock, 0);
        let cur = state.store.cur(self.ctx, nwaiters);
        let zero = self.ctx.bvc(0, CTR_WIDTH);
        let one = self.ctx.bvc(1, CTR_WIDTH);
        let is_zero = self.ctx.eq_bv(cur, zero);
        let dec = self.ctx.bv_sub(cur, one);
        let rhs = self.ctx.ite_bv(is_zero, zero, dec);
        let fold = state.store.fold(nwaiters).map(|v| v.saturating_sub(1));
        if let Some(eq) = state.store.assign(self.ctx, nwaiters, state.guard, rhs, fold) {
            event.eqs.push(eq);
        }
        // The woken waiter's own bookkeeping (blocked count) settles when
        // it resumes.
    }

    /// Broadcast bumps the generation counter and releases every waiter.
    pub fn broadcast(
        &mut self,
        state: &mut SymState,
        event: &mut Event,
        cond_lock: VarId,
        nwaiters: VarId,
    ) {
        self.bump(state, event, self.pv.broadcast_id, 1);
        self.set(state, event, cond_lock, 0);
        self.set(state, event, nwaiters, 0);
    }

    /// Thread creation: one more running thread.
    pub fn create_counters(&mut self, state: &mut SymState, event: &mut Event) {
        self.bump(state, event, self.pv.trds_in_run, 1);
    }

    /// Thread exit: one fewer running thread.
    pub fn exit_counters(&mut self, state: &mut SymState, event: &mut Event) {
        self.bump(state, event, self.pv.trds_in_run, -1);
    }
}
