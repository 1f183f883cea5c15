//! Deterministic benchmark program generators.
//!
//! Three families: dining philosophers over a shared fork array (the
//! classic scaling benchmark, with one property that can never fail and one
//! that always can), lock-order programs over a ring of mutexes (consistent
//! acquisition order, an inversion that deadlocks, and a double unlock),
//! and a producer/consumer signal handshake (flag-guarded and safe, a
//! missing-signal deadlock, and a missing-flag assertion failure).

use std::fmt::Write;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Philosophers,
    LockOrder,
    SignalHandshake,
}

impl Family {
    pub fn parse(s: &str) -> Option<Family> {
        match s {
            "philosophers" => Some(Family::Philosophers),
            "lock-order" => Some(Family::LockOrder),
            "signal-handshake" => Some(Family::SignalHandshake),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// The checked property can never fail: expected SAFE.
    UnsatProperty,
    /// The checked property fails on some (here: every) complete run.
    SatProperty,
    /// A synchronization bug: deadlock.
    Buggy,
}

impl Variant {
    pub fn parse(s: &str) -> Option<Variant> {
        match s {
            "unsat" | "unsat-property" => Some(Variant::UnsatProperty),
            "sat" | "sat-property" => Some(Variant::SatProperty),
            "buggy" => Some(Variant::Buggy),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchSpec {
    pub family: Family,
    pub size: usize,
    pub variant: Variant,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("unsupported combination: {family:?} size {size} {variant:?}")]
    Unsupported { family: Family, size: usize, variant: Variant },
}

pub fn gen_bench(spec: &BenchSpec) -> Result<String, BenchError> {
    match spec.family {
        Family::Philosophers if spec.size >= 1 => Ok(philosophers(spec.size, spec.variant)),
        Family::LockOrder if spec.size >= 1 => lock_order(spec.size, spec.variant),
        Family::SignalHandshake if spec.size >= 2 => Ok(handshake(spec.size, spec.variant)),
        _ => Err(BenchError::Unsupported {
            family: spec.family,
            size: spec.size,
            variant: spec.variant,
        }),
    }
}

/// Philosophers communicate only through the shared fork array; each body
/// is one atomic block, so the schedulable unit is the whole philosopher
/// and the pruned interleavings are exactly the n! thread orders.
fn philosophers(n: usize, variant: Variant) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "int forks[{n}];");
    let _ = writeln!(out, "int eating[{n}];");
    let _ = writeln!(out, "int eaten[{n}];");
    let _ = writeln!(out);
    let all_eating: Vec<String> = (0..n).map(|i| format!("eating[{i}] == 1")).collect();
    let all_eaten: Vec<String> = (0..n).map(|i| format!("eaten[{i}] == 1")).collect();

    for i in 0..n {
        let left = i;
        let right = (i + 1) % n;
        let _ = writeln!(out, "thread P{i}() {{");
        let _ = writeln!(out, "  atomic {{");
        let _ = writeln!(out, "    if (forks[{left}] == 0) {{");
        let _ = writeln!(out, "      if (forks[{right}] == 0) {{");
        let _ = writeln!(out, "        forks[{left}] = 1;");
        let _ = writeln!(out, "        forks[{right}] = 1;");
        let _ = writeln!(out, "        eating[{i}] = 1;");
        if matches!(variant, Variant::UnsatProperty | Variant::Buggy) {
            // Nobody can hold every fork pair at once.
            let _ = writeln!(out, "        assert(!({}));", all_eating.join(" && "));
        }
        let _ = writeln!(out, "        eaten[{i}] = 1;");
        let _ = writeln!(out, "        eating[{i}] = 0;");
        let _ = writeln!(out, "        forks[{left}] = 0;");
        let _ = writeln!(out, "        forks[{right}] = 0;");
        let _ = writeln!(out, "      }}");
        let _ = writeln!(out, "    }}");
        let _ = writeln!(out, "  }}");
        let _ = writeln!(out, "}}");
        let _ = writeln!(out);
    }

    let _ = writeln!(out, "main {{");
    for i in 0..n {
        let _ = writeln!(out, "  thread h{i};");
    }
    for i in 0..n {
        let _ = writeln!(out, "  create(h{i}, P{i});");
    }
    for i in 0..n {
        let _ = writeln!(out, "  join(h{i});");
    }
    if variant == Variant::SatProperty {
        // Every philosopher eats in every complete run, so this fails on
        // every interleaving.
        let _ = writeln!(out, "  assert(!({}));", all_eaten.join(" && "));
    }
    let _ = writeln!(out, "}}");
    out
}

/// A ring of mutexes with a shared counter. The consistent variant always
/// acquires the lower-numbered mutex first; the buggy variant acquires in
/// ring order and can deadlock; the sat variant unlocks twice.
fn lock_order(n: usize, variant: Variant) -> Result<String, BenchError> {
    if variant == Variant::SatProperty {
        return Ok(double_unlock());
    }
    if n < 2 {
        return Err(BenchError::Unsupported { family: Family::LockOrder, size: n, variant });
    }
    let mut out = String::new();
    for i in 0..n {
        let _ = writeln!(out, "mutex m{i};");
    }
    let _ = writeln!(out, "int counter;");
    let _ = writeln!(out);
    for i in 0..n {
        let a = i;
        let b = (i + 1) % n;
        let (first, second) = match variant {
            // Lower index first: no cycle in the acquisition order.
            Variant::UnsatProperty => (a.min(b), a.max(b)),
            // Ring order: circular wait.
            Variant::Buggy => (a, b),
            Variant::SatProperty => unreachable!(),
        };
        let _ = writeln!(out, "thread W{i}() {{");
        let _ = writeln!(out, "  lock(m{first});");
        let _ = writeln!(out, "  lock(m{second});");
        let _ = writeln!(out, "  counter = counter + 1;");
        let _ = writeln!(out, "  unlock(m{second});");
        let _ = writeln!(out, "  unlock(m{first});");
        let _ = writeln!(out, "}}");
        let _ = writeln!(out);
    }
    let _ = writeln!(out, "main {{");
    for i in 0..n {
        let _ = writeln!(out, "  thread h{i};");
    }
    for i in 0..n {
        let _ = writeln!(out, "  create(h{i}, W{i});");
    }
    for i in 0..n {
        let _ = writeln!(out, "  join(h{i});");
    }
    let _ = writeln!(out, "  assert(counter == {n});");
    let _ = writeln!(out, "}}");
    Ok(out)
}

fn double_unlock() -> String {
    let mut out = String::new();
    let _ = writeln!(out, "mutex m;");
    let _ = writeln!(out, "int x;");
    let _ = writeln!(out);
    let _ = writeln!(out, "main {{");
    let _ = writeln!(out, "  lock(m);");
    let _ = writeln!(out, "  x = 1;");
    let _ = writeln!(out, "  unlock(m);");
    let _ = writeln!(out, "  unlock(m);");
    let _ = writeln!(out, "}}");
    out
}

/// One consumer, `n - 1` producers. The safe variant guards the wait with
/// a flag; the buggy variant never signals; the sat variant signals without
/// setting the flag the consumer asserts.
fn handshake(n: usize, variant: Variant) -> String {
    let producers = n - 1;
    let mut out = String::new();
    let _ = writeln!(out, "int ready;");
    let _ = writeln!(out, "mutex m;");
    let _ = writeln!(out, "cond c;");
    let _ = writeln!(out);
    for i in 0..producers {
        let _ = writeln!(out, "thread Prod{i}() {{");
        let _ = writeln!(out, "  lock(m);");
        match variant {
            Variant::UnsatProperty => {
                let _ = writeln!(out, "  ready = 1;");
                let _ = writeln!(out, "  signal(c);");
            }
            Variant::SatProperty => {
                // Wakes the consumer without establishing the condition.
                let _ = writeln!(out, "  signal(c);");
            }
            Variant::Buggy => {
                // Never signals at all.
                let _ = writeln!(out, "  ready = 0;");
            }
        }
        let _ = writeln!(out, "  unlock(m);");
        let _ = writeln!(out, "}}");
        let _ = writeln!(out);
    }
    let _ = writeln!(out, "thread Cons() {{");
    let _ = writeln!(out, "  lock(m);");
    let _ = writeln!(out, "  if (ready == 0) {{");
    let _ = writeln!(out, "    wait(c, m);");
    let _ = writeln!(out, "  }}");
    if variant != Variant::Buggy {
        let _ = writeln!(out, "  assert(ready == 1);");
    }
    let _ = writeln!(out, "  unlock(m);");
    let _ = writeln!(out, "}}");
    let _ = writeln!(out);
    let _ = writeln!(out, "main {{");
    let _ = writeln!(out, "  thread hc;");
    for i in 0..producers {
        let _ = writeln!(out, "  thread hp{i};");
    }
    let _ = writeln!(out, "  create(hc, Cons);");
    for i in 0..producers {
        let _ = writeln!(out, "  create(hp{i}, Prod{i});");
    }
    let _ = writeln!(out, "  join(hc);");
    for i in 0..producers {
        let _ = writeln!(out, "  join(hp{i});");
    }
    let _ = writeln!(out, "}}");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{load, SourceProgram};

    #[test]
    fn generated_benchmarks_parse_and_typecheck_for_all_sizes() {
        for n in 1..=8 {
            for variant in [Variant::UnsatProperty, Variant::SatProperty, Variant::Buggy] {
                for family in [Family::Philosophers, Family::LockOrder, Family::SignalHandshake]
                {
                    let spec = BenchSpec { family, size: n, variant };
                    match gen_bench(&spec) {
                        Ok(src) => {
                            load(&SourceProgram::inline(&src)).unwrap_or_else(|e| {
                                panic!("{family:?}/{n}/{variant:?} fails to load: {e}\n{src}")
                            });
                        }
                        Err(_) => {
                            // Only undersized ring/handshake combinations
                            // may be rejected.
                            assert!(
                                (family == Family::LockOrder && n < 2)
                                    || (family == Family::SignalHandshake && n < 2),
                                "{family:?}/{n}/{variant:?} unexpectedly unsupported"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let spec =
            BenchSpec { family: Family::Philosophers, size: 3, variant: Variant::SatProperty };
        assert_eq!(gen_bench(&spec).unwrap(), gen_bench(&spec).unwrap());
    }
}
