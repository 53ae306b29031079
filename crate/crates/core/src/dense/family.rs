use std::collections::BTreeSet;
use std::ops::ControlFlow;

use serde::Serialize;

use super::lattice::LatticeTerm;
use super::segment::SegmentConnective;
use crate::modulus::{InducedError, InducedModulus, ModulusSpec, WeakModulus};
use crate::numeric::{rat, Rational};
use crate::syntax::{canonical_modulus, Connective, Formula, RespectCheck, Signature, Term};

/// Parameters fixing one enumeration of the dense family of `arity`-ary
/// basic formulas respecting `omega`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DenseFamilyIndex {
    pub arity: usize,
    pub omega: WeakModulus,
    #[serde(skip)]
    pub signature: Signature,
    /// Resolution of the induced-modulus grid route, used only when the
    /// exact route does not apply.
    pub induced: RespectCheck,
    /// Atomics are built from terms with at most this many symbols.
    pub max_term_size: usize,
}

impl DenseFamilyIndex {
    pub fn new(arity: usize, omega: WeakModulus, signature: Signature) -> Self {
        DenseFamilyIndex {
            arity,
            omega,
            signature,
            induced: RespectCheck::new(omega),
            max_term_size: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MemberBody {
    Constant(Rational),
    Lattice(LatticeTerm),
}

/// One emitted family member: a lattice term applied to nondegenerate atomics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyMember {
    pub level: usize,
    /// Indices into [`FamilyEnumerator::atomics`].
    pub atomics: Vec<usize>,
    pub body: MemberBody,
    pub formula: Formula,
}

impl FamilyMember {
    /// Value given the values of the enumerator's atomics.
    pub fn eval_with(&self, atomic_values: &[Rational]) -> Rational {
        match &self.body {
            MemberBody::Constant(q) => q.clone(),
            MemberBody::Lattice(t) => {
                let z: Vec<Rational> = self
                    .atomics
                    .iter()
                    .map(|&i| atomic_values[i].clone())
                    .collect();
                t.eval(&z)
            }
        }
    }
}

/// `{p/q : 1 <= q <= h, 0 <= p <= q}` in increasing order.
fn rationals_up_to(h: usize) -> Vec<Rational> {
    let set: BTreeSet<Rational> = (1..=h as i64)
        .flat_map(|q| (0..=q).map(move |p| rat(p, q)))
        .collect();
    set.into_iter().collect()
}

fn height(q: &Rational) -> usize {
    q.denom().to_string().parse().unwrap_or(usize::MAX)
}

fn terms_up_to(sig: &Signature, arity: usize, max_size: usize) -> Vec<Vec<Term>> {
    let mut by_size: Vec<Vec<Term>> = vec![Vec::new(); max_size + 1];
    if max_size >= 1 {
        by_size[1].extend((0..arity).map(Term::Var));
        by_size[1].extend(sig.constants().iter().cloned().map(Term::Const));
    }
    for size in 2..=max_size {
        let mut out = Vec::new();
        for f in sig.functions() {
            let mut partial: Vec<(usize, Vec<Term>)> = vec![(1, Vec::new())];
            for _ in 0..f.arity {
                let mut next = Vec::new();
                for (used, args) in &partial {
                    for (s, ts) in by_size.iter().enumerate().take(size) {
                        if used + s > size {
                            break;
                        }
                        for t in ts {
                            let mut a = args.clone();
                            a.push(t.clone());
                            next.push((used + s, a));
                        }
                    }
                }
                partial = next;
            }
            out.extend(
                partial
                    .into_iter()
                    .filter(|(used, _)| *used == size)
                    .map(|(_, args)| Term::Apply(f.name.clone(), args)),
            );
        }
        by_size[size] = out;
    }
    by_size
}

/// Atomic formulas in `v0..v(arity-1)` with nonzero canonical modulus,
/// ordered by total term size and then by printed form. `d(s, t)` appears
/// once, with `s < t`.
pub fn nondegenerate_atomics(
    sig: &Signature,
    arity: usize,
    max_term_size: usize,
) -> Vec<(Formula, ModulusSpec)> {
    let by_size = terms_up_to(sig, arity, max_term_size);
    let sized: Vec<(usize, &Term)> = by_size
        .iter()
        .enumerate()
        .flat_map(|(s, ts)| ts.iter().map(move |t| (s, t)))
        .collect();
    let mut out: Vec<(usize, String, Formula)> = Vec::new();
    for (i, (s1, t1)) in sized.iter().enumerate() {
        for (s2, t2) in &sized[i + 1..] {
            if s1 + s2 <= max_term_size + 1 {
                let (a, b) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
                let f = Formula::Dist((*a).clone(), (*b).clone());
                out.push((s1 + s2, f.to_string(), f));
            }
        }
    }
    for r in sig.relations() {
        let mut partial: Vec<(usize, Vec<Term>)> = vec![(0, Vec::new())];
        for _ in 0..r.arity {
            let mut next = Vec::new();
            for (used, args) in &partial {
                for (s, t) in &sized {
                    if used + s <= max_term_size {
                        let mut a = args.clone();
                        a.push((*t).clone());
                        next.push((used + s, a));
                    }
                }
            }
            partial = next;
        }
        for (used, args) in partial {
            let f = Formula::Rel(r.name.clone(), args);
            out.push((used.max(1), f.to_string(), f));
        }
    }
    out.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    out.into_iter()
        .filter_map(|(_, _, f)| {
            let m = canonical_modulus(&f, sig, arity).expect("atomics are well formed");
            (!m.is_identically_zero()).then_some((f, m))
        })
        .collect()
}

/// Nonempty subsets of `0..m`, ordered by largest element and then
/// lexicographically.
fn subsets(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for top in 0..m {
        for mask in 0u64..(1u64 << top) {
            let mut s: Vec<usize> = (0..top).filter(|i| mask >> i & 1 == 1).collect();
            s.push(top);
            out.push(s);
        }
    }
    out.sort_by(|a, b| (a.last(), a.len(), a).cmp(&(b.last(), b.len(), b)));
    out
}

/// Deterministic enumerator of the dense family.
///
/// Item level is `max(tuple cost, leaves + height - 1)`, where the cost of
/// an atomic tuple is its length plus its largest atomic index and `height`
/// bounds the denominators of the segment data. Levels are emitted in
/// increasing order; within a level, by leaf count, height, tuple and then
/// data, so every atomic reaches its cheap segments early.
pub struct FamilyEnumerator {
    index: DenseFamilyIndex,
    atomics: Vec<(Formula, ModulusSpec)>,
    tuples: Vec<Vec<usize>>,
    deltas: Vec<Option<ModulusSpec>>,
}

impl FamilyEnumerator {
    /// Tuples are capped at 3 atomics, and at 2^12 in number.
    pub fn new(index: DenseFamilyIndex) -> Self {
        let atomics = nondegenerate_atomics(&index.signature, index.arity, index.max_term_size);
        let width = atomics.len().min(12);
        let tuples: Vec<Vec<usize>> = subsets(width)
            .into_iter()
            .filter(|t| t.len() <= 3)
            .collect();
        let deltas = vec![None; tuples.len()];
        FamilyEnumerator {
            index,
            atomics,
            tuples,
            deltas,
        }
    }

    pub fn atomics(&self) -> Vec<&Formula> {
        self.atomics.iter().map(|(f, _)| f).collect()
    }

    pub fn index(&self) -> &DenseFamilyIndex {
        &self.index
    }

    /// The induced modulus of tuple `t`.
    pub fn tuple_delta(&mut self, t: usize) -> Result<ModulusSpec, InducedError> {
        if let Some(d) = &self.deltas[t] {
            return Ok(d.clone());
        }
        let moduli: Vec<ModulusSpec> = self.tuples[t]
            .iter()
            .map(|&i| self.atomics[i].1.clone())
            .collect();
        let c = &self.index.induced;
        let d = InducedModulus::compute(&moduli, self.index.omega, &c.x_step, &c.r_step, c.k_max)?
            .modulus;
        self.deltas[t] = Some(d.clone());
        Ok(d)
    }

    /// The first `count` members.
    pub fn take(&mut self, count: usize) -> Vec<FamilyMember> {
        let mut out = Vec::with_capacity(count);
        if count == 0 {
            return out;
        }
        if self.atomics.is_empty() {
            let mut level = 1;
            loop {
                for q in rationals_up_to(level) {
                    if height(&q) == level {
                        out.push(FamilyMember {
                            level,
                            atomics: Vec::new(),
                            formula: Formula::Conn(Connective::Const(q.clone()), Vec::new()),
                            body: MemberBody::Constant(q),
                        });
                        if out.len() == count {
                            return out;
                        }
                    }
                }
                level += 1;
            }
        }
        let mut level = 1;
        loop {
            for leaves in 1..=level {
                for h in 1..=level + 1 - leaves {
                    for t in 0..self.tuples.len() {
                        if self.tuple_cost(t).max(leaves + h - 1) != level {
                            continue;
                        }
                        let delta = self.tuple_delta(t).expect("nondegenerate atomics");
                        let flow = self.emit_terms(t, &delta, leaves, h, level, &mut out, count);
                        if flow.is_break() {
                            return out;
                        }
                    }
                }
            }
            level += 1;
        }
    }

    /// Number of atomics plus the largest atomic index.
    fn tuple_cost(&self, t: usize) -> usize {
        let tuple = &self.tuples[t];
        tuple.len() + tuple.last().copied().unwrap_or(0)
    }

    #[allow(clippy::too_many_arguments)]
    fn emit_terms(
        &self,
        t: usize,
        delta: &ModulusSpec,
        leaves: usize,
        h: usize,
        level: usize,
        out: &mut Vec<FamilyMember>,
        count: usize,
    ) -> ControlFlow<()> {
        let pool = leaf_pool(delta, h);
        let exact: Vec<bool> = pool.iter().map(|(lh, _)| *lh == h).collect();
        let segs: Vec<LatticeTerm> = pool.into_iter().map(|(_, s)| s.into()).collect();
        let args: Vec<Formula> = self.tuples[t]
            .iter()
            .map(|&i| self.atomics[i].0.clone())
            .collect();
        let mut emit = |term: LatticeTerm| {
            let formula = Formula::Conn(Connective::Lattice(term.clone()), args.clone());
            out.push(FamilyMember {
                level,
                atomics: self.tuples[t].clone(),
                body: MemberBody::Lattice(term),
                formula,
            });
            if out.len() == count {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        };
        for_each_tree(&segs, &exact, leaves, &mut emit)
    }
}

/// Canonical segments over `delta` with data of height at most `h`, tagged
/// with their exact height. Constants use `x = y = 0`; segments with `a = b`
/// or zero span are otherwise skipped.
fn leaf_pool(delta: &ModulusSpec, h: usize) -> Vec<(usize, SegmentConnective)> {
    let k = delta.arity();
    let qs = rationals_up_to(h);
    let points = cartesian(&qs, k);
    let mut out = Vec::new();
    for a in &qs {
        let s = SegmentConnective::constant(delta.clone(), a.clone()).expect("valid constant");
        out.push((height(a), s));
    }
    for x in &points {
        for y in &points {
            if x == y {
                continue;
            }
            for (ia, a) in qs.iter().enumerate() {
                for b in &qs[ia + 1..] {
                    if let Ok(s) = SegmentConnective::new(
                        delta.clone(),
                        x.clone(),
                        y.clone(),
                        a.clone(),
                        b.clone(),
                    ) {
                        if s.is_degenerate() {
                            continue;
                        }
                        let ht = x
                            .iter()
                            .chain(y)
                            .chain([a, b])
                            .map(height)
                            .max()
                            .unwrap_or(1);
                        out.push((ht, s));
                    }
                }
            }
        }
    }
    out
}

fn cartesian(qs: &[Rational], k: usize) -> Vec<Vec<Rational>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|p: Vec<Rational>| {
                qs.iter().map(move |q| {
                    let mut p = p.clone();
                    p.push(q.clone());
                    p
                })
            })
            .collect();
    }
    out
}

/// Every meet/join tree with `n` distinct leaves from `pool` using at least
/// one leaf marked `exact`. Two-leaf trees take their leaves in pool order.
fn for_each_tree<F>(pool: &[LatticeTerm], exact: &[bool], n: usize, emit: &mut F) -> ControlFlow<()>
where
    F: FnMut(LatticeTerm) -> ControlFlow<()>,
{
    let mut chosen = Vec::with_capacity(n);
    choose_leaves(pool, exact, n, &mut chosen, emit)
}

fn choose_leaves<F>(
    pool: &[LatticeTerm],
    exact: &[bool],
    n: usize,
    chosen: &mut Vec<usize>,
    emit: &mut F,
) -> ControlFlow<()>
where
    F: FnMut(LatticeTerm) -> ControlFlow<()>,
{
    if chosen.len() == n {
        if !chosen.iter().any(|&i| exact[i]) {
            return ControlFlow::Continue(());
        }
        if n == 2 && chosen[0] > chosen[1] {
            return ControlFlow::Continue(());
        }
        let leaves: Vec<&LatticeTerm> = chosen.iter().map(|&i| &pool[i]).collect();
        for tree in shapes(&leaves) {
            emit(tree)?;
        }
        return ControlFlow::Continue(());
    }
    for i in 0..pool.len() {
        if chosen.contains(&i) {
            continue;
        }
        chosen.push(i);
        let flow = choose_leaves(pool, exact, n, chosen, emit);
        chosen.pop();
        flow?;
    }
    ControlFlow::Continue(())
}

/// All binary meet/join trees over `leaves` in the given order.
fn shapes(leaves: &[&LatticeTerm]) -> Vec<LatticeTerm> {
    if leaves.len() == 1 {
        return vec![leaves[0].clone()];
    }
    let mut out = Vec::new();
    for split in 1..leaves.len() {
        let left = shapes(&leaves[..split]);
        let right = shapes(&leaves[split..]);
        for l in &left {
            for r in &right {
                out.push(LatticeTerm::meet(l.clone(), r.clone()).expect("shared modulus"));
                out.push(LatticeTerm::join(l.clone(), r.clone()).expect("shared modulus"));
            }
        }
    }
    out
}

/// The first `count` members of the family described by `index`.
pub fn enumerate_family(index: &DenseFamilyIndex, count: usize) -> Vec<FamilyMember> {
    FamilyEnumerator::new(index.clone()).take(count)
}
