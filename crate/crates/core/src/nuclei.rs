//! Nuclei and prenuclei on finite frames, their quotients, and the
//! assembly of all nuclei.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::{FiniteFrame, FrameError};
use crate::mask::Mask;
use crate::nonarch::{NonArchBase, NonArchError};
use crate::order::Poset;

/// Default carrier bound for nucleus enumeration.
pub const DEFAULT_NUCLEUS_BOUND: usize = 16;
/// Largest assembly whose distributivity is checked pairwise.
pub const ASSEMBLY_CHECK_LIMIT: usize = 128;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NucleusError {
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    NonArch(#[from] NonArchError),
    #[error("table has {got} entries, frame has {expected} elements")]
    TableSize { got: usize, expected: usize },
    #[error("map is not monotone: {0} <= {1} but images are not")]
    NotMonotone(usize, usize),
    #[error("map is not inflationary at {0}")]
    NotInflationary(usize),
    #[error("not a prenucleus: {0}")]
    NotPrenucleus(Axiom),
    #[error("not a nucleus: {0}")]
    NotNucleus(Axiom),
    #[error("frame has {size} elements, enumeration bound is {bound}")]
    TooLarge { size: usize, bound: usize },
}

/// A failed nucleus axiom with its witnesses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axiom {
    Monotone(usize, usize),
    Inflationary(usize),
    MeetPreserving(usize, usize),
    Idempotent(usize),
}

impl std::fmt::Display for Axiom {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Axiom::Monotone(a, b) => write!(f, "monotonicity fails at ({a}, {b})"),
            Axiom::Inflationary(a) => write!(f, "a <= j(a) fails at {a}"),
            Axiom::MeetPreserving(a, b) => write!(f, "j(a) & j(b) <= j(a & b) fails at ({a}, {b})"),
            Axiom::Idempotent(a) => write!(f, "j(j(a)) = j(a) fails at {a}"),
        }
    }
}

/// A monotone inflationary self-map of a frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureMap<'f> {
    frame: &'f FiniteFrame,
    table: Vec<usize>,
}

impl<'f> ClosureMap<'f> {
    pub fn new(frame: &'f FiniteFrame, table: Vec<usize>) -> Result<Self, NucleusError> {
        if table.len() != frame.size() {
            return Err(NucleusError::TableSize {
                got: table.len(),
                expected: frame.size(),
            });
        }
        if let Some(&x) = table.iter().find(|&&x| x >= frame.size()) {
            return Err(FrameError::UnknownElement(x.to_string()).into());
        }
        for a in frame.elements() {
            if !frame.leq(a, table[a]) {
                return Err(NucleusError::NotInflationary(a));
            }
            for b in frame.order().upper_covers(a).iter() {
                if !frame.leq(table[a], table[b]) {
                    return Err(NucleusError::NotMonotone(a, b));
                }
            }
        }
        Ok(Self { frame, table })
    }

    pub fn identity(frame: &'f FiniteFrame) -> Self {
        Self {
            frame,
            table: frame.elements().collect(),
        }
    }

    pub fn constant_top(frame: &'f FiniteFrame) -> Self {
        Self {
            frame,
            table: vec![frame.top(); frame.size()],
        }
    }

    /// `u ∨ (−)`.
    pub fn closed(frame: &'f FiniteFrame, u: usize) -> Self {
        Self {
            frame,
            table: frame.elements().map(|a| frame.join(u, a)).collect(),
        }
    }

    /// `u → (−)`.
    pub fn open(frame: &'f FiniteFrame, u: usize) -> Self {
        Self {
            frame,
            table: frame.elements().map(|a| frame.heyting(u, a)).collect(),
        }
    }

    pub fn frame(&self) -> &'f FiniteFrame {
        self.frame
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn apply(&self, a: usize) -> usize {
        self.table[a]
    }

    pub fn fixed(&self) -> Mask {
        Mask::from_indices(self.table.len(), self.frame.elements().filter(|&a| self.table[a] == a))
    }

    /// Pointwise order.
    pub fn leq(&self, other: &ClosureMap<'_>) -> bool {
        self.frame
            .elements()
            .all(|a| self.frame.leq(self.table[a], other.table[a]))
    }

    pub fn compose(&self, inner: &ClosureMap<'_>) -> ClosureMap<'f> {
        ClosureMap {
            frame: self.frame,
            table: inner.table.iter().map(|&x| self.table[x]).collect(),
        }
    }

    fn meet_defect(&self) -> Option<Axiom> {
        let f = self.frame;
        for a in f.elements() {
            for b in a + 1..f.size() {
                let lhs = f.meet(self.table[a], self.table[b]);
                if !f.leq(lhs, self.table[f.meet(a, b)]) {
                    return Some(Axiom::MeetPreserving(a, b));
                }
            }
        }
        None
    }

    /// First violated nucleus axiom, scanning in axiom order.
    pub fn check_nucleus(&self) -> Option<Axiom> {
        let f = self.frame;
        for a in f.elements() {
            for b in f.order().up(a).iter() {
                if !f.leq(self.table[a], self.table[b]) {
                    return Some(Axiom::Monotone(a, b));
                }
            }
        }
        if let Some(a) = f.elements().find(|&a| !f.leq(a, self.table[a])) {
            return Some(Axiom::Inflationary(a));
        }
        if let Some(ax) = self.meet_defect() {
            return Some(ax);
        }
        f.elements()
            .find(|&a| self.table[self.table[a]] != self.table[a])
            .map(Axiom::Idempotent)
    }

    pub fn is_nucleus(&self) -> bool {
        self.check_nucleus().is_none()
    }

    pub fn to_json(&self) -> NucleusJson {
        NucleusJson {
            table: self
                .frame
                .elements()
                .map(|a| [self.frame.label(a).to_string(), self.frame.label(self.table[a]).to_string()])
                .collect(),
        }
    }

    pub fn from_json(frame: &'f FiniteFrame, spec: &NucleusJson) -> Result<Self, NucleusError> {
        let mut table: Vec<Option<usize>> = vec![None; frame.size()];
        for [a, b] in &spec.table {
            table[frame.element(a)?] = Some(frame.element(b)?);
        }
        let got = table.iter().filter(|x| x.is_some()).count();
        let table: Option<Vec<usize>> = table.into_iter().collect();
        let table = table.ok_or(NucleusError::TableSize {
            got,
            expected: frame.size(),
        })?;
        Self::new(frame, table)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NucleusJson {
    pub table: Vec<[String; 2]>,
}

/// Least nucleus above a prenucleus, with the number of iterations: the
/// least `k` with `c^(k+1) = c^k`.
pub fn prenucleus_closure<'f>(c: &ClosureMap<'f>) -> Result<(ClosureMap<'f>, usize), NucleusError> {
    if let Some(ax) = c.meet_defect() {
        return Err(NucleusError::NotPrenucleus(ax));
    }
    let mut cur = ClosureMap::identity(c.frame);
    let mut k = 0;
    loop {
        let next = c.compose(&cur);
        if next == cur {
            return Ok((cur, k));
        }
        cur = next;
        k += 1;
    }
}

/// The frame of fixed points `A_j` with the map `j*: A → A_j`.
#[derive(Debug, Clone)]
pub struct QuotientFrame {
    pub frame: FiniteFrame,
    /// Parent element behind each quotient element.
    pub fixed_elements: Vec<usize>,
    pub fixed: Mask,
    /// `j*` as parent element to quotient element.
    pub projection: Vec<usize>,
    pub nucleus: Vec<usize>,
}

pub fn quotient(j: &ClosureMap<'_>) -> Result<QuotientFrame, NucleusError> {
    if let Some(ax) = j.check_nucleus() {
        return Err(NucleusError::NotNucleus(ax));
    }
    let f = j.frame();
    let fixed = j.fixed();
    let fixed_elements = fixed.to_vec();
    let m = fixed_elements.len();
    let pos: HashMap<usize, usize> = fixed_elements.iter().enumerate().map(|(i, &a)| (a, i)).collect();
    let up = fixed_elements
        .iter()
        .map(|&a| Mask::from_indices(m, (0..m).filter(|&i| f.leq(a, fixed_elements[i]))))
        .collect();
    let labels = fixed_elements.iter().map(|&a| f.label(a).to_string()).collect();
    let order = Poset::from_up_sets(up, labels);
    let mut meet = vec![0u32; m * m];
    let mut join = vec![0u32; m * m];
    for (x, &a) in fixed_elements.iter().enumerate() {
        for (y, &b) in fixed_elements.iter().enumerate() {
            let mm = *pos
                .get(&f.meet(a, b))
                .ok_or(FrameError::NotClosed("fixed points under meets"))?;
            meet[x * m + y] = mm as u32;
            join[x * m + y] = pos[&j.apply(f.join(a, b))] as u32;
        }
    }
    let frame = FiniteFrame::new(order, meet, join)?;
    let projection: Vec<usize> = f.elements().map(|a| pos[&j.apply(a)]).collect();
    for a in f.elements() {
        for b in f.elements() {
            let (pa, pb) = (projection[a], projection[b]);
            if projection[f.meet(a, b)] != frame.meet(pa, pb) || projection[f.join(a, b)] != frame.join(pa, pb) {
                return Err(FrameError::CrossCheckMismatch(format!("j* is not a morphism at ({a}, {b})")).into());
            }
        }
    }
    if projection[f.bottom()] != frame.bottom() || projection[f.top()] != frame.top() {
        return Err(FrameError::CrossCheckMismatch("j* does not preserve bounds".into()).into());
    }
    Ok(QuotientFrame {
        frame,
        fixed_elements,
        fixed,
        projection,
        nucleus: j.table().to_vec(),
    })
}

/// All nuclei, in lexicographic order of their tables.
pub fn enumerate_nuclei(f: &FiniteFrame, bound: usize) -> Result<Vec<ClosureMap<'_>>, NucleusError> {
    if f.size() > bound {
        return Err(NucleusError::TooLarge { size: f.size(), bound });
    }
    let n = f.size();
    // decreasing linear extension: every element after all elements above it
    let mut order: Vec<usize> = f.elements().collect();
    order.sort_by_key(|&a| (f.order().up(a).count(), a));
    let mut meet_pairs: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for a in 0..n {
        for b in a + 1..n {
            let m = f.meet(a, b);
            if m != a && m != b {
                meet_pairs[m].push((a, b));
            }
        }
    }
    let covers: Vec<Vec<usize>> = f.elements().map(|a| f.order().upper_covers(a).to_vec()).collect();

    fn go(
        f: &FiniteFrame,
        k: usize,
        order: &[usize],
        covers: &[Vec<usize>],
        meet_pairs: &[Vec<(usize, usize)>],
        table: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if k == order.len() {
            out.push(table.clone());
            return;
        }
        let x = order[k];
        for v in f.order().up(x).iter() {
            if !covers[x].iter().all(|&c| f.leq(v, table[c])) {
                continue;
            }
            // idempotence: v > x was assigned earlier
            if v != x && table[v] != v {
                continue;
            }
            if !meet_pairs[x]
                .iter()
                .all(|&(a, b)| f.leq(f.meet(table[a], table[b]), v))
            {
                continue;
            }
            table[x] = v;
            go(f, k + 1, order, covers, meet_pairs, table, out);
        }
        table[x] = usize::MAX;
    }

    let mut tables = Vec::new();
    let mut table = vec![usize::MAX; n];
    go(f, 0, &order, &covers, &meet_pairs, &mut table, &mut tables);
    tables.sort();
    Ok(tables
        .into_iter()
        .map(|table| ClosureMap { frame: f, table })
        .collect())
}

/// The frame of nuclei under pointwise order.
#[derive(Debug, Clone)]
pub struct Assembly {
    pub frame: FiniteFrame,
    /// Whether the frame laws were checked on the whole table.
    pub fully_checked: bool,
}

/// Builds the assembly from an enumeration. Meets are pointwise; joins are
/// the closure of the composite, cross-checked against the meet of all
/// common upper bounds.
pub fn assembly(f: &FiniteFrame, nuclei: &[ClosureMap<'_>]) -> Result<Assembly, NucleusError> {
    let m = nuclei.len();
    let index: HashMap<&[usize], usize> = nuclei.iter().enumerate().map(|(i, j)| (j.table(), i)).collect();
    let up = (0..m)
        .map(|i| Mask::from_indices(m, (0..m).filter(|&k| nuclei[i].leq(&nuclei[k]))))
        .collect::<Vec<_>>();
    let labels = (0..m).map(|i| format!("j{i}")).collect();
    let order = Poset::from_up_sets(up, labels);
    let lookup = |t: &[usize]| -> Result<usize, NucleusError> {
        index
            .get(t)
            .copied()
            .ok_or_else(|| FrameError::CrossCheckMismatch("nucleus missing from enumeration".into()).into())
    };
    let mut meet = vec![0u32; m * m];
    let mut join = vec![0u32; m * m];
    for a in 0..m {
        for b in a..m {
            let (ja, jb) = (nuclei[a].table(), nuclei[b].table());
            let pm: Vec<usize> = f.elements().map(|x| f.meet(ja[x], jb[x])).collect();
            // j_a ∘ j_b is a prenucleus; its closure is the least nucleus above both
            let (closed, _) = prenucleus_closure(&nuclei[a].compose(&nuclei[b]))?;
            let mi = lookup(&pm)? as u32;
            let ji = lookup(closed.table())? as u32;
            meet[a * m + b] = mi;
            meet[b * m + a] = mi;
            join[a * m + b] = ji;
            join[b * m + a] = ji;
        }
    }
    let fully_checked = m <= ASSEMBLY_CHECK_LIMIT;
    let frame = if fully_checked {
        FiniteFrame::new(order, meet, join)?
    } else {
        FiniteFrame::new_unchecked(order, meet, join)
    };
    if fully_checked {
        for a in 0..m {
            for b in 0..m {
                let ub = frame.order().up(a).intersection(frame.order().up(b));
                let least = frame.meet_all(ub.iter());
                if least != frame.join(a, b) {
                    return Err(FrameError::CrossCheckMismatch(format!("assembly join of j{a}, j{b}")).into());
                }
            }
        }
    }
    Ok(Assembly { frame, fully_checked })
}

#[derive(Debug, Clone, Serialize)]
pub struct QuotRecord {
    pub nucleus: Vec<usize>,
    pub fixed: Vec<usize>,
    /// Parent elements of the image base `{j(b)} \ {j(0)}`.
    pub witness: Vec<usize>,
    pub passed: bool,
    pub failure: Option<String>,
}

/// For every nucleus, checks that the image of a non-archimedean base is a
/// non-archimedean base of the quotient.
pub fn verify_quot(f: &FiniteFrame, base: &NonArchBase, bound: usize) -> Result<Vec<QuotRecord>, NucleusError> {
    let mut out = Vec::new();
    for j in enumerate_nuclei(f, bound)? {
        let q = quotient(&j)?;
        let zero = j.apply(f.bottom());
        let mut witness: Vec<usize> = base.members().iter().map(|b| j.apply(b)).filter(|&x| x != zero).collect();
        witness.sort_unstable();
        witness.dedup();
        let mask = Mask::from_indices(q.frame.size(), witness.iter().map(|&x| q.projection[x]));
        let failure = NonArchBase::new(&q.frame, mask).err().map(|e| e.to_string());
        out.push(QuotRecord {
            nucleus: j.table().to_vec(),
            fixed: q.fixed_elements.clone(),
            witness,
            passed: failure.is_none(),
            failure,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// All self-maps satisfying the four axioms, by raw scan.
    fn nuclei_oracle(f: &FiniteFrame) -> Vec<Vec<usize>> {
        let n = f.size();
        assert!(n <= 6);
        let mut out = Vec::new();
        let total = n.pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let table: Vec<usize> = (0..n)
                .map(|_| {
                    let v = c % n;
                    c /= n;
                    v
                })
                .collect();
            let j = ClosureMap { frame: f, table };
            if j.is_nucleus() {
                out.push(j.table);
            }
        }
        out.sort();
        out
    }

    #[test]
    fn axiom_examples() {
        let f = FiniteFrame::powerset(2);
        assert!(ClosureMap::identity(&f).is_nucleus());
        assert!(ClosureMap::constant_top(&f).is_nucleus());
        assert!(ClosureMap::closed(&f, 0b01).is_nucleus());
        assert!(ClosureMap::open(&f, 0b01).is_nucleus());
        // u -> u ∨ (−) composed with a non-idempotent shift
        let c = FiniteFrame::chain(3);
        let shift = ClosureMap::new(&c, vec![1, 2, 2]).unwrap();
        assert_eq!(shift.check_nucleus(), Some(Axiom::Idempotent(0)));
        assert!(ClosureMap::new(&c, vec![0, 0, 2]).is_err());
    }

    #[test]
    fn enumeration_matches_oracle() {
        for f in [
            FiniteFrame::chain(1),
            FiniteFrame::chain(2),
            FiniteFrame::chain(3),
            FiniteFrame::chain(5),
            FiniteFrame::powerset(2),
        ] {
            let got: Vec<Vec<usize>> = enumerate_nuclei(&f, 16).unwrap().iter().map(|j| j.table().to_vec()).collect();
            assert_eq!(got, nuclei_oracle(&f));
        }
        assert_eq!(enumerate_nuclei(&FiniteFrame::chain(2), 16).unwrap().len(), 2);
        assert_eq!(enumerate_nuclei(&FiniteFrame::chain(3), 16).unwrap().len(), 4);
    }

    #[test]
    fn closed_and_open_nuclei_are_enumerated() {
        let f = FiniteFrame::powerset(3);
        let all: Vec<Vec<usize>> = enumerate_nuclei(&f, 16).unwrap().iter().map(|j| j.table().to_vec()).collect();
        assert_eq!(all.len(), 8);
        for u in f.elements() {
            assert!(all.contains(&ClosureMap::closed(&f, u).table().to_vec()));
            assert!(all.contains(&ClosureMap::open(&f, u).table().to_vec()));
        }
        assert!(matches!(
            enumerate_nuclei(&FiniteFrame::powerset(5), 16),
            Err(NucleusError::TooLarge { .. })
        ));
    }

    #[test]
    fn quotient_examples() {
        let f = FiniteFrame::powerset(3);
        let q = quotient(&ClosureMap::identity(&f)).unwrap();
        assert_eq!(q.frame.size(), 8);
        let q = quotient(&ClosureMap::constant_top(&f)).unwrap();
        assert_eq!(q.frame.size(), 1);
        let q = quotient(&ClosureMap::closed(&f, 0b001)).unwrap();
        assert_eq!(q.frame.size(), 4);
        assert_eq!(q.frame.atoms().len(), 2);
        assert!(quotient(&ClosureMap::new(&FiniteFrame::chain(3), vec![1, 2, 2]).unwrap()).is_err());
    }

    #[test]
    fn prenucleus_closure_counts() {
        let f = FiniteFrame::chain(4);
        let (id, k) = prenucleus_closure(&ClosureMap::identity(&f)).unwrap();
        assert_eq!(k, 0);
        assert_eq!(id, ClosureMap::identity(&f));
        let top = ClosureMap::constant_top(&f);
        assert_eq!(prenucleus_closure(&top).unwrap(), (top.clone(), 1));
        let shift = ClosureMap::new(&f, vec![1, 2, 3, 3]).unwrap();
        let (c, k) = prenucleus_closure(&shift).unwrap();
        assert_eq!(k, 3);
        assert!(c.is_nucleus());
        assert_eq!(prenucleus_closure(&c).unwrap().0, c);
    }

    #[test]
    fn assembly_is_boolean_on_small_frames() {
        for f in [FiniteFrame::chain(3), FiniteFrame::powerset(2), FiniteFrame::chain(4)] {
            let ns = enumerate_nuclei(&f, 16).unwrap();
            let a = assembly(&f, &ns).unwrap();
            assert!(a.fully_checked);
            assert_eq!(a.frame.size(), 1 << f.meet_irreducibles().count());
            assert_eq!(a.frame.complemented_elements().count(), a.frame.size());
        }
    }

    #[test]
    fn json_round_trip() {
        let f = FiniteFrame::powerset(2);
        let j = ClosureMap::closed(&f, 1);
        let back = ClosureMap::from_json(&f, &j.to_json()).unwrap();
        assert_eq!(back, j);
    }

    #[test]
    fn quot_image_base() {
        let f = FiniteFrame::powerset(3);
        let base = NonArchBase::new(&f, Mask::from_indices(8, [1, 2, 4])).unwrap();
        let recs = verify_quot(&f, &base, 16).unwrap();
        assert_eq!(recs.len(), 8);
        assert!(recs.iter().all(|r| r.passed));
        let closed = ClosureMap::closed(&f, 0b001);
        let r = recs.iter().find(|r| r.nucleus == closed.table()).unwrap();
        assert_eq!(r.witness, vec![0b011, 0b101]);
    }
}
