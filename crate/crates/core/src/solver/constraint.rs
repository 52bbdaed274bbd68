//! Linear integer feasibility over boxed domains: branch-and-bound with bounds
//! propagation. The search splits the tightest variable first; the lexicographically
//! smallest solution is then found coordinate by coordinate with further searches.

use crate::domain::Domain;

use super::linear::{ceil_div, floor_div, Atom, Rel};

/// Propagation rounds per node before falling back to branching.
const FIXPOINT_CAP: usize = 64;

/// Default limit on branch-and-bound nodes per query.
pub const DEFAULT_NODE_CAP: u64 = 200_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feasibility {
    /// Lexicographically smallest satisfying point.
    Sat(Vec<i64>),
    Unsat,
    /// Node cap reached before the search finished.
    Unknown,
}

#[derive(Clone)]
struct Bx {
    lo: Vec<i128>,
    hi: Vec<i128>,
}

struct Search<'a> {
    atoms: &'a [Atom],
    doms: &'a [Domain],
}

impl Search<'_> {
    /// Smallest member of variable `i`'s domain that is `>= v`.
    fn snap_up(&self, i: usize, v: i128) -> Option<i128> {
        match &self.doms[i] {
            Domain::Range { hi, .. } => (v <= *hi as i128).then_some(v),
            Domain::Set { values } => {
                let k = values.partition_point(|&x| (x as i128) < v);
                values.get(k).map(|&x| x as i128)
            }
        }
    }

    fn snap_down(&self, i: usize, v: i128) -> Option<i128> {
        match &self.doms[i] {
            Domain::Range { lo, .. } => (v >= *lo as i128).then_some(v),
            Domain::Set { values } => {
                let k = values.partition_point(|&x| (x as i128) <= v);
                (k > 0).then(|| values[k - 1] as i128)
            }
        }
    }

    fn raise_lo(&self, b: &mut Bx, i: usize, v: i128, changed: &mut bool) -> bool {
        if v > b.lo[i] {
            match self.snap_up(i, v) {
                Some(s) if s <= b.hi[i] => {
                    b.lo[i] = s;
                    *changed = true;
                }
                _ => return false,
            }
        }
        true
    }

    fn lower_hi(&self, b: &mut Bx, i: usize, v: i128, changed: &mut bool) -> bool {
        if v < b.hi[i] {
            match self.snap_down(i, v) {
                Some(s) if s >= b.lo[i] => {
                    b.hi[i] = s;
                    *changed = true;
                }
                _ => return false,
            }
        }
        true
    }

    /// Narrows with `sign * form <= 0`. Returns false when infeasible; atoms whose
    /// bounds overflow 128 bits are skipped.
    fn narrow_le(&self, a: &Atom, sign: i128, b: &mut Bx, changed: &mut bool) -> bool {
        let coeff = |i: usize| a.form.coeffs[i] * sign;
        let term_min = |i: usize, c: i128, b: &Bx| if c > 0 { c.checked_mul(b.lo[i]) } else { c.checked_mul(b.hi[i]) };
        let mut min = match (a.form.constant).checked_mul(sign) {
            Some(k) => k,
            None => return true,
        };
        for i in 0..a.form.coeffs.len() {
            let c = coeff(i);
            if c != 0 {
                match term_min(i, c, b).and_then(|t| min.checked_add(t)) {
                    Some(m) => min = m,
                    None => return true,
                }
            }
        }
        if min > 0 {
            return false;
        }
        for i in 0..a.form.coeffs.len() {
            let c = coeff(i);
            if c == 0 || b.lo[i] == b.hi[i] {
                continue;
            }
            let Some(rest) = term_min(i, c, b).and_then(|t| min.checked_sub(t)) else { return true };
            // c * x_i <= -rest
            let ok = if c > 0 {
                self.lower_hi(b, i, floor_div(-rest, c), changed)
            } else {
                self.raise_lo(b, i, ceil_div(-rest, c), changed)
            };
            if !ok {
                return false;
            }
            // the bound on x_i moved; recompute the running minimum
            match term_min(i, c, b).and_then(|t| rest.checked_add(t)) {
                Some(m) => min = m,
                None => return true,
            }
        }
        true
    }

    /// Divisibility check on an equality with the fixed variables folded in.
    fn gcd_ok(&self, a: &Atom, b: &Bx) -> bool {
        let mut g: i128 = 0;
        let mut rest = a.form.constant;
        for (i, &c) in a.form.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if b.lo[i] == b.hi[i] {
                match c.checked_mul(b.lo[i]).and_then(|t| rest.checked_add(t)) {
                    Some(r) => rest = r,
                    None => return true,
                }
            } else {
                g = gcd(g, c.abs());
            }
        }
        if g == 0 {
            rest == 0
        } else {
            rest % g == 0
        }
    }

    /// Excludes the single forbidden value of a disequality at a variable's bound.
    fn narrow_ne(&self, a: &Atom, b: &mut Bx, changed: &mut bool) -> bool {
        let mut free = None;
        let mut rest = a.form.constant;
        for (i, &c) in a.form.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if b.lo[i] == b.hi[i] {
                match c.checked_mul(b.lo[i]).and_then(|t| rest.checked_add(t)) {
                    Some(r) => rest = r,
                    None => return true,
                }
            } else if free.is_some() {
                return true;
            } else {
                free = Some((i, c));
            }
        }
        match free {
            None => rest != 0,
            Some((i, c)) => {
                if rest % c != 0 {
                    return true;
                }
                let x = -rest / c;
                if x == b.lo[i] {
                    self.raise_lo(b, i, x + 1, changed)
                } else if x == b.hi[i] {
                    self.lower_hi(b, i, x - 1, changed)
                } else {
                    true
                }
            }
        }
    }

    fn propagate(&self, b: &mut Bx) -> bool {
        for _ in 0..FIXPOINT_CAP {
            let mut changed = false;
            for a in self.atoms {
                let ok = match a.rel {
                    Rel::Le => self.narrow_le(a, 1, b, &mut changed),
                    Rel::Eq => {
                        self.gcd_ok(a, b)
                            && self.narrow_le(a, 1, b, &mut changed)
                            && self.narrow_le(a, -1, b, &mut changed)
                    }
                    Rel::Ne => self.narrow_ne(a, b, &mut changed),
                };
                if !ok {
                    return false;
                }
            }
            if !changed {
                break;
            }
        }
        true
    }

    fn root(&self) -> Bx {
        Bx {
            lo: self.doms.iter().map(|d| d.lo() as i128).collect(),
            hi: self.doms.iter().map(|d| d.hi() as i128).collect(),
        }
    }

    /// Values of variable `i` left in `[b.lo[i], b.hi[i]]`.
    fn width(&self, b: &Bx, i: usize) -> i128 {
        match &self.doms[i] {
            Domain::Range { .. } => b.hi[i] - b.lo[i] + 1,
            Domain::Set { values } => {
                let from = values.partition_point(|&x| (x as i128) < b.lo[i]);
                let to = values.partition_point(|&x| (x as i128) <= b.hi[i]);
                (to - from) as i128
            }
        }
    }

    /// Depth-first search for any point of `root`, splitting the variable with the
    /// fewest remaining values first. `Err` when the node budget runs out.
    fn any_point(&self, root: Bx, nodes: &mut u64, node_cap: u64) -> Result<Option<Vec<i64>>, ()> {
        let mut stack = vec![root];
        while let Some(mut b) = stack.pop() {
            *nodes += 1;
            if *nodes > node_cap {
                return Err(());
            }
            if !self.propagate(&mut b) {
                continue;
            }
            let open = (0..b.lo.len()).filter(|&i| b.lo[i] < b.hi[i]).min_by_key(|&i| (self.width(&b, i), i));
            match open {
                None => {
                    let x: Vec<i64> = b.lo.iter().map(|&v| v as i64).collect();
                    if self.atoms.iter().all(|a| a.holds(&x) == Some(true)) {
                        return Ok(Some(x));
                    }
                }
                Some(i) => {
                    let (mut low, mut high) = (b.clone(), b);
                    match &self.doms[i] {
                        Domain::Range { .. } => {
                            let mid = low.lo[i] + (low.hi[i] - low.lo[i]) / 2;
                            low.hi[i] = mid;
                            high.lo[i] = mid + 1;
                        }
                        Domain::Set { .. } => {
                            low.hi[i] = low.lo[i];
                            high.lo[i] = self.snap_up(i, high.lo[i] + 1).expect("lo < hi, both members");
                        }
                    }
                    stack.push(high);
                    stack.push(low);
                }
            }
        }
        Ok(None)
    }

    /// Lexicographically smallest point: one feasibility search, then each coordinate
    /// in turn is lowered by bisection with the earlier ones fixed.
    fn lex_min(&self, node_cap: u64) -> Feasibility {
        let mut nodes = 0u64;
        let mut b = self.root();
        let mut best = match self.any_point(b.clone(), &mut nodes, node_cap) {
            Err(()) => return Feasibility::Unknown,
            Ok(None) => return Feasibility::Unsat,
            Ok(Some(x)) => x,
        };
        for i in 0..b.lo.len() {
            let (mut lo, mut hi) = (b.lo[i], best[i] as i128);
            while lo < hi {
                let mut probe = b.clone();
                probe.lo[i] = lo;
                probe.hi[i] = self.snap_down(i, lo + (hi - lo) / 2).expect("lo is a member");
                let cut = probe.hi[i];
                match self.any_point(probe, &mut nodes, node_cap) {
                    Err(()) => return Feasibility::Unknown,
                    Ok(Some(x)) => {
                        hi = x[i] as i128;
                        best = x;
                    }
                    Ok(None) => lo = self.snap_up(i, cut + 1).expect("hi is a larger member"),
                }
            }
            b.lo[i] = hi;
            b.hi[i] = hi;
        }
        Feasibility::Sat(best)
    }
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Lexicographically smallest point of the domains box satisfying every atom.
pub fn solve_constraint(atoms: &[Atom], domains: &[Domain], node_cap: u64) -> Feasibility {
    Search { atoms, doms: domains }.lex_min(node_cap)
}

/// Some point of the domains box satisfying every atom, not necessarily the smallest.
pub fn find_point(atoms: &[Atom], domains: &[Domain], node_cap: u64) -> Feasibility {
    let s = Search { atoms, doms: domains };
    match s.any_point(s.root(), &mut 0, node_cap) {
        Ok(Some(x)) => Feasibility::Sat(x),
        Ok(None) => Feasibility::Unsat,
        Err(()) => Feasibility::Unknown,
    }
}

/// Per-variable bounds after root propagation; `None` when propagation proves the
/// constraint infeasible.
pub fn propagated_bounds(atoms: &[Atom], domains: &[Domain]) -> Option<Vec<(i64, i64)>> {
    let s = Search { atoms, doms: domains };
    let mut b = s.root();
    s.propagate(&mut b).then(|| b.lo.iter().zip(&b.hi).map(|(&l, &h)| (l as i64, h as i64)).collect())
}
