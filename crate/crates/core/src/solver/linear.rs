//! Linear forms over solver parameters and the atoms built from them.

use std::fmt::Write;

/// `constant + Σ coeffs[i] · param_i`, exact in 128-bit arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinForm {
    pub coeffs: Vec<i128>,
    pub constant: i128,
}

impl LinForm {
    pub fn constant(params: usize, k: i128) -> LinForm {
        LinForm { coeffs: vec![0; params], constant: k }
    }

    pub fn param(params: usize, i: usize) -> LinForm {
        let mut f = LinForm::constant(params, 0);
        f.coeffs[i] = 1;
        f
    }

    pub fn as_constant(&self) -> Option<i128> {
        self.coeffs.iter().all(|&c| c == 0).then_some(self.constant)
    }

    /// Indices of parameters with a non-zero coefficient.
    pub fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.coeffs.iter().enumerate().filter(|(_, c)| **c != 0).map(|(i, _)| i)
    }

    fn zip(&self, o: &LinForm, f: impl Fn(i128, i128) -> Option<i128>) -> Option<LinForm> {
        let coeffs = self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| f(*a, *b)).collect::<Option<Vec<_>>>()?;
        Some(LinForm { coeffs, constant: f(self.constant, o.constant)? })
    }

    pub fn checked_add(&self, o: &LinForm) -> Option<LinForm> {
        self.zip(o, i128::checked_add)
    }

    pub fn checked_sub(&self, o: &LinForm) -> Option<LinForm> {
        self.zip(o, i128::checked_sub)
    }

    pub fn checked_scale(&self, k: i128) -> Option<LinForm> {
        let coeffs = self.coeffs.iter().map(|c| c.checked_mul(k)).collect::<Option<Vec<_>>>()?;
        Some(LinForm { coeffs, constant: self.constant.checked_mul(k)? })
    }

    pub fn checked_offset(&self, k: i128) -> Option<LinForm> {
        Some(LinForm { coeffs: self.coeffs.clone(), constant: self.constant.checked_add(k)? })
    }

    /// Replaces parameter `i` by the value `v`.
    pub fn substitute(&self, i: usize, v: i64) -> Option<LinForm> {
        let mut f = self.clone();
        f.constant = f.constant.checked_add(f.coeffs[i].checked_mul(v as i128)?)?;
        f.coeffs[i] = 0;
        Some(f)
    }

    pub fn eval(&self, x: &[i64]) -> Option<i128> {
        self.coeffs
            .iter()
            .zip(x)
            .try_fold(self.constant, |acc, (c, v)| acc.checked_add(c.checked_mul(*v as i128)?))
    }

    /// Tight bounds of the form over the box `lo..=hi`; `None` on 128-bit overflow.
    pub fn range(&self, lo: &[i64], hi: &[i64]) -> Option<(i128, i128)> {
        let (mut min, mut max) = (self.constant, self.constant);
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let a = c.checked_mul(lo[i] as i128)?;
            let b = c.checked_mul(hi[i] as i128)?;
            min = min.checked_add(a.min(b))?;
            max = max.checked_add(a.max(b))?;
        }
        Some((min, max))
    }

    /// Human-readable rendering such as `2*x - y + 3`.
    pub fn render(&self, names: &[String]) -> String {
        let mut out = String::new();
        for (i, &c) in self.coeffs.iter().enumerate().filter(|(_, c)| **c != 0) {
            let sign = if c < 0 { "-" } else { "+" };
            if out.is_empty() {
                if c < 0 {
                    out.push('-');
                }
            } else {
                let _ = write!(out, " {sign} ");
            }
            match c.unsigned_abs() {
                1 => out.push_str(&names[i]),
                m => {
                    let _ = write!(out, "{m}*{}", names[i]);
                }
            }
        }
        if out.is_empty() {
            return self.constant.to_string();
        }
        if self.constant != 0 {
            let sign = if self.constant < 0 { "-" } else { "+" };
            let _ = write!(out, " {sign} {}", self.constant.unsigned_abs());
        }
        out
    }
}

/// Relation of an atom's form to zero. Strict inequalities are normalised to `Le`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rel {
    Le,
    Eq,
    Ne,
}

/// `form rel 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub form: LinForm,
    pub rel: Rel,
}

impl Atom {
    pub fn le(form: LinForm) -> Atom {
        Atom { form, rel: Rel::Le }
    }

    pub fn eq(form: LinForm) -> Atom {
        Atom { form, rel: Rel::Eq }
    }

    pub fn ne(form: LinForm) -> Atom {
        Atom { form, rel: Rel::Ne }
    }

    /// `form < 0` as `form + 1 <= 0`.
    pub fn lt(form: LinForm) -> Option<Atom> {
        Some(Atom::le(form.checked_offset(1)?))
    }

    /// `form >= 0` as `-form <= 0`.
    pub fn ge(form: LinForm) -> Option<Atom> {
        Some(Atom::le(form.checked_scale(-1)?))
    }

    /// `form > 0` as `-form + 1 <= 0`.
    pub fn gt(form: LinForm) -> Option<Atom> {
        Some(Atom::le(form.checked_scale(-1)?.checked_offset(1)?))
    }

    /// `None` when evaluation overflows 128 bits.
    pub fn holds(&self, x: &[i64]) -> Option<bool> {
        let v = self.form.eval(x)?;
        Some(match self.rel {
            Rel::Le => v <= 0,
            Rel::Eq => v == 0,
            Rel::Ne => v != 0,
        })
    }

    pub fn render(&self, names: &[String]) -> String {
        let rel = match self.rel {
            Rel::Le => "<=",
            Rel::Eq => "==",
            Rel::Ne => "!=",
        };
        format!("{} {rel} 0", self.form.render(names))
    }
}

/// Conjunction of atoms in derivation order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PathConstraint {
    pub atoms: Vec<Atom>,
}

impl PathConstraint {
    pub fn holds(&self, x: &[i64]) -> bool {
        self.atoms.iter().all(|a| a.holds(x) == Some(true))
    }

    pub fn render(&self, names: &[String]) -> String {
        if self.atoms.is_empty() {
            return "true".into();
        }
        self.atoms.iter().map(|a| a.render(names)).collect::<Vec<_>>().join(" && ")
    }
}

pub(crate) fn floor_div(a: i128, b: i128) -> i128 {
    let q = a / b;
    if a % b != 0 && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

pub(crate) fn ceil_div(a: i128, b: i128) -> i128 {
    let q = a / b;
    if a % b != 0 && ((a < 0) == (b < 0)) {
        q + 1
    } else {
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn form(coeffs: &[i128], k: i128) -> LinForm {
        LinForm { coeffs: coeffs.to_vec(), constant: k }
    }

    #[test]
    fn arithmetic_and_eval() {
        let f = form(&[2, -1], 3);
        let g = form(&[1, 1], -1);
        assert_eq!(f.checked_add(&g).unwrap(), form(&[3, 0], 2));
        assert_eq!(f.checked_sub(&g).unwrap(), form(&[1, -2], 4));
        assert_eq!(f.checked_scale(-2).unwrap(), form(&[-4, 2], -6));
        assert_eq!(f.eval(&[5, 1]), Some(12));
        assert_eq!(f.substitute(0, 5).unwrap(), form(&[0, -1], 13));
        assert_eq!(f.range(&[-1, 0], &[1, 4]), Some((-3, 5)));
        assert_eq!(form(&[0, 0], 7).as_constant(), Some(7));
        assert_eq!(f.vars().collect::<Vec<_>>(), vec![0, 1]);
        assert!(form(&[i128::MAX, 0], 0).checked_scale(2).is_none());
    }

    #[test]
    fn strict_atoms_normalise() {
        let x = LinForm::param(1, 0);
        let lt = Atom::lt(x.clone()).unwrap();
        assert_eq!((lt.holds(&[-1]), lt.holds(&[0])), (Some(true), Some(false)));
        let gt = Atom::gt(x.clone()).unwrap();
        assert_eq!((gt.holds(&[1]), gt.holds(&[0])), (Some(true), Some(false)));
        let ge = Atom::ge(x).unwrap();
        assert_eq!((ge.holds(&[0]), ge.holds(&[-1])), (Some(true), Some(false)));
    }

    #[test]
    fn rendering() {
        let names = vec!["x".to_string(), "y".to_string()];
        assert_eq!(form(&[2, -1], 0).render(&names), "2*x - y");
        assert_eq!(form(&[-1, 0], -11).render(&names), "-x - 11");
        assert_eq!(form(&[0, 0], 4).render(&names), "4");
        let pc = PathConstraint { atoms: vec![Atom::eq(form(&[2, -1], 0))] };
        assert_eq!(pc.render(&names), "2*x - y == 0");
    }

    #[test]
    fn rounding_division() {
        for a in -7..=7 {
            for b in [-3, -2, -1, 1, 2, 3] {
                let exact = a as f64 / b as f64;
                assert_eq!(floor_div(a, b), exact.floor() as i128, "{a}/{b}");
                assert_eq!(ceil_div(a, b), exact.ceil() as i128, "{a}/{b}");
            }
        }
    }
}
