use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::{FiniteInverseSemigroup, PartialBijection};
use crate::error::{Error, Result};

/// Nonzero, pairwise equivalent idempotents.
#[derive(Clone, Debug)]
pub struct PhiSet<E> {
    members: Vec<E>,
}

impl<E: Clone + Eq + std::fmt::Debug> PhiSet<E> {
    /// Validates eagerly: each member is a nonzero idempotent, members are
    /// distinct, and every pair `(e, f)` has a witness `s` with `ss* = e`, `s*s = f`.
    pub fn new<S: FiniteInverseSemigroup<Elem = E>>(s: &S, members: Vec<E>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Semigroup("Phi must be non-empty".into()));
        }
        let zero = s.zero();
        for (i, e) in members.iter().enumerate() {
            if !s.is_idempotent(e) {
                return Err(Error::Semigroup(format!("{e:?} is not idempotent")));
            }
            if *e == zero {
                return Err(Error::Semigroup("Phi contains zero".into()));
            }
            if members[..i].contains(e) {
                return Err(Error::Semigroup(format!("{e:?} listed twice")));
            }
        }
        for e in &members {
            for f in &members {
                let witnessed = s.elements().iter().any(|x| {
                    let xs = s.star(x);
                    s.mul(x, &xs) == *e && s.mul(&xs, x) == *f
                });
                if !witnessed {
                    return Err(Error::Semigroup(format!("{e:?} and {f:?} are not equivalent")));
                }
            }
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[E] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Per-idempotent outcome of the `S(Φ)` test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum Slot {
    /// `e s* s = 0`
    Zero,
    /// `e s* s = e` and `f = Φ[target]` satisfies `se = fs`, `f s s* = f`;
    /// `matches` counts all such `f` (uniqueness means 1).
    Mapped { target: usize, matches: usize },
    /// Neither case holds.
    Fails,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    /// Slots for `s`, indexed like `Φ`.
    pub forward: Vec<Slot>,
    /// Slots for `s*`.
    pub backward: Vec<Slot>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Membership {
    pub member: bool,
    pub certificate: Certificate,
}

fn slots<S: FiniteInverseSemigroup>(sg: &S, s: &S::Elem, phi: &PhiSet<S::Elem>) -> Vec<Slot> {
    let ss = sg.star(s);
    let sss = sg.mul(&ss, s);
    let s_ss = sg.mul(s, &ss);
    let zero = sg.zero();
    phi.members()
        .iter()
        .map(|e| {
            let p = sg.mul(e, &sss);
            if p == zero {
                return Slot::Zero;
            }
            if p != *e {
                return Slot::Fails;
            }
            let se = sg.mul(s, e);
            let found: Vec<usize> = phi
                .members()
                .iter()
                .enumerate()
                .filter(|(_, f)| sg.mul(f, s) == se && sg.mul(f, &s_ss) == **f)
                .map(|(j, _)| j)
                .collect();
            match found.first() {
                Some(&target) => Slot::Mapped {
                    target,
                    matches: found.len(),
                },
                None => Slot::Fails,
            }
        })
        .collect()
}

/// Membership in `S_Φ = S(Φ) ∩ S(Φ)*`, with the per-`e` certificate.
pub fn is_in_sphi<S: FiniteInverseSemigroup>(s: &S::Elem, sg: &S, phi: &PhiSet<S::Elem>) -> Membership {
    let forward = slots(sg, s, phi);
    let backward = slots(sg, &sg.star(s), phi);
    let ok = |v: &[Slot]| v.iter().all(|x| *x != Slot::Fails);
    Membership {
        member: ok(&forward) && ok(&backward),
        certificate: Certificate { forward, backward },
    }
}

fn alpha_from(cert: &Certificate, k: usize) -> PartialBijection {
    let pairs: Vec<(usize, usize)> = cert
        .forward
        .iter()
        .enumerate()
        .filter_map(|(i, slot)| match slot {
            Slot::Mapped { target, .. } => Some((i + 1, target + 1)),
            _ => None,
        })
        .collect();
    PartialBijection::new(k, &pairs).expect("alpha is a bijection onto B(s)")
}

/// `α(s) : A(s) → B(s)` as a partial bijection of `{1, …, |Φ|}`, where `i`
/// stands for `Φ[i-1]`.
pub fn alpha<S: FiniteInverseSemigroup>(s: &S::Elem, sg: &S, phi: &PhiSet<S::Elem>) -> Result<PartialBijection> {
    let m = is_in_sphi(s, sg, phi);
    if !m.member {
        return Err(Error::NotInSPhi);
    }
    Ok(alpha_from(&m.certificate, phi.len()))
}

#[derive(Clone, Debug)]
pub struct EnumeratedElement<E> {
    pub element: E,
    pub alpha: PartialBijection,
    pub certificate: Certificate,
}

#[derive(Clone, Debug)]
pub struct Enumeration<E> {
    pub elements: Vec<EnumeratedElement<E>>,
    /// α image → positions in `elements`.
    pub classes: BTreeMap<PartialBijection, Vec<usize>>,
}

impl<E> Enumeration<E> {
    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    /// Every certificate slot found exactly one `f`.
    pub fn targets_unique(&self) -> bool {
        self.elements.iter().all(|x| {
            x.certificate
                .forward
                .iter()
                .chain(&x.certificate.backward)
                .all(|s| !matches!(s, Slot::Mapped { matches, .. } if *matches != 1))
        })
    }
}

pub fn enumerate_sphi<S: FiniteInverseSemigroup>(sg: &S, phi: &PhiSet<S::Elem>) -> Enumeration<S::Elem>
where
    PhiSet<S::Elem>: Sync,
{
    let elements: Vec<EnumeratedElement<S::Elem>> = sg
        .elements()
        .par_iter()
        .filter_map(|s| {
            let m = is_in_sphi(s, sg, phi);
            m.member.then(|| EnumeratedElement {
                element: s.clone(),
                alpha: alpha_from(&m.certificate, phi.len()),
                certificate: m.certificate,
            })
        })
        .collect();
    let mut classes: BTreeMap<PartialBijection, Vec<usize>> = BTreeMap::new();
    for (i, x) in elements.iter().enumerate() {
        classes.entry(x.alpha.clone()).or_default().push(i);
    }
    Enumeration { elements, classes }
}

/// `s·t ∈ S_Φ` and `s* ∈ S_Φ` for all enumerated `s, t`.
pub fn closure_holds<S: FiniteInverseSemigroup>(sg: &S, phi: &PhiSet<S::Elem>, en: &Enumeration<S::Elem>) -> bool
where
    PhiSet<S::Elem>: Sync,
{
    let members: std::collections::HashSet<&S::Elem> = en.elements.iter().map(|x| &x.element).collect();
    en.elements.par_iter().all(|a| {
        members.contains(&sg.star(&a.element))
            && en
                .elements
                .iter()
                .all(|b| members.contains(&sg.mul(&a.element, &b.element)))
    }) && en.elements.iter().all(|a| is_in_sphi(&a.element, sg, phi).member)
}

/// `α(s·t) = α(s) ∘ α(t)` for all enumerated pairs.
pub fn homomorphism_holds<S: FiniteInverseSemigroup>(sg: &S, phi: &PhiSet<S::Elem>, en: &Enumeration<S::Elem>) -> bool
where
    PhiSet<S::Elem>: Sync,
{
    en.elements.par_iter().all(|a| {
        en.elements.iter().all(|b| match alpha(&sg.mul(&a.element, &b.element), sg, phi) {
            Ok(ab) => ab == a.alpha.compose(&b.alpha),
            Err(_) => false,
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphi::pb_semigroup;

    fn pb(n: usize, pairs: &[(usize, usize)]) -> PartialBijection {
        PartialBijection::new(n, pairs).unwrap()
    }

    fn example_one() -> (crate::sphi::PbSemigroup, PhiSet<PartialBijection>) {
        let s = pb_semigroup(4).unwrap();
        let phi = PhiSet::new(
            &s,
            vec![
                PartialBijection::identity_on(4, [1, 2]).unwrap(),
                PartialBijection::identity_on(4, [3, 4]).unwrap(),
            ],
        )
        .unwrap();
        (s, phi)
    }

    #[test]
    fn one_and_zero() {
        let (s, phi) = example_one();
        let m = is_in_sphi(&s.one(), &s, &phi);
        assert!(m.member);
        assert_eq!(
            m.certificate.forward,
            vec![Slot::Mapped { target: 0, matches: 1 }, Slot::Mapped { target: 1, matches: 1 }]
        );
        assert_eq!(alpha(&s.one(), &s, &phi).unwrap(), PartialBijection::identity(2));
        let z = is_in_sphi(&s.zero(), &s, &phi);
        assert!(z.member);
        assert!(z.certificate.forward.iter().all(|x| *x == Slot::Zero));
        assert_eq!(alpha(&s.zero(), &s, &phi).unwrap(), PartialBijection::empty(2));
    }

    #[test]
    fn block_map_and_partial_block() {
        let (s, phi) = example_one();
        let shift = pb(4, &[(1, 3), (2, 4)]);
        assert!(is_in_sphi(&shift, &s, &phi).member);
        assert_eq!(alpha(&shift, &s, &phi).unwrap(), pb(2, &[(1, 2)]));
        let partial = pb(4, &[(1, 3)]);
        assert!(!is_in_sphi(&partial, &s, &phi).member);
        assert!(matches!(alpha(&partial, &s, &phi), Err(Error::NotInSPhi)));
    }

    #[test]
    fn phi_validation() {
        let s = pb_semigroup(3).unwrap();
        // different ranks are not equivalent
        let bad = PhiSet::new(
            &s,
            vec![
                PartialBijection::identity_on(3, [1]).unwrap(),
                PartialBijection::identity_on(3, [2, 3]).unwrap(),
            ],
        );
        assert!(bad.is_err());
        assert!(PhiSet::new(&s, vec![s.zero()]).is_err());
        assert!(PhiSet::new(&s, vec![pb(3, &[(1, 2)])]).is_err());
        assert!(PhiSet::<PartialBijection>::new(&s, vec![]).is_err());
    }

    /// Independent count of `{0} ∪ Sym(n)` by filtering all partial bijections.
    #[test]
    fn phi_is_one_gives_units_and_zero() {
        for n in 1..=4 {
            let s = pb_semigroup(n).unwrap();
            let phi = PhiSet::new(&s, vec![s.one()]).unwrap();
            let en = enumerate_sphi(&s, &phi);
            let brute = s.elements().iter().filter(|p| p.rank() == 0 || p.rank() == n).count();
            assert_eq!(en.element_count(), brute);
            assert_eq!(brute, 1 + (1..=n).product::<usize>());
            assert_eq!(en.class_count(), 2);
        }
    }

    #[test]
    fn closure_and_homomorphism_small() {
        let s = pb_semigroup(3).unwrap();
        let phi = PhiSet::new(
            &s,
            vec![
                PartialBijection::identity_on(3, [1]).unwrap(),
                PartialBijection::identity_on(3, [2]).unwrap(),
                PartialBijection::identity_on(3, [3]).unwrap(),
            ],
        )
        .unwrap();
        let en = enumerate_sphi(&s, &phi);
        // singletons: every partial bijection permutes them, α is the map itself
        assert_eq!(en.element_count(), 34);
        assert!(en.elements.iter().all(|x| x.alpha == x.element));
        assert!(en.targets_unique());
        assert!(closure_holds(&s, &phi, &en));
        assert!(homomorphism_holds(&s, &phi, &en));
    }
}
