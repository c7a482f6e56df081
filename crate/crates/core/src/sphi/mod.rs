//! The subsemigroup `S_Φ` of an inverse semigroup determined by a set `Φ` of
//! mutually equivalent nonzero idempotents, and its homomorphism onto the
//! partial bijections of `Φ`.

mod pb;
mod phi;

use std::fmt::Debug;
use std::hash::Hash;

pub use pb::{pb_semigroup, PartialBijection, PartialBijectionDoc, PbSemigroup, MAX_PB_N};
pub use phi::{
    alpha, closure_holds, enumerate_sphi, homomorphism_holds, is_in_sphi, Certificate, Enumeration, EnumeratedElement,
    Membership, PhiSet, Slot,
};

/// A finite inverse semigroup with zero and identity.
pub trait FiniteInverseSemigroup: Sync {
    type Elem: Clone + Eq + Ord + Hash + Debug + Send + Sync;

    fn elements(&self) -> &[Self::Elem];
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn star(&self, a: &Self::Elem) -> Self::Elem;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;

    fn mul3(&self, a: &Self::Elem, b: &Self::Elem, c: &Self::Elem) -> Self::Elem {
        self.mul(&self.mul(a, b), c)
    }

    fn is_idempotent(&self, e: &Self::Elem) -> bool {
        self.mul(e, e) == *e
    }

    fn idempotents(&self) -> Vec<Self::Elem> {
        self.elements().iter().filter(|e| self.is_idempotent(e)).cloned().collect()
    }
}

/// Outcome of an exhaustive check of the inverse-semigroup axioms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AxiomReport {
    pub pseudoinverse: bool,
    pub unique_pseudoinverse: bool,
    pub idempotents_commute: bool,
    pub zero_and_one: bool,
}

impl AxiomReport {
    pub fn all(&self) -> bool {
        self.pseudoinverse && self.unique_pseudoinverse && self.idempotents_commute && self.zero_and_one
    }
}

/// Exhaustive axiom check; quadratic in the number of elements.
pub fn check_inverse_axioms<S: FiniteInverseSemigroup>(s: &S) -> AxiomReport {
    let el = s.elements();
    let pseudoinverse = el.iter().all(|a| {
        let t = s.star(a);
        s.mul3(a, &t, a) == *a && s.mul3(&t, a, &t) == t
    });
    let unique_pseudoinverse = el.iter().all(|a| {
        let t = s.star(a);
        el.iter()
            .filter(|b| s.mul3(a, b, a) == *a && s.mul3(b, a, b) == **b)
            .all(|b| *b == t)
    });
    let idem = s.idempotents();
    let idempotents_commute = idem
        .iter()
        .all(|e| idem.iter().all(|f| s.mul(e, f) == s.mul(f, e)));
    let (z, o) = (s.zero(), s.one());
    let zero_and_one = el.iter().all(|a| s.mul(a, &z) == z && s.mul(&z, a) == z && s.mul(a, &o) == *a && s.mul(&o, a) == *a);
    AxiomReport {
        pseudoinverse,
        unique_pseudoinverse,
        idempotents_commute,
        zero_and_one,
    }
}
