//! The ∀₂⁺ / ∀₂⁻ classes of formulas.

use crate::logic::Formula;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Polarity {
    pub positive: bool,
    pub negative: bool,
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "pos={} neg={}", self.positive, self.negative)
    }
}

/// Atoms and ⊥ are both; `B → A` is positive when `A` is positive and `B`
/// negative (dually for negative); `∀x` is transparent; `∀X` keeps
/// positivity and is never negative.
pub fn classify(a: &Formula) -> Polarity {
    match a {
        Formula::Absurd | Formula::Pred(..) | Formula::Var(..) => Polarity { positive: true, negative: true },
        Formula::Imp(b, c) => {
            let (pb, pc) = (classify(b), classify(c));
            Polarity { positive: pc.positive && pb.negative, negative: pc.negative && pb.positive }
        }
        Formula::AllFo(_, b) => classify(b),
        Formula::AllSo(_, _, b) => Polarity { positive: classify(b).positive, negative: false },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::typing::tests::f;

    fn pol(s: &str) -> (bool, bool) {
        let p = classify(&f(s));
        (p.positive, p.negative)
    }

    #[test]
    fn table() {
        assert_eq!(pol("P(c)"), (true, true));
        assert_eq!(pol("_|_"), (true, true));
        assert_eq!(pol("!X. X -> X -> X"), (true, false));
        assert_eq!(pol("(!X. X -> X) -> P(c)"), (false, true));
        assert_eq!(pol("((!X. X) -> !X. X) -> P(c)"), (false, false));
        assert_eq!(pol("!x. N(x) -> N(s(x))"), (true, true));
        assert_eq!(pol("!X. X(0) -> X(0)"), (true, false));
        assert_eq!(pol("((!X. X) -> P(c)) -> P(c)"), (true, false));
    }

    #[test]
    fn display() {
        assert_eq!(classify(&f("P(c)")).to_string(), "pos=true neg=true");
    }
}
