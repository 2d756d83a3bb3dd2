use crate::model::{div_round_half_even, NegotiationPolicy};
use crate::money::Money;

/// Settles a salary gap between two offers for the same class.
///
/// Returns `None` (no trade) when the gap is at most `epsilon`. Otherwise the
/// settlement is `min + round_half_even(alpha · gap)` in minor units, so it
/// always lies between the two offers.
pub fn negotiate_salary(s_a: Money, s_b: Money, policy: &NegotiationPolicy) -> Option<Money> {
    let gap = s_a.abs_diff(s_b);
    if gap <= policy.epsilon() {
        return None;
    }
    let alpha = policy.alpha();
    let shift = div_round_half_even(gap.minor() as i128 * alpha.numer() as i128, alpha.denom() as i128);
    Some(Money::from_minor(s_a.min(s_b).minor() + shift as i64))
}
