//! Float formatting for CSV output: 17 significant digits, which
//! round-trips every finite f64 exactly.

pub fn f64_repr(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::CounterRng;

    #[test]
    fn representation_round_trips() {
        let mut rng = CounterRng::new(99);
        for _ in 0..1000 {
            let x = f64::from_bits(rng.next_u64());
            if !x.is_finite() {
                continue;
            }
            let back: f64 = f64_repr(x).parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{x}");
        }
        assert_eq!(f64_repr(0.125).parse::<f64>().unwrap(), 0.125);
    }
}
