//! Density bookkeeping for prime sweeps.

use num_traits::Zero;
use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::exact::Rat;
use crate::Int;

/// z for a two-sided 99% normal interval.
pub const Z99: f64 = 2.5758293035489004;

/// Hit frequency over a set of eligible primes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct DensityEstimate {
    pub hits: u64,
    pub eligible: u64,
}

impl DensityEstimate {
    pub fn new(hits: u64, eligible: u64) -> DensityEstimate {
        assert!(hits <= eligible, "hits cannot exceed eligible");
        DensityEstimate { hits, eligible }
    }

    pub fn record(&mut self, hit: bool) {
        self.eligible += 1;
        if hit {
            self.hits += 1;
        }
    }

    pub fn merge(&mut self, other: DensityEstimate) {
        self.hits += other.hits;
        self.eligible += other.eligible;
    }

    pub fn proportion(&self) -> f64 {
        if self.eligible == 0 {
            0.0
        } else {
            self.hits as f64 / self.eligible as f64
        }
    }

    pub fn proportion_exact(&self) -> Rat {
        if self.eligible == 0 {
            Rat::zero()
        } else {
            Rat::new(Int::from(self.hits), Int::from(self.eligible))
        }
    }

    /// Wilson score interval at 99% confidence; (0, 1) when no data.
    pub fn wilson99(&self) -> (f64, f64) {
        if self.eligible == 0 {
            return (0.0, 1.0);
        }
        let n = self.eligible as f64;
        let phat = self.hits as f64 / n;
        let z2 = Z99 * Z99;
        let denom = 1.0 + z2 / n;
        let center = (phat + z2 / (2.0 * n)) / denom;
        let half = Z99 * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        ((center - half).max(0.0), (center + half).min(1.0))
    }
}

impl Serialize for DensityEstimate {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let (lo, hi) = self.wilson99();
        let mut st = s.serialize_struct("DensityEstimate", 5)?;
        st.serialize_field("hits", &self.hits)?;
        st.serialize_field("eligible", &self.eligible)?;
        st.serialize_field("proportion", &self.proportion())?;
        st.serialize_field("wilson99_lo", &lo)?;
        st.serialize_field("wilson99_hi", &hi)?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_interval_is_trivial() {
        let d = DensityEstimate::default();
        assert_eq!(d.proportion(), 0.0);
        assert_eq!(d.wilson99(), (0.0, 1.0));
    }

    #[test]
    fn interval_brackets_proportion() {
        let d = DensityEstimate::new(12, 23);
        let (lo, hi) = d.wilson99();
        let p = d.proportion();
        assert!(lo < p && p < hi);
        assert!(lo > 0.0 && hi < 1.0);
        assert_eq!(d.proportion_exact(), Rat::new(Int::from(12), Int::from(23)));
    }

    #[test]
    fn interval_shrinks_with_samples() {
        let small = DensityEstimate::new(5, 10).wilson99();
        let large = DensityEstimate::new(5000, 10000).wilson99();
        assert!(large.1 - large.0 < small.1 - small.0);
    }

    #[test]
    fn extreme_counts_stay_in_unit_interval() {
        for d in [DensityEstimate::new(0, 7), DensityEstimate::new(7, 7)] {
            let (lo, hi) = d.wilson99();
            assert!((0.0..=1.0).contains(&lo));
            assert!((0.0..=1.0).contains(&hi));
            assert!(lo < hi);
        }
    }

    #[test]
    fn merge_adds_counts() {
        let mut a = DensityEstimate::new(3, 10);
        a.merge(DensityEstimate::new(2, 5));
        assert_eq!(a, DensityEstimate::new(5, 15));
        a.record(true);
        a.record(false);
        assert_eq!(a, DensityEstimate::new(6, 17));
    }

    #[test]
    fn serialized_summary_fields() {
        let d = DensityEstimate::new(1, 4);
        let v = serde_json::to_value(d).unwrap();
        assert_eq!(v["hits"], 1);
        assert_eq!(v["eligible"], 4);
        assert_eq!(v["proportion"], 0.25);
        assert!(v["wilson99_lo"].as_f64().unwrap() < 0.25);
        assert!(v["wilson99_hi"].as_f64().unwrap() > 0.25);
    }
}
