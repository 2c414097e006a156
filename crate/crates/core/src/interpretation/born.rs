//! Frequency filters on the N-replica product state.
//!
//! For a normalized state with per-replica detection probability `p` at site
//! `k`, the projector that keeps only basis strings whose fraction of replicas
//! at `k` lies in `[f - eps, f + eps]` removes exactly the binomial mass outside
//! that window. The N-replica state itself is never built here; see
//! [`super::tensor`] for the brute-force version.

use std::str::FromStr;

use num_rational::Ratio;

use crate::error::{structural, Result};

pub type Rational = Ratio<i128>;

/// Best rational approximation of a float, with a 64-bit numerator and denominator.
pub fn rational_from_f64(x: f64) -> Option<Rational> {
    Ratio::<i64>::approximate_float(x).map(|r| Ratio::new(*r.numer() as i128, *r.denom() as i128))
}

/// Closed window `[f - eps, f + eps]` inside `[0, 1]`, held as exact rationals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FrequencyWindow {
    center: Rational,
    half_width: Rational,
}

impl FrequencyWindow {
    pub fn new(center: Rational, half_width: Rational) -> Result<Self> {
        let zero = Rational::from_integer(0);
        let one = Rational::from_integer(1);
        if !(half_width > zero && half_width <= Rational::new(1, 2)) {
            return Err(structural(format!("epsilon must lie in (0, 1/2], got {half_width}")));
        }
        if center - half_width < zero || center + half_width > one {
            return Err(structural(format!(
                "window [{center} - {half_width}, {center} + {half_width}] leaves [0, 1]"
            )));
        }
        Ok(FrequencyWindow { center, half_width })
    }

    /// Converts through the best rational approximation of each float.
    pub fn from_f64(center: f64, half_width: f64) -> Result<Self> {
        let conv =
            |x: f64| rational_from_f64(x).ok_or_else(|| structural(format!("{x} has no rational approximation")));
        FrequencyWindow::new(conv(center)?, conv(half_width)?)
    }

    pub fn center(&self) -> Rational {
        self.center
    }

    pub fn half_width(&self) -> Rational {
        self.half_width
    }

    pub fn lower(&self) -> Rational {
        self.center - self.half_width
    }

    pub fn upper(&self) -> Rational {
        self.center + self.half_width
    }

    /// Whether `n / total` lies in the window, compared exactly.
    pub fn contains_count(&self, n: u64, total: u64) -> bool {
        let x = Ratio::new(n as i128, total as i128);
        x >= self.lower() && x <= self.upper()
    }

    pub fn contains(&self, p: f64) -> bool {
        p >= to_f64(self.lower()) && p <= to_f64(self.upper())
    }

    /// Inclusive range of replica counts `n` with `n / total` inside the window.
    pub fn count_range(&self, total: u64) -> Option<(u64, u64)> {
        let nt = total as i128;
        let lo = self.lower() * Ratio::from_integer(nt);
        let hi = self.upper() * Ratio::from_integer(nt);
        let lo = lo.ceil().to_integer().max(0) as u64;
        let hi = (hi.floor().to_integer().min(nt)) as u64;
        (lo <= hi).then_some((lo, hi))
    }
}

fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Parses `"3/10"`, `"0.3"` or `"1"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || structural(format!("not a rational number: {s:?}"));
    if s.contains('/') {
        return Rational::from_str(s).map_err(|_| bad());
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if (int.is_empty() && frac.is_empty())
        || !int.bytes().all(|b| b.is_ascii_digit())
        || !frac.bytes().all(|b| b.is_ascii_digit())
        || frac.len() > 15
    {
        return Err(bad());
    }
    let den = 10i128.pow(frac.len() as u32);
    let digits = format!("{int}{frac}");
    let num: i128 = if digits.is_empty() {
        0
    } else {
        digits.parse().map_err(|_| bad())?
    };
    let r = Rational::new(num, den);
    Ok(if neg { -r } else { r })
}

/// Binomial law of the number of replicas found at the site.
#[derive(Debug, Clone)]
pub struct ReplicaDistribution {
    replicas: u64,
    p: f64,
    pmf: Vec<f64>,
    // below[i] = sum of pmf[..i], above[i] = sum of pmf[i..]; both summed from the tail inward
    below: Vec<f64>,
    above: Vec<f64>,
}

impl ReplicaDistribution {
    pub fn new(p: f64, replicas: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(structural(format!("probability {p} outside [0, 1]")));
        }
        if replicas == 0 {
            return Err(structural("need at least one replica"));
        }
        let n = replicas as usize;
        let pmf: Vec<f64> = if p == 0.0 || p == 1.0 {
            let hit = if p == 0.0 { 0 } else { n };
            (0..=n).map(|i| if i == hit { 1.0 } else { 0.0 }).collect()
        } else {
            log_space_pmf(p, n)
        };
        let mut below = vec![0.0; n + 2];
        for i in 0..=n {
            below[i + 1] = below[i] + pmf[i];
        }
        let mut above = vec![0.0; n + 2];
        for i in (0..=n).rev() {
            above[i] = above[i + 1] + pmf[i];
        }
        Ok(ReplicaDistribution {
            replicas,
            p,
            pmf,
            below,
            above,
        })
    }

    pub fn replicas(&self) -> u64 {
        self.replicas
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// Mass of counts outside the window, i.e. `||P Psi_N - Psi_N||^2`.
    pub fn distance_sq(&self, w: &FrequencyWindow) -> f64 {
        match w.count_range(self.replicas) {
            None => 1.0,
            Some((lo, hi)) => {
                let out = self.below[lo as usize] + self.above[hi as usize + 1];
                out.min(1.0)
            }
        }
    }
}

/// Binomial pmf built from log ratios of neighbouring terms, walking outward from
/// the mode, then normalized. Avoids evaluating `ln C(N, n)` directly, whose
/// absolute error grows with `N`.
fn log_space_pmf(p: f64, n: usize) -> Vec<f64> {
    let log_odds = p.ln() - (-p).ln_1p();
    let mode = (((n + 1) as f64 * p).floor() as usize).min(n);
    let mut log_rel = vec![0.0; n + 1];
    for i in mode + 1..=n {
        log_rel[i] = log_rel[i - 1] + ((n - i + 1) as f64 / i as f64).ln() + log_odds;
    }
    for i in (0..mode).rev() {
        log_rel[i] = log_rel[i + 1] + ((i + 1) as f64 / (n - i) as f64).ln() - log_odds;
    }
    let mut pmf: Vec<f64> = log_rel.iter().map(|l| l.exp()).collect();
    let total: f64 = pmf.iter().sum();
    pmf.iter_mut().for_each(|x| *x /= total);
    pmf
}

/// `1 - sum_{n/N in window} C(N,n) p^n (1-p)^(N-n)`.
pub fn born_distance_sq(p: f64, replicas: u64, w: &FrequencyWindow) -> Result<f64> {
    Ok(ReplicaDistribution::new(p, replicas)?.distance_sq(w))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// Window contains `p`: the distance is at most the bound.
    Upper,
    /// Window excludes `p`: the distance is at least the bound.
    Lower,
}

impl BoundKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundKind::Upper => "upper",
            BoundKind::Lower => "lower",
        }
    }
}

/// Hoeffding envelope for [`born_distance_sq`].
///
/// With `p` inside the window at margin `d`, the distance is `<= 2 exp(-2 N d^2)`.
/// With `p` at distance `d` from the window, it is `>= 1 - 2 exp(-2 N d^2)`.
pub fn hoeffding_bound(p: f64, replicas: u64, w: &FrequencyWindow) -> (BoundKind, f64) {
    let (lo, hi) = (to_f64(w.lower()), to_f64(w.upper()));
    let tail = |d: f64| 2.0 * (-2.0 * replicas as f64 * d * d).exp();
    if p >= lo && p <= hi {
        (BoundKind::Upper, tail((p - lo).min(hi - p)).min(1.0))
    } else {
        let d = if p < lo { lo - p } else { p - hi };
        (BoundKind::Lower, (1.0 - tail(d)).max(0.0))
    }
}

/// Center `f = j / N` that minimizes the distance for a fixed half-width.
///
/// Scans every admissible grid center; ties resolve to the smallest `f`.
pub fn argmin_frequency(p: f64, replicas: u64, half_width: Rational) -> Result<(Rational, f64)> {
    let dist = ReplicaDistribution::new(p, replicas)?;
    let n = replicas as i128;
    let mut best: Option<(Rational, f64)> = None;
    for j in 0..=n {
        let center = Rational::new(j, n);
        let Ok(w) = FrequencyWindow::new(center, half_width) else {
            continue;
        };
        let d = dist.distance_sq(&w);
        if best.is_none() || best.is_some_and(|(_, bd)| d < bd) {
            best = Some((center, d));
        }
    }
    best.ok_or_else(|| structural("no admissible window center"))
}
