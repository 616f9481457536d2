//! Deterministic encodings of randomness: reproduction functions, addition
//! modulo one, the Poisson inverse CDF, the ball-position map, subset
//! unranking, and the uniform-to-Poisson-process coupling.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::{Ball, Cuboid, Point};
use crate::point_process::PointSet;

/// Proposal cap for rejection sampling in balls.
pub const REJECTION_CAP: usize = 1_000_000;

/// Leading bits of a [`UnitValue`] taken verbatim into its binary expansion.
pub const EXACT_BITS: u64 = 53;

/// A number in `[0, 1)` stored as a 64-bit binary fraction `bits / 2^64`.
///
/// The binary expansion used by [`reproduce`] consists of the first
/// [`EXACT_BITS`] bits of the fraction followed by a deterministic tail keyed
/// on all 64 bits. The all-zero and all-one words have constant tails, so
/// `0` and `1⁻` reproduce to themselves.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct UnitValue(u64);

impl UnitValue {
    pub const ZERO: UnitValue = UnitValue(0);
    /// The largest representable value, `1 - 2^-64`.
    pub const ONE_MINUS: UnitValue = UnitValue(u64::MAX);

    pub const fn from_bits(bits: u64) -> Self {
        UnitValue(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    /// Converts a real in `[0, 1]`; `1.0` maps to [`UnitValue::ONE_MINUS`].
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "unit value must be finite");
        if x <= 0.0 {
            UnitValue(0)
        } else if x >= 1.0 {
            UnitValue(u64::MAX)
        } else {
            // exact for every f64 in (0,1) down to 2^-64
            UnitValue((x * 18446744073709551616.0) as u64)
        }
    }

    /// Value truncated to 53 bits, so the result is always `< 1`.
    pub fn to_f64(self) -> f64 {
        (self.0 >> 11) as f64 * (1.0 / 9007199254740992.0)
    }

    /// Bit `p` of the binary expansion (`p = 0` has weight 1/2).
    pub fn expansion_bit(self, p: u128) -> bool {
        if p < EXACT_BITS as u128 {
            return (self.0 >> (63 - p as u32)) & 1 == 1;
        }
        match self.0 {
            0 => false,
            u64::MAX => true,
            key => {
                let block = (p / 64) as u64;
                tail_word(key, block) >> (63 - (p % 64) as u32) & 1 == 1
            }
        }
    }
}

/// Bijective 64-bit mixer (the splitmix64 finalizer); fixes 0.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn tail_word(key: u64, block: u64) -> u64 {
    mix64(key ^ mix64(block.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(0x632b_e59b_d9b4_e019)))
}

impl fmt::Debug for UnitValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UnitValue({self})")
    }
}

impl fmt::Display for UnitValue {
    /// Twenty decimal digits, enough to parse back to the same bits.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut rem = self.0 as u128;
        let mut digits = String::with_capacity(20);
        for _ in 0..20 {
            rem *= 10;
            digits.push(char::from(b'0' + (rem >> 64) as u8));
            rem &= u64::MAX as u128;
        }
        let trimmed = digits.trim_end_matches('0');
        if trimmed.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "0.{trimmed}")
        }
    }
}

impl FromStr for UnitValue {
    type Err = Error;

    /// Parses a decimal in `[0, 1]` to the nearest 64-bit fraction.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("not a decimal in [0,1]: {s:?}"));
        let s = s.trim();
        let (int, frac) = match s.split_once('.') {
            Some((i, f)) => (i, f),
            None => (s, ""),
        };
        if !int.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        if int.is_empty() && frac.is_empty() {
            return Err(bad());
        }
        let int_val: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let frac = frac.trim_end_matches('0');
        if int_val >= 1 {
            if int_val == 1 && frac.is_empty() {
                return Ok(UnitValue::ONE_MINUS);
            }
            return Err(bad());
        }
        if frac.len() > 38 {
            return Err(Error::InvalidInput(format!("at most 38 decimal digits: {s:?}")));
        }
        let num: u128 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let den: u128 = 10u128.pow(frac.len() as u32);
        // long division, one bit at a time, plus one guard bit for rounding
        let mut rem = num;
        let mut bits: u64 = 0;
        for _ in 0..64 {
            rem *= 2;
            bits <<= 1;
            if rem >= den {
                rem -= den;
                bits |= 1;
            }
        }
        if rem * 2 >= den {
            bits = bits.saturating_add(1);
        }
        Ok(UnitValue(bits))
    }
}

impl Serialize for UnitValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for UnitValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Number(f64),
        }
        match Repr::deserialize(d)? {
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
            Repr::Number(x) if (0.0..=1.0).contains(&x) => Ok(UnitValue::from_f64(x)),
            Repr::Number(x) => Err(serde::de::Error::custom(format!("{x} is outside [0,1]"))),
        }
    }
}

/// Diagonal pairing `N x N -> N`.
pub fn pairing(i: u64, k: u64) -> u128 {
    let s = i as u128 + k as u128;
    s * (s + 1) / 2 + k as u128
}

/// The reproduction function `g_i`: the expansion of `u` read at positions
/// `pairing(i, 0), pairing(i, 1), ...`.
pub fn reproduce(u: UnitValue, i: u64) -> UnitValue {
    let plain = u.0 == 0 || u.0 == u64::MAX;
    let mut out = 0u64;
    let mut p = pairing(i, 0);
    let mut cached: Option<(u64, u64)> = None;
    for k in 0..64u64 {
        let bit = if plain || p < EXACT_BITS as u128 {
            u.expansion_bit(p)
        } else {
            let block = (p / 64) as u64;
            let word = match cached {
                Some((b, w)) if b == block => w,
                _ => {
                    let w = tail_word(u.0, block);
                    cached = Some((block, w));
                    w
                }
            };
            word >> (63 - (p % 64) as u32) & 1 == 1
        };
        out = (out << 1) | bit as u64;
        // pairing(i, k + 1) - pairing(i, k)
        p += i as u128 + k as u128 + 2;
    }
    UnitValue(out)
}

/// Iterator over `reproduce(seed, index), reproduce(seed, index + 1), ...`.
#[derive(Clone, Debug)]
pub struct UniformStream {
    pub seed_value: UnitValue,
    pub index: u64,
}

impl UniformStream {
    pub fn new(seed_value: UnitValue) -> Self {
        UniformStream { seed_value, index: 0 }
    }

    pub fn starting_at(seed_value: UnitValue, index: u64) -> Self {
        UniformStream { seed_value, index }
    }
}

impl Iterator for UniformStream {
    type Item = UnitValue;

    fn next(&mut self) -> Option<UnitValue> {
        let v = reproduce(self.seed_value, self.index);
        self.index += 1;
        Some(v)
    }
}

/// Addition modulo one.
pub fn add_mod1(u1: UnitValue, u2: UnitValue) -> UnitValue {
    UnitValue(u1.0.wrapping_add(u2.0))
}

/// Index at which cumulative Poisson sums stop.
pub fn poisson_truncation(mean: f64) -> usize {
    (mean + 12.0 * mean.sqrt() + 30.0).ceil() as usize
}

/// `ln(mean^i e^-mean / i!)`.
pub fn poisson_ln_pmf(mean: f64, i: usize) -> f64 {
    -mean + i as f64 * mean.ln() - statrs::function::gamma::ln_gamma(i as f64 + 1.0)
}

/// Smallest `n` with `P(Poisson(mean) <= n) >= u`.
pub fn poisson_inverse_cdf(mean: f64, u: UnitValue) -> usize {
    assert!(mean > 0.0, "poisson mean must be positive");
    let target = u.to_f64();
    if target <= 0.0 {
        return 0;
    }
    let cap = poisson_truncation(mean);
    let mut cdf = 0.0;
    for n in 0..=cap {
        cdf += poisson_ln_pmf(mean, n).exp();
        if cdf >= target {
            return n;
        }
    }
    cap
}

/// `(|x - c| / R)^d` for `x` in the closed ball `B(c, R)`.
pub fn ball_position_to_uniform(ball: &Ball, x: &Point) -> Result<UnitValue> {
    let r = ball.center.dist(x);
    if r > ball.radius * (1.0 + 1e-12) {
        return Err(Error::OutsideBall { distance: r, radius: ball.radius });
    }
    let f = (r / ball.radius).min(1.0).powi(ball.dim() as i32);
    Ok(UnitValue::from_f64(f))
}

/// `C(n, k)` if it fits in 128 bits.
pub fn binomial(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for t in 0..k {
        // c * (n - t) / (t + 1) stays integral at every step
        let g = gcd(c, (t + 1) as u128);
        let (c1, den) = (c / g, (t + 1) as u128 / g);
        c = c1.checked_mul((n - t) as u128 / den)?;
    }
    Some(c)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `floor(u * c)` for a 64-bit fraction `u`.
fn scale_rank(u: UnitValue, c: u128) -> u128 {
    let u = u.0 as u128;
    let (hi, lo) = (c >> 64, c & u64::MAX as u128);
    u * hi + ((u * lo) >> 64)
}

/// The size-`j` subset of `{1, ..., i}` with lexicographic rank
/// `floor(u * C(i, j))`, in increasing order.
pub fn unrank_subset(i: usize, j: usize, u: UnitValue) -> Result<Vec<usize>> {
    if j > i {
        return Err(Error::BadSize { i, j });
    }
    match binomial(i, j) {
        Some(total) => {
            let mut rank = scale_rank(u, total).min(total - 1);
            let mut out = Vec::with_capacity(j);
            let mut need = j;
            for e in 1..=i {
                if need == 0 {
                    break;
                }
                let with_e = binomial(i - e, need - 1).expect("smaller than total");
                if rank < with_e {
                    out.push(e);
                    need -= 1;
                } else {
                    rank -= with_e;
                }
            }
            Ok(out)
        }
        None => Ok(unrank_subset_fractional(i, j, u.to_f64())),
    }
}

// Same walk with the rank kept as a fraction; used only past 128-bit binomials.
fn unrank_subset_fractional(i: usize, j: usize, mut u: f64) -> Vec<usize> {
    let mut out = Vec::with_capacity(j);
    let mut need = j;
    for e in 1..=i {
        if need == 0 {
            break;
        }
        let rem = (i - e + 1) as f64;
        let p = need as f64 / rem;
        if u < p || rem as usize == need {
            out.push(e);
            u = (u / p).min(1.0 - f64::EPSILON);
            need -= 1;
        } else {
            u = ((u - p) / (1.0 - p)).clamp(0.0, 1.0 - f64::EPSILON);
        }
    }
    out
}

/// Regions on which [`poisson_process_from_uniform`] can sample.
#[derive(Clone, Debug, PartialEq)]
pub enum SamplingRegion {
    Ball(Ball),
    Cuboid(Cuboid),
}

impl SamplingRegion {
    pub fn volume(&self) -> f64 {
        match self {
            SamplingRegion::Ball(b) => b.volume(),
            SamplingRegion::Cuboid(b) => b.volume(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            SamplingRegion::Ball(b) => b.dim(),
            SamplingRegion::Cuboid(b) => b.dim(),
        }
    }

    pub fn bounding_box(&self) -> Cuboid {
        match self {
            SamplingRegion::Ball(b) => b.bounding_box(),
            SamplingRegion::Cuboid(b) => b.clone(),
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        match self {
            SamplingRegion::Ball(b) => b.contains(p),
            SamplingRegion::Cuboid(b) => b.contains(p),
        }
    }

    /// Center of mass.
    pub fn center(&self) -> Point {
        match self {
            SamplingRegion::Ball(b) => b.center.clone(),
            SamplingRegion::Cuboid(b) => b.center(),
        }
    }
}

/// The coupling `Θ_A`: a Poisson process of the given intensity on the region,
/// read off the stream of `u`. Stream entry 0 fixes the count; entries 1, 2, ...
/// fix locations, `d` entries per proposal. Exact duplicates are redrawn.
pub fn poisson_process_from_uniform(region: &SamplingRegion, intensity: f64, u: UnitValue) -> Result<PointSet> {
    assert!(intensity > 0.0, "intensity must be positive");
    let volume = region.volume();
    assert!(volume > 0.0 && volume.is_finite(), "region needs positive finite volume");
    let count = poisson_inverse_cdf(intensity * volume, reproduce(u, 0));
    let bbox = region.bounding_box();
    let d = region.dim();
    let mut stream = UniformStream::starting_at(u, 1);
    let mut points = Vec::with_capacity(count);
    let mut seen: HashSet<Vec<u64>> = HashSet::with_capacity(count);
    let mut rejections = 0usize;
    while points.len() < count {
        let coords: Vec<f64> = (0..d)
            .map(|k| {
                let v = stream.next().expect("stream is infinite").to_f64();
                let (a, b) = (bbox.lo.coords()[k], bbox.hi.coords()[k]);
                (a + v * (b - a)).min(b)
            })
            .collect();
        let p = Point::new(coords);
        if !region.contains(&p) || !seen.insert(p.coords().iter().map(|c| c.to_bits()).collect()) {
            rejections += 1;
            if rejections > REJECTION_CAP {
                return Err(Error::RejectionCap(REJECTION_CAP));
            }
            continue;
        }
        points.push(p);
    }
    Ok(PointSet::new_unchecked(d, points, bbox))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduce_matches_bitwise_reading() {
        for (bits, i) in [(0x0123_4567_89ab_cdefu64, 0u64), (7, 1), (u64::MAX - 3, 12), (1 << 63, 1000), (42, u64::MAX / 2)] {
            let u = UnitValue::from_bits(bits);
            let mut out = 0u64;
            for k in 0..64u64 {
                out = (out << 1) | u.expansion_bit(pairing(i, k)) as u64;
            }
            assert_eq!(reproduce(u, i).bits(), out);
        }
    }

    #[test]
    fn zero_reproduces_to_zero() {
        for i in [0, 1, 7, 1000] {
            assert_eq!(reproduce(UnitValue::ZERO, i), UnitValue::ZERO);
            assert_eq!(reproduce(UnitValue::ONE_MINUS, i), UnitValue::ONE_MINUS);
        }
    }

    #[test]
    fn late_outputs_are_not_degenerate() {
        let u = UnitValue::from_f64(0.3141592653589793);
        let outs: HashSet<u64> = (0..200).map(|i| reproduce(u, i).bits()).collect();
        assert_eq!(outs.len(), 200);
        assert!(reproduce(u, 50).bits() != 0);
    }

    #[test]
    fn first_output_reads_the_diagonal() {
        // g_0 takes positions 0, 2, 5, 9, ...; set exactly those in u
        let mut bits = 0u64;
        for k in 0..9 {
            bits |= 1 << (63 - pairing(0, k) as u32);
        }
        let g = reproduce(UnitValue::from_bits(bits), 0).bits();
        assert_eq!(g >> 55, 0x1ff);
        assert_eq!(reproduce(UnitValue::from_bits(bits), 1).bits() >> 56, 0);
    }

    #[test]
    fn add_mod1_examples() {
        let q = |x: f64| UnitValue::from_f64(x);
        assert_eq!(add_mod1(q(0.75), q(0.5)), q(0.25));
        assert_eq!(add_mod1(q(0.4), UnitValue::ZERO), q(0.4));
        let w = add_mod1(q(0.3), q(0.7)).to_f64();
        assert!(w.min(1.0 - w) < 1e-15);
        let x = q(0.123);
        assert_eq!(add_mod1(x, UnitValue::from_bits(x.bits().wrapping_neg())), UnitValue::ZERO);
    }

    #[test]
    fn inverse_cdf_examples() {
        assert_eq!(poisson_inverse_cdf(1.0, UnitValue::from_f64(0.3)), 0);
        assert_eq!(poisson_inverse_cdf(1.0, UnitValue::from_f64(0.5)), 1);
        assert_eq!(poisson_inverse_cdf(7.5, UnitValue::ZERO), 0);
        assert_eq!(poisson_inverse_cdf(2.0, UnitValue::ONE_MINUS), poisson_truncation(2.0));
    }

    #[test]
    fn inverse_cdf_large_mean_does_not_underflow() {
        let n = poisson_inverse_cdf(2000.0, UnitValue::from_f64(0.5));
        assert!((1990..=2010).contains(&n));
    }

    #[test]
    fn ball_map_examples() {
        let ball = Ball::closed(Point::new(vec![0.0, 0.0]), 2.0);
        assert_eq!(ball_position_to_uniform(&ball, &Point::new(vec![1.0, 0.0])).unwrap(), UnitValue::from_f64(0.25));
        assert_eq!(ball_position_to_uniform(&ball, &Point::new(vec![0.0, 0.0])).unwrap(), UnitValue::ZERO);
        assert_eq!(ball_position_to_uniform(&ball, &Point::new(vec![0.0, 2.0])).unwrap(), UnitValue::ONE_MINUS);
        assert!(matches!(
            ball_position_to_uniform(&ball, &Point::new(vec![0.0, 2.1])),
            Err(Error::OutsideBall { .. })
        ));
    }

    #[test]
    fn unrank_examples() {
        assert_eq!(unrank_subset(3, 2, UnitValue::ZERO).unwrap(), vec![1, 2]);
        assert_eq!(unrank_subset(3, 2, UnitValue::from_f64(0.99)).unwrap(), vec![2, 3]);
        assert_eq!(unrank_subset(5, 0, UnitValue::from_f64(0.7)).unwrap(), Vec::<usize>::new());
        assert!(matches!(unrank_subset(2, 3, UnitValue::ZERO), Err(Error::BadSize { i: 2, j: 3 })));
    }

    #[test]
    fn unrank_walks_every_subset_in_order() {
        let total = binomial(6, 3).unwrap() as u64;
        let mut prev: Option<Vec<usize>> = None;
        for r in 0..total {
            // midpoint of the rank interval
            let u = UnitValue::from_f64((r as f64 + 0.5) / total as f64);
            let s = unrank_subset(6, 3, u).unwrap();
            if let Some(p) = prev {
                assert!(p < s);
            }
            prev = Some(s);
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), Some(10));
        assert_eq!(binomial(84, 42).unwrap(), binomial(83, 41).unwrap() + binomial(83, 42).unwrap());
        assert_eq!(binomial(60, 30), Some(118_264_581_564_861_424));
        assert_eq!(binomial(200, 100), None);
    }

    #[test]
    fn decimal_round_trip() {
        for s in ["0", "0.5", "0.123", "0.25", "0.99999"] {
            let u: UnitValue = s.parse().unwrap();
            let back: UnitValue = u.to_string().parse().unwrap();
            assert_eq!(u, back);
        }
        assert_eq!("0.5".parse::<UnitValue>().unwrap().bits(), 1 << 63);
        assert_eq!("1".parse::<UnitValue>().unwrap(), UnitValue::ONE_MINUS);
        assert!("1.5".parse::<UnitValue>().is_err());
        assert!("-0.1".parse::<UnitValue>().is_err());
    }

    #[test]
    fn process_is_deterministic() {
        let region = SamplingRegion::Cuboid(Cuboid::cube(2, 0.0, 3.0));
        let u = UnitValue::from_f64(0.7182818);
        let a = poisson_process_from_uniform(&region, 2.0, u).unwrap();
        let b = poisson_process_from_uniform(&region, 2.0, u).unwrap();
        assert_eq!(a, b);
        assert!(a.points().iter().all(|p| region.contains(p)));
    }

    #[test]
    fn zero_seed_gives_empty_process() {
        let region = SamplingRegion::Ball(Ball::closed(Point::origin(2), 1.0));
        assert!(poisson_process_from_uniform(&region, 5.0, UnitValue::ZERO).unwrap().is_empty());
    }
}
