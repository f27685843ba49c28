//! Secret summation by polynomial shares.
//!
//! Each of `n` parties hides its vote as the constant term of a random
//! degree `n - 1` polynomial over a prime field and hands party `j` the
//! evaluation at `x = j`. Summing the received shares gives each party one
//! point of the sum polynomial; Lagrange interpolation of those `n` points
//! at `x = 0` yields the total without revealing any single vote.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

/// `2^31 - 1`.
pub const DEFAULT_MODULUS: u64 = 2_147_483_647;

#[derive(Debug, Error, PartialEq)]
pub enum SmcError {
    #[error("modulus {modulus} unusable: {reason}")]
    BadModulus { modulus: u64, reason: String },
    #[error("secret sum needs at least two parties, got {0}")]
    TooFewParties(usize),
    #[error("vote {vote} of party {party} is not below the modulus {modulus}")]
    VoteOutOfRange {
        party: usize,
        vote: u64,
        modulus: u64,
    },
    #[error("duplicate x coordinate {0}")]
    DuplicateX(u64),
    #[error("interpolation needs at least one point")]
    NoPoints,
}

/// Element of the integers modulo a prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u64,
    modulus: u64,
}

impl FieldElement {
    pub fn new(value: u64, modulus: u64) -> Self {
        Self {
            value: value % modulus,
            modulus,
        }
    }

    pub fn zero(modulus: u64) -> Self {
        Self::new(0, modulus)
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn modulus(self) -> u64 {
        self.modulus
    }

    pub fn random<R: Rng + ?Sized>(modulus: u64, rng: &mut R) -> Self {
        Self::new(rng.random_range(0..modulus), modulus)
    }

    pub fn pow(self, mut exp: u64) -> Self {
        let mut base = self;
        let mut acc = Self::new(1, self.modulus);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse by Fermat's little theorem. `None` for zero.
    pub fn inverse(self) -> Option<Self> {
        (self.value != 0).then(|| self.pow(self.modulus - 2))
    }

    fn same_field(self, other: Self) {
        assert_eq!(
            self.modulus, other.modulus,
            "field elements from different fields"
        );
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Serialize for FieldElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(self.value)
    }
}

impl Add for FieldElement {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.same_field(rhs);
        let sum = (self.value as u128 + rhs.value as u128) % self.modulus as u128;
        Self::new(sum as u64, self.modulus)
    }
}

impl Neg for FieldElement {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(self.modulus - self.value, self.modulus)
    }
}

impl Sub for FieldElement {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + -rhs
    }
}

impl Mul for FieldElement {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.same_field(rhs);
        let product = self.value as u128 * rhs.value as u128 % self.modulus as u128;
        Self::new(product as u64, self.modulus)
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    (a as u128 * b as u128 % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin; these bases are exact for every `u64`.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Coefficients `c_0..=c_degree`, lowest first, with `c_0 = secret`.
pub fn gen_polynomial<R: Rng + ?Sized>(
    secret: FieldElement,
    degree: usize,
    rng: &mut R,
) -> Vec<FieldElement> {
    let mut coeffs = Vec::with_capacity(degree + 1);
    coeffs.push(secret);
    coeffs.extend((0..degree).map(|_| FieldElement::random(secret.modulus, rng)));
    coeffs
}

/// Horner evaluation.
pub fn evaluate(coeffs: &[FieldElement], x: FieldElement) -> FieldElement {
    coeffs
        .iter()
        .rev()
        .fold(FieldElement::zero(x.modulus), |acc, &c| acc * x + c)
}

/// Value at `target` of the unique polynomial of degree below `points.len()`
/// through `points`, as `sum_i y_i * prod_{j != i} (target - x_j) / (x_i - x_j)`.
pub fn lagrange_at(
    points: &[(FieldElement, FieldElement)],
    target: FieldElement,
) -> Result<FieldElement, SmcError> {
    if points.is_empty() {
        return Err(SmcError::NoPoints);
    }
    for (i, (xi, _)) in points.iter().enumerate() {
        if points[..i].iter().any(|(xj, _)| xj == xi) {
            return Err(SmcError::DuplicateX(xi.value()));
        }
    }
    let modulus = target.modulus;
    let mut total = FieldElement::zero(modulus);
    for (i, &(xi, yi)) in points.iter().enumerate() {
        let mut num = FieldElement::new(1, modulus);
        let mut den = FieldElement::new(1, modulus);
        for (j, &(xj, _)) in points.iter().enumerate() {
            if i != j {
                num = num * (target - xj);
                den = den * (xi - xj);
            }
        }
        let basis = num * den.inverse().expect("distinct x coordinates");
        total = total + yi * basis;
    }
    Ok(total)
}

/// Everything exchanged during one protocol run.
#[derive(Clone, Debug, Serialize)]
pub struct SecretSumTranscript {
    pub modulus: u64,
    /// Evaluation point of party `i` is `points[i]`.
    pub points: Vec<FieldElement>,
    /// `shares[from][to]` is party `from`'s polynomial evaluated at party
    /// `to`'s point.
    pub shares: Vec<Vec<FieldElement>>,
    /// Point of the sum polynomial known to each party after aggregation.
    pub aggregated: Vec<FieldElement>,
    pub sum: FieldElement,
}

/// Simulates all parties of the secret-sum protocol in process.
pub fn run_secret_sum<R: Rng + ?Sized>(
    votes: &[u64],
    modulus: u64,
    rng: &mut R,
) -> Result<SecretSumTranscript, SmcError> {
    let n = votes.len();
    if n < 2 {
        return Err(SmcError::TooFewParties(n));
    }
    if !is_prime(modulus) {
        return Err(SmcError::BadModulus {
            modulus,
            reason: "not prime".into(),
        });
    }
    if modulus <= n as u64 {
        return Err(SmcError::BadModulus {
            modulus,
            reason: format!("needs more than {n} distinct nonzero evaluation points"),
        });
    }
    if let Some((party, &vote)) = votes.iter().enumerate().find(|(_, &v)| v >= modulus) {
        return Err(SmcError::VoteOutOfRange {
            party,
            vote,
            modulus,
        });
    }

    let points: Vec<FieldElement> = (1..=n as u64)
        .map(|x| FieldElement::new(x, modulus))
        .collect();
    let shares: Vec<Vec<FieldElement>> = votes
        .iter()
        .map(|&vote| {
            let poly = gen_polynomial(FieldElement::new(vote, modulus), n - 1, rng);
            points.iter().map(|&x| evaluate(&poly, x)).collect()
        })
        .collect();
    let aggregated: Vec<FieldElement> = (0..n)
        .map(|to| {
            shares
                .iter()
                .fold(FieldElement::zero(modulus), |acc, from| acc + from[to])
        })
        .collect();
    let sum_points: Vec<_> = points
        .iter()
        .copied()
        .zip(aggregated.iter().copied())
        .collect();
    let sum = lagrange_at(&sum_points, FieldElement::zero(modulus))?;

    Ok(SecretSumTranscript {
        modulus,
        points,
        shares,
        aggregated,
        sum,
    })
}
