//! Closed-form singlet correlations, two-outcome mutual information, and
//! the spherical geometry of measurement settings.
//!
//! Every function here is pure. Logarithms are base 2, so information is
//! reported in bits.

use std::fmt;
use std::ops::Neg;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed on `|cos γ| ≤ 1` before a value is rejected.
pub const COS_TOLERANCE: f64 = 1e-12;

/// Tolerance on the total mass of a [`JointDistribution2x2`].
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-12;

/// Validates a cosine argument and clamps rounding overshoot into `[-1, 1]`.
pub fn checked_cos(cos_gamma: f64) -> Result<f64> {
    if !cos_gamma.is_finite() || cos_gamma.abs() > 1.0 + COS_TOLERANCE {
        return Err(Error::Domain {
            name: "cos_gamma",
            value: cos_gamma,
            domain: "[-1, 1]",
        });
    }
    Ok(cos_gamma.clamp(-1.0, 1.0))
}

/// A measurement setting: a unit vector in three dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct Direction {
    x: f64,
    y: f64,
    z: f64,
}

impl Direction {
    pub const X: Direction = Direction { x: 1.0, y: 0.0, z: 0.0 };
    pub const Y: Direction = Direction { x: 0.0, y: 1.0, z: 0.0 };
    pub const Z: Direction = Direction { x: 0.0, y: 0.0, z: 1.0 };

    /// Normalizes `(x, y, z)` onto the unit sphere.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::param(
                "direction",
                format!("({x}, {y}, {z}) cannot be normalized"),
            ));
        }
        Ok(Direction {
            x: x / norm,
            y: y / norm,
            z: z / norm,
        })
    }

    /// Polar angle `theta` from +z and azimuth `phi` from +x.
    pub fn from_polar(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Direction {
            x: st * cp,
            y: st * sp,
            z: ct,
        }
    }

    /// Inverse of [`Direction::from_polar`]: `theta ∈ [0, π]`, `phi ∈ [0, 2π)`.
    pub fn to_polar(&self) -> (f64, f64) {
        let theta = self.z.clamp(-1.0, 1.0).acos();
        let mut phi = self.y.atan2(self.x);
        if phi < 0.0 {
            phi += std::f64::consts::TAU;
        }
        (theta, phi)
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Raw dot product, not clamped.
    pub fn dot(&self, other: &Direction) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(&self, other: &Direction) -> [f64; 3] {
        [
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        ]
    }

    /// Angle to `other` in radians, in `[0, π]`.
    pub fn angle_to(&self, other: &Direction) -> f64 {
        // atan2 keeps resolution for nearly (anti)parallel vectors where acos
        // of the dot product loses half the digits.
        let c = self.cross(other);
        let s = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
        s.atan2(self.dot(other))
    }

    /// Angle to the nearer of `other` and `-other`, in `[0, π/2]`.
    pub fn axis_angle_to(&self, other: &Direction) -> f64 {
        let a = self.angle_to(other);
        a.min(std::f64::consts::PI - a)
    }

    /// Two unit vectors completing `self` to a right-handed orthonormal basis.
    pub fn orthonormal_basis(&self) -> (Direction, Direction) {
        // Seed with the coordinate axis least aligned with self.
        let (ax, ay, az) = (self.x.abs(), self.y.abs(), self.z.abs());
        let seed = if ax <= ay && ax <= az {
            Direction::X
        } else if ay <= az {
            Direction::Y
        } else {
            Direction::Z
        };
        let u = self.cross(&seed);
        let e1 = Direction::new(u[0], u[1], u[2]).expect("seed axis is not parallel");
        let v = self.cross(&e1);
        let e2 = Direction::new(v[0], v[1], v[2]).expect("basis vectors are orthogonal");
        (e1, e2)
    }

    /// Point at angular distance `radius` from `self`, at azimuth `azimuth`
    /// measured in the basis from [`Direction::orthonormal_basis`].
    pub fn offset(&self, radius: f64, azimuth: f64) -> Direction {
        let (e1, e2) = self.orthonormal_basis();
        let (sr, cr) = radius.sin_cos();
        let (sa, ca) = azimuth.sin_cos();
        Direction::new(
            cr * self.x + sr * (ca * e1.x + sa * e2.x),
            cr * self.y + sr * (ca * e1.y + sa * e2.y),
            cr * self.z + sr * (ca * e1.z + sa * e2.z),
        )
        .expect("rotation preserves the norm")
    }

    /// Rotates `self` by the minimal rotation carrying +z onto `pole`.
    pub fn rotate_z_to(&self, pole: &Direction) -> Direction {
        // Rodrigues rotation with axis z × pole.
        let c = pole.z;
        if c > 1.0 - 1e-15 {
            return *self;
        }
        if c < -1.0 + 1e-15 {
            // Half turn about x.
            return Direction {
                x: self.x,
                y: -self.y,
                z: -self.z,
            };
        }
        let k = Direction::Z.cross(pole);
        let s = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
        let k = [k[0] / s, k[1] / s, k[2] / s];
        let v = self.to_array();
        let kv = k[0] * v[0] + k[1] * v[1] + k[2] * v[2];
        let kxv = [
            k[1] * v[2] - k[2] * v[1],
            k[2] * v[0] - k[0] * v[2],
            k[0] * v[1] - k[1] * v[0],
        ];
        let r: Vec<f64> = (0..3)
            .map(|i| v[i] * c + kxv[i] * s + k[i] * kv * (1.0 - c))
            .collect();
        Direction::new(r[0], r[1], r[2]).expect("rotation preserves the norm")
    }
}

impl Neg for Direction {
    type Output = Direction;

    fn neg(self) -> Direction {
        Direction {
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }
}

impl TryFrom<[f64; 3]> for Direction {
    type Error = Error;

    /// Components already of unit norm (within 1e-12) are kept bit-for-bit.
    fn try_from(v: [f64; 3]) -> Result<Self> {
        let norm2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        if (norm2 - 1.0).abs() < 1e-12 {
            return Ok(Direction { x: v[0], y: v[1], z: v[2] });
        }
        Direction::new(v[0], v[1], v[2])
    }
}

impl From<Direction> for [f64; 3] {
    fn from(d: Direction) -> Self {
        d.to_array()
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.6}, {:.6}, {:.6})", self.x, self.y, self.z)
    }
}

/// Cosine of the angle between two settings, clamped to `[-1, 1]`.
pub fn cos_angle(u: &Direction, v: &Direction) -> f64 {
    u.dot(v).clamp(-1.0, 1.0)
}

/// A single Stern-Gerlach result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn value(self) -> i8 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    /// Table index: `Plus -> 0`, `Minus -> 1`.
    pub fn index(self) -> usize {
        match self {
            Outcome::Plus => 0,
            Outcome::Minus => 1,
        }
    }

    pub fn from_value(v: i64) -> Result<Self> {
        match v {
            1 => Ok(Outcome::Plus),
            -1 => Ok(Outcome::Minus),
            _ => Err(Error::param("outcome", format!("{v} is not in {{-1, +1}}"))),
        }
    }
}

impl TryFrom<i8> for Outcome {
    type Error = Error;

    fn try_from(v: i8) -> Result<Self> {
        Outcome::from_value(v as i64)
    }
}

impl From<Outcome> for i8 {
    fn from(o: Outcome) -> i8 {
        o.value()
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.value())
    }
}

/// Probabilities of the four joint outcomes, indexed `[a][b]` by
/// [`Outcome::index`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JointDistribution2x2 {
    p: [[f64; 2]; 2],
}

impl JointDistribution2x2 {
    pub fn new(p: [[f64; 2]; 2]) -> Result<Self> {
        let mut total = 0.0;
        for &q in p.iter().flatten() {
            if !q.is_finite() || q < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "entry {q} is not a nonnegative number"
                )));
            }
            total += q;
        }
        if (total - 1.0).abs() > DISTRIBUTION_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {total}, not 1"
            )));
        }
        Ok(JointDistribution2x2 { p })
    }

    pub fn get(&self, a: Outcome, b: Outcome) -> f64 {
        self.p[a.index()][b.index()]
    }

    pub fn table(&self) -> [[f64; 2]; 2] {
        self.p
    }

    pub fn marginal_a(&self, a: Outcome) -> f64 {
        let row = self.p[a.index()];
        row[0] + row[1]
    }

    pub fn marginal_b(&self, b: Outcome) -> f64 {
        self.p[0][b.index()] + self.p[1][b.index()]
    }

    /// `Σ a·b·p(a, b)`.
    pub fn correlation(&self) -> f64 {
        self.p[0][0] - self.p[0][1] - self.p[1][0] + self.p[1][1]
    }
}

/// `p(a, b | x, y) = (1 − a·b·cos γ) / 4` for the singlet.
pub fn joint_outcome_probability(a: Outcome, b: Outcome, cos_gamma: f64) -> Result<f64> {
    let c = checked_cos(cos_gamma)?;
    Ok(singlet_probability(a, b, c))
}

pub(crate) fn singlet_probability(a: Outcome, b: Outcome, c: f64) -> f64 {
    let ab = (a.value() * b.value()) as f64;
    (1.0 - ab * c) / 4.0
}

pub fn singlet_joint_distribution(cos_gamma: f64) -> Result<JointDistribution2x2> {
    let c = checked_cos(cos_gamma)?;
    let mut p = [[0.0; 2]; 2];
    for a in Outcome::BOTH {
        for b in Outcome::BOTH {
            p[a.index()][b.index()] = singlet_probability(a, b, c);
        }
    }
    Ok(JointDistribution2x2 { p })
}

/// `Σ p(a,b) log₂[p(a,b) / (p(a) p(b))]` with `0·log 0 = 0`.
pub fn mutual_information_from_joint(joint: &JointDistribution2x2) -> Result<f64> {
    // Re-validate: the table may have been produced by deserialization.
    let joint = JointDistribution2x2::new(joint.p)?;
    let mut info = 0.0;
    for a in Outcome::BOTH {
        for b in Outcome::BOTH {
            let p = joint.get(a, b);
            if p > 0.0 {
                info += p * (p / (joint.marginal_a(a) * joint.marginal_b(b))).log2();
            }
        }
    }
    Ok(info.clamp(0.0, 1.0))
}

/// Closed-form mutual information of singlet outcomes at relative cosine `c`:
/// `½ log₂(1 − c²) − (c/2) log₂[(1 − c)/(1 + c)]`, equal to 1 at `c = ±1`.
pub fn analytic_mutual_information(cos_gamma: f64) -> Result<f64> {
    let c = checked_cos(cos_gamma)?;
    if c.abs() == 1.0 {
        return Ok(1.0);
    }
    let log_minus = (-c).ln_1p() / std::f64::consts::LN_2;
    let log_plus = c.ln_1p() / std::f64::consts::LN_2;
    Ok(0.5 * (log_minus + log_plus) - 0.5 * c * (log_minus - log_plus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    use Outcome::{Minus, Plus};

    #[test]
    fn joint_probability_examples() {
        assert_eq!(joint_outcome_probability(Plus, Plus, 1.0).unwrap(), 0.0);
        assert_eq!(joint_outcome_probability(Plus, Minus, 1.0).unwrap(), 0.5);
        for a in Outcome::BOTH {
            for b in Outcome::BOTH {
                assert_eq!(joint_outcome_probability(a, b, 0.0).unwrap(), 0.25);
            }
        }
        assert!(joint_outcome_probability(Plus, Plus, 1.0 + 1e-9).is_err());
        assert!(joint_outcome_probability(Plus, Plus, f64::NAN).is_err());
        // Rounding overshoot inside the tolerance is clamped.
        assert_eq!(joint_outcome_probability(Plus, Plus, 1.0 + 1e-13).unwrap(), 0.0);
    }

    #[test]
    fn singlet_table_at_half() {
        let j = singlet_joint_distribution(0.5).unwrap();
        assert_eq!(j.table(), [[0.125, 0.375], [0.375, 0.125]]);
        let j = singlet_joint_distribution(1.0).unwrap();
        assert_eq!(j.table(), [[0.0, 0.5], [0.5, 0.0]]);
    }

    #[test]
    fn mutual_information_of_reference_tables() {
        let uniform = JointDistribution2x2::new([[0.25; 2]; 2]).unwrap();
        assert_eq!(mutual_information_from_joint(&uniform).unwrap(), 0.0);
        let anti = JointDistribution2x2::new([[0.0, 0.5], [0.5, 0.0]]).unwrap();
        assert_eq!(mutual_information_from_joint(&anti).unwrap(), 1.0);
        let half = singlet_joint_distribution(0.5).unwrap();
        let i = mutual_information_from_joint(&half).unwrap();
        assert!((i - 0.1887).abs() < 1e-4, "{i}");
        assert!((i - analytic_mutual_information(0.5).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn invalid_distributions_rejected() {
        assert!(JointDistribution2x2::new([[0.5, 0.5], [0.5, 0.0]]).is_err());
        assert!(JointDistribution2x2::new([[-0.1, 0.6], [0.25, 0.25]]).is_err());
        assert!(JointDistribution2x2::new([[f64::NAN, 0.5], [0.25, 0.25]]).is_err());
    }

    #[test]
    fn analytic_endpoints() {
        assert_eq!(analytic_mutual_information(0.0).unwrap(), 0.0);
        assert_eq!(analytic_mutual_information(1.0).unwrap(), 1.0);
        assert_eq!(analytic_mutual_information(-1.0).unwrap(), 1.0);
        assert!(analytic_mutual_information(-1.5).is_err());
    }

    #[test]
    fn polar_examples() {
        let d = Direction::from_polar(0.0, 1.234);
        assert!((d.z() - 1.0).abs() < 1e-15 && d.x().abs() < 1e-15 && d.y().abs() < 1e-15);
        let d = Direction::from_polar(FRAC_PI_2, 0.0);
        assert!((d.x() - 1.0).abs() < 1e-15 && d.y().abs() < 1e-15 && d.z().abs() < 1e-15);
        let alice = Direction::from_polar(1.5, 2.1);
        let expected = [1.5f64.sin() * 2.1f64.cos(), 1.5f64.sin() * 2.1f64.sin(), 1.5f64.cos()];
        for (got, want) in alice.to_array().iter().zip(expected) {
            assert!((got - want).abs() < 1e-15);
        }
        assert!((alice.dot(&alice) - 1.0).abs() < 1e-12);
        let (t, p) = alice.to_polar();
        assert!((t - 1.5).abs() < 1e-12 && (p - 2.1).abs() < 1e-12);
    }

    #[test]
    fn cos_angle_examples() {
        let u = Direction::new(0.3, -0.4, 0.5).unwrap();
        assert!((cos_angle(&u, &u) - 1.0).abs() < 1e-15);
        assert!((cos_angle(&u, &-u) + 1.0).abs() < 1e-15);
        assert!(cos_angle(&u, &u) <= 1.0);
    }

    #[test]
    fn cos_angle_matches_polar_expansion() {
        let (tx, px) = (1.5, 2.1);
        let x = Direction::from_polar(tx, px);
        for i in 0..40 {
            for j in 0..40 {
                let ty = PI * i as f64 / 39.0;
                let py = 2.0 * PI * j as f64 / 40.0;
                let y = Direction::from_polar(ty, py);
                let expansion = tx.sin() * px.cos() * ty.sin() * py.cos()
                    + tx.sin() * px.sin() * ty.sin() * py.sin()
                    + tx.cos() * ty.cos();
                assert!((cos_angle(&x, &y) - expansion).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn basis_and_offsets() {
        for d in [Direction::Z, -Direction::Z, Direction::from_polar(1.5, 2.1)] {
            let (e1, e2) = d.orthonormal_basis();
            assert!(d.dot(&e1).abs() < 1e-14 && d.dot(&e2).abs() < 1e-14 && e1.dot(&e2).abs() < 1e-14);
            let o = d.offset(0.3, 1.0);
            assert!((d.angle_to(&o) - 0.3).abs() < 1e-12);
            let r = Direction::Z.rotate_z_to(&d);
            assert!(r.angle_to(&d) < 1e-12);
        }
    }

    #[test]
    fn zero_vector_rejected() {
        assert!(Direction::new(0.0, 0.0, 0.0).is_err());
        assert!(Direction::new(f64::INFINITY, 0.0, 0.0).is_err());
    }

    #[test]
    fn outcome_serde() {
        assert_eq!(serde_json::to_string(&Minus).unwrap(), "-1");
        assert_eq!(serde_json::from_str::<Outcome>("1").unwrap(), Plus);
        assert!(serde_json::from_str::<Outcome>("0").is_err());
        let d: Direction = serde_json::from_str("[0.0, 0.0, 2.0]").unwrap();
        assert_eq!(d, Direction::Z);
    }
}
