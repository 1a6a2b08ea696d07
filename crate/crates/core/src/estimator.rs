//! Bob-side counting: joint and marginal count tables and the plug-in
//! mutual-information estimate computed from them.

use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{JointDistribution2x2, Outcome};
use crate::sampler::OutcomeRecord;

/// Joint and marginal counts of a batch of outcome pairs.
///
/// Only the joint cells are stored; marginals and the total are derived, so
/// the table invariants hold by construction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct CountTable {
    joint: [[u64; 2]; 2],
}

impl CountTable {
    /// Builds a table from joint counts indexed `[a][b]` by [`Outcome::index`].
    pub fn from_joint(joint: [[u64; 2]; 2]) -> Self {
        CountTable { joint }
    }

    pub fn joint(&self, a: Outcome, b: Outcome) -> u64 {
        self.joint[a.index()][b.index()]
    }

    pub fn joint_table(&self) -> [[u64; 2]; 2] {
        self.joint
    }

    pub fn a_count(&self, a: Outcome) -> u64 {
        let row = self.joint[a.index()];
        row[0] + row[1]
    }

    pub fn b_count(&self, b: Outcome) -> u64 {
        self.joint[0][b.index()] + self.joint[1][b.index()]
    }

    pub fn total(&self) -> u64 {
        self.joint.iter().flatten().sum()
    }

    pub fn record(&mut self, a: Outcome, b: Outcome) {
        self.joint[a.index()][b.index()] += 1;
    }

    /// Entrywise sum, for reducing partial tables over record chunks.
    pub fn merge(&self, other: &CountTable) -> CountTable {
        let mut joint = self.joint;
        for (row, other_row) in joint.iter_mut().zip(other.joint) {
            for (cell, o) in row.iter_mut().zip(other_row) {
                *cell += o;
            }
        }
        CountTable { joint }
    }

    fn require_nonempty(&self) -> Result<u64> {
        match self.total() {
            0 => Err(Error::Empty("count table")),
            m => Ok(m),
        }
    }
}

impl Add for CountTable {
    type Output = CountTable;

    fn add(self, rhs: CountTable) -> CountTable {
        self.merge(&rhs)
    }
}

/// Wire form with explicit field names.
#[derive(Serialize, Deserialize)]
struct CountTableRepr {
    plus_plus: u64,
    plus_minus: u64,
    minus_plus: u64,
    minus_minus: u64,
    a_plus: u64,
    a_minus: u64,
    b_plus: u64,
    b_minus: u64,
    total: u64,
}

impl Serialize for CountTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use Outcome::{Minus, Plus};
        CountTableRepr {
            plus_plus: self.joint(Plus, Plus),
            plus_minus: self.joint(Plus, Minus),
            minus_plus: self.joint(Minus, Plus),
            minus_minus: self.joint(Minus, Minus),
            a_plus: self.a_count(Plus),
            a_minus: self.a_count(Minus),
            b_plus: self.b_count(Plus),
            b_minus: self.b_count(Minus),
            total: self.total(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CountTable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use Outcome::{Minus, Plus};
        let r = CountTableRepr::deserialize(d)?;
        let table = CountTable::from_joint([
            [r.plus_plus, r.plus_minus],
            [r.minus_plus, r.minus_minus],
        ]);
        let consistent = table.a_count(Plus) == r.a_plus
            && table.a_count(Minus) == r.a_minus
            && table.b_count(Plus) == r.b_plus
            && table.b_count(Minus) == r.b_minus
            && table.total() == r.total;
        if !consistent {
            return Err(serde::de::Error::custom(
                "marginal counts or total disagree with the joint counts",
            ));
        }
        Ok(table)
    }
}

pub fn tally(record: &OutcomeRecord) -> Result<CountTable> {
    if record.is_empty() {
        return Err(Error::Empty("outcome record"));
    }
    Ok(tally_pairs(&record.pairs))
}

pub(crate) fn tally_pairs(pairs: &[(Outcome, Outcome)]) -> CountTable {
    let mut table = CountTable::default();
    for &(a, b) in pairs {
        table.record(a, b);
    }
    table
}

/// Estimated marginals `(p̃(a=+1), p̃(a=−1), p̃(b=+1), p̃(b=−1))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Marginals {
    pub a_plus: f64,
    pub a_minus: f64,
    pub b_plus: f64,
    pub b_minus: f64,
}

pub fn estimate_marginals(counts: &CountTable) -> Result<Marginals> {
    use Outcome::{Minus, Plus};
    let m = counts.require_nonempty()? as f64;
    Ok(Marginals {
        a_plus: counts.a_count(Plus) as f64 / m,
        a_minus: counts.a_count(Minus) as f64 / m,
        b_plus: counts.b_count(Plus) as f64 / m,
        b_minus: counts.b_count(Minus) as f64 / m,
    })
}

pub fn estimate_joint(counts: &CountTable) -> Result<JointDistribution2x2> {
    let m = counts.require_nonempty()? as f64;
    let j = counts.joint;
    JointDistribution2x2::new([
        [j[0][0] as f64 / m, j[0][1] as f64 / m],
        [j[1][0] as f64 / m, j[1][1] as f64 / m],
    ])
}

/// Plug-in mutual information (bits) of the empirical distribution.
///
/// Each cell contributes `(m_ab/M)·log₂(m_ab·M / (m_a·m_b))`. The ratio is
/// formed in integer arithmetic, so a factorizing table yields exactly 0.
/// Empty cells contribute 0.
pub fn estimate_mutual_information(counts: &CountTable) -> Result<f64> {
    let m = counts.require_nonempty()?;
    let mut info = 0.0;
    for a in Outcome::BOTH {
        for b in Outcome::BOTH {
            let cell = counts.joint(a, b);
            if cell == 0 {
                continue;
            }
            let num = cell as u128 * m as u128;
            let den = counts.a_count(a) as u128 * counts.b_count(b) as u128;
            if num != den {
                info += cell as f64 / m as f64 * (num as f64 / den as f64).log2();
            }
        }
    }
    // The exact value lies in [0, 1]; clamp rounding excursions.
    Ok(info.clamp(0.0, 1.0))
}
