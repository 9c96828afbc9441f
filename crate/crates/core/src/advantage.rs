//! Comparative-advantage criterion and the reduced search spaces it induces.
//!
//! A BS has a comparative advantage in serving user `i1` over user `i2` when
//! `g[i1][j1] / g[i1][j2] > g[i2][j1] / g[i2][j2]`. At the optimum of the
//! independent-reception target, such a pair cannot be cross-served: either
//! `f[i1][j2] = 0` or `f[i2][j1] = 0`. With two BSs this orders the users and
//! leaves a single split user that both BSs may serve.
//!
//! Powers never enter: they scale numerator and denominator ratios alike.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_permutation, ChannelGains};
use crate::scalar::Scalar;

/// `true` iff `g[i1][j1] * g[i2][j2] > g[i2][j1] * g[i1][j2]`.
pub fn pairwise_criterion<T: Scalar>(
    gains: &ChannelGains<T>,
    i1: usize,
    i2: usize,
    j1: usize,
    j2: usize,
) -> Result<bool> {
    if [i1, i2].iter().any(|&i| i >= gains.n_users()) || [j1, j2].iter().any(|&j| j >= gains.n_bs())
    {
        return Err(Error::DimensionMismatch(format!(
            "indices ({i1}, {i2}, {j1}, {j2}) out of range"
        )));
    }
    let quad = [
        gains.get(i1, j1),
        gains.get(i2, j2),
        gains.get(i2, j1),
        gains.get(i1, j2),
    ];
    if let Some(v) = quad.iter().find(|v| **v <= T::zero()) {
        return Err(Error::InvalidGains(format!(
            "criterion needs positive gains, got {v}"
        )));
    }
    Ok(quad[0] * quad[1] > quad[2] * quad[3])
}

/// Users by descending `g[i][0] / g[i][1]`; exact ties keep index order.
pub fn order_users_by_advantage<T: Scalar>(gains: &ChannelGains<T>) -> Result<Vec<usize>> {
    if gains.n_bs() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "ordering needs 2 BSs, got {}",
            gains.n_bs()
        )));
    }
    gains.require_positive()?;
    let mut order: Vec<usize> = (0..gains.n_users()).collect();
    // Compare ratios by cross multiplication; stable sort keeps ties in index order.
    order.sort_by(|&a, &b| {
        let lhs = gains.get(b, 0) * gains.get(a, 1);
        let rhs = gains.get(a, 0) * gains.get(b, 1);
        lhs.partial_cmp(&rhs).expect("finite gains")
    });
    Ok(order)
}

/// Coordinate of the two-user unit square `(f11, f12)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coordinate {
    F11,
    F12,
}

/// One side of the unit square: `pinned` is held at 0 or 1, the other coordinate is free.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub pinned: Coordinate,
    pub at_one: bool,
}

impl Edge {
    pub fn pinned_value<T: Scalar>(&self) -> T {
        if self.at_one {
            T::one()
        } else {
            T::zero()
        }
    }

    /// Point `(f11, f12)` with the free coordinate set to `t`.
    pub fn point<T: Scalar>(&self, t: T) -> (T, T) {
        match self.pinned {
            Coordinate::F11 => (self.pinned_value(), t),
            Coordinate::F12 => (t, self.pinned_value()),
        }
    }

    pub fn contains<T: Scalar>(&self, f11: T, f12: T) -> bool {
        let v = match self.pinned {
            Coordinate::F11 => f11,
            Coordinate::F12 => f12,
        };
        v == self.pinned_value()
    }
}

impl std::fmt::Display for Edge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let c = match self.pinned {
            Coordinate::F11 => "f11",
            Coordinate::F12 => "f12",
        };
        write!(f, "{c}={}", u8::from(self.at_one))
    }
}

/// Which BS holds the comparative advantage for user 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeBranch {
    /// `g11/g12 > g21/g22`: BS 1 leans to user 1; edges `f11 = 1` and `f12 = 0`.
    BsOneServesUserOne,
    /// Otherwise (ties included): edges `f11 = 0` and `f12 = 1`.
    BsTwoServesUserOne,
}

/// The two unit-square edges searched by the reduced method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSubspace {
    pub branch: EdgeBranch,
    pub edges: [Edge; 2],
}

impl EdgeSubspace {
    pub fn for_branch(branch: EdgeBranch) -> Self {
        let edges = match branch {
            EdgeBranch::BsOneServesUserOne => [
                Edge {
                    pinned: Coordinate::F11,
                    at_one: true,
                },
                Edge {
                    pinned: Coordinate::F12,
                    at_one: false,
                },
            ],
            EdgeBranch::BsTwoServesUserOne => [
                Edge {
                    pinned: Coordinate::F11,
                    at_one: false,
                },
                Edge {
                    pinned: Coordinate::F12,
                    at_one: true,
                },
            ],
        };
        Self { branch, edges }
    }

    /// The corner shared by both edges.
    pub fn corner<T: Scalar>(&self) -> (T, T) {
        (self.edges[0].pinned_value(), self.edges[1].pinned_value())
    }

    pub fn contains<T: Scalar>(&self, f11: T, f12: T) -> bool {
        self.edges.iter().any(|e| e.contains(f11, f12))
    }
}

pub fn edge_subspace_two_user<T: Scalar>(gains: &ChannelGains<T>) -> Result<EdgeSubspace> {
    gains.require_shape(2, 2)?;
    let branch = if pairwise_criterion(gains, 0, 1, 0, 1)? {
        EdgeBranch::BsOneServesUserOne
    } else {
        EdgeBranch::BsTwoServesUserOne
    };
    Ok(EdgeSubspace::for_branch(branch))
}

/// Normalized comparative advantage in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct AdvantageScore<T>(pub T);

/// `alpha = |A - B| / (A + B)` with `A = g11 g22` and `B = g12 g21`
/// (products of squared magnitudes, i.e. `|h11 h22|^2` and `|h12 h21|^2`).
pub fn normalized_advantage<T: Scalar>(gains: &ChannelGains<T>) -> Result<AdvantageScore<T>> {
    gains.require_shape(2, 2)?;
    let a = gains.get(0, 0) * gains.get(1, 1);
    let b = gains.get(0, 1) * gains.get(1, 0);
    let sum = a + b;
    if !(sum > T::zero()) {
        return Err(Error::DegenerateChannel);
    }
    Ok(AdvantageScore((a - b).abs() / sum))
}

/// Which entries of an `N x 2` allocation may be non-zero, indexed by original user.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportPattern {
    /// `free[i] = [may BS 1 serve i, may BS 2 serve i]`.
    pub free: Vec<[bool; 2]>,
}

impl SupportPattern {
    pub fn n_free(&self) -> usize {
        self.free.iter().flatten().filter(|&&b| b).count()
    }
}

/// Support of the split structure with split position `split` (1-based, in
/// `order`): users ranked before it are served by BS 1 only, users ranked
/// after it by BS 2 only, and the split user by both.
pub fn split_search_space(order: &[usize], split: usize, n_users: usize) -> Result<SupportPattern> {
    check_permutation(order, n_users)?;
    if split == 0 || split > n_users {
        return Err(Error::SplitIndexOutOfRange {
            index: split,
            n_users,
        });
    }
    let mut free = vec![[false; 2]; n_users];
    for (rank, &user) in order.iter().enumerate() {
        free[user] = match (rank + 1).cmp(&split) {
            std::cmp::Ordering::Less => [true, false],
            std::cmp::Ordering::Equal => [true, true],
            std::cmp::Ordering::Greater => [false, true],
        };
    }
    Ok(SupportPattern { free })
}
