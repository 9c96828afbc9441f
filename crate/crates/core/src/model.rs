//! Allocation and channel data model, SINR expressions and target functions.
//!
//! Users and base stations are indexed from zero. Powers are normalized by the
//! receiver noise power, so every SINR denominator carries a literal `+ 1`
//! noise term.
//!
//! Two SINR models are provided:
//!
//! * the independent-reception SINR `x_i = sum_j g[i][j] p_j f[i][j]`, and
//! * the limiting SINR `eta` under a successive interference cancellation
//!   (SIC) decoding order, where user `i`'s signal must be decodable both at
//!   user `i` and at every user that decodes (and cancels) it later.
//!
//! Targets have the max-of-ratios form `max_i w_i / log(1 + sinr_i)`, which
//! is proportional to the longest per-user transmission time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Column-sum tolerance for a feasible allocation.
pub const COLUMN_SUM_TOL: f64 = 1e-9;

/// Squared channel magnitudes `|h_{i,j}|^2`, users by rows, base stations by columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelGains<T> {
    n_users: usize,
    n_bs: usize,
    g: Vec<T>,
}

impl<T: Scalar> ChannelGains<T> {
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self> {
        let n_users = rows.len();
        if n_users == 0 {
            return Err(Error::InvalidGains("no users".into()));
        }
        let n_bs = rows[0].len();
        if n_bs == 0 {
            return Err(Error::InvalidGains("no base stations".into()));
        }
        if rows.iter().any(|r| r.len() != n_bs) {
            return Err(Error::DimensionMismatch("ragged gain matrix".into()));
        }
        let g: Vec<T> = rows.into_iter().flatten().collect();
        if let Some(v) = g.iter().find(|v| !v.is_finite() || **v < T::zero()) {
            return Err(Error::InvalidGains(format!(
                "entry {v} is not finite and non-negative"
            )));
        }
        Ok(Self { n_users, n_bs, g })
    }

    pub fn two_by_two(g: [[T; 2]; 2]) -> Result<Self> {
        Self::new(g.iter().map(|r| r.to_vec()).collect())
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_bs(&self) -> usize {
        self.n_bs
    }

    #[inline]
    pub fn get(&self, user: usize, bs: usize) -> T {
        self.g[user * self.n_bs + bs]
    }

    pub fn row(&self, user: usize) -> &[T] {
        &self.g[user * self.n_bs..(user + 1) * self.n_bs]
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.g.chunks(self.n_bs).map(<[T]>::to_vec).collect()
    }

    /// Comparative-advantage operations divide by gains and need them strictly positive.
    pub fn require_positive(&self) -> Result<()> {
        match self.g.iter().find(|v| **v <= T::zero()) {
            Some(v) => Err(Error::InvalidGains(format!(
                "entry {v} is not strictly positive"
            ))),
            None => Ok(()),
        }
    }

    pub fn require_shape(&self, n_users: usize, n_bs: usize) -> Result<()> {
        if self.n_users != n_users || self.n_bs != n_bs {
            return Err(Error::DimensionMismatch(format!(
                "expected {n_users}x{n_bs} gains, got {}x{}",
                self.n_users, self.n_bs
            )));
        }
        Ok(())
    }

    /// Relabels users: row `k` of the result is row `perm[k]` of `self`.
    pub fn permute_users(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.n_users)?;
        Self::new(perm.iter().map(|&u| self.row(u).to_vec()).collect())
    }

    pub fn scaled(&self, c: T) -> Result<Self> {
        Self::new(
            self.rows()
                .into_iter()
                .map(|r| r.into_iter().map(|v| v * c).collect())
                .collect(),
        )
    }
}

/// Transmit powers normalized by the receiver noise power, one per base station.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedPowers<T>(Vec<T>);

impl<T: Scalar> NormalizedPowers<T> {
    pub fn new(p: Vec<T>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidPowers("empty power vector".into()));
        }
        if let Some(v) = p.iter().find(|v| !v.is_finite() || **v <= T::zero()) {
            return Err(Error::InvalidPowers(format!(
                "power {v} is not finite and positive"
            )));
        }
        Ok(Self(p))
    }

    /// `p_j = tx_power_j / noise_power`.
    pub fn from_watts(tx_power_w: &[T], noise_power_w: T) -> Result<Self> {
        Self::new(tx_power_w.iter().map(|&p| p / noise_power_w).collect())
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn get(&self, bs: usize) -> T {
        self.0[bs]
    }

    pub fn scaled(&self, c: T) -> Result<Self> {
        Self::new(self.0.iter().map(|&p| p * c).collect())
    }
}

/// Power fractions `f[i][j]` that base station `j` spends on user `i`.
///
/// Every entry lies in `[0, 1]` and every column sums to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationMatrix<T> {
    n_users: usize,
    n_bs: usize,
    f: Vec<T>,
}

impl<T: Scalar> AllocationMatrix<T> {
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self> {
        let n_users = rows.len();
        let n_bs = rows.first().map_or(0, Vec::len);
        if n_users == 0 || n_bs == 0 {
            return Err(Error::InvalidAllocation("empty allocation".into()));
        }
        if rows.iter().any(|r| r.len() != n_bs) {
            return Err(Error::DimensionMismatch("ragged allocation matrix".into()));
        }
        let f: Vec<T> = rows.into_iter().flatten().collect();
        if let Some(v) = f.iter().find(|v| !(**v >= T::zero() && **v <= T::one())) {
            return Err(Error::InvalidAllocation(format!(
                "fraction {v} outside [0, 1]"
            )));
        }
        let tol = T::lit(COLUMN_SUM_TOL);
        for j in 0..n_bs {
            let sum = (0..n_users).fold(T::zero(), |acc, i| acc + f[i * n_bs + j]);
            if (sum - T::one()).abs() > tol {
                return Err(Error::InvalidAllocation(format!(
                    "column {j} sums to {sum}, not 1"
                )));
            }
        }
        Ok(Self { n_users, n_bs, f })
    }

    /// The two-user, two-BS allocation parameterized by user 1's shares:
    /// `[[f11, f12], [1 - f11, 1 - f12]]`.
    pub fn two_user(f11: T, f12: T) -> Result<Self> {
        Self::new(vec![vec![f11, f12], vec![T::one() - f11, T::one() - f12]])
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_bs(&self) -> usize {
        self.n_bs
    }

    #[inline]
    pub fn get(&self, user: usize, bs: usize) -> T {
        self.f[user * self.n_bs + bs]
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.f.chunks(self.n_bs).map(<[T]>::to_vec).collect()
    }

    pub fn permute_users(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.n_users)?;
        Self::new(
            perm.iter()
                .map(|&u| self.f[u * self.n_bs..(u + 1) * self.n_bs].to_vec())
                .collect(),
        )
    }
}

/// Relative throughput coefficients (service-level weights), one per user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Weights<T>(Vec<T>);

impl<T: Scalar> Weights<T> {
    pub fn new(w: Vec<T>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::InvalidWeights("empty weight vector".into()));
        }
        if let Some(v) = w.iter().find(|v| !v.is_finite() || **v <= T::zero()) {
            return Err(Error::InvalidWeights(format!(
                "weight {v} is not finite and positive"
            )));
        }
        Ok(Self(w))
    }

    pub fn equal(n: usize) -> Self {
        Self(vec![T::one(); n])
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn scaled(&self, c: T) -> Result<Self> {
        Self::new(self.0.iter().map(|&w| w * c).collect())
    }

    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.0.len())?;
        Self::new(perm.iter().map(|&u| self.0[u]).collect())
    }
}

/// Per-user SINR values (either independent `x` or limiting `eta`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinrVector<T>(pub Vec<T>);

impl<T: Scalar> SinrVector<T> {
    pub fn as_slice(&self) -> &[T] {
        &self.0
    }
}

/// SIC decoding order. In `Ordered(order)`, users earlier in `order` are decoded
/// first and are therefore cancelled by every user that comes after them.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodingOrder {
    NoSic,
    Ordered(Vec<usize>),
}

impl DecodingOrder {
    /// Two-user orders in tie-break priority: no SIC, user 0 first, user 1 first.
    pub fn two_user_orders() -> [DecodingOrder; 3] {
        [
            Self::NoSic,
            Self::Ordered(vec![0, 1]),
            Self::Ordered(vec![1, 0]),
        ]
    }

    /// Index into [`Self::two_user_orders`], if this is a two-user order.
    pub fn two_user_index(&self) -> Option<usize> {
        match self {
            Self::NoSic => Some(0),
            Self::Ordered(o) if o.as_slice() == [0, 1] => Some(1),
            Self::Ordered(o) if o.as_slice() == [1, 0] => Some(2),
            Self::Ordered(_) => None,
        }
    }

    pub fn validate(&self, n_users: usize) -> Result<()> {
        match self {
            Self::NoSic => Ok(()),
            Self::Ordered(o) => check_permutation(o, n_users).map_err(|_| {
                Error::InvalidOrder(format!("{o:?} is not a permutation of 0..{n_users}"))
            }),
        }
    }

    /// Short label; `tau0`/`tau1`/`tau2` for the two-user orders.
    pub fn label(&self) -> String {
        match (self.two_user_index(), self) {
            (Some(k), _) => format!("tau{k}"),
            (None, Self::Ordered(o)) => {
                let parts: Vec<String> = o.iter().map(usize::to_string).collect();
                format!("sic[{}]", parts.join(">"))
            }
            (None, Self::NoSic) => unreachable!(),
        }
    }

    /// Every order for `n_users`: no SIC followed by all permutations in lexicographic order.
    pub fn all(n_users: usize) -> Vec<DecodingOrder> {
        let mut out = vec![Self::NoSic];
        let mut perm: Vec<usize> = (0..n_users).collect();
        loop {
            out.push(Self::Ordered(perm.clone()));
            if !next_permutation(&mut perm) {
                break;
            }
        }
        out
    }
}

impl std::fmt::Display for DecodingOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len())
        .rev()
        .find(|&j| v[j] > v[i - 1])
        .expect("successor exists");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

pub(crate) fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "permutation of length {} for {n} users",
            perm.len()
        )));
    }
    for &u in perm {
        if u >= n || std::mem::replace(&mut seen[u], true) {
            return Err(Error::DimensionMismatch(format!(
                "{perm:?} is not a permutation"
            )));
        }
    }
    Ok(())
}

/// Which target function family is minimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    /// Fixed power split for the whole allocation cycle.
    #[default]
    Static,
    /// Two-user variant where the user that finishes first hands its power to the other.
    Dynamic,
}

/// Logarithm used for rates. The base rescales every target by a constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateLog<T> {
    inv_ln_base: T,
}

impl<T: Scalar> RateLog<T> {
    pub fn bits() -> Self {
        Self::with_base(T::lit(2.0))
    }

    pub fn with_base(base: T) -> Self {
        Self {
            inv_ln_base: base.ln().recip(),
        }
    }

    /// `log(1 + sinr)` in the configured base.
    #[inline]
    pub fn rate(&self, sinr: T) -> T {
        sinr.ln_1p() * self.inv_ln_base
    }
}

impl<T: Scalar> Default for RateLog<T> {
    fn default() -> Self {
        Self::bits()
    }
}

/// Target family plus rate logarithm; the configurable form of every target below.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Objective<T> {
    pub kind: TargetKind,
    pub log: RateLog<T>,
}

impl<T: Scalar> Objective<T> {
    pub fn new(kind: TargetKind) -> Self {
        Self {
            kind,
            log: RateLog::bits(),
        }
    }

    pub fn with_log_base(kind: TargetKind, base: T) -> Self {
        Self {
            kind,
            log: RateLog::with_base(base),
        }
    }

    pub fn max_ratio(&self, sinr: &SinrVector<T>, w: &Weights<T>) -> Result<T> {
        if sinr.0.len() != w.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} SINR values for {} weights",
                sinr.0.len(),
                w.len()
            )));
        }
        let mut worst = T::neg_infinity();
        for (user, (&s, &wi)) in sinr.0.iter().zip(w.as_slice()).enumerate() {
            if !(s > T::zero()) {
                return Err(Error::UserExcluded { user });
            }
            worst = worst.max(wi / self.log.rate(s));
        }
        Ok(worst)
    }

    /// Two-user dynamic-reallocation target for a given order.
    pub fn dynamic_two_user(
        &self,
        f: &AllocationMatrix<T>,
        gains: &ChannelGains<T>,
        powers: &NormalizedPowers<T>,
        w: &Weights<T>,
        order: &DecodingOrder,
    ) -> Result<T> {
        let eta = limiting_sinr_two_user(f, gains, powers, order)?;
        let kernel = TwoUserKernel::new(gains, powers, w, *self)?;
        for (user, &e) in eta.0.iter().enumerate() {
            if !(e > T::zero()) {
                return Err(Error::UserExcluded { user });
            }
        }
        Ok(kernel.dynamic_value(eta.0[0], eta.0[1]))
    }

    /// Minimum of the selected target over decoding orders, with the achieving order.
    ///
    /// Exact ties keep the earlier order (no SIC first, then lexicographic permutations).
    pub fn best_over_orders(
        &self,
        f: &AllocationMatrix<T>,
        gains: &ChannelGains<T>,
        powers: &NormalizedPowers<T>,
        w: &Weights<T>,
    ) -> Result<(T, DecodingOrder)> {
        check_dims(f, gains, powers)?;
        if w.len() != gains.n_users() {
            return Err(Error::DimensionMismatch(
                "weights length differs from user count".into(),
            ));
        }
        if gains.n_users() == 2 && gains.n_bs() == 2 {
            let kernel = TwoUserKernel::new(gains, powers, w, *self)?;
            let (value, k) = kernel
                .best(f.get(0, 0), f.get(0, 1), f.get(1, 0), f.get(1, 1))
                .ok_or(Error::InfeasibleAllOrders)?;
            return Ok((value, DecodingOrder::two_user_orders()[k].clone()));
        }
        if self.kind == TargetKind::Dynamic {
            return Err(Error::DimensionMismatch(
                "dynamic target is defined for two users and two BSs".into(),
            ));
        }
        let mut best: Option<(T, DecodingOrder)> = None;
        for order in DecodingOrder::all(gains.n_users()) {
            let eta = limiting_sinr_general(f, gains, powers, &order)?;
            let Ok(value) = self.max_ratio(&eta, w) else {
                continue;
            };
            if best.as_ref().is_none_or(|(b, _)| value < *b) {
                best = Some((value, order));
            }
        }
        best.ok_or(Error::InfeasibleAllOrders)
    }
}

fn check_dims<T: Scalar>(
    f: &AllocationMatrix<T>,
    gains: &ChannelGains<T>,
    powers: &NormalizedPowers<T>,
) -> Result<()> {
    if f.n_users() != gains.n_users() || f.n_bs() != gains.n_bs() || powers.len() != gains.n_bs() {
        return Err(Error::DimensionMismatch(format!(
            "allocation {}x{}, gains {}x{}, {} powers",
            f.n_users(),
            f.n_bs(),
            gains.n_users(),
            gains.n_bs(),
            powers.len()
        )));
    }
    Ok(())
}

/// Received power at user `rx` of the signal intended for user `tx`,
/// `S_rx(tx) = sum_j g[rx][j] p_j f[tx][j]`, noise normalized.
#[inline]
fn received<T: Scalar>(
    f: &AllocationMatrix<T>,
    gains: &ChannelGains<T>,
    powers: &NormalizedPowers<T>,
    rx: usize,
    tx: usize,
) -> T {
    (0..gains.n_bs()).fold(T::zero(), |acc, j| {
        acc + gains.get(rx, j) * powers.get(j) * f.get(tx, j)
    })
}

/// Independent-reception SINR, `x_i = sum_j g[i][j] p_j f[i][j]`.
pub fn independent_sinr<T: Scalar>(
    f: &AllocationMatrix<T>,
    gains: &ChannelGains<T>,
    powers: &NormalizedPowers<T>,
) -> Result<SinrVector<T>> {
    check_dims(f, gains, powers)?;
    Ok(SinrVector(
        (0..gains.n_users())
            .map(|i| received(f, gains, powers, i, i))
            .collect(),
    ))
}

/// `max_i w_i / log2(1 + x_i)`; a user with `x_i <= 0` is excluded and rejected.
pub fn target_independent<T: Scalar>(x: &SinrVector<T>, w: &Weights<T>) -> Result<T> {
    Objective::new(TargetKind::Static).max_ratio(x, w)
}

/// NOMA target on limiting SINRs, `max_i w_i / log2(1 + eta_i)`.
pub fn target_noma<T: Scalar>(eta: &SinrVector<T>, w: &Weights<T>) -> Result<T> {
    Objective::new(TargetKind::Static).max_ratio(eta, w)
}

/// Limiting SINRs for two users and two BSs, written out per decoding order.
pub fn limiting_sinr_two_user<T: Scalar>(
    f: &AllocationMatrix<T>,
    gains: &ChannelGains<T>,
    powers: &NormalizedPowers<T>,
    order: &DecodingOrder,
) -> Result<SinrVector<T>> {
    gains.require_shape(2, 2)?;
    check_dims(f, gains, powers)?;
    let k = order
        .two_user_index()
        .ok_or_else(|| Error::InvalidOrder(format!("{order:?} is not a two-user order")))?;
    let (p1, p2) = (powers.get(0), powers.get(1));
    let (h11, h12, h21, h22) = (
        gains.get(0, 0),
        gains.get(0, 1),
        gains.get(1, 0),
        gains.get(1, 1),
    );
    let (f11, f12, f21, f22) = (f.get(0, 0), f.get(0, 1), f.get(1, 0), f.get(1, 1));
    let one = T::one();

    let eta = match k {
        0 => [
            (h11 * p1 * f11 + h12 * p2 * f12) / (h11 * p1 * f21 + h12 * p2 * f22 + one),
            (h21 * p1 * f21 + h22 * p2 * f22) / (h21 * p1 * f11 + h22 * p2 * f12 + one),
        ],
        1 => [
            ((h11 * p1 * f11 + h12 * p2 * f12) / (h11 * p1 * f21 + h12 * p2 * f22 + one))
                .min((h21 * p1 * f11 + h22 * p2 * f12) / (h21 * p1 * f21 + h22 * p2 * f22 + one)),
            h21 * p1 * f21 + h22 * p2 * f22,
        ],
        _ => [
            h11 * p1 * f11 + h12 * p2 * f12,
            ((h21 * p1 * f21 + h22 * p2 * f22) / (h21 * p1 * f11 + h22 * p2 * f12 + one))
                .min((h11 * p1 * f21 + h12 * p2 * f22) / (h11 * p1 * f11 + h12 * p2 * f12 + one)),
        ],
    };
    Ok(SinrVector(eta.to_vec()))
}

/// Limiting SINRs for any number of users and BSs.
///
/// User `i`'s signal must be decoded at user `i` and at every user after `i`
/// in the order. At each of those receivers the interference comes from every
/// user not yet cancelled: the users at or after `i` in the order, or all other
/// users without SIC.
pub fn limiting_sinr_general<T: Scalar>(
    f: &AllocationMatrix<T>,
    gains: &ChannelGains<T>,
    powers: &NormalizedPowers<T>,
    order: &DecodingOrder,
) -> Result<SinrVector<T>> {
    check_dims(f, gains, powers)?;
    let n = gains.n_users();
    order.validate(n)?;
    let position: Vec<usize> = match order {
        DecodingOrder::NoSic => vec![0; n],
        DecodingOrder::Ordered(o) => {
            let mut pos = vec![0; n];
            for (rank, &u) in o.iter().enumerate() {
                pos[u] = rank;
            }
            pos
        }
    };
    let sic = matches!(order, DecodingOrder::Ordered(_));

    let sinr_at = |rx: usize, i: usize| {
        let interference = (0..n)
            .filter(|&m| m != i && (!sic || position[m] >= position[i]))
            .fold(T::zero(), |acc, m| acc + received(f, gains, powers, rx, m));
        received(f, gains, powers, rx, i) / (interference + T::one())
    };

    let eta = (0..n)
        .map(|i| {
            let own = sinr_at(i, i);
            if !sic {
                return own;
            }
            (0..n)
                .filter(|&k| position[k] > position[i])
                .fold(own, |acc, k| acc.min(sinr_at(k, i)))
        })
        .collect();
    Ok(SinrVector(eta))
}

/// Minimum of the selected two-user target over the three decoding orders.
pub fn best_over_sic_orders<T: Scalar>(
    f: &AllocationMatrix<T>,
    gains: &ChannelGains<T>,
    powers: &NormalizedPowers<T>,
    w: &Weights<T>,
    kind: TargetKind,
) -> Result<(T, DecodingOrder)> {
    Objective::new(kind).best_over_orders(f, gains, powers, w)
}

/// Dynamic-reallocation target for two users: once the faster user finishes,
/// both BSs serve the remaining user at full power without interference.
pub fn target_dynamic_two_user<T: Scalar>(
    f: &AllocationMatrix<T>,
    gains: &ChannelGains<T>,
    powers: &NormalizedPowers<T>,
    w: &Weights<T>,
    order: &DecodingOrder,
) -> Result<T> {
    Objective::new(TargetKind::Dynamic).dynamic_two_user(f, gains, powers, w, order)
}

/// Both branches of the dynamic target from per-user rates: `[user 1 finishes
/// first, user 2 finishes first]`. `full_rate[u]` is user `u`'s rate when it
/// gets both BSs alone. The target picks the branch whose user finishes first.
#[inline]
pub fn dynamic_branches<T: Scalar>(w: [T; 2], rates: [T; 2], full_rate: [T; 2]) -> [T; 2] {
    let [w1, w2] = w;
    let [l1, l2] = rates;
    [
        w1 / l1 + (w2 - w1 * l2 / l1) / full_rate[1],
        w2 / l2 + (w1 - w2 * l1 / l2) / full_rate[0],
    ]
}

/// Allocation-free evaluator for the two-user, two-BS case; used by the grid
/// searches and by [`Objective::best_over_orders`] so that reported values
/// re-evaluate bit for bit.
#[derive(Debug, Clone, Copy)]
pub struct TwoUserKernel<T> {
    // gp[rx][j] = g[rx][j] * p_j
    gp: [[T; 2]; 2],
    w: [T; 2],
    // log(1 + p1 g[u][1] + p2 g[u][2]): user u alone at full power from both BSs.
    full_rate: [T; 2],
    objective: Objective<T>,
}

impl<T: Scalar> TwoUserKernel<T> {
    pub fn new(
        gains: &ChannelGains<T>,
        powers: &NormalizedPowers<T>,
        w: &Weights<T>,
        objective: Objective<T>,
    ) -> Result<Self> {
        gains.require_shape(2, 2)?;
        if powers.len() != 2 || w.len() != 2 {
            return Err(Error::DimensionMismatch(
                "two-user kernel needs 2 powers and 2 weights".into(),
            ));
        }
        let gp = [
            [
                gains.get(0, 0) * powers.get(0),
                gains.get(0, 1) * powers.get(1),
            ],
            [
                gains.get(1, 0) * powers.get(0),
                gains.get(1, 1) * powers.get(1),
            ],
        ];
        let full_rate = [
            objective
                .log
                .rate(powers.get(0) * gains.get(0, 0) + powers.get(1) * gains.get(0, 1)),
            objective
                .log
                .rate(powers.get(0) * gains.get(1, 0) + powers.get(1) * gains.get(1, 1)),
        ];
        let w = [w.as_slice()[0], w.as_slice()[1]];
        Ok(Self {
            gp,
            w,
            full_rate,
            objective,
        })
    }

    /// Limiting SINRs for all three orders at `f = [[f11, f12], [f21, f22]]`.
    #[inline]
    pub fn etas(&self, f11: T, f12: T, f21: T, f22: T) -> [[T; 2]; 3] {
        let [[a11, a12], [a21, a22]] = self.gp;
        let one = T::one();
        let s11 = a11 * f11 + a12 * f12;
        let s12 = a11 * f21 + a12 * f22;
        let s21 = a21 * f11 + a22 * f12;
        let s22 = a21 * f21 + a22 * f22;
        let own1 = s11 / (s12 + one);
        let own2 = s22 / (s21 + one);
        [
            [own1, own2],
            [own1.min(s21 / (s22 + one)), s22],
            [s11, own2.min(s12 / (s11 + one))],
        ]
    }

    #[inline]
    fn value(&self, eta1: T, eta2: T) -> T {
        match self.objective.kind {
            TargetKind::Static => (self.w[0] / self.objective.log.rate(eta1))
                .max(self.w[1] / self.objective.log.rate(eta2)),
            TargetKind::Dynamic => self.dynamic_value(eta1, eta2),
        }
    }

    #[inline]
    fn dynamic_value(&self, eta1: T, eta2: T) -> T {
        let rates = [self.objective.log.rate(eta1), self.objective.log.rate(eta2)];
        let [user1_first, user2_first] = dynamic_branches(self.w, rates, self.full_rate);
        if self.w[0] / rates[0] < self.w[1] / rates[1] {
            user1_first
        } else {
            user2_first
        }
    }

    /// Best target value and index into [`DecodingOrder::two_user_orders`],
    /// or `None` when every order leaves some user with zero SINR.
    #[inline]
    pub fn best(&self, f11: T, f12: T, f21: T, f22: T) -> Option<(T, usize)> {
        let zero = T::zero();
        let mut best: Option<(T, usize)> = None;
        for (k, [e1, e2]) in self.etas(f11, f12, f21, f22).into_iter().enumerate() {
            if !(e1 > zero && e2 > zero) {
                continue;
            }
            let v = self.value(e1, e2);
            if best.is_none_or(|(b, _)| v < b) {
                best = Some((v, k));
            }
        }
        best
    }

    /// [`Self::best`] at the point `(f11, f12)` of the unit square.
    #[inline]
    pub fn best_at(&self, f11: T, f12: T) -> Option<(T, usize)> {
        self.best(f11, f12, T::one() - f11, T::one() - f12)
    }
}
