//! Orders: non-decreasing unbounded maps `ω → ω`, their inverses, and finite
//! checks of the inverse inequalities.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrderError {
    #[error("order must satisfy g(0) = 0, got g(0) = {0}")]
    NotAnchored(u64),
    #[error("order decreases between {n} and {}", n + 1)]
    NonMonotone { n: u64 },
    #[error("unboundedness witness failed at N = {0}")]
    WitnessFailed(u64),
    #[error("arithmetic overflow: {0}")]
    Overflow(String),
    #[error("budget exhausted: {0}")]
    Budget(String),
    #[error("evaluation failed: {0}")]
    Eval(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type OrderFn = Arc<dyn Fn(u64) -> Result<u64, OrderError> + Send + Sync>;

/// A non-decreasing unbounded map with an explicit unboundedness witness:
/// `eval(witness(N)) ≥ N`.
#[derive(Clone)]
pub struct Order {
    name: String,
    spec: Option<String>,
    eval: OrderFn,
    witness: OrderFn,
}

impl fmt::Debug for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Order({})", self.name)
    }
}

impl Order {
    /// Builds an order, rejecting it unless `eval(0) = 0`.
    pub fn new<F, W>(name: impl Into<String>, eval: F, witness: W) -> Result<Order, OrderError>
    where
        F: Fn(u64) -> Result<u64, OrderError> + Send + Sync + 'static,
        W: Fn(u64) -> Result<u64, OrderError> + Send + Sync + 'static,
    {
        let o = Order::new_unanchored(name, eval, witness);
        let v = o.eval(0)?;
        if v != 0 {
            return Err(OrderError::NotAnchored(v));
        }
        Ok(o)
    }

    /// Same as [`Order::new`] without the `g(0) = 0` check. Granularity
    /// functions and bounds such as `n + 1` are non-decreasing and unbounded
    /// but start above zero.
    pub fn new_unanchored<F, W>(name: impl Into<String>, eval: F, witness: W) -> Order
    where
        F: Fn(u64) -> Result<u64, OrderError> + Send + Sync + 'static,
        W: Fn(u64) -> Result<u64, OrderError> + Send + Sync + 'static,
    {
        Order { name: name.into(), spec: None, eval: Arc::new(eval), witness: Arc::new(witness) }
    }

    /// An order given only by its values; the witness is found by galloping
    /// search, which terminates because the map is unbounded.
    pub fn from_fn<F>(name: impl Into<String>, eval: F) -> Result<Order, OrderError>
    where
        F: Fn(u64) -> Result<u64, OrderError> + Send + Sync + 'static,
    {
        let eval: OrderFn = Arc::new(eval);
        let e2 = eval.clone();
        Order::new(name, move |n| eval(n), move |target| gallop(&*e2, target))
    }

    pub fn from_fn_unanchored<F>(name: impl Into<String>, eval: F) -> Order
    where
        F: Fn(u64) -> Result<u64, OrderError> + Send + Sync + 'static,
    {
        let eval: OrderFn = Arc::new(eval);
        let e2 = eval.clone();
        Order::new_unanchored(name, move |n| eval(n), move |target| gallop(&*e2, target))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Text form if the order is a serializable built-in.
    pub fn spec(&self) -> Option<&str> {
        self.spec.as_deref()
    }

    fn with_spec(mut self, spec: String) -> Order {
        self.name = spec.clone();
        self.spec = Some(spec);
        self
    }

    pub fn eval(&self, n: u64) -> Result<u64, OrderError> {
        (self.eval)(n)
    }

    pub fn witness(&self, target: u64) -> Result<u64, OrderError> {
        (self.witness)(target)
    }

    pub fn values(&self, upto: u64) -> Result<Vec<u64>, OrderError> {
        (0..=upto).map(|n| self.eval(n)).collect()
    }

    /// Checks monotonicity on `[0, n]` and the witness for every target `≤ n`.
    pub fn validate(&self, n: u64) -> Result<(), OrderError> {
        let mut prev = self.eval(0)?;
        for k in 1..=n {
            let v = self.eval(k)?;
            if v < prev {
                return Err(OrderError::NonMonotone { n: k - 1 });
            }
            prev = v;
        }
        for target in 0..=n {
            let w = self.witness(target)?;
            if self.eval(w)? < target {
                return Err(OrderError::WitnessFailed(target));
            }
        }
        Ok(())
    }

    pub fn identity() -> Order {
        Order::new_unanchored("identity", Ok, Ok).with_spec("order:identity".into())
    }

    /// `n ↦ ⌊log2(n+1)⌋`.
    pub fn log2floor_plus() -> Order {
        Order::new_unanchored(
            "log2floor+",
            |n| Ok(crate::arith::floor_log2(n.saturating_add(1)) as u64),
            |target| {
                if target >= 64 {
                    Err(OrderError::Overflow(format!("log2floor+ witness for {target}")))
                } else {
                    Ok((1u64 << target) - 1)
                }
            },
        )
        .with_spec("order:log2floor+".into())
    }

    /// `n ↦ a·n + b`; `b` must be 0 and `a ≥ 1`.
    pub fn linear(a: u64, b: u64) -> Result<Order, OrderError> {
        if b != 0 {
            return Err(OrderError::NotAnchored(b));
        }
        Ok(Order::linear_unanchored(a, b)?.with_spec(format!("order:linear:{a},{b}")))
    }

    /// `n ↦ a·n + b` with no anchoring requirement.
    pub fn linear_unanchored(a: u64, b: u64) -> Result<Order, OrderError> {
        if a == 0 {
            return Err(OrderError::Parse("linear order needs slope a >= 1".into()));
        }
        Ok(Order::new_unanchored(
            format!("linear:{a},{b}"),
            move |n| {
                n.checked_mul(a)
                    .and_then(|x| x.checked_add(b))
                    .ok_or_else(|| OrderError::Overflow(format!("{a}*{n}+{b}")))
            },
            move |target| Ok(target.saturating_sub(b).div_ceil(a)),
        ))
    }

    /// Finite table `v0, v1, …` continued linearly with the given slope.
    pub fn table(values: Vec<u64>, slope: u64) -> Result<Order, OrderError> {
        let o = Order::table_unanchored(values.clone(), slope)?;
        if values[0] != 0 {
            return Err(OrderError::NotAnchored(values[0]));
        }
        let vs: Vec<String> = values.iter().map(u64::to_string).collect();
        Ok(o.with_spec(format!("order:table:{};slope={slope}", vs.join(","))))
    }

    pub fn table_unanchored(values: Vec<u64>, slope: u64) -> Result<Order, OrderError> {
        if values.is_empty() {
            return Err(OrderError::Parse("table order needs at least one value".into()));
        }
        if slope == 0 {
            return Err(OrderError::Parse("table order needs slope >= 1".into()));
        }
        if let Some(n) = values.windows(2).position(|w| w[1] < w[0]) {
            return Err(OrderError::NonMonotone { n: n as u64 });
        }
        let values = Arc::new(values);
        let v2 = values.clone();
        let eval = move |n: u64| -> Result<u64, OrderError> {
            let m = values.len() as u64;
            if n < m {
                return Ok(values[n as usize]);
            }
            let last = values[values.len() - 1];
            (n - (m - 1))
                .checked_mul(slope)
                .and_then(|x| x.checked_add(last))
                .ok_or_else(|| OrderError::Overflow(format!("table order at {n}")))
        };
        let witness = move |target: u64| -> Result<u64, OrderError> {
            if let Some(k) = v2.iter().position(|&v| v >= target) {
                return Ok(k as u64);
            }
            let last = v2[v2.len() - 1];
            Ok(v2.len() as u64 - 1 + (target - last).div_ceil(slope))
        };
        Ok(Order::new_unanchored("table", eval, witness))
    }

    /// `n ↦ n − 1`, clamped at 0.
    pub fn predecessor() -> Order {
        Order::new_unanchored("pred", |n| Ok(n.saturating_sub(1)), |t| Ok(t.saturating_add(1)))
    }

    /// `g^{-1}(n) = min{k : g(k) ≥ n}`, found by binary search on `[0, witness(n)]`.
    pub fn inverse(&self) -> Order {
        let g = self.clone();
        let g2 = self.clone();
        Order::new_unanchored(
            format!("inverse({})", self.name),
            move |n| {
                let mut hi = g.witness(n)?;
                if g.eval(hi)? < n {
                    return Err(OrderError::WitnessFailed(n));
                }
                let mut lo = 0u64;
                while lo < hi {
                    let mid = lo + (hi - lo) / 2;
                    if g.eval(mid)? >= n {
                        hi = mid;
                    } else {
                        lo = mid + 1;
                    }
                }
                Ok(lo)
            },
            // g^{-1}(k) ≥ N exactly when g(N−1) < k.
            move |target| {
                if target == 0 {
                    Ok(0)
                } else {
                    g2.eval(target - 1)?
                        .checked_add(1)
                        .ok_or_else(|| OrderError::Overflow("inverse witness".into()))
                }
            },
        )
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Order) -> Order {
        let (o1, i1) = (self.clone(), inner.clone());
        let (o2, i2) = (self.clone(), inner.clone());
        Order::new_unanchored(
            format!("{}∘{}", self.name, inner.name),
            move |n| o1.eval(i1.eval(n)?),
            move |t| i2.witness(o2.witness(t)?),
        )
    }

    /// Parses `order:<kind>:<params>`; rejects orders with `g(0) ≠ 0`.
    pub fn parse(s: &str) -> Result<Order, OrderError> {
        let o = Order::parse_unanchored(s)?;
        let v = o.eval(0)?;
        if v != 0 {
            return Err(OrderError::NotAnchored(v));
        }
        Ok(o)
    }

    /// Parses the text form without the anchoring check.
    pub fn parse_unanchored(s: &str) -> Result<Order, OrderError> {
        let s = s.trim();
        let rest = s
            .strip_prefix("order:")
            .ok_or_else(|| OrderError::Parse(format!("expected order:<kind>:<params>, got {s:?}")))?;
        let (kind, params) = rest.split_once(':').unwrap_or((rest, ""));
        let num = |t: &str| -> Result<u64, OrderError> {
            t.trim().parse::<u64>().map_err(|_| OrderError::Parse(format!("bad number {t:?} in {s:?}")))
        };
        match kind {
            "identity" if params.is_empty() => Ok(Order::identity()),
            "log2floor+" if params.is_empty() => Ok(Order::log2floor_plus()),
            "linear" => {
                let (a, b) = params
                    .split_once(',')
                    .ok_or_else(|| OrderError::Parse(format!("linear needs a,b in {s:?}")))?;
                let (a, b) = (num(a)?, num(b)?);
                Ok(Order::linear_unanchored(a, b)?.with_spec(format!("order:linear:{a},{b}")))
            }
            "table" => {
                let (vals, slope) = params
                    .split_once(";slope=")
                    .ok_or_else(|| OrderError::Parse(format!("table needs ;slope= in {s:?}")))?;
                let values = vals.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
                let slope = num(slope)?;
                let vs: Vec<String> = values.iter().map(u64::to_string).collect();
                let spec = format!("order:table:{};slope={slope}", vs.join(","));
                Ok(Order::table_unanchored(values, slope)?.with_spec(spec))
            }
            _ => Err(OrderError::Parse(format!("unknown order {s:?}"))),
        }
    }
}

fn gallop(eval: &(dyn Fn(u64) -> Result<u64, OrderError> + Send + Sync), target: u64) -> Result<u64, OrderError> {
    if eval(0)? >= target {
        return Ok(0);
    }
    let mut hi = 1u64;
    while eval(hi)? < target {
        hi = hi
            .checked_mul(2)
            .ok_or_else(|| OrderError::Overflow(format!("no witness for {target} below 2^64")))?;
    }
    Ok(hi)
}

/// Outcome of a finite check of an implication: the hypothesis and the
/// conclusion are reported separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LemmaCheck {
    /// First `n` where the hypothesis fails, if any.
    pub hypothesis_violation: Option<u64>,
    /// First `k` where the conclusion fails, if any.
    pub conclusion_violation: Option<u64>,
}

impl LemmaCheck {
    /// True iff the conclusion holds on the whole checked range.
    pub fn holds(&self) -> bool {
        self.conclusion_violation.is_none()
    }

    pub fn hypothesis_holds(&self) -> bool {
        self.hypothesis_violation.is_none()
    }
}

/// Hypothesis `g(n) ≤ f(n) < g(n+c)`; conclusion `g^{-1}(k) − c ≤ f^{-1}(k) ≤ g^{-1}(k)`
/// for `k ≤ N`. The hypothesis is checked on every `n` the conclusion depends on.
pub fn check_inverse_sandwich(f: &Order, g: &Order, c: u64, big_n: u64) -> Result<LemmaCheck, OrderError> {
    let (fi, gi) = (f.inverse(), g.inverse());
    let h_range = big_n.max(fi.eval(big_n)?).max(gi.eval(big_n)?);
    let mut hypothesis_violation = None;
    for n in 0..=h_range {
        let (fv, gv, gc) = (f.eval(n)?, g.eval(n)?, g.eval(n + c)?);
        if !(gv <= fv && fv < gc) {
            hypothesis_violation = Some(n);
            break;
        }
    }
    let mut conclusion_violation = None;
    for k in 0..=big_n {
        let (a, b) = (fi.eval(k)?, gi.eval(k)?);
        if !(b.saturating_sub(c) <= a && a <= b) {
            conclusion_violation = Some(k);
            break;
        }
    }
    Ok(LemmaCheck { hypothesis_violation, conclusion_violation })
}

/// Hypothesis `f(n) ≤ g(n) + c`; conclusion `g^{-1}(k) ≤ f^{-1}(k + c)` for `k ≤ N`.
pub fn check_inverse_shift(f: &Order, g: &Order, c: u64, big_n: u64) -> Result<LemmaCheck, OrderError> {
    let (fi, gi) = (f.inverse(), g.inverse());
    let h_range = big_n.max(fi.eval(big_n + c)?);
    let mut hypothesis_violation = None;
    for n in 0..=h_range {
        if f.eval(n)? > g.eval(n)? + c {
            hypothesis_violation = Some(n);
            break;
        }
    }
    let mut conclusion_violation = None;
    for k in 0..=big_n {
        if gi.eval(k)? > fi.eval(k + c)? {
            conclusion_violation = Some(k);
            break;
        }
    }
    Ok(LemmaCheck { hypothesis_violation, conclusion_violation })
}

/// `f(n) ≤ g(n)` for every `n ∈ [from, to]`.
pub fn finite_domination(f: &Order, g: &Order, from: u64, to: u64) -> Result<bool, OrderError> {
    for n in from..=to {
        if f.eval(n)? > g.eval(n)? {
            return Ok(false);
        }
    }
    Ok(true)
}
