//! Achievable `(R, R0)` regions. Curves are corner loci: each row `(t, r, s)`
//! stands for the quadrant `{R ≥ r, R + R0 ≥ s}`, and the region is the
//! upward closure of their union.

use serde::{Deserialize, Serialize};

use crate::channel::{capacity, cascade, joint_channel, make_bec, make_bsc, ChannelSpec};
use crate::construction::check_conditions;
use crate::error::{Error, Result};
use crate::oracle::table::binary_entropy as h;

pub const DEFAULT_GRID_POINTS: usize = 201;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub r: f64,
    pub r0: f64,
}

impl RatePoint {
    pub fn new(r: f64, r0: f64) -> Result<Self> {
        if !(r.is_finite() && r0.is_finite() && r >= 0.0 && r0 >= 0.0) {
            return Err(Error::InvalidParameter(format!("rate point ({r}, {r0})")));
        }
        Ok(Self { r, r0 })
    }

    pub fn sum(&self) -> f64 {
        self.r + self.r0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub param: f64,
    pub r_min: f64,
    pub sum_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionCurve {
    pub param_name: String,
    pub rows: Vec<CurveRow>,
}

impl RegionCurve {
    fn new(param_name: &str, rows: Vec<CurveRow>) -> Result<Self> {
        if rows.iter().any(|r| !(r.param.is_finite() && r.r_min.is_finite() && r.sum_min.is_finite())) {
            return Err(Error::InvalidParameter("non-finite curve value".into()));
        }
        if rows.windows(2).any(|w| w[1].param <= w[0].param) {
            return Err(Error::InvalidParameter(format!("{param_name} grid must be strictly increasing")));
        }
        Ok(Self {
            param_name: param_name.to_string(),
            rows,
        })
    }

    /// Whether `(r, r + r0)` lies in the upward closure of the corners.
    pub fn contains(&self, r: f64, sum: f64, tol: f64) -> bool {
        self.rows
            .iter()
            .any(|row| r >= row.r_min - tol && sum >= row.sum_min - tol)
    }

    /// Every corner of `self` lies in the region spanned by `other`.
    pub fn is_subset_of(&self, other: &RegionCurve, tol: f64) -> bool {
        self.rows.iter().all(|row| other.contains(row.r_min, row.sum_min, tol))
    }

    /// Smallest `r_min` among corners whose sum bound is at most `sum`.
    pub fn r_min_at_sum(&self, sum: f64) -> Option<f64> {
        self.rows
            .iter()
            .filter(|row| row.sum_min <= sum)
            .map(|row| row.r_min)
            .reduce(f64::min)
    }

    /// Sum levels from `levels` reached by both curves at which `self` needs
    /// more message rate than `other`.
    pub fn dominance_violations(&self, other: &RegionCurve, levels: &[f64], tol: f64) -> Vec<f64> {
        levels
            .iter()
            .copied()
            .filter(|&s| match (self.r_min_at_sum(s), other.r_min_at_sum(s)) {
                (Some(a), Some(b)) => a > b + tol,
                _ => false,
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("# corner loci: each row is the quadrant R >= r_min, R + R0 >= sum_min\n");
        out.push_str("# the achievable region is the upward closure of the union of these quadrants\n");
        out.push_str(&format!("# param = {}\n", self.param_name));
        out.push_str("param,r_min,sum_min\n");
        for row in &self.rows {
            out.push_str(&format!("{},{},{}\n", row.param, row.r_min, row.sum_min));
        }
        out
    }
}

/// JSON sidecar for a CSV curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMetadata {
    pub case: String,
    pub p: Option<f64>,
    pub eps: f64,
    pub param_name: String,
    pub grid_points: usize,
    pub grid_min: f64,
    pub grid_max: f64,
    pub conventions: Vec<String>,
}

impl RegionMetadata {
    pub fn describe(case: &str, p: Option<f64>, eps: f64, curve: &RegionCurve) -> Self {
        let first = curve.rows.first().map_or(0.0, |r| r.param);
        let last = curve.rows.last().map_or(0.0, |r| r.param);
        Self {
            case: case.to_string(),
            p,
            eps,
            param_name: curve.param_name.clone(),
            grid_points: curve.rows.len(),
            grid_min: first,
            grid_max: last,
            conventions: vec![
                "rates in bits per action".into(),
                "rows are corners; region is the upward closure".into(),
                "sum_min bounds R + R0".into(),
            ],
        }
    }
}

/// `points` evenly spaced values over `[lo, hi]`, endpoints included.
pub fn linear_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if points == 0 || !(lo.is_finite() && hi.is_finite()) || hi < lo || (points > 1 && hi == lo) {
        return Err(Error::InvalidParameter(format!("grid [{lo}, {hi}] with {points} points")));
    }
    if points == 1 {
        return Ok(vec![lo]);
    }
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points)
        .map(|k| if k + 1 == points { hi } else { lo + step * k as f64 })
        .collect())
}

fn check_prob(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidParameter(format!("{name} = {v} outside [0, 1]")));
    }
    Ok(())
}

fn check_grid(name: &str, grid: &[f64], hi: f64) -> Result<()> {
    if let Some(&t) = grid.iter().find(|&&t| !(0.0..=hi).contains(&t)) {
        return Err(Error::InvalidParameter(format!("{name} = {t} outside [0, {hi}]")));
    }
    Ok(())
}

/// `p'` with `q ⋆ p' = p`.
pub fn residual_crossover(p: f64, q: f64) -> f64 {
    (p - q) / (1.0 - 2.0 * q)
}

/// Polar-achievable corners for the BSC(p)∘BEC(ε) action channel, swept over
/// the test-channel crossover `q ∈ [0, min(½, p)]`.
pub fn polar_region_example1(p: f64, eps: f64, q_grid: &[f64]) -> Result<RegionCurve> {
    check_prob("p", p)?;
    check_prob("eps", eps)?;
    check_grid("q", q_grid, p.min(0.5))?;
    if q_grid.contains(&0.5) {
        return Err(Error::InvalidParameter("q = 1/2 is singular".into()));
    }
    let rows = q_grid
        .iter()
        .map(|&q| {
            let r_min = 1.0 - h(q);
            CurveRow {
                param: q,
                r_min,
                sum_min: (1.0 - eps) * (h(p) - h(residual_crossover(p, q))) + r_min,
            }
        })
        .collect();
    RegionCurve::new("q", rows)
}

fn reference_third_term(eps: f64, nu: f64) -> f64 {
    if nu >= 1.0 {
        0.0
    } else {
        (1.0 - nu) * h(((eps - nu) / (1.0 - nu)).clamp(0.0, 1.0))
    }
}

/// Reference corners with the sum bound taken term by term as displayed:
/// `h(ε) + (1−ε)h(p) + (1−ν)h((ε−ν)/(1−ν)) + (1−ν)(1−h(p))`.
pub fn reference_region_example1(p: f64, eps: f64, nu_grid: &[f64]) -> Result<RegionCurve> {
    reference_curve(p, eps, nu_grid, 1.0)
}

/// Reference corners with the sum bound equal to `I(V; XY)` for the ternary
/// `V = BEC(ν)∘BSC(p)` of `X`; this differs from the displayed form by the
/// sign of the `(1−ν)h(·)` term.
pub fn reference_region_example1_information(p: f64, eps: f64, nu_grid: &[f64]) -> Result<RegionCurve> {
    reference_curve(p, eps, nu_grid, -1.0)
}

fn reference_curve(p: f64, eps: f64, nu_grid: &[f64], sign: f64) -> Result<RegionCurve> {
    check_prob("p", p)?;
    check_prob("eps", eps)?;
    check_grid("nu", nu_grid, eps.min(1.0))?;
    let rows = nu_grid
        .iter()
        .map(|&nu| {
            let r_min = (1.0 - nu) * (1.0 - h(p));
            CurveRow {
                param: nu,
                r_min,
                sum_min: h(eps) + (1.0 - eps) * h(p) + sign * reference_third_term(eps, nu) + r_min,
            }
        })
        .collect();
    RegionCurve::new("nu", rows)
}

/// Exact `(I(X;V), I(XY;V))` for `V = BEC(ν)∘BSC(p)(X)` and
/// `Y = BEC((ε−ν)/(1−ν))(V)`, computed from the joint table.
pub fn reference_information_exact(p: f64, eps: f64, nu: f64) -> Result<(f64, f64)> {
    check_prob("p", p)?;
    check_prob("eps", eps)?;
    if !(0.0..=eps).contains(&nu) {
        return Err(Error::InvalidParameter(format!("nu = {nu} outside [0, {eps}]")));
    }
    let to_v = cascade(&make_bsc(p)?, &make_bec(nu)?)?;
    let late = if nu >= 1.0 { 0.0 } else { ((eps - nu) / (1.0 - nu)).clamp(0.0, 1.0) };
    // Y from V: erasures stay erased, other symbols erased with prob `late`
    let v_to_y = [[1.0 - late, late, 0.0], [0.0, 1.0, 0.0], [0.0, late, 1.0 - late]];
    let mut joint = Vec::with_capacity(18); // (x, v, y) with x most significant
    for x in 0..2u8 {
        for (v, row) in v_to_y.iter().enumerate() {
            for &pyv in row {
                joint.push(0.5 * to_v.prob(v, x) * pyv);
            }
        }
    }
    let info = |a: &dyn Fn(usize, usize, usize) -> usize, na: usize| -> f64 {
        // I(A; V) where A is a function of (x, y) with `na` values
        let mut pav = vec![0.0; na * 3];
        for x in 0..2 {
            for v in 0..3 {
                for y in 0..3 {
                    pav[a(x, v, y) * 3 + v] += joint[(x * 3 + v) * 3 + y];
                }
            }
        }
        let pa: Vec<f64> = (0..na).map(|i| pav[i * 3..][..3].iter().sum()).collect();
        let pv: Vec<f64> = (0..3).map(|v| (0..na).map(|i| pav[i * 3 + v]).sum()).collect();
        let mut s = 0.0;
        for i in 0..na {
            for v in 0..3 {
                let w = pav[i * 3 + v];
                if w > 0.0 {
                    s += w * (w / (pa[i] * pv[v])).log2();
                }
            }
        }
        s
    };
    Ok((info(&|x, _, _| x, 2), info(&|x, _, y| x * 3 + y, 6)))
}

/// Corner `(C(W_{X|V}), C(W_{YX|V}) − C(W_{X|V}))` of the polar region for a
/// given test channel pair.
pub fn polar_region_general(wx_v: &ChannelSpec, wy_v: &ChannelSpec) -> Result<RatePoint> {
    check_conditions(wx_v, wy_v)?;
    let cx = capacity(wx_v)?;
    let cyx = capacity(&joint_channel(wx_v, wy_v)?)?;
    RatePoint::new(cx, (cyx - cx).max(0.0))
}

/// Polar corners for the BSC(p)∘BEC(ε) action channel, obtained channel by
/// channel from `polar_region_general` at every `q`.
pub fn polar_region_example1_general(p: f64, eps: f64, q_grid: &[f64]) -> Result<RegionCurve> {
    check_grid("q", q_grid, p.min(0.5))?;
    let rows = q_grid
        .iter()
        .map(|&q| {
            let wx = make_bsc(q)?;
            let wy = cascade(&make_bsc(residual_crossover(p, q))?, &make_bec(eps)?)?;
            let c = polar_region_general(&wx, &wy)?;
            Ok(CurveRow {
                param: q,
                r_min: c.r,
                sum_min: c.sum(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    RegionCurve::new("q", rows)
}

/// BEC(ε) action channel: only `V = X` meets the conditions, giving the
/// trivial region `{R ≥ 1, R0 ≥ 0}`.
pub fn polar_region_example2(eps: f64) -> Result<RatePoint> {
    check_prob("eps", eps)?;
    polar_region_general(&make_bsc(0.0)?, &make_bec(eps)?)
}
