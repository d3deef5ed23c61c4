//! Adaptive integration of `∫ d²z f(z, z̄)` over the whole plane.
//!
//! The plane is split with a smooth partition of unity. Every declared
//! singularity `c` owns a bump of radius `ρ` (half the distance to its nearest
//! neighbour) that is integrated in log-polar coordinates `z = c + ρ e^{u+iθ}`:
//! the Jacobian `r² = ρ² e^{2u}` absorbs the power law, which then decays
//! exponentially as `u → -∞`. The remainder `(1 - Σφ) f` is integrated in
//! polar coordinates on a disk around the centroid and in log-polar
//! coordinates outside it. Both unbounded log-radial ranges are grown on
//! demand; the power-law bound on what is left beyond the current edge is
//! carried as an explicit error term.
//!
//! Cells are tensor Gauss-Kronrod 7/15 rectangles refined greedily by largest
//! error. Batches of cells are evaluated in parallel and merged in a fixed
//! order, so results do not depend on the thread count.

pub(crate) mod relations;
mod rules;

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{BalancedExponent, PointPair};
use crate::summation::{sum_f64, CompensatedSum};
use rules::{NODES, RULE};

pub use relations::{
    phi1_direct, phi2_direct, phi2_direct_with, triangle_direct, verify_chain, verify_star,
    Phi2Reading, RelationCheck,
};

pub const DEFAULT_BUDGET: usize = 10_000_000;
pub const MIN_BUDGET: usize = 10_000;
/// Required excess of the decay exponent over 2.
pub const DECAY_MARGIN: f64 = 0.05;
/// The relative target is `tol · max(|value|, FLOOR_FRACTION · ∫|f|)`.
pub const FLOOR_FRACTION: f64 = 1e-4;

const CORE: f64 = 0.3;
const TAIL_SAMPLES: usize = 16;
const LOG_RADIUS_LIMIT: f64 = 300.0;
const MAX_BATCH: usize = 16;
const BATCH_RATIO: f64 = 0.05;
const CELL_COST: usize = NODES * NODES;

/// A point where `f` behaves like `1/[z - location]^exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Singularity {
    pub location: Complex64,
    pub exponent: BalancedExponent,
}

impl Singularity {
    pub fn new(location: Complex64, exponent: BalancedExponent) -> Self {
        Self { location, exponent }
    }
}

/// Tolerance and evaluation budget for the plane integrator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneOptions {
    pub tol: f64,
    pub budget: usize,
}

impl Default for PlaneOptions {
    fn default() -> Self {
        Self { tol: 1e-6, budget: DEFAULT_BUDGET }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub abs_err: f64,
    pub evaluations: usize,
    pub converged: bool,
    /// Estimate of `∫|f|`, which sets the absolute floor of the target.
    pub abs_integral: f64,
}

impl QuadratureResult {
    /// Turns an unconverged result into [`Error::BudgetExhausted`].
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::BudgetExhausted { evaluations: self.evaluations, abs_err: self.abs_err })
        }
    }

    fn scaled(self, factor: Complex64) -> Self {
        let k = factor.norm();
        Self {
            value: self.value * factor,
            abs_err: self.abs_err * k,
            abs_integral: self.abs_integral * k,
            ..self
        }
    }
}

/// A quadrature node handed to the integrand.
///
/// Nodes of a singular patch also carry their exact offset from the patch
/// centre, so factors like `[z - c]^α` stay accurate at distances far below
/// the rounding level of `z` itself.
#[derive(Clone, Copy, Debug)]
pub struct PlanePoint {
    pub point: PointPair,
    anchor: Option<(usize, Complex64)>,
}

impl PlanePoint {
    pub fn new(z: Complex64) -> Self {
        Self { point: PointPair::new(z), anchor: None }
    }

    pub fn z(&self) -> Complex64 {
        self.point.z
    }

    /// `z - location`, where `index` is the position of that singularity in
    /// the list passed to [`integrate_plane`].
    pub fn offset_from(&self, index: usize, location: Complex64) -> PointPair {
        match self.anchor {
            Some((i, delta)) if i == index => PointPair::new(delta),
            _ => self.point - PointPair::new(location),
        }
    }
}

fn smooth_step(s: f64) -> f64 {
    let g = |x: f64| if x <= 0.0 { 0.0 } else { (-1.0 / x).exp() };
    let (a, b) = (g(s), g(1.0 - s));
    a / (a + b)
}

/// Radial bump: 1 up to `CORE`, 0 from 1 on, `C^∞` in between.
fn bump(t: f64) -> f64 {
    if t <= CORE {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        1.0 - smooth_step((t - CORE) / (1.0 - CORE))
    }
}

#[derive(Clone, Copy, Debug)]
enum Region {
    Local { caller: usize, center: Complex64, radius: f64, kappa: f64 },
    Inner { center: Complex64, radius: f64 },
    Outer { center: Complex64, radius: f64, kappa: f64 },
}

struct Layout {
    bumps: Vec<(Complex64, f64)>,
    regions: Vec<Region>,
    angular_cells: usize,
}

impl Layout {
    fn new(sing: &[Singularity], decay: f64) -> Self {
        let mut order: Vec<usize> = (0..sing.len()).collect();
        order.sort_by(|&i, &j| {
            let (a, b) = (sing[i].location, sing[j].location);
            a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
        });
        let locs: Vec<Complex64> = order.iter().map(|&i| sing[i].location).collect();
        let radius_of = |k: usize| -> f64 {
            locs.iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, c)| 0.5 * (c - locs[k]).norm())
                .fold(f64::INFINITY, f64::min)
                .min(1.0)
        };
        let bumps: Vec<(Complex64, f64)> = (0..locs.len()).map(|k| (locs[k], radius_of(k))).collect();
        let center = if locs.is_empty() {
            Complex64::new(0.0, 0.0)
        } else {
            locs.iter().fold(Complex64::new(0.0, 0.0), |a, c| a + c) / locs.len() as f64
        };
        let reach = bumps.iter().map(|(c, r)| (c - center).norm() + r).fold(1.0, f64::max);
        let mut regions: Vec<Region> = order
            .iter()
            .zip(&bumps)
            .map(|(&caller, &(c, r))| Region::Local {
                caller,
                center: c,
                radius: r,
                kappa: 2.0 - 2.0 * sing[caller].exponent.mean_re(),
            })
            .collect();
        let outer_radius = 1.25 * reach;
        regions.push(Region::Inner { center, radius: outer_radius });
        regions.push(Region::Outer { center, radius: outer_radius, kappa: decay - 2.0 });
        let winding: i64 = sing.iter().map(|s| s.exponent.n().abs()).sum();
        let angular_cells = (4 + (winding as usize).div_ceil(2)).min(64);
        Self { bumps, regions, angular_cells }
    }

    fn remainder_weight(&self, z: Complex64) -> f64 {
        let covered: f64 = self.bumps.iter().map(|(c, r)| bump((z - c).norm() / r)).sum();
        (1.0 - covered).max(0.0)
    }

    /// Integrand in the coordinates of `region`, Jacobian included.
    fn eval<F>(&self, f: &F, region: usize, x1: f64, x2: f64) -> Complex64
    where
        F: Fn(&PlanePoint) -> Complex64,
    {
        match self.regions[region] {
            Region::Local { caller, center, radius, .. } => {
                let r = radius * x1.exp();
                let w = bump(r / radius);
                if w == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let delta = Complex64::from_polar(r, x2);
                let p = PlanePoint { point: PointPair::new(center + delta), anchor: Some((caller, delta)) };
                r * r * w * f(&p)
            }
            Region::Inner { center, .. } => {
                let z = center + Complex64::from_polar(x1, x2);
                let w = self.remainder_weight(z);
                if w == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                x1 * w * f(&PlanePoint::new(z))
            }
            Region::Outer { center, radius, .. } => {
                let r = radius * x1.exp();
                let z = center + Complex64::from_polar(r, x2);
                let w = self.remainder_weight(z);
                if w == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                r * r * w * f(&PlanePoint::new(z))
            }
        }
    }

    fn kappa(&self, region: usize) -> f64 {
        match self.regions[region] {
            Region::Local { kappa, .. } | Region::Outer { kappa, .. } => kappa,
            Region::Inner { .. } => f64::INFINITY,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Geom {
    region: usize,
    x1: (f64, f64),
    x2: (f64, f64),
}

#[derive(Clone, Copy, Debug)]
struct Cell {
    geom: Geom,
    value: Complex64,
    err: f64,
    err_dir: [f64; 2],
    abs: f64,
    active: bool,
}

#[derive(Clone, Copy, Debug)]
struct Tail {
    region: usize,
    edge: f64,
    step: f64,
    err: f64,
}

fn quadpack_scale(raw: f64, resasc: f64) -> f64 {
    if resasc > 0.0 && raw > 0.0 {
        resasc * (200.0 * raw / resasc).powf(1.5).min(1.0)
    } else {
        raw
    }
}

/// Nonfinite integrand values are reported with the offending point.
fn eval_cell<F>(layout: &Layout, f: &F, g: &Geom) -> std::result::Result<Cell, (f64, f64)>
where
    F: Fn(&PlanePoint) -> Complex64,
{
    let (h1, c1) = (0.5 * (g.x1.1 - g.x1.0), 0.5 * (g.x1.1 + g.x1.0));
    let (h2, c2) = (0.5 * (g.x2.1 - g.x2.0), 0.5 * (g.x2.1 + g.x2.0));
    let mut vals = [[Complex64::new(0.0, 0.0); NODES]; NODES];
    for (i, row) in vals.iter_mut().enumerate() {
        let x1 = c1 + h1 * RULE.x[i];
        for (j, v) in row.iter_mut().enumerate() {
            let x2 = c2 + h2 * RULE.x[j];
            *v = layout.eval(f, g.region, x1, x2);
            if !v.is_finite() {
                return Err((x1, x2));
            }
        }
    }
    let jac = h1 * h2;
    let mut kk = Complex64::new(0.0, 0.0);
    let mut gk = Complex64::new(0.0, 0.0);
    let mut kg = Complex64::new(0.0, 0.0);
    let mut abs = 0.0;
    for i in 0..NODES {
        for j in 0..NODES {
            let v = vals[i][j];
            kk += RULE.wk[i] * RULE.wk[j] * v;
            gk += RULE.wg[i] * RULE.wk[j] * v;
            kg += RULE.wk[i] * RULE.wg[j] * v;
            abs += RULE.wk[i] * RULE.wk[j] * v.norm();
        }
    }
    let mean = kk / 4.0;
    let mut resasc = 0.0;
    for i in 0..NODES {
        for j in 0..NODES {
            resasc += RULE.wk[i] * RULE.wk[j] * (vals[i][j] - mean).norm();
        }
    }
    let (kk, gk, kg, abs, resasc) = (kk * jac, gk * jac, kg * jac, abs * jac, resasc * jac);
    let floor = 50.0 * f64::EPSILON * abs;
    let err_dir = [
        quadpack_scale((kk - gk).norm(), resasc).max(floor),
        quadpack_scale((kk - kg).norm(), resasc).max(floor),
    ];
    Ok(Cell { geom: *g, value: kk, err: err_dir[0] + err_dir[1], err_dir, abs, active: true })
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Item {
    Cell(usize),
    Tail(usize),
}

struct Engine<'a, F> {
    f: &'a F,
    layout: Layout,
    cells: Vec<Cell>,
    tails: Vec<Tail>,
    heap: BinaryHeap<(Key, Reverse<u64>, Item)>,
    seq: u64,
    evaluations: usize,
    frozen_err: f64,
}

impl<'a, F> Engine<'a, F>
where
    F: Fn(&PlanePoint) -> Complex64 + Sync,
{
    fn push(&mut self, err: f64, item: Item) {
        self.heap.push((Key(err), Reverse(self.seq), item));
        self.seq += 1;
    }

    fn evaluate(&mut self, geoms: &[Geom]) -> Result<Vec<usize>> {
        let layout = &self.layout;
        let f = self.f;
        let out: Vec<_> = geoms.par_iter().map(|g| eval_cell(layout, f, g)).collect();
        self.evaluations += geoms.len() * CELL_COST;
        let mut ids = Vec::with_capacity(out.len());
        for (g, res) in geoms.iter().zip(out) {
            let cell = res.map_err(|(x1, x2)| {
                Error::Domain(format!(
                    "integrand is not finite at region {} coordinates ({x1}, {x2})",
                    g.region
                ))
            })?;
            ids.push(self.cells.len());
            self.cells.push(cell);
        }
        Ok(ids)
    }

    fn tail_error(&mut self, region: usize, edge: f64) -> Result<f64> {
        let mut peak: f64 = 0.0;
        for k in 0..TAIL_SAMPLES {
            let theta = 2.0 * PI * (k as f64 + 0.5) / TAIL_SAMPLES as f64;
            let v = self.layout.eval(self.f, region, edge, theta);
            if !v.is_finite() {
                return Err(Error::Domain(format!("integrand is not finite at region {region} edge {edge}")));
            }
            peak = peak.max(v.norm());
        }
        self.evaluations += TAIL_SAMPLES;
        Ok(2.0 * PI * peak / self.layout.kappa(region))
    }

    fn angular(&self, region: usize, x1: (f64, f64)) -> Vec<Geom> {
        let n = self.layout.angular_cells;
        let w = 2.0 * PI / n as f64;
        (0..n)
            .map(|k| Geom { region, x1, x2: (k as f64 * w, (k + 1) as f64 * w) })
            .collect()
    }

    fn initial(&mut self) -> Result<()> {
        let mut geoms = Vec::new();
        let mut tails = Vec::new();
        for region in 0..self.layout.regions.len() {
            match self.layout.regions[region] {
                Region::Local { kappa, .. } => {
                    for x1 in [(-6.0, -3.0), (-3.0, -1.0), (-1.0, 0.0)] {
                        geoms.extend(self.angular(region, x1));
                    }
                    tails.push((region, -6.0, -(2.0 / kappa).clamp(2.0, 16.0)));
                }
                Region::Inner { radius, .. } => {
                    for x1 in [(0.0, 0.5 * radius), (0.5 * radius, radius)] {
                        geoms.extend(self.angular(region, x1));
                    }
                }
                Region::Outer { kappa, .. } => {
                    for x1 in [(0.0, 1.0), (1.0, 3.0)] {
                        geoms.extend(self.angular(region, x1));
                    }
                    tails.push((region, 3.0, (2.0 / kappa).clamp(2.0, 16.0)));
                }
            }
        }
        for id in self.evaluate(&geoms)? {
            self.push(self.cells[id].err, Item::Cell(id));
        }
        for (region, edge, step) in tails {
            let err = self.tail_error(region, edge)?;
            self.tails.push(Tail { region, edge, step, err });
            self.push(err, Item::Tail(self.tails.len() - 1));
        }
        Ok(())
    }

    fn item_cost(&self, item: Item) -> usize {
        match item {
            Item::Cell(_) => 2 * CELL_COST,
            Item::Tail(_) => self.layout.angular_cells * CELL_COST + TAIL_SAMPLES,
        }
    }

    fn totals(&self) -> (Complex64, f64, f64) {
        let live = || self.cells.iter().filter(|c| c.active);
        let value = live().map(|c| c.value).collect::<CompensatedSum>().value();
        let err = sum_f64(live().map(|c| c.err)) + sum_f64(self.tails.iter().map(|t| t.err));
        let abs = sum_f64(live().map(|c| c.abs));
        (value, err, abs)
    }

    fn refine(&mut self, tol: f64, budget: usize) -> Result<bool> {
        let (mut value, mut err, mut abs) = self.totals();
        loop {
            let target = tol * value.norm().max(FLOOR_FRACTION * abs);
            if err <= target {
                (value, err, abs) = self.totals();
                if err <= tol * value.norm().max(FLOOR_FRACTION * abs) {
                    return Ok(true);
                }
            }
            if err - self.frozen_err <= 0.01 * target {
                return Ok(false);
            }
            let Some(first) = self.heap.pop() else { return Ok(false) };
            let threshold = BATCH_RATIO * first.0 .0;
            let mut batch = vec![first];
            while batch.len() < MAX_BATCH {
                match self.heap.peek() {
                    Some(top) if top.0 .0 >= threshold => batch.push(self.heap.pop().unwrap()),
                    _ => break,
                }
            }
            let mut spend = 0;
            let mut chosen = Vec::new();
            for entry in batch {
                let cost = self.item_cost(entry.2);
                if self.evaluations + spend + cost <= budget {
                    spend += cost;
                    chosen.push(entry.2);
                } else {
                    self.heap.push(entry);
                }
            }
            if chosen.is_empty() {
                return Ok(false);
            }

            let mut geoms = Vec::new();
            let mut extended = Vec::new();
            for item in chosen {
                match item {
                    Item::Cell(id) => {
                        let cell = &mut self.cells[id];
                        let g = cell.geom;
                        let dir = if cell.err_dir[1] > cell.err_dir[0] { 1 } else { 0 };
                        let (lo, hi) = if dir == 0 { g.x1 } else { g.x2 };
                        let mid = 0.5 * (lo + hi);
                        if (hi - lo) < 1e-13 * (1.0 + mid.abs()) {
                            self.frozen_err += cell.err;
                            continue;
                        }
                        cell.active = false;
                        err -= cell.err;
                        value -= cell.value;
                        abs -= cell.abs;
                        for half in [(lo, mid), (mid, hi)] {
                            let mut child = g;
                            if dir == 0 {
                                child.x1 = half;
                            } else {
                                child.x2 = half;
                            }
                            geoms.push(child);
                        }
                    }
                    Item::Tail(t) => {
                        let tail = self.tails[t];
                        let next = tail.edge + tail.step;
                        if next.abs() > LOG_RADIUS_LIMIT {
                            self.frozen_err += tail.err;
                            continue;
                        }
                        let span = if tail.step < 0.0 { (next, tail.edge) } else { (tail.edge, next) };
                        geoms.extend(self.angular(tail.region, span));
                        extended.push(t);
                    }
                }
            }
            for id in self.evaluate(&geoms)? {
                let c = self.cells[id];
                err += c.err;
                value += c.value;
                abs += c.abs;
                self.push(c.err, Item::Cell(id));
            }
            for t in extended {
                let tail = self.tails[t];
                let edge = tail.edge + tail.step;
                let new_err = self.tail_error(tail.region, edge)?;
                err += new_err - tail.err;
                self.tails[t] = Tail { edge, err: new_err, ..tail };
                self.push(new_err, Item::Tail(t));
            }
        }
    }
}

fn validate(sing: &[Singularity], decay_exponent: f64, tol: f64, budget: usize) -> Result<()> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    if budget < MIN_BUDGET {
        return Err(Error::InvalidParameter(format!("budget {budget} is below {MIN_BUDGET}")));
    }
    for s in sing {
        let mean = s.exponent.mean_re();
        if !(mean < 1.0) {
            return Err(Error::NonIntegrableSingularity { location: s.location, mean_exponent: mean });
        }
    }
    if !(decay_exponent > 2.0 + DECAY_MARGIN) {
        return Err(Error::InsufficientDecay { exponent: decay_exponent, margin: DECAY_MARGIN });
    }
    for (i, a) in sing.iter().enumerate() {
        for b in &sing[..i] {
            if a.location == b.location {
                return Err(Error::CoincidentPoints(format!("two singularities at {}", a.location)));
            }
        }
    }
    Ok(())
}

/// Integrates `f` over the plane.
///
/// `sing` lists every point where `f` is singular, with the local inverse
/// power; `decay_exponent` is `d` in `|f| = O(|z|^-d)` at infinity. Running out
/// of budget is not an error: the result comes back with `converged = false`
/// (see [`QuadratureResult::require_converged`]).
pub fn integrate_plane<F>(
    f: F,
    sing: &[Singularity],
    decay_exponent: f64,
    tol: f64,
    budget: usize,
) -> Result<QuadratureResult>
where
    F: Fn(&PlanePoint) -> Complex64 + Sync,
{
    validate(sing, decay_exponent, tol, budget)?;
    let mut engine = Engine {
        f: &f,
        layout: Layout::new(sing, decay_exponent),
        cells: Vec::new(),
        tails: Vec::new(),
        heap: BinaryHeap::new(),
        seq: 0,
        evaluations: 0,
        frozen_err: 0.0,
    };
    engine.initial()?;
    let converged = engine.refine(tol, budget)?;
    let (value, abs_err, abs_integral) = engine.totals();
    Ok(QuadratureResult { value, abs_err, evaluations: engine.evaluations, converged, abs_integral })
}
