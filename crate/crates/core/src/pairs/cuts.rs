//! One-step decompositions of a pushed-forward measure pair into fully
//! crossing (`L`), standard (`I`), substandard (`J`) and remainder (`E`)
//! parts.
//!
//! Consecutive fully crossing image pieces of one strip-free component are
//! kept together as a [`FullCrossingRun`]: its mass is a single integral over
//! the union of the preimages, and the individual pieces are only built on
//! request, either all at once ([`DecompositionStep::expand`]) or one at a
//! time by mass-proportional sampling ([`DecompositionStep::sample_child`]).

use rand::Rng;

use super::curve::{invert_with, CurveEvaluator, UCurve};
use super::{MassClass, MeasurePair, PairDensity, PairError, Regularity, A0_DEFAULT, C0};
use crate::geometry::{critical_intervals, CriticalStrips};
use crate::numerics::dd::DoubleDouble;
use crate::numerics::quadrature::PanelValue;
use crate::numerics::sum::CompensatedSum;

/// A closed interval `(lo, hi)`.
type Interval = (f64, f64);

/// Tunables of the decomposition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutConfig {
    /// Length threshold between standard and substandard pieces.
    pub a0: f64,
}

impl Default for CutConfig {
    fn default() -> Self {
        CutConfig { a0: A0_DEFAULT }
    }
}

/// One image piece allocated to `I` or `J`. `mass` is the fraction of the
/// parent's (normalized) mass it carries.
#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    pub class: MassClass,
    /// Preimage in the parent's coordinates.
    pub branch: (f64, f64),
    /// Lifted image interval.
    pub image: (f64, f64),
    /// The image in the child's own coordinates `image - floor(image.0)`,
    /// without the rounding of the lifted values.
    pub domain: (f64, f64),
    pub mass: f64,
    /// Strip exponent avoided by the preimage.
    pub eta: f64,
}

/// `count` consecutive fully crossing pieces `[first + j, first + j + 1]` of
/// the image of one strip-free component.
#[derive(Clone, Debug, PartialEq)]
pub struct FullCrossingRun {
    pub class: MassClass,
    /// Strip-free component of the parent domain on which `f_gamma` is monotone.
    pub bracket: (f64, f64),
    pub first: i64,
    pub count: u64,
    /// Preimage of `[first, first + count]`.
    pub branch: (f64, f64),
    pub mass: f64,
    pub eta: f64,
    pub(crate) panels: Vec<PanelValue>,
}

/// The decomposition of the image of one pair.
#[derive(Clone, Debug)]
pub struct DecompositionStep {
    pub parent: MeasurePair,
    pub runs: Vec<FullCrossingRun>,
    pub pieces: Vec<Piece>,
    /// Fraction of the parent's mass sent to `E`.
    pub e_mass: f64,
}

impl DecompositionStep {
    /// Fraction of the parent's mass allocated to `class`.
    pub fn class_mass(&self, class: MassClass) -> f64 {
        if class == MassClass::E {
            return self.e_mass;
        }
        let mut s = CompensatedSum::new();
        for r in self.runs.iter().filter(|r| r.class == class) {
            s.add(r.mass);
        }
        for p in self.pieces.iter().filter(|p| p.class == class) {
            s.add(p.mass);
        }
        s.value()
    }

    /// Sum of all class fractions; one up to quadrature error.
    pub fn total(&self) -> f64 {
        [MassClass::L, MassClass::I, MassClass::J, MassClass::E]
            .iter()
            .map(|&c| self.class_mass(c))
            .collect::<CompensatedSum>()
            .value()
    }

    /// Number of pairs in `L`, `I` and `J`.
    pub fn alive_count(&self) -> u64 {
        self.runs.iter().map(|r| r.count).sum::<u64>() + self.pieces.len() as u64
    }

    /// Counts of emitted pairs per class `[L, I, J]`.
    pub fn class_counts(&self) -> [u64; 3] {
        let mut c = [0u64; 3];
        let idx = |k: MassClass| match k {
            MassClass::L => 0,
            MassClass::I => 1,
            _ => 2,
        };
        for r in &self.runs {
            c[idx(r.class)] += r.count;
        }
        for p in &self.pieces {
            c[idx(p.class)] += 1;
        }
        c
    }

    /// Builds every emitted pair, with absolute masses `parent.mass * fraction`.
    pub fn expand(&self) -> Result<Vec<(MassClass, MeasurePair)>, PairError> {
        let mut ev = self.parent.curve.evaluator();
        let mut out = Vec::with_capacity(self.alive_count() as usize);
        for run in &self.runs {
            let mut left = preimage(&mut ev, run.first as f64, run.bracket)?;
            for j in 0..run.count {
                let t0 = (run.first + j as i64) as f64;
                let right = preimage(&mut ev, t0 + 1.0, run.bracket)?;
                let branch = (left.min(right), left.max(right));
                let mass = ev.mass(branch.0, branch.1)?;
                out.push((run.class, self.child(branch, t0, (0.0, 1.0), mass, run.class, run.eta)));
                left = right;
            }
        }
        for p in &self.pieces {
            out.push((p.class, self.child(p.branch, p.image.0.floor(), p.domain, p.mass, p.class, p.eta)));
        }
        Ok(out)
    }

    /// Draws one emitted pair with probability proportional to its mass
    /// among the non-`E` part. Returns `None` if everything went to `E`.
    pub fn sample_child<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Option<(MassClass, MeasurePair)>, PairError> {
        let alive: f64 = self.runs.iter().map(|r| r.mass).sum::<f64>() + self.pieces.iter().map(|p| p.mass).sum::<f64>();
        if alive.is_nan() || alive <= 0.0 {
            return Ok(None);
        }
        let mut u = rng.random::<f64>() * alive;
        for run in &self.runs {
            if u < run.mass {
                let mut ev = self.parent.curve.evaluator();
                let target = rng.random::<f64>() * run.mass;
                let x = ev.invert_cdf(&run.panels, target)?;
                let (t, _) = ev.f_gamma(x)?;
                let j = (t.floor() as i64).clamp(run.first, run.first + run.count as i64 - 1);
                let t0 = j as f64;
                let a = preimage(&mut ev, t0, run.bracket)?;
                let b = preimage(&mut ev, t0 + 1.0, run.bracket)?;
                let branch = (a.min(b), a.max(b));
                let mass = ev.mass(branch.0, branch.1)?;
                return Ok(Some((run.class, self.child(branch, t0, (0.0, 1.0), mass, run.class, run.eta))));
            }
            u -= run.mass;
        }
        let last = self.pieces.len().saturating_sub(1);
        for (i, p) in self.pieces.iter().enumerate() {
            if u < p.mass || i == last {
                return Ok(Some((p.class, self.child(p.branch, p.image.0.floor(), p.domain, p.mass, p.class, p.eta))));
            }
            u -= p.mass;
        }
        // only reachable through rounding when the pieces list is empty
        Ok(None)
    }

    #[cfg(test)]
    fn parent_strips(&self) -> CriticalStrips {
        critical_intervals(self.parent.l(), 0.5).unwrap()
    }

    fn child(
        &self,
        branch: (f64, f64),
        shift: f64,
        domain: (f64, f64),
        mass: f64,
        class: MassClass,
        eta: f64,
    ) -> MeasurePair {
        let l = self.parent.l();
        let curve = UCurve::child(&self.parent.curve, branch, shift, domain, mass.ln());
        let bound = l.powf(-eta) * self.parent.log_derivative_bound() + C0 * l.powf(1.0 - 2.0 * eta);
        let regularity = match class {
            MassClass::J => Regularity::Substandard,
            _ if curve.is_fully_crossing() => Regularity::FullCrossing,
            _ => Regularity::Standard,
        };
        MeasurePair::new(curve, bound, self.parent.mass * mass, regularity)
    }
}

/// Lifted copies of the strip intervals clipped to `[a, b]`, in order.
pub(crate) fn strip_copies(s: &CriticalStrips, a: f64, b: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for m in (a.floor() as i64 - 1)..=(b.floor() as i64 + 1) {
        for &(lo, hi) in &s.intervals {
            let (p, q) = ((lo + m as f64).max(a), (hi + m as f64).min(b));
            if p < q {
                out.push((p, q));
            }
        }
    }
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    out
}

/// Whether `[a, b]` meets a strip copy in more than boundary contact, which
/// rounding of lifted coordinates can produce.
pub(crate) fn meets_strips(s: &CriticalStrips, a: f64, b: f64) -> bool {
    let shift = a.floor();
    let slack = 1e-10;
    !strip_copies(s, a - shift + slack, b - shift - slack).is_empty()
}

/// Components of `[a, b]` minus the sorted, disjoint `cuts`.
pub(crate) fn complement(a: f64, b: f64, cuts: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut start = a;
    for &(p, q) in cuts {
        let (p, q) = (p.max(a), q.min(b));
        if q <= p {
            continue;
        }
        if p > start {
            out.push((start, p));
        }
        start = start.max(q);
    }
    if b > start {
        out.push((start, b));
    }
    out
}

fn preimage(ev: &mut CurveEvaluator, t: f64, bracket: (f64, f64)) -> Result<f64, PairError> {
    invert_with(ev, t, bracket)
}

/// A monotone bracket with its image endpoints, kept in double-double so
/// that image pieces ending there get exact own coordinates.
struct Ends {
    c: (f64, f64),
    fa: f64,
    fb: f64,
    fa_dd: DoubleDouble,
    fb_dd: DoubleDouble,
}

impl Ends {
    fn new(ev: &mut CurveEvaluator, c: (f64, f64)) -> Result<Self, PairError> {
        let fa_dd = ev.f_gamma_dd(c.0)?;
        let fb_dd = ev.f_gamma_dd(c.1)?;
        Ok(Ends {
            c,
            fa: fa_dd.to_f64(),
            fb: fb_dd.to_f64(),
            fa_dd,
            fb_dd,
        })
    }

    fn range(&self) -> (f64, f64) {
        (self.fa.min(self.fb), self.fa.max(self.fb))
    }

    fn pre(&self, ev: &mut CurveEvaluator, t: f64) -> Result<f64, PairError> {
        if t == self.fa {
            Ok(self.c.0)
        } else if t == self.fb {
            Ok(self.c.1)
        } else {
            preimage(ev, t, self.c)
        }
    }

    /// `t - shift`, exact for inversion targets and recomputed from the
    /// double-double value at the bracket ends.
    fn local(&self, t: f64, shift: f64) -> f64 {
        if t == self.fa {
            (self.fa_dd - DoubleDouble::from_f64(shift)).to_f64()
        } else if t == self.fb {
            (self.fb_dd - DoubleDouble::from_f64(shift)).to_f64()
        } else {
            t - shift
        }
    }

    /// Preimage and own coordinates of the image piece `[t0, t1]`.
    fn piece(&self, ev: &mut CurveEvaluator, t0: f64, t1: f64) -> Result<(Interval, Interval), PairError> {
        let a = self.pre(ev, t0)?;
        let b = self.pre(ev, t1)?;
        let shift = t0.floor();
        Ok(((a.min(b), a.max(b)), (self.local(t0, shift), self.local(t1, shift))))
    }
}

struct Builder<'a> {
    pair: &'a MeasurePair,
    ev: CurveEvaluator,
    cfg: CutConfig,
    l: f64,
    min_len: f64,
    s12: CriticalStrips,
    runs: Vec<FullCrossingRun>,
    pieces: Vec<Piece>,
    e: CompensatedSum,
}

#[derive(Clone, Copy, PartialEq)]
enum Leftovers {
    ToE,
    Classify,
}

impl<'a> Builder<'a> {
    fn new(pair: &'a MeasurePair, cfg: CutConfig) -> Result<Self, PairError> {
        let l = pair.l();
        Ok(Builder {
            pair,
            ev: pair.curve.evaluator(),
            cfg,
            l,
            min_len: l.powf(-0.5),
            s12: critical_intervals(l, 0.5)?,
            runs: Vec::new(),
            pieces: Vec::new(),
            e: CompensatedSum::new(),
        })
    }

    fn leftover_class(&self, len: f64) -> MassClass {
        if len > self.cfg.a0 {
            MassClass::I
        } else if len >= self.min_len {
            MassClass::J
        } else {
            MassClass::E
        }
    }

    fn send_to_e(&mut self, a: f64, b: f64) -> Result<(), PairError> {
        let m = self.ev.mass(a, b)?;
        self.e.add(m);
        Ok(())
    }

    fn push_piece(
        &mut self,
        class: MassClass,
        (branch, domain): ((f64, f64), (f64, f64)),
        image: (f64, f64),
        eta: f64,
    ) -> Result<(), PairError> {
        let mass = self.ev.mass(branch.0, branch.1)?;
        if class == MassClass::E {
            self.e.add(mass);
            return Ok(());
        }
        if class == MassClass::J && meets_strips(&self.s12, image.0, image.1) {
            return Err(PairError::InvariantViolation(format!(
                "substandard piece [{}, {}] meets S_1/2",
                image.0, image.1
            )));
        }
        self.pieces.push(Piece {
            class,
            branch,
            image,
            domain,
            mass,
            eta,
        });
        Ok(())
    }

    /// Cuts the image of a strip-free component at integer verticals.
    fn component(&mut self, c: (f64, f64), run_class: MassClass, leftovers: Leftovers) -> Result<(), PairError> {
        let ends = Ends::new(&mut self.ev, c)?;
        let (lo, hi) = ends.range();
        let (first, last) = (lo.ceil(), hi.floor());
        let mut rest = Vec::new();
        if first + 1.0 <= last {
            let a = ends.pre(&mut self.ev, first)?;
            let b = ends.pre(&mut self.ev, last)?;
            let branch = (a.min(b), a.max(b));
            let (mass, panels) = self.ev.mass_panels(branch.0, branch.1)?;
            self.runs.push(FullCrossingRun {
                class: run_class,
                bracket: c,
                first: first as i64,
                count: (last - first) as u64,
                branch,
                mass,
                eta: 0.5,
                panels,
            });
            rest.push((lo, first));
            rest.push((last, hi));
        } else if first <= last {
            rest.push((lo, first));
            rest.push((first, hi));
        } else {
            rest.push((lo, hi));
        }
        for (t0, t1) in rest {
            if t1 <= t0 {
                continue;
            }
            let class = match leftovers {
                Leftovers::ToE => MassClass::E,
                Leftovers::Classify => self.leftover_class(t1 - t0),
            };
            let piece = ends.piece(&mut self.ev, t0, t1)?;
            self.push_piece(class, piece, (t0, t1), 0.5)?;
        }
        Ok(())
    }

    /// A component of `S_1/2 \ S_1/4`: the image loses its own `S_1/2` part
    /// to `E` and the remaining pieces go to `J` (or `E` when too short).
    fn zone(&mut self, z: (f64, f64)) -> Result<(), PairError> {
        let ends = Ends::new(&mut self.ev, z)?;
        let (lo, hi) = ends.range();
        let cuts = strip_copies(&self.s12, lo, hi);
        for &(p, q) in &cuts {
            let ((a, b), _) = ends.piece(&mut self.ev, p, q)?;
            self.send_to_e(a, b)?;
        }
        for (t0, t1) in complement(lo, hi, &cuts) {
            let len = t1 - t0;
            if len < self.min_len {
                let ((a, b), _) = ends.piece(&mut self.ev, t0, t1)?;
                self.send_to_e(a, b)?;
                continue;
            }
            let mut k = (len / self.cfg.a0).ceil().max(1.0);
            if k > 1.0 && len / k < self.min_len {
                // only possible when a0 < 2 L^-1/2: keep the pieces at least L^-1/2 long
                k -= 1.0;
            }
            let k = k as usize;
            for i in 0..k {
                let s0 = if i == 0 { t0 } else { t0 + len * i as f64 / k as f64 };
                let s1 = if i + 1 == k { t1 } else { t0 + len * (i + 1) as f64 / k as f64 };
                let piece = ends.piece(&mut self.ev, s0, s1)?;
                self.push_piece(MassClass::J, piece, (s0, s1), 0.25)?;
            }
        }
        Ok(())
    }

    fn finish(self) -> DecompositionStep {
        DecompositionStep {
            parent: self.pair.clone(),
            runs: self.runs,
            pieces: self.pieces,
            e_mass: self.e.value(),
        }
    }
}

fn tol_le(a: f64, b: f64) -> bool {
    a <= b * (1.0 + 1e-9)
}

fn check_components(comps: &[(f64, f64)]) -> Result<(), PairError> {
    if comps.len() > 3 {
        return Err(PairError::InvariantViolation(format!(
            "curve minus S_1/2 has {} components, expected at most three",
            comps.len()
        )));
    }
    Ok(())
}

/// Decomposition of the image of a standard pair: `L` and `E` only.
pub fn cut_standard(pair: &MeasurePair, cfg: &CutConfig) -> Result<DecompositionStep, PairError> {
    let len = pair.curve.length();
    if !(len > cfg.a0 && tol_le(pair.log_derivative_bound(), 3.0 * C0)) {
        return Err(PairError::InvariantViolation(format!(
            "cut_standard needs |I| > a0 and a log-derivative bound <= 3 C0 (|I| = {len}, bound = {})",
            pair.log_derivative_bound()
        )));
    }
    let mut b = Builder::new(pair, *cfg)?;
    let (a, e) = pair.curve.domain();
    let strips = strip_copies(&b.s12, a, e);
    for &(p, q) in &strips {
        b.send_to_e(p, q)?;
    }
    let comps = complement(a, e, &strips);
    check_components(&comps)?;
    for c in comps {
        b.component(c, MassClass::L, Leftovers::ToE)?;
    }
    Ok(b.finish())
}

/// Upper end of the substandard length window: `a0`, widened to `2 L^-1/2`
/// when `a0 < 2 L^-1/2` so that subdivided pieces always fit.
pub(crate) fn substandard_max_len(a0: f64, l: f64) -> f64 {
    a0.max(2.0 * l.powf(-0.5))
}

/// Decomposition of the image of a substandard pair: `I`, `J` and `E`.
pub fn cut_substandard(pair: &MeasurePair, cfg: &CutConfig) -> Result<DecompositionStep, PairError> {
    let l = pair.l();
    let len = pair.curve.length();
    let min_len = l.powf(-0.5);
    if !(len >= min_len * (1.0 - 1e-9) && tol_le(len, substandard_max_len(cfg.a0, l))) {
        return Err(PairError::InvariantViolation(format!(
            "cut_substandard needs |I| in [L^-1/2, a0], got {len}"
        )));
    }
    if !tol_le(pair.log_derivative_bound(), 2.0 * C0 * l.sqrt()) {
        return Err(PairError::InvariantViolation(format!(
            "substandard log-derivative bound {} exceeds 2 C0 L^1/2",
            pair.log_derivative_bound()
        )));
    }
    let mut b = Builder::new(pair, *cfg)?;
    let (a, e) = pair.curve.domain();
    if meets_strips(&b.s12, a, e) {
        return Err(PairError::InvariantViolation("substandard curve meets S_1/2".into()));
    }
    let m = if len > 2.0 * min_len { (len * l.sqrt()).floor().max(1.0) as usize } else { 1 };
    for i in 0..m {
        let p = a + len * i as f64 / m as f64;
        let q = if i + 1 == m { e } else { a + len * (i + 1) as f64 / m as f64 };
        b.component((p, q), MassClass::I, Leftovers::Classify)?;
    }
    Ok(b.finish())
}

/// Decomposition of the image of a fully crossing standard pair.
pub fn cut_full(pair: &MeasurePair, cfg: &CutConfig) -> Result<DecompositionStep, PairError> {
    if !(pair.curve.is_fully_crossing() && tol_le(pair.log_derivative_bound(), 3.0 * C0)) {
        return Err(PairError::InvariantViolation(format!(
            "cut_full needs a fully crossing pair with bound <= 3 C0 (|I| = {}, bound = {})",
            pair.curve.length(),
            pair.log_derivative_bound()
        )));
    }
    let mut b = Builder::new(pair, *cfg)?;
    let s14 = critical_intervals(b.l, 0.25)?;
    let (a, e) = pair.curve.domain();
    let inner = strip_copies(&s14, a, e);
    for &(p, q) in &inner {
        b.send_to_e(p, q)?;
    }
    let outer = strip_copies(&b.s12, a, e);
    let comps = complement(a, e, &outer);
    check_components(&comps)?;
    for c in comps {
        b.component(c, MassClass::L, Leftovers::Classify)?;
    }
    for &(p, q) in &outer {
        for (z0, z1) in complement(p, q, &inner) {
            b.zone((z0, z1))?;
        }
    }
    Ok(b.finish())
}

/// Applies the cut matching the pair's regularity.
pub fn cut(pair: &MeasurePair, cfg: &CutConfig) -> Result<DecompositionStep, PairError> {
    match pair.regularity {
        Regularity::FullCrossing => cut_full(pair, cfg),
        Regularity::Standard => cut_standard(pair, cfg),
        Regularity::Substandard => cut_substandard(pair, cfg),
    }
}

/// Density of the normalized pushforward of `pair` restricted to the part
/// whose image is the lifted interval `image`; the preimage must avoid `S_eta`.
pub fn transport_density(pair: &MeasurePair, image: (f64, f64), eta: f64) -> Result<PairDensity, PairError> {
    let l = pair.l();
    let (t0, t1) = (image.0.min(image.1), image.0.max(image.1));
    if !(t1 - t0 > 0.0 && t1 - t0 <= 1.0) {
        return Err(PairError::InvariantViolation(format!(
            "image subinterval must have length in (0, 1], got {}",
            t1 - t0
        )));
    }
    let strips = critical_intervals(l, eta)?;
    let (a, e) = pair.curve.domain();
    let mut ev = pair.curve.evaluator();
    let (mut lo_all, mut hi_all) = (f64::INFINITY, f64::NEG_INFINITY);
    let cuts = strip_copies(&strips, a, e);
    for &(p, q) in &cuts {
        // f_gamma turns inside the strips, so scan them rather than their ends
        for i in 0..=32 {
            let x = p + (q - p) * i as f64 / 32.0;
            let (v, _) = ev.f_gamma(x)?;
            lo_all = lo_all.min(v);
            hi_all = hi_all.max(v);
        }
    }
    for c in complement(a, e, &cuts) {
        let (fa, _) = ev.f_gamma(c.0)?;
        let (fb, _) = ev.f_gamma(c.1)?;
        let (lo, hi) = (fa.min(fb), fa.max(fb));
        lo_all = lo_all.min(lo);
        hi_all = hi_all.max(hi);
        if t0 >= lo && t1 <= hi {
            let u0 = preimage(&mut ev, t0, c)?;
            let u1 = preimage(&mut ev, t1, c)?;
            let branch = (u0.min(u1), u0.max(u1));
            let mass = ev.mass(branch.0, branch.1)?;
            let shift = t0.floor();
            let curve = UCurve::child(&pair.curve, branch, shift, (t0 - shift, t1 - shift), mass.ln());
            let bound = l.powf(-eta) * pair.log_derivative_bound() + C0 * l.powf(1.0 - 2.0 * eta);
            return Ok(PairDensity::new(curve, bound));
        }
    }
    if t1 < lo_all || t0 > hi_all {
        return Err(PairError::BracketError {
            target: t0,
            range: (lo_all, hi_all),
        });
    }
    Err(PairError::StripOverlap { interval: (t0, t1), eta })
}
