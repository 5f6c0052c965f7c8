//! Log Fano pairs `(X, Delta)` on Bott-tower fans: boundary selection,
//! dual complexes, maximality, stratum lines, complements, complexity,
//! the structure-report assertion bundle, and the desk-scale classifier.

use std::collections::BTreeSet;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bott::{build_fan, BottTowerSpec, RayLabel};
use crate::divisors::{
    canonical_divisor, divisor_class, intersection_number, nef_value, picard_rank, positivity,
    restrict_to_stratum, wall_curve_class, walls, ClassContext, Positivity, ToricDivisor, Wall,
};
use crate::error::{Error, Result};
use crate::fan::{pair_isomorphic, star_fan, Cone, Fan};
use crate::linalg::{spans_lattice, Rat};

/// A pair `(X, Delta)` given by a fan and the ray indices of the boundary
/// components, with `L = -K - Delta` cached.
#[derive(Debug, Clone)]
pub struct LogFanoPair {
    pub fan: Fan,
    pub boundary: BTreeSet<usize>,
    pub l: ToricDivisor,
}

impl LogFanoPair {
    pub fn new(fan: Fan, boundary: BTreeSet<usize>) -> Result<Self> {
        if let Some(&bad) = boundary.iter().find(|&&r| r >= fan.rays().len()) {
            return Err(Error::InvalidInput(format!(
                "boundary ray {bad} out of range"
            )));
        }
        let delta = ToricDivisor::boundary(&fan, boundary.iter().copied());
        let l = canonical_divisor(&fan).scale(-1).sub(&delta);
        Ok(LogFanoPair { fan, boundary, l })
    }

    pub fn delta(&self) -> ToricDivisor {
        ToricDivisor::boundary(&self.fan, self.boundary.iter().copied())
    }

    pub fn dimension(&self) -> usize {
        self.fan.ambient_rank()
    }
}

/// `-K - Delta` ample?
pub fn is_log_fano(fan: &Fan, boundary: &BTreeSet<usize>) -> Result<bool> {
    let pair = LogFanoPair::new(fan.clone(), boundary.clone())?;
    Ok(positivity(fan, &pair.l)? == Positivity::Ample)
}

/// Dual intersection complex of the boundary: the boundary-ray subsets
/// spanning a cone of the fan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualComplexRecord {
    pub cells: BTreeSet<Vec<usize>>,
    pub vertex_count: usize,
}

impl DualComplexRecord {
    pub fn dimension(&self) -> Option<usize> {
        self.cells.iter().map(|c| c.len() - 1).max()
    }

    /// Does the complex carry every nonempty subset of its vertices?
    pub fn is_simplex(&self) -> bool {
        self.cells.len() == (1usize << self.vertex_count) - 1
    }
}

pub fn dual_complex(pair: &LogFanoPair) -> DualComplexRecord {
    let verts: Vec<usize> = pair.boundary.iter().copied().collect();
    let mut cells = BTreeSet::new();
    for mask in 1u32..(1 << verts.len()) {
        let subset: Vec<usize> = verts
            .iter()
            .enumerate()
            .filter(|&(i, _)| mask & (1 << i) != 0)
            .map(|(_, &r)| r)
            .collect();
        if pair.fan.is_face(&Cone::new(subset.clone())) {
            cells.insert(subset);
        }
    }
    DualComplexRecord {
        cells,
        vertex_count: verts.len(),
    }
}

/// Maximal pair: `n` boundary components. Cross-checked against the
/// equivalent condition that the boundary rays span a maximal cone.
pub fn is_maximal(pair: &LogFanoPair) -> Result<bool> {
    let n = pair.dimension();
    let by_count = pair.boundary.len() == n;
    let sorted: Vec<usize> = pair.boundary.iter().copied().collect();
    let by_cone = pair
        .fan
        .max_cones()
        .iter()
        .any(|c| c.rays() == sorted.as_slice());
    if by_count != by_cone {
        return Err(Error::Internal(
            "boundary has n components but spans no maximal cone (or vice versa)".into(),
        ));
    }
    Ok(by_count)
}

/// The line `l = intersection of all boundary components except the omitted
/// one`, realized as a wall of the fan.
#[derive(Debug, Clone)]
pub struct StratumLine {
    pub omitted: usize,
    pub wall: Wall,
    /// `(ray, D_ray . l)` for each boundary component containing the line
    pub degrees: Vec<(usize, i64)>,
}

impl StratumLine {
    pub fn is_free(&self) -> bool {
        self.degrees.iter().all(|&(_, d)| d >= 0)
    }
}

/// All `n` stratum lines of a maximal pair; `L . l = 1` for each.
pub fn stratum_lines(pair: &LogFanoPair) -> Result<Vec<StratumLine>> {
    if !is_maximal(pair)? {
        return Err(Error::InvalidInput(
            "stratum lines need a maximal pair".into(),
        ));
    }
    let all = walls(&pair.fan)?;
    let mut out = Vec::new();
    for &omitted in &pair.boundary {
        let wall_rays: Vec<usize> = pair
            .boundary
            .iter()
            .copied()
            .filter(|&r| r != omitted)
            .collect();
        let wall = all
            .iter()
            .find(|w| w.rays == wall_rays)
            .cloned()
            .ok_or_else(|| Error::Internal("stratum line wall missing".into()))?;
        if intersection_number(&pair.l, &wall) != 1 {
            return Err(Error::Internal(format!(
                "stratum line omitting ray {omitted} has L.l != 1"
            )));
        }
        let degrees = wall_rays
            .iter()
            .map(|&r| {
                let mut coeffs = vec![0i64; pair.fan.rays().len()];
                coeffs[r] = 1;
                (r, intersection_number(&ToricDivisor { coeffs }, &wall))
            })
            .collect();
        out.push(StratumLine {
            omitted,
            wall,
            degrees,
        });
    }
    Ok(out)
}

/// The free stratum lines (nonnegative degrees on every containing component).
pub fn free_lines(pair: &LogFanoPair) -> Result<Vec<StratumLine>> {
    Ok(stratum_lines(pair)?
        .into_iter()
        .filter(StratumLine::is_free)
        .collect())
}

/// The toric 1-complement `Gamma`: all non-boundary prime divisors.
/// Verifies `K + Delta + Gamma ~ 0` and that `Gamma` has `rho` components.
pub fn complement(pair: &LogFanoPair) -> Result<ToricDivisor> {
    let others: Vec<usize> = (0..pair.fan.rays().len())
        .filter(|r| !pair.boundary.contains(r))
        .collect();
    let gamma = ToricDivisor::boundary(&pair.fan, others.iter().copied());
    let total = canonical_divisor(&pair.fan).add(&pair.delta()).add(&gamma);
    if divisor_class(&pair.fan, &total)
        .coords
        .iter()
        .any(|&c| c != 0)
    {
        return Err(Error::Internal(
            "K + Delta + Gamma is not linearly trivial".into(),
        ));
    }
    if is_maximal(pair)? && others.len() != picard_rank(&pair.fan) {
        return Err(Error::Internal(
            "complement component count differs from rho".into(),
        ));
    }
    Ok(gamma)
}

/// Complexity `n + rho - (sum of boundary coefficients)`.
pub fn complexity(fan: &Fan, d: &ToricDivisor) -> Rat {
    let total: i64 = d.coeffs.iter().sum();
    Ratio::from_integer(fan.ambient_rank() as i64 + picard_rank(fan) as i64 - total)
}

/// One free-line contraction record in the structure report.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct FreeLineCase {
    /// the unique boundary component not containing the line
    pub omitted: usize,
    /// number of section components (those with `D . l = 1`)
    pub k: usize,
    /// all degrees on the line lie in {0, 1}
    pub degrees_zero_one: bool,
    /// the section components span a cone of the fan
    pub section_is_stratum: bool,
    /// `rho(X) = rho(D_omitted) + 1` when `k = 1`, `= rho(D_omitted)` when `k >= 2`
    pub rho_relation: bool,
}

/// Computational witnesses for the structure assertions on a maximal pair.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct StructureReport {
    /// every wall class is a nonnegative rational combination of stratum-line classes
    pub mori_cone_generated: bool,
    /// boundary divisor classes generate the class group over the integers
    pub boundary_generates_picard: bool,
    /// a boundary component that is nef with nef self-restriction
    pub nef_component: Option<usize>,
    pub free_line_cases: Vec<FreeLineCase>,
    /// number of free-line contractions needed to reach a point (= rho)
    pub tower_stages: Option<usize>,
}

impl StructureReport {
    pub fn all_ok(&self, rho: usize) -> bool {
        self.mori_cone_generated
            && self.boundary_generates_picard
            && self.nef_component.is_some()
            && !self.free_line_cases.is_empty()
            && self
                .free_line_cases
                .iter()
                .all(|c| c.degrees_zero_one && c.section_is_stratum && c.rho_relation)
            && self.tower_stages == Some(rho)
    }
}

/// Exact check that `x` lies in the rational cone generated by `gens`:
/// enumerate linearly independent generator subsets and solve each square
/// subsystem exactly (Caratheodory reduces conic membership to these).
fn in_rational_cone(gens: &[Vec<i64>], x: &[i64]) -> bool {
    let dim = x.len();
    if x.iter().all(|&c| c == 0) {
        return true;
    }
    let n = gens.len();
    for mask in 1u32..(1 << n) {
        let subset: Vec<&Vec<i64>> = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| &gens[i])
            .collect();
        if subset.len() > dim {
            continue;
        }
        if let Some(sol) = solve_unique(&subset, x) {
            if sol.iter().all(|c| *c >= Ratio::from_integer(0)) {
                return true;
            }
        }
    }
    false
}

/// Solve `sum_j lambda_j cols[j] = x` when the columns are linearly
/// independent; `None` if dependent or inconsistent.
fn solve_unique(cols: &[&Vec<i64>], x: &[i64]) -> Option<Vec<Rat>> {
    let rows = x.len();
    let k = cols.len();
    let mut a: Vec<Vec<Rat>> = (0..rows)
        .map(|r| {
            let mut row: Vec<Rat> = cols.iter().map(|c| Ratio::from_integer(c[r])).collect();
            row.push(Ratio::from_integer(x[r]));
            row
        })
        .collect();
    let mut pivot_row = 0;
    let mut pivots = Vec::new();
    for col in 0..k {
        let Some(p) = (pivot_row..rows).find(|&r| a[r][col] != Ratio::from_integer(0)) else {
            return None; // dependent columns
        };
        a.swap(pivot_row, p);
        let inv = a[pivot_row][col];
        for c in col..=k {
            a[pivot_row][c] = a[pivot_row][c] / inv;
        }
        for r in 0..rows {
            if r != pivot_row && a[r][col] != Ratio::from_integer(0) {
                let f = a[r][col];
                for c in col..=k {
                    let sub = f * a[pivot_row][c];
                    a[r][c] = a[r][c] - sub;
                }
            }
        }
        pivots.push(pivot_row);
        pivot_row += 1;
    }
    // consistency on the remaining rows
    if (pivot_row..rows).any(|r| a[r][k] != Ratio::from_integer(0)) {
        return None;
    }
    Some((0..k).map(|i| a[pivots[i]][k]).collect())
}

/// Run every structure assertion on a maximal log Fano pair.
pub fn verify_structure(pair: &LogFanoPair) -> Result<StructureReport> {
    if !is_maximal(pair)? {
        return Err(Error::InvalidInput(
            "structure report needs a maximal pair".into(),
        ));
    }
    let fan = &pair.fan;
    let ctx = ClassContext::new(fan);
    let rho = picard_rank(fan);
    let lines = stratum_lines(pair)?;

    // (a) Mori cone generated by stratum-line classes
    let line_classes: Vec<Vec<i64>> = lines
        .iter()
        .map(|l| wall_curve_class(fan, &ctx, &l.wall))
        .collect();
    let mori_cone_generated = walls(fan)?
        .iter()
        .all(|w| in_rational_cone(&line_classes, &wall_curve_class(fan, &ctx, w)));

    // (b) boundary classes generate the class group over Z
    let boundary_rows: Vec<Vec<i64>> = pair
        .boundary
        .iter()
        .map(|&r| {
            let mut coeffs = vec![0i64; fan.rays().len()];
            coeffs[r] = 1;
            ctx.coords(fan, &ToricDivisor { coeffs })
        })
        .collect();
    let boundary_generates_picard = rho == 0 || spans_lattice(&boundary_rows);

    // (c) a basepoint-free boundary component: nef, with nef self-restriction
    let mut nef_component = None;
    for &r in &pair.boundary {
        let d = ToricDivisor::boundary(fan, [r]);
        if positivity(fan, &d)? == Positivity::NotNef {
            continue;
        }
        let (star, normal) = restrict_to_stratum(fan, &d, &Cone::new(vec![r]))?;
        if star.fan.ambient_rank() == 0 || positivity(&star.fan, &normal)? != Positivity::NotNef {
            nef_component = Some(r);
            break;
        }
    }

    // (d) the fiber/section dichotomy on every free line
    let mut free_line_cases = Vec::new();
    for line in lines.iter().filter(|l| l.is_free()) {
        let degrees_zero_one = line.degrees.iter().all(|&(_, d)| d == 0 || d == 1);
        let mut section: Vec<usize> = line
            .degrees
            .iter()
            .filter(|&&(_, d)| d == 1)
            .map(|&(r, _)| r)
            .collect();
        section.push(line.omitted); // the omitted component meets l once
        section.sort_unstable();
        let k = section.len();
        let section_is_stratum = fan.is_face(&Cone::new(section));
        let omitted_star = star_fan(fan, &Cone::new(vec![line.omitted]))?;
        let rho_omitted = picard_rank(&omitted_star.fan);
        let rho_relation = if k == 1 {
            rho == rho_omitted + 1
        } else {
            rho == rho_omitted
        };
        free_line_cases.push(FreeLineCase {
            omitted: line.omitted,
            k,
            degrees_zero_one,
            section_is_stratum,
            rho_relation,
        });
    }

    // (e) tower witness: contract along free lines until nothing is left
    let tower_stages = tower_witness(pair)?;

    Ok(StructureReport {
        mori_cone_generated,
        boundary_generates_picard,
        nef_component,
        free_line_cases,
        tower_stages,
    })
}

/// Iterate free-line contractions (pass to the section stratum with the
/// fiber components as its boundary); count steps to reach a point.
fn tower_witness(pair: &LogFanoPair) -> Result<Option<usize>> {
    let mut current = pair.clone();
    let mut steps = 0usize;
    while current.dimension() > 0 {
        if steps > pair.fan.rays().len() {
            return Ok(None); // no convergence; report failure, not an error
        }
        let lines = stratum_lines(&current)?;
        let Some(line) = lines.iter().find(|l| l.is_free()) else {
            return Ok(None);
        };
        let mut section: Vec<usize> = line
            .degrees
            .iter()
            .filter(|&&(_, d)| d == 1)
            .map(|&(r, _)| r)
            .collect();
        section.push(line.omitted);
        let tau = Cone::new(section.clone());
        if !current.fan.is_face(&tau) {
            return Ok(None);
        }
        let star = star_fan(&current.fan, &tau)?;
        let new_boundary: BTreeSet<usize> = current
            .boundary
            .iter()
            .filter(|r| !section.contains(r))
            .map(|r| star.ray_map[r])
            .collect();
        current = LogFanoPair::new(star.fan, new_boundary)?;
        if !is_log_fano(&current.fan, &current.boundary)? && current.dimension() > 0 {
            return Ok(None);
        }
        steps += 1;
    }
    Ok(Some(steps))
}

/// One normal form in the classification output.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ClassificationEntry {
    pub spec: BottTowerSpec,
    /// boundary rays as (stage, k) labels
    pub boundary: Vec<RayLabel>,
    pub rho: usize,
    /// nef value of L as "p/q"
    pub tau: String,
    pub gamma_components: usize,
    pub free_lines: usize,
    pub structure_ok: bool,
    /// canonical fan serialization (dedup tie-break key)
    pub fan: String,
}

/// Compact exact rendering of a rational: `3`, `5/2`, `-1/3`.
pub fn ratio_string(r: Rat) -> String {
    if *r.denom() == 1 {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Enumerate all compositions of `n` into positive parts.
fn compositions(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 1..=n {
        for mut rest in compositions(n - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// All twist tensors for the given stage dimensions with entries in
/// `[-bound, bound]`.
fn twist_tensors(dims: &[usize], bound: i64) -> Vec<Vec<Vec<Vec<i64>>>> {
    // flatten the slots, enumerate an odometer, then reshape
    let slots: usize = dims.iter().enumerate().skip(1).map(|(i, &ni)| ni * i).sum();
    let width = (2 * bound + 1) as usize;
    let total = width
        .checked_pow(slots as u32)
        .expect("twist window too large");
    let mut out = Vec::with_capacity(total);
    for idx in 0..total {
        let mut digits = idx;
        let mut tensor = Vec::with_capacity(dims.len().saturating_sub(1));
        for (i, &ni) in dims.iter().enumerate().skip(1) {
            let mut block = Vec::with_capacity(ni);
            for _ in 0..ni {
                let mut v = Vec::with_capacity(i);
                for _ in 0..i {
                    v.push((digits % width) as i64 - bound);
                    digits /= width;
                }
                block.push(v);
            }
            tensor.push(block);
        }
        out.push(tensor);
    }
    out
}

/// Classify maximal log Fano Bott-tower pairs of dimension `n` within the
/// twist window `|a| <= bound`, up to pair isomorphism.
pub fn classify(n: usize, bound: i64) -> Result<Vec<ClassificationEntry>> {
    if n == 0 {
        return Err(Error::InvalidInput("dimension must be positive".into()));
    }
    if bound < 0 {
        return Err(Error::InvalidInput(
            "twist bound must be nonnegative".into(),
        ));
    }
    let mut specs = Vec::new();
    for dims in compositions(n) {
        for twists in twist_tensors(&dims, bound) {
            specs.push(BottTowerSpec::new(dims.clone(), twists)?);
        }
    }

    // independent candidate pipeline, deterministic ordering by construction
    let candidates: Vec<(BottTowerSpec, Vec<usize>, Fan)> = specs
        .par_iter()
        .map(|spec| -> Result<Vec<(BottTowerSpec, Vec<usize>, Fan)>> {
            let fan = build_fan(spec)?;
            let mut found = Vec::new();
            for cone in fan.max_cones() {
                let boundary: BTreeSet<usize> = cone.rays().iter().copied().collect();
                if is_log_fano(&fan, &boundary)? {
                    found.push((spec.clone(), cone.rays().to_vec(), fan.clone()));
                }
            }
            Ok(found)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    // single-owner dedup by exact pair isomorphism, with certificate pruning
    let mut kept: Vec<(BottTowerSpec, Vec<usize>, Fan, Certificate)> = Vec::new();
    for (spec, boundary, fan) in candidates {
        let cert = Certificate::new(&fan, &boundary)?;
        let bset: BTreeSet<usize> = boundary.iter().copied().collect();
        let mut duplicate = None;
        for (i, (_, kb, kf, kc)) in kept.iter().enumerate() {
            if *kc != cert {
                continue;
            }
            let kbset: BTreeSet<usize> = kb.iter().copied().collect();
            if pair_isomorphic(&fan, &bset, kf, &kbset).is_some() {
                duplicate = Some(i);
                break;
            }
        }
        match duplicate {
            Some(i) => {
                // keep the lexicographically least canonical presentation
                let old_key = presentation_key(&kept[i].0, &kept[i].1, &kept[i].2);
                let new_key = presentation_key(&spec, &boundary, &fan);
                if new_key < old_key {
                    kept[i] = (spec, boundary, fan, cert);
                }
            }
            None => kept.push((spec, boundary, fan, cert)),
        }
    }
    kept.sort_by(|a, b| {
        presentation_key(&a.0, &a.1, &a.2).cmp(&presentation_key(&b.0, &b.1, &b.2))
    });

    let mut out = Vec::new();
    for (spec, boundary, fan, _) in kept {
        let bset: BTreeSet<usize> = boundary.iter().copied().collect();
        let pair = LogFanoPair::new(fan.clone(), bset)?;
        let (tau, _) = nef_value(&fan, &pair.l)?;
        let gamma = complement(&pair)?;
        let report = verify_structure(&pair)?;
        let rho = picard_rank(&fan);
        out.push(ClassificationEntry {
            boundary: boundary.iter().map(|&r| spec.ray_label(r)).collect(),
            spec,
            rho,
            tau: ratio_string(tau),
            gamma_components: gamma.coeffs.iter().filter(|&&c| c != 0).count(),
            free_lines: free_lines(&pair)?.len(),
            structure_ok: report.all_ok(rho),
            fan: fan.to_canonical_text(),
        });
    }
    Ok(out)
}

/// Cheap isomorphism-invariant fingerprint used to prune pair-iso searches.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Certificate {
    rays: usize,
    cones: usize,
    tau: Rat,
    line_degree_multiset: Vec<Vec<i64>>,
}

impl Certificate {
    fn new(fan: &Fan, boundary: &[usize]) -> Result<Certificate> {
        let bset: BTreeSet<usize> = boundary.iter().copied().collect();
        let pair = LogFanoPair::new(fan.clone(), bset)?;
        let (tau, _) = nef_value(fan, &pair.l)?;
        let mut degs: Vec<Vec<i64>> = stratum_lines(&pair)?
            .iter()
            .map(|l| {
                let mut d: Vec<i64> = l.degrees.iter().map(|&(_, x)| x).collect();
                d.sort_unstable();
                d
            })
            .collect();
        degs.sort();
        Ok(Certificate {
            rays: fan.rays().len(),
            cones: fan.max_cones().len(),
            tau,
            line_degree_multiset: degs,
        })
    }
}

fn presentation_key(spec: &BottTowerSpec, boundary: &[usize], fan: &Fan) -> impl Ord {
    (fan.to_canonical_text(), spec.clone(), boundary.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bott::blowup_point_spec;
    use crate::fan::projective_space_fan;

    fn hirzebruch(l: i64) -> (Fan, BTreeSet<usize>) {
        let spec = BottTowerSpec::new(vec![1, 1], vec![vec![vec![l]]]).unwrap();
        // boundary = negative section (e2) + fiber (e1)
        (build_fan(&spec).unwrap(), BTreeSet::from([0, 1]))
    }

    fn pair(fan: &Fan, boundary: impl IntoIterator<Item = usize>) -> LogFanoPair {
        LogFanoPair::new(fan.clone(), boundary.into_iter().collect()).unwrap()
    }

    #[test]
    fn p2_two_lines_is_log_fano_and_maximal() {
        let fan = projective_space_fan(2);
        assert!(is_log_fano(&fan, &BTreeSet::from([0, 1])).unwrap());
        let p = pair(&fan, [0, 1]);
        assert!(is_maximal(&p).unwrap());
        assert!(!is_maximal(&pair(&fan, [0])).unwrap());
    }

    #[test]
    fn hirzebruch_pairs() {
        for l in 0..=5 {
            let (fan, boundary) = hirzebruch(l);
            assert!(is_log_fano(&fan, &boundary).unwrap(), "(F_{l}, s+f)");
        }
        // positive section + fiber fails for l >= 1
        let spec = BottTowerSpec::new(vec![1, 1], vec![vec![vec![2]]]).unwrap();
        let fan = build_fan(&spec).unwrap();
        assert!(!is_log_fano(&fan, &BTreeSet::from([0, 3])).unwrap());
    }

    #[test]
    fn p3_two_hyperplanes_not_maximal() {
        let fan = projective_space_fan(3);
        assert!(!is_maximal(&pair(&fan, [0, 1])).unwrap());
    }

    #[test]
    fn dual_complexes_are_simplices() {
        let p = pair(&projective_space_fan(2), [0, 1]);
        let dc = dual_complex(&p);
        assert!(dc.is_simplex());
        assert_eq!(dc.dimension(), Some(1));

        let (fan, boundary) = hirzebruch(2);
        let dc = dual_complex(&LogFanoPair::new(fan, boundary).unwrap());
        assert!(dc.is_simplex());
        assert_eq!(dc.dimension(), Some(1));

        let cube = build_fan(&BottTowerSpec::product(vec![1, 1, 1]).unwrap()).unwrap();
        let dc = dual_complex(&pair(&cube, [0, 1, 2]));
        assert!(dc.is_simplex());
        assert_eq!(dc.dimension(), Some(2));
    }

    #[test]
    fn stratum_lines_on_surfaces() {
        let p = pair(&projective_space_fan(2), [0, 1]);
        let lines = stratum_lines(&p).unwrap();
        assert_eq!(lines.len(), 2);
        for l in &lines {
            assert_eq!(l.degrees.len(), 1);
            assert_eq!(l.degrees[0].1, 1);
        }
        assert_eq!(free_lines(&p).unwrap().len(), 2);

        for l in 1..=4 {
            let (fan, boundary) = hirzebruch(l);
            let p = LogFanoPair::new(fan, boundary).unwrap();
            let lines = stratum_lines(&p).unwrap();
            assert_eq!(lines.len(), 2);
            let free = free_lines(&p).unwrap();
            assert_eq!(free.len(), 1, "only the fiber is free on F_{l}");
            // the fiber line is cut out by the section, omitting it
            assert_eq!(free[0].omitted, 1);
            let s_line = lines.iter().find(|x| x.omitted == 0).unwrap();
            assert_eq!(s_line.degrees, vec![(1, -l)]);
        }

        let (fan, boundary) = hirzebruch(0);
        let p = LogFanoPair::new(fan, boundary).unwrap();
        assert_eq!(free_lines(&p).unwrap().len(), 2);
    }

    #[test]
    fn complement_and_complexity() {
        let p = pair(&projective_space_fan(2), [0, 1]);
        let gamma = complement(&p).unwrap();
        assert_eq!(gamma.coeffs, vec![0, 0, 1]);
        let total = p.delta().add(&gamma);
        assert_eq!(complexity(&p.fan, &total), Rat::from_integer(0));
        assert_eq!(complexity(&p.fan, &p.delta()), Rat::from_integer(1));

        let (fan, boundary) = hirzebruch(3);
        let p = LogFanoPair::new(fan, boundary).unwrap();
        let gamma = complement(&p).unwrap();
        assert_eq!(gamma.coeffs.iter().filter(|&&c| c != 0).count(), 2);
        assert_eq!(
            complexity(&p.fan, &p.delta().add(&gamma)),
            Rat::from_integer(0)
        );
    }

    #[test]
    fn structure_reports_pass() {
        let p = pair(&projective_space_fan(2), [0, 1]);
        let r = verify_structure(&p).unwrap();
        assert!(r.all_ok(1), "{r:?}");
        // two free lines, both with k=2 and a 0-dimensional section
        assert_eq!(r.free_line_cases.len(), 2);
        assert!(r.free_line_cases.iter().all(|c| c.k == 2));

        let (fan, boundary) = hirzebruch(1);
        let p = LogFanoPair::new(fan, boundary).unwrap();
        let r = verify_structure(&p).unwrap();
        assert!(r.all_ok(2), "{r:?}");
        assert_eq!(r.free_line_cases.len(), 1);
        assert_eq!(r.free_line_cases[0].k, 1);

        let cube = build_fan(&BottTowerSpec::product(vec![1, 1, 1]).unwrap()).unwrap();
        let p = pair(&cube, [0, 1, 2]);
        let r = verify_structure(&p).unwrap();
        assert!(r.all_ok(3), "{r:?}");
        assert_eq!(r.tower_stages, Some(3));
    }

    #[test]
    fn blowup_point_structure() {
        for n in 2..=4 {
            let spec = blowup_point_spec(n).unwrap();
            let fan = build_fan(&spec).unwrap();
            let boundary: BTreeSet<usize> = (0..n).collect();
            assert!(is_log_fano(&fan, &boundary).unwrap());
            let p = LogFanoPair::new(fan, boundary).unwrap();
            assert!(is_maximal(&p).unwrap());
            let r = verify_structure(&p).unwrap();
            assert!(r.all_ok(2), "n={n}: {r:?}");
        }
    }

    #[test]
    fn adjunction_closure_on_examples() {
        // every proper boundary stratum yields a maximal log Fano star pair
        let cases: Vec<(Fan, BTreeSet<usize>)> = vec![
            (projective_space_fan(3), (0..3).collect()),
            hirzebruch(2),
            (
                build_fan(&blowup_point_spec(3).unwrap()).unwrap(),
                (0..3).collect(),
            ),
        ];
        for (fan, boundary) in cases {
            let p = LogFanoPair::new(fan.clone(), boundary.clone()).unwrap();
            let dc = dual_complex(&p);
            for cell in &dc.cells {
                if cell.len() == p.dimension() {
                    continue; // 0-dimensional stratum
                }
                let tau = Cone::new(cell.clone());
                let star = star_fan(&fan, &tau).unwrap();
                let nb: BTreeSet<usize> = boundary
                    .iter()
                    .filter(|r| !cell.contains(r))
                    .map(|r| star.ray_map[r])
                    .collect();
                assert!(is_log_fano(&star.fan, &nb).unwrap(), "stratum {cell:?}");
                let sp = LogFanoPair::new(star.fan, nb).unwrap();
                assert!(is_maximal(&sp).unwrap());
            }
        }
    }

    #[test]
    fn classify_dimension_one() {
        let entries = classify(1, 5).unwrap();
        assert_eq!(entries.len(), 1);
        assert_eq!(entries[0].spec.dims, vec![1]);
        assert_eq!(entries[0].rho, 1);
    }

    #[test]
    fn classify_surfaces() {
        let entries = classify(2, 10).unwrap();
        // P^2 with two lines, and (F_a, s+f) for 0 <= a <= 10
        assert_eq!(entries.len(), 12, "{entries:#?}");
        assert!(entries.iter().all(|e| e.structure_ok));
        let p2 = entries.iter().filter(|e| e.rho == 1).count();
        assert_eq!(p2, 1);
        assert_eq!(entries.iter().filter(|e| e.rho == 2).count(), 11);
    }

    #[test]
    fn classify_monotone_in_bound() {
        let small = classify(2, 2).unwrap();
        let large = classify(2, 4).unwrap();
        for e in &small {
            assert!(
                large
                    .iter()
                    .any(|f| f.fan == e.fan && f.boundary == e.boundary),
                "entry lost when enlarging the window: {e:?}"
            );
        }
    }

    #[test]
    fn cone_membership_solver() {
        let gens = vec![vec![1, 0], vec![1, 1]];
        assert!(in_rational_cone(&gens, &[2, 1]));
        assert!(in_rational_cone(&gens, &[0, 0]));
        assert!(!in_rational_cone(&gens, &[-1, 0]));
        assert!(!in_rational_cone(&gens, &[0, -1]));
        assert!(!in_rational_cone(&gens, &[-1, 1]));
    }
}
