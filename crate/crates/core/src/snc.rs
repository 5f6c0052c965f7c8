//! Simple-normal-crossings Fano models: toric log Fano components glued
//! combinatorially along boundary strata, d-semistability verification, the
//! maximal degeneration built from `n + 1` flag blow-ups of projective space,
//! and a desk-scale uniqueness search.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bott::{build_fan, BottTowerSpec, RayLabel};
use crate::divisors::{divisor_class, restrict_to_stratum, ToricDivisor};
use crate::error::{Error, Result};
use crate::fan::{fan_isomorphisms_with, star_fan, Cone, Fan, LatticeMap, StarFan};
use crate::linalg::{det, mat_mul, rat_vec, solve_rational, vec_mat, Mat};
use crate::logfano::{classify, is_log_fano, is_maximal, LogFanoPair};

/// Identification of the double intersection `X_i cap X_j`, stored as a fan
/// isomorphism between the two star fans.
#[derive(Debug, Clone)]
pub struct Gluing {
    pub i: usize,
    /// boundary ray of component `i` cut out by `X_j`
    pub ray_i: usize,
    pub j: usize,
    pub ray_j: usize,
    /// lattice map from `star(X_i, ray_i)` coordinates to `star(X_j, ray_j)`
    pub map: LatticeMap,
    /// star-ray bijection induced by `map` (index on side `i` -> side `j`)
    pub ray_perm: Vec<usize>,
}

/// A simple-normal-crossings model: components with incidence labels and
/// explicit stratum identifications. Purely combinatorial; no global scheme.
#[derive(Debug, Clone)]
pub struct SncModel {
    pub components: Vec<LogFanoPair>,
    /// per component: boundary ray index -> index of the component met there
    pub incidence: Vec<BTreeMap<usize, usize>>,
    /// one gluing per unordered pair of meeting components, stored with i < j
    pub gluings: Vec<Gluing>,
}

impl SncModel {
    pub fn dimension(&self) -> usize {
        self.components.first().map_or(0, LogFanoPair::dimension)
    }

    pub fn gluing(&self, i: usize, j: usize) -> Option<&Gluing> {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.gluings.iter().find(|g| g.i == a && g.j == b)
    }

    /// Boundary ray of component `i` along which it meets component `j`.
    pub fn ray_toward(&self, i: usize, j: usize) -> Option<usize> {
        self.incidence[i]
            .iter()
            .find(|&(_, &c)| c == j)
            .map(|(&r, _)| r)
    }

    /// Cells of the dual complex: component sets with a common stratum.
    pub fn dual_complex_cells(&self) -> BTreeSet<BTreeSet<usize>> {
        let mut cells: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
        for (i, comp) in self.components.iter().enumerate() {
            cells.insert(BTreeSet::from([i]));
            let rays: Vec<usize> = self.incidence[i].keys().copied().collect();
            for size in 1..=rays.len() {
                for subset in rays.iter().combinations(size) {
                    let cone = Cone::new(subset.iter().map(|&&r| r).collect());
                    if comp.fan.is_face(&cone) {
                        let mut cell: BTreeSet<usize> =
                            subset.iter().map(|&&r| self.incidence[i][&r]).collect();
                        cell.insert(i);
                        cells.insert(cell);
                    }
                }
            }
        }
        cells
    }

    pub fn dual_complex_dimension(&self) -> usize {
        self.dual_complex_cells()
            .iter()
            .map(|c| c.len() - 1)
            .max()
            .unwrap_or(0)
    }
}

/// Per-pair d-semistability verdict: the class on the double intersection of
/// `N_{D/X_i} (x) N_{D/X_j} (x) (x)_{k != i,j} O_D(X_k|_D)`, which must vanish.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct DssPairReport {
    pub i: usize,
    pub j: usize,
    /// class coordinates of the total divisor on the reference star fan
    pub class: Vec<i64>,
    pub trivial: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct DssReport {
    pub pairs: Vec<DssPairReport>,
}

impl DssReport {
    pub fn all_pass(&self) -> bool {
        self.pairs.iter().all(|p| p.trivial)
    }
}

/// Serializable view of a model: canonical fan text per component, boundary
/// ray indices, incidence as sorted `(ray, component)` pairs, and explicit
/// gluing matrices.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ModelFile {
    pub components: Vec<ComponentRecord>,
    pub incidence: Vec<Vec<(usize, usize)>>,
    pub gluings: Vec<GluingRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ComponentRecord {
    pub fan: String,
    pub boundary: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct GluingRecord {
    pub i: usize,
    pub ray_i: usize,
    pub j: usize,
    pub ray_j: usize,
    pub matrix: Mat,
    pub ray_perm: Vec<usize>,
}

impl SncModel {
    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            components: self
                .components
                .iter()
                .map(|c| ComponentRecord {
                    fan: c.fan.to_canonical_text(),
                    boundary: c.boundary.iter().copied().collect(),
                })
                .collect(),
            incidence: self
                .incidence
                .iter()
                .map(|m| m.iter().map(|(&r, &j)| (r, j)).collect())
                .collect(),
            gluings: self
                .gluings
                .iter()
                .map(|g| GluingRecord {
                    i: g.i,
                    ray_i: g.ray_i,
                    j: g.j,
                    ray_j: g.ray_j,
                    matrix: g.map.matrix.clone(),
                    ray_perm: g.ray_perm.clone(),
                })
                .collect(),
        }
    }
}

/// The unique toric log Fano pair appearing as a component of the maximal
/// degeneration: a tower of `n` one-dimensional stages built recursively,
/// each stage the projectivization of `O + O(-Delta)` over the previous pair.
/// Returns the spec and the boundary ray labels (the coordinate rays).
pub fn component_spec(n: usize) -> Result<(BottTowerSpec, Vec<RayLabel>)> {
    if n == 0 {
        return Err(Error::InvalidInput("dimension must be positive".into()));
    }
    let mut spec = BottTowerSpec::new(vec![1], vec![])?;
    let mut boundary_labels: Vec<RayLabel> = vec![(1, 1)];
    for stage in 2..=n {
        let fan = build_fan(&spec)?;
        let ctx = crate::divisors::ClassContext::new(&fan);
        let m = spec.stages();
        // express [Delta] in the basis of the classes [D_{u_i^0}]; the new
        // stage's twist vector is exactly that coordinate vector, so that the
        // added section has normal bundle O(-Delta)
        let delta =
            ToricDivisor::boundary(&fan, boundary_labels.iter().map(|&l| spec.ray_index(l)));
        let basis: Vec<Vec<i64>> = (1..=m)
            .map(|i| {
                let d = ToricDivisor::boundary(&fan, [spec.ray_index((i, 0))]);
                ctx.coords(&fan, &d)
            })
            .collect();
        let rhs = ctx.coords(&fan, &delta);
        // square exact solve: rows are class-coordinate equations
        let rows: Vec<Vec<Ratio<i64>>> = (0..m)
            .map(|r| (0..m).map(|c| Ratio::from_integer(basis[c][r])).collect())
            .collect();
        let sol = solve_rational(&rows, &rat_vec(&rhs))
            .ok_or_else(|| Error::Internal("section-class basis is singular".into()))?;
        let twist: Vec<i64> = sol
            .iter()
            .map(|x| {
                if *x.denom() != 1 {
                    return Err(Error::Internal(
                        "non-integral twist in component spec".into(),
                    ));
                }
                Ok(*x.numer())
            })
            .collect::<Result<_>>()?;
        let mut dims = spec.dims.clone();
        dims.push(1);
        let mut twists = spec.twists.clone();
        twists.push(vec![twist]);
        spec = BottTowerSpec::new(dims, twists)?;
        boundary_labels.push((stage, 1));
    }
    // the result must be a maximal log Fano pair
    let fan = build_fan(&spec)?;
    let boundary: BTreeSet<usize> = boundary_labels.iter().map(|&l| spec.ray_index(l)).collect();
    if !is_log_fano(&fan, &boundary)? {
        return Err(Error::Internal("component pair is not log Fano".into()));
    }
    let pair = LogFanoPair::new(fan, boundary.clone())?;
    if !is_maximal(&pair)? {
        return Err(Error::Internal("component pair is not maximal".into()));
    }
    Ok((spec, boundary_labels))
}

/// Boundary rays whose self-restriction class vanishes (trivial normal bundle).
pub fn trivial_normal_rays(pair: &LogFanoPair) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for &r in &pair.boundary {
        let d = ToricDivisor::boundary(&pair.fan, [r]);
        let (star, res) = restrict_to_stratum(&pair.fan, &d, &Cone::new(vec![r]))?;
        if divisor_class(&star.fan, &res)
            .coords
            .iter()
            .all(|&c| c == 0)
        {
            out.push(r);
        }
    }
    Ok(out)
}

/// Label-compatible gluing isomorphisms between the star fans of two
/// boundary rays: the induced bijection must match the incidence labels on
/// all remaining boundary rays.
fn gluing_candidates(
    comp_i: &LogFanoPair,
    star_i: &StarFan,
    ray_i: usize,
    labels_i: &BTreeMap<usize, usize>,
    comp_j: &LogFanoPair,
    star_j: &StarFan,
    ray_j: usize,
    labels_j: &BTreeMap<usize, usize>,
) -> Vec<(LatticeMap, Vec<usize>)> {
    // required star-ray image for each boundary ray of comp_i other than ray_i
    let mut forced: BTreeMap<usize, usize> = BTreeMap::new();
    for &c in &comp_i.boundary {
        if c == ray_i {
            continue;
        }
        let label = labels_i[&c];
        let Some((&cj, _)) = labels_j.iter().find(|&(_, &l)| l == label) else {
            return Vec::new();
        };
        if cj == ray_j {
            return Vec::new();
        }
        forced.insert(star_i.ray_map[&c], star_j.ray_map[&cj]);
    }
    let _ = comp_j;
    fan_isomorphisms_with(&star_i.fan, &star_j.fan, |perm| {
        forced.iter().all(|(&s, &t)| perm[s] == t)
    })
}

/// Map induced by a star-level lattice map on the star fan of one of its
/// rays: `section_source * map * projection_target`, checked on rays.
fn induced_on_ray_star(
    source: &Fan,
    source_ray: usize,
    target: &Fan,
    target_ray: usize,
    map: &Mat,
    ray_perm: &[usize],
) -> Result<(Mat, BTreeMap<usize, usize>)> {
    let s_star = star_fan(source, &Cone::new(vec![source_ray]))?;
    let t_star = star_fan(target, &Cone::new(vec![target_ray]))?;
    let m = mat_mul(&mat_mul(&s_star.section, map), &t_star.projection);
    // the descended map must send each star ray to its labeled counterpart
    let mut star_perm = BTreeMap::new();
    for (&amb, &s_idx) in &s_star.ray_map {
        let image_amb = ray_perm[amb];
        let t_idx = *t_star
            .ray_map
            .get(&image_amb)
            .ok_or_else(|| Error::Internal("gluing image ray not adjacent".into()))?;
        if vec_mat(s_star.fan.ray(s_idx), &m) != *t_star.fan.ray(t_idx) {
            return Err(Error::Internal(
                "induced star map does not match rays".into(),
            ));
        }
        star_perm.insert(s_idx, t_idx);
    }
    if !m.is_empty() && det(&m).abs() != 1 {
        return Err(Error::Internal("induced star map is not unimodular".into()));
    }
    Ok((m, star_perm))
}

/// Change of presentation between the two iterated-star descriptions of the
/// quotient by rays `x` and `y` of `fan`: from coordinates of
/// `star(star(fan, x), image of y)` to those of `star(star(fan, y), image of x)`.
fn star_order_bridge(fan: &Fan, x: usize, y: usize) -> Result<Mat> {
    let sx = star_fan(fan, &Cone::new(vec![x]))?;
    let sy = star_fan(fan, &Cone::new(vec![y]))?;
    let sxy = star_fan(&sx.fan, &Cone::new(vec![sx.ray_map[&y]]))?;
    let syx = star_fan(&sy.fan, &Cone::new(vec![sy.ray_map[&x]]))?;
    // lift to star(x), lift to N, project to star(y), project to the star of x's image
    let b = mat_mul(
        &mat_mul(&sxy.section, &sx.section),
        &mat_mul(&sy.projection, &syx.projection),
    );
    // sanity: every ambient ray adjacent to <x, y> descends consistently
    for (&amb, &sidx) in &sxy.ray_map {
        // `amb` indexes a ray of star(x); find its ambient preimages
        let pre: Vec<usize> = sx
            .ray_map
            .iter()
            .filter(|&(_, &s)| s == amb)
            .map(|(&a, _)| a)
            .collect();
        for a in pre {
            if a == y {
                continue;
            }
            if let Some(&sy_idx) = sy.ray_map.get(&a) {
                if let Some(&t_idx) = syx.ray_map.get(&sy_idx) {
                    if vec_mat(sxy.fan.ray(sidx), &b) != *syx.fan.ray(t_idx) {
                        return Err(Error::Internal(
                            "star-order bridge disagrees on a ray".into(),
                        ));
                    }
                }
            }
        }
    }
    Ok(b)
}

/// Validate a model: incidence symmetry, gluing coverage, label-compatible
/// star isomorphisms, and the cocycle condition on all triples.
pub fn validate_model(model: &SncModel) -> Result<()> {
    let n = model.dimension();
    for (i, comp) in model.components.iter().enumerate() {
        if comp.dimension() != n {
            return Err(Error::InvalidInput(format!(
                "component {i} has dimension {}, expected {n}",
                comp.dimension()
            )));
        }
        for (&r, &j) in &model.incidence[i] {
            if !comp.boundary.contains(&r) {
                return Err(Error::InvalidInput(format!(
                    "component {i}: incidence on non-boundary ray {r}"
                )));
            }
            if j == i || model.ray_toward(j, i).is_none() {
                return Err(Error::InvalidInput(format!(
                    "incidence {i} -> {j} is not mirrored"
                )));
            }
        }
        let met: Vec<usize> = model.incidence[i].values().copied().collect();
        if met.iter().duplicates().next().is_some() {
            return Err(Error::InvalidInput(format!(
                "component {i} meets some component along two rays"
            )));
        }
    }
    // every meeting pair must carry a gluing whose map matches the stars
    for (i, inc) in model.incidence.iter().enumerate() {
        for (&ri, &j) in inc {
            if i < j {
                let g = model
                    .gluing(i, j)
                    .ok_or_else(|| Error::InvalidInput(format!("missing gluing {i}-{j}")))?;
                if g.ray_i != ri || g.ray_j != model.ray_toward(j, i).unwrap() {
                    return Err(Error::InvalidInput(format!(
                        "gluing {i}-{j} disagrees with the incidence rays"
                    )));
                }
                let si = star_fan(&model.components[i].fan, &Cone::new(vec![g.ray_i]))?;
                let sj = star_fan(&model.components[j].fan, &Cone::new(vec![g.ray_j]))?;
                for (idx, ray) in si.fan.rays().iter().enumerate() {
                    if vec_mat(ray, &g.map.matrix) != *sj.fan.ray(g.ray_perm[idx]) {
                        return Err(Error::InvalidInput(format!(
                            "gluing {i}-{j} map does not realize its ray bijection"
                        )));
                    }
                }
            }
        }
    }
    cocycle_check(model)
}

/// For every unordered triple of pairwise-meeting components, the composite
/// of the induced maps on the triple-stratum star fans must be the identity.
fn cocycle_check(model: &SncModel) -> Result<()> {
    let m = model.components.len();
    for (i, j, k) in (0..m).tuple_combinations() {
        let meets = |a: usize, b: usize| model.ray_toward(a, b).is_some();
        if !(meets(i, j) && meets(j, k) && meets(i, k)) {
            continue;
        }
        let mut acc: Option<Mat> = None;
        // walk i -> j -> k -> i, bridging presentations inside each component
        for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
            let step = triple_step(model, a, b, c)?;
            acc = Some(match acc {
                None => step,
                Some(prev) => mat_mul(&prev, &step),
            });
        }
        let total = acc.unwrap();
        let dim = total.len();
        let is_id = (0..dim).all(|r| (0..dim).all(|c| total[r][c] == i64::from(r == c)));
        if !is_id {
            return Err(Error::Internal(format!(
                "cocycle failure on components ({i},{j},{k})"
            )));
        }
    }
    Ok(())
}

/// One edge of the cocycle walk: from the presentation
/// `star(star(X_a, ray to b), ray to c)` to `star(star(X_b, ray to c), ray to a)`,
/// combining the gluing's induced map with the in-component bridge at `b`.
fn triple_step(model: &SncModel, a: usize, b: usize, c: usize) -> Result<Mat> {
    let ra_b = model.ray_toward(a, b).unwrap();
    let ra_c = model.ray_toward(a, c).unwrap();
    let rb_a = model.ray_toward(b, a).unwrap();
    let rb_c = model.ray_toward(b, c).unwrap();
    let g = model.gluing(a, b).unwrap();
    // orient the stored gluing as a -> b
    let (map, perm): (Mat, Vec<usize>) = if g.i == a {
        (g.map.matrix.clone(), g.ray_perm.clone())
    } else {
        let inv = g.map.inverse().matrix;
        let mut p = vec![0usize; g.ray_perm.len()];
        for (s, &t) in g.ray_perm.iter().enumerate() {
            p[t] = s;
        }
        (inv, p)
    };
    let fa = &model.components[a].fan;
    let fb = &model.components[b].fan;
    let sa = star_fan(fa, &Cone::new(vec![ra_b]))?;
    let sb = star_fan(fb, &Cone::new(vec![rb_a]))?;
    // induced map between star(star(a, ->b), ->c) and star(star(b, ->a), ->c)
    let (induced, _) = {
        let src_ray = sa.ray_map[&ra_c];
        let dst_ray = sb.ray_map[&rb_c];
        let star_perm: Vec<usize> = {
            // translate the ambient-ray bijection into star indices directly
            let mut v = vec![usize::MAX; sa.fan.rays().len()];
            for (s, &t) in perm.iter().enumerate() {
                v[s] = t;
            }
            v
        };
        induced_on_star_ray_quotient(&sa.fan, src_ray, &sb.fan, dst_ray, &map, &star_perm)?
    };
    // bridge inside component b: from star(star(b, ->a), ->c) to star(star(b, ->c), ->a)
    let bridge = star_order_bridge(fb, rb_a, rb_c)?;
    Ok(mat_mul(&induced, &bridge))
}

/// Induced map on the star fans of corresponding rays of two fans already
/// related by `map` with ray bijection `perm` (on these fans' own ray indices).
fn induced_on_star_ray_quotient(
    source: &Fan,
    source_ray: usize,
    target: &Fan,
    target_ray: usize,
    map: &Mat,
    perm: &[usize],
) -> Result<(Mat, BTreeMap<usize, usize>)> {
    induced_on_ray_star(source, source_ray, target, target_ray, map, perm)
}

/// The maximal degeneration: `n + 1` copies of `component_spec(n)` in a
/// directed cycle. In copy `i`, the boundary ray `e_k` meets copy
/// `(i + k) mod (n + 1)`; the basepoint-free component (`e_1`, trivial normal
/// bundle) of each copy is glued to the section (`e_n`) of the next.
pub fn build_xn(n: usize) -> Result<SncModel> {
    if n == 0 {
        return Err(Error::InvalidInput("dimension must be positive".into()));
    }
    let (spec, labels) = component_spec(n)?;
    let fan = build_fan(&spec)?;
    let boundary: BTreeSet<usize> = labels.iter().map(|&l| spec.ray_index(l)).collect();
    let comp = LogFanoPair::new(fan, boundary)?;
    let count = n + 1;
    let components: Vec<LogFanoPair> = vec![comp; count];
    let mut incidence = Vec::with_capacity(count);
    for i in 0..count {
        let mut inc = BTreeMap::new();
        for k in 1..=n {
            // boundary ray e_k has ray index k - 1 in a tower of 1-dim stages
            inc.insert(spec.ray_index((k, 1)), (i + k) % count);
        }
        incidence.push(inc);
    }
    let model_wo_gluings = SncModel {
        components,
        incidence,
        gluings: Vec::new(),
    };
    let gluings = glue_model(&model_wo_gluings)?;
    let model = SncModel {
        gluings,
        ..model_wo_gluings
    };
    validate_model(&model)?;
    Ok(model)
}

/// Construct gluings for every meeting pair of a model, backtracking over the
/// label-compatible star isomorphisms until the cocycle condition holds.
pub fn glue_model(model: &SncModel) -> Result<Vec<Gluing>> {
    let mut pairs = Vec::new();
    for (i, inc) in model.incidence.iter().enumerate() {
        for (&ri, &j) in inc {
            if i < j {
                pairs.push((i, ri, j, model.ray_toward(j, i).unwrap()));
            }
        }
    }
    let mut options: Vec<Vec<Gluing>> = Vec::with_capacity(pairs.len());
    for &(i, ri, j, rj) in &pairs {
        let si = star_fan(&model.components[i].fan, &Cone::new(vec![ri]))?;
        let sj = star_fan(&model.components[j].fan, &Cone::new(vec![rj]))?;
        let cands = gluing_candidates(
            &model.components[i],
            &si,
            ri,
            &model.incidence[i],
            &model.components[j],
            &sj,
            rj,
            &model.incidence[j],
        );
        if cands.is_empty() {
            return Err(Error::Internal(format!(
                "no label-compatible gluing between components {i} and {j}"
            )));
        }
        options.push(
            cands
                .into_iter()
                .map(|(map, ray_perm)| Gluing {
                    i,
                    ray_i: ri,
                    j,
                    ray_j: rj,
                    map,
                    ray_perm,
                })
                .collect(),
        );
    }
    // backtrack over per-pair choices until the cocycle check passes
    let mut choice = vec![0usize; options.len()];
    loop {
        let gluings: Vec<Gluing> = choice
            .iter()
            .zip(&options)
            .map(|(&c, o)| o[c].clone())
            .collect();
        let candidate = SncModel {
            components: model.components.clone(),
            incidence: model.incidence.clone(),
            gluings,
        };
        if cocycle_check(&candidate).is_ok() {
            return Ok(candidate.gluings);
        }
        let mut idx = 0;
        loop {
            if idx == options.len() {
                return Err(Error::Internal(
                    "no cocycle-consistent gluing choice".into(),
                ));
            }
            if choice[idx] + 1 < options[idx].len() {
                choice[idx] += 1;
                break;
            }
            choice[idx] = 0;
            idx += 1;
        }
    }
}

/// d-semistability verdicts for every double intersection, computed on the
/// lower-index side and cross-checked from the other side.
pub fn dss_check(model: &SncModel) -> Result<DssReport> {
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for (i, inc) in model.incidence.iter().enumerate() {
        for &j in inc.values() {
            if i < j {
                pairs.push((i, j));
            }
        }
    }
    let reports: Vec<DssPairReport> = pairs
        .par_iter()
        .map(|&(i, j)| dss_pair(model, i, j))
        .collect::<Result<Vec<_>>>()?;
    Ok(DssReport { pairs: reports })
}

fn dss_pair(model: &SncModel, i: usize, j: usize) -> Result<DssPairReport> {
    let g = model
        .gluing(i, j)
        .ok_or_else(|| Error::InvalidInput(format!("no gluing for pair {i}-{j}")))?;
    let (fi, fj) = (&model.components[i].fan, &model.components[j].fan);
    let si = star_fan(fi, &Cone::new(vec![g.ray_i]))?;
    let sj = star_fan(fj, &Cone::new(vec![g.ray_j]))?;

    // N_{D/X_i}: self-restriction of the glued divisor on side i
    let di = ToricDivisor::boundary(fi, [g.ray_i]);
    let (_, n_i) = restrict_to_stratum(fi, &di, &Cone::new(vec![g.ray_i]))?;
    // N_{D/X_j}, transported to the reference (i) side
    let dj = ToricDivisor::boundary(fj, [g.ray_j]);
    let (_, n_j) = restrict_to_stratum(fj, &dj, &Cone::new(vec![g.ray_j]))?;
    let n_j_ref = pull_back(&n_j, &g.ray_perm);

    // cross terms O_D(X_k|_D) from side i
    let mut total = n_i.add(&n_j_ref);
    for (&r, &k) in &model.incidence[i] {
        if k == j || r == g.ray_i {
            continue;
        }
        let dk = ToricDivisor::boundary(fi, [r]);
        let (_, res) = restrict_to_stratum(fi, &dk, &Cone::new(vec![g.ray_i]))?;
        total = total.add(&res);
    }
    let class = divisor_class(&si.fan, &total).coords;
    let trivial = class.iter().all(|&c| c == 0);

    // independent recomputation of the cross terms from side j
    let mut total_j = n_j.add(&pull_back(&n_i, &invert_perm(&g.ray_perm)));
    for (&r, &k) in &model.incidence[j] {
        if k == i || r == g.ray_j {
            continue;
        }
        let dk = ToricDivisor::boundary(fj, [r]);
        let (_, res) = restrict_to_stratum(fj, &dk, &Cone::new(vec![g.ray_j]))?;
        total_j = total_j.add(&res);
    }
    let trivial_j = divisor_class(&sj.fan, &total_j)
        .coords
        .iter()
        .all(|&c| c == 0);
    if trivial != trivial_j {
        return Err(Error::Internal(format!(
            "d-semistability verdict for pair {i}-{j} depends on the side"
        )));
    }
    Ok(DssPairReport {
        i,
        j,
        class,
        trivial,
    })
}

/// Divisor on the source star fan with coefficients read through a ray
/// bijection from the target side.
fn pull_back(target_divisor: &ToricDivisor, perm: &[usize]) -> ToricDivisor {
    ToricDivisor {
        coeffs: (0..perm.len())
            .map(|s| target_divisor.coeffs[perm[s]])
            .collect(),
    }
}

fn invert_perm(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0usize; perm.len()];
    for (s, &t) in perm.iter().enumerate() {
        inv[t] = s;
    }
    inv
}

/// Every component log Fano with its incidence boundary? Also reports
/// maximality of the model (dual complex dimension = n).
pub fn snc_fano_check(model: &SncModel) -> Result<(bool, bool)> {
    let mut fano = true;
    for comp in &model.components {
        if !is_log_fano(&comp.fan, &comp.boundary)? {
            fano = false;
            break;
        }
    }
    let maximal = model.dual_complex_dimension() == model.dimension();
    Ok((fano, maximal))
}

/// Exact model isomorphism: a permutation of components together with
/// incidence-respecting pair isomorphisms commuting with the gluings.
pub fn model_isomorphic(m1: &SncModel, m2: &SncModel) -> Result<bool> {
    let c = m1.components.len();
    if c != m2.components.len() || m1.dimension() != m2.dimension() {
        return Ok(false);
    }
    for pi in (0..c).permutations(c) {
        // incidence structure must be preserved by the permutation
        let incidence_ok = (0..c).all(|i| {
            m1.incidence[i]
                .values()
                .map(|&j| pi[j])
                .collect::<BTreeSet<_>>()
                == m2.incidence[pi[i]]
                    .values()
                    .copied()
                    .collect::<BTreeSet<_>>()
        });
        if !incidence_ok {
            continue;
        }
        // per-component pair isomorphisms with incidence-labeled rays
        let mut per_component: Vec<Vec<(LatticeMap, Vec<usize>)>> = Vec::with_capacity(c);
        let mut feasible = true;
        for i in 0..c {
            let (a, b) = (&m1.components[i], &m2.components[pi[i]]);
            let inc1 = &m1.incidence[i];
            let inc2 = &m2.incidence[pi[i]];
            let isos = fan_isomorphisms_with(&a.fan, &b.fan, |perm| {
                inc1.iter()
                    .all(|(&r, &j)| inc2.get(&perm[r]).is_some_and(|&jj| jj == pi[j]))
            });
            if isos.is_empty() {
                feasible = false;
                break;
            }
            per_component.push(isos);
        }
        if !feasible {
            continue;
        }
        if gluing_commutation_search(m1, m2, &pi, &per_component, &mut vec![], 0)? {
            return Ok(true);
        }
    }
    Ok(false)
}

fn gluing_commutation_search(
    m1: &SncModel,
    m2: &SncModel,
    pi: &[usize],
    options: &[Vec<(LatticeMap, Vec<usize>)>],
    chosen: &mut Vec<usize>,
    depth: usize,
) -> Result<bool> {
    if depth == options.len() {
        return gluings_commute(m1, m2, pi, options, chosen);
    }
    for c in 0..options[depth].len() {
        chosen.push(c);
        if gluing_commutation_search(m1, m2, pi, options, chosen, depth + 1)? {
            return Ok(true);
        }
        chosen.pop();
    }
    Ok(false)
}

fn gluings_commute(
    m1: &SncModel,
    m2: &SncModel,
    pi: &[usize],
    options: &[Vec<(LatticeMap, Vec<usize>)>],
    chosen: &[usize],
) -> Result<bool> {
    for g in &m1.gluings {
        let (i, j) = (g.i, g.j);
        let (phi_i, perm_i) = &options[i][chosen[i]];
        let (phi_j, perm_j) = &options[j][chosen[j]];
        let g2 = match m2.gluing(pi[i], pi[j]) {
            Some(g2) => g2,
            None => return Ok(false),
        };
        // orient g2 as pi(i) -> pi(j)
        let (map2, perm2): (Mat, Vec<usize>) = if g2.i == pi[i] {
            (g2.map.matrix.clone(), g2.ray_perm.clone())
        } else {
            (g2.map.inverse().matrix, invert_perm(&g2.ray_perm))
        };
        // induced star maps of the component isomorphisms
        let ray2_i = m2.ray_toward(pi[i], pi[j]).unwrap();
        let ray2_j = m2.ray_toward(pi[j], pi[i]).unwrap();
        let Ok((si_map, si_perm)) = induced_on_ray_star(
            &m1.components[i].fan,
            g.ray_i,
            &m2.components[pi[i]].fan,
            ray2_i,
            &phi_i.matrix,
            perm_i,
        ) else {
            return Ok(false);
        };
        let Ok((sj_map, sj_perm)) = induced_on_ray_star(
            &m1.components[j].fan,
            g.ray_j,
            &m2.components[pi[j]].fan,
            ray2_j,
            &phi_j.matrix,
            perm_j,
        ) else {
            return Ok(false);
        };
        // commutation: g2 o (phi_i)_* = (phi_j)_* o g1 on the star fans
        if mat_mul(&si_map, &map2) != mat_mul(&g.map.matrix, &sj_map) {
            return Ok(false);
        }
        let n_star = g.ray_perm.len();
        for s in 0..n_star {
            let via_2 = perm2[si_perm[&s]];
            let via_1 = sj_perm[&g.ray_perm[s]];
            if via_2 != via_1 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Desk-scale uniqueness search with the d-semistability filter switchable
/// (the filter must do real work: disabling it admits more survivors).
pub fn search_models(n: usize, bound: i64, apply_dss: bool) -> Result<Vec<SncModel>> {
    if n == 0 || n > 2 {
        return Err(Error::InvalidInput(
            "exhaustive search is supported for dimensions 1 and 2".into(),
        ));
    }
    let entries = classify(n, bound)?;
    let comps: Vec<LogFanoPair> = entries
        .iter()
        .map(|e| {
            let fan = build_fan(&e.spec)?;
            let boundary: BTreeSet<usize> =
                e.boundary.iter().map(|&l| e.spec.ray_index(l)).collect();
            LogFanoPair::new(fan, boundary)
        })
        .collect::<Result<_>>()?;
    let count = n + 1;

    // enumerate: component choice per position x incidence labelings
    let mut survivors: Vec<SncModel> = Vec::new();
    let mut assignment = vec![0usize; count];
    loop {
        let components: Vec<LogFanoPair> = assignment.iter().map(|&a| comps[a].clone()).collect();
        for labeling in incidence_labelings(&components) {
            let base = SncModel {
                components: components.clone(),
                incidence: labeling,
                gluings: Vec::new(),
            };
            let Ok(gluings) = glue_model(&base) else {
                continue;
            };
            let model = SncModel { gluings, ..base };
            if validate_model(&model).is_err() {
                continue;
            }
            let (fano, maximal) = snc_fano_check(&model)?;
            if !fano || !maximal {
                continue;
            }
            if apply_dss && !dss_check(&model)?.all_pass() {
                continue;
            }
            let mut duplicate = false;
            for s in &survivors {
                if model_isomorphic(&model, s)? {
                    duplicate = true;
                    break;
                }
            }
            if !duplicate {
                survivors.push(model);
            }
        }
        // odometer over component assignments
        let mut idx = 0;
        loop {
            if idx == count {
                return Ok(survivors);
            }
            if assignment[idx] + 1 < comps.len() {
                assignment[idx] += 1;
                break;
            }
            assignment[idx] = 0;
            idx += 1;
        }
    }
}

/// All ways to label each component's boundary rays by the other components
/// such that incidences mirror each other.
fn incidence_labelings(components: &[LogFanoPair]) -> Vec<Vec<BTreeMap<usize, usize>>> {
    let count = components.len();
    // per component, all bijections boundary rays -> other components
    let per: Vec<Vec<BTreeMap<usize, usize>>> = components
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let rays: Vec<usize> = c.boundary.iter().copied().collect();
            let others: Vec<usize> = (0..count).filter(|&j| j != i).collect();
            others
                .iter()
                .permutations(others.len())
                .map(|p| rays.iter().copied().zip(p.into_iter().copied()).collect())
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut choice = vec![0usize; count];
    loop {
        let labeling: Vec<BTreeMap<usize, usize>> = choice
            .iter()
            .zip(&per)
            .map(|(&c, o)| o[c].clone())
            .collect();
        out.push(labeling);
        let mut idx = 0;
        loop {
            if idx == count {
                return out;
            }
            if choice[idx] + 1 < per[idx].len() {
                choice[idx] += 1;
                break;
            }
            choice[idx] = 0;
            idx += 1;
        }
    }
}

/// Survivors of the exhaustive search with the d-semistability filter on.
pub fn search_maximal_dss(n: usize, bound: i64) -> Result<Vec<SncModel>> {
    search_models(n, bound, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bott::blowup_flag_fan;
    use crate::divisors::{canonical_divisor, picard_rank, positivity, Positivity};
    use crate::fan::fan_isomorphic;
    use crate::logfano::free_lines;

    #[test]
    fn component_spec_small() {
        let (spec, boundary) = component_spec(1).unwrap();
        assert_eq!(spec.dims, vec![1]);
        assert_eq!(boundary, vec![(1, 1)]);

        let (spec, boundary) = component_spec(2).unwrap();
        assert_eq!(spec.dims, vec![1, 1]);
        assert_eq!(spec.twists, vec![vec![vec![1]]]); // F_1
        assert_eq!(boundary, vec![(1, 1), (2, 1)]);
    }

    #[test]
    fn component_matches_flag_blowup() {
        for n in 1..=4 {
            let (spec, _) = component_spec(n).unwrap();
            let fan = build_fan(&spec).unwrap();
            let flag = blowup_flag_fan(n).unwrap();
            assert!(fan_isomorphic(&fan, &flag).is_some(), "n = {n}");
        }
    }

    #[test]
    fn component_normal_bundles() {
        for n in 2..=4 {
            let (spec, labels) = component_spec(n).unwrap();
            let fan = build_fan(&spec).unwrap();
            let boundary: BTreeSet<usize> = labels.iter().map(|&l| spec.ray_index(l)).collect();
            let pair = LogFanoPair::new(fan, boundary).unwrap();
            // exactly one boundary divisor has trivial normal bundle: e_1
            let trivial = trivial_normal_rays(&pair).unwrap();
            assert_eq!(trivial, vec![spec.ray_index((1, 1))], "n = {n}");
            // exactly one free stratum line
            assert_eq!(free_lines(&pair).unwrap().len(), 1, "n = {n}");
            // rho = n: the component is a Bott tower
            assert_eq!(picard_rank(&pair.fan), n);
            // each component is Fano outright
            let minus_k = canonical_divisor(&pair.fan).scale(-1);
            assert_eq!(positivity(&pair.fan, &minus_k).unwrap(), Positivity::Ample);
        }
    }

    #[test]
    fn xn_small_dimensions() {
        for n in 1..=3usize {
            let model = build_xn(n).unwrap();
            assert_eq!(model.components.len(), n + 1);
            let (fano, maximal) = snc_fano_check(&model).unwrap();
            assert!(fano && maximal, "n = {n}");
            // dual complex is the n-simplex
            let cells = model.dual_complex_cells();
            assert_eq!(cells.len(), (1usize << (n + 1)) - 1, "n = {n}");
            let report = dss_check(&model).unwrap();
            assert!(report.all_pass(), "n = {n}: {report:?}");
            assert_eq!(report.pairs.len(), n * (n + 1) / 2);
        }
    }

    #[test]
    fn f0_cycle_fails_dss() {
        // three quadric surfaces glued along rulings: the classic non-example
        let spec = BottTowerSpec::product(vec![1, 1]).unwrap();
        let fan = build_fan(&spec).unwrap();
        let comp = LogFanoPair::new(fan, BTreeSet::from([0, 1])).unwrap();
        let components = vec![comp; 3];
        let mut incidence = Vec::new();
        for i in 0..3usize {
            incidence.push(BTreeMap::from([(0, (i + 1) % 3), (1, (i + 2) % 3)]));
        }
        let base = SncModel {
            components,
            incidence,
            gluings: Vec::new(),
        };
        let gluings = glue_model(&base).unwrap();
        let model = SncModel { gluings, ..base };
        validate_model(&model).unwrap();
        let (fano, maximal) = snc_fano_check(&model).unwrap();
        assert!(fano && maximal);
        let report = dss_check(&model).unwrap();
        assert!(!report.all_pass(), "{report:?}");
    }

    #[test]
    fn xn_isomorphic_to_itself_but_not_to_f0_cycle() {
        let x2 = build_xn(2).unwrap();
        assert!(model_isomorphic(&x2, &x2).unwrap());

        let spec = BottTowerSpec::product(vec![1, 1]).unwrap();
        let fan = build_fan(&spec).unwrap();
        let comp = LogFanoPair::new(fan, BTreeSet::from([0, 1])).unwrap();
        let components = vec![comp; 3];
        let mut incidence = Vec::new();
        for i in 0..3usize {
            incidence.push(BTreeMap::from([(0, (i + 1) % 3), (1, (i + 2) % 3)]));
        }
        let base = SncModel {
            components,
            incidence,
            gluings: Vec::new(),
        };
        let gluings = glue_model(&base).unwrap();
        let model = SncModel { gluings, ..base };
        assert!(!model_isomorphic(&x2, &model).unwrap());
    }

    #[test]
    fn search_dimension_one() {
        let survivors = search_maximal_dss(1, 2).unwrap();
        assert_eq!(survivors.len(), 1);
        assert!(model_isomorphic(&survivors[0], &build_xn(1).unwrap()).unwrap());
    }

    #[test]
    fn search_dimension_two() {
        let survivors = search_maximal_dss(2, 3).unwrap();
        assert_eq!(survivors.len(), 1, "expected a unique survivor");
        assert!(model_isomorphic(&survivors[0], &build_xn(2).unwrap()).unwrap());
        // every component of the survivor is the F_1 pair
        let (f1, _) = component_spec(2).unwrap();
        let f1_fan = build_fan(&f1).unwrap();
        for comp in &survivors[0].components {
            assert!(fan_isomorphic(&comp.fan, &f1_fan).is_some());
        }
        // the d-semistability filter does real work
        let unfiltered = search_models(2, 3, false).unwrap();
        assert!(unfiltered.len() > 1, "got {}", unfiltered.len());
    }
}
