//! Smooth complete simplicial fans over an exact integer lattice.
//!
//! Rays are primitive vectors in `Z^n`, maximal cones are index sets into the
//! ray list, and every maximal cone is required to be unimodular. Completeness
//! is certified by the wall surrogate (every wall bounds exactly two maximal
//! cones, the wall graph is connected) together with a seeded point-location
//! oracle available as a separate check.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use itertools::Itertools;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    self, det, gcd_slice, homogeneous_feasible, identity, inverse_unimodular, mat_mul, rat_vec,
    vec_mat, Mat, Rat,
};

/// A point of the lattice `N = Z^n`.
pub type LatticeVector = Vec<i64>;

/// A cone of a fan, stored as a sorted set of ray indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cone {
    ray_indices: Vec<usize>,
}

impl Cone {
    pub fn new(mut ray_indices: Vec<usize>) -> Self {
        ray_indices.sort_unstable();
        ray_indices.dedup();
        Cone { ray_indices }
    }

    pub fn rays(&self) -> &[usize] {
        &self.ray_indices
    }

    pub fn dim(&self) -> usize {
        self.ray_indices.len()
    }

    pub fn contains_rays(&self, other: &Cone) -> bool {
        other
            .ray_indices
            .iter()
            .all(|r| self.ray_indices.binary_search(r).is_ok())
    }
}

/// An integer-linear map between lattices, acting on row vectors:
/// `v` in `Z^src` maps to `v * matrix` in `Z^dst`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeMap {
    pub matrix: Mat, // src_rank x dst_rank
}

impl LatticeMap {
    pub fn apply(&self, v: &[i64]) -> LatticeVector {
        vec_mat(v, &self.matrix)
    }

    pub fn compose(&self, then: &LatticeMap) -> LatticeMap {
        LatticeMap {
            matrix: mat_mul(&self.matrix, &then.matrix),
        }
    }

    pub fn is_unimodular(&self) -> bool {
        let n = self.matrix.len();
        n == 0 || (self.matrix[0].len() == n && det(&self.matrix).abs() == 1)
    }

    pub fn inverse(&self) -> LatticeMap {
        LatticeMap {
            matrix: inverse_unimodular(&self.matrix),
        }
    }

    pub fn identity(n: usize) -> LatticeMap {
        LatticeMap {
            matrix: identity(n),
        }
    }
}

/// A smooth complete simplicial fan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fan {
    ambient_rank: usize,
    rays: Vec<LatticeVector>,
    max_cones: Vec<Cone>,
}

/// Outcome of one structural check in [`validate_fan`].
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub ok: bool,
    pub detail: String,
}

/// Per-invariant validation outcome; `pass()` is the conjunction.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn failures(&self) -> Vec<&CheckResult> {
        self.checks.iter().filter(|c| !c.ok).collect()
    }
}

impl Fan {
    /// Build a fan after basic structural checks (primitivity, index ranges,
    /// cone dimension). Full invariants are checked by [`validate_fan`].
    pub fn new(ambient_rank: usize, rays: Vec<LatticeVector>, max_cones: Vec<Cone>) -> Result<Fan> {
        for (i, r) in rays.iter().enumerate() {
            if r.len() != ambient_rank {
                return Err(Error::InvalidFan(format!(
                    "ray {i} has length {} but ambient rank is {ambient_rank}",
                    r.len()
                )));
            }
            if ambient_rank > 0 && gcd_slice(r) != 1 {
                return Err(Error::InvalidFan(format!(
                    "ray {i} = {r:?} is not primitive"
                )));
            }
        }
        if rays.iter().duplicates().next().is_some() {
            return Err(Error::InvalidFan("duplicate ray".into()));
        }
        for (c, cone) in max_cones.iter().enumerate() {
            if cone.dim() != ambient_rank {
                return Err(Error::InvalidFan(format!(
                    "maximal cone {c} has dimension {} != {ambient_rank}",
                    cone.dim()
                )));
            }
            if let Some(&bad) = cone.rays().iter().find(|&&r| r >= rays.len()) {
                return Err(Error::InvalidFan(format!(
                    "cone {c} references missing ray {bad}"
                )));
            }
        }
        if max_cones.is_empty() {
            return Err(Error::InvalidFan("fan has no maximal cones".into()));
        }
        Ok(Fan {
            ambient_rank,
            rays,
            max_cones,
        })
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient_rank
    }

    pub fn rays(&self) -> &[LatticeVector] {
        &self.rays
    }

    pub fn ray(&self, i: usize) -> &LatticeVector {
        &self.rays[i]
    }

    pub fn max_cones(&self) -> &[Cone] {
        &self.max_cones
    }

    /// Ray matrix (rows) of a cone.
    pub fn cone_matrix(&self, cone: &Cone) -> Mat {
        cone.rays().iter().map(|&r| self.rays[r].clone()).collect()
    }

    /// True iff `tau` is a face of some maximal cone.
    pub fn is_face(&self, tau: &Cone) -> bool {
        tau.rays().iter().all(|&r| r < self.rays.len())
            && self.max_cones.iter().any(|sigma| sigma.contains_rays(tau))
    }

    /// Exact membership test for a lattice point in a (smooth) cone.
    pub fn cone_contains_point(&self, cone: &Cone, x: &[i64]) -> bool {
        // express x in coordinates with respect to the cone's rays, padded to
        // a full lattice basis when the cone is not maximal; membership means
        // nonnegative ray coordinates and zero padding coordinates
        let m = self.cone_matrix(cone);
        let d = cone.dim();
        let n = self.ambient_rank;
        if d == 0 {
            return x.iter().all(|&c| c == 0);
        }
        let u = linalg::column_hermite(&m, n);
        let uinv = inverse_unimodular(&u);
        let mut full = m;
        for row in uinv.iter().skip(d) {
            full.push(row.clone());
        }
        // solve x = c * full, i.e. full^T c^T = x^T
        let fullq: Vec<Vec<Rat>> = (0..n)
            .map(|j| (0..n).map(|i| Rat::from_integer(full[i][j])).collect())
            .collect();
        let sol = linalg::solve_rational(&fullq, &rat_vec(x));
        match sol {
            None => false,
            Some(c) => {
                c[..d].iter().all(|v| *v >= Rat::from_integer(0))
                    && c[d..].iter().all(|v| *v == Rat::from_integer(0))
            }
        }
    }

    /// All walls as sorted ray-index sets with their two incident maximal cones.
    pub fn wall_incidence(&self) -> BTreeMap<Vec<usize>, Vec<usize>> {
        let mut walls: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for (ci, cone) in self.max_cones.iter().enumerate() {
            for omit in 0..cone.dim() {
                let mut w = cone.rays().to_vec();
                w.remove(omit);
                walls.entry(w).or_default().push(ci);
            }
        }
        walls
    }

    /// Canonical presentation: rays sorted lexicographically, cones reindexed
    /// and sorted. Used for golden files and deduplication tie-breaks.
    pub fn canonicalize(&self) -> Fan {
        let mut order: Vec<usize> = (0..self.rays.len()).collect();
        order.sort_by(|&a, &b| self.rays[a].cmp(&self.rays[b]));
        let mut new_index = vec![0usize; self.rays.len()];
        for (new, &old) in order.iter().enumerate() {
            new_index[old] = new;
        }
        let rays = order.iter().map(|&o| self.rays[o].clone()).collect();
        let mut cones: Vec<Cone> = self
            .max_cones
            .iter()
            .map(|c| Cone::new(c.rays().iter().map(|&r| new_index[r]).collect()))
            .collect();
        cones.sort();
        cones.dedup();
        Fan {
            ambient_rank: self.ambient_rank,
            rays,
            max_cones: cones,
        }
    }

    /// Canonical line-oriented text form; see the fan file format.
    pub fn to_canonical_text(&self) -> String {
        let c = self.canonicalize();
        let mut out = String::new();
        writeln!(out, "rank {}", c.ambient_rank).unwrap();
        writeln!(out, "rays {}", c.rays.len()).unwrap();
        for r in &c.rays {
            writeln!(out, "{}", r.iter().map(|x| x.to_string()).join(" ")).unwrap();
        }
        writeln!(out, "cones {}", c.max_cones.len()).unwrap();
        for cone in &c.max_cones {
            writeln!(
                out,
                "{}",
                cone.rays().iter().map(|x| x.to_string()).join(" ")
            )
            .unwrap();
        }
        out
    }

    /// Parse the fan text format produced by [`Fan::to_canonical_text`].
    pub fn from_text(text: &str) -> Result<Fan> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = |lines: &mut dyn Iterator<Item = &str>, key: &str| -> Result<usize> {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("missing '{key}' header line")))?;
            let mut it = line.split_whitespace();
            match (it.next(), it.next()) {
                (Some(k), Some(v)) if k == key => v
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad count in '{line}'"))),
                _ => Err(Error::Parse(format!(
                    "expected '{key} <count>', got '{line}'"
                ))),
            }
        };
        let rank = header(&mut lines, "rank")?;
        let nrays = header(&mut lines, "rays")?;
        let mut rays = Vec::with_capacity(nrays);
        for i in 0..nrays {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("missing ray line {i}")))?;
            let v: std::result::Result<Vec<i64>, _> =
                line.split_whitespace().map(str::parse).collect();
            let v = v.map_err(|_| Error::Parse(format!("bad ray line '{line}'")))?;
            rays.push(v);
        }
        let ncones = header(&mut lines, "cones")?;
        let mut cones = Vec::with_capacity(ncones);
        for i in 0..ncones {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("missing cone line {i}")))?;
            let v: std::result::Result<Vec<usize>, _> =
                line.split_whitespace().map(str::parse).collect();
            let v = v.map_err(|_| Error::Parse(format!("bad cone line '{line}'")))?;
            cones.push(Cone::new(v));
        }
        Fan::new(rank, rays, cones)
    }
}

/// Check every structural invariant of a smooth complete fan, reporting each.
pub fn validate_fan(fan: &Fan) -> ValidationReport {
    let mut checks = Vec::new();
    let n = fan.ambient_rank();

    // smoothness: every maximal cone is unimodular
    let mut smooth_ok = true;
    let mut smooth_detail = String::new();
    for (ci, cone) in fan.max_cones().iter().enumerate() {
        let d = det(&fan.cone_matrix(cone));
        if d.abs() != 1 {
            smooth_ok = false;
            smooth_detail = format!("cone {ci} {:?} has determinant {d}", cone.rays());
            break;
        }
    }
    checks.push(CheckResult {
        name: "smooth_cones",
        ok: smooth_ok,
        detail: smooth_detail,
    });

    // face compatibility: any two maximal cones admit a separating functional
    // vanishing exactly on their common rays
    let mut face_ok = true;
    let mut face_detail = String::new();
    'outer: for (i, a) in fan.max_cones().iter().enumerate() {
        for (j, b) in fan.max_cones().iter().enumerate().skip(i + 1) {
            if !cones_meet_in_common_face(fan, a, b) {
                face_ok = false;
                face_detail = format!("cones {i} and {j} do not intersect in a common face");
                break 'outer;
            }
        }
    }
    checks.push(CheckResult {
        name: "face_compatibility",
        ok: face_ok,
        detail: face_detail,
    });

    // completeness surrogate: each wall bounds exactly two maximal cones
    let walls = fan.wall_incidence();
    let mut wall_ok = true;
    let mut wall_detail = String::new();
    for (w, inc) in &walls {
        if inc.len() != 2 {
            wall_ok = false;
            wall_detail = format!("wall {w:?} bounds {} maximal cone(s)", inc.len());
            break;
        }
    }
    checks.push(CheckResult {
        name: "two_cones_per_wall",
        ok: wall_ok,
        detail: wall_detail,
    });

    // wall-adjacency graph on maximal cones is connected
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); fan.max_cones().len()];
    for inc in walls.values() {
        if inc.len() == 2 {
            adj[inc[0]].push(inc[1]);
            adj[inc[1]].push(inc[0]);
        }
    }
    let mut seen = vec![false; fan.max_cones().len()];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(c) = stack.pop() {
        for &d in &adj[c] {
            if !seen[d] {
                seen[d] = true;
                stack.push(d);
            }
        }
    }
    let connected = seen.iter().all(|&s| s);
    checks.push(CheckResult {
        name: "wall_graph_connected",
        ok: connected,
        detail: if connected {
            String::new()
        } else {
            "wall graph is disconnected".into()
        },
    });

    // rays actually used and spanning (rank 0 fans are a single point)
    let used: BTreeSet<usize> = fan
        .max_cones()
        .iter()
        .flat_map(|c| c.rays().iter().copied())
        .collect();
    let all_used = used.len() == fan.rays().len();
    checks.push(CheckResult {
        name: "all_rays_used",
        ok: all_used,
        detail: if all_used {
            String::new()
        } else {
            format!(
                "{} ray(s) not part of any maximal cone",
                fan.rays().len() - used.len()
            )
        },
    });
    let _ = n;

    ValidationReport { checks }
}

/// Separating-functional test: the two unimodular cones intersect exactly in
/// the cone spanned by their common rays.
fn cones_meet_in_common_face(fan: &Fan, a: &Cone, b: &Cone) -> bool {
    let shared: Vec<usize> = a
        .rays()
        .iter()
        .copied()
        .filter(|r| b.rays().contains(r))
        .collect();
    let n = fan.ambient_rank();
    if shared.len() == a.dim() && shared.len() == b.dim() {
        return true; // identical cones (caller excludes this pairing)
    }
    // find m with <m, r> = 0 on shared rays, > 0 on a-only rays, < 0 on b-only
    let mut cons: Vec<(Vec<Rat>, bool)> = Vec::new();
    for &r in &shared {
        cons.push((rat_vec(fan.ray(r)), false));
        cons.push((
            rat_vec(&fan.ray(r).iter().map(|&x| -x).collect::<Vec<_>>()),
            false,
        ));
    }
    for &r in a.rays() {
        if !shared.contains(&r) {
            cons.push((rat_vec(fan.ray(r)), true));
        }
    }
    for &r in b.rays() {
        if !shared.contains(&r) {
            cons.push((
                rat_vec(&fan.ray(r).iter().map(|&x| -x).collect::<Vec<_>>()),
                true,
            ));
        }
    }
    homogeneous_feasible(&cons, n)
}

/// Seeded sanity oracle: random lattice points must land in some maximal cone.
pub fn random_point_location_check<R: Rng>(fan: &Fan, rng: &mut R, trials: usize) -> bool {
    let n = fan.ambient_rank();
    for _ in 0..trials {
        let x: Vec<i64> = (0..n).map(|_| rng.gen_range(-50..=50)).collect();
        if !fan
            .max_cones()
            .iter()
            .any(|c| fan.cone_contains_point(c, &x))
        {
            return false;
        }
    }
    true
}

/// Star fan of a face `tau` together with the quotient bookkeeping needed to
/// transport divisors and lattice maps between the ambient fan and the star.
#[derive(Debug, Clone)]
pub struct StarFan {
    pub fan: Fan,
    /// ambient ray index -> star ray index, for rays adjacent to `tau`
    pub ray_map: BTreeMap<usize, usize>,
    /// quotient coordinates: `x_bar = x * projection` (n x (n-d))
    pub projection: Mat,
    /// a section of the quotient: `lift(y) = y * section` ((n-d) x n)
    pub section: Mat,
}

/// Star fan in the quotient of `N` by the sublattice spanned by the rays of `tau`.
pub fn star_fan(fan: &Fan, tau: &Cone) -> Result<StarFan> {
    if !fan.is_face(tau) {
        return Err(Error::NotAFace(format!("{:?}", tau.rays())));
    }
    let n = fan.ambient_rank();
    let d = tau.dim();
    let t = fan.cone_matrix(tau);
    let u = linalg::column_hermite(&t, n);
    let uinv = inverse_unimodular(&u);
    // projection = last n-d columns of U; section = last n-d rows of U^{-1}
    let projection: Mat = (0..n).map(|i| u[i][d..].to_vec()).collect();
    let section: Mat = uinv[d..].to_vec();

    let mut ray_map = BTreeMap::new();
    let mut star_rays: Vec<LatticeVector> = Vec::new();
    let mut adjacent: Vec<usize> = fan
        .max_cones()
        .iter()
        .filter(|sigma| sigma.contains_rays(tau))
        .flat_map(|sigma| sigma.rays().iter().copied())
        .filter(|r| !tau.rays().contains(r))
        .collect();
    adjacent.sort_unstable();
    adjacent.dedup();
    for r in adjacent {
        let img = vec_mat(fan.ray(r), &projection);
        let idx = match star_rays.iter().position(|s| s == &img) {
            Some(i) => i,
            None => {
                star_rays.push(img);
                star_rays.len() - 1
            }
        };
        ray_map.insert(r, idx);
    }
    let mut star_cones: Vec<Cone> = fan
        .max_cones()
        .iter()
        .filter(|sigma| sigma.contains_rays(tau))
        .map(|sigma| {
            Cone::new(
                sigma
                    .rays()
                    .iter()
                    .filter(|r| !tau.rays().contains(r))
                    .map(|r| ray_map[r])
                    .collect(),
            )
        })
        .collect();
    star_cones.sort();
    star_cones.dedup();
    let star = Fan::new(n - d, star_rays, star_cones)?;
    Ok(StarFan {
        fan: star,
        ray_map,
        projection,
        section,
    })
}

/// Star subdivision (torus-invariant blow-up) at a smooth face of dim >= 2.
pub fn star_subdivision(fan: &Fan, tau: &Cone) -> Result<Fan> {
    if tau.dim() < 2 {
        return Err(Error::InvalidCone(format!(
            "star subdivision requires dim >= 2, got {}",
            tau.dim()
        )));
    }
    if !fan.is_face(tau) {
        return Err(Error::NotAFace(format!("{:?}", tau.rays())));
    }
    let n = fan.ambient_rank();
    let mut new_ray = vec![0i64; n];
    for &r in tau.rays() {
        for (dst, &x) in new_ray.iter_mut().zip(fan.ray(r)) {
            *dst += x;
        }
    }
    debug_assert_eq!(gcd_slice(&new_ray), 1);
    let mut rays = fan.rays().to_vec();
    let new_idx = rays.len();
    rays.push(new_ray);
    let mut cones = Vec::new();
    for sigma in fan.max_cones() {
        if sigma.contains_rays(tau) {
            for &omit in tau.rays() {
                let mut c: Vec<usize> = sigma
                    .rays()
                    .iter()
                    .copied()
                    .filter(|&r| r != omit)
                    .collect();
                c.push(new_idx);
                cones.push(Cone::new(c));
            }
        } else {
            cones.push(sigma.clone());
        }
    }
    Fan::new(n, rays, cones)
}

/// All fan isomorphisms `f1 -> f2` whose induced ray bijection satisfies
/// `accept`. Each result is the unimodular lattice map together with the
/// bijection (`perm[i]` = image ray index in `f2` of ray `i` of `f1`).
pub fn fan_isomorphisms_with<F>(f1: &Fan, f2: &Fan, accept: F) -> Vec<(LatticeMap, Vec<usize>)>
where
    F: Fn(&[usize]) -> bool,
{
    let mut found = Vec::new();
    if f1.ambient_rank() != f2.ambient_rank()
        || f1.rays().len() != f2.rays().len()
        || f1.max_cones().len() != f2.max_cones().len()
    {
        return found;
    }
    let n = f1.ambient_rank();
    if n == 0 {
        let perm: Vec<usize> = Vec::new();
        if accept(&perm) {
            found.push((LatticeMap { matrix: vec![] }, perm));
        }
        return found;
    }
    // fingerprint: number of incident maximal cones per ray
    let incidence = |f: &Fan| -> Vec<usize> {
        let mut v = vec![0usize; f.rays().len()];
        for c in f.max_cones() {
            for &r in c.rays() {
                v[r] += 1;
            }
        }
        v
    };
    let inc1 = incidence(f1);
    let inc2 = incidence(f2);
    {
        let mut a = inc1.clone();
        let mut b = inc2.clone();
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            return found;
        }
    }
    let cones2: BTreeSet<Vec<usize>> = f2.max_cones().iter().map(|c| c.rays().to_vec()).collect();
    let rays2: HashMap<&LatticeVector, usize> =
        f2.rays().iter().enumerate().map(|(i, r)| (r, i)).collect();

    let sigma0 = &f1.max_cones()[0];
    let v = f1.cone_matrix(sigma0);
    let vinv = inverse_unimodular(&v);
    for target in f2.max_cones() {
        for image in target.rays().iter().permutations(n) {
            // fingerprints must match along the assignment
            if sigma0
                .rays()
                .iter()
                .zip(image.iter())
                .any(|(&a, &&b)| inc1[a] != inc2[b])
            {
                continue;
            }
            let w: Mat = image.iter().map(|&&r| f2.ray(r).clone()).collect();
            let m = mat_mul(&vinv, &w);
            if det(&m).abs() != 1 {
                continue;
            }
            // the map must send rays bijectively to rays
            let mut perm = Vec::with_capacity(f1.rays().len());
            let mut ok = true;
            for r in f1.rays() {
                match rays2.get(&vec_mat(r, &m)) {
                    Some(&i) => perm.push(i),
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok || perm.iter().duplicates().next().is_some() {
                continue;
            }
            // and maximal cones to maximal cones
            if !f1.max_cones().iter().all(|c| {
                cones2.contains(Cone::new(c.rays().iter().map(|&r| perm[r]).collect()).rays())
            }) {
                continue;
            }
            if accept(&perm) {
                found.push((LatticeMap { matrix: m }, perm));
            }
        }
    }
    found
}

/// First fan isomorphism satisfying the ray-bijection constraint, if any.
pub fn fan_isomorphic_with<F>(f1: &Fan, f2: &Fan, accept: F) -> Option<(LatticeMap, Vec<usize>)>
where
    F: Fn(&[usize]) -> bool,
{
    fan_isomorphisms_with(f1, f2, accept).into_iter().next()
}

/// Unconstrained fan isomorphism.
pub fn fan_isomorphic(f1: &Fan, f2: &Fan) -> Option<LatticeMap> {
    fan_isomorphic_with(f1, f2, |_| true).map(|(m, _)| m)
}

/// Isomorphism of pairs: the ray bijection must carry `boundary1` onto `boundary2`.
pub fn pair_isomorphic(
    f1: &Fan,
    boundary1: &BTreeSet<usize>,
    f2: &Fan,
    boundary2: &BTreeSet<usize>,
) -> Option<(LatticeMap, Vec<usize>)> {
    if boundary1.len() != boundary2.len() {
        return None;
    }
    fan_isomorphic_with(f1, f2, |perm| {
        boundary1.iter().all(|&b| boundary2.contains(&perm[b]))
    })
}

/// The fan of projective space `P^n`: rays `e_1..e_n, -sum(e_i)`.
pub fn projective_space_fan(n: usize) -> Fan {
    assert!(n >= 1);
    let mut rays: Vec<LatticeVector> = (0..n)
        .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
        .collect();
    rays.push(vec![-1; n]);
    let cones = (0..=n)
        .map(|omit| Cone::new((0..=n).filter(|&r| r != omit).collect()))
        .collect();
    Fan::new(n, rays, cones).expect("projective space fan is always valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn p2_fan() -> Fan {
        projective_space_fan(2)
    }

    #[test]
    fn p2_validates() {
        let report = validate_fan(&p2_fan());
        assert!(report.pass(), "{:?}", report.failures());
    }

    #[test]
    fn deleted_cone_fails_wall_check() {
        let fan = Fan::new(
            2,
            vec![vec![1, 0], vec![0, 1], vec![-1, -1]],
            vec![Cone::new(vec![0, 1]), Cone::new(vec![1, 2])],
        )
        .unwrap();
        let report = validate_fan(&fan);
        assert!(!report.pass());
        assert!(report
            .failures()
            .iter()
            .any(|c| c.name == "two_cones_per_wall"));
    }

    #[test]
    fn non_smooth_cone_detected() {
        // cone spanned by e1 and e1 + 2 e2 has index 2
        let fan = Fan::new(
            2,
            vec![vec![1, 0], vec![1, 2], vec![-1, -1]],
            vec![
                Cone::new(vec![0, 1]),
                Cone::new(vec![1, 2]),
                Cone::new(vec![0, 2]),
            ],
        )
        .unwrap();
        let report = validate_fan(&fan);
        assert!(report.failures().iter().any(|c| c.name == "smooth_cones"));
    }

    #[test]
    fn overlapping_cones_fail_face_check() {
        // two 2-cones sharing no ray but overlapping interiors
        let fan = Fan::new(
            2,
            vec![
                vec![1, 0],
                vec![0, 1],
                vec![1, 1],
                vec![-1, -1],
                vec![1, -1],
            ],
            vec![
                Cone::new(vec![0, 1]),
                Cone::new(vec![2, 4]), // sits inside the union weirdly
                Cone::new(vec![1, 3]),
                Cone::new(vec![3, 4]),
            ],
        )
        .unwrap();
        let report = validate_fan(&fan);
        assert!(!report.pass());
    }

    #[test]
    fn star_fan_of_ray_in_p2_is_p1() {
        let star = star_fan(&p2_fan(), &Cone::new(vec![0])).unwrap();
        assert_eq!(star.fan.ambient_rank(), 1);
        let mut rays = star.fan.rays().to_vec();
        rays.sort();
        assert_eq!(rays, vec![vec![-1], vec![1]]);
        assert!(validate_fan(&star.fan).pass());
    }

    #[test]
    fn star_fan_of_zero_cone_is_identity() {
        let fan = p2_fan();
        let star = star_fan(&fan, &Cone::new(vec![])).unwrap();
        assert_eq!(star.fan.to_canonical_text(), fan.to_canonical_text());
        for i in 0..3 {
            assert_eq!(star.ray_map[&i], i);
        }
    }

    #[test]
    fn star_subdivision_of_p2_is_f1() {
        let f1 = star_subdivision(&p2_fan(), &Cone::new(vec![0, 1])).unwrap();
        assert_eq!(f1.rays().len(), 4);
        assert!(validate_fan(&f1).pass());
        // F_1 fan: e1, e2, -e1-e2, e1+e2
        let hirzebruch = Fan::new(
            2,
            vec![vec![1, 0], vec![0, 1], vec![-1, 1], vec![0, -1]],
            vec![
                Cone::new(vec![0, 1]),
                Cone::new(vec![1, 2]),
                Cone::new(vec![2, 3]),
                Cone::new(vec![0, 3]),
            ],
        )
        .unwrap();
        assert!(fan_isomorphic(&f1, &hirzebruch).is_some());
    }

    #[test]
    fn subdivision_rejects_rays() {
        assert!(star_subdivision(&p2_fan(), &Cone::new(vec![0])).is_err());
    }

    #[test]
    fn p2_selfisomorphic_under_permutation() {
        let f = p2_fan();
        let g = Fan::new(
            2,
            vec![vec![-1, -1], vec![1, 0], vec![0, 1]],
            vec![
                Cone::new(vec![0, 1]),
                Cone::new(vec![1, 2]),
                Cone::new(vec![0, 2]),
            ],
        )
        .unwrap();
        let m = fan_isomorphic(&f, &g).expect("relabeled P^2 fan is isomorphic");
        assert!(m.is_unimodular());
    }

    #[test]
    fn f0_not_isomorphic_to_f1() {
        let f0 = Fan::new(
            2,
            vec![vec![1, 0], vec![0, 1], vec![-1, 0], vec![0, -1]],
            vec![
                Cone::new(vec![0, 1]),
                Cone::new(vec![1, 2]),
                Cone::new(vec![2, 3]),
                Cone::new(vec![0, 3]),
            ],
        )
        .unwrap();
        let f1 = star_subdivision(&p2_fan(), &Cone::new(vec![0, 1])).unwrap();
        assert!(fan_isomorphic(&f0, &f1).is_none());
    }

    #[test]
    fn point_location_oracle_on_p2() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert!(random_point_location_check(&p2_fan(), &mut rng, 200));
    }

    #[test]
    fn canonical_text_roundtrip() {
        let fan = p2_fan();
        let text = fan.to_canonical_text();
        let back = Fan::from_text(&text).unwrap();
        assert_eq!(back.to_canonical_text(), text);
    }
}
