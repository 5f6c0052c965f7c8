//! Torus-invariant divisors on smooth complete fans: divisor classes,
//! wall curve classes, intersection numbers, nef/ample decisions, nef value,
//! extremal lengths, and restriction to torus-invariant strata.

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::fan::{star_fan, Cone, Fan, StarFan};
use crate::linalg::{dot, inverse_unimodular, mat_vec, Rat};

/// A torus-invariant divisor `sum a_r D_r`, one coefficient per ray.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ToricDivisor {
    pub coeffs: Vec<i64>,
}

impl ToricDivisor {
    pub fn new(fan: &Fan, coeffs: Vec<i64>) -> Result<Self> {
        if coeffs.len() != fan.rays().len() {
            return Err(Error::InvalidInput(format!(
                "divisor has {} coefficients but the fan has {} rays",
                coeffs.len(),
                fan.rays().len()
            )));
        }
        Ok(ToricDivisor { coeffs })
    }

    pub fn zero(fan: &Fan) -> Self {
        ToricDivisor {
            coeffs: vec![0; fan.rays().len()],
        }
    }

    /// Reduced sum of the prime divisors indexed by `rays`.
    pub fn boundary(fan: &Fan, rays: impl IntoIterator<Item = usize>) -> Self {
        let mut coeffs = vec![0; fan.rays().len()];
        for r in rays {
            coeffs[r] = 1;
        }
        ToricDivisor { coeffs }
    }

    pub fn add(&self, other: &ToricDivisor) -> ToricDivisor {
        ToricDivisor {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &ToricDivisor) -> ToricDivisor {
        ToricDivisor {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, c: i64) -> ToricDivisor {
        ToricDivisor {
            coeffs: self.coeffs.iter().map(|a| c * a).collect(),
        }
    }
}

/// `K = -sum_r D_r`.
pub fn canonical_divisor(fan: &Fan) -> ToricDivisor {
    ToricDivisor {
        coeffs: vec![-1; fan.rays().len()],
    }
}

/// The principal divisor `div(chi^m) = sum <m, v_r> D_r`.
pub fn principal_divisor(fan: &Fan, m: &[i64]) -> ToricDivisor {
    ToricDivisor {
        coeffs: fan.rays().iter().map(|v| dot(m, v)).collect(),
    }
}

/// Reduction context for divisor classes: the rays of the lexicographically
/// least maximal cone form a unimodular pivot set whose coefficients every
/// class representative has zeroed out.
#[derive(Debug, Clone)]
pub struct ClassContext {
    pivot: Vec<usize>,
    nonpivot: Vec<usize>,
    vinv: Vec<Vec<i64>>, // inverse of the pivot-ray matrix
}

impl ClassContext {
    pub fn new(fan: &Fan) -> Self {
        let sigma0 = fan
            .max_cones()
            .iter()
            .min_by(|a, b| a.rays().cmp(b.rays()))
            .expect("fan has at least one maximal cone");
        let pivot = sigma0.rays().to_vec();
        let nonpivot = (0..fan.rays().len())
            .filter(|r| !pivot.contains(r))
            .collect();
        let vinv = inverse_unimodular(&fan.cone_matrix(sigma0));
        ClassContext {
            pivot,
            nonpivot,
            vinv,
        }
    }

    pub fn pivot_rays(&self) -> &[usize] {
        &self.pivot
    }

    pub fn nonpivot_rays(&self) -> &[usize] {
        &self.nonpivot
    }

    /// Picard rank of the fan: rays minus ambient rank.
    pub fn rank(&self) -> usize {
        self.nonpivot.len()
    }

    /// The canonical representative of `[D]`: coefficients on pivot rays
    /// zeroed by subtracting a principal divisor.
    pub fn reduce(&self, fan: &Fan, d: &ToricDivisor) -> ToricDivisor {
        // m with <m, v_r> = -a_r on pivot rays: m^T = V^{-1} (-a)
        let neg_a: Vec<i64> = self.pivot.iter().map(|&r| -d.coeffs[r]).collect();
        let m = mat_vec(&self.vinv, &neg_a);
        let adjusted = d.add(&principal_divisor(fan, &m));
        debug_assert!(self.pivot.iter().all(|&r| adjusted.coeffs[r] == 0));
        adjusted
    }

    /// Class coordinates: reduced coefficients on the non-pivot rays, in ray
    /// order. A free basis of the class group.
    pub fn coords(&self, fan: &Fan, d: &ToricDivisor) -> Vec<i64> {
        let red = self.reduce(fan, d);
        self.nonpivot.iter().map(|&r| red.coeffs[r]).collect()
    }
}

/// Divisor class: a canonical representative modulo principal divisors.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DivisorClass {
    pub coords: Vec<i64>,
}

pub fn divisor_class(fan: &Fan, d: &ToricDivisor) -> DivisorClass {
    DivisorClass {
        coords: ClassContext::new(fan).coords(fan, d),
    }
}

pub fn picard_rank(fan: &Fan) -> usize {
    fan.rays().len() - fan.ambient_rank()
}

/// An (n-1)-cone shared by two maximal cones, carrying the exact relation
/// `v + v' + sum_r b_r r = 0` over its rays.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wall {
    pub rays: Vec<usize>,
    pub v: usize,
    pub v_prime: usize,
    /// relation coefficient per wall ray, aligned with `rays`
    pub b: Vec<i64>,
}

/// All walls of a smooth complete fan with their curve relations.
pub fn walls(fan: &Fan) -> Result<Vec<Wall>> {
    let mut out = Vec::new();
    for (wall_rays, inc) in fan.wall_incidence() {
        if inc.len() != 2 {
            return Err(Error::InvalidFan(format!(
                "wall {wall_rays:?} bounds {} maximal cone(s)",
                inc.len()
            )));
        }
        let sigma = &fan.max_cones()[inc[0]];
        let sigma2 = &fan.max_cones()[inc[1]];
        let v = *sigma
            .rays()
            .iter()
            .find(|r| !wall_rays.contains(r))
            .unwrap();
        let v_prime = *sigma2
            .rays()
            .iter()
            .find(|r| !wall_rays.contains(r))
            .unwrap();
        // express v' in the basis given by sigma's rays; smoothness forces the
        // coefficient of v to be -1, and b_r = -c_r on the wall rays
        let vinv = inverse_unimodular(&fan.cone_matrix(sigma));
        let c = crate::linalg::vec_mat(fan.ray(v_prime), &vinv);
        let pos_of = |r: usize| sigma.rays().iter().position(|&s| s == r).unwrap();
        if c[pos_of(v)] != -1 {
            return Err(Error::Internal(format!(
                "wall relation for {wall_rays:?} has coefficient {} on the opposite ray",
                c[pos_of(v)]
            )));
        }
        let b: Vec<i64> = wall_rays.iter().map(|&r| -c[pos_of(r)]).collect();
        out.push(Wall {
            rays: wall_rays,
            v,
            v_prime,
            b,
        });
    }
    Ok(out)
}

/// `D . C_w = a_v + a_{v'} + sum_r b_r a_r`; depends only on the class of `D`.
pub fn intersection_number(d: &ToricDivisor, w: &Wall) -> i64 {
    let mut acc = d.coeffs[w.v] + d.coeffs[w.v_prime];
    for (r, b) in w.rays.iter().zip(&w.b) {
        acc += b * d.coeffs[*r];
    }
    acc
}

/// Curve class of a wall in the dual basis to the non-pivot divisor classes:
/// entry `i` is `D_{r_i} . C_w` for the `i`-th non-pivot ray.
pub fn wall_curve_class(fan: &Fan, ctx: &ClassContext, w: &Wall) -> Vec<i64> {
    ctx.nonpivot_rays()
        .iter()
        .map(|&r| {
            let mut coeffs = vec![0i64; fan.rays().len()];
            coeffs[r] = 1;
            intersection_number(&ToricDivisor { coeffs }, w)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Positivity {
    Ample,
    NefNotAmple,
    NotNef,
}

/// Nef/ample decision by the wall criterion, cross-checked against strict
/// convexity of the support function.
pub fn positivity(fan: &Fan, d: &ToricDivisor) -> Result<Positivity> {
    let ws = walls(fan)?;
    let mut ample = true;
    let mut nef = true;
    for w in &ws {
        let x = intersection_number(d, w);
        if x < 0 {
            nef = false;
        }
        if x <= 0 {
            ample = false;
        }
    }
    let by_walls = if ample {
        Positivity::Ample
    } else if nef {
        Positivity::NefNotAmple
    } else {
        Positivity::NotNef
    };

    let by_support = support_function_positivity(fan, d);
    if by_walls != by_support {
        return Err(Error::Internal(format!(
            "positivity oracles disagree: walls say {by_walls:?}, support function says {by_support:?}"
        )));
    }
    Ok(by_walls)
}

/// Independent positivity oracle: per maximal cone, the unique linear
/// functional `m_sigma` with `<m_sigma, v_r> = -a_r` on the cone's rays;
/// `D` is nef iff `<m_sigma, v> >= -a_v` for every ray `v`, ample iff the
/// inequality is strict off `sigma`.
fn support_function_positivity(fan: &Fan, d: &ToricDivisor) -> Positivity {
    let mut ample = true;
    let mut nef = true;
    for sigma in fan.max_cones() {
        let vinv = inverse_unimodular(&fan.cone_matrix(sigma));
        let neg_a: Vec<i64> = sigma.rays().iter().map(|&r| -d.coeffs[r]).collect();
        let m = mat_vec(&vinv, &neg_a);
        for (r, v) in fan.rays().iter().enumerate() {
            let lhs = dot(&m, v);
            if lhs < -d.coeffs[r] {
                nef = false;
                ample = false;
            } else if lhs == -d.coeffs[r] && !sigma.rays().contains(&r) {
                ample = false;
            }
        }
    }
    if ample {
        Positivity::Ample
    } else if nef {
        Positivity::NefNotAmple
    } else {
        Positivity::NotNef
    }
}

/// Nef value of an ample divisor: the least `tau` with `K + tau L` nef,
/// together with the walls on which `K + tau L` is trivial.
pub fn nef_value(fan: &Fan, l: &ToricDivisor) -> Result<(Rat, Vec<Wall>)> {
    if positivity(fan, l)? != Positivity::Ample {
        return Err(Error::NotAmple(
            "nef value requires an ample divisor".into(),
        ));
    }
    let k = canonical_divisor(fan);
    let mut tau: Option<Rat> = None;
    let mut ratios = Vec::new();
    for w in walls(fan)? {
        let kw = intersection_number(&k, &w);
        if kw < 0 {
            let lw = intersection_number(l, &w); // > 0 by ampleness
            let ratio = Ratio::new(-kw, lw);
            if tau.map_or(true, |t| ratio > t) {
                tau = Some(ratio);
            }
            ratios.push((ratio, w));
        }
    }
    let tau = tau.ok_or_else(|| {
        Error::InvalidInput("canonical divisor is nef; no wall determines a nef value".into())
    })?;
    let trivial = ratios
        .into_iter()
        .filter(|(r, _)| *r == tau)
        .map(|(_, w)| w)
        .collect();
    Ok((tau, trivial))
}

/// `-K . C_w` for a `K`-negative wall.
pub fn extremal_length(fan: &Fan, w: &Wall) -> Result<i64> {
    let k = canonical_divisor(fan);
    let kw = intersection_number(&k, w);
    if kw >= 0 {
        return Err(Error::InvalidInput(format!(
            "wall {:?} is not K-negative (K.C = {kw})",
            w.rays
        )));
    }
    Ok(-kw)
}

/// Restriction of `D` to the stratum `V(tau)`, as a divisor on the star fan.
///
/// Also covers the self-restriction case (rays of `tau` in `D`'s support):
/// the result then computes the normal-bundle divisor `O(D)|_{V(tau)}`.
/// The representative of `[D]` is first normalized to vanish on `tau`'s rays,
/// then its coefficients on the rays adjacent to `tau` descend to the star.
pub fn restrict_to_stratum(
    fan: &Fan,
    d: &ToricDivisor,
    tau: &Cone,
) -> Result<(StarFan, ToricDivisor)> {
    let star = star_fan(fan, tau)?;
    let dtau = tau.dim();
    // pick an integral character m with <m, v_r> = -a_r on tau's rays; the
    // column Hermite form of the ray matrix provides coordinates in which
    // tau's rays span the first d basis directions
    let t = fan.cone_matrix(tau);
    let n = fan.ambient_rank();
    let adjusted = if dtau == 0 {
        d.clone()
    } else {
        let u = crate::linalg::column_hermite(&t, n);
        // rows of T*U are lower triangular with unit diagonal (tau is smooth),
        // so back-substitution yields integral head coordinates for m
        let tu: Vec<Vec<i64>> = t
            .iter()
            .map(|row| crate::linalg::vec_mat(row, &u))
            .collect();
        let mut head = vec![0i64; dtau];
        for i in 0..dtau {
            let mut rhs = -d.coeffs[tau.rays()[i]];
            for (j, h) in head.iter().enumerate().take(i) {
                rhs -= tu[i][j] * h;
            }
            debug_assert_eq!(tu[i][i].abs(), 1);
            head[i] = rhs / tu[i][i];
        }
        // <m, x> = <head ++ 0, x*U>, so m = U * (head ++ 0) as a column
        let mut m = vec![0i64; n];
        for (i, mi) in m.iter_mut().enumerate() {
            for (j, h) in head.iter().enumerate() {
                *mi += u[i][j] * h;
            }
        }
        let adjusted = d.add(&principal_divisor(fan, &m));
        debug_assert!(tau.rays().iter().all(|&r| adjusted.coeffs[r] == 0));
        adjusted
    };
    let mut coeffs = vec![i64::MIN; star.fan.rays().len()];
    for (&amb, &st) in &star.ray_map {
        let a = adjusted.coeffs[amb];
        if coeffs[st] != i64::MIN && coeffs[st] != a {
            return Err(Error::Internal(
                "inconsistent coefficients while descending a divisor to a star fan".into(),
            ));
        }
        coeffs[st] = a;
    }
    if coeffs.contains(&i64::MIN) {
        return Err(Error::Internal(
            "star ray without an ambient preimage".into(),
        ));
    }
    Ok((star, ToricDivisor { coeffs }))
}
