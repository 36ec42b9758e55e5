use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{invalid, Result};
use crate::geometry::linalg::{gaussian_matrix, qr_factor};
use crate::geometry::{random_ambient, random_tangent, retract, tangent_project, Ambient, Factor, Manifold, ManifoldPoint};
use crate::objectives::{dissimilarity, DcObjective, DissimilarityKind, LabeledDataset, Objective, ObjectiveEvaluation};

/// Relative error between the oracle's subgradient at `x` and central finite
/// differences with step `h`.
///
/// On vector spaces every coordinate is differenced and the error is
/// `‖fd − w‖ / ‖w‖`. Elsewhere `directions` random unit tangent vectors ξ
/// are used and the error is `max |fd_ξ − ⟨w_M, ξ⟩| / ‖w_M‖`, differencing
/// `t ↦ φ(R_x(tξ))`.
pub fn fd_subgradient_error<O, R>(oracle: &O, x: &ManifoldPoint, directions: usize, h: f64, rng: &mut R) -> Result<f64>
where
    O: Objective + ?Sized,
    R: Rng + ?Sized,
{
    let eval = oracle.evaluate(x)?;
    let manifold = x.manifold();
    if manifold.is_linear() {
        let mut fd = Ambient::zeros_like(x.coords());
        for (i, part) in x.coords().parts().iter().enumerate() {
            for k in 0..part.len() {
                let shifted = |delta: f64| -> Result<f64> {
                    let mut c = x.coords().clone();
                    c.parts_mut()[i][k] += delta;
                    oracle.value(&ManifoldPoint::new_unchecked(manifold.clone(), c)?)
                };
                fd.parts_mut()[i][k] = (shifted(h)? - shifted(-h)?) / (2.0 * h);
            }
        }
        let scale = eval.subgradient.norm().max(1e-8);
        return Ok(fd.sub(&eval.subgradient).norm() / scale);
    }
    let w = tangent_project(x, &eval.subgradient)?;
    let scale = w.norm().max(1e-8);
    let mut worst: f64 = 0.0;
    for _ in 0..directions {
        let xi = random_tangent(x, rng);
        let plus = oracle.value(&retract(x, &xi.scale(h))?)?;
        let minus = oracle.value(&retract(x, &xi.scale(-h))?)?;
        let fd = (plus - minus) / (2.0 * h);
        worst = worst.max((fd - w.dot(&xi)).abs() / scale);
    }
    Ok(worst)
}

/// Smallest gap between the best and second best center over all data
/// points; `+∞` with a single center.
pub fn assignment_margin(centers: &ManifoldPoint, data: &LabeledDataset, kind: DissimilarityKind) -> f64 {
    let mut margin = f64::INFINITY;
    for y in data.points() {
        let mut d: Vec<f64> = centers.coords().parts().iter().map(|c| dissimilarity(kind, c, y)).collect();
        if d.len() < 2 {
            continue;
        }
        d.sort_by(f64::total_cmp);
        margin = margin.min(d[1] - d[0]);
    }
    margin
}

/// `|scale·(g − h) + constant − φ| / max(|φ|, 1)` at `x`.
pub fn dc_identity_residual<O: DcObjective + ?Sized>(oracle: &O, x: &ManifoldPoint, rho: f64) -> Result<f64> {
    let phi = oracle.value(x)?;
    let c = oracle.dc_components(x.coords(), rho)?;
    Ok((c.objective_value() - phi).abs() / phi.abs().max(1.0))
}

/// `‖scale·(∇g − ∂h) − w‖ / max(‖w‖, 1)`, comparing the DC pieces with the
/// objective's own subgradient. Meaningful where `h` is differentiable.
pub fn dc_gradient_residual<O: DcObjective + ?Sized>(oracle: &O, x: &ManifoldPoint, rho: f64) -> Result<f64> {
    let w = oracle.evaluate(x)?.subgradient;
    let c = oracle.dc_components(x.coords(), rho)?;
    let g = c.g_gradient.sub(&c.h_subgradient).scale(c.scale);
    Ok(g.sub(&w).norm() / w.norm().max(1.0))
}

/// Counts sampled `y` near `x` with
/// `φ(y) > φ(x) + ⟨w, y − x⟩ + κ‖y − x‖²`, `‖y − x‖ ≤ radius`.
pub fn upper_c2_violations<O, R>(oracle: &O, x: &ManifoldPoint, pairs: usize, radius: f64, kappa: f64, rng: &mut R) -> Result<usize>
where
    O: Objective + ?Sized,
    R: Rng + ?Sized,
{
    if !x.manifold().is_linear() {
        return invalid("the upper-C2 sampling check is implemented for vector spaces");
    }
    let ObjectiveEvaluation { value, subgradient } = oracle.evaluate(x)?;
    let mut violations = 0;
    for _ in 0..pairs {
        let mut dir = random_ambient(x.manifold(), rng);
        let r = radius * rng.random::<f64>() / dir.norm();
        dir.scale_mut(r);
        let y = ManifoldPoint::new_unchecked(x.manifold().clone(), x.coords().add(&dir))?;
        let bound = value + subgradient.dot(&dir) + kappa * dir.norm_squared();
        if oracle.value(&y)? > bound + 1e-12 * value.abs().max(1.0) {
            violations += 1;
        }
    }
    Ok(violations)
}

/// Uniformly random orthogonal `p × p` matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(p: usize, rng: &mut R) -> DMatrix<f64> {
    qr_factor(&gaussian_matrix(p, p, rng))
}

/// `|φ(XQ) − φ(X)| / max(|φ(X)|, 1)` for independent random orthogonal `Q`
/// on every Grassmann factor.
pub fn grassmann_invariance_residual<O, R>(oracle: &O, x: &ManifoldPoint, rng: &mut R) -> Result<f64>
where
    O: Objective + ?Sized,
    R: Rng + ?Sized,
{
    let parts = x
        .manifold()
        .factors()
        .iter()
        .zip(x.coords().parts())
        .map(|(f, u)| match f {
            Factor::GrassmannStiefel { p, .. } => u * random_orthogonal(*p, rng),
            _ => u.clone(),
        })
        .collect();
    let rotated = ManifoldPoint::new(x.manifold().clone(), Ambient::new(parts))?;
    let a = oracle.value(x)?;
    let b = oracle.value(&rotated)?;
    Ok((a - b).abs() / a.abs().max(1.0))
}

/// Wraps an objective and negates its subgradients. Used to confirm that
/// the checks detect a broken oracle.
pub struct SignFlipped<O>(pub O);

impl<O: Objective> Objective for SignFlipped<O> {
    fn manifold(&self) -> &Manifold {
        self.0.manifold()
    }

    fn value(&self, x: &ManifoldPoint) -> Result<f64> {
        self.0.value(x)
    }

    fn evaluate(&self, x: &ManifoldPoint) -> Result<ObjectiveEvaluation> {
        let mut e = self.0.evaluate(x)?;
        e.subgradient.scale_mut(-1.0);
        Ok(e)
    }
}
