use super::{zero_order, Kind, Provenance, SingularRecord};
use crate::error::{NevError, Result};
use crate::model::Expr;
use crate::quad::integrate;
use crate::tolerances::{
    BOUNDARY_CLEARANCE, BOX_PERTURB, MAX_CELLS, MAX_DEPTH, MIN_CELL, NEWTON_STEP_TOL, SPLIT_RETRIES, WINDING_INT_TOL,
};
use crate::C64;
use serde::Serialize;
use std::f64::consts::TAU;

/// Split fractions tried in order; none is exactly 1/2 so lattice-aligned
/// singularities do not land on split lines.
const SPLITS: [f64; SPLIT_RETRIES] = [0.5137, 0.4781, 0.5311, 0.4629, 0.5473, 0.4417, 0.5589, 0.4261];
/// Absolute tolerance per segment integral of `g'/g`.
const SEGMENT_TOL: f64 = TAU * 1e-5;
const SEGMENT_PANELS: usize = 4000;
/// Modified Newton is only tried on clusters up to this multiplicity.
const NEWTON_MAX_MULT: i64 = 12;

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Rect> {
        if !(x1 > x0 && y1 > y0) {
            return Err(NevError::InvalidParameter("empty rectangle".into()));
        }
        Ok(Rect { x0, x1, y0, y1 })
    }

    fn contains(&self, z: C64) -> bool {
        z.re > self.x0 && z.re < self.x1 && z.im > self.y0 && z.im < self.y1
    }

    fn boundary_distance(&self, z: C64) -> f64 {
        let dx = (z.re - self.x0).abs().min((z.re - self.x1).abs());
        let dy = (z.im - self.y0).abs().min((z.im - self.y1).abs());
        let inside_x = z.re >= self.x0 && z.re <= self.x1;
        let inside_y = z.im >= self.y0 && z.im <= self.y1;
        match (inside_x, inside_y) {
            (true, true) => dx.min(dy),
            (true, false) => dy,
            (false, true) => dx,
            (false, false) => dx.hypot(dy),
        }
    }

    fn diameter(&self) -> f64 {
        (self.x1 - self.x0).hypot(self.y1 - self.y0)
    }

    fn center(&self) -> C64 {
        C64::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    fn corners(&self) -> [C64; 4] {
        [
            C64::new(self.x0, self.y0),
            C64::new(self.x1, self.y0),
            C64::new(self.x1, self.y1),
            C64::new(self.x0, self.y1),
        ]
    }
}

struct Walker<'a> {
    g: &'a Expr,
    dg: Expr,
    poles: &'a [SingularRecord],
}

impl<'a> Walker<'a> {
    fn new(g: &'a Expr, poles: &'a [SingularRecord]) -> Self {
        Walker {
            g,
            dg: g.differentiate(),
            poles,
        }
    }

    /// `∫ g'/g dz` along the segment `a -> b`, or `None` when it does not converge.
    fn segment(&self, a: C64, b: C64) -> Option<C64> {
        let d = b - a;
        // Unit-length starting panels, so features of `g'/g` narrower than the edge are not stepped over.
        let pieces = d.norm().ceil().max(1.0) as usize;
        let breaks: Vec<f64> = (1..pieces).map(|k| k as f64 / pieces as f64).collect();
        let out = integrate(
            |t| d * self.dg.eval_quotient(self.g, a + d * t),
            0.0,
            1.0,
            &breaks,
            SEGMENT_TOL,
            0.0,
            SEGMENT_PANELS + pieces,
        );
        (out.converged && out.value.is_finite()).then_some(out.value)
    }

    fn clear_of_poles(&self, r: &Rect) -> bool {
        self.poles
            .iter()
            .all(|p| r.boundary_distance(p.location) >= BOUNDARY_CLEARANCE)
    }

    fn poles_inside(&self, r: &Rect) -> i64 {
        self.poles
            .iter()
            .filter(|p| r.contains(p.location))
            .map(|p| p.order as i64)
            .sum()
    }

    fn winding(&self, r: &Rect) -> Option<i64> {
        let c = r.corners();
        let mut total = C64::new(0.0, 0.0);
        for k in 0..4 {
            total += self.segment(c[k], c[(k + 1) % 4])?;
        }
        to_integer(total)
    }

    fn newton(&self, r: &Rect, k: i64) -> Option<C64> {
        let mut z = r.center();
        for _ in 0..60 {
            let q = self.g.eval_quotient(&self.dg, z);
            if !q.is_finite() {
                return None;
            }
            let step = q * k as f64;
            z -= step;
            if !r.contains(z) {
                return None;
            }
            if step.norm() <= NEWTON_STEP_TOL * (1.0 + z.norm()) {
                return Some(z);
            }
        }
        None
    }

    /// Children of `r` split at fractions `(f, f)`, with zero counts, or `None` on failure.
    fn split(&self, r: &Rect, f: f64) -> Option<[(Rect, i64); 4]> {
        let xm = r.x0 + f * (r.x1 - r.x0);
        let ym = r.y0 + f * (r.y1 - r.y0);
        let kids = [
            Rect {
                x0: r.x0,
                x1: xm,
                y0: r.y0,
                y1: ym,
            },
            Rect {
                x0: xm,
                x1: r.x1,
                y0: r.y0,
                y1: ym,
            },
            Rect {
                x0: xm,
                x1: r.x1,
                y0: ym,
                y1: r.y1,
            },
            Rect {
                x0: r.x0,
                x1: xm,
                y0: ym,
                y1: r.y1,
            },
        ];
        if !kids.iter().all(|k| self.clear_of_poles(k)) {
            return None;
        }
        let p = |x: f64, y: f64| C64::new(x, y);
        let b1 = self.segment(p(r.x0, r.y0), p(xm, r.y0))?;
        let b2 = self.segment(p(xm, r.y0), p(r.x1, r.y0))?;
        let r1 = self.segment(p(r.x1, r.y0), p(r.x1, ym))?;
        let r2 = self.segment(p(r.x1, ym), p(r.x1, r.y1))?;
        let t2 = self.segment(p(r.x1, r.y1), p(xm, r.y1))?;
        let t1 = self.segment(p(xm, r.y1), p(r.x0, r.y1))?;
        let l2 = self.segment(p(r.x0, r.y1), p(r.x0, ym))?;
        let l1 = self.segment(p(r.x0, ym), p(r.x0, r.y0))?;
        let h1 = self.segment(p(r.x0, ym), p(xm, ym))?;
        let h2 = self.segment(p(xm, ym), p(r.x1, ym))?;
        let v1 = self.segment(p(xm, r.y0), p(xm, ym))?;
        let v2 = self.segment(p(xm, ym), p(xm, r.y1))?;
        let w = [
            to_integer(b1 + v1 - h1 + l1)?,
            to_integer(b2 + r1 - h2 - v1)?,
            to_integer(h2 + r2 + t2 - v2)?,
            to_integer(h1 + v2 + t1 + l2)?,
        ];
        let mut out = [(kids[0], 0); 4];
        for i in 0..4 {
            let z = w[i] + self.poles_inside(&kids[i]);
            if z < 0 {
                return None;
            }
            out[i] = (kids[i], z);
        }
        Some(out)
    }
}

fn to_integer(total: C64) -> Option<i64> {
    let w = total / C64::new(0.0, TAU);
    let n = w.re.round();
    ((w - n).norm() <= WINDING_INT_TOL).then_some(n as i64)
}

/// Zeros minus poles of `f` inside `rect`, from the boundary winding of `f'/f`.
///
/// The box is perturbed by up to `1e-5` when the boundary passes too close to a
/// singularity.
pub fn argument_principle_count(f: &Expr, rect: Rect) -> Result<i64> {
    let w = Walker::new(f, &[]);
    for k in 0..SPLIT_RETRIES {
        let e = BOX_PERTURB * (SPLITS[k] - 0.5) * 2.0 * (k as f64).min(1.0);
        let r = Rect {
            x0: rect.x0 - e,
            x1: rect.x1 + e * 0.7,
            y0: rect.y0 - e * 0.3,
            y1: rect.y1 + e * 0.9,
        };
        if let Some(n) = w.winding(&r) {
            return Ok(n);
        }
    }
    Err(NevError::BoundaryCollision(
        "winding integral did not settle on an integer".into(),
    ))
}

/// Zeros of `g` in the square circumscribing the disk of the given radius.
pub(super) fn quadtree_zeros(
    g: &Expr,
    radius: f64,
    poles: &[SingularRecord],
    kind: Kind,
) -> Result<Vec<SingularRecord>> {
    let w = Walker::new(g, poles);
    let mut root = None;
    for k in 0..SPLIT_RETRIES {
        let e = BOX_PERTURB * (SPLITS[k] - 0.5) * 2.0;
        let half = radius * (1.0 + 1e-7) + 1e-7 + e.abs();
        let r = Rect {
            x0: -half + e,
            x1: half + e,
            y0: -half - 0.5 * e,
            y1: half - 0.5 * e,
        };
        if !w.clear_of_poles(&r) {
            continue;
        }
        if let Some(n) = w.winding(&r) {
            root = Some((r, n + w.poles_inside(&r)));
            break;
        }
    }
    let (root, count) =
        root.ok_or_else(|| NevError::BoundaryCollision("no clean root box for the zero search".into()))?;
    if count < 0 {
        return Err(NevError::PrecisionFailure("negative zero count".into()));
    }
    let mut out = Vec::new();
    let mut stack = vec![(root, count, 0usize)];
    let mut cells = 0usize;
    while let Some((r, k, depth)) = stack.pop() {
        if k == 0 {
            continue;
        }
        cells += 1;
        if cells > MAX_CELLS {
            return Err(NevError::PrecisionFailure("quadtree cell budget exhausted".into()));
        }
        if k <= NEWTON_MAX_MULT {
            if let Some(z) = w.newton(&r, k) {
                if zero_order(g, z)? as i64 == k {
                    out.push(SingularRecord {
                        location: z,
                        order: k as u32,
                        kind,
                        provenance: Provenance::Numeric,
                    });
                    continue;
                }
            }
        }
        if r.diameter() <= MIN_CELL || depth >= MAX_DEPTH {
            out.push(SingularRecord {
                location: r.center(),
                order: k as u32,
                kind,
                provenance: Provenance::Numeric,
            });
            continue;
        }
        let kids = SPLITS
            .iter()
            .find_map(|f| w.split(&r, *f).filter(|c| c.iter().map(|x| x.1).sum::<i64>() == k))
            .ok_or_else(|| {
                NevError::PrecisionFailure(format!("cell count disagreement near {} at depth {depth}", r.center()))
            })?;
        for (c, n) in kids.into_iter().rev() {
            stack.push((c, n, depth + 1));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse;

    #[test]
    fn counts_in_boxes() {
        let unit = Rect::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        assert_eq!(argument_principle_count(&parse("z^3").unwrap(), unit).unwrap(), 3);
        let f = parse("(z-0.5)/(z+0.5)^2").unwrap();
        assert_eq!(argument_principle_count(&f, unit).unwrap(), -1);
        let strip = Rect::new(-1.0, 1.0, 5.0, 7.0).unwrap();
        assert_eq!(argument_principle_count(&parse("exp(z)-1").unwrap(), strip).unwrap(), 1);
    }
}
