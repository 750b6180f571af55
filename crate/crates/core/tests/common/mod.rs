//! Test oracles shared by the integration targets.
//!
//! The exact Riemann solver is written against the classical Euler equations
//! (pressure-velocity iteration on the two-shock/rarefaction functions) and
//! is independent of the production code, which never uses it.

#![allow(dead_code)]

/// Ideal-gas state `(rho, u, p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prim {
    pub rho: f64,
    pub u: f64,
    pub p: f64,
}

impl Prim {
    pub fn new(rho: f64, u: f64, p: f64) -> Self {
        Prim { rho, u, p }
    }
}

/// Exact solution of the 1D Riemann problem for the non-dimensional Euler
/// equations whose momentum flux is `rho u^2 + p / M^2`.
///
/// With `u~ = M u` and `t~ = t / M` the system is the classical one, so the
/// classical solution is sampled at `(x - x0) / t~` and the velocity mapped
/// back.
#[derive(Debug, Clone, Copy)]
pub struct ExactRiemann {
    gamma: f64,
    mach: f64,
    left: Prim,
    right: Prim,
    p_star: f64,
    u_star: f64,
}

impl ExactRiemann {
    pub fn new(gamma: f64, mach: f64, left: Prim, right: Prim) -> Self {
        let l = Prim { u: mach * left.u, ..left };
        let r = Prim { u: mach * right.u, ..right };
        let (p_star, u_star) = star_region(gamma, l, r);
        ExactRiemann { gamma, mach, left: l, right: r, p_star, u_star }
    }

    /// Star pressure and non-dimensional star velocity.
    pub fn star(&self) -> (f64, f64) {
        (self.p_star, self.u_star / self.mach)
    }

    /// Classical star densities left and right of the contact.
    pub fn star_densities(&self) -> (f64, f64) {
        let g = self.gamma;
        let side = |s: Prim| {
            let ratio = self.p_star / s.p;
            if ratio > 1.0 {
                let q = (g - 1.0) / (g + 1.0);
                s.rho * (ratio + q) / (ratio * q + 1.0)
            } else {
                s.rho * ratio.powf(1.0 / g)
            }
        };
        (side(self.left), side(self.right))
    }

    /// Positions at time `t` of the left wave head, contact and right wave head.
    pub fn wave_positions(&self, x0: f64, t: f64) -> [f64; 3] {
        let tt = t / self.mach;
        let g = self.gamma;
        let head = |s: Prim, sign: f64| {
            let c = (g * s.p / s.rho).sqrt();
            let ratio = self.p_star / s.p;
            if ratio > 1.0 {
                s.u + sign * c * ((g + 1.0) / (2.0 * g) * ratio + (g - 1.0) / (2.0 * g)).sqrt()
            } else {
                s.u + sign * c
            }
        };
        [
            x0 + head(self.left, -1.0) * tt,
            x0 + self.u_star * tt,
            x0 + head(self.right, 1.0) * tt,
        ]
    }

    /// Non-dimensional `(rho, u, p)` at `x` and time `t > 0`.
    pub fn sample(&self, x0: f64, x: f64, t: f64) -> Prim {
        let s = (x - x0) / (t / self.mach);
        let w = sample_classical(self.gamma, self.left, self.right, self.p_star, self.u_star, s);
        Prim { u: w.u / self.mach, ..w }
    }

    /// Cell averages on `n` uniform cells of `[0, 1]`, by `sub`-point midpoint
    /// quadrature per cell.
    pub fn cell_averages(&self, x0: f64, t: f64, n: usize, sub: usize) -> Vec<Prim> {
        let dx = 1.0 / n as f64;
        (0..n)
            .map(|i| {
                let mut acc = [0.0; 3];
                for q in 0..sub {
                    let x = (i as f64 + (q as f64 + 0.5) / sub as f64) * dx;
                    let w = self.sample(x0, x, t);
                    acc[0] += w.rho;
                    acc[1] += w.u;
                    acc[2] += w.p;
                }
                let k = sub as f64;
                Prim::new(acc[0] / k, acc[1] / k, acc[2] / k)
            })
            .collect()
    }
}

/// Pressure function of one side and its derivative.
fn side_function(g: f64, s: Prim, p: f64) -> (f64, f64) {
    let c = (g * s.p / s.rho).sqrt();
    if p > s.p {
        let a = 2.0 / ((g + 1.0) * s.rho);
        let b = (g - 1.0) / (g + 1.0) * s.p;
        let root = (a / (p + b)).sqrt();
        ((p - s.p) * root, root * (1.0 - 0.5 * (p - s.p) / (b + p)))
    } else {
        let ratio = p / s.p;
        let f = 2.0 * c / (g - 1.0) * (ratio.powf((g - 1.0) / (2.0 * g)) - 1.0);
        let df = ratio.powf(-(g + 1.0) / (2.0 * g)) / (s.rho * c);
        (f, df)
    }
}

fn star_region(g: f64, l: Prim, r: Prim) -> (f64, f64) {
    let cl = (g * l.p / l.rho).sqrt();
    let cr = (g * r.p / r.rho).sqrt();
    assert!(
        2.0 * (cl + cr) / (g - 1.0) > r.u - l.u,
        "vacuum generated by the data"
    );
    // two-rarefaction guess
    let z = (g - 1.0) / (2.0 * g);
    let mut p = ((cl + cr - 0.5 * (g - 1.0) * (r.u - l.u)) / (cl / l.p.powf(z) + cr / r.p.powf(z))).powf(1.0 / z);
    p = p.max(1e-14);
    for _ in 0..100 {
        let (fl, dfl) = side_function(g, l, p);
        let (fr, dfr) = side_function(g, r, p);
        let next = (p - (fl + fr + r.u - l.u) / (dfl + dfr)).max(1e-14);
        let change = 2.0 * (next - p).abs() / (next + p);
        p = next;
        if change < 1e-15 {
            break;
        }
    }
    let (fl, _) = side_function(g, l, p);
    let (fr, _) = side_function(g, r, p);
    (p, 0.5 * (l.u + r.u) + 0.5 * (fr - fl))
}

fn sample_classical(g: f64, l: Prim, r: Prim, ps: f64, us: f64, s: f64) -> Prim {
    let gm = (g - 1.0) / (g + 1.0);
    if s <= us {
        let c = (g * l.p / l.rho).sqrt();
        if ps > l.p {
            let ratio = ps / l.p;
            let speed = l.u - c * ((g + 1.0) / (2.0 * g) * ratio + (g - 1.0) / (2.0 * g)).sqrt();
            if s <= speed {
                l
            } else {
                Prim::new(l.rho * (ratio + gm) / (ratio * gm + 1.0), us, ps)
            }
        } else {
            let head = l.u - c;
            let c_star = c * (ps / l.p).powf((g - 1.0) / (2.0 * g));
            let tail = us - c_star;
            if s <= head {
                l
            } else if s >= tail {
                Prim::new(l.rho * (ps / l.p).powf(1.0 / g), us, ps)
            } else {
                let k = 2.0 / (g + 1.0) + gm / c * (l.u - s);
                Prim::new(
                    l.rho * k.powf(2.0 / (g - 1.0)),
                    2.0 / (g + 1.0) * (c + 0.5 * (g - 1.0) * l.u + s),
                    l.p * k.powf(2.0 * g / (g - 1.0)),
                )
            }
        }
    } else {
        let c = (g * r.p / r.rho).sqrt();
        if ps > r.p {
            let ratio = ps / r.p;
            let speed = r.u + c * ((g + 1.0) / (2.0 * g) * ratio + (g - 1.0) / (2.0 * g)).sqrt();
            if s >= speed {
                r
            } else {
                Prim::new(r.rho * (ratio + gm) / (ratio * gm + 1.0), us, ps)
            }
        } else {
            let head = r.u + c;
            let c_star = c * (ps / r.p).powf((g - 1.0) / (2.0 * g));
            let tail = us + c_star;
            if s >= head {
                r
            } else if s <= tail {
                Prim::new(r.rho * (ps / r.p).powf(1.0 / g), us, ps)
            } else {
                let k = 2.0 / (g + 1.0) - gm / c * (r.u - s);
                Prim::new(
                    r.rho * k.powf(2.0 / (g - 1.0)),
                    2.0 / (g + 1.0) * (-c + 0.5 * (g - 1.0) * r.u + s),
                    r.p * k.powf(2.0 * g / (g - 1.0)),
                )
            }
        }
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// First position where `values` crosses `level` going left to right within
/// `[lo, hi)`, linearly interpolated between cell centres `(i + 1/2) dx`.
pub fn crossing(values: &[f64], level: f64, lo: usize, hi: usize) -> Option<f64> {
    let dx = 1.0 / values.len() as f64;
    (lo..hi.min(values.len()) - 1).find_map(|i| {
        let (a, b) = (values[i] - level, values[i + 1] - level);
        (a == 0.0 || a * b < 0.0).then(|| (i as f64 + 0.5 + a / (a - b)) * dx)
    })
}
