//! Planar C¹ vector fields `(ẋ, ẏ) = (P(x, y), Q(x, y))`.
//!
//! A [`FieldDef`] is either one of the [`Builtin`] systems or a pair of
//! parsed expressions. Every field can be evaluated pointwise ([`FieldDef::eval_velocity`]),
//! with exact first derivatives via forward-mode dual numbers ([`FieldDef::jet`]),
//! and with sound interval enclosures over a box ([`FieldDef::interval_jet`]).

pub mod bump;
pub mod expr;
pub mod interval;
pub mod scalar;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use bump::{alpha_bump, BumpShape};
pub use expr::{ExprAst, Params, ParseError, ParseErrorKind};
pub use interval::Interval;
pub use scalar::{Base, Dual, Scalar};

use crate::error::{Error, Result};
use crate::geom::{Point, Region};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "id")]
pub enum Builtin {
    /// ẋ = −y, ẏ = x.
    LinearRotation,
    /// ẋ = y, ẏ = −x − y³.
    CubicDamped,
    /// ẋ = y − x α(r), ẏ = −x − y α(r) with the radial bump α.
    BumpAnnulus { shape: BumpShape },
}

impl Builtin {
    pub const NAMES: [&'static str; 3] = ["linear_rotation", "cubic_damped", "bump_annulus"];

    pub fn name(&self) -> &'static str {
        match self {
            Builtin::LinearRotation => "linear_rotation",
            Builtin::CubicDamped => "cubic_damped",
            Builtin::BumpAnnulus { .. } => "bump_annulus",
        }
    }

    pub fn is_analytic(&self) -> bool {
        !matches!(self, Builtin::BumpAnnulus { .. })
    }

    fn eval<S: Scalar>(&self, x: S, y: S) -> (S, S) {
        match self {
            Builtin::LinearRotation => (-y, x),
            Builtin::CubicDamped => (y.clone(), -x - y.powi(3)),
            Builtin::BumpAnnulus { shape } => {
                let a = (x.powi(2) + y.powi(2)).radial_bump(shape);
                (y.clone() - x.clone() * a.clone(), -x - y * a)
            }
        }
    }

    /// Closed-form Jacobian, trace and determinant of the annulus field,
    /// written so that every product of a coordinate with itself is an even
    /// power. Used to tighten the dual-number enclosure.
    fn bump_closed_form(shape: &BumpShape, x: Interval, y: Interval) -> ([[Interval; 2]; 2], Interval, Interval) {
        let two = Interval::point(2.0);
        let s = x.powi(2) + y.powi(2);
        let (a, slope) = s.radial_bump_with_slope(shape);
        let xy2 = two * x * y * slope;
        let jac = [[-a - two * x.powi(2) * slope, Interval::point(1.0) - xy2], [Interval::point(-1.0) - xy2, -a - two * y.powi(2) * slope]];
        // T = -2α - rα' = -2α - 2 s slope ; D = 1 + α² + rαα' = 1 + α² + 2 s α slope
        let trace = -(two * a) - two * s * slope;
        let det = Interval::point(1.0) + a.powi(2) + two * s * a * slope;
        (jac, trace, det)
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Builtin {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "linear_rotation" => Ok(Builtin::LinearRotation),
            "cubic_damped" => Ok(Builtin::CubicDamped),
            "bump_annulus" => Ok(Builtin::BumpAnnulus { shape: BumpShape::ANNULUS }),
            other => Err(Error::InvalidArgument(format!("unknown builtin `{other}` (expected one of {})", Builtin::NAMES.join(", ")))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldSource {
    Builtin(Builtin),
    Expr { p: ExprAst, q: ExprAst },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldDef {
    pub name: String,
    pub source: FieldSource,
    pub params: Params,
    /// User-declared; never inferred.
    pub analytic: bool,
    shift: Point,
    reversed: bool,
}

impl FieldDef {
    pub fn builtin(b: Builtin) -> Self {
        Self {
            name: b.name().to_string(),
            source: FieldSource::Builtin(b),
            params: Params::new(),
            analytic: b.is_analytic(),
            shift: Point::ORIGIN,
            reversed: false,
        }
    }

    pub fn linear_rotation() -> Self {
        Self::builtin(Builtin::LinearRotation)
    }

    pub fn cubic_damped() -> Self {
        Self::builtin(Builtin::CubicDamped)
    }

    pub fn bump_annulus() -> Self {
        Self::bump_annulus_with(BumpShape::ANNULUS)
    }

    pub fn bump_annulus_with(shape: BumpShape) -> Self {
        Self::builtin(Builtin::BumpAnnulus { shape })
    }

    pub fn from_exprs(name: impl Into<String>, p: ExprAst, q: ExprAst, params: Params) -> Self {
        Self { name: name.into(), source: FieldSource::Expr { p, q }, params, analytic: false, shift: Point::ORIGIN, reversed: false }
    }

    pub fn with_analytic(mut self, analytic: bool) -> Self {
        self.analytic = analytic;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// The field pre-composed with a translation: `G(p) = F(p - by)`, so a
    /// critical point `O` of `F` becomes `O + by`.
    pub fn translated(&self, by: Point) -> Self {
        let mut out = self.clone();
        out.shift = out.shift + by;
        out
    }

    /// `-F`, whose forward flow is the backward flow of `F`.
    pub fn reversed(&self) -> Self {
        let mut out = self.clone();
        out.reversed = !out.reversed;
        out
    }

    pub fn shift(&self) -> Point {
        self.shift
    }

    pub fn is_reversed(&self) -> bool {
        self.reversed
    }

    pub fn builtin_id(&self) -> Option<&Builtin> {
        match &self.source {
            FieldSource::Builtin(b) => Some(b),
            FieldSource::Expr { .. } => None,
        }
    }

    /// Evaluates `(P, Q)` over any scalar type.
    pub fn eval<S: Scalar>(&self, x: S, y: S) -> (S, S) {
        let (x, y) = if self.shift == Point::ORIGIN { (x, y) } else { (x - S::constant(self.shift.x), y - S::constant(self.shift.y)) };
        let (p, q) = match &self.source {
            FieldSource::Builtin(b) => b.eval(x, y),
            FieldSource::Expr { p, q } => (p.eval(&x, &y, &self.params), q.eval(&x, &y, &self.params)),
        };
        if self.reversed {
            (-p, -q)
        } else {
            (p, q)
        }
    }

    pub fn eval_velocity(&self, point: Point) -> Result<Point> {
        if !point.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite evaluation point {point}")));
        }
        let (p, q) = self.eval(point.x, point.y);
        let v = Point::new(p, q);
        if !v.is_finite() {
            return Err(Error::NonFinite { what: "velocity", at: point });
        }
        Ok(v)
    }

    pub fn jet(&self, point: Point) -> Result<JetSample> {
        if !point.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite evaluation point {point}")));
        }
        let (p, q) = self.eval(Dual::var_x(point.x), Dual::var_y(point.y));
        let value = Point::new(p.v, q.v);
        if !value.is_finite() {
            return Err(Error::NonFinite { what: "velocity", at: point });
        }
        let jac = [[p.dx, p.dy], [q.dx, q.dy]];
        if jac.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "derivative", at: point });
        }
        Ok(JetSample::from_jacobian(point, value, jac))
    }

    pub fn interval_jet(&self, region: &Region) -> Result<IntervalJet> {
        let xi = Interval::new(region.xmin, region.xmax);
        let yi = Interval::new(region.ymin, region.ymax);
        let (p, q) = self.eval(Dual::var_x(xi), Dual::var_y(yi));
        let mut jac = [[p.dx, p.dy], [q.dx, q.dy]];
        let mut trace = jac[0][0] + jac[1][1];
        let mut det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if let FieldSource::Builtin(Builtin::BumpAnnulus { shape }) = &self.source {
            let lx = xi - Interval::point(self.shift.x);
            let ly = yi - Interval::point(self.shift.y);
            let (cj, ct, cd) = Builtin::bump_closed_form(shape, lx, ly);
            let sign = if self.reversed { -1.0 } else { 1.0 };
            let flip = |i: Interval| if sign < 0.0 { -i } else { i };
            for r in 0..2 {
                for c in 0..2 {
                    jac[r][c] = jac[r][c].intersect(&flip(cj[r][c]));
                }
            }
            trace = trace.intersect(&flip(ct));
            det = det.intersect(&cd);
        }
        let all = [p.v, q.v, trace, det].into_iter().chain(jac.iter().flatten().copied());
        if all.into_iter().any(|i| !i.is_finite()) {
            return Err(Error::EnclosureFailure { region: *region });
        }
        Ok(IntervalJet { region: *region, p: p.v, q: q.v, jac, trace, det })
    }

    /// Plain-text config section that [`FieldDef::from_config`] reads back.
    pub fn to_config(&self) -> String {
        let mut out = format!("name = {}\n", self.name);
        match &self.source {
            FieldSource::Builtin(b) => {
                out.push_str(&format!("builtin = {}\n", b.name()));
                if let Builtin::BumpAnnulus { shape } = b {
                    out.push_str(&format!("bump_onset = {:?}\nbump_width = {:?}\n", shape.onset, shape.width));
                }
            }
            FieldSource::Expr { p, q } => {
                for (k, v) in &self.params {
                    out.push_str(&format!("param {k} = {v:?}\n"));
                }
                out.push_str(&format!("P = {p}\nQ = {q}\n"));
            }
        }
        out.push_str(&format!("analytic = {}\n", self.analytic));
        if self.shift != Point::ORIGIN {
            out.push_str(&format!("shift = {:?}, {:?}\n", self.shift.x, self.shift.y));
        }
        if self.reversed {
            out.push_str("reversed = true\n");
        }
        out
    }

    /// Reads a field file: `P = ...` / `Q = ...` lines, `param name = value`
    /// lines, optional `name`, `analytic`, `builtin`, `bump_onset`,
    /// `bump_width`, `shift`, `reversed` keys. `#` starts a comment.
    pub fn from_config(text: &str) -> Result<Self> {
        let mut params = Params::new();
        let mut keys: Vec<(String, String, usize)> = Vec::new();
        let mut offset = 0;
        for (lineno, raw) in text.split_inclusive('\n').enumerate() {
            let line_start = offset;
            offset += raw.len();
            let content = raw.split('#').next().unwrap_or("");
            if content.trim().is_empty() {
                continue;
            }
            let Some(eq) = content.find('=') else {
                return Err(Error::InvalidArgument(format!("line {}: expected `key = value`", lineno + 1)));
            };
            let key = content[..eq].trim();
            let value_start = line_start + eq + 1;
            let value = content[eq + 1..].trim_end();
            if let Some(name) = key.strip_prefix("param ") {
                let name = name.trim();
                let v: f64 = value
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("line {}: parameter `{name}` needs a numeric value", lineno + 1)))?;
                if !is_identifier(name) || matches!(name, "x" | "y" | "P" | "Q" | "sin" | "cos" | "exp" | "sqrt") {
                    return Err(Error::InvalidArgument(format!("line {}: invalid parameter name `{name}`", lineno + 1)));
                }
                params.insert(name.to_string(), v);
            } else {
                keys.push((key.to_string(), value.to_string(), value_start));
            }
        }

        let mut name = None;
        let mut analytic = None;
        let mut builtin: Option<Builtin> = None;
        let mut shape = BumpShape::ANNULUS;
        let mut comp_p = None;
        let mut comp_q = None;
        let mut shift = Point::ORIGIN;
        let mut reversed = false;
        let parse_num = |key: &str, v: &str| -> Result<f64> {
            v.trim().parse().map_err(|_| Error::InvalidArgument(format!("`{key}` needs a number, got `{}`", v.trim())))
        };
        for (key, value, start) in &keys {
            match key.as_str() {
                "P" | "Q" => {
                    let e = expr::parse_expr(value, &params).map_err(|e| ParseError { kind: e.kind, pos: e.pos + start })?;
                    let slot = if key == "P" { &mut comp_p } else { &mut comp_q };
                    if slot.replace(e).is_some() {
                        let c = key.chars().next().unwrap_or('?');
                        return Err(ParseError { kind: ParseErrorKind::DuplicateComponent(c), pos: *start }.into());
                    }
                }
                "name" => name = Some(value.trim().to_string()),
                "analytic" => {
                    analytic = Some(match value.trim() {
                        "true" | "yes" | "1" => true,
                        "false" | "no" | "0" => false,
                        other => return Err(Error::InvalidArgument(format!("`analytic` must be true/false, got `{other}`"))),
                    })
                }
                "builtin" => builtin = Some(value.parse()?),
                "bump_onset" => shape.onset = parse_num(key, value)?,
                "bump_width" => shape.width = parse_num(key, value)?,
                "shift" => {
                    let parts: Vec<&str> = value.split(',').collect();
                    if parts.len() != 2 {
                        return Err(Error::InvalidArgument("`shift` needs two comma-separated numbers".into()));
                    }
                    shift = Point::new(parse_num(key, parts[0])?, parse_num(key, parts[1])?);
                }
                "reversed" => reversed = value.trim() == "true",
                other => return Err(Error::InvalidArgument(format!("unknown key `{other}`"))),
            }
        }

        let mut field = match (builtin, comp_p, comp_q) {
            (Some(b), None, None) => {
                let b = match b {
                    Builtin::BumpAnnulus { .. } => Builtin::BumpAnnulus { shape: BumpShape::new(shape.onset, shape.width)? },
                    other => other,
                };
                FieldDef::builtin(b)
            }
            (Some(_), _, _) => {
                return Err(Error::InvalidArgument("a field file cannot set both `builtin` and P/Q".into()));
            }
            (None, Some(p), Some(q)) => FieldDef::from_exprs("expression", p, q, params),
            (None, p, _) => {
                let missing = if p.is_none() { 'P' } else { 'Q' };
                return Err(ParseError { kind: ParseErrorKind::MissingComponent(missing), pos: text.len() }.into());
            }
        };
        if let Some(n) = name {
            field.name = n;
        }
        if let Some(a) = analytic {
            field.analytic = a;
        }
        field.shift = shift;
        field.reversed = reversed;
        Ok(field)
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_') && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parses `P = <expr> ; Q = <expr>` against a parameter table.
pub fn parse_field(src: &str, params: &Params) -> Result<FieldDef> {
    let (p, q) = expr::parse_components(src, params)?;
    Ok(FieldDef::from_exprs("expression", p, q, params.clone()))
}

/// Pointwise first-order data of a field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JetSample {
    pub point: Point,
    /// `(P, Q)`.
    pub value: Point,
    /// `[[P_x, P_y], [Q_x, Q_y]]`.
    pub jac: [[f64; 2]; 2],
    pub trace: f64,
    pub det: f64,
    /// Real parts of the eigenvalues, ascending.
    pub eig_re: (f64, f64),
}

impl JetSample {
    pub fn from_jacobian(point: Point, value: Point, jac: [[f64; 2]; 2]) -> Self {
        let trace = jac[0][0] + jac[1][1];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        Self { point, value, jac, trace, det, eig_re: eigen_real_parts(trace, det) }
    }

    /// True when the Jacobian has a real eigenvalue strictly greater than `tol`.
    pub fn has_real_positive_eigenvalue(&self, tol: f64) -> bool {
        self.trace * self.trace >= 4.0 * self.det && self.eig_re.1 > tol
    }
}

/// Real parts of the eigenvalues of a 2×2 matrix with the given trace and
/// determinant, ascending. Complex pairs share the real part `T/2`.
pub fn eigen_real_parts(trace: f64, det: f64) -> (f64, f64) {
    let disc = trace * trace - 4.0 * det;
    if disc < 0.0 {
        let h = 0.5 * trace;
        return (h, h);
    }
    // larger-magnitude root first, the other from the product to avoid cancellation
    let s = disc.sqrt();
    let big = if trace >= 0.0 { 0.5 * (trace + s) } else { 0.5 * (trace - s) };
    let small = if big == 0.0 { 0.0 } else { det / big };
    if big <= small {
        (big, small)
    } else {
        (small, big)
    }
}

/// Interval enclosures of a field's first-order data over a box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalJet {
    pub region: Region,
    pub p: Interval,
    pub q: Interval,
    pub jac: [[Interval; 2]; 2],
    pub trace: Interval,
    pub det: Interval,
}
