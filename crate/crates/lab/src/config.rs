//! Experiment configuration: parsing, validation and canonical hashing.

use std::fmt;
use std::path::PathBuf;

use latticetherm_core::dynamics::CesaroMethod;
use latticetherm_core::fermion::FermionInteraction;
use latticetherm_core::{CMatrix, DimensionCap, Interaction, InteractionFamily, Point, SubsetShape, C64};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Diagnostic, LabError, Result};
use crate::locate::{locate, FieldPath};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Pressure,
    Gibbs,
    WeakGibbs,
    Equiv,
    Quench,
    FermionQuench,
    Bounds,
}

impl Kind {
    pub const ALL: [Kind; 7] =
        [Kind::Pressure, Kind::Gibbs, Kind::WeakGibbs, Kind::Equiv, Kind::Quench, Kind::FermionQuench, Kind::Bounds];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Pressure => "pressure",
            Kind::Gibbs => "gibbs",
            Kind::WeakGibbs => "weakgibbs",
            Kind::Equiv => "equiv",
            Kind::Quench => "quench",
            Kind::FermionQuench => "fermion-quench",
            Kind::Bounds => "bounds",
        }
    }

    pub fn parse(s: &str) -> Option<Kind> {
        Kind::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Optional and required top-level fields beyond the common ones.
    fn fields(self) -> (&'static [&'static str], &'static [&'static str]) {
        match self {
            Kind::Pressure => (&["phi", "volumes"], &[]),
            Kind::Gibbs => (&["phi", "volumes"], &["probes"]),
            Kind::WeakGibbs => (&["phi", "volumes"], &["psi", "ambient"]),
            Kind::Equiv => (&["phi", "psi", "volumes"], &["tolerance"]),
            Kind::Quench | Kind::FermionQuench => (&["phi", "psi", "ambient", "window"], &["times", "horizons", "averaging"]),
            Kind::Bounds => (&["phi", "volumes"], &["probes", "perturbation_norm"]),
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

const COMMON_FIELDS: [&str; 5] = ["kind", "dimension", "beta", "seed", "output"];

/// A validated experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub dimension: usize,
    pub beta: f64,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub phi: Interaction,
    pub psi: Option<Interaction>,
    /// Cube sides.
    pub volumes: Vec<usize>,
    pub ambient: Option<usize>,
    pub window: Option<usize>,
    pub times: Vec<f64>,
    pub horizons: Vec<f64>,
    pub averaging: CesaroMethod,
    pub probes: usize,
    pub perturbation_norm: f64,
    pub tolerance: f64,
    /// Sorted-key compact JSON of the input document.
    pub canonical: String,
    /// SHA-256 of `canonical`, hex.
    pub hash: String,
}

impl ExperimentConfig {
    /// Largest number of sites any dense operator of this run lives on.
    pub fn max_sites(&self) -> usize {
        let side = match self.kind {
            Kind::Quench | Kind::FermionQuench => self.ambient.unwrap_or(0),
            Kind::WeakGibbs => self.weakgibbs_ambient(),
            _ => self.volumes.iter().copied().max().unwrap_or(0),
        };
        side.saturating_pow(self.dimension as u32)
    }

    /// Ambient side for weak-Gibbs windows: explicit, or the largest
    /// `L + 2·max(m, ⌈L/2⌉)` over the requested windows.
    pub fn weakgibbs_ambient(&self) -> usize {
        if let Some(a) = self.ambient {
            return a;
        }
        let m = self.phi.range().max(self.psi.as_ref().map_or(0, Interaction::range));
        self.volumes.iter().map(|&l| l + 2 * m.max(l.div_ceil(2))).max().unwrap_or(0)
    }

    pub fn check_cap(&self, cap: DimensionCap) -> Result<()> {
        cap.check(self.phi.site_dim(), self.max_sites())
            .map(|_| ())
            .map_err(|e| LabError::ResourceCap(format!("{e}; pass --cap-override to raise the cap")))
    }
}

/// Diagnostics factory bound to one source text.
pub(crate) struct Source<'a> {
    text: &'a str,
}

impl<'a> Source<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        Self { text }
    }

    pub(crate) fn err(&self, path: &FieldPath, message: impl Into<String>) -> LabError {
        self.err_at(path, path, message)
    }

    /// Reports `field` at the position of `at` (used when `field` is absent).
    fn err_at(&self, at: &FieldPath, field: &FieldPath, message: impl Into<String>) -> LabError {
        let (line, column) = locate(self.text, at);
        LabError::ConfigInvalid(Diagnostic { line, column, field: field.to_string(), message: message.into() })
    }

    pub(crate) fn parse(&self) -> Result<Value> {
        serde_json::from_str(self.text).map_err(|e| {
            LabError::ConfigInvalid(Diagnostic {
                line: e.line().max(1),
                column: e.column().max(1),
                field: String::new(),
                message: format!("malformed JSON: {e}"),
            })
        })
    }

    fn object<'v>(&self, v: &'v Value, path: &FieldPath) -> Result<&'v Map<String, Value>> {
        v.as_object().ok_or_else(|| self.err(path, format!("expected an object, found {}", type_name(v))))
    }

    fn array<'v>(&self, v: &'v Value, path: &FieldPath) -> Result<&'v Vec<Value>> {
        v.as_array().ok_or_else(|| self.err(path, format!("expected an array, found {}", type_name(v))))
    }

    fn number(&self, v: &Value, path: &FieldPath) -> Result<f64> {
        match v.as_f64() {
            Some(x) if x.is_finite() => Ok(x),
            _ => Err(self.err(path, format!("expected a finite number, found {}", type_name(v)))),
        }
    }

    fn integer(&self, v: &Value, path: &FieldPath) -> Result<u64> {
        v.as_u64().ok_or_else(|| self.err(path, format!("expected a nonnegative integer, found {}", short(v))))
    }

    fn string<'v>(&self, v: &'v Value, path: &FieldPath) -> Result<&'v str> {
        v.as_str().ok_or_else(|| self.err(path, format!("expected a string, found {}", type_name(v))))
    }

    fn only_keys(&self, obj: &Map<String, Value>, allowed: &[&str], path: &FieldPath, context: &str) -> Result<()> {
        match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(self.err(&path.key(k), format!("unknown field in {context}; expected one of: {}", allowed.join(", ")))),
            None => Ok(()),
        }
    }

    fn require<'v>(&self, obj: &'v Map<String, Value>, key: &str, path: &FieldPath) -> Result<&'v Value> {
        obj.get(key).ok_or_else(|| self.err_at(path, &path.key(key), "missing required field"))
    }

    /// Sides: positive integers, strictly increasing.
    fn sides(&self, v: &Value, path: &FieldPath) -> Result<Vec<usize>> {
        let arr = self.array(v, path)?;
        if arr.is_empty() {
            return Err(self.err(path, "needs at least one volume side"));
        }
        let mut out = Vec::with_capacity(arr.len());
        for (i, x) in arr.iter().enumerate() {
            let n = self.side(x, &path.index(i))?;
            if out.last().is_some_and(|&prev| n <= prev) {
                return Err(self.err(&path.index(i), "volume sides must be strictly increasing"));
            }
            out.push(n);
        }
        Ok(out)
    }

    fn side(&self, v: &Value, path: &FieldPath) -> Result<usize> {
        match self.integer(v, path)? {
            0 => Err(self.err(path, "side must be at least 1")),
            n => usize::try_from(n).map_err(|_| self.err(path, "side too large")),
        }
    }

    fn grid(&self, v: &Value, path: &FieldPath, positive: bool) -> Result<Vec<f64>> {
        let arr = self.array(v, path)?;
        let mut out: Vec<f64> = Vec::with_capacity(arr.len());
        for (i, x) in arr.iter().enumerate() {
            let t = self.number(x, &path.index(i))?;
            if t < 0.0 || (positive && t == 0.0) {
                let what = if positive { "positive" } else { "nonnegative" };
                return Err(self.err(&path.index(i), format!("must be {what}, got {t}")));
            }
            if out.last().is_some_and(|&prev| t <= prev) {
                return Err(self.err(&path.index(i), "grid must be strictly increasing"));
            }
            out.push(t);
        }
        Ok(out)
    }

    /// One interaction block or an array of blocks to be summed.
    pub(crate) fn interaction(&self, v: &Value, path: &FieldPath, dimension: usize) -> Result<Interaction> {
        if let Some(parts) = v.as_array() {
            let mut iter = parts.iter().enumerate();
            let (_, first) = iter.next().ok_or_else(|| self.err(path, "empty list of interaction blocks"))?;
            let mut sum = self.block(first, &path.index(0), dimension)?;
            for (i, b) in iter {
                let next = self.block(b, &path.index(i), dimension)?;
                sum = sum.add(&next).map_err(|e| self.err(&path.index(i), e.to_string()))?;
            }
            return Ok(sum);
        }
        self.block(v, path, dimension)
    }

    fn block(&self, v: &Value, path: &FieldPath, dimension: usize) -> Result<Interaction> {
        let obj = self.object(v, path)?;
        if let Some(t) = obj.get("type") {
            let ty = self.string(t, &path.key("type"))?;
            if ty != "fermion" {
                return Err(self.err(&path.key("type"), format!("unknown block type '{ty}'; only \"fermion\" is typed")));
            }
            if dimension != 1 {
                return Err(self.err(&path.key("type"), format!("fermion blocks need dimension 1, config has {dimension}")));
            }
            return self.fermion(obj, path)?.to_interaction().map_err(|e| self.err(path, e.to_string()));
        }
        if obj.contains_key("family") {
            return self.family(obj, path, dimension);
        }
        if obj.contains_key("terms") || obj.contains_key("site_dim") {
            let phi = self.explicit(obj, path, dimension)?;
            if phi.dimension() != dimension {
                return Err(self.err(
                    &path.key("terms"),
                    format!("terms live in dimension {}, config has {dimension}", phi.dimension()),
                ));
            }
            return Ok(phi);
        }
        Err(self.err(path, "interaction block needs `family`, `terms` or `type`"))
    }

    pub(crate) fn fermion_block(&self, v: &Value, path: &FieldPath) -> Result<FermionInteraction> {
        let obj = self.object(v, path)?;
        match obj.get("type").and_then(Value::as_str) {
            Some("fermion") => self.fermion(obj, path),
            _ => Err(self.err(path, "expected a fermion block {\"type\": \"fermion\", ...}")),
        }
    }

    fn fermion(&self, obj: &Map<String, Value>, path: &FieldPath) -> Result<FermionInteraction> {
        self.only_keys(obj, &["type", "t", "mu", "V"], path, "fermion block")?;
        let list = |key: &str| -> Result<Vec<f64>> {
            match obj.get(key) {
                None => Ok(Vec::new()),
                Some(v) => {
                    let p = path.key(key);
                    self.array(v, &p)?.iter().enumerate().map(|(i, x)| self.number(x, &p.index(i))).collect()
                }
            }
        };
        let t = list("t")?;
        let density = list("V")?;
        let mu = self.number(self.require(obj, "mu", path)?, &path.key("mu"))?;
        FermionInteraction::new(t, mu, density).map_err(|e| self.err(path, e.to_string()))
    }

    fn family(&self, obj: &Map<String, Value>, path: &FieldPath, dimension: usize) -> Result<Interaction> {
        self.only_keys(obj, &["family", "params"], path, "built-in block")?;
        let name = self.string(&obj["family"], &path.key("family"))?;
        let names = InteractionFamily::parameter_names(name).ok_or_else(|| {
            self.err(&path.key("family"), format!("unknown family '{name}'; expected one of: {}", family_names().join(", ")))
        })?;
        let mut values = Vec::new();
        if let Some(p) = obj.get("params") {
            let pp = path.key("params");
            let params = self.object(p, &pp)?;
            self.only_keys(params, names, &pp, &format!("parameters of '{name}'"))?;
            for (k, v) in params {
                values.push((k.clone(), self.number(v, &pp.key(k))?));
            }
        }
        let family = InteractionFamily::from_params(name, |k| values.iter().find(|(n, _)| n == k).map(|(_, v)| *v))
            .map_err(|e| self.err(&path.key("family"), e.to_string()))?;
        family.build(dimension).map_err(|e| self.err(path, e.to_string()))
    }

    /// `{site_dim, terms: [{shape: [[coords]], matrix: [[re, im], …]}]}`,
    /// matrices row-major. An empty term list gets `empty_dimension`.
    pub(crate) fn explicit(&self, obj: &Map<String, Value>, path: &FieldPath, empty_dimension: usize) -> Result<Interaction> {
        self.only_keys(obj, &["site_dim", "terms"], path, "explicit interaction")?;
        let dp = path.key("site_dim");
        let site_dim = self.integer(self.require(obj, "site_dim", path)?, &dp)? as usize;
        if site_dim < 2 {
            return Err(self.err(&dp, format!("site dimension must be at least 2, got {site_dim}")));
        }
        let tp = path.key("terms");
        let terms = self.array(self.require(obj, "terms", path)?, &tp)?;
        let mut phi: Option<Interaction> = None;
        for (i, term) in terms.iter().enumerate() {
            let p = tp.index(i);
            let tobj = self.object(term, &p)?;
            self.only_keys(tobj, &["shape", "matrix"], &p, "term")?;
            let sp = p.key("shape");
            let shape_points = self.array(self.require(tobj, "shape", &p)?, &sp)?;
            let mut points = Vec::with_capacity(shape_points.len());
            for (k, pt) in shape_points.iter().enumerate() {
                let cp = sp.index(k);
                let coords = self.array(pt, &cp)?;
                let mut c = Vec::with_capacity(coords.len());
                for (j, x) in coords.iter().enumerate() {
                    c.push(x.as_i64().ok_or_else(|| self.err(&cp.index(j), format!("expected an integer coordinate, found {}", short(x))))?);
                }
                let point = Point::new(c);
                if points.last().is_some_and(|prev: &Point| &point <= prev) {
                    return Err(self.err(&cp, "shape points must be listed in strictly increasing lexicographic order"));
                }
                points.push(point);
            }
            let shape = SubsetShape::normalized(points).map_err(|e| self.err(&sp, e.to_string()))?;
            let mp = p.key("matrix");
            let entries = self.array(self.require(tobj, "matrix", &p)?, &mp)?;
            let n = site_dim.checked_pow(shape.len() as u32).filter(|n| n * n == entries.len()).ok_or_else(|| {
                self.err(&mp, format!("expected (site_dim^|shape|)^2 = {} entries, found {}", expected_len(site_dim, shape.len()), entries.len()))
            })?;
            let mut values = Vec::with_capacity(n * n);
            for (k, e) in entries.iter().enumerate() {
                let ep = mp.index(k);
                let pair = self.array(e, &ep)?;
                if pair.len() != 2 {
                    return Err(self.err(&ep, "matrix entries are [re, im] pairs"));
                }
                values.push(C64::new(self.number(&pair[0], &ep.index(0))?, self.number(&pair[1], &ep.index(1))?));
            }
            let matrix = CMatrix::from_row_slice(n, n, &values);
            let target = match &mut phi {
                Some(phi) => phi,
                None => phi.insert(Interaction::new(site_dim, shape.dimension()).map_err(|e| self.err(&dp, e.to_string()))?),
            };
            target.add_term(shape, matrix).map_err(|e| self.err(&p, e.to_string()))?;
        }
        match phi {
            Some(phi) => Ok(phi),
            None => Interaction::new(site_dim, empty_dimension).map_err(|e| self.err(&dp, e.to_string())),
        }
    }
}

fn expected_len(site_dim: usize, sites: usize) -> String {
    site_dim.checked_pow(2 * sites as u32).map_or_else(|| "too many".into(), |n| n.to_string())
}

fn family_names() -> Vec<&'static str> {
    ["ising_transverse", "xy", "xxz", "heisenberg", "onsite_field", "fermion_hopping"].to_vec()
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

fn short(v: &Value) -> String {
    match v {
        Value::Number(n) => n.to_string(),
        other => type_name(other).to_owned(),
    }
}

/// Sorted-key compact serialization; invariant under key reordering.
pub fn canonical_json(v: &Value) -> String {
    // serde_json's default map is a BTreeMap, so keys serialize sorted.
    serde_json::to_string(v).expect("JSON values serialize")
}

pub fn config_hash(canonical: &str) -> String {
    format!("{:x}", Sha256::digest(canonical.as_bytes()))
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let src = Source::new(text);
    let doc = src.parse()?;
    let root = FieldPath::root();
    let obj = src.object(&doc, &root)?;

    let kind_field = root.key("kind");
    let kind_name = src.string(src.require(obj, "kind", &root)?, &kind_field)?;
    let kind = Kind::parse(kind_name).ok_or_else(|| {
        let names: Vec<_> = Kind::ALL.iter().map(|k| k.name()).collect();
        src.err(&kind_field, format!("unknown experiment kind '{kind_name}'; expected one of: {}", names.join(", ")))
    })?;
    let (required, optional) = kind.fields();
    let allowed: Vec<&str> = COMMON_FIELDS.iter().chain(required).chain(optional).copied().collect();
    if let Some(k) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(src.err(&root.key(k), format!("field is not used by kind '{kind}'; allowed: {}", allowed.join(", "))));
    }
    for key in required {
        src.require(obj, key, &root)?;
    }

    let dimension = match obj.get("dimension") {
        None => 1,
        Some(v) => match src.integer(v, &root.key("dimension"))? {
            d @ 1..=3 => d as usize,
            d => return Err(src.err(&root.key("dimension"), format!("lattice dimension must be 1, 2 or 3, got {d}"))),
        },
    };
    if kind == Kind::FermionQuench && dimension != 1 {
        return Err(src.err(&root.key("dimension"), "fermion quenches are one-dimensional"));
    }
    let beta = match obj.get("beta") {
        None => 1.0,
        Some(v) => {
            let b = src.number(v, &root.key("beta"))?;
            if b < 0.0 {
                return Err(src.err(&root.key("beta"), format!("inverse temperature must be nonnegative, got {b}")));
            }
            b
        }
    };
    let seed = obj.get("seed").map(|v| src.integer(v, &root.key("seed"))).transpose()?.unwrap_or(0);
    let output = obj.get("output").map(|v| src.string(v, &root.key("output")).map(PathBuf::from)).transpose()?;

    let phi = if kind == Kind::FermionQuench {
        src.fermion_block(&obj["phi"], &root.key("phi"))?;
        src.interaction(&obj["phi"], &root.key("phi"), dimension)?
    } else {
        src.interaction(&obj["phi"], &root.key("phi"), dimension)?
    };
    let psi = match obj.get("psi") {
        None => None,
        Some(v) => {
            if kind == Kind::FermionQuench {
                src.fermion_block(v, &root.key("psi"))?;
            }
            let psi = src.interaction(v, &root.key("psi"), dimension)?;
            if psi.site_dim() != phi.site_dim() {
                return Err(src.err(
                    &root.key("psi"),
                    format!("site dimension {} differs from phi's {}", psi.site_dim(), phi.site_dim()),
                ));
            }
            Some(psi)
        }
    };

    let volumes = obj.get("volumes").map(|v| src.sides(v, &root.key("volumes"))).transpose()?.unwrap_or_default();
    let ambient = obj.get("ambient").map(|v| src.side(v, &root.key("ambient"))).transpose()?;
    let window = obj.get("window").map(|v| src.side(v, &root.key("window"))).transpose()?;
    let times = obj.get("times").map(|v| src.grid(v, &root.key("times"), false)).transpose()?.unwrap_or_default();
    let horizons = obj.get("horizons").map(|v| src.grid(v, &root.key("horizons"), true)).transpose()?.unwrap_or_default();
    let averaging = match obj.get("averaging") {
        None => CesaroMethod::ExactDephasing,
        Some(v) => averaging(&src, v, &root.key("averaging"))?,
    };
    let probes = match obj.get("probes") {
        None => if kind == Kind::Bounds { 10 } else { 20 },
        Some(v) => match src.integer(v, &root.key("probes"))? {
            0 => return Err(src.err(&root.key("probes"), "need at least one probe")),
            n => n as usize,
        },
    };
    let positive = |key: &str, default: f64| -> Result<f64> {
        match obj.get(key) {
            None => Ok(default),
            Some(v) => match src.number(v, &root.key(key))? {
                x if x > 0.0 => Ok(x),
                x => Err(src.err(&root.key(key), format!("must be positive, got {x}"))),
            },
        }
    };
    let perturbation_norm = positive("perturbation_norm", 1.0)?;
    let tolerance = positive("tolerance", 1e-12)?;

    let cfg_err = |key: &str, msg: String| src.err(&root.key(key), msg);
    match kind {
        Kind::Quench | Kind::FermionQuench => {
            let (amb, win) = (ambient.unwrap_or(0), window.unwrap_or(0));
            let extra = if kind == Kind::FermionQuench { 1 } else { 0 };
            let m = phi.range().max(psi.as_ref().map_or(0, Interaction::range)).max(extra);
            if win < 2 * m + 1 {
                return Err(cfg_err("window", format!("window side {win} leaves no interior site at interaction range {m}; need at least {}", 2 * m + 1)));
            }
            if win + 2 * m > amb {
                return Err(cfg_err("ambient", format!("ambient side {amb} leaves less than the range {m} around window {win}; need at least {}", win + 2 * m)));
            }
        }
        Kind::WeakGibbs => {
            if let Some(amb) = ambient {
                if let Some(&l) = volumes.iter().find(|&&l| l > amb) {
                    return Err(cfg_err("ambient", format!("ambient side {amb} is smaller than window {l}")));
                }
            }
        }
        _ => {}
    }

    let canonical = canonical_json(&doc);
    let hash = config_hash(&canonical);
    Ok(ExperimentConfig {
        kind,
        dimension,
        beta,
        seed,
        output,
        phi,
        psi,
        volumes,
        ambient,
        window,
        times,
        horizons,
        averaging,
        probes,
        perturbation_norm,
        tolerance,
        canonical,
        hash,
    })
}

fn averaging(src: &Source, v: &Value, path: &FieldPath) -> Result<CesaroMethod> {
    let obj = src.object(v, path)?;
    src.only_keys(obj, &["method", "points"], path, "averaging")?;
    let method = src.string(src.require(obj, "method", path)?, &path.key("method"))?;
    match method {
        "exact" => {
            if obj.contains_key("points") {
                return Err(src.err(&path.key("points"), "`points` only applies to the trapezoid method"));
            }
            Ok(CesaroMethod::ExactDephasing)
        }
        "trapezoid" => {
            let points = match obj.get("points") {
                None => None,
                Some(p) => match src.integer(p, &path.key("points"))? {
                    n if n >= 2 => Some(n as usize),
                    n => return Err(src.err(&path.key("points"), format!("trapezoid needs at least 2 points, got {n}"))),
                },
            };
            Ok(CesaroMethod::Trapezoid { points })
        }
        other => Err(src.err(&path.key("method"), format!("unknown averaging method '{other}'; expected exact or trapezoid"))),
    }
}
