use anyhow::{bail, Context, Result};
use serde_json::{json, Map, Value};

use trapmeasure_core::cantor::{
    cantor_measure_closed, partial_cantor, slice_measure_closed, slice_set, DigitSetSpec,
};
use trapmeasure_core::exact::{int, parse_rational, to_f64};
use trapmeasure_core::gasket::{
    decay_fit, favard, lemma1_check, lemma2_check, DecayFit, GasketSpec,
};
use trapmeasure_core::permutations::{
    composite_sigma, digit_swap_perm, CompositePlan, Permutation,
};
use trapmeasure_core::search::{
    alpha_exhaustive, alpha_heuristic, alpha_scan, AlphaRecord, ExhaustiveOptions, ScanOptions,
    EXHAUSTIVE_GUARD,
};
use trapmeasure_core::trapezoid::{
    area, area_oracle, slice, slice_profile, weighted_sum_identity, TrapezoidSpec,
};
use trapmeasure_core::Rational;

use crate::output::{
    decimal, float, headers, put_rational, rational_object, Format, Output, Row, Table,
};
use crate::render;

/// Resolves `--perm` values: explicit images like `1,3,2` or the named
/// shortcuts `identity`, `reversal`, `digit-swap:m` and `composite`.
pub fn resolve_perm(n: Option<usize>, perm: &str) -> Result<Permutation> {
    let need_n = || n.with_context(|| format!("--perm {perm} needs --n"));
    let sigma = match perm.trim() {
        "identity" => Permutation::identity(need_n()?)?,
        "reversal" => Permutation::reversal(need_n()?)?,
        "composite" => composite_sigma(need_n()?)?,
        other => match other.strip_prefix("digit-swap:") {
            Some(m) => digit_swap_perm(
                m.parse()
                    .with_context(|| format!("bad digit-swap order {m:?}"))?,
            )?,
            None => other.parse::<Permutation>()?,
        },
    };
    if let Some(n) = n {
        if sigma.len() != n {
            bail!("--perm has {} entries but --n is {n}", sigma.len());
        }
    }
    Ok(sigma)
}

fn trapezoid(n: Option<usize>, perm: &str) -> Result<TrapezoidSpec> {
    Ok(TrapezoidSpec::new(resolve_perm(n, perm)?)?)
}

/// Permutations longer than this are omitted from JSON and CSV cells.
const PERM_ECHO_LIMIT: usize = 1000;

fn perm_cell(sigma: &Permutation) -> String {
    if sigma.len() <= PERM_ECHO_LIMIT {
        sigma.to_string()
    } else {
        String::new()
    }
}

pub fn area_cmd(n: Option<usize>, perm: &str, oracle_samples: Option<usize>) -> Result<Output> {
    let spec = trapezoid(n, perm)?;
    let a = area(&spec);
    let mut cols = vec!["n", "perm", "=area"];
    let mut row = Row::new()
        .cell(spec.n())
        .cell(perm_cell(spec.sigma()))
        .rational(&a);
    let mut obj = Map::new();
    obj.insert("n".into(), json!(spec.n()));
    obj.insert("perm".into(), json!(perm_cell(spec.sigma())));
    put_rational(&mut obj, "area", &a);
    let mut text = format!("{} ≈ {:.6}\n", a, to_f64(&a));
    if let Some(samples) = oracle_samples {
        let est = area_oracle(&spec, samples)?;
        cols.push("oracle");
        row = row.float(est);
        obj.insert("oracle".into(), json!(float(est)));
        obj.insert("oracle_samples".into(), json!(samples));
        text.push_str(&format!("oracle ({samples} midpoint slices) ≈ {est:.6}\n"));
    }
    let mut table = Table {
        headers: headers(&cols),
        rows: Vec::new(),
    };
    table.rows.push(row.done());
    let mut out = Output::new(table, Value::Object(obj), Format::Text);
    out.text = Some(text);
    Ok(out)
}

pub fn slice_cmd(n: Option<usize>, perm: &str, y: Option<&str>, profile: bool) -> Result<Output> {
    let spec = trapezoid(n, perm)?;
    if profile {
        let prof = slice_profile(&spec);
        let mut table = Table {
            headers: headers(&["=y", "=measure"]),
            rows: Vec::new(),
        };
        let mut points = Vec::new();
        for (y, v) in prof.breakpoints() {
            table.rows.push(Row::new().rational(y).rational(v).done());
            points.push(Value::Object(rational_object(&[("y", y), ("measure", v)])));
        }
        let mut obj = Map::new();
        obj.insert("n".into(), json!(spec.n()));
        obj.insert("perm".into(), json!(perm_cell(spec.sigma())));
        put_rational(&mut obj, "area", &prof.integrate());
        obj.insert("breakpoints".into(), Value::Array(points));
        return Ok(Output::new(table, Value::Object(obj), Format::Csv));
    }
    let y = parse_rational(y.context("slice needs --y or --profile")?)?;
    let u = slice(&spec, &y)?;
    let mut table = Table {
        headers: headers(&["index", "=lo", "=hi"]),
        rows: Vec::new(),
    };
    let mut parts = Vec::new();
    for (i, p) in u.parts().iter().enumerate() {
        table
            .rows
            .push(Row::new().cell(i).rational(p.lo()).rational(p.hi()).done());
        parts.push(Value::Object(rational_object(&[
            ("lo", p.lo()),
            ("hi", p.hi()),
        ])));
    }
    let mut obj = Map::new();
    obj.insert("n".into(), json!(spec.n()));
    obj.insert("perm".into(), json!(perm_cell(spec.sigma())));
    put_rational(&mut obj, "y", &y);
    put_rational(&mut obj, "measure", &u.measure());
    obj.insert("parts".into(), Value::Array(parts));
    Ok(Output::new(table, Value::Object(obj), Format::Json))
}

const SCAN_COLUMNS: [&str; 7] = [
    "n",
    "alpha_num",
    "alpha_den",
    "alpha_decimal",
    "argmin",
    "mode",
    "perms_evaluated",
];

fn alpha_row(r: &AlphaRecord) -> Vec<String> {
    Row::new()
        .cell(r.n)
        .rational(&r.alpha)
        .cell(&r.argmin)
        .cell(r.mode.as_str())
        .cell(r.perms_evaluated)
        .done()
}

fn alpha_json(r: &AlphaRecord, timing: bool) -> Value {
    let mut m = Map::new();
    m.insert("n".into(), json!(r.n));
    m.insert("alpha".into(), json!(r.alpha.to_string()));
    m.insert("argmin".into(), json!(r.argmin.to_string()));
    m.insert("alpha_decimal".into(), json!(decimal(&r.alpha)));
    m.insert("mode".into(), json!(r.mode.as_str()));
    m.insert("perms_evaluated".into(), json!(r.perms_evaluated));
    if timing {
        m.insert("wall_time_ms".into(), json!(r.wall_time.as_millis() as u64));
    }
    Value::Object(m)
}

pub struct AlphaArgs {
    pub n: usize,
    pub heuristic: bool,
    pub exhaustive: bool,
    pub budget: u64,
    pub no_symmetry: bool,
    pub allow_large: bool,
    pub timing: bool,
    pub workers: usize,
    pub seed: u64,
}

pub fn alpha_cmd(a: AlphaArgs) -> Result<Output> {
    let heuristic = a.heuristic || (!a.exhaustive && a.n > EXHAUSTIVE_GUARD);
    let rec = if heuristic {
        alpha_heuristic(a.n, a.budget, a.seed)?
    } else {
        alpha_exhaustive(
            a.n,
            ExhaustiveOptions {
                use_symmetry: !a.no_symmetry,
                workers: a.workers,
                override_guard: a.allow_large,
            },
        )?
    };
    let mut table = Table::new(&SCAN_COLUMNS);
    table.rows.push(alpha_row(&rec));
    let mut out = Output::new(table, alpha_json(&rec, a.timing), Format::Json);
    if rec.mode == trapmeasure_core::search::SearchMode::Heuristic {
        out.notes.push(format!(
            "alpha({}) <= {} (heuristic upper bound)",
            rec.n, rec.alpha
        ));
    }
    Ok(out)
}

fn fit_json(fit: &DecayFit) -> Value {
    json!({ "c": float(fit.c), "p": float(fit.p), "residual": float(fit.residual) })
}

pub struct ScanArgs {
    pub max_n: usize,
    pub exhaustive_max: usize,
    pub budget: u64,
    pub no_symmetry: bool,
    pub timing: bool,
    pub workers: usize,
    pub seed: u64,
}

pub fn alpha_scan_cmd(a: ScanArgs) -> Result<Output> {
    let scan = alpha_scan(
        a.max_n,
        ScanOptions {
            exhaustive_max: a.exhaustive_max,
            use_symmetry: !a.no_symmetry,
            workers: a.workers,
            budget: a.budget,
            seed: a.seed,
        },
    )?;
    let mut table = Table::new(&SCAN_COLUMNS);
    table.rows.extend(scan.records.iter().map(alpha_row));
    let mut notes = Vec::new();
    if scan.violations.is_empty() {
        notes.push(
            "monotonicity: alpha(n) is non-increasing over every exhaustive pair".to_string(),
        );
    }
    for v in &scan.violations {
        notes.push(format!(
            "monotonicity violation: alpha({}) = {} < alpha({}) = {}",
            v.n,
            v.alpha_n,
            v.n + 1,
            v.alpha_next
        ));
    }
    for (n, c) in &scan.c_estimates {
        notes.push(format!("alpha({n})·ln {n} = {}", float(*c)));
    }
    if let Some(fit) = &scan.upper_bound_fit {
        notes.push(format!(
            "composite upper bound ≈ {} / (ln n)^{} (rms log residual {})",
            float(fit.c),
            float(fit.p),
            float(fit.residual)
        ));
    }
    let json = json!({
        "records": scan.records.iter().map(|r| alpha_json(r, a.timing)).collect::<Vec<_>>(),
        "monotone": scan.violations.is_empty(),
        "violations": scan.violations.iter().map(|v| {
            let mut m = Map::new();
            m.insert("n".into(), json!(v.n));
            put_rational(&mut m, "alpha_n", &v.alpha_n);
            put_rational(&mut m, "alpha_next", &v.alpha_next);
            Value::Object(m)
        }).collect::<Vec<_>>(),
        "c_estimates": scan.c_estimates.iter().map(|(n, c)| json!({"n": n, "alpha_log_n": float(*c)})).collect::<Vec<_>>(),
        "upper_bound": scan.upper_bound.iter().map(|(n, a)| {
            let mut m = Map::new();
            m.insert("n".into(), json!(n));
            put_rational(&mut m, "area", a);
            Value::Object(m)
        }).collect::<Vec<_>>(),
        "upper_bound_fit": scan.upper_bound_fit.as_ref().map(fit_json),
    });
    let mut out = Output::new(table, json, Format::Csv);
    out.notes = notes;
    Ok(out)
}

pub fn sigma3_cmd(max_m: u32) -> Result<Output> {
    if max_m == 0 {
        bail!("--max-m must be at least 1");
    }
    let mut table = Table {
        headers: headers(&["m", "n", "=area"]),
        rows: Vec::new(),
    };
    let mut rows = Vec::new();
    let mut areas: Vec<Rational> = Vec::new();
    for m in 1..=max_m {
        let sigma = digit_swap_perm(m)?;
        let n = sigma.len();
        let a = area(&TrapezoidSpec::new(sigma)?);
        table
            .rows
            .push(Row::new().cell(m).cell(n).rational(&a).done());
        let mut obj = Map::new();
        obj.insert("m".into(), json!(m));
        obj.insert("n".into(), json!(n));
        put_rational(&mut obj, "area", &a);
        rows.push(Value::Object(obj));
        areas.push(a);
    }
    let decreasing = areas.windows(2).all(|w| w[1] < w[0]);
    let fit = if areas.len() >= 3 {
        let pairs: Vec<(f64, f64)> = areas
            .iter()
            .enumerate()
            .map(|(i, a)| ((i + 1) as f64, to_f64(a)))
            .collect();
        Some(decay_fit(&pairs)?)
    } else {
        None
    };
    let mut out = Output::new(
        table,
        json!({ "rows": rows, "strictly_decreasing": decreasing, "fit": fit.as_ref().map(fit_json) }),
        Format::Csv,
    );
    out.notes.push(format!("strictly decreasing: {decreasing}"));
    if let Some(f) = &fit {
        out.notes.push(format!(
            "fit: area ≈ {} · m^-{} (rms log residual {})",
            float(f.c),
            float(f.p),
            float(f.residual)
        ));
    }
    Ok(out)
}

pub fn sigma_n_cmd(n: usize) -> Result<Output> {
    let plan = CompositePlan::new(n)?;
    let sigma = composite_sigma(n)?;
    let ws = weighted_sum_identity(n)?;
    let mut table = Table {
        headers: headers(&["exponent", "block_size", "count", "=block_area"]),
        rows: Vec::new(),
    };
    let mut terms = Vec::new();
    for t in &ws.terms {
        let size = 3usize.pow(t.exponent);
        table.rows.push(
            Row::new()
                .cell(t.exponent)
                .cell(size)
                .cell(t.digit)
                .rational(&t.block_area)
                .done(),
        );
        let mut m = Map::new();
        m.insert("exponent".into(), json!(t.exponent));
        m.insert("block_size".into(), json!(size));
        m.insert("count".into(), json!(t.digit));
        put_rational(&mut m, "block_area", &t.block_area);
        terms.push(Value::Object(m));
    }
    let mut obj = Map::new();
    obj.insert("n".into(), json!(n));
    obj.insert("base3".into(), json!(plan.digit_string()));
    obj.insert(
        "blocks".into(),
        json!(plan
            .blocks
            .iter()
            .map(|(s, c)| json!({"size": s, "count": c}))
            .collect::<Vec<_>>()),
    );
    obj.insert("perm".into(), json!(perm_cell(&sigma)));
    put_rational(&mut obj, "lhs", &ws.lhs);
    put_rational(&mut obj, "rhs", &ws.rhs);
    obj.insert("holds".into(), json!(ws.holds()));
    obj.insert("terms".into(), Value::Array(terms));
    Ok(Output::new(table, Value::Object(obj), Format::Json))
}

fn parse_digits(s: &str) -> Result<[Rational; 3]> {
    let parts = s
        .split(',')
        .map(parse_rational)
        .collect::<std::result::Result<Vec<_>, _>>()?;
    parts.try_into().map_err(|v: Vec<Rational>| {
        anyhow::anyhow!("--digits needs exactly 3 values, got {}", v.len())
    })
}

pub fn cantor_cmd(t: Option<&str>, digits: Option<&str>, depth_max: u32) -> Result<Output> {
    let (digits, closed) = match (t, digits) {
        (Some(t), None) => {
            let t = parse_rational(t)?;
            let closed = cantor_measure_closed(&t)?;
            ([int(0), int(1), t], Some(closed))
        }
        (None, Some(d)) => (parse_digits(d)?, None),
        _ => bail!("cantor needs exactly one of --t or --digits"),
    };
    let mut table = Table {
        headers: headers(&["depth", "=measure"]),
        rows: Vec::new(),
    };
    let mut rows = Vec::new();
    for depth in 0..=depth_max {
        let spec = DigitSetSpec::new(depth, digits.clone())?;
        let m = partial_cantor(&spec)?.measure();
        table.rows.push(Row::new().cell(depth).rational(&m).done());
        let mut obj = Map::new();
        obj.insert("depth".into(), json!(depth));
        put_rational(&mut obj, "measure", &m);
        rows.push(Value::Object(obj));
    }
    let mut obj = Map::new();
    obj.insert(
        "digits".into(),
        json!(digits.iter().map(|d| d.to_string()).collect::<Vec<_>>()),
    );
    match &closed {
        Some(c) => put_rational(&mut obj, "closed", c),
        None => {
            obj.insert("closed".into(), Value::Null);
        }
    }
    obj.insert("rows".into(), Value::Array(rows));
    let mut out = Output::new(table, Value::Object(obj), Format::Csv);
    if let Some(c) = closed {
        out.notes.push(format!("closed-form limit measure: {c}"));
    }
    Ok(out)
}

pub fn slice_measure_cmd(ts: &[Rational], depth: Option<u32>) -> Result<Output> {
    let mut cols = vec!["=t", "=ratio", "=closed"];
    if depth.is_some() {
        cols.push("=partial");
    }
    let mut table = Table {
        headers: headers(&cols),
        rows: Vec::new(),
    };
    let mut rows = Vec::new();
    for t in ts {
        let closed = slice_measure_closed(t)?;
        let ratio = (int(2) - t) / (int(1) + t);
        let mut row = Row::new().rational(t).rational(&ratio).rational(&closed);
        let mut obj = rational_object(&[("t", t), ("ratio", &ratio), ("closed", &closed)]);
        if let Some(d) = depth {
            let partial = slice_set(d, t)?.measure();
            row = row.rational(&partial);
            put_rational(&mut obj, "partial", &partial);
        }
        table.rows.push(row.done());
        rows.push(Value::Object(obj));
    }
    Ok(Output::new(
        table,
        json!({ "depth": depth, "rows": rows }),
        Format::Csv,
    ))
}

pub fn favard_cmd(depth_max: u32, quad_points: usize) -> Result<Output> {
    let mut table = Table::new(&["depth", "favard"]);
    let mut rows = Vec::new();
    for depth in 0..=depth_max {
        let f = favard(&GasketSpec::new(depth)?, quad_points)?;
        table.rows.push(Row::new().cell(depth).float(f).done());
        rows.push(json!({"depth": depth, "favard": float(f)}));
    }
    let baseline = (2f64.sqrt() + 2.0) / std::f64::consts::PI;
    let mut out = Output::new(
        table,
        json!({ "quad_points": quad_points, "triangle_closed_form": float(baseline), "rows": rows }),
        Format::Csv,
    );
    out.notes.push(format!(
        "depth-0 closed form (sqrt 2 + 2)/pi = {}",
        float(baseline)
    ));
    Ok(out)
}

pub fn lemma1_cmd(depth_max: u32, grid: usize) -> Result<Output> {
    if grid < 2 {
        bail!("--grid must be at least 2");
    }
    let ts: Vec<Rational> = (0..grid)
        .map(|i| Rational::new((i as i64).into(), ((grid - 1) as i64).into()))
        .collect();
    let mut table = Table {
        headers: headers(&["depth", "=t", "=lhs", "=cantor_bound", "rhs", "ratio", "ok"]),
        rows: Vec::new(),
    };
    let mut rows = Vec::new();
    let mut violated = 0;
    for depth in 1..=depth_max {
        for r in lemma1_check(depth, &ts)? {
            violated += usize::from(!r.ok);
            table.rows.push(
                Row::new()
                    .cell(r.depth)
                    .rational(&r.t)
                    .rational(&r.lhs)
                    .rational(&r.cantor_bound)
                    .float(r.rhs)
                    .float(r.ratio)
                    .cell(r.ok)
                    .done(),
            );
            let mut obj = Map::new();
            obj.insert("depth".into(), json!(r.depth));
            put_rational(&mut obj, "t", &r.t);
            put_rational(&mut obj, "lhs", &r.lhs);
            put_rational(&mut obj, "cantor_bound", &r.cantor_bound);
            obj.insert("rhs".into(), json!(float(r.rhs)));
            obj.insert("ratio".into(), json!(float(r.ratio)));
            obj.insert("ok".into(), json!(r.ok));
            rows.push(Value::Object(obj));
        }
    }
    let mut out = Output::new(
        table,
        json!({ "violations": violated, "rows": rows }),
        Format::Csv,
    );
    out.violated = violated > 0;
    let total = out.table.rows.len();
    out.notes
        .push(format!("{violated} of {total} rows violate lhs <= rhs"));
    Ok(out)
}

pub fn lemma2_cmd(p: f64, ns: &[f64]) -> Result<Output> {
    let rows = lemma2_check(p, ns)?;
    let mut table = Table::new(&["n", "integral", "ratio", "ok"]);
    let mut json_rows = Vec::new();
    let mut violated = false;
    let mut prev_gap: Option<f64> = None;
    for r in &rows {
        // Bounded, and approaching 1 along the grid.
        let gap = (r.ratio - 1.0).abs();
        let ok = r.ratio.is_finite() && prev_gap.is_none_or(|g| gap <= g);
        prev_gap = Some(gap);
        violated |= !ok;
        table.rows.push(
            Row::new()
                .float(r.n)
                .float(r.integral)
                .float(r.ratio)
                .cell(ok)
                .done(),
        );
        json_rows.push(json!({"n": float(r.n), "integral": float(r.integral), "ratio": float(r.ratio), "ok": ok}));
    }
    let max_ratio = rows
        .iter()
        .map(|r| r.ratio)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut out = Output::new(
        table,
        json!({ "p": float(p), "max_ratio": float(max_ratio), "rows": json_rows }),
        Format::Csv,
    );
    out.violated = violated;
    out.notes
        .push(format!("max ratio over grid: {}", float(max_ratio)));
    Ok(out)
}

pub fn weighted_sum_cmd(ns: &[usize]) -> Result<Output> {
    let mut table = Table {
        headers: headers(&["n", "base3", "=lhs", "=rhs", "ok"]),
        rows: Vec::new(),
    };
    let mut rows = Vec::new();
    let mut violated = false;
    for &n in ns {
        let ws = weighted_sum_identity(n)?;
        let ok = ws.holds();
        violated |= !ok;
        table.rows.push(
            Row::new()
                .cell(n)
                .cell(&ws.digits)
                .rational(&ws.lhs)
                .rational(&ws.rhs)
                .cell(ok)
                .done(),
        );
        let mut obj = Map::new();
        obj.insert("n".into(), json!(n));
        obj.insert("base3".into(), json!(ws.digits));
        put_rational(&mut obj, "lhs", &ws.lhs);
        put_rational(&mut obj, "rhs", &ws.rhs);
        obj.insert("ok".into(), json!(ok));
        rows.push(Value::Object(obj));
    }
    let mut out = Output::new(table, json!({ "rows": rows }), Format::Csv);
    out.violated = violated;
    Ok(out)
}

pub fn render_trapezoid_cmd(n: Option<usize>, perm: &str) -> Result<Output> {
    let spec = trapezoid(n, perm)?;
    let mut out = Output::new(Table::default(), Value::Null, Format::Svg);
    out.text = Some(render::trapezoid_svg(&spec));
    Ok(out)
}

pub fn render_gasket_cmd(depth: u32) -> Result<Output> {
    let spec = GasketSpec::new(depth)?;
    let mut out = Output::new(Table::default(), Value::Null, Format::Svg);
    out.text = Some(render::gasket_svg(&spec));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perm_shortcuts() {
        assert_eq!(
            resolve_perm(Some(3), "reversal").unwrap().to_string(),
            "3,2,1"
        );
        assert_eq!(
            resolve_perm(None, "digit-swap:1").unwrap().to_string(),
            "1,3,2"
        );
        assert_eq!(
            resolve_perm(Some(4), "composite").unwrap().to_string(),
            "1,3,2,4"
        );
        assert_eq!(
            resolve_perm(Some(2), "identity").unwrap().to_string(),
            "1,2"
        );
        assert!(resolve_perm(None, "identity").is_err());
        assert!(resolve_perm(Some(4), "1,3,2").is_err());
        assert!(resolve_perm(None, "digit-swap:x").is_err());
    }

    #[test]
    fn area_text() {
        let out = area_cmd(Some(3), "1,3,2", None).unwrap();
        assert_eq!(out.render(None).unwrap(), "5/6 ≈ 0.833333\n");
    }

    #[test]
    fn lemma2_flags_nothing_on_default_grid() {
        let out = lemma2_cmd(0.5, &[5.0, 10.0, 20.0, 40.0]).unwrap();
        assert!(!out.violated);
        let out = lemma2_cmd(0.01, &[5.0, 10.0, 20.0, 40.0]).unwrap();
        assert!(!out.violated);
    }
}
