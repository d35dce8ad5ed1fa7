use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::ExitCode;

use momenta::exactalg::rational::to_f64;
use momenta::exactalg::{format_rational, parse_rational};
use momenta::hankel::{bound_matrix, build_hankel, build_hankel_from, minor_constraint, HankelMatrix, HankelSpec};
use momenta::maps::{count_gluings_with, count_pairings, GluingProblem};
use momenta::reduce::{free_energy_derivative, solve_moments};
use momenta::scan::{
    bisect_critical, estimate_critical_point, fit_exponent, parse_range, refine_boundaries, scan_matrix,
    slice_feasible, truncation_critical, whole, Cell, FeasibilityGrid, FitOptions, GammaRelation, GridSpec, Side,
};
use momenta::sde::generate_system;
use momenta::series::{expand_moments_upto, SeriesEngine};
use momenta::{BigRational, CyclicWord, Word};
use serde_json::{json, Value};

use crate::args::*;
use crate::artifact::{csv_header, emit, json_artifact, load_model, rational_value, sha256_hex, LoadedModel, Meta, VERSION};
use crate::failure::Failure;
use crate::Runtime;

pub fn run(cli: &Cli, rt: Runtime) -> Result<ExitCode, Failure> {
    let ctx = Ctx { cli, rt };
    match &cli.command {
        Command::Sde(a) => ctx.sde(a),
        Command::Solve(a) => ctx.solve(a),
        Command::Series(a) => ctx.series(a),
        Command::Minor(a) => ctx.minor(a),
        Command::Scan(a) => ctx.scan(a),
        Command::Critical(a) => ctx.critical(a),
        Command::Fit(a) => ctx.fit(a),
        Command::Maps(a) => ctx.maps(a),
    }
}

struct Ctx<'a> {
    cli: &'a Cli,
    rt: Runtime,
}

impl Ctx<'_> {
    fn meta<'c, C: serde::Serialize>(&self, command: &'static str, config: &'c C, model: Option<&LoadedModel>) -> Meta<'c, C> {
        Meta {
            tool: "momenta",
            version: VERSION,
            command,
            config,
            threads: self.rt.threads,
            symmetry: !self.cli.no_symmetry,
            model: model.map(Meta::<C>::model_json),
        }
    }

    fn model(&self, path: &Path) -> Result<LoadedModel, Failure> {
        load_model(path, self.cli.no_symmetry)
    }

    fn write_json<C: serde::Serialize>(&self, meta: &Meta<'_, C>, result: Value) -> Result<ExitCode, Failure> {
        emit(self.cli.out.as_deref(), &json_artifact(meta, result)?)?;
        Ok(ExitCode::SUCCESS)
    }

    fn sde(&self, a: &SdeArgs) -> Result<ExitCode, Failure> {
        let model = self.model(&a.model)?;
        let eqs = generate_system(&model.spec, a.max_len, true);
        let text = |eq: &momenta::sde::SdeEquation| {
            if a.tuples {
                eq.display_tuples(model.spec.m)
            } else {
                eq.display_words()
            }
        };
        if !a.json {
            let mut out = String::new();
            for eq in &eqs {
                out.push_str(&text(eq));
                out.push('\n');
            }
            emit(self.cli.out.as_deref(), out.as_bytes())?;
            return Ok(ExitCode::SUCCESS);
        }
        let lines: Vec<Value> = eqs
            .iter()
            .map(|eq| {
                json!({
                    "letter": ((b'A' + eq.p) as char).to_string(),
                    "insertion": eq.label(),
                    "equation": text(eq),
                })
            })
            .collect();
        self.write_json(&self.meta("sde", a, Some(&model)), json!({ "equations": lines }))
    }

    fn solve(&self, a: &SolveArgs) -> Result<ExitCode, Failure> {
        let model = self.model(&a.model)?;
        let table = solve_moments(&model.spec, a.cutoff)?;
        let moments: serde_json::Map<String, Value> =
            table.entries.iter().map(|(w, f)| (w.to_string(), json!(f.to_string()))).collect();
        let dfdg = free_energy_derivative(&table).ok().map(|f| f.to_string());
        let full = table.to_json();
        let result = json!({
            "cutoff": a.cutoff,
            "variables": table.vars().to_vec(),
            "moments": moments,
            "unresolved": full["unresolved"],
            "generator_relations": full["generator_relations"],
            "dF_dg": dfdg,
        });
        self.write_json(&self.meta("solve", a, Some(&model)), result)
    }

    fn series(&self, a: &SeriesArgs) -> Result<ExitCode, Failure> {
        let model = self.model(&a.model)?;
        let max_len = a.max_len.unwrap_or_else(|| SeriesEngine::default_max_len(&model.spec, a.len, a.order));
        let table = expand_moments_upto(&model.spec, a.order, max_len, a.len)?;
        let coeffs = |s: &momenta::TruncSeries| -> Vec<Value> { s.coeffs().iter().map(rational_value).collect() };
        let moments: serde_json::Map<String, Value> =
            table.moments.iter().map(|(w, s)| (w.to_string(), json!(coeffs(s)))).collect();
        let result = json!({
            "order": a.order,
            "max_len": max_len,
            "moments": moments,
            "free_energy": coeffs(&table.free_energy),
        });
        self.write_json(&self.meta("series", a, Some(&model)), result)
    }

    fn minor(&self, a: &MinorArgs) -> Result<ExitCode, Failure> {
        let model = self.model(&a.model)?;
        let table = solve_moments(&model.spec, a.cutoff)?;
        let h = match (a.bound, a.n) {
            (Some(kind), _) => bound_matrix(&table, matches!(kind, BoundKind::Literal))?,
            (None, Some(n)) => build_hankel(&model.spec, &table, n)?,
            (None, None) => return Err(Failure::Input("minor needs -n or --bound".into())),
        };
        let rows: Vec<usize> = if a.rows.is_empty() { (0..h.size()).collect() } else { a.rows.clone() };
        let mc = minor_constraint(&h, &rows)?;
        let result = json!({
            "variables": h.vars.to_vec(),
            "labels": h.labels,
            "matrix": h.to_text(),
            "rows": rows,
            "constraint": format!("{} >= 0", mc.poly),
            "poly": mc.poly.to_string(),
            "row_factors": mc.row_factors.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "content": format_rational(&mc.content),
        });
        self.write_json(&self.meta("minor", a, Some(&model)), result)
    }

    fn scan(&self, a: &ScanArgs) -> Result<ExitCode, Failure> {
        let model = self.model(&a.model)?;
        let setup = Setup::new(&model, &[a.n], &a.grid, a.cutoff)?;
        let fg = scan_matrix(&setup.h[0], &setup.blocks[0], &setup.grid, self.rt.exec);
        let meta = self.meta("scan", a, Some(&model));
        match a.format {
            Format::Csv => {
                let mut out = csv_header(&meta)?;
                fg.write_csv(&mut out)?;
                emit(self.cli.out.as_deref(), &out)?;
            }
            Format::Json => {
                let refined = if setup.grid.axes.len() == 1 {
                    let r = refine_boundaries(&setup.h[0], &setup.blocks[0], &fg, a.refine, self.rt.exec);
                    r.iter()
                        .map(|iv| json!({"g": format_rational(&iv.g), "lo": format_rational(&iv.lo), "hi": format_rational(&iv.hi)}))
                        .collect()
                } else {
                    Vec::new()
                };
                self.write_json(&meta, scan_json(&fg, refined))?;
            }
        }
        Ok(if fg.count(Cell::Feasible) == 0 {
            eprintln!("momenta: {}", Failure::InfeasibleEverywhere);
            Failure::InfeasibleEverywhere.exit_code()
        } else {
            ExitCode::SUCCESS
        })
    }

    fn critical(&self, a: &CriticalArgs) -> Result<ExitCode, Failure> {
        let model = self.model(&a.model)?;
        let meta = self.meta("critical", a, Some(&model));
        let estimate = match a.method {
            CriticalMethod::Truncation => {
                let word: CyclicWord = a
                    .word
                    .as_deref()
                    .ok_or_else(|| Failure::Input("--method truncation needs --word".into()))?
                    .parse()?;
                let cutoff = a.cutoff.unwrap_or(word.len());
                let table = solve_moments(&model.spec, cutoff)?;
                serde_json::to_value(truncation_critical(&table, &word)?)?
            }
            CriticalMethod::Boundary => {
                let grid = &a.grid;
                if a.sizes.is_empty() {
                    return Err(Failure::Input("--method boundary needs -n".into()));
                }
                let setup = Setup::new(&model, &a.sizes, grid, a.cutoff)?;
                let grids: Vec<FeasibilityGrid> = (0..a.sizes.len())
                    .map(|i| scan_matrix(&setup.h[i], &setup.blocks[i], &setup.grid, self.rt.exec))
                    .collect();
                let est = estimate_critical_point(&grids)?;
                if est.g_c.is_none() {
                    self.write_json(&meta, json!({ "estimate": est }))?;
                    eprintln!("momenta: {}", Failure::InfeasibleEverywhere);
                    return Ok(Failure::InfeasibleEverywhere.exit_code());
                }
                serde_json::to_value(est)?
            }
            CriticalMethod::Bisect => {
                let grid = &a.grid;
                let &n = a.sizes.last().ok_or_else(|| Failure::Input("--method bisect needs -n".into()))?;
                let setup = Setup::new(&model, &[n], grid, a.cutoff)?;
                let (h, blocks) = (&setup.h[0], &setup.blocks[0]);
                let ranges: Vec<(BigRational, BigRational)> = setup
                    .grid
                    .axes
                    .iter()
                    .map(|(_, v)| (v[0].clone(), v[v.len() - 1].clone()))
                    .collect();
                let (lo, hi) = (setup.grid.g[0].clone(), setup.grid.g[setup.grid.g.len() - 1].clone());
                let feasible = |g: &BigRational| slice_feasible(h, blocks, g, &ranges, a.coarse, a.zoom).is_some();
                let (inside, outside) = match (feasible(&lo), feasible(&hi)) {
                    (false, true) => (hi, lo),
                    (true, false) => (lo, hi),
                    (false, false) => {
                        self.write_json(&meta, json!({ "estimate": null, "note": "neither end of the g range is feasible" }))?;
                        eprintln!("momenta: {}", Failure::InfeasibleEverywhere);
                        return Ok(Failure::InfeasibleEverywhere.exit_code());
                    }
                    (true, true) => return Err(Failure::Input("both ends of the g range are feasible; widen it".into())),
                };
                let gc = bisect_critical(h, blocks, inside.clone(), outside.clone(), &ranges, a.coarse, a.zoom, a.steps);
                json!({
                    "g_c": to_f64(&gc),
                    "feasible_end": format_rational(&gc),
                    "method": "bisect",
                    "size": n,
                    "bracket": [format_rational(&inside), format_rational(&outside)],
                    "note": "last feasible coupling after bisection; resolution = bracket / 2^steps",
                })
            }
        };
        self.write_json(&meta, json!({ "estimate": estimate }))
    }

    fn fit(&self, a: &FitArgs) -> Result<ExitCode, Failure> {
        let bytes = fs::read(&a.input).map_err(|e| Failure::Input(format!("{}: {e}", a.input.display())))?;
        let mut points = read_points(&bytes, a)?;
        points.retain(|&(g, _)| a.g_min.is_none_or(|m| g >= m) && a.g_max.is_none_or(|m| g <= m));
        let opts = FitOptions {
            gc: a.gc,
            side: match a.side {
                SideArg::Above => Side::Above,
                SideArg::Below => Side::Below,
            },
            relation: match a.relation {
                RelationArg::First => GammaRelation::FirstDerivative,
                RelationArg::Second => GammaRelation::SecondDerivative,
            },
            level: (!a.levels.is_empty()).then(|| a.levels.join(",")),
            ..FitOptions::default()
        };
        let fit = fit_exponent(&points, &opts)?;
        let result = json!({
            "input_sha256": sha256_hex(&bytes),
            "fit": fit,
            "points": points,
        });
        self.write_json(&self.meta("fit", a, None), result)
    }

    fn maps(&self, a: &MapsArgs) -> Result<ExitCode, Failure> {
        let word: Word = a.word.parse()?;
        let model = a.model.as_deref().map(|p| self.model(p)).transpose()?;
        let result = match &model {
            None => json!({ "word": word.to_string(), "pairings_by_genus": count_pairings(&word)? }),
            Some(m) => {
                let problem = GluingProblem {
                    rooted: word.clone(),
                    polygons: m.spec.terms.iter().map(|t| (t.word.word().clone(), t.coeff.clone())).collect(),
                    genus: a.genus,
                };
                let counts = count_gluings_with(&problem, a.order, self.rt.exec)?;
                json!({ "word": word.to_string(), "genus": a.genus.unwrap_or(0), "gluings": counts })
            }
        };
        self.write_json(&self.meta("maps", a, model.as_ref()), result)
    }
}

/// Hankel matrices per size over a common grid, with level constraints
/// substituted.
struct Setup {
    h: Vec<HankelMatrix>,
    blocks: Vec<Vec<Vec<usize>>>,
    grid: GridSpec,
}

impl Setup {
    fn new(model: &LoadedModel, sizes: &[usize], args: &GridArgs, cutoff: Option<usize>) -> Result<Setup, Failure> {
        let spec = &model.spec;
        let mut ranges: BTreeMap<String, Vec<BigRational>> = BTreeMap::new();
        for (sym, r) in [("m1", &args.m1), ("m2", &args.m2), ("m4", &args.m4)] {
            if let Some(r) = r {
                ranges.insert(sym.to_string(), parse_range(r)?);
            }
        }
        for ax in &args.axes {
            let (sym, r) = split_assignment(ax)?;
            ranges.insert(sym.to_string(), parse_range(r)?);
        }
        let mut levels: BTreeMap<String, BigRational> = BTreeMap::new();
        for lv in &args.levels {
            let (sym, v) = split_assignment(lv)?;
            levels.insert(sym.to_string(), parse_rational(v)?);
        }
        let symbols: Vec<String> = spec.generators.iter().map(|g| g.symbol.clone()).collect();
        for sym in ranges.keys().chain(levels.keys()) {
            if !symbols.contains(sym) {
                return Err(Failure::Input(format!("model {} has no generator {sym} (generators: {symbols:?})", spec.name)));
            }
        }
        let mut axes = Vec::new();
        for sym in &symbols {
            match (ranges.remove(sym), levels.contains_key(sym)) {
                (Some(_), true) => return Err(Failure::Input(format!("{sym} is both scanned and fixed"))),
                (Some(v), false) => axes.push((sym.clone(), v)),
                (None, true) => {}
                (None, false) => return Err(Failure::Input(format!("generator {sym} needs a range or a --level value"))),
            }
        }
        let specs: Vec<HankelSpec> = sizes.iter().map(|&n| HankelSpec::new(spec.m, n)).collect();
        let cutoff = cutoff.unwrap_or_else(|| specs.iter().map(HankelSpec::max_entry_len).max().unwrap_or(0));
        let table = solve_moments(spec, cutoff)?;
        let mut hs = Vec::new();
        let mut blocks = Vec::new();
        for s in &specs {
            let mut h = build_hankel_from(&table, s)?;
            for (sym, value) in &levels {
                let i = h
                    .vars
                    .iter()
                    .position(|v| v == sym)
                    .ok_or_else(|| Failure::Input(format!("unknown generator {sym}")))?;
                h = h.restrict(i, value)?;
            }
            blocks.push(if args.no_sectors { whole(s.size()) } else { s.sector_blocks(spec) });
            hs.push(h);
        }
        Ok(Setup {
            h: hs,
            blocks,
            grid: GridSpec {
                g: parse_range(args.g.as_deref().ok_or_else(|| Failure::Input("--g lo:hi:step is required".into()))?)?,
                axes,
            },
        })
    }
}

fn split_assignment(s: &str) -> Result<(&str, &str), Failure> {
    s.split_once('=')
        .map(|(a, b)| (a.trim(), b.trim()))
        .ok_or_else(|| Failure::Input(format!("expected SYM=value, got {s:?}")))
}

fn scan_json(fg: &FeasibilityGrid, refined: Vec<Value>) -> Value {
    let rows: Vec<Value> = (0..fg.spec.g.len())
        .map(|gi| {
            let runs: Vec<Value> = fg
                .feasible_runs(gi)
                .iter()
                .map(|(lo, hi)| json!([format_rational(lo), format_rational(hi)]))
                .collect();
            json!({ "g": format_rational(&fg.spec.g[gi]), "feasible_runs": runs })
        })
        .collect();
    json!({
        "n": fg.n,
        "axes": fg.spec.axes.iter().map(|(s, _)| s.clone()).collect::<Vec<_>>(),
        "counts": {
            "feasible": fg.count(Cell::Feasible),
            "infeasible": fg.count(Cell::Infeasible),
            "indeterminate": fg.count(Cell::Indeterminate),
        },
        "rows": rows,
        "refined": refined,
    })
}

/// Boundary points from a scan CSV, or `(g, value)` pairs from a
/// two-column CSV.
fn read_points(bytes: &[u8], a: &FitArgs) -> Result<Vec<(f64, f64)>, Failure> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(bytes);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let num = |s: &str| -> Result<BigRational, Failure> { Ok(parse_rational(s)?) };
    let Some(flag) = col("feasible") else {
        if headers.len() != 2 {
            return Err(Failure::Input(format!("expected a scan CSV or two columns g,value; got {headers:?}")));
        }
        let mut out = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            out.push((to_f64(&num(&rec[0])?), to_f64(&num(&rec[1])?)));
        }
        return Ok(out);
    };
    let gcol = col("g").ok_or_else(|| Failure::Input("scan CSV without a g column".into()))?;
    let mut filters = Vec::new();
    for lv in &a.levels {
        let (sym, v) = split_assignment(lv)?;
        let i = col(sym).ok_or_else(|| Failure::Input(format!("no column {sym} in the scan")))?;
        filters.push((i, num(v)?));
    }
    let free: Vec<usize> = (0..headers.len())
        .filter(|&i| i != gcol && i != flag && !filters.iter().any(|(j, _)| *j == i))
        .collect();
    let [axis] = free.as_slice() else {
        return Err(Failure::Input(format!(
            "need exactly one unconstrained axis after --level, have {:?}",
            free.iter().map(|&i| &headers[i]).collect::<Vec<_>>()
        )));
    };
    let mut by_g: Vec<(BigRational, Vec<BigRational>)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let keep = filters.iter().map(|(i, v)| num(&rec[*i]).map(|x| x == *v)).collect::<Result<Vec<_>, _>>()?;
        if !keep.iter().all(|&k| k) || &rec[flag] != "1" {
            continue;
        }
        let g = num(&rec[gcol])?;
        let x = num(&rec[*axis])?;
        match by_g.last_mut() {
            Some((last, xs)) if *last == g => xs.push(x),
            _ => by_g.push((g, vec![x])),
        }
    }
    Ok(by_g
        .into_iter()
        .map(|(g, xs)| {
            let lo = xs.iter().min().expect("non-empty");
            let hi = xs.iter().max().expect("non-empty");
            let v = match a.edge {
                Edge::Upper => to_f64(hi),
                Edge::Lower => to_f64(lo),
                Edge::Width => to_f64(&(hi - lo)),
            };
            (to_f64(&g), v)
        })
        .collect())
}
