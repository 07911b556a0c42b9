use serde_json::{json, Value};
use voa_core::diffcomm::DiffAlgebra;
use voa_core::ideals::{self, Side};
use voa_core::lifilt::{self, Filtration};
use voa_core::linalg::format_scalar;
use voa_core::orbifold::{self, GroupAction};
use voa_core::recovery::{self, CentralRoute};
use voa_core::sweep::{self, SweepConfig};
use voa_core::{Error, FockState, Model, Result, Scalar};

use crate::table::{summary, Table};
use crate::{Outcome, RunConfig, SideArg};

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

fn yes(b: bool) -> String {
    if b { "yes" } else { "no" }.to_string()
}

fn opt<T: ToString>(x: &Option<T>) -> String {
    x.as_ref().map_or_else(|| "-".to_string(), ToString::to_string)
}

fn generators(model: &Model) -> Vec<FockState> {
    (0..model.rank()).map(|f| model.generator(f)).collect()
}

pub fn axioms(cfg: &RunConfig, level: Scalar) -> Result<Outcome> {
    let model = cfg.model(level)?;
    let sc = SweepConfig {
        max_total_degree: cfg.max_total_degree,
        random_samples: cfg.samples,
        random_max_degree: cfg.random_max_degree,
        seed: cfg.seed,
        strategy: cfg.core_strategy(),
    };
    let rep = sweep::axiom_sweep(&model, &sc)?;
    let mut t = Table::new("identity sweep", &["identity", "checked", "failed"]);
    for (id, tally) in &rep.tallies {
        t.row([
            id.as_str().to_string(),
            tally.checked.to_string(),
            tally.failed.to_string(),
        ]);
    }
    let mut table = t.render();
    table.push_str(&summary(&[
        ("central charge", opt(&rep.central_charge)),
        ("seed", rep.seed.to_string()),
    ]));
    Ok(Outcome {
        pass: rep.pass,
        report: to_value(&rep),
        table,
    })
}

pub fn dims(cfg: &RunConfig, level: Scalar) -> Result<Outcome> {
    let model = cfg.model(level)?;
    let trivial = GroupAction::trivial(&model)?;
    let sign = GroupAction::sign(&model)?;
    let inv = sign.invariant_family(&model)?;
    let expected_full = trivial.character_dims(cfg.cutoff)?;
    let expected_inv = sign.character_dims(cfg.cutoff)?;
    let mut rows = Vec::new();
    let mut pass = true;
    let mut t = Table::new(
        "graded dimensions",
        &["m", "dim V", "character", "dim V^sign", "character"],
    );
    for m in 0..=cfg.cutoff {
        let dv = model.dim(m)?;
        let di = inv.piece(m).dim();
        let (cv, ci) = (format_scalar(&expected_full[m]), format_scalar(&expected_inv[m]));
        pass &=
            Scalar::from_integer(dv.into()) == expected_full[m] && Scalar::from_integer(di.into()) == expected_inv[m];
        t.row([m.to_string(), dv.to_string(), cv.clone(), di.to_string(), ci.clone()]);
        rows.push(json!({"m": m, "dim": dv, "character": cv, "invariant_dim": di, "invariant_character": ci}));
    }
    Ok(Outcome {
        pass,
        report: json!({ "rows": rows }),
        table: t.render(),
    })
}

pub fn li(cfg: &RunConfig, level: Scalar) -> Result<Outcome> {
    let model = cfg.model(level)?;
    let strategy = cfg.core_strategy();
    let filt = Filtration::build(&model)?;
    let cutoff = cfg.cutoff;

    let laws = filt.check_laws(&model, cutoff, strategy)?;
    let mut grok = Vec::new();
    for s in 0..=6.min(cutoff - 1) {
        for i in 0..=s {
            for m in s + 1..=cutoff {
                grok.push(filt.check_grok(&model, i, s - i, m)?);
            }
        }
    }
    let grok_pass = grok.iter().all(|r| r.pass);
    let grok_checked: usize = grok.iter().map(|r| r.checked).sum();
    let gr = filt.check_gr_algebra(&model, cutoff, strategy)?;
    let diffcomm = if model.rank() == 1 {
        Some(lifilt::gr_to_diffcomm(&model, &filt)?)
    } else {
        None
    };
    let gens = generators(&model);
    let strong = lifilt::strong_gen_test(&model, &filt, &gens)?;
    let mut ed = Vec::new();
    for d in 1..=3.min(cutoff - 1) {
        ed.push(lifilt::verify_ed_generators(&model, &filt, &gens, d)?);
    }

    let pass = laws.pass
        && grok_pass
        && gr.pass
        && diffcomm.as_ref().map_or(true, |c| c.pass)
        && strong.pass
        && ed.iter().all(|e| e.pass);

    let cell_table = filt.table();
    let max_n = cell_table.iter().map(|c| c.n).max().unwrap_or(0);
    let mut header: Vec<String> = vec!["n \\ m".into()];
    header.extend((0..=cutoff).map(|m| m.to_string()));
    let refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut cells = Table::new("filtration dim(E_n ∩ V^m)", &refs);
    for n in 0..=max_n {
        let mut row = vec![n.to_string()];
        for m in 0..=cutoff {
            let d = cell_table.iter().find(|c| c.n == n && c.m == m).map_or(0, |c| c.dim);
            row.push(d.to_string());
        }
        cells.row(row);
    }
    let mut tab = cells.render();
    tab.push_str(&summary(&[
        (
            "product laws",
            format!("{} ({} products)", yes(laws.pass), laws.products_checked),
        ),
        (
            "[E_i, E_j] ⊆ E_{i+j+1}",
            format!("{} ({} checks)", yes(grok_pass), grok_checked),
        ),
        (
            "gr commutative/associative",
            format!(
                "{} ({} pairs, {} triples)",
                yes(gr.pass),
                gr.pairs_checked,
                gr.triples_checked
            ),
        ),
        (
            "gr V vs C[u^(n)]",
            diffcomm
                .as_ref()
                .map_or("-".into(), |c| format!("{} dims {:?}", yes(c.pass), c.gr_dims)),
        ),
        (
            "strong generation by generators",
            format!("{} first failure {}", yes(strong.pass), opt(&strong.first_failure)),
        ),
        (
            "E_d monomial generators",
            ed.iter()
                .map(|e| format!("d={} {}", e.d, yes(e.pass)))
                .collect::<Vec<_>>()
                .join(", "),
        ),
    ]));
    Ok(Outcome {
        pass,
        report: json!({
            "filtration": to_value(&cell_table),
            "laws": to_value(&laws),
            "grok": { "checks": grok_checked, "pass": grok_pass, "cells": to_value(&grok) },
            "gr_algebra": to_value(&gr),
            "gr_to_diffcomm": to_value(&diffcomm),
            "strong_generation": to_value(&strong),
            "ed_generators": to_value(&ed),
        }),
        table: tab,
    })
}

fn core_side(side: SideArg) -> Side {
    match side {
        SideArg::Right => Side::Right,
        SideArg::TwoSided => Side::TwoSided,
    }
}

pub fn ideal(cfg: &RunConfig, level: Scalar) -> Result<Outcome> {
    let model = cfg.model(level)?;
    let strategy = cfg.core_strategy();
    let filt = Filtration::build(&model)?;
    let side = core_side(cfg.side);
    let mut rows = Vec::new();
    let mut pass = true;
    let mut t = Table::new(
        "fullness witnesses (evidence at cutoff)",
        &["x", "deg", "N", "bound", "closed", "ok"],
    );
    let top = cfg.max_gen_degree.min(cfg.cutoff);
    for d in 1..=top {
        for x in model.basis_states(d)? {
            let ideal = ideals::closure(&model, std::slice::from_ref(&x), side, strategy)?;
            let audit = ideals::audit_closure(&model, &ideal, strategy)?;
            let witness = ideals::is_full(&filt, &ideal.family)?;
            let ok = audit.pass && witness.is_some_and(|n| n <= d + 2);
            pass &= ok;
            t.row([
                x.to_string(),
                d.to_string(),
                opt(&witness),
                (d + 2).to_string(),
                yes(audit.pass),
                yes(ok),
            ]);
            rows.push(json!({
                "x": x.to_string(),
                "degree": d,
                "witness": witness,
                "bound": d + 2,
                "cutoff": cfg.cutoff,
                "dims": ideal.family.dims(),
                "audit": to_value(&audit),
                "ok": ok,
            }));
        }
    }
    Ok(Outcome {
        pass,
        report: json!({ "side": cfg.side, "rows": rows }),
        table: t.render(),
    })
}

/// Headroom needed by every pair with total degree at most `p`.
fn recover_headroom(p: usize) -> usize {
    if p == 0 {
        return 0;
    }
    (0..=p).map(|h| recovery::required_cutoff(h, p - h)).max().unwrap_or(0)
}

pub fn recover(cfg: &RunConfig, level: Scalar) -> Result<Outcome> {
    let p = cfg.max_pair_degree;
    let needed = recover_headroom(p);
    if cfg.cutoff < needed {
        return Err(Error::CutoffExceeded {
            op: "recover",
            degree: needed,
            cutoff: cfg.cutoff,
        });
    }
    let model = cfg.model(level)?;
    let mut pairs = Vec::new();
    for h in 0..=p {
        for k in 0..=p - h {
            for a in model.basis_states(h)? {
                for b in model.basis_states(k)? {
                    pairs.push((a.clone(), b));
                }
            }
        }
    }
    let audit = recovery::purity_audit(&model, &pairs)?;
    let mut outcomes = Vec::with_capacity(pairs.len());
    for (a, b) in &pairs {
        outcomes.push(recovery::compare_pair(&model, a, b)?);
    }
    let equal = outcomes.iter().filter(|o| o.equal).count();
    let count = |r: CentralRoute| outcomes.iter().filter(|o| o.route == r).count();
    let mut dets = Vec::new();
    let mut dets_ok = true;
    let mut t = Table::new("sign matrices (-1)^j/(i+j+1)", &["n", "det"]);
    for n in 0..=10 {
        let det = recovery::hilbert_sign_matrix(n).determinant()?;
        dets_ok &= det != Scalar::from_integer(0.into());
        let s = format_scalar(&det);
        t.row([n.to_string(), s.clone()]);
        dets.push(json!({"n": n, "det": s}));
    }
    let pass = equal == outcomes.len() && audit.pass && dets_ok;
    let mut table = t.render();
    table.push_str(&summary(&[
        ("needed cutoff", needed.to_string()),
        ("pairs recovered exactly", format!("{equal}/{}", outcomes.len())),
        (
            "central routes",
            format!(
                "trivial {}, direct {}, swapped {}, self {}",
                count(CentralRoute::Trivial),
                count(CentralRoute::Direct),
                count(CentralRoute::Swapped),
                count(CentralRoute::SelfBracket)
            ),
        ),
        ("bracket calls during recovery", audit.bracket_calls.to_string()),
    ]));
    Ok(Outcome {
        pass,
        report: json!({
            "needed_cutoff": needed,
            "pairs": to_value(&outcomes),
            "equal": equal,
            "purity": to_value(&audit),
            "determinants": dets,
        }),
        table,
    })
}

pub fn orbifold(cfg: &RunConfig, level: Scalar) -> Result<Outcome> {
    let model = cfg.model(level)?;
    let strategy = cfg.core_strategy();
    let group = GroupAction::sign(&model)?;
    let inv = group.invariant_family(&model)?;
    let character = group.character_dims(cfg.cutoff)?;
    let dims_ok = inv
        .dims()
        .iter()
        .zip(&character)
        .all(|(d, c)| Scalar::from_integer((*d).into()) == *c);
    let laws = orbifold::reynolds_laws(&model, &group, cfg.cutoff.min(8), strategy)?;
    let (xs, search) = orbifold::strong_gen_search(&model, &group, cfg.max_gen_degree)?;
    let implication = orbifold::implication_check(&model, &group, &xs)?;

    let mut rewrites = Vec::new();
    let mut rewrites_ok = true;
    let mut t = Table::new(
        "Hilbert rewriting",
        &["u", "deg", "witness", "depth", "complete", "verified"],
    );
    for m in 1..=6.min(cfg.cutoff) {
        for u in model.family_states(&inv, m)? {
            let (row, ok) = match orbifold::xv_vx_membership(&model, &u, &xs)? {
                None => (json!({"u": u.to_string(), "degree": m, "witness": false}), false),
                Some(w) => {
                    let r = orbifold::hilbert_rewrite(&model, &group, &u, &xs, &w)?;
                    let ok = r.complete() && r.verified;
                    t.row([
                        u.to_string(),
                        m.to_string(),
                        yes(true),
                        r.tree.depth().to_string(),
                        yes(r.complete()),
                        yes(r.verified),
                    ]);
                    (
                        json!({
                            "u": u.to_string(),
                            "degree": m,
                            "witness": true,
                            "tree": r.tree.to_json(),
                            "complete": r.complete(),
                            "verified": r.verified,
                        }),
                        ok,
                    )
                }
            };
            if !ok && row["witness"] == json!(false) {
                t.row([
                    u.to_string(),
                    m.to_string(),
                    yes(false),
                    "-".into(),
                    "-".into(),
                    "-".into(),
                ]);
            }
            rewrites_ok &= ok;
            rewrites.push(row);
        }
    }
    let pass = dims_ok && laws.pass && search.test.pass && implication.pass && rewrites_ok;
    let mut table = summary(&[
        ("invariant dims", format!("{:?}", inv.dims())),
        ("match character", yes(dims_ok)),
        ("Reynolds laws", yes(laws.pass)),
        ("generators", search.generators.join(", ")),
        (
            "strong generation",
            format!(
                "{} (filtration test agrees: {})",
                yes(search.test.pass),
                yes(search.test.agree)
            ),
        ),
        ("invariants in XV", yes(implication.positive_part_in_xv)),
    ]);
    table.push_str(&t.render());
    Ok(Outcome {
        pass,
        report: json!({
            "invariant_dims": inv.dims(),
            "character": character.iter().map(format_scalar).collect::<Vec<_>>(),
            "reynolds_laws": to_value(&laws),
            "search": to_value(&search),
            "implication": to_value(&implication),
            "rewrites": rewrites,
        }),
        table,
    })
}

pub fn counterexample(cfg: &RunConfig) -> Result<Outcome> {
    let growth = DiffAlgebra::new(cfg.cutoff).generator_growth()?;
    let mut t = Table::new(
        "sign invariants of C[u, u', u'', ...]",
        &["weight", "invariant", "reachable", "new", "total"],
    );
    let mut total = 0;
    let mut totals = Vec::new();
    for r in &growth.rows {
        total += r.new_generators;
        if r.weight >= 2 && r.weight % 2 == 0 {
            totals.push(json!({"cutoff": r.weight, "total": total}));
        }
        t.row([r.weight, r.invariant_dim, r.reachable_dim, r.new_generators, total]);
    }
    let increasing = totals
        .windows(2)
        .all(|w| w[0]["total"].as_u64() < w[1]["total"].as_u64());
    let pass = growth.grows_at_every_even_weight() && increasing;
    let mut table = t.render();
    table.push_str(&summary(&[
        (
            "new generator at every even weight",
            yes(growth.grows_at_every_even_weight()),
        ),
        ("total strictly increasing over even cutoffs", yes(increasing)),
    ]));
    Ok(Outcome {
        pass,
        report: json!({
            "growth": to_value(&growth),
            "totals_by_even_cutoff": totals,
            "strictly_increasing": increasing,
        }),
        table,
    })
}

pub fn chain(cfg: &RunConfig, level: Scalar) -> Result<Outcome> {
    let model = cfg.model(level)?;
    let strategy = cfg.core_strategy();
    let filt = Filtration::build(&model)?;
    let side = core_side(cfg.side);
    let steps = cfg.max_gen_degree.min(cfg.cutoff - 1);

    // {d^j b : j <= k}
    let b = model.generator(0);
    let mut derivative_sets = Vec::new();
    let mut cur = Vec::new();
    let mut x = b.clone();
    for _ in 0..steps {
        cur.push(x.clone());
        derivative_sets.push(cur.clone());
        x = model.derivative(&x)?;
    }

    // invariant basis elements of degree 2..=k+2
    let inv = GroupAction::sign(&model)?.invariant_family(&model)?;
    let mut invariant_sets = Vec::new();
    let mut cur = Vec::new();
    for m in 2..=(steps + 1).min(cfg.cutoff) {
        cur.extend(model.family_states(&inv, m)?);
        invariant_sets.push(cur.clone());
    }

    let mut reports = Vec::new();
    let mut table = String::new();
    let mut pass = true;
    for (name, sets) in [("derivatives", &derivative_sets), ("invariants", &invariant_sets)] {
        if sets.is_empty() {
            continue;
        }
        let rep = ideals::chain_experiment(&model, &filt, sets, side, strategy)?;
        let mut t = Table::new(&format!("chain of {name}"), &["k", "|X_k|", "dims", "N"]);
        for s in &rep.steps {
            let dims: Vec<String> = s.dims.iter().map(ToString::to_string).collect();
            t.row([
                s.k.to_string(),
                s.generators.to_string(),
                dims.join(" "),
                opt(&s.full_witness),
            ]);
        }
        table.push_str(&t.render());
        table.push_str(&summary(&[
            ("nested", yes(rep.nested)),
            ("stabilizes at", rep.stabilization_index.to_string()),
            ("gr I = gr J only when I = J", yes(rep.gr_lemma_pass)),
        ]));
        pass &= rep.pass;
        reports.push(json!({"chain": name, "report": to_value(&rep)}));
    }
    Ok(Outcome {
        pass,
        report: json!({ "side": cfg.side, "chains": reports }),
        table,
    })
}
