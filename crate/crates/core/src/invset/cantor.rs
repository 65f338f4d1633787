use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;

use super::{min_invariant_set, Cell, CellSet};
use crate::diffop::DiffOperator;
use crate::error::Result;
use crate::io::fmt_float;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CantorRow {
    pub eps: f64,
    pub n_components: usize,
    /// Largest center-to-center distance inside a component, plus one cell.
    pub max_component_diameter: f64,
    /// Cells with no other occupied cell within `3 eps`.
    pub isolated_cell_count: usize,
    pub cells: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CantorReport {
    /// Rows by decreasing `eps`.
    pub rows: Vec<CantorRow>,
    pub components_nondecreasing: bool,
    pub totally_disconnected_trend: bool,
    pub perfect_trend: bool,
    pub note: Option<String>,
}

impl CantorReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eps,n_components,max_component_diameter,isolated_cell_count\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt_float(r.eps),
                r.n_components,
                fmt_float(r.max_component_diameter),
                r.isolated_cell_count
            );
        }
        out
    }
}

/// 8-connected components of the occupied cells.
fn components(set: &CellSet) -> Vec<Vec<Cell>> {
    let mut unseen: BTreeSet<Cell> = set.cells().map(|(c, _)| c).collect();
    let mut out = Vec::new();
    while let Some(start) = unseen.pop_first() {
        let mut comp = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some((x, y)) = queue.pop_front() {
            for dx in -1..=1 {
                for dy in -1..=1 {
                    let nb = (x + dx, y + dy);
                    if unseen.remove(&nb) {
                        comp.push(nb);
                        queue.push_back(nb);
                    }
                }
            }
        }
        out.push(comp);
    }
    out
}

fn diameter(set: &CellSet, comp: &[Cell]) -> f64 {
    let mut best = 0.0f64;
    for (i, &a) in comp.iter().enumerate() {
        for &b in &comp[i + 1..] {
            best = best.max((set.center(a) - set.center(b)).norm());
        }
    }
    best + set.eps
}

/// Isolated cells: the nearest other occupied center is farther than `3 eps`.
fn isolated_cells(set: &CellSet) -> usize {
    let reach = 3.0 * set.eps;
    let span = 3i64;
    set.cells()
        .filter(|&((x, y), _)| {
            let z = set.center((x, y));
            !(-span..=span).any(|dx| {
                (-span..=span).any(|dy| {
                    (dx, dy) != (0, 0)
                        && set.contains((x + dx, y + dy))
                        && (set.center((x + dx, y + dy)) - z).norm() <= reach
                })
            })
        })
        .count()
}

pub fn analyze(set: &CellSet) -> CantorRow {
    let comps = components(set);
    CantorRow {
        eps: set.eps,
        n_components: comps.len(),
        max_component_diameter: comps.iter().map(|c| diameter(set, c)).fold(0.0, f64::max),
        isolated_cell_count: isolated_cells(set),
        cells: set.len(),
    }
}

pub fn cantor_diagnostics(op: &DiffOperator, n: u64, eps_list: &[f64], max_atoms: usize) -> Result<CantorReport> {
    let mut eps_sorted = eps_list.to_vec();
    eps_sorted.sort_by(|a, b| b.total_cmp(a));
    let rows = eps_sorted
        .iter()
        .map(|&eps| Ok(analyze(&min_invariant_set(op, n, eps, max_atoms)?)))
        .collect::<Result<Vec<_>>>()?;
    let pairs = || rows.windows(2).map(|w| (&w[0], &w[1]));
    let note = (op.order() < 2).then(|| {
        format!(
            "order k = {} < 2: the Cantor structure is not expected and the perfectness proxy is vacuous",
            op.order()
        )
    });
    Ok(CantorReport {
        components_nondecreasing: pairs().all(|(a, b)| b.n_components >= a.n_components),
        totally_disconnected_trend: pairs().all(|(a, b)| b.max_component_diameter < a.max_component_diameter),
        perfect_trend: pairs().all(|(a, b)| b.isolated_cell_count <= a.isolated_cell_count)
            && rows.last().is_some_and(|r| r.isolated_cell_count == 0),
        rows,
        note,
    })
}
