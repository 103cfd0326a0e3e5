//! The finite-size estimator b_N, size sweeps and the 1/N extrapolation.
//!
//! At the physical loop weight the vacuum Gram matrix is rank one on the
//! relevant vectors, so both ⟨t|H_{-2}|0⟩ and ⟨t|T⟩ vanish and the ratio is
//! a 0/0 limit in n. It is evaluated from first derivatives in n:
//!
//! b_N = -A |T†G'y|² / (T†G'T · d(E_X - E_T)/dn),
//!
//! with y = H_{-2}|0⟩, G' = dG/dn and A the coupling of the normalized cell.

use std::io::Write;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graded::Weighting;
use crate::linalg::{self, dense_solve, dotc};
use crate::model::{make_spec, ModelKind, ModelSpec};
use crate::spectra::{
    block_hamiltonian, central_charge_estimate, find_jordan_pair, ground_state, partner_lines, Candidate,
    JordanPair, Lattice, OrbitBasis, DENSE_EIGEN_LIMIT,
};
use crate::virasoro::apply_hm2;

/// Smallest |T†G'T| accepted as a denominator.
pub const PAIRING_FLOOR: f64 = 1e-12;

/// One row of a sweep. Column order is the field order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub kind: ModelKind,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "E0")]
    pub e0: f64,
    #[serde(rename = "E_T")]
    pub e_t: f64,
    #[serde(rename = "Delta_N")]
    pub delta_n: f64,
    pub b_n: f64,
    pub cell_residual: f64,
    pub c_estimate: f64,
    pub mu_sensitivity: f64,
}

impl MeasurementRecord {
    pub const COLUMNS: [&'static str; 9] = [
        "kind",
        "L",
        "E0",
        "E_T",
        "Delta_N",
        "b_n",
        "cell_residual",
        "c_estimate",
        "mu_sensitivity",
    ];

    pub fn is_finite(&self) -> bool {
        [
            self.e0,
            self.e_t,
            self.delta_n,
            self.b_n,
            self.cell_residual,
            self.c_estimate,
            self.mu_sensitivity,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// Everything computed on the way to b_N.
#[derive(Clone, Debug, Serialize)]
pub struct Diagnostics {
    pub e_x: f64,
    /// T†G'y.
    pub sigma: [f64; 2],
    /// T†G'T.
    pub tau: f64,
    /// Literal pair(T, T) at the physical weight.
    pub pair_tt: f64,
    /// Literal pair(T, H_{-2}|0⟩) at the physical weight.
    pub pair_ty: f64,
    pub de_t: f64,
    pub de_x: f64,
    /// Coupling read back from the normalized cell.
    pub coupling: f64,
    pub eigen_residual: f64,
    pub ground_residual: f64,
    pub source_leakage: f64,
    pub b_rescaled: f64,
    pub b_shifted: f64,
    pub nearest_to_two: Vec<(f64, f64)>,
}

#[derive(Clone, Debug)]
pub struct Measurement {
    pub record: MeasurementRecord,
    pub diagnostics: Diagnostics,
}

/// Jointly rescaled and shifted copy of the cell: (λT, λ(t + μT)).
struct CellView<'a> {
    pair: &'a JordanPair,
    lambda: f64,
    mu: f64,
}

impl CellView<'_> {
    fn t_state(&self) -> Vec<C64> {
        self.pair.t_state.iter().map(|v| v * self.lambda).collect()
    }

    fn partner(&self) -> Vec<Vec<C64>> {
        let mut p: Vec<Vec<C64>> = self
            .pair
            .partner
            .iter()
            .map(|v| v.iter().map(|x| x * self.lambda).collect())
            .collect();
        let bottom = p.len() - 1;
        linalg::axpy(C64::new(self.mu * self.lambda, 0.0), &self.pair.t_state, &mut p[bottom]);
        p
    }

    /// A read from ℓ_T† (H - E_T) t = A ℓ_T† T.
    fn coupling(&self) -> C64 {
        let jp = self.pair;
        let t = self.t_state();
        let image = jp.block.apply_shifted(C64::new(jp.e_t, 0.0), &self.partner());
        dotc(&jp.t_left, &image[jp.block.bottom()]) / dotc(&jp.t_left, &t)
    }
}

struct Derivatives {
    sigma: C64,
    tau: C64,
    d_gap: f64,
}

fn estimate(lat: &Lattice, view: &CellView, y: &[C64], d_gap: f64) -> Result<f64> {
    let t = view.t_state();
    let vac = view.pair.vacuum_orbits();
    let w = Weighting::Derivative(lat.spec.n);
    let full = vac.expand(&lat.vacuum, &t);
    let sigma = lat.pair_block(vac, &t, y, w);
    let tau = lat.pair_block(vac, &t, &full, w);
    if tau.norm() < PAIRING_FLOOR * linalg::norm(&t).powi(2) {
        return Err(Error::Numerical(format!("T†G'T = {tau:.3e} is below the pairing floor")));
    }
    if d_gap.abs() < PAIRING_FLOOR {
        return Err(Error::Numerical("d(E_X - E_T)/dn vanishes".into()));
    }
    let a = view.coupling().re;
    Ok(-a * sigma.norm_sqr() / (tau.re * d_gap))
}

fn hellmann_feynman(lat: &Lattice, orbits: &OrbitBasis, left: &[C64], right: &[C64]) -> Result<C64> {
    let dh = block_hamiltonian(&lat.model, orbits, orbits, Weighting::Derivative(lat.spec.n))?;
    Ok(dotc(left, &dh.mul_vec(right)) / dotc(left, right))
}

/// b_N and diagnostics for one size at the physical point.
pub fn measure(spec: &ModelSpec) -> Result<Measurement> {
    let n0 = spec.n;
    let lat = Lattice::new(spec)?;
    let ground = ground_state(&lat, n0)?;
    let y = apply_hm2(spec, &lat.model, &lat.vacuum, Weighting::At(n0), &ground.vector);
    let jp = find_jordan_pair(&lat, &ground, &y, n0)?;

    let vac = jp.vacuum_orbits();
    let de_t = hellmann_feynman(&lat, vac, &jp.t_left, &jp.t_state)?;
    let de_x = hellmann_feynman(&lat, jp.partner_orbits(), &jp.x_left, &jp.x_right)?;
    let w = Weighting::Derivative(n0);
    let t_full = vac.expand(&lat.vacuum, &jp.t_state);
    let d = Derivatives {
        sigma: lat.pair_block(vac, &jp.t_state, &y, w),
        tau: lat.pair_block(vac, &jp.t_state, &t_full, w),
        d_gap: (de_x - de_t).re,
    };
    let base = CellView {
        pair: &jp,
        lambda: 1.0,
        mu: 0.0,
    };
    let b_n = estimate(&lat, &base, &y, d.d_gap)?;
    let b_rescaled = estimate(
        &lat,
        &CellView {
            pair: &jp,
            lambda: 3.0,
            mu: 0.0,
        },
        &y,
        d.d_gap,
    )?;
    let b_shifted = estimate(
        &lat,
        &CellView {
            pair: &jp,
            lambda: 1.0,
            mu: 1.0,
        },
        &y,
        d.d_gap,
    )?;

    let at = Weighting::At(n0);
    let record = MeasurementRecord {
        kind: spec.kind,
        l: spec.l,
        e0: ground.energy,
        e_t: jp.e_t,
        delta_n: jp.delta_n,
        b_n,
        cell_residual: jp.cell_residual,
        c_estimate: central_charge_estimate(spec, ground.energy),
        mu_sensitivity: (b_shifted - b_n).abs(),
    };
    if !record.is_finite() {
        return Err(Error::Numerical(format!("non-finite measurement at L = {}", spec.l)));
    }
    let diagnostics = Diagnostics {
        e_x: jp.e_x,
        sigma: [d.sigma.re, d.sigma.im],
        tau: d.tau.re,
        pair_tt: lat.pair_block(vac, &jp.t_state, &t_full, at).re,
        pair_ty: lat.pair_block(vac, &jp.t_state, &y, at).norm(),
        de_t: de_t.re,
        de_x: de_x.re,
        coupling: base.coupling().re,
        eigen_residual: jp.eigen_residual,
        ground_residual: ground.residual,
        source_leakage: jp.source_leakage,
        b_rescaled,
        b_shifted,
        nearest_to_two: jp.nearest_to_two().iter().map(|c| (c.delta, c.weight)).collect(),
    };
    Ok(Measurement { record, diagnostics })
}

pub fn measure_b(spec: &ModelSpec) -> Result<MeasurementRecord> {
    measure(spec).map(|m| m.record)
}

/// Dominant eigencomponent of `source` in a small block: (energy, right vector).
fn dominant_component(h: &crate::sparse::SparseOperator<C64>, source: &[C64]) -> Result<(C64, Vec<C64>)> {
    if h.rows() > DENSE_EIGEN_LIMIT {
        return Err(Error::invalid("finite-shift oracle is limited to small blocks"));
    }
    let eig = linalg::dense_eigen(h)?;
    let dim = h.rows();
    let mut vm = faer::Mat::<C64>::zeros(dim, dim);
    for k in 0..dim {
        for (i, x) in eig.vector(k).iter().enumerate() {
            vm[(i, k)] = *x;
        }
    }
    let c = dense_solve(&vm, source);
    let best = (0..dim).max_by(|&a, &b| c[a].norm().total_cmp(&c[b].norm())).expect("empty block");
    Ok((eig.values[best], eig.vector(best)))
}

/// The literal ratio evaluated off the physical point at n0 ± ε, symmetrized
/// and Richardson-extrapolated in ε. Independent of the Jordan solve; small
/// sizes only.
pub fn finite_shift_estimate(spec: &ModelSpec, eps: f64) -> Result<f64> {
    let lat = Lattice::new(spec)?;
    let a = 2.0 * spec.gap_scale();
    let ratio = |n: f64| -> Result<f64> {
        let ground = ground_state(&lat, n)?;
        let y = apply_hm2(spec, &lat.model, &lat.vacuum, Weighting::At(n), &ground.vector);
        let vac = lat.orbits(0, 2)?;
        let h00 = block_hamiltonian(&lat.model, &vac, &vac, Weighting::At(n))?;
        let (e_t, t) = dominant_component(&h00, &vac.project(&lat.vacuum, &y))?;
        let part = lat.orbits(partner_lines(spec.kind), 2)?;
        let hxx = block_hamiltonian(&lat.model, &part, &part, Weighting::At(n))?;
        let ex = linalg::dense_eigen(&hxx)?
            .values
            .into_iter()
            .min_by(|p, q| (p - e_t).norm().total_cmp(&(q - e_t).norm()))
            .ok_or_else(|| Error::Numerical("empty partner block".into()))?;
        let t_full = vac.expand(&lat.vacuum, &t);
        let ty = lat.pair_block(&vac, &t, &y, Weighting::At(n));
        let tt = lat.pair_block(&vac, &t, &t_full, Weighting::At(n));
        Ok(-a * (ty.norm_sqr() / tt.re) / (ex - e_t).re)
    };
    let sym = |e: f64| -> Result<f64> { Ok(0.5 * (ratio(spec.n + e)? + ratio(spec.n - e)?)) };
    let coarse = sym(eps)?;
    let fine = sym(eps / 2.0)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Outcome of one size in a sweep.
#[derive(Clone, Debug, Serialize)]
pub struct SweepEntry {
    pub kind: ModelKind,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record: Option<MeasurementRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SweepEntry {
    pub fn from_result(kind: ModelKind, l: usize, r: Result<MeasurementRecord>) -> Self {
        match r {
            Ok(rec) => SweepEntry {
                kind,
                l,
                record: Some(rec),
                error: None,
            },
            Err(e) => SweepEntry {
                kind,
                l,
                record: None,
                error: Some(e.to_string()),
            },
        }
    }
}

/// One entry per requested size, in request order. Sizes run in parallel.
pub fn sweep(kind: ModelKind, sizes: &[usize]) -> Vec<SweepEntry> {
    sizes
        .par_iter()
        .map(|&l| SweepEntry::from_result(kind, l, make_spec(kind, l).and_then(|s| measure_b(&s))))
        .collect()
}

pub fn records(entries: &[SweepEntry]) -> Vec<MeasurementRecord> {
    entries.iter().filter_map(|e| e.record).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Extrapolation {
    pub order: usize,
    pub b_inf: f64,
    /// (order, b_inf) for every order from 1 to `order`.
    pub per_order: Vec<(usize, f64)>,
    /// max - min over `per_order`.
    pub spread: f64,
    /// RMS residual of the requested-order fit.
    pub rms_residual: f64,
}

/// Least-squares b_inf + a_1/N + ... at a single order. Points are (N, b).
pub fn fit_inverse_powers(points: &[(f64, f64)], order: usize) -> Result<(Vec<f64>, f64)> {
    if order == 0 {
        return Err(Error::invalid("fit order must be at least 1"));
    }
    if points.len() < order + 2 {
        return Err(Error::invalid(format!(
            "order {order} needs at least {} records, got {}",
            order + 2,
            points.len()
        )));
    }
    let rows = points.len();
    let cols = order + 1;
    let design = faer::Mat::<f64>::from_fn(rows, cols, |r, c| points[r].0.powi(-(c as i32)));
    let sv = design
        .singular_values()
        .map_err(|e| Error::Numerical(format!("svd failed: {e:?}")))?;
    let (smax, smin) = (sv[0], sv[sv.len() - 1]);
    if !(smin > 1e-12 * smax) {
        return Err(Error::Numerical(format!(
            "rank-deficient fit: singular values {smax:.3e} .. {smin:.3e}"
        )));
    }
    let rhs = faer::Mat::<f64>::from_fn(rows, 1, |r, _| points[r].1);
    use faer::linalg::solvers::SolveLstsq;
    let coef = design.col_piv_qr().solve_lstsq(&rhs);
    let coeffs: Vec<f64> = (0..cols).map(|c| coef[(c, 0)]).collect();
    let rms = (points
        .iter()
        .map(|&(n, b)| {
            let f: f64 = coeffs.iter().enumerate().map(|(k, a)| a * n.powi(-(k as i32))).sum();
            (f - b).powi(2)
        })
        .sum::<f64>()
        / rows as f64)
        .sqrt();
    Ok((coeffs, rms))
}

/// Extrapolates b_N in powers of 1/N (N = L/2).
pub fn extrapolate(records: &[MeasurementRecord], order: usize) -> Result<Extrapolation> {
    let points: Vec<(f64, f64)> = records.iter().map(|r| ((r.l / 2) as f64, r.b_n)).collect();
    extrapolate_points(&points, order)
}

pub fn extrapolate_points(points: &[(f64, f64)], order: usize) -> Result<Extrapolation> {
    let (top, rms_residual) = fit_inverse_powers(points, order)?;
    let mut per_order = Vec::with_capacity(order);
    for k in 1..order {
        per_order.push((k, fit_inverse_powers(points, k)?.0[0]));
    }
    per_order.push((order, top[0]));
    let lo = per_order.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let hi = per_order.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(Extrapolation {
        order,
        b_inf: top[0],
        per_order,
        spread: hi - lo,
        rms_residual,
    })
}

/// Nine significant digits, like printf's %.9g.
pub fn format_sig(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if !(-5..9).contains(&exp) {
        let s = format!("{v:.8e}");
        let (mant, e) = s.split_once('e').expect("exponent");
        let mant = trim_zeros(mant);
        let e: i32 = e.parse().expect("exponent digits");
        format!("{mant}e{}{:02}", if e < 0 { '-' } else { '+' }, e.abs())
    } else {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// CSV with the record columns plus a trailing `error` column; a failed size
/// keeps its kind and L and leaves the numeric fields empty.
pub fn write_csv<W: Write>(w: W, entries: &[SweepEntry]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = MeasurementRecord::COLUMNS.to_vec();
    header.push("error");
    out.write_record(&header)?;
    for e in entries {
        let mut row = vec![e.kind.as_str().to_string(), e.l.to_string()];
        match &e.record {
            Some(r) => {
                row.extend(
                    [r.e0, r.e_t, r.delta_n, r.b_n, r.cell_residual, r.c_estimate, r.mu_sensitivity]
                        .map(format_sig),
                );
                row.push(String::new());
            }
            None => {
                row.extend(std::iter::repeat_n(String::new(), MeasurementRecord::COLUMNS.len() - 2));
                row.push(e.error.clone().unwrap_or_default());
            }
        }
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads the successful rows back; rows with an error are skipped.
pub fn read_csv<R: std::io::Read>(r: R) -> Result<Vec<MeasurementRecord>> {
    let mut rd = csv::Reader::from_reader(r);
    let headers = rd.headers()?.clone();
    let err_col = headers.iter().position(|h| h == "error");
    let mut out = Vec::new();
    for row in rd.records() {
        let row = row?;
        if err_col.is_some_and(|c| row.get(c).is_some_and(|v| !v.is_empty())) {
            continue;
        }
        out.push(row.deserialize(Some(&headers))?);
    }
    Ok(out)
}

/// JSON array with one flat object per entry: the record fields plus
/// `error` (null on success; only kind, L and error on failure).
pub fn write_json<W: Write>(w: W, entries: &[SweepEntry]) -> Result<()> {
    let rows: Vec<serde_json::Value> = entries.iter().map(entry_json).collect::<Result<_>>()?;
    serde_json::to_writer_pretty(w, &rows)?;
    Ok(())
}

fn entry_json(e: &SweepEntry) -> Result<serde_json::Value> {
    let mut obj = match &e.record {
        Some(r) => serde_json::to_value(r)?,
        None => serde_json::json!({ "kind": e.kind, "L": e.l }),
    };
    obj["error"] = serde_json::to_value(&e.error)?;
    Ok(obj)
}

/// Ranking by |Δ - 2| among candidates, for reports.
pub fn describe_candidates(c: &[Candidate]) -> String {
    c.iter()
        .map(|c| format!("Δ={:.6} w={:.3e}", c.delta, c.weight))
        .collect::<Vec<_>>()
        .join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_digit_format() {
        assert_eq!(format_sig(-4.332947123456), "-4.33294712");
        assert_eq!(format_sig(1.0), "1");
        assert_eq!(format_sig(1.5e-13), "1.5e-13");
        assert_eq!(format_sig(123456789.0), "123456789");
    }

    #[test]
    fn synthetic_fit_is_exact() {
        let pts: Vec<(f64, f64)> = (5..9).map(|n| (n as f64, -5.0 + 3.0 / n as f64)).collect();
        let e = extrapolate_points(&pts, 1).unwrap();
        assert!((e.b_inf + 5.0).abs() < 1e-10);
    }

    #[test]
    fn too_few_points() {
        let pts = [(5.0, 1.0), (6.0, 1.0)];
        assert!(extrapolate_points(&pts, 1).is_err());
    }
}
