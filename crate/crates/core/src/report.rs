//! Deterministic CSV rendering for the per-degree reports. Floating-point
//! values are printed with 17 significant digits so reruns diff byte-for-byte.

use crate::essnorm::{CommutatorSeries, SchattenReport};
use crate::geometry::{ClosednessReport, SumCheckRow, TensorDecayReport};
use crate::similarity::PolarReport;
use crate::variety::ConsistencyRow;

/// 17 significant digits, locale-independent.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:.16e}")
}

pub fn dims_csv(degrees: &[u32], dims: &[u64]) -> String {
    let mut out = String::from("degree,dim\n");
    for (n, d) in degrees.iter().zip(dims.iter()) {
        out.push_str(&format!("{n},{d}\n"));
    }
    out
}

pub fn consistency_csv(rows: &[ConsistencyRow]) -> String {
    let mut out = String::from("degree,quotient_dim,variety_dim,distance\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.degree,
            r.quotient_dim,
            r.variety_dim,
            fmt_f64(r.distance)
        ));
    }
    out
}

pub fn tensor_decay_csv(report: &TensorDecayReport) -> String {
    let mut out = String::from("pair_i,pair_j,power,cos,bound,within_bound\n");
    for pair in &report.pairs {
        for row in &pair.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                pair.i,
                pair.j,
                row.power,
                fmt_f64(row.cos),
                fmt_f64(row.bound),
                row.within_bound
            ));
        }
    }
    out
}

pub fn closedness_csv(report: &ClosednessReport) -> String {
    let mut out = String::from("degree,sigma_min,bound,pass\n");
    for r in &report.rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.degree,
            fmt_f64(r.sigma_min),
            fmt_f64(r.bound),
            r.pass
        ));
    }
    out
}

pub fn sum_check_csv(rows: &[SumCheckRow]) -> String {
    let mut out = String::from("degree,sigma_min_positive,kernel_dim\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            r.degree,
            fmt_f64(r.sigma_min_positive),
            r.kernel_dim
        ));
    }
    out
}

pub fn commutator_series_csv(series: &CommutatorSeries) -> String {
    let mut out = String::from("degree,norm,rank,boundary\n");
    for r in &series.rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.degree,
            fmt_f64(r.norm),
            r.rank,
            r.boundary
        ));
    }
    out
}

pub fn schatten_csv(report: &SchattenReport) -> String {
    let mut out = String::from("degree,contribution,partial_sum,boundary\n");
    for r in &report.rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.degree,
            fmt_f64(r.contribution),
            fmt_f64(r.partial_sum),
            r.boundary
        ));
    }
    out
}

pub fn polar_csv(report: &PolarReport) -> String {
    let mut out = String::from(
        "degree,source_dim,target_dim,sigma_min,sigma_max,max_deviation,envelope,\
         zero_singular_values,deviation_partial_sum,est_applicable,est_upper_ok,est_lower_ok\n",
    );
    for r in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.degree,
            r.source_dim,
            r.target_dim,
            fmt_f64(r.sigma_min),
            fmt_f64(r.sigma_max),
            fmt_f64(r.max_deviation),
            fmt_f64(r.envelope),
            r.zero_singular_values,
            fmt_f64(r.deviation_partial_sum),
            r.est_applicable,
            r.est_upper_ok,
            r.est_lower_ok
        ));
    }
    out
}
