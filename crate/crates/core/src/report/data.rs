//! Plot-ready CSV tables. Floats use the shortest representation that parses
//! back to the same double.

use std::io::Write;

use crate::complex_oscillator::{hc_spectrum, propagator_abc, ComplexOscParams};
use crate::error::{Error, Result};
use crate::field::{mode_reduce, FieldParams};
use crate::pais_uhlenbeck::{pu_spectrum, xi_levels, Branch, PUParams, PUPropagatorCoeffs, TransformCoefficients, TwoModeBasis};

pub(crate) fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

pub(crate) fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn write_rows<W: Write>(out: W, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

/// `level,energy,numerical`: the oscillator sums `ω1(n1+½) + ω2(n2+½)` beside
/// the eigenvalues of the interior block of `Ĥ_PU`.
pub fn write_pu_spectrum_csv<W: Write>(params: &PUParams, basis: &TwoModeBasis, count: usize, out: W) -> Result<()> {
    let coeffs = TransformCoefficients::closed_form(params, Branch::Plus);
    let numerical = pu_spectrum(params, &coeffs, basis, count)?;
    let rows = xi_levels(params, count).into_iter().zip(numerical).enumerate().map(|(n, (e, x))| vec![n as f64, e, x]);
    write_rows(out, &["level", "energy", "numerical"], rows)
}

/// `level,energy,numerical_re,numerical_im` for the complex oscillator.
pub fn write_complex_spectrum_csv<W: Write>(params: &ComplexOscParams, count: usize, out: W) -> Result<()> {
    let ev = hc_spectrum(params, count)?;
    let rows = ev.iter().enumerate().map(|(n, z)| vec![n as f64, n as f64 + 0.5, z.re, z.im]);
    write_rows(out, &["level", "energy", "numerical_re", "numerical_im"], rows)
}

/// Evenly spaced times on `[0, t_max]`.
pub fn time_grid(t_max: f64, points: usize) -> Vec<f64> {
    (0..points).map(|i| t_max * i as f64 / (points - 1).max(1) as f64).collect()
}

/// `t,d,f,g,j,k,m,n` of the canonical coefficient set.
pub fn write_pu_propagator_csv<W: Write>(params: &PUParams, times: &[f64], out: W) -> Result<()> {
    let rows = times.iter().map(|&t| {
        let c = PUPropagatorCoeffs::canonical(params, t);
        std::iter::once(t).chain(c.values()).collect()
    });
    write_rows(out, &["t", "d", "f", "g", "j", "k", "m", "n"], rows)
}

/// `t,a_re,a_im,b_re,b_im,c_re,c_im` of the complex-oscillator kernel
/// coefficients; caustic times are skipped.
pub fn write_complex_propagator_csv<W: Write>(epsilon: f64, times: &[f64], out: W) -> Result<()> {
    let rows = times.iter().filter_map(|&t| {
        let abc = propagator_abc(epsilon, t).ok()?;
        Some(vec![t, abc.a.re, abc.a.im, abc.b.re, abc.b.im, abc.c.re, abc.c.im])
    });
    write_rows(out, &["t", "a_re", "a_im", "b_re", "b_im", "c_re", "c_im"], rows)
}

/// `k,omega1,omega2,a,b,c` for the plane-wave modes at `wavenumbers`; modes
/// with a vanishing frequency are skipped.
pub fn write_field_modes_csv<W: Write>(params: &FieldParams, wavenumbers: &[f64], out: W) -> Result<()> {
    let rows = wavenumbers.iter().filter_map(|&k| {
        let p = mode_reduce(params, k).ok()?;
        let c = TransformCoefficients::closed_form(&p, Branch::Plus);
        Some(vec![k, p.omega1(), p.omega2(), c.a, c.b, c.c])
    });
    write_rows(out, &["k", "omega1", "omega2", "a", "b", "c"], rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn text(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> String {
        let mut buf = Vec::new();
        f(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn spectrum_csv_layout() {
        let p = PUParams::new(2.0, 1.0).unwrap();
        let b = TwoModeBasis::new(16, 16).unwrap();
        let s = text(|w| write_pu_spectrum_csv(&p, &b, 6, w));
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "level,energy,numerical");
        assert!(lines[1].starts_with("0,1.5,"));
        assert!(lines[2].starts_with("1,2.5,"));
        assert!(lines[3].starts_with("2,3.5,"));
        assert_eq!(lines.len(), 7);
        assert!(!s.contains('\r') && s.ends_with('\n'));
    }

    #[test]
    fn floats_round_trip() {
        let p = PUParams::new(2.0, 1.0).unwrap();
        let times = time_grid(1.0, 11);
        let s = text(|w| write_pu_propagator_csv(&p, &times, w));
        let row: Vec<f64> = s.lines().nth(4).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
        let c = PUPropagatorCoeffs::canonical(&p, times[3]);
        assert_eq!(row[0], times[3]);
        assert_eq!(&row[1..], &c.values());
        let first: Vec<f64> = s.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
        assert!(first.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn skipped_rows() {
        let s = text(|w| write_complex_propagator_csv(0.0, &[0.0, 0.5, std::f64::consts::PI], w));
        assert_eq!(s.lines().count(), 2);
        let f = FieldParams::new(1.0, 0.0).unwrap();
        let s = text(|w| write_field_modes_csv(&f, &[0.0, 1.0], w));
        assert_eq!(s.lines().count(), 2);
        assert!(s.lines().nth(1).unwrap().starts_with("1,"));
    }
}
