//! CSV dumps of fields, radial profiles and zero-set curves, 17 significant
//! digits per value.

use std::io::{Read, Write};

use crate::diagnostics::ZeroSetCurve;
use crate::geometry::{Field, Grid};
use crate::radial::RadialProfile;
use crate::scalar::Scalar;

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header `x,y,weight,value` (`x,weight,value` on the interval).
pub fn write_field_csv<T: Scalar, W: Write>(out: W, grid: &Grid<T>, u: &Field<T>) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let planar = grid.dimension() == 2;
    if planar {
        w.write_record(["x", "y", "weight", "value"])?;
    } else {
        w.write_record(["x", "weight", "value"])?;
    }
    for ((x, &wt), &v) in grid.coords().iter().zip(grid.weights()).zip(u.iter()) {
        if planar {
            w.write_record([num(x[0].as_f64()), num(x[1].as_f64()), num(wt.as_f64()), num(v.as_f64())])?;
        } else {
            w.write_record([num(x[0].as_f64()), num(wt.as_f64()), num(v.as_f64())])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Nodes read back from a field dump.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldDump {
    pub coords: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub values: Vec<f64>,
}

pub fn read_field_csv<R: Read>(input: R) -> csv::Result<FieldDump> {
    let mut r = csv::Reader::from_reader(input);
    let planar = r.headers()?.len() == 4;
    let mut dump = FieldDump { coords: Vec::new(), weights: Vec::new(), values: Vec::new() };
    if planar {
        for row in r.deserialize::<(f64, f64, f64, f64)>() {
            let (x, y, w, v) = row?;
            dump.coords.push([x, y]);
            dump.weights.push(w);
            dump.values.push(v);
        }
    } else {
        for row in r.deserialize::<(f64, f64, f64)>() {
            let (x, w, v) = row?;
            dump.coords.push([x, 0.0]);
            dump.weights.push(w);
            dump.values.push(v);
        }
    }
    Ok(dump)
}

/// Header `r,u,du`.
pub fn write_profile_csv<W: Write>(out: W, p: &RadialProfile) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["r", "u", "du"])?;
    for ((r, u), du) in p.r.iter().zip(&p.u).zip(&p.du) {
        w.write_record([num(*r), num(*u), num(*du)])?;
    }
    w.flush()?;
    Ok(())
}

/// Header `delta,measure`.
pub fn write_zero_curve_csv<T: Scalar, W: Write>(out: W, curve: &ZeroSetCurve<T>) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["delta", "measure"])?;
    for p in &curve.points {
        w.write_record([num(p.delta.as_f64()), num(p.measure.as_f64())])?;
    }
    w.flush()?;
    Ok(())
}
