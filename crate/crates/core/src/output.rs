//! Columnar text output helpers.

use std::io::Write;

use crate::model::NetworkSnapshot;

/// Significant digits of every float written to CSV.
pub const SIGNIFICANT_DIGITS: usize = 9;

/// `%.9g`-style rendering: 9 significant digits, trailing zeros dropped,
/// scientific notation outside `[1e-4, 1e9)`.
pub fn fmt_g(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let p = SIGNIFICANT_DIGITS;
    let sci = format!("{:.*e}", p - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= p as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes one row per server (`entity = es`) and one per pair (`entity = ue`)
/// for every snapshot.
pub fn write_snapshots<'a>(
    mut out: impl Write,
    snapshots: impl IntoIterator<Item = &'a NetworkSnapshot>,
) -> std::io::Result<()> {
    writeln!(out, "slot,entity,id,storage_cap,compute_cap,src_x,src_y,dst_x,dst_y")?;
    for s in snapshots {
        for (m, (phi, c)) in s.storage_cap.iter().zip(&s.compute_cap).enumerate() {
            writeln!(out, "{},es,{m},{},{},,,,", s.slot, fmt_g(*phi), fmt_g(*c))?;
        }
        for (n, [a, b]) in s.ue_positions.iter().enumerate() {
            writeln!(out, "{},ue,{n},,,{},{},{},{}", s.slot, fmt_g(a.x), fmt_g(a.y), fmt_g(b.x), fmt_g(b.y))?;
        }
    }
    Ok(())
}
