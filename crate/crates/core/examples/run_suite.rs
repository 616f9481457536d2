//! Runs one verification suite and prints a line per check.
//!
//! `cargo run --release --example run_suite -- factor [full]`

use splitfactor::verification::{run_suite, Suite};
use splitfactor::UnitValue;

fn main() -> splitfactor::Result<()> {
    let mut args = std::env::args().skip(1);
    let suite: Suite = args.next().unwrap_or_else(|| "coupling".into()).parse()?;
    let full = args.next().as_deref() == Some("full");
    for r in run_suite(suite, UnitValue::from_f64(0.1234), full)? {
        println!("{}", r.summary());
    }
    Ok(())
}
