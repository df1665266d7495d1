//! Parse a small OpenQASM 2 program, lower it to native gates and print it
//! back out.

use quell::qasm::{emit_qasm, parse_qasm};
use quell::transpile::{reduce, to_native};

const PROGRAM: &str = r#"
OPENQASM 2.0;
include "qelib1.inc";
qreg q[3];
creg c[3];
h q[0];
cx q[0], q[1];
rz(pi/4) q[1];
rz(-pi/4) q[1];
cx q[1], q[2];
delay(200) q[0];
measure q -> c;
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c = parse_qasm(PROGRAM)?;
    println!("parsed: {} qubits, {} gates, {} CX, depth {}", c.num_qubits, c.gates.len(), c.cx_count(), c.depth());
    let native = reduce(&to_native(&c)?);
    println!("native + reduced: {} gates, {} CX\n", native.gates.len(), native.cx_count());
    print!("{}", emit_qasm(&native)?);
    Ok(())
}
