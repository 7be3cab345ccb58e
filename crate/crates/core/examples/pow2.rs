//! Decides "the path length is a power of two" with the Datalog program
//! and prints the verdict and timing for a few lengths.

use std::time::Instant;

use coregql::datalog::{encode_graph, eval_datalog, parse_program, POW2_PROGRAM};
use coregql::graph::dataless_path;

fn main() {
    let program = parse_program(POW2_PROGRAM).expect("built-in program parses");
    for n in [3, 8, 16, 24, 32, 64] {
        let start = Instant::now();
        let model = eval_datalog(&encode_graph(&dataless_path(n)), &program).expect("evaluates");
        println!("n={n:<3} pow2={:<5} {:?}", model.boolean().unwrap_or(false), start.elapsed());
    }
}
