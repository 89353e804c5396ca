//! Generate a trace, store it as CSV and packed binary, read both back.
//!
//! cargo run --example trace_io

use mvpipe::traces::{gen_zipf, read_trace, split_epochs, write_trace, TraceFormat};

fn main() -> mvpipe::Result<()> {
    let dir = std::env::temp_dir().join("mvpipe-trace-io");
    std::fs::create_dir_all(&dir)?;
    let trace = split_epochs(gen_zipf(10_000, 1.0, 1_000, 5)?, 4_000)?;

    let csv = dir.join("trace.csv");
    let packed = dir.join("trace.bin");
    write_trace(&trace, &csv, TraceFormat::Csv)?;
    write_trace(&trace, &packed, TraceFormat::Packed)?;

    let from_csv = read_trace(&csv, TraceFormat::Csv)?;
    let from_packed = read_trace(&packed, TraceFormat::Packed)?;
    println!("csv {} bytes, packed {} bytes", std::fs::metadata(&csv)?.len(), std::fs::metadata(&packed)?.len());
    // CSV has no place for epoch boundaries.
    assert_eq!(from_csv.records, trace.records);
    assert_eq!(from_packed, trace);
    let sizes: Vec<usize> = from_packed.epochs().iter().map(|e| e.len()).collect();
    println!("epochs {sizes:?}, first record {:?}", from_packed.records[0]);
    Ok(())
}
