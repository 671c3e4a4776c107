use std::process::ExitCode;

use hsac::metrics::format_table;
use hsac::pipeline::{parse_cli, run_bench, run_compare, run_pipeline, run_self_test, Command, SelfTestOptions, Stage};

fn exit(code: i32) -> ExitCode {
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let command = match parse_cli(std::env::args_os()) {
        Ok(c) => c,
        Err(e) => {
            if e.exit_code() == 0 {
                print!("{e}");
            } else {
                eprintln!("error: {e}");
            }
            return exit(e.exit_code());
        }
    };
    let result = match command {
        Command::Run(config) => run_pipeline(&config).map(|report| {
            println!(
                "scene {}: {} valid bands, {} masked, negativity rate {:.4}, output {}",
                report.scene_id,
                report.valid_band_count,
                report.masked_bands.len(),
                report.negativity_rate,
                config.output_path.display()
            );
            0
        }),
        Command::SelfTest(args) if args.bench => run_bench(512, 512, args.workers).map(|b| {
            println!(
                "bench: {} bands x {}x{} px, {} workers, stage 4 {:.3} s, max |error| {:.3e}",
                b.bands, b.rows, b.cols, b.workers, b.inversion_seconds, b.max_abs_error
            );
            0
        }),
        Command::SelfTest(args) => run_self_test(&SelfTestOptions {
            rows: args.rows,
            cols: args.cols,
            workers: args.workers,
            output: args.output,
        })
        .map(|o| {
            println!(
                "{}: {} of {} bands valid, {}x{} px, max |error| {:.3e}, {:.0} ms",
                if o.passed { "PASS" } else { "FAIL" },
                o.valid_bands,
                o.bands,
                o.rows,
                o.cols,
                o.max_abs_error,
                o.elapsed_ms
            );
            if o.passed {
                0
            } else {
                Stage::Inversion.exit_code()
            }
        }),
        Command::Compare(args) => run_compare(&args).map(|set| {
            let mut rows = set.per_reference.clone();
            rows.push(set.aggregate.clone());
            print!("{}", format_table(&rows));
            0
        }),
    };
    match result {
        Ok(code) => exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            exit(e.exit_code())
        }
    }
}
