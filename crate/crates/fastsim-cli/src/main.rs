use fastsim_cli::{bench, run};

const USAGE: &str = "\
usage: fastsim COMMAND [arguments]

commands:
  run CONFIG    run a pipeline from a JSON config
  bench CONFIG  sweep worker counts; write a CSV table and SVG plots

`fastsim COMMAND -h` prints the command's flags.";

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let code = match args.first().map(String::as_str) {
        Some("run") => run_main(&args[1..]),
        Some("bench") => bench_main(&args[1..]),
        Some("help" | "-h" | "--help") => {
            println!("{USAGE}");
            0
        }
        Some(other) => {
            eprintln!("fastsim: unknown command `{other}`\n\n{USAGE}");
            2
        }
        None => {
            eprintln!("{USAGE}");
            2
        }
    };
    std::process::exit(code);
}

fn wants_help(args: &[String]) -> bool {
    args.iter().any(|a| a == "-h" || a == "--help" || a == "-help")
}

fn run_main(args: &[String]) -> i32 {
    if wants_help(args) {
        println!("{}", run::USAGE);
        return 0;
    }
    let flags = match run::RunFlags::parse(args) {
        Ok(flags) => flags,
        Err(e) => {
            eprintln!("fastsim run: {e}\n\n{}", run::USAGE);
            return 2;
        }
    };
    match run::run(&flags) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("fastsim run: {e}");
            1
        }
    }
}

fn bench_main(args: &[String]) -> i32 {
    if wants_help(args) {
        println!("{}", bench::USAGE);
        return 0;
    }
    let flags = match bench::BenchFlags::parse(args) {
        Ok(flags) => flags,
        Err(e) => {
            eprintln!("fastsim bench: {e}\n\n{}", bench::USAGE);
            return 2;
        }
    };
    match bench::bench(&flags) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("fastsim bench: {e}");
            1
        }
    }
}
