fn main() {
    std::process::exit(cspmon::run_cli(std::env::args_os()));
}
